import pytest

from toral_entropy.exact_matrix import IntegerMatrix

CAT_ROWS = [[2, 1], [1, 1]]
# companion of x^4 - x^3 - x^2 - x + 1 (smallest-degree Salem polynomial of this shape)
SALEM_ROWS = [[0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1], [-1, 1, 1, 1]]


@pytest.fixture
def cat():
    return IntegerMatrix(CAT_ROWS)


@pytest.fixture
def salem():
    return IntegerMatrix(SALEM_ROWS)
