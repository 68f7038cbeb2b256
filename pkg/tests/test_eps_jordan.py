import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toral_entropy.errors import IllConditioned, PreconditionViolated
from toral_entropy.eps_jordan import eps_jordan, sandwich_check
from toral_entropy.exact_matrix import IntegerMatrix
from toral_entropy.spectral import spectral_data

# x^3 + x^2 - 1: one contracting real root, an expanding complex pair
COMPLEX_PAIR = IntegerMatrix([[0, 1, 0], [0, 0, 1], [1, 0, -1]])


def conjugated_jordan(seed=4):
    """A real 4x4 matrix similar to a 2-block complex Jordan chain of modulus 1.5."""
    a, b = 1.2, 0.9
    J = np.zeros((4, 4))
    J[:2, :2] = J[2:, 2:] = [[a, -b], [b, a]]
    J[:2, 2:] = np.eye(2)
    P = np.random.default_rng(seed).normal(size=(4, 4)) + 3 * np.eye(4)
    return P @ J @ np.linalg.inv(P)


def test_diagonal_gives_identity_basis():
    ejf = eps_jordan(np.diag([3.0, 1 / 3]), epsilon=0.05)
    assert np.allclose(ejf.Q, np.eye(2))
    assert ejf.chi == (3.0,) and ejf.zeta == (1,)


def test_nilpotent_coupling_is_epsilon():
    ejf = eps_jordan(np.array([[2.0, 1.0], [0.0, 2.0]]), epsilon=0.1)
    assert np.allclose(ejf.A_eps, [[2.0, 0.1], [0.0, 2.0]])
    assert np.allclose(ejf.Q, np.diag([1.0, 0.1]))
    assert ejf.blocks[0].size == 2


def test_cat_map_residual(cat):
    ejf = eps_jordan(cat, spectral_data(cat), epsilon=0.01)
    assert ejf.residual < 1e-12
    assert np.allclose(ejf.Q @ ejf.A_eps @ ejf.Q_inv, cat.rows)
    assert ejf.unstable_block.shape == (1, 1)


def test_complex_pair_block_shape():
    sd = spectral_data(COMPLEX_PAIR)
    ejf = eps_jordan(COMPLEX_PAIR, sd, epsilon=0.01)
    assert ejf.zeta == (2,)
    blk = ejf.unstable_block
    assert blk[0, 0] == pytest.approx(blk[1, 1]) and blk[0, 1] == pytest.approx(-blk[1, 0])
    assert np.hypot(blk[0, 0], blk[1, 0]) == pytest.approx(sd.chi[0], rel=1e-12)


def test_conjugated_complex_chain():
    ejf = eps_jordan(conjugated_jordan(), epsilon=0.02)
    assert ejf.zeta == (4,)
    assert ejf.residual < 1e-10
    assert abs(ejf.A_eps[0, 2]) == pytest.approx(0.02)


@pytest.mark.parametrize("make,r", [
    (lambda: eps_jordan(np.diag([3.0, 2.0, 0.1]), epsilon=0.05), [0.3, 0.2]),
    (lambda: eps_jordan(np.array([[2.0, 1.0], [0.0, 2.0]]), epsilon=0.05), [0.2]),
    (lambda: eps_jordan(conjugated_jordan(), epsilon=0.05), [0.1]),
    (lambda: eps_jordan(COMPLEX_PAIR, epsilon=0.05), [0.1]),
])
@pytest.mark.parametrize("k", [1, 4, 10])
def test_sandwich(make, r, k):
    rep = sandwich_check(make(), r, samples=2000, k=k, seed=k)
    assert rep["pass"], rep


def test_sandwich_precondition():
    ejf = eps_jordan(np.diag([1.05, 1 / 1.05]), epsilon=0.01)
    object.__setattr__(ejf, "epsilon", 2.0)
    with pytest.raises(PreconditionViolated):
        sandwich_check(ejf, [0.1])


def test_condition_cap():
    with pytest.raises(IllConditioned):
        eps_jordan(np.array([[2.0, 1.0], [0.0, 2.0]]), epsilon=1e-9)


@given(st.floats(1.1, 4.0), st.floats(0.001, 0.09))
@settings(max_examples=40, deadline=None)
def test_sandwich_property_single_jordan_chain(lam, eps):
    A = lam * np.eye(3) + np.eye(3, k=1)
    ejf = eps_jordan(A, epsilon=eps)
    assert sandwich_check(ejf, [0.2], samples=500, k=3, seed=1)["pass"]
