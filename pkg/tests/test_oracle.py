import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from toral_entropy.cell_geometry import UnstableChart, unstable_chart
from toral_entropy.eps_jordan import eps_jordan
from toral_entropy.errors import BudgetExceeded, HypothesisViolated, PreconditionViolated
from toral_entropy.exact_matrix import IntegerMatrix
from toral_entropy.oracle import (
    brute_force_cell_count, component_bounds, separated_set_entropy, verify_cellcover,
)
from toral_entropy.spectral import spectral_data


def naive_count(B, zeta, cell_r, disk_R, reach=30):
    """Pure-python double loop over a generous index box."""
    B_inv = np.linalg.inv(np.asarray(B, dtype=float))
    zt = len(B)
    bounds, covered, inter = [], 0, 0
    starts = np.cumsum([0] + list(zeta))
    for n in itertools.product(range(-reach, reach + 1), repeat=zt):
        g = B_inv @ np.array(n, dtype=float)
        c = i = True
        for j in range(len(zeta)):
            norm = float(np.linalg.norm(g[starts[j]:starts[j + 1]]))
            c &= norm + cell_r[j] <= disk_R[j]
            i &= norm <= cell_r[j] + disk_R[j]
        covered += c
        inter += i
    return covered, inter


def test_integer_line():
    ch = UnstableChart.from_matrix([[1.0]])
    cc = brute_force_cell_count(ch, [0.3], [2.7])
    assert (cc.covered, cc.intersecting) == (5, 7)


def test_integer_plane():
    ch = UnstableChart.from_matrix(np.eye(2), [2])
    cc = brute_force_cell_count(ch, [0.1], [1.0])
    assert (cc.covered, cc.intersecting) == (1, 5)


@pytest.mark.parametrize("B,zeta,r,R", [
    ([[1.3, 0.4], [-0.2, 0.9]], (1, 1), [0.1, 0.15], [3.1, 2.4]),
    ([[0.8, 0.3], [0.1, 1.2]], (2,), [0.12], [4.3]),
    ([[2.0]], (1,), [0.05], [5.55]),
])
def test_matches_naive_loop(B, zeta, r, R):
    ch = UnstableChart(np.array(B), zeta)
    cc = brute_force_cell_count(ch, r, R)
    assert (cc.covered, cc.intersecting) == naive_count(B, zeta, r, R)


def test_threads_agree():
    ch = UnstableChart(np.array([[0.9, 0.1, 0.0], [0.2, 1.1, 0.3], [0.0, -0.4, 0.8]]), (1, 2))
    a = brute_force_cell_count(ch, [0.1, 0.1], [6.0, 7.0], threads=1)
    b = brute_force_cell_count(ch, [0.1, 0.1], [6.0, 7.0], threads=4)
    assert a == b


def test_budget():
    ch = UnstableChart.from_matrix(np.eye(3) * 100.0, [3])
    with pytest.raises(BudgetExceeded):
        brute_force_cell_count(ch, [0.1], [50.0], budget=1e5)


@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6), st.floats(0.5, 1.5), st.floats(0.02, 0.2),
       st.floats(0.5, 6.0), st.floats(0.5, 6.0))
@settings(max_examples=60, deadline=None)
def test_cellcover_property(b01, b10, b11, r, e1, e2):
    B = np.array([[1.0, b01], [b10, b11]])
    if abs(np.linalg.det(B)) < 0.2:
        return
    ch = UnstableChart(B, (1, 1))
    if (ch.row_block_norms() @ [r, r] >= 0.5).any():
        return
    R = [ch.alpha + e1, ch.alpha + e2]
    v = verify_cellcover(ch, R, [r, r])
    assert v["precondition"] is None and v["pass"], v


def test_cellcover_guards():
    ch = UnstableChart.from_matrix([[1.0]])
    assert verify_cellcover(ch, [0.5], [0.1])["precondition"] == "some R_j <= alpha"
    assert verify_cellcover(ch, [5.0], [0.6])["precondition"] == "cell does not fit in its block"


def test_component_bounds_cat(cat):
    sd = spectral_data(cat)
    eps, k = 0.05, 8
    ch = unstable_chart(eps_jordan(cat, sd, eps), sd)
    r = [0.2]
    cb = component_bounds(ch, sd.chi, eps, k, r, m=3)
    assert cb.passed and cb.n_minus >= 2
    rows = list(cb.generations())
    assert [row[0] for row in rows] == [1, 2, 3]
    assert all(g_lo <= n_lo <= n_hi <= g_hi for _, n_lo, n_hi, g_lo, g_hi in rows)
    assert cb.lower == cb.n_minus ** 3


def test_component_bounds_preconditions(cat):
    sd = spectral_data(cat)
    ch = unstable_chart(eps_jordan(cat, sd, 0.05), sd)
    with pytest.raises(HypothesisViolated):
        component_bounds(ch, sd.chi, 0.05, 1, [0.1])
    with pytest.raises(PreconditionViolated):
        component_bounds(ch, sd.chi, 0.05, 8, [0.1], m=0)


def test_separated_sets_finite_order_is_flat():
    for rows in ([[0, 1], [-1, 0]], [[1, 0], [0, 1]], [[0, -1], [1, -1]]):
        assert abs(separated_set_entropy(np.array(rows), n_max=10)) < 0.02


def test_separated_sets_counts_grow_for_cat(cat):
    slope, counts = separated_set_entropy(cat, n_max=8, return_counts=True)
    assert counts == sorted(counts)
    assert slope == pytest.approx(math.log((3 + math.sqrt(5)) / 2), abs=0.15)


def test_separated_sets_limits():
    with pytest.raises(PreconditionViolated):
        separated_set_entropy(np.eye(4))
    with pytest.raises(BudgetExceeded):
        separated_set_entropy(IntegerMatrix([[2, 1], [1, 1]]), n_max=30, budget=1000)


def test_matrix_wrapper_matches_chart_form(cat):
    from toral_entropy.oracle import matrix_component_bounds
    sd = spectral_data(cat)
    ch = unstable_chart(eps_jordan(cat, sd, 0.05), sd)
    assert matrix_component_bounds(cat, 0.05, 8, [0.2], m=2) == component_bounds(ch, sd.chi, 0.05, 8, [0.2], m=2)
