"""Brute-force ground truth for the counting bounds.

Lattice points of Gamma = B^-1 Z^zeta are enumerated in an integer index box
that provably contains every cell meeting the disk; containment and
intersection of product-of-balls sets are tested per class block, which is
exact for this geometry.  Nothing here calls the closed-form bounds except to
compare against them.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cell_geometry import UnstableChart, cell_count_bounds, cell_in_cube, iterated_bounds, unstable_chart
from .eps_jordan import eps_jordan
from .errors import BudgetExceeded, HypothesisViolated, PreconditionViolated
from .spectral import spectral_data

ENUM_BUDGET = 10**8
_CHUNK = 1 << 20


@dataclass(frozen=True)
class CellCount:
    covered: int
    intersecting: int
    enumerated_box: tuple  # ((lo, hi), ...) per integer coordinate


def _index_box(chart, offset, reach):
    """Integer bounds on n = B gamma for every gamma with |gamma_j - offset_j| <= reach_j."""
    half = chart.row_block_norms() @ reach
    centre = chart.B @ offset
    lo = np.floor(centre - half).astype(np.int64) - 1
    hi = np.ceil(centre + half).astype(np.int64) + 1
    return lo, hi


def _count_slab(args):
    chart, lo, hi, first, last, offset, cell_r, disk_R = args
    zt = chart.zeta_total
    slices = chart.class_slices()
    ranges = [np.arange(first, last + 1)] + [np.arange(a, b + 1) for a, b in zip(lo[1:], hi[1:])]
    grids = np.meshgrid(*ranges, indexing="ij")
    n = np.stack([g.ravel() for g in grids], axis=1).astype(float)
    covered = intersecting = 0
    edge_hits = 0
    for start in range(0, n.shape[0], _CHUNK):
        part = n[start:start + _CHUNK]
        gamma = part @ chart.B_inv.T + offset
        cov = np.ones(part.shape[0], dtype=bool)
        inter = np.ones(part.shape[0], dtype=bool)
        for j, sl in enumerate(slices):
            norm = np.linalg.norm(gamma[:, sl], axis=1)
            cov &= norm + cell_r[j] <= disk_R[j]
            inter &= norm <= cell_r[j] + disk_R[j]
        covered += int(cov.sum())
        intersecting += int(inter.sum())
        # the outermost index layer must never be hit
        on_edge = np.zeros(part.shape[0], dtype=bool)
        for i in range(zt):
            on_edge |= (part[:, i] == lo[i]) | (part[:, i] == hi[i])
        edge_hits += int((inter & on_edge).sum())
    return covered, intersecting, edge_hits


def brute_force_cell_count(chart: UnstableChart, cell_r, disk_R, offset=None,
                           budget: int = ENUM_BUDGET, threads: int = 1) -> CellCount:
    """Count lattice cells gamma + offset + D(cell_r) covered by / meeting D(disk_R)."""
    cell_r = np.asarray(cell_r, dtype=float)
    disk_R = np.asarray(disk_R, dtype=float)
    zt = chart.zeta_total
    offset = np.zeros(zt) if offset is None else np.asarray(offset, dtype=float)
    # cells are centred at gamma + offset; shift so the disk sits at -offset
    reach = cell_r + disk_R
    lo, hi = _index_box(chart, -offset, reach)
    size = int(np.prod((hi - lo + 1).astype(float)))
    if size > budget:
        raise BudgetExceeded(f"enumeration box has {size:.3e} points, budget is {budget:.1e}")
    per_slab = max(1, size // int(hi[0] - lo[0] + 1))
    step = max(1, _CHUNK // per_slab)
    tasks = [(chart, lo, hi, int(f), int(min(f + step - 1, hi[0])), offset, cell_r, disk_R)
             for f in range(int(lo[0]), int(hi[0]) + 1, step)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_count_slab, tasks))
    else:
        parts = [_count_slab(t) for t in tasks]
    covered = sum(p[0] for p in parts)
    intersecting = sum(p[1] for p in parts)
    if sum(p[2] for p in parts):
        raise AssertionError("enumeration box was too small: a boundary index cell intersects the disk")
    # the padding layer proves the box suffices: report the unpadded extent
    box = tuple((int(a) + 1, int(b) - 1) for a, b in zip(lo, hi))
    return CellCount(covered, intersecting, box)


def verify_cellcover(chart: UnstableChart, R, cell_r, offset=None, threads: int = 1) -> dict:
    """g_minus(R) <= covered and intersecting <= g_plus(R), with margins."""
    R = [float(v) for v in R]
    if not cell_in_cube(chart, cell_r):
        return {"pass": False, "precondition": "cell does not fit in its block", "counterexample": False}
    if any(v <= chart.alpha for v in R):
        return {"pass": False, "precondition": "some R_j <= alpha", "counterexample": False}
    g_minus, g_plus = cell_count_bounds(chart, R)
    cc = brute_force_cell_count(chart, cell_r, R, offset=offset, threads=threads)
    ok = g_minus <= cc.covered and cc.intersecting <= g_plus and cc.covered <= cc.intersecting
    return {
        "pass": bool(ok),
        "precondition": None,
        "counterexample": not ok,
        "g_minus": g_minus,
        "g_plus": g_plus,
        "covered": cc.covered,
        "intersecting": cc.intersecting,
        "lower_margin": cc.covered - g_minus,
        "upper_margin": g_plus - cc.intersecting,
    }


@dataclass(frozen=True)
class ComponentBounds:
    m: int
    n_minus: int
    n_plus: int
    lower: int
    upper: int
    log_g_minus: float
    log_g_plus: float
    passed: bool

    @property
    def g_minus_pow_m(self) -> float:
        return _exp(self.m * self.log_g_minus)

    @property
    def g_plus_pow_m(self) -> float:
        return _exp(self.m * self.log_g_plus)

    def generations(self):
        """Rows (generation, N-^i, N+^i, g-^i, g+^i) for i = 1..m."""
        for i in range(1, self.m + 1):
            yield (i, self.n_minus ** i, self.n_plus ** i,
                   _exp(i * self.log_g_minus), _exp(i * self.log_g_plus))

    def to_dict(self) -> dict:
        return {
            "m": self.m, "n_minus": self.n_minus, "n_plus": self.n_plus,
            "lower": str(self.lower), "upper": str(self.upper),
            "log_g_minus": self.log_g_minus, "log_g_plus": self.log_g_plus,
            "cantor_branching": self.n_minus >= 2, "pass": self.passed,
        }


def _exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def component_bounds(chart: UnstableChart, chi, epsilon: float, k: int, r, m: int = 1,
                     threads: int = 1) -> ComponentBounds:
    """Per-generation exact counts through the image sandwich.

    N- counts cells of D(r) covered by D((chi - eps)^k r) and N+ counts cells
    meeting D((chi + eps)^k r); after m generations there are at least N-^m
    and at most N+^m components.
    """
    chi = tuple(getattr(chi, "chi", chi))
    if m < 1 or m > 12:
        raise PreconditionViolated("m must lie in 1..12")
    r = [float(v) for v in r]
    R_minus = [v * (c - epsilon) ** k for v, c in zip(r, chi)]
    R_plus = [v * (c + epsilon) ** k for v, c in zip(r, chi)]
    if any(v <= chart.alpha for v in R_minus):
        raise HypothesisViolated("r_j (chi_j - eps)^k must exceed alpha")
    if not cell_in_cube(chart, r):
        raise PreconditionViolated("cell D(r) does not fit in its block")
    b = iterated_bounds(chart, chi, k, r, epsilon)
    n_minus = brute_force_cell_count(chart, r, R_minus, threads=threads).covered
    n_plus = brute_force_cell_count(chart, r, R_plus, threads=threads).intersecting
    ok = (b.log_g_minus <= _log(n_minus)) and (n_minus <= n_plus) and (_log(n_plus) <= b.log_g_plus)
    return ComponentBounds(m, n_minus, n_plus, n_minus ** m, n_plus ** m,
                           b.log_g_minus, b.log_g_plus, bool(ok))


def matrix_component_bounds(A, epsilon: float, k: int, r, m: int = 1, threads: int = 1,
                            coords=None) -> ComponentBounds:
    """component_bounds with the chart built from ``A`` at ``epsilon``."""
    sd = spectral_data(A)
    chart = unstable_chart(eps_jordan(A, sd, epsilon), sd, coords=coords)
    return component_bounds(chart, sd.chi, epsilon, k, r, m, threads=threads)


def _log(n):
    return math.log(n) if n > 0 else -math.inf


def _torus_dist(d):
    d = np.abs(d - np.round(d))
    return np.max(d, axis=-1)


def _unstable_directions(A):
    """Real basis of the expanding subspace and the modulus attached to each vector."""
    w, v = np.linalg.eig(A)
    dirs, rates = [], []
    done = set()
    for i in np.argsort(-np.abs(w)):
        if abs(w[i]) <= 1 + 1e-9 or i in done:
            continue
        if abs(w[i].imag) > 1e-12:
            j = int(np.argmin(np.abs(w - w[i].conjugate()) + (np.arange(len(w)) == i)))
            done.add(j)
            dirs += [v[:, i].real, v[:, i].imag]
            rates += [abs(w[i])] * 2
        else:
            dirs.append(v[:, i].real)
            rates.append(abs(w[i]))
        done.add(i)
    if not dirs:
        return np.zeros((A.shape[0], 0)), []
    D = np.column_stack(dirs)
    D = D / np.linalg.norm(D, axis=0)
    return D, rates


def _greedy_separated(A, D, rates, n, delta, resolution):
    """Greedy maximal (n, delta)-separated subset of a disk grid resolving step n."""
    l = A.shape[0]
    counts_per_dir = [max(2, int(math.ceil(resolution * rate ** (n - 1)))) + 1 for rate in rates]
    axes = [np.linspace(0.0, delta, c) for c in counts_per_dir]
    params = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
    pts = (np.full(l, delta / 2) + params @ D.T) % 1.0
    traj = np.empty((pts.shape[0], n, l))
    traj[:, 0] = pts
    for i in range(1, n):
        traj[:, i] = (traj[:, i - 1] @ A.T) % 1.0
    cells = int(math.floor(1.0 / delta))
    keys = [tuple(v) for v in (np.floor(traj[:, n - 1] * cells).astype(np.int64) % cells).tolist()]
    offsets = list(itertools.product((-1, 0, 1), repeat=l))
    buckets: dict = {}
    chosen = 0
    for p, kp in enumerate(keys):
        near = []
        for off in offsets:
            b = buckets.get(tuple((a + o) % cells for a, o in zip(kp, off)))
            if b:
                near.extend(b)
        if near and np.any(np.max(_torus_dist(traj[near] - traj[p]), axis=1) <= delta):
            continue
        chosen += 1
        buckets.setdefault(kp, []).append(p)
    return chosen, pts.shape[0]


def separated_set_entropy(A, n_max: int = 12, delta: float = 0.05, budget: int = 2_000_000,
                          resolution: float = 2.0, return_counts: bool = False):
    """Growth rate of greedy (n, delta)-separated sets on a local unstable disk.

    For each n the seed points form a grid on the disk spanned by the expanding
    eigendirections through a fixed grid point of the torus, with spacing
    delta / resolution shrunk by the expansion rate n - 1 times, so separation
    at step n is resolved.  Separation uses the sup-metric on the torus over the
    first n iterates.  The estimate is the least-squares slope of log S(n) over
    the second half of 1..n_max.
    """
    A = np.array(getattr(A, "rows", A), dtype=float)
    l = A.shape[0]
    if l > 3:
        raise PreconditionViolated("the separated-set estimator is limited to l <= 3")
    if not 0 < delta < 0.5:
        raise PreconditionViolated("delta must lie in (0, 1/2)")
    D, rates = _unstable_directions(A)
    if D.shape[1] == 0:
        D, rates = np.eye(l)[:, :1], [1.0]
    need = math.prod(int(math.ceil(resolution * r ** (n_max - 1))) + 1 for r in rates)
    if need > budget:
        raise BudgetExceeded(f"{need:.3e} seed points needed, budget is {budget:.1e}")
    counts = [_greedy_separated(A, D, rates, n, delta, resolution)[0] for n in range(1, n_max + 1)]
    ns = np.arange(1, n_max + 1)
    half = ns > n_max // 2
    slope = float(np.polyfit(ns[half], np.log(np.array(counts)[half]), 1)[0])
    return (slope, counts) if return_counts else slope
