"""Unstable-chart geometry: return lattice, block constants and the g-/g+ bounds.

A leaf point ``[x + Q y]`` lies in the slab ``K(r)`` iff ``B y`` lies in
``B D(r) + Z^zeta`` (up to a base-point offset), where ``B`` is the coordinate
projection of the unstable columns of ``Q``.  So cells are translates of
``D(r)`` by the lattice ``Gamma = B^-1 Z^zeta`` and blocks are translates of
the parallelepiped spanned by the columns of ``B^-1``.

All bound functions work in log space: at k in the thousands the raw values
``(chi +- eps)^k`` overflow doubles.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateProjection, HypothesisViolated

ALPHA0_MARGIN = 0.01
TAU_SAFETY = 0.49


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


@dataclass(frozen=True)
class UnstableChart:
    B: np.ndarray
    zeta: tuple  # per-class block dimensions
    coords: tuple = ()  # torus coordinates used by the projection
    B_inv: np.ndarray = field(init=False, repr=False)
    alpha: float = field(init=False)
    C1: float = field(init=False)
    C2: float = field(init=False)
    C0: float = field(init=False)

    def __post_init__(self):
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        zt = int(sum(self.zeta))
        if B.shape != (zt, zt):
            raise ValueError(f"B has shape {B.shape}, expected {(zt, zt)}")
        det = float(np.linalg.det(B))
        if abs(det) < 1e-10 * max(np.linalg.norm(B, 2), 1e-300) ** zt:
            raise DegenerateProjection(f"|det B| = {abs(det):.3e} is numerically zero")
        B_inv = np.linalg.inv(B)
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=zt)))
        alpha = float(np.max(np.linalg.norm(signs @ B_inv.T, axis=1)))
        C1 = abs(float(np.linalg.det(B_inv)))
        C2 = float(np.prod([unit_ball_volume(d) for d in self.zeta]))
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "zeta", tuple(int(z) for z in self.zeta))
        object.__setattr__(self, "coords", tuple(self.coords) or tuple(range(zt)))
        object.__setattr__(self, "B_inv", B_inv)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "C1", C1)
        object.__setattr__(self, "C2", C2)
        object.__setattr__(self, "C0", C2 / C1)

    @classmethod
    def from_matrix(cls, B, zeta=None) -> "UnstableChart":
        B = np.atleast_2d(np.asarray(B, dtype=float))
        return cls(B, tuple(zeta) if zeta is not None else (B.shape[0],))

    @property
    def zeta_total(self) -> int:
        return int(sum(self.zeta))

    @property
    def lattice_basis(self) -> np.ndarray:
        return self.B_inv

    def class_slices(self) -> list:
        out, start = [], 0
        for z in self.zeta:
            out.append(slice(start, start + z))
            start += z
        return out

    def row_block_norms(self) -> np.ndarray:
        """``[i, j]`` = Euclidean norm of the class-j segment of row i of B."""
        return np.column_stack([np.linalg.norm(self.B[:, sl], axis=1) for sl in self.class_slices()])

    def to_dict(self) -> dict:
        return {
            "B": self.B.tolist(),
            "zeta": list(self.zeta),
            "coords": list(self.coords),
            "lattice_basis": self.B_inv.tolist(),
            "alpha": self.alpha,
            "C1": self.C1,
            "C2": self.C2,
            "C0": self.C0,
        }


def unstable_chart(ejf, sd=None, coords=None, auto_coords: bool = True) -> UnstableChart:
    """Chart of the unstable leaf from an :class:`EpsJordanForm`.

    The first ``zeta`` torus coordinates are used unless they fail to chart the
    unstable subspace; then every coordinate subset is tried and the one with
    the largest ``|det B|`` wins (recorded in ``chart.coords``).
    """
    zt = ejf.zeta_total
    if zt < 1:
        raise DegenerateProjection("no unstable directions (zeta = 0)")
    U = ejf.Q[:, :zt]
    l = U.shape[0]

    def build(cs):
        return UnstableChart(U[list(cs), :], ejf.zeta, tuple(cs))

    if coords is not None:
        return build(coords)
    try:
        return build(range(zt))
    except DegenerateProjection:
        if not auto_coords:
            raise
    best = max(itertools.combinations(range(l), zt), key=lambda cs: abs(np.linalg.det(U[list(cs), :])))
    return build(best)


def _log_sub(log_a: float, b: float) -> float:
    """log(exp(log_a) - b) for exp(log_a) > b >= 0."""
    return log_a + math.log1p(-b * math.exp(-log_a))


def _log_add(log_a: float, b: float) -> float:
    """log(exp(log_a) + b) for b >= 0."""
    if b == 0:
        return log_a
    lb = math.log(b)
    hi, lo = max(log_a, lb), min(log_a, lb)
    return hi + math.log1p(math.exp(lo - hi))


def log_g_minus_from_log_radii(chart: UnstableChart, log_R) -> float:
    alpha = chart.alpha
    total = math.log(chart.C0)
    for z, lr in zip(chart.zeta, log_R):
        if lr <= math.log(alpha):
            raise HypothesisViolated(f"radius exp({lr:.6g}) does not exceed alpha = {alpha:.6g}")
        total += z * _log_sub(lr, alpha)
    return total


def log_g_plus_from_log_radii(chart: UnstableChart, log_R) -> float:
    alpha = chart.alpha
    total = math.log(chart.C0)
    for z, lr in zip(chart.zeta, log_R):
        total += z * _log_add(lr, alpha)
    return _log_add(total, 1.0)


def cell_count_bounds(chart: UnstableChart, R) -> tuple:
    """(g_minus, g_plus) for the disk D(R): C0 prod (R_j -+ alpha)^zeta_j (+1 on the upper side)."""
    R = [float(v) for v in R]
    if len(R) != len(chart.zeta):
        raise ValueError("one radius per modulus class is required")
    for v in R:
        if not v > chart.alpha:
            raise HypothesisViolated(f"radius {v} does not exceed alpha = {chart.alpha}")
    g_minus = chart.C0 * math.prod((v - chart.alpha) ** z for v, z in zip(R, chart.zeta))
    g_plus = chart.C0 * math.prod((v + chart.alpha) ** z for v, z in zip(R, chart.zeta)) + 1.0
    return g_minus, g_plus


@dataclass(frozen=True)
class IteratedBounds:
    log_g_minus: float
    log_g_plus: float

    @property
    def g_minus(self) -> float:
        return _safe_exp(self.log_g_minus)

    @property
    def g_plus(self) -> float:
        return _safe_exp(self.log_g_plus)

    def __iter__(self):
        yield self.g_minus
        yield self.g_plus


def _safe_exp(x):
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _log_pow(base: float, k: int) -> float:
    return k * math.log(base)


def iterated_bounds(chart: UnstableChart, chi, k: int, r, epsilon: float) -> IteratedBounds:
    """Bounds after k iterates: radii r_j (chi_j - eps)^k below and r_j (chi_j + eps)^k above.

    ``chi`` may be a sequence of moduli or anything with a ``chi`` attribute.
    """
    r = [float(v) for v in r]
    if any(v <= 0 for v in r):
        raise HypothesisViolated("radii must be positive")
    return iterated_bounds_log(chart, chi, k, [math.log(v) for v in r], epsilon)


def iterated_bounds_log(chart: UnstableChart, chi, k: int, log_r, epsilon: float) -> IteratedBounds:
    """As iterated_bounds, with the radii given by their logarithms (no underflow for large k)."""
    chi = tuple(getattr(chi, "chi", chi))
    if any(epsilon >= c for c in chi):
        raise HypothesisViolated("epsilon must be below every chi_j")
    lo = [lr + _log_pow(c - epsilon, k) for lr, c in zip(log_r, chi)]
    hi = [lr + _log_pow(c + epsilon, k) for lr, c in zip(log_r, chi)]
    return IteratedBounds(log_g_minus_from_log_radii(chart, lo), log_g_plus_from_log_radii(chart, hi))


def alpha0(chart: UnstableChart, margin: float = ALPHA0_MARGIN) -> float:
    """A radius alpha0 with g_minus(alpha0, ..., alpha0) > 1."""
    zt = chart.zeta_total
    a0 = chart.alpha + chart.C0 ** (-1.0 / zt) * (1.0 + margin)
    assert chart.C0 * (a0 - chart.alpha) ** zt > 1.0
    return a0


def support_halfwidths(chart: UnstableChart, r) -> np.ndarray:
    """sup over D(r) of |(B y)_i| for each coordinate i."""
    return chart.row_block_norms() @ np.asarray(r, dtype=float)


def tau(chart, safety=TAU_SAFETY) -> float:
    """Largest radius (times the safety factor) with B D(tau, ..., tau) inside (-1/2, 1/2)^zeta.

    Also callable as ``tau(ejf, chart)``; only the chart matters.
    """
    if isinstance(safety, UnstableChart):
        chart, safety = safety, TAU_SAFETY
    t = safety / float(np.max(chart.row_block_norms().sum(axis=1)))
    assert np.all(support_halfwidths(chart, [t] * len(chart.zeta)) < 0.5)
    return t


def cell_in_cube(chart: UnstableChart, r) -> bool:
    return bool(np.all(support_halfwidths(chart, r) < 0.5))


@dataclass(frozen=True)
class OmegaBox:
    feasible: bool
    lo: tuple
    hi: tuple
    reason: str = ""
    log_lo: tuple = ()

    def diagonal(self, t: float) -> list:
        return [(1 - t) * a + t * b for a, b in zip(self.lo, self.hi)]


def check_assumptions(chart: UnstableChart, chi, k: int, epsilon: float, r, a0: float,
                      log_r=None) -> dict:
    """The three construction assumptions, evaluated at a concrete radius vector.

    ``log_r`` overrides log(r) in the radius test; radii below the float range need it.
    """
    chi = tuple(getattr(chi, "chi", chi))
    log_r = [math.log(v) for v in r] if log_r is None else list(log_r)
    x = [(c - epsilon) ** k if k * math.log(c - epsilon) < 700 else math.inf for c in chi]
    expansion = all(v > 2 for v in x)
    radius = all(lr + k * math.log(c - epsilon) >= math.log(3 * a0) - 1e-12
                 for lr, c in zip(log_r, chi))
    cube = cell_in_cube(chart, r)
    return {"expansion": expansion, "radius_lower": radius, "cell_in_cube": cube,
            "all": expansion and radius and cube}


def omega_k(chi, chart: UnstableChart, k: int, epsilon: float, a0: float | None = None,
            t: float | None = None) -> OmegaBox:
    """The admissible radius box 3 alpha0 / (chi_j - eps)^k <= r_j <= tau, or infeasible."""
    chi = tuple(getattr(chi, "chi", chi))
    a0 = alpha0(chart) if a0 is None else a0
    t = tau(chart) if t is None else t
    if any(epsilon >= c for c in chi):
        return OmegaBox(False, (), (), "epsilon >= chi_j")
    logs = [k * math.log(c - epsilon) for c in chi]
    if any(lg <= math.log(2) for lg in logs):
        return OmegaBox(False, (), (), "(chi_j - eps)^k <= 2")
    log_lo = tuple(math.log(3 * a0) - lg for lg in logs)
    lo = tuple(math.exp(v) for v in log_lo)
    hi = tuple(t for _ in chi)
    if any(a > b for a, b in zip(lo, hi)):
        return OmegaBox(False, lo, hi, "lower corner exceeds tau", log_lo)
    box = OmegaBox(True, lo, hi, "", log_lo)
    for corner in itertools.product(*zip(zip(lo, log_lo), [(v, math.log(v)) for v in hi])):
        rep = check_assumptions(chart, chi, k, epsilon, [c[0] for c in corner], a0,
                                log_r=[c[1] for c in corner])
        assert rep["all"], f"Omega_k corner {corner} violates an assumption: {rep}"
    return box


def psi_k(chart: UnstableChart, chi, k: int, epsilon: float, a0: float | None = None,
          t: float | None = None) -> float:
    """Upper bound of log g+ - log g- over Omega_k, attained at the lower corner."""
    box = omega_k(chi, chart, k, epsilon, a0, t)
    if not box.feasible:
        raise HypothesisViolated(f"Omega_k is infeasible: {box.reason}")
    b = iterated_bounds_log(chart, chi, k, box.log_lo, epsilon)
    return b.log_g_plus - b.log_g_minus


def psi_limit(chi, zeta, epsilon: float) -> float:
    """Large-k limit of psi_k / k: sum zeta_j log((chi_j + eps) / (chi_j - eps))."""
    chi = tuple(getattr(chi, "chi", chi))
    return float(sum(z * math.log((c + epsilon) / (c - epsilon)) for c, z in zip(chi, zeta)))
