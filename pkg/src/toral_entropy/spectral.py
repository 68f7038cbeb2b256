"""Certified numerical spectrum of an integer automorphism.

Roots are found with the Aberth-Ehrlich iteration on the exact square-free
factors of the characteristic polynomial, so repeated eigenvalues never reach
the floating point solver.  Moduli are then grouped into classes
chi_1 > ... > chi_u > 1 with multiplicities zeta_j.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousGrouping, NoConvergence, NotAutomorphism
from .exact_matrix import (
    IntegerMatrix,
    IntPolynomial,
    char_poly,
    cyclotomic_factor_test,
    determinant,
    is_irreducible,
    square_free_decomposition,
)

GROUPING_TOL = 1e-8
_EPS = np.finfo(float).eps


def _scale(coeffs_asc, z):
    return sum(abs(c) * abs(z) ** i for i, c in enumerate(coeffs_asc))


def _aberth(coeffs_asc, maxiter=800):
    """All roots of a square-free polynomial by simultaneous Aberth-Ehrlich steps."""
    a = np.array([complex(c) for c in coeffs_asc[::-1]])  # descending
    n = len(a) - 1
    if n == 1:
        return np.array([-a[1] / a[0]])
    da = np.polyder(a)
    a_desc = np.abs(a[1:] / a[0])
    radius = 1 + float(np.max(a_desc))
    # spread start points on a circle inside the Cauchy bound, off the real axis
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = 0.5 * radius * np.exp(1j * angles)
    for _ in range(maxiter):
        p = np.polyval(a, z)
        dp = np.polyval(da, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1.0)
            inv = 1.0 / diff
            np.fill_diagonal(inv, 0.0)
            s = inv.sum(axis=1)
            w = ratio / (1 - ratio * s)
        w = np.where(np.isfinite(w), w, 0.0)
        z = z - w
        if np.all(np.abs(w) <= 4 * _EPS * np.maximum(1.0, np.abs(z))):
            break
    # two Newton polishing steps
    for _ in range(2):
        p = np.polyval(a, z)
        dp = np.polyval(da, z)
        step = np.where(dp != 0, p / np.where(dp != 0, dp, 1), 0)
        z = z - step
    return z


def _symmetrize(z):
    """Enforce exact conjugate symmetry on the roots of a real polynomial."""
    z = list(z)
    thr = 1e-8
    real = [complex(v.real, 0.0) for v in z if abs(v.imag) <= thr * max(1.0, abs(v))]
    upper = [v for v in z if v.imag > thr * max(1.0, abs(v))]
    lower = [v for v in z if v.imag < -thr * max(1.0, abs(v))]
    if len(upper) != len(lower):
        raise NoConvergence("roots of a real polynomial are not closed under conjugation")
    out = real[:]
    remaining = lower[:]
    for u in sorted(upper, key=lambda v: (v.real, v.imag)):
        j = min(range(len(remaining)), key=lambda t: abs(remaining[t] - u.conjugate()))
        v = remaining.pop(j)
        w = 0.5 * (u + v.conjugate())
        out.extend([w, w.conjugate()])
    return out


def _certified_roots(p: IntPolynomial, tol: float):
    """Distinct roots of ``p`` with multiplicity, residual and an inclusion radius."""
    out = []
    for factor, mult in square_free_decomposition(p):
        q = factor.coeffs
        dq = factor.derivative()
        zs = _symmetrize(_aberth(q))
        deg = factor.degree
        for z in zs:
            val = factor(z)
            sc = _scale(q, z)
            res = abs(val) / sc if sc else 0.0
            if not res <= tol:
                raise NoConvergence(f"root {z} of {factor} has residual {res:.3e} > {tol:.1e}")
            dval = abs(dq(z))
            # Newton inclusion radius, with the residual floored at rounding level
            err = deg * max(abs(val), 4 * _EPS * sc) / dval if dval else float("inf")
            err = max(err, 16 * _EPS * max(1.0, abs(z)))
            out.append({"value": complex(z), "multiplicity": mult, "residual": res, "error": err})
    out.sort(key=lambda d: (-abs(d["value"]), -d["value"].real, d["value"].imag))
    return out


def poly_roots(p: IntPolynomial, tol: float = 1e-12) -> list:
    """All ``degree(p)`` roots with multiplicity as ``(root, residual)`` pairs.

    The residual is the relative backward error ``|p(z)| / sum |p_i| |z|^i``.
    """
    if p.degree < 1:
        return []
    out = []
    for d in _certified_roots(p, tol):
        z = d["value"]
        res = abs(p(z)) / _scale(p.coeffs, z)
        out.extend([(z, res)] * d["multiplicity"])
    return out


@dataclass(frozen=True)
class SpectralData:
    l: int
    det: int
    poly: IntPolynomial
    roots: tuple  # ((complex, residual), ...) with multiplicity
    distinct_roots: tuple  # ((complex, multiplicity, error_bound), ...)
    chi: tuple
    zeta: tuple
    h_top: float
    hyperbolic: bool
    ergodic: bool
    irreducible: bool
    cyclotomic: tuple = ()
    unit_circle: dict = field(default_factory=dict)
    grouping_tol: float = GROUPING_TOL

    @property
    def u(self) -> int:
        return len(self.chi)

    @property
    def zeta_total(self) -> int:
        return sum(self.zeta)

    @property
    def zeta_rest(self) -> int:
        return self.l - self.zeta_total

    @property
    def flags(self) -> dict:
        return {"hyperbolic": self.hyperbolic, "ergodic": self.ergodic, "irreducible": self.irreducible}

    def to_dict(self) -> dict:
        return {
            "l": self.l,
            "det": self.det,
            "char_poly": str(self.poly),
            "char_poly_coeffs": list(self.poly.coeffs),
            "roots": [
                {"re": z.real, "im": z.imag, "modulus": abs(z), "residual": r} for z, r in self.roots
            ],
            "chi": list(self.chi),
            "zeta": list(self.zeta),
            "zeta_total": self.zeta_total,
            "zeta_rest": self.zeta_rest,
            "h_top": self.h_top,
            "flags": self.flags,
            "cyclotomic_factors": list(self.cyclotomic),
            "unit_circle_evidence": dict(self.unit_circle),
        }


def _group_moduli(distinct, tol):
    """Cluster moduli (descending) into classes; returns [(modulus, count, members)]."""
    items = sorted(distinct, key=lambda d: -abs(d[0]))
    classes = []
    for z, mult, err in items:
        m = abs(z)
        if classes:
            cls = classes[-1]
            prev_m, prev_err = cls["last"], cls["last_err"]
            gap = prev_m - m
            if gap <= tol:
                if gap > prev_err + err:
                    raise AmbiguousGrouping(
                        f"moduli {prev_m!r} and {m!r} differ by {gap:.3e}: below the grouping "
                        f"tolerance {tol:.1e} but above the certified error {prev_err + err:.3e}"
                    )
                cls["sum"] += m * mult
                cls["count"] += mult
                cls["last"], cls["last_err"] = m, err
                continue
        classes.append({"sum": m * mult, "count": mult, "last": m, "last_err": err})
    return [(c["sum"] / c["count"], c["count"]) for c in classes]


def spectral_data(A: IntegerMatrix, grouping_tol: float = GROUPING_TOL,
                  root_tol: float = 1e-12, max_degree: int = 8) -> SpectralData:
    det = determinant(A)
    if abs(det) != 1:
        raise NotAutomorphism(f"|det A| = {abs(det)}, not 1")
    p = char_poly(A)
    cert = _certified_roots(p, root_tol)
    distinct = [(d["value"], d["multiplicity"], d["error"]) for d in cert]
    roots = tuple(r for r in poly_roots(p, root_tol))
    classes = _group_moduli(distinct, grouping_tol)

    irreducible = is_irreducible(p, max_degree=max_degree)
    cyclo = tuple(cyclotomic_factor_test(p))
    reciprocal = p.is_reciprocal()
    near_one = [z for z, _, _ in distinct if abs(abs(z) - 1) <= grouping_tol]
    if near_one and irreducible and not reciprocal:
        # an irreducible polynomial with a unimodular root z has 1/conj(z) as a root too
        raise AmbiguousGrouping(
            "a root modulus is within tolerance of 1 but the irreducible characteristic "
            "polynomial is not reciprocal, so no root can lie on the unit circle"
        )
    unit_evidence = {
        "numeric_unit_roots": sum(m for z, m, _ in distinct if abs(abs(z) - 1) <= grouping_tol),
        "reciprocal": reciprocal,
        "algebraic_confirmation": (bool(near_one) and reciprocal) if irreducible and not cyclo else None,
    }

    chi, zeta = [], []
    for m, count in classes:
        if m > 1 + grouping_tol:
            chi.append(m)
            zeta.append(count)
    h = float(sum(z * math.log(c) for c, z in zip(chi, zeta)))
    return SpectralData(
        l=A.l, det=det, poly=p, roots=roots, distinct_roots=tuple(distinct),
        chi=tuple(chi), zeta=tuple(zeta), h_top=h,
        hyperbolic=not near_one, ergodic=not cyclo, irreducible=irreducible,
        cyclotomic=cyclo, unit_circle=unit_evidence, grouping_tol=grouping_tol,
    )


def top_entropy(sd: SpectralData) -> float:
    """Topological entropy in nats: sum of zeta_j log chi_j."""
    return float(sum(z * math.log(c) for c, z in zip(sd.chi, sd.zeta)))
