"""Parameter search for entropy windows and the resulting certificates.

Given targets beta1 < beta2 in [0, h_top], find (eps, k, r) with r in the
admissible box Omega_k such that [log g-, log g+] lies inside
[k beta1, k beta2].  The invariant set U_k(r, eps) then has f^k-entropy in
that window, and M = union of f^j(U_k), j = 1..k, has f-entropy in
[beta1, beta2].
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, asdict

from .cell_geometry import (
    ALPHA0_MARGIN,
    TAU_SAFETY,
    UnstableChart,
    alpha0,
    check_assumptions,
    iterated_bounds,
    omega_k,
    psi_limit,
    support_halfwidths,
    tau,
    unstable_chart,
)
from .eps_jordan import eps_jordan
from .errors import SearchExhausted, TargetsOutOfRange
from .exact_matrix import IntegerMatrix
from .spectral import GROUPING_TOL, SpectralData, spectral_data

CERTIFICATE_FORMAT = "toral-entropy-certificate/1"


@dataclass(frozen=True)
class SolverOptions:
    epsilon: float | None = None  # starting epsilon; default min(chi_j - 1) / 10
    k_max: int = 10_000
    eps_min: float = 1e-6
    max_rounds: int = 60
    margin: float = ALPHA0_MARGIN
    tau_safety: float = TAU_SAFETY
    psi_fraction: float = 0.9
    bisect_tol: float = 1e-9
    grouping_tol: float = GROUPING_TOL


@dataclass(frozen=True)
class Construction:
    """Everything that depends on (A, eps) but not on k or r."""

    epsilon: float
    chart: UnstableChart
    alpha0: float
    tau: float
    chi: tuple
    zeta: tuple

    @classmethod
    def build(cls, A, sd: SpectralData, epsilon: float, opts: SolverOptions, coords=None):
        ejf = eps_jordan(A, sd, epsilon)
        chart = unstable_chart(ejf, sd, coords=coords)
        return cls(epsilon, chart, alpha0(chart, opts.margin), tau(chart, opts.tau_safety),
                   tuple(sd.chi), tuple(sd.zeta))

    def box(self, k):
        return omega_k(self.chi, self.chart, k, self.epsilon, self.alpha0, self.tau)

    def bounds(self, k, r):
        return iterated_bounds(self.chart, self.chi, k, r, self.epsilon)


@dataclass(frozen=True)
class SetDescription:
    k: int
    epsilon: float
    r: tuple
    coords: tuple
    slab_halfwidths: tuple
    slab: str
    forward: str
    invariant: str
    union: str
    single_slab: bool
    entropy_window: tuple

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


@dataclass(frozen=True)
class EntropyCertificate:
    matrix: IntegerMatrix
    beta1: float
    beta2: float
    epsilon: float
    k: int
    r: tuple
    log_g_minus: float
    log_g_plus: float
    psi: float
    alpha0: float
    tau: float
    assumptions: dict
    containment: bool
    path: str
    t: float
    delta: float
    chart: UnstableChart = field(repr=False)
    options: SolverOptions = field(default_factory=SolverOptions, repr=False)

    @property
    def per_k_entropy_window(self) -> tuple:
        return (self.log_g_minus / self.k, self.log_g_plus / self.k)

    @property
    def set_description(self) -> SetDescription:
        return describe_invariant_set(self)

    def to_json(self) -> dict:
        return {
            "format": CERTIFICATE_FORMAT,
            "matrix": self.matrix.to_json(),
            "beta": [self.beta1, self.beta2],
            "epsilon": self.epsilon,
            "k": self.k,
            "r": list(self.r),
            "log_g": [self.log_g_minus, self.log_g_plus],
            "per_k_window": list(self.per_k_entropy_window),
            "contained": self.containment,
            "assumptions": dict(self.assumptions),
            "psi_k": self.psi,
            "alpha0": self.alpha0,
            "tau": self.tau,
            "path": self.path,
            "t": self.t,
            "delta": self.delta,
            "chart": {k: v for k, v in self.chart.to_dict().items() if k in ("coords", "alpha", "C0", "C1", "C2")},
            "options": {
                "margin": self.options.margin,
                "tau_safety": self.options.tau_safety,
                "grouping_tol": self.options.grouping_tol,
            },
            "set_description": self.set_description.to_dict(),
        }


def describe_invariant_set(cert: EntropyCertificate) -> SetDescription:
    """Symbolic description of K(r), U_k(r, eps) and M; nothing is materialised."""
    k = cert.k
    half = tuple(float(v) for v in support_halfwidths(cert.chart, cert.r))
    coords = tuple(cert.chart.coords)
    slab = (f"K = {{[y] : (y_{', y_'.join(str(c) for c in coords)}) in U}}, "
            f"U = B D(r) inside the box of half-widths {list(half)}")
    union = "M = U_1 (f-invariant, single slab)" if k == 1 else f"M = union over j = 1..{k} of f^j(U_{k})"
    return SetDescription(
        k=k, epsilon=cert.epsilon, r=tuple(cert.r), coords=coords, slab_halfwidths=half,
        slab=slab,
        forward=f"V_{k}^m = intersection over i = 0..m-1 of f^(-{k} i)(K)",
        invariant=f"U_{k} = intersection over all integers i of f^({k} i)(K)",
        union=union,
        single_slab=(k == 1),
        entropy_window=cert.per_k_entropy_window,
    )


def _first_k(con: Construction, beta1, beta2, opts, k_start=1):
    """Smallest k >= k_start meeting every search condition, with the path to use."""
    width = beta2 - beta1
    limit = psi_limit(con.chi, con.zeta, con.epsilon)
    if limit >= opts.psi_fraction * width:
        return None, f"psi limit {limit:.4g} >= {opts.psi_fraction} * window {width:.4g}"
    upper_rate = sum(z * math.log(c - con.epsilon) for c, z in zip(con.chi, con.zeta))
    reason = "k_max reached"
    for k in range(k_start, opts.k_max + 1):
        box = con.box(k)
        if not box.feasible:
            reason = f"Omega_k infeasible ({box.reason})"
            continue
        delta = k * width / 20
        target = k * beta1 + delta
        b_lo = con.bounds(k, box.lo)
        if upper_rate <= beta1 + width / 20 and target > b_lo.log_g_minus:
            return None, "(1/k) log g- at the upper corner cannot reach beta1"
        psi = b_lo.log_g_plus - b_lo.log_g_minus
        if psi / k >= opts.psi_fraction * width:
            reason = "psi_k / k too large"
            continue
        if b_lo.log_g_minus >= target:
            if b_lo.log_g_plus <= k * beta2:
                return (k, "lower-corner"), ""
            reason = "lower corner overshoots beta2"
            continue
        if con.bounds(k, box.hi).log_g_minus >= target:
            return (k, "diagonal"), ""
        reason = "upper corner below target"
    return None, reason


def _bisect(con: Construction, k, box, target, tol):
    def f(t):
        return con.bounds(k, box.diagonal(t)).log_g_minus - target

    a, b = 0.0, 1.0
    fa, fb = f(a), f(b)
    assert fa < 0 <= fb, "diagonal path does not bracket the target"
    for _ in range(200):
        mid = 0.5 * (a + b)
        fm = f(mid)
        if abs(fm) <= tol:
            return mid
        if fm < 0:
            a, fa = mid, fm
        else:
            b, fb = mid, fm
        assert fa < 0 <= fb
        if b - a <= 1e-16:
            break
    return b


def _diagnose_targets(sd, beta1, beta2):
    h = sd.h_top
    if sd.u == 0:
        raise TargetsOutOfRange("the automorphism has zero entropy: no window to hit")
    if not (0 <= beta1 < beta2 <= h * (1 + 1e-12)):
        raise TargetsOutOfRange(f"need 0 <= beta1 < beta2 <= h_top = {h!r}, got [{beta1}, {beta2}]")


def solve_params(A: IntegerMatrix, beta1: float, beta2: float, opts: SolverOptions | None = None,
                 sd: SpectralData | None = None) -> EntropyCertificate:
    opts = opts or SolverOptions()
    sd = sd or spectral_data(A, opts.grouping_tol)
    beta1, beta2 = float(beta1), float(beta2)
    _diagnose_targets(sd, beta1, beta2)
    if not sd.irreducible:
        warnings.warn("A is reducible; the certificate is still valid for this matrix", stacklevel=2)

    eps0 = opts.epsilon if opts.epsilon is not None else min(c - 1 for c in sd.chi) / 10
    eps0 = min(eps0, 0.5 * min(sd.chi))
    diagnosis = {}
    best = None
    eps = eps0
    while eps >= opts.eps_min:
        con = Construction.build(A, sd, eps, opts)
        found, why = _first_k(con, beta1, beta2, opts)
        diagnosis[repr(eps)] = why or f"k = {found[0]}"
        if found is not None:
            if best is None or found[0] < best[1][0]:
                best = (con, found)
            else:
                break
        eps /= 2
    if best is None:
        raise SearchExhausted("no (epsilon, k) satisfies the search conditions", diagnosis)

    con, (k, path) = best
    width = beta2 - beta1
    for _ in range(opts.max_rounds):
        box = con.box(k)
        delta = k * width / 20
        target = k * beta1 + delta
        t = 0.0 if path == "lower-corner" else _bisect(con, k, box, target, opts.bisect_tol)
        r = tuple(box.diagonal(t))
        b = con.bounds(k, r)
        contained = (k * beta1 <= b.log_g_minus) and (b.log_g_plus <= k * beta2)
        assumptions = check_assumptions(con.chart, con.chi, k, con.epsilon, r, con.alpha0)
        if contained and assumptions["all"]:
            psi = con.bounds(k, box.lo)
            return EntropyCertificate(
                matrix=A, beta1=beta1, beta2=beta2, epsilon=con.epsilon, k=k, r=r,
                log_g_minus=b.log_g_minus, log_g_plus=b.log_g_plus,
                psi=psi.log_g_plus - psi.log_g_minus, alpha0=con.alpha0, tau=con.tau,
                assumptions=assumptions, containment=True, path=path, t=t, delta=delta,
                chart=con.chart, options=opts,
            )
        diagnosis[f"round k={k}"] = "containment failed" if not contained else "assumption failed"
        nxt, why = _first_k(con, beta1, beta2, opts, k_start=k + 1)
        if nxt is None:
            diagnosis["retry"] = why
            break
        k, path = nxt
    raise SearchExhausted("containment could not be certified", diagnosis)


def replay(A: IntegerMatrix, epsilon: float, k: int, r, margin: float = ALPHA0_MARGIN,
           tau_safety: float = TAU_SAFETY, grouping_tol: float = GROUPING_TOL, coords=None):
    """Recompute (construction, bounds) from scratch for certificate checking."""
    opts = SolverOptions(margin=margin, tau_safety=tau_safety, grouping_tol=grouping_tol)
    sd = spectral_data(A, grouping_tol)
    con = Construction.build(A, sd, epsilon, opts, coords=coords)
    return sd, con, con.bounds(k, r)
