"""Real Jordan conjugation with the nilpotent coupling scaled down to epsilon.

Columns of ``Q`` are generalized eigenvector chains in real form, unstable
moduli first (descending), each chain vector ``i`` rescaled by ``epsilon**i``.
Then ``A_eps = Q^-1 A Q`` is block diagonal over eigenvalues, each block is
``chi * orthogonal + coupling`` with coupling of operator norm ``epsilon``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IllConditioned, PreconditionViolated

COND_CAP = 1e8
_CLUSTER_TOL = 1e-6


@dataclass(frozen=True)
class JordanBlock:
    eigenvalue: complex
    modulus: float
    size: int  # chain length (complex pairs occupy 2*size real columns)
    kind: str  # "real" or "complex"
    start: int  # first column in Q
    unstable_class: int | None  # index into chi, or None for |lambda| <= 1

    @property
    def width(self) -> int:
        return self.size * (2 if self.kind == "complex" else 1)


@dataclass(frozen=True)
class EpsJordanForm:
    epsilon: float
    Q: np.ndarray
    Q_inv: np.ndarray
    A_eps: np.ndarray
    blocks: tuple
    chi: tuple  # unstable modulus classes, descending
    zeta: tuple  # real dimension of each class
    residual: float
    condition: float

    @property
    def zeta_total(self) -> int:
        return int(sum(self.zeta))

    def class_slices(self) -> list:
        out, start = [], 0
        for z in self.zeta:
            out.append(slice(start, start + z))
            start += z
        return out

    @property
    def unstable_block(self) -> np.ndarray:
        z = self.zeta_total
        return self.A_eps[:z, :z]


def _null_space(M, rtol=1e-9):
    u, s, vh = np.linalg.svd(M)
    scale = max(s[0] if s.size else 0.0, 1.0)
    rank = int(np.sum(s > rtol * scale))
    return vh[rank:].conj().T


def _complement(basis_big, basis_small, count, rtol=1e-9):
    """``count`` orthonormal vectors in span(basis_big) orthogonal to span(basis_small)."""
    if basis_small.shape[1]:
        qs, _ = np.linalg.qr(basis_small)
        proj = basis_big - qs @ (qs.conj().T @ basis_big)
    else:
        proj = basis_big
    u, s, _ = np.linalg.svd(proj, full_matrices=False)
    keep = s > rtol * max(1.0, s[0] if s.size else 1.0)
    u = u[:, keep]
    if u.shape[1] < count:
        raise IllConditioned("could not complete a Jordan chain basis (rank deficiency)")
    return u[:, :count]


def _chains(A, lam, mult):
    """Jordan chains for eigenvalue ``lam`` of algebraic multiplicity ``mult``.

    Returns a list of chains, each a list ``[N^{s-1} v, ..., N v, v]`` of
    vectors in C^n (real when ``lam`` is real).
    """
    n = A.shape[0]
    dtype = complex if abs(lam.imag) > 0 else float
    lam_ = lam if dtype is complex else lam.real
    N = A.astype(dtype) - lam_ * np.eye(n, dtype=dtype)
    # generalized eigenspace, then work with the restricted nilpotent operator
    V = _null_space(np.linalg.matrix_power(N, mult))
    if V.shape[1] != mult:
        # fall back to the mult smallest singular directions
        _, _, vh = np.linalg.svd(np.linalg.matrix_power(N, mult))
        V = vh[-mult:].conj().T
    M = V.conj().T @ N @ V
    kernels = [np.zeros((mult, 0), dtype=dtype)]
    power = np.eye(mult, dtype=dtype)
    while kernels[-1].shape[1] < mult:
        power = power @ M
        K = _null_space(power)
        if K.shape[1] <= kernels[-1].shape[1]:
            # numerically stuck: declare the remainder one level higher
            K = np.eye(mult, dtype=dtype)
        kernels.append(K)
    top = len(kernels) - 1
    dims = [k.shape[1] for k in kernels]
    chains = []  # in restricted coordinates
    for s in range(top, 0, -1):
        n_s = (dims[s] - dims[s - 1]) - ((dims[s + 1] - dims[s]) if s + 1 <= top else 0)
        if n_s <= 0:
            continue
        existing = [kernels[s - 1]]
        for ch in chains:
            t = len(ch)
            if t > s:
                existing.append(ch[s - 1][:, None])
        small = np.hstack(existing) if existing else np.zeros((mult, 0), dtype=dtype)
        for v in _complement(kernels[s], small, n_s).T:
            chain = [v]
            for _ in range(s - 1):
                chain.insert(0, M @ chain[0])
            chains.append(chain)
    return [[V @ c for c in chain] for chain in chains]


def _normalize_chain(chain):
    """Scale so the eigenvector has unit norm and a positive real largest entry."""
    ev = chain[0]
    i = int(np.argmax(np.abs(ev)))
    c = np.linalg.norm(ev) * (ev[i] / abs(ev[i]))
    return [v / c for v in chain]


def _eigen_clusters(A, tol=_CLUSTER_TOL):
    """Distinct eigenvalues (cluster means) with algebraic multiplicities."""
    ev = np.linalg.eigvals(A)
    ev = sorted(ev, key=lambda z: (-abs(z), -z.real, z.imag))
    clusters = []
    for z in ev:
        for c in clusters:
            if abs(z - c[0] / c[1]) <= tol * max(1.0, abs(z)):
                c[0] += z
                c[1] += 1
                break
        else:
            clusters.append([z, 1])
    out = []
    for s, m in clusters:
        lam = s / m
        if abs(lam.imag) <= tol * max(1.0, abs(lam)):
            lam = complex(lam.real, 0.0)
        out.append((lam, m))
    return out


def _classes_from(distinct, tol):
    moduli = sorted({round(abs(z), 12) for z, _ in distinct if abs(z) > 1 + tol}, reverse=True)
    chi = []
    for m in moduli:
        if not chi or chi[-1] - m > tol:
            chi.append(m)
    return chi


def eps_jordan(A, sd=None, epsilon: float = 0.01, cond_cap: float = COND_CAP,
               grouping_tol: float = 1e-8) -> EpsJordanForm:
    """Real Jordan basis of ``A`` rescaled so every coupling has norm ``epsilon``.

    ``A`` may be any real square matrix (or an ``IntegerMatrix``).  When spectral
    data from :func:`toral_entropy.spectral.spectral_data` is supplied, its
    exactly-separated distinct roots and modulus classes are used.
    """
    if epsilon <= 0:
        raise PreconditionViolated("epsilon must be positive")
    if hasattr(A, "rows"):
        A = np.array(A.rows, dtype=float)
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if sd is not None:
        distinct = [(z, m) for z, m, _ in sd.distinct_roots]
        chi = list(sd.chi)
        tol = sd.grouping_tol
    else:
        distinct = _eigen_clusters(A)
        tol = max(grouping_tol, _CLUSTER_TOL)
        chi = _classes_from(distinct, tol)

    def class_of(z):
        m = abs(z)
        for j, c in enumerate(chi):
            if abs(m - c) <= max(tol, 1e-9 * c):
                return j
        return None

    # keep one representative of each conjugate pair
    reps = [(z, m) for z, m in distinct if z.imag >= 0 or abs(z.imag) <= tol]
    reps.sort(key=lambda zm: (
        class_of(zm[0]) if class_of(zm[0]) is not None else len(chi),
        -abs(zm[0]), zm[0].imag > 0, -zm[0].real, zm[0].imag,
    ))

    columns, blocks, diag_blocks = [], [], []
    for lam, mult in reps:
        is_complex = abs(lam.imag) > tol
        lam = lam if is_complex else complex(lam.real, 0.0)
        cls = class_of(lam)
        for chain in _chains(A, lam, mult):
            chain = _normalize_chain(chain)
            start = len(columns)
            s = len(chain)
            for i, v in enumerate(chain):
                scale = epsilon ** i
                if is_complex:
                    columns.append(v.real * scale)
                    columns.append(-v.imag * scale)
                else:
                    columns.append(np.real(v) * scale)
            blocks.append(JordanBlock(lam, abs(lam), s, "complex" if is_complex else "real", start, cls))
            if is_complex:
                a, b = lam.real, lam.imag
                D = np.zeros((2 * s, 2 * s))
                for i in range(s):
                    D[2 * i:2 * i + 2, 2 * i:2 * i + 2] = [[a, -b], [b, a]]
                    if i:
                        D[2 * i - 2:2 * i, 2 * i:2 * i + 2] = epsilon * np.eye(2)
            else:
                D = lam.real * np.eye(s) + epsilon * np.eye(s, k=1)
            diag_blocks.append(D)

    Q = np.column_stack(columns)
    if Q.shape != (n, n):
        raise IllConditioned(f"Jordan basis has shape {Q.shape}, expected {(n, n)}")
    cond = float(np.linalg.cond(Q))
    if not np.isfinite(cond) or cond > cond_cap:
        raise IllConditioned(f"cond(Q) = {cond:.3e} exceeds the cap {cond_cap:.1e}")
    Q_inv = np.linalg.inv(Q)
    A_eps = np.zeros((n, n))
    pos = 0
    for D in diag_blocks:
        w = D.shape[0]
        A_eps[pos:pos + w, pos:pos + w] = D
        pos += w
    residual = float(np.linalg.norm(Q_inv @ A @ Q - A_eps, 2))
    a_norm = float(np.linalg.norm(A, 2))
    if residual > 1e-8 * max(a_norm, 1.0):
        raise IllConditioned(f"conjugation residual {residual:.3e} exceeds 1e-8 * ||A||")

    zeta = [0] * len(chi)
    for blk in blocks:
        if blk.unstable_class is not None:
            zeta[blk.unstable_class] += blk.width
    return EpsJordanForm(
        epsilon=float(epsilon), Q=Q, Q_inv=Q_inv, A_eps=A_eps, blocks=tuple(blocks),
        chi=tuple(float(c) for c in chi), zeta=tuple(zeta), residual=residual, condition=cond,
    )


def _sphere_samples(rng, dims, count):
    """Uniform points on the product of unit spheres, one sphere per block."""
    parts = []
    for d in dims:
        g = rng.standard_normal((count, d))
        parts.append(g / np.linalg.norm(g, axis=1, keepdims=True))
    return parts


def sandwich_check(ejf: EpsJordanForm, r, samples: int = 10_000, k: int = 1,
                   seed: int = 0, slack: float = 1e-12) -> dict:
    """Sampled check of the per-block pinching of the unstable part of A_eps^k.

    For boundary points x of D(r) (every block on its sphere) the image block
    norms must lie in [(chi_j - eps)^k r_j, (chi_j + eps)^k r_j].  The covering
    direction is checked by pulling back boundary points of D((chi - eps)^k r)
    and verifying they land in D(r).  Slack is relative to each bound.
    """
    eps = ejf.epsilon
    chi = np.array(ejf.chi)
    if chi.size and np.any(eps >= chi):
        raise PreconditionViolated(f"epsilon {eps} is not below every chi {tuple(chi)}")
    r = np.asarray(r, dtype=float)
    if r.shape != chi.shape or np.any(r < 0):
        raise PreconditionViolated("r must have one nonnegative entry per modulus class")
    rng = np.random.default_rng(seed)
    slices = ejf.class_slices()
    B = np.linalg.matrix_power(ejf.unstable_block, k)
    B_inv = np.linalg.inv(B)
    lo_f = (chi - eps) ** k
    hi_f = (chi + eps) ** k

    x = np.hstack([p * rj for p, rj in zip(_sphere_samples(rng, ejf.zeta, samples), r)])
    y = x @ B.T
    worst_upper = worst_lower = np.inf
    ok = True
    for j, sl in enumerate(slices):
        norms = np.linalg.norm(y[:, sl], axis=1)
        lo, hi = lo_f[j] * r[j], hi_f[j] * r[j]
        tol = slack * max(hi, 1.0)
        worst_upper = min(worst_upper, float(np.min(hi - norms)))
        worst_lower = min(worst_lower, float(np.min(norms - lo)))
        ok &= bool(np.all(norms <= hi + tol) and np.all(norms >= lo - tol))

    target = np.hstack([p * (lo_f[j] * r[j]) for j, p in enumerate(_sphere_samples(rng, ejf.zeta, samples))])
    pre = target @ B_inv.T
    worst_cover = np.inf
    for j, sl in enumerate(slices):
        norms = np.linalg.norm(pre[:, sl], axis=1)
        worst_cover = min(worst_cover, float(np.min(r[j] - norms)))
        ok &= bool(np.all(norms <= r[j] + slack * max(r[j], 1.0)))
    return {
        "pass": bool(ok),
        "k": k,
        "samples": samples,
        "worst_upper_margin": worst_upper,
        "worst_lower_margin": worst_lower,
        "worst_cover_margin": worst_cover,
    }
