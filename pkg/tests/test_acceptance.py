"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v``.
"""
import io
import json
import math
import time

import numpy as np
import pytest

from conftest import CAT_ROWS, SALEM_ROWS
from oracles import mp_entropy, mp_psi_limit
from toral_entropy.cell_geometry import UnstableChart, omega_k, psi_k, psi_limit, unstable_chart
from toral_entropy.cli import main
from toral_entropy.eps_jordan import eps_jordan, sandwich_check
from toral_entropy.exact_matrix import IntegerMatrix
from toral_entropy.oracle import component_bounds, separated_set_entropy, verify_cellcover
from toral_entropy.solver import solve_params
from toral_entropy.spectral import spectral_data

CAT = IntegerMatrix(CAT_ROWS)
SALEM = IntegerMatrix(SALEM_ROWS)
CAT_H = math.log((3 + math.sqrt(5)) / 2)
SALEM_H = float(mp_entropy([1, -1, -1, -1, 1]))


@pytest.fixture
def report(capsys):
    def emit(label, ok, detail, elapsed, limit=None):
        timed = limit is None or elapsed < limit
        verdict = "PASS" if ok and timed else "FAIL"
        bound = f" (limit {limit:g} s)" if limit is not None else ""
        with capsys.disabled():
            print(f"\n[{verdict}] {label}: {detail}; {elapsed:.2f} s{bound}")
        assert ok, detail
        assert timed, f"{label} took {elapsed:.2f} s, limit {limit} s"
    return emit


def test_criterion_1_spectral_exactness(report):
    t0 = time.perf_counter()
    cat = spectral_data(CAT)
    t_cat = time.perf_counter() - t0
    t0 = time.perf_counter()
    salem = spectral_data(SALEM)
    t_salem = time.perf_counter() - t0
    errs = (abs(cat.h_top - CAT_H), abs(salem.h_top - SALEM_H))
    flags_ok = salem.flags == {"irreducible": True, "ergodic": True, "hyperbolic": False}
    ok = max(errs) <= 1e-9 and flags_ok and max(t_cat, t_salem) < 1.0
    report("1 spectral exactness", ok,
           f"|dh| cat {errs[0]:.1e}, Salem {errs[1]:.1e}; Salem flags {salem.flags}",
           t_cat + t_salem, 2.0)


def _sandwich_configs():
    a, b = 1.2, 0.9
    J = np.zeros((4, 4))
    J[:2, :2] = J[2:, 2:] = [[a, -b], [b, a]]
    J[:2, 2:] = np.eye(2)
    P = np.random.default_rng(4).normal(size=(4, 4)) + 3 * np.eye(4)
    return {
        "diagonal": (np.diag([3.0, 1.8, 0.2]), [0.3, 0.2]),
        "nilpotent 2x2": (np.array([[2.0, 1.0], [0.0, 2.0]]), [0.2]),
        "complex pair": (np.array([[0, 1, 0], [0, 0, 1], [1, 0, -1]], dtype=float), [0.1]),
        "complex Jordan chain": (P @ J @ np.linalg.inv(P), [0.1]),
    }


def test_criterion_2_sandwich(report):
    t0 = time.perf_counter()
    failures, worst = [], math.inf
    for name, (A, r) in _sandwich_configs().items():
        ejf = eps_jordan(A, epsilon=0.05)
        for k in (1, 5, 10):
            rep = sandwich_check(ejf, r, samples=10_000, k=k, seed=k, slack=1e-12)
            worst = min(worst, rep["worst_upper_margin"], rep["worst_lower_margin"], rep["worst_cover_margin"])
            if not rep["pass"]:
                failures.append((name, k))
    report("2 eps-Jordan sandwich", not failures,
           f"4 configurations x k in (1, 5, 10) x 1e4 samples; failures {failures}; worst margin {worst:.2e}",
           time.perf_counter() - t0, 5.0)


def _random_instance(rng):
    zt = int(rng.integers(1, 4))
    splits = {1: [(1,)], 2: [(1, 1), (2,)], 3: [(1, 1, 1), (2, 1), (1, 2), (3,)]}[zt]
    zeta = splits[int(rng.integers(len(splits)))]
    while True:
        B = rng.normal(size=(zt, zt)) + 1.5 * np.eye(zt)
        if abs(np.linalg.det(B)) > 0.3 and np.linalg.cond(B) < 20:
            break
    ch = UnstableChart(B, zeta)
    r = rng.uniform(0.01, 1.0, len(zeta))
    r *= 0.49 / float(np.max(ch.row_block_norms() @ r))
    R = ch.alpha + rng.uniform(0.05, 4.0, len(zeta))
    offset = rng.uniform(-0.5, 0.5, zt) if rng.random() < 0.5 else None
    return ch, r, R, offset


def test_criterion_3_cellcover_oracle(report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    violations, guarded = 0, 0
    for _ in range(1000):
        ch, r, R, offset = _random_instance(rng)
        v = verify_cellcover(ch, R, r, offset=offset)
        if v["precondition"] is not None:
            guarded += 1
        elif not v["pass"]:
            violations += 1
    report("3 cell-count bounds vs exact enumeration", violations == 0 and guarded == 0,
           f"1000 random instances (zeta <= 3), violations {violations}, precondition rejects {guarded}",
           time.perf_counter() - t0, 60.0)


def test_criterion_4_component_counts(report):
    t0 = time.perf_counter()
    rows = []
    for name, A in (("cat", CAT), ("Salem-4", SALEM)):
        sd = spectral_data(A)
        for frac in (0.2, 0.5, 0.8):
            cert = solve_params(A, frac * sd.h_top, (frac + 0.1) * sd.h_top)
            for m in range(1, 6):
                cb = component_bounds(cert.chart, sd.chi, cert.epsilon, cert.k, cert.r, m=m)
                gens = list(cb.generations())
                ok = cb.passed and cb.n_minus >= 2 and all(
                    g_lo <= n_lo <= n_hi <= g_hi for _, n_lo, n_hi, g_lo, g_hi in gens)
                rows.append((name, frac, m, cb.n_minus, cb.n_plus, ok))
    bad = [r for r in rows if not r[-1]]
    report("4 per-generation component counts", not bad,
           f"{len(rows)} (matrix, window, m) cases, failures {bad}", time.perf_counter() - t0, 60.0)


def test_criterion_5_end_to_end(report, tmp_path):
    t0 = time.perf_counter()
    failures, n = [], 0
    for name, rows in (("cat", CAT_ROWS), ("salem", SALEM_ROWS)):
        mfile = tmp_path / f"{name}.json"
        mfile.write_text(json.dumps({"l": len(rows), "rows": rows}))
        h = spectral_data(IntegerMatrix(rows)).h_top
        for i in range(9):
            b1, b2 = i * 0.1 * h, (i + 1) * 0.1 * h
            cfile = tmp_path / f"{name}-{i}.json"
            code_s = main(["solve", str(mfile), repr(b1), repr(b2), "--json-out", str(cfile)], io.StringIO())
            code_v = main(["verify", str(cfile)], io.StringIO()) if code_s == 0 else None
            cert = json.loads(cfile.read_text()) if code_s == 0 else None
            inside = cert is not None and (
                cert["k"] * b1 <= cert["log_g"][0] and cert["log_g"][1] <= cert["k"] * b2)
            n += 1
            if not (code_s == 0 and code_v == 0 and inside):
                failures.append((name, i, code_s, code_v))
    report("5 solve + verify end to end", not failures,
           f"{n} windows, failures {failures}", time.perf_counter() - t0, 120.0)


def test_criterion_6_psi_limits(report):
    t0 = time.perf_counter()
    notes, ok = [], True
    for name, A in (("cat", CAT), ("Salem-4", SALEM)):
        sd = spectral_data(A)
        ejf = eps_jordan(A, sd, 0.01)
        ch = unstable_chart(ejf, sd)
        lim = psi_limit(sd.chi, sd.zeta, 0.01)
        assert lim == pytest.approx(float(mp_psi_limit(sd.chi, sd.zeta, 0.01)), abs=1e-14)
        ks = [k for k in range(1, 201) if omega_k(sd.chi, ch, k, 0.01).feasible]
        vals = [psi_k(ch, sd.chi, k, 0.01) / k for k in ks]
        decreasing = all(a >= b for a, b in zip(vals, vals[1:]))
        err200 = vals[-1] - lim
        sweep = [psi_limit(sd.chi, sd.zeta, e) for e in (0.01, 0.005, 0.0025)]
        monotone = sweep[0] > sweep[1] > sweep[2] > 0
        ok &= decreasing and abs(err200) <= 1e-4 and monotone
        notes.append(f"{name}: decreasing {decreasing}, psi_200/200 - limit = {err200:.2e}, "
                     f"eps sweep {['%.3g' % v for v in sweep]}")
    report("6 psi_k / k limit within 1e-4 by k = 200", ok, "; ".join(notes), time.perf_counter() - t0, 10.0)


def test_criterion_7_entropy_estimator(report):
    t0 = time.perf_counter()
    est = separated_set_entropy(CAT, n_max=12)
    finite = {str(rows): separated_set_entropy(np.array(rows), n_max=12)
              for rows in ([[0, 1], [-1, 0]], [[1, 0], [0, 1]], [[0, -1], [1, -1]])}
    ok = abs(est - 0.9624) <= 0.1 and all(abs(v) < 0.02 for v in finite.values())
    report("7 separated-set entropy estimator", ok,
           f"cat {est:.4f} (target 0.9624); finite order {max(abs(v) for v in finite.values()):.2e}",
           time.perf_counter() - t0, 120.0)


def test_criterion_8_determinism(report, tmp_path):
    t0 = time.perf_counter()
    mfile = tmp_path / "salem.json"
    mfile.write_text(json.dumps({"l": 4, "rows": SALEM_ROWS}))
    blobs, verdicts = [], []
    h = spectral_data(SALEM).h_top
    for threads in ("1", "4", "1"):
        c = tmp_path / f"c{threads}{len(blobs)}.json"
        v = tmp_path / f"v{threads}{len(blobs)}.json"
        main(["solve", str(mfile), repr(0.3 * h), repr(0.4 * h), "--threads", threads, "--json-out", str(c)],
             io.StringIO())
        main(["verify", str(c), "--threads", threads, "--json-out", str(v)], io.StringIO())
        blobs.append(c.read_bytes())
        verdicts.append(v.read_bytes())
    ok = len(set(blobs)) == 1 and len(set(verdicts)) == 1
    report("8 byte-identical certificates", ok,
           f"3 runs (threads 1, 4, 1): {len(set(blobs))} distinct certificate(s), "
           f"{len(set(verdicts))} distinct verify report(s)", time.perf_counter() - t0)
