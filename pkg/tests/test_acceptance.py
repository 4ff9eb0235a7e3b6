"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``. The lines are written
straight to the terminal, so they also appear without ``-s``.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
import scipy.sparse as sp

from compactqed import analysis as an
from compactqed.basis import CouplingParams, GroupParams
from compactqed.eigensolver import dense_lowest, lowest_k
from compactqed.fourier import replacement_coefficients
from compactqed.hamiltonian import (
    build_link_formulation, build_pure_gauge_electric, build_pure_gauge_magnetic)
from compactqed.matter import build_matter_system, jordan_wigner, total_charge
from compactqed.operators import hermitian_error
from compactqed.torus import TorusSpec, build_torus_hamiltonian, gauss_law_residuals

pytestmark = pytest.mark.acceptance


@pytest.fixture
def report(capsys):
    def emit(n: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
    return emit


def test_criterion_01_plaquette_benchmark(report):
    g2, l = 0.1, 10
    e = an.pure_gauge_plaquette("electric", l, g2)
    L = an.find_L_opt(l, g2).L_opt
    b = an.pure_gauge_plaquette("magnetic", l, g2, L)
    ok_e, ok_b = abs(e - 0.9572) <= 1e-4, abs(b - 0.9572) <= 1e-4
    ok_agree = abs(e - b) <= 1e-4
    report(1, ok_e and ok_b and ok_agree,
           f"electric {e:.6f}, magnetic {b:.6f} (L = {L}), target 0.9572 +- 1e-4, "
           f"|difference| {abs(e - b):.1e}")
    assert ok_agree
    assert ok_e and ok_b


def test_criterion_02_fourier_fidelity(report):
    l = 10
    best = (0.0, None, None)
    for x in (2.0, 3.0, 4.0):
        scan = an.max_fourier_fidelity(l, 1.0 / x, range(11, 15))
        if scan.best > best[0]:
            best = (scan.best, x, scan.argmax[0])
    ok = best[0] >= 0.9999
    report(2, ok, f"max Fourier fidelity {best[0]:.9f} (infidelity {1 - best[0]:.1e}) "
           f"at g^-2 = {best[1]}, L = {best[2]}")
    assert ok


def test_criterion_03_duality(report):
    worst = 0.0
    for L in (1, 2, 3):
        for g2 in (0.3, 1.0, 3.0):
            c = CouplingParams(g2)
            e = build_pure_gauge_electric(GroupParams(L, L), c, cyclic=True)
            b = build_pure_gauge_magnetic(GroupParams(L, L), c)
            we = np.linalg.eigvalsh(e.total.toarray()) + e.constant_shift
            wb = np.linalg.eigvalsh(b.total.toarray()) + b.constant_shift
            worst = max(worst, np.max(np.abs(we - wb)))
    ok = worst <= 1e-10
    report(3, ok, f"max spectral difference {worst:.1e} over l = L in 1..3")
    assert ok


def test_criterion_04_replacement_exactness(report):
    worst = 0.0
    for L in range(1, 13):
        rc = replacement_coefficients(L)
        r = np.arange(-L, L + 1)
        worst = max(worst, np.max(np.abs(rc.linear(r) - r)),
                    np.max(np.abs(rc.quadratic(r) - r**2)))
    ok = worst <= 1e-9
    report(4, ok, f"max reconstruction error {worst:.1e} for L = 1..12")
    assert ok


def test_criterion_05_asymptotic_limits(report):
    rows = []
    for l in range(1, 6):
        v = an.pure_gauge_plaquette("electric", l, 1e-6)
        rows.append((l, v, math.cos(math.pi / (2 * l + 2))))
    magnetic = [abs(an.pure_gauge_plaquette("magnetic", L, 1e4, L)) for L in (1, 2, 3)]
    ok_e = all(abs(v - c) <= 1e-3 for _, v, c in rows)
    ok_b = max(magnetic) < 1e-3
    detail = ", ".join(f"l={l}: {v:.4f} vs {c:.4f}" for l, v, c in rows)
    report(5, ok_e and ok_b,
           f"electric g^-2=1e6 [{detail}]; magnetic max |<P>| {max(magnetic):.1e}")
    assert ok_b
    assert ok_e


LOPT_GRID = (1, 2, 3, 4, 5, 7, 10, 15, 20, 30, 50, 70, 100)


def test_criterion_06_L_opt_behaviour(report):
    table = {l: [an.find_L_opt(l, 1.0 / x).L_opt for x in LOPT_GRID] for l in range(2, 6)}
    ok_min = all(L == l + 1 for l, row in table.items()
                 for x, L in zip(LOPT_GRID, row) if x < 5)
    weak = [i for i, x in enumerate(LOPT_GRID) if x >= 5]
    ok_rise = all(np.all(np.diff([row[i] for i in weak]) >= 0) and row[weak[-1]] > row[weak[0]]
                  for row in table.values())
    # L ~ g^-1: log-log slope of L_opt against g^-2 close to 1/2 over [10, 100]
    fit = [i for i, x in enumerate(LOPT_GRID) if x >= 10]
    slopes = {l: np.polyfit(np.log([LOPT_GRID[i] for i in fit]),
                            np.log([row[i] for i in fit]), 1)[0] for l, row in table.items()}
    ok_slope = all(0.35 <= s <= 0.65 for s in slopes.values())
    frozen = [an.find_L_opt(1, 1.0 / x) for x in (10, 30, 100)]
    ok_freeze = all(p.L_opt == 2 and p.freezing for p in frozen)
    ok = ok_min and ok_rise and ok_slope and ok_freeze
    rows = "; ".join(f"l={l}: {row}" for l, row in table.items())
    report(6, ok, f"L_opt over g^-2 {list(LOPT_GRID)}: {rows}; log-log slopes "
           + ", ".join(f"{s:.2f}" for s in slopes.values())
           + f"; l=1 freezing at g^-2 = 10, 30, 100: {[p.freezing for p in frozen]}")
    assert ok_min and ok_rise and ok_slope and ok_freeze


def test_criterion_07_resource_table(report):
    t = an.resource_comparison(30.0)
    s, f, e = t.row("scaled-L"), t.row("fixed-group"), t.row("electric")
    ok = (s.states == 125 and s.l == 2
          and all(r.states is None or r.states > s.states for r in (f, e)))
    report(7, ok, f"g^-2 = 30, reference {t.reference:.5f} (l = 10, L = {t.reference_L}); "
           f"scaled-L {s.states} states (l = {s.l}, L = {s.L}), "
           f"fixed group {f.states} (L = {f.L}), electric {e.states} (l = {e.l})")
    assert ok


MATTER_GRID = (0.01, 0.1, 0.3, 0.7, 1.0, 2.0, 5.0, 10.0, 30.0, 100.0)


def test_criterion_08_matter_dip(report):
    l, m, kappa = 2, 10.0, 10.0
    elec, mag, pg_e, pg_b = [], [], [], []
    for x in MATTER_GRID:
        g2 = 1.0 / x
        L = an.find_L_opt(l, g2).L_opt
        elec.append(an.matter_plaquette_point(l, g2, L, m, kappa, "electric").plaquette)
        mag.append(an.matter_plaquette_point(l, g2, L, m, kappa, "magnetic").plaquette)
        pg_e.append(an.pure_gauge_plaquette("electric", l, g2))
        pg_b.append(an.pure_gauge_plaquette("magnetic", l, g2, L))
    elec, mag, pg_e, pg_b = map(np.array, (elec, mag, pg_e, pg_b))
    ends = [0, -1]
    ok_asym = (np.all(np.abs(elec[ends] - pg_e[ends]) < 0.02)
               and np.all(np.abs(mag[ends] - pg_b[ends]) < 0.02))
    mid = [i for i, x in enumerate(MATTER_GRID) if 0.1 <= x <= 10]
    ok_dip = elec[mid].min() < 0
    ok_mag = np.any(mag[mid] < pg_b[mid] - 0.01)
    ok = ok_asym and ok_dip and ok_mag
    report(8, ok, f"electric curve {np.round(elec, 3).tolist()} (min {elec.min():.3f}); "
           f"magnetic curve {np.round(mag, 3).tolist()}; asymptotes within 0.02: {ok_asym}")
    assert ok_asym
    assert ok_dip and ok_mag


def _comm_norm(A, B) -> float:
    c = sp.csr_matrix(A @ B - B @ A)
    return float(np.abs(c.data).max()) if c.nnz else 0.0


def test_criterion_09_property_suite(report):
    checks: dict[str, bool] = {}
    c = CouplingParams(0.7, 1.0, 1.5, 0.9)
    builds = [build_pure_gauge_electric(GroupParams(2, 3), c),
              build_pure_gauge_magnetic(GroupParams(2, 3), c),
              build_link_formulation(GroupParams(1, 1), c),
              build_matter_system("electric", GroupParams(1, 2), c),
              build_matter_system("magnetic", GroupParams(1, 2), c),
              build_torus_hamiltonian(TorusSpec(2, 2, GroupParams(1, 1), c), True,
                                      "electric").hamiltonian]
    checks["hermiticity"] = all(hermitian_error(b.total) < 1e-12 for b in builds)
    e3 = build_pure_gauge_electric(GroupParams(2, 3), c).total
    e9 = build_pure_gauge_electric(GroupParams(2, 9), c).total
    checks["electric L-independence"] = abs(e3 - e9).max() == 0
    checks["charge conservation"] = all(
        _comm_norm(b.total, total_charge(1)) < 1e-12 for b in builds[3:5])
    ops = jordan_wigner()
    eye = np.eye(16)
    checks["Jordan-Wigner"] = all(
        np.allclose((a @ b.conj().T + b.conj().T @ a).toarray(), eye if i == j else 0,
                    atol=1e-14)
        and np.allclose((a @ b + b @ a).toarray(), 0, atol=1e-14)
        for i, a in enumerate(ops) for j, b in enumerate(ops))
    checks["Gauss law 2x2, 2x3"] = all(
        r.is_zero() for shape in ((2, 2), (2, 3))
        for r in gauss_law_residuals(TorusSpec(*shape, GroupParams(1, 1), c)).values())
    torus = build_torus_hamiltonian(TorusSpec(2, 2, GroupParams(1, 2), c), True,
                                    "magnetic").hamiltonian
    plaq = build_matter_system("magnetic", GroupParams(1, 2), c)
    wa = lowest_k(torus.total, 6, tol=1e-11).eigenvalues + torus.constant_shift
    wb = lowest_k(plaq.total, 6, tol=1e-11).eigenvalues + plaq.constant_shift
    checks["2x2 torus = plaquette"] = np.allclose(wa, wb, atol=1e-9)
    sym = True
    for build in (build_pure_gauge_electric, build_pure_gauge_magnetic):
        for g2 in (0.2, 5.0):
            p = np.abs(dense_lowest(build(GroupParams(2, 4), CouplingParams(g2)).total)
                       .ground_vector)
            sym &= np.allclose(p, p[::-1], atol=1e-8)
    checks["|p(r)| = |p(-r)|"] = bool(sym)
    oracle = True
    for l in (1, 2, 3):
        for build in (build_pure_gauge_electric, build_pure_gauge_magnetic):
            for g2 in (0.1, 1.0, 10.0):
                H = build(GroupParams(l, l + 2), CouplingParams(g2)).total
                ref = dense_lowest(H, 3).eigenvalues
                got = lowest_k(H, k=3, tol=1e-12, dense_below=0).eigenvalues
                oracle &= np.max(np.abs(got - ref)) <= 1e-10
    checks["Krylov vs dense"] = bool(oracle)
    failed = [k for k, v in checks.items() if not v]
    report(9, not failed, f"{len(checks) - len(failed)}/{len(checks)} properties hold"
           + (f"; failing: {failed}" if failed else ""))
    assert not failed


def test_criterion_10_truncation_decomposition(report):
    ta = an.truncation_decomposition(7, 8)
    shells = (0, 1, 2, 3, 4)
    low = {v: [ta.low_shell_population(v, r2) for r2 in shells] for v in an.TRUNCATION_VARIANTS}
    uniform = [ta.low_shell_population("untruncated", r2) for r2 in shells]
    ok_shift = all(t > u for t, u in zip(low["truncated"], low["untruncated"]))
    # the untruncated ground state is flat; the cyclic-only variant is not
    ratio = [c / u for c, u in zip(low["cyclic-removed"], uniform)]
    ok_cyclic = min(ratio) > 3
    ok_order = all(t > cr > u for t, cr, u in
                   zip(low["truncated"], low["cyclic-removed"], low["untruncated"]))
    ok = ok_shift and ok_cyclic and ok_order
    report(10, ok, "cumulative population for r^2 <= 0..4: "
           + "; ".join(f"{v} {np.round(p, 4).tolist()}" for v, p in low.items()))
    assert ok
