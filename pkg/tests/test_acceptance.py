"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line."""
import time

import numpy as np
import pytest
from conftest import C15_EQ, C15_NEQ, QZERO, X1, XM1, ZERO
from oracles import beta3_closed, dirichlet_galerkin, path_magnitude

from dirac_gaps import galerkin
from dirac_gaps.asymptotics import compare_asymptotics
from dirac_gaps.basic_equation import gap_bounds_report, solve
from dirac_gaps.coefficients import check_identities, eval_S, eval_S_bruteforce
from dirac_gaps.galerkin import (bc_for_n, build_matrix, default_K, gap_and_deviation_sequences,
                                 max_imag, order_pair, spectrum)
from dirac_gaps.monodromy import find_eigenvalue_near
from dirac_gaps.potentials import random_trig_potential, xt_potential
from dirac_gaps.riesz import classify, overlap_diagnostics, projection, projection_deviations, tail_sums

XT_BASE = [(2, 0.2), (-2, 0.1 + 0.05j), (4, 0.05j)]


@pytest.fixture
def report(capsys):
    t0 = time.perf_counter()

    def emit(num, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {num:>2}] {'PASS' if ok else 'FAIL'} ({time.perf_counter() - t0:.1f}s): {detail}")
        assert ok, detail
    return emit


def _rel(a, b):
    if a == b:
        return 0.0
    return abs(a - b) / max(abs(a), abs(b))


def test_c01_oracle_equivalence(report):
    # relative error measured against the sum of |path terms|; this equals the plain
    # relative error unless paths cancel, where the plain one compares rounding noise
    rng = np.random.default_rng(1)
    worst, worst_plain, cancelled = 0.0, 0.0, 0
    for _ in range(20):
        v = random_trig_potential(rng)
        for n in range(3, 10):
            for z in (0, 0.1 + 0.05j):
                a = eval_S(n, z, v, nu_max=3)
                b = eval_S_bruteforce(n, z, v, nu_max=3)
                for kind, x, y in (("S11", a.alpha, b.alpha), ("S21", a.beta_plus, b.beta_plus),
                                   ("S12", a.beta_minus, b.beta_minus)):
                    if x == y:
                        continue
                    scale = path_magnitude(kind, n, z, v)
                    if max(abs(x), abs(y)) < 1e-12 * scale:
                        cancelled += 1
                    else:
                        worst_plain = max(worst_plain, _rel(x, y))
                    worst = max(worst, abs(x - y) / scale)
    report(1, worst <= 1e-13,
           f"max |diff| / sum|terms| {worst:.2e} over 280 cases (limit 1e-13); plain relative "
           f"{worst_plain:.2e} where no cancellation; {cancelled} values cancel to rounding level")


def test_c02_identities(report):
    rng = np.random.default_rng(2)
    failures, checks = [], 0
    for _ in range(5):
        v = random_trig_potential(rng)
        for n in (3, 6, 9):
            rep = check_identities(v, n, 0.1 + 0.05j, nu_max=3, rng=rng)
            failures += rep.failures
            checks += rep.checks
    for t in (1.0, -1.0, 2.0):
        v = xt_potential(XT_BASE, t)
        for n in (3, 6, 9):
            for z in (0.07, 0.1 + 0.05j):
                rep = check_identities(v, n, z, nu_max=3, rng=rng)
                failures += rep.failures
                checks += rep.checks
    report(2, not failures, f"{checks} identity checks, {len(failures)} failures {failures[:3]}")


def test_c03_cross_method_spectra(report):
    v = C15_EQ
    K = 64
    worst = {"per+": 0.0, "per-": 0.0, "dir": 0.0}
    ns = [n for n in range(-15, 16) if 5 <= abs(n) <= 15]
    for bc in ("per+", "per-"):
        loc = spectrum(v, bc, K, nmax=15, N=4)
        for n in ns:
            if bc_for_n(n) != bc:
                continue
            r = find_eigenvalue_near(v, n, bc)
            t = loc.triples[n]
            worst[bc] = max(worst[bc], abs(r.lambda_minus - t.lambda_minus), abs(r.lambda_plus - t.lambda_plus))
    w = dirichlet_galerkin(dict(v.p), dict(v.q), K)
    for n in ns:
        mu = find_eigenvalue_near(v, n, "dir")
        worst["dir"] = max(worst["dir"], float(np.min(np.abs(w - mu))))
    ok = max(worst.values()) < 1e-6
    report(3, ok, "max |Galerkin - monodromy|: " + ", ".join(f"{k} {x:.1e}" for k, x in worst.items()))


def test_c04_basic_equation_consistency(report):
    worst_eig, worst_gap = 0.0, 0.0
    for v in (X1, XM1, C15_EQ):
        K = default_K(v, 20)
        locs = {bc: spectrum(v, bc, K, nmax=20, N=4) for bc in ("per+", "per-")}
        for n in range(8, 21):
            r = solve(n, v)
            t = locs[bc_for_n(n)].triples[n]
            a, b = order_pair(n + r.z1, n + r.z2)
            worst_eig = max(worst_eig, abs(a - t.lambda_minus), abs(b - t.lambda_plus))
            worst_gap = max(worst_gap, abs(abs(r.z1 - r.z2) - t.gamma), abs(r.gamma - t.gamma))
    report(4, worst_eig < 1e-6 and worst_gap < 1e-8,
           f"eigenvalue mismatch {worst_eig:.1e} (limit 1e-6), gap mismatch {worst_gap:.1e} (limit 1e-8)")


def test_c05_symmetry_structure(report):
    loc = spectrum(X1, "per+", 64, nmax=40)
    loc2 = spectrum(X1, "per-", 64, nmax=40)
    im = max(max_imag(loc.triples), max_imag(loc2.triples))

    kinds, bad = {}, []
    for v in (XM1, xt_potential([(2, 0.2)], -1.0)):
        K = default_K(v, 20)
        for n in [n for n in range(-20, 21) if abs(n) >= 4]:
            r = solve(n, v, count_roots=False)
            if r.degenerate:
                e = overlap_diagnostics(n, build_matrix(v, bc_for_n(n), K), r)
                real = abs(r.z1.imag) < 1e-12
                kind = "real-double" if (real and e.geometric_multiplicity == 2) else "violation"
            else:
                conj = abs(r.gap.real) <= 1e-6 * abs(r.gap) and abs((r.z1 + r.z2).imag) < 1e-12
                kind = "conj-pair" if conj and r.gamma > 0 else "violation"
            kinds[kind] = kinds.get(kind, 0) + 1
            if kind == "violation":
                bad.append(n)
    ok = im < 1e-8 and not bad and kinds.get("real-double") and kinds.get("conj-pair")
    report(5, bool(ok), f"X_1 max|Im lambda| {im:.1e}; X_-1 discs {kinds}; violations {bad}")


def test_c06_xt_relation(report):
    worst = 0.0
    for t in (1.0, -1.0, 0.5):
        v = xt_potential(XT_BASE, t)
        for n in [n for n in range(-20, 21) if abs(n) >= 5]:
            r = solve(n, v, count_roots=False)
            zs = 0.5 * (r.z1 + r.z2)
            c = eval_S(n, zs.real, v)      # z* is real up to rounding for X_t
            bp, bm = c.beta_plus, c.beta_minus
            worst = max(worst, abs(bp.conjugate() - t * bm) / abs(bp))
    report(6, worst < 1e-10, f"max |conj(b+) - t b-| / |b+| = {worst:.1e} (limit 1e-10)")


def test_c07_gap_bounds(report):
    margins = []
    for v in (X1, XM1.scale_pq(1.0, -1.0)):
        for n in range(6, 21):
            r = solve(n, v, count_roots=False)
            row = gap_bounds_report(n, r.gamma, eval_S(n, 0.5 * (r.z1 + r.z2), v), c=1.0)
            margins.append((row.upper_margin, row.lower_margin))
    ok = all(u >= 0 and lo >= 0 for u, lo in margins)
    report(7, ok, f"min upper margin {min(m[0] for m in margins):.2e}, "
                  f"min lower margin {min(m[1] for m in margins):.2e} over n in [6,20]")


def test_c08_asymptotics(report):
    a, b, A, B = 0.3, 0.2 + 0.1j, -0.25, 0.15j
    from dirac_gaps.potentials import example_c15
    c = eval_S(3, 0, example_c15(a, b, A, B))
    first = c.terms["S21"][1].to_complex()
    rel3 = _rel(first, beta3_closed(a, b, A, B)[0])
    tab = compare_asymptotics(0.5, 0.5, 0.5, 0.5, range(5, 26, 2))
    ok = rel3 < 1e-12 and tab.envelope_decreasing and tab.fit_exponent <= -0.3
    report(8, ok, f"beta_3^+ first order rel. error {rel3:.1e}; envelope decreasing "
                  f"{tab.envelope_decreasing}; fit exponent {tab.fit_exponent:.3f} (limit -0.3)")


def test_c09_basis_verdicts(report):
    eq = classify(C15_EQ, "per-", range(5, 26))
    neq = classify(C15_NEQ, "per-", range(5, 26))
    plus = classify(C15_NEQ, "per+", range(6, 26))
    last = neq.rows[-1].overlap.abs_overlap
    ok = (eq.verdict == "riesz-basis" and eq.kappa < 1 and eq.kappa ** 2 <= eq.delta_cap
          and neq.verdict == "no-basis" and last > 0.95
          and plus.verdict == "riesz-basis" and plus.all_beta_zero)
    report(9, ok, f"|aA|=|bB|: {eq.verdict} kappa {eq.kappa:.2e} cap {eq.delta_cap:.3f}; "
                  f"|aA|!=|bB|: {neq.verdict} final overlap {last:.6f}; per+: {plus.verdict} "
                  f"beta==0 {plus.all_beta_zero}")


def test_c10_projection_decay(report):
    dev = {}
    for bc in ("per+", "per-"):
        dev.update(projection_deviations(X1, bc, [n for n in range(-20, 21) if n != 0], K=64))
    tails = tail_sums({n: p.deviation for n, p in dev.items()})
    seq = [tails[N] for N in sorted(tails)]
    decreasing = all(x > y for x, y in zip(seq, seq[1:]))
    idem = max(p.idempotency for p in dev.values())
    report(10, decreasing and idem < 1e-10,
           f"tail sums strictly decreasing {decreasing} over N=0..{max(tails)}; max ||P^2-P|| {idem:.1e}")


def test_c11_trivial_cases(report):
    checks = {}
    loc = spectrum(ZERO, "per-", 40, nmax=15)
    for t in loc.triples.values():
        t.mu = find_eigenvalue_near(ZERO, t.n, "dir")
    g, d, z = gap_and_deviation_sequences(loc.triples)
    checks["free gaps/deviations"] = max(g.values()) == 0 and max(d.values()) < 1e-12
    c = eval_S(7, 0.1, ZERO)
    checks["free coefficients"] = c.alpha == 0 and c.beta_plus == 0 and c.beta_minus == 0
    r = solve(7, ZERO)
    checks["free roots"] = r.z1 == 0 and r.z2 == 0
    gm = build_matrix(ZERO, "per-", 30)
    checks["free projection"] = projection(7, gm).deviation < 1e-14
    qz = max(t.gamma for bc in ("per+", "per-") for t in spectrum(QZERO, bc, 48, nmax=25).triples.values())
    checks["q=0 gaps"] = qz < 1e-12
    checks["q=0 beta+"] = all(eval_S(n, 0.05, QZERO).beta_plus_structural_zero for n in range(1, 26))
    failed = [k for k, ok in checks.items() if not ok]
    report(11, not failed, f"{len(checks)} trivial-case checks, failed: {failed or 'none'}")
