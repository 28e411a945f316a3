import json
import math

import numpy as np
import pytest
from conftest import C15_EQ, C15_NEQ, X1, ZERO
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import delta_cap_bruteforce

from dirac_gaps.basic_equation import solve
from dirac_gaps.galerkin import build_matrix
from dirac_gaps.potentials import potential_from_coeffs, random_trig_potential, xt_potential
from dirac_gaps.riesz import (classify, delta_cap, overlap_diagnostics, projection,
                              projection_deviations, reduced_overlap_factor, tail_sums)

XT_HALF = xt_potential([(2, 0.2), (-2, 0.1 + 0.05j)], 0.5)


@pytest.fixture(scope="module")
def reports():
    return {
        "xt": classify(XT_HALF, "per-", range(5, 30)),
        "eq": classify(C15_EQ, "per-", range(5, 30)),
        "neq": classify(C15_NEQ, "per-", range(5, 30)),
        "plus": classify(C15_NEQ, "per+", range(6, 30)),
    }


def test_free_projection_exact():
    gm = build_matrix(ZERO, "per+", 20)
    pd = projection(4, gm)
    assert pd.deviation < 1e-14 and pd.rank == 2


def test_x1_deviations_decrease_and_tails_shrink():
    dev = projection_deviations(X1, "per+", range(2, 21, 2), K=48)
    d = [dev[n].deviation for n in sorted(dev)]
    assert all(x > y for x, y in zip(d, d[1:]))
    tails = tail_sums({n: p.deviation for n, p in dev.items()})
    t = [tails[N] for N in sorted(tails)]
    assert all(x >= y for x, y in zip(t, t[1:]))


def test_random_idempotent(rng):
    v = random_trig_potential(rng, scale=0.1)
    dev = projection_deviations(v, "per-", [7, 9, 11], K=40)
    for p in dev.values():
        assert p.idempotency < 1e-10 and p.rank == 2


def test_contour_radius_adjusts():
    # an eigenvalue sitting on the default circle forces a different radius
    gm = build_matrix(ZERO, "per+", 10)
    ev = np.array([4.25, 4.0, 4.0])
    assert projection(4, gm, eigenvalues=ev).radius != 0.25


@pytest.mark.parametrize("c", [0.5, 1.0, 2.0, 7.0])
def test_delta_cap_matches_grid(c):
    assert delta_cap(c) == pytest.approx(delta_cap_bruteforce(c), rel=1e-12)


def test_pi_orthogonal_case():
    assert reduced_overlap_factor(0.0, 0.0, 0.0) == 0.0


@given(st.floats(-30, 30), st.floats(-30, 30), st.floats(-math.pi, math.pi))
@settings(max_examples=100, deadline=None)
def test_pi_range_and_inversion(a, b, psi):
    p = reduced_overlap_factor(a, b, psi)
    assert -1e-12 <= p <= 1 + 1e-12
    assert p == pytest.approx(reduced_overlap_factor(-a, -b, psi), abs=1e-12)


def test_double_orthogonal_entry():
    v = potential_from_coeffs([(2, 0.2), (-2, 0.1)], [(2, 0.2), (-2, 0.1)])
    gm = build_matrix(v, "per+", 40)
    e = overlap_diagnostics(8, gm, solve(8, v))
    assert e.kind == "double-orthogonal" and abs(e.overlap) < 1e-14
    assert e.geometric_multiplicity == 2 and e.residual < 1e-12


def test_reduced_model_consistency():
    gm = build_matrix(C15_NEQ, "per-", 48)
    disc = [overlap_diagnostics(n, gm, solve(n, C15_NEQ)).discrepancy for n in (5, 9, 13, 17)]
    assert disc[-1] < disc[0] and disc[-1] < 1e-3


def test_xt_verdict_and_ratio(reports):
    r = reports["xt"]
    assert r.verdict == "riesz-basis" and r.symmetry == "X_t"
    for row in r.rows:
        assert row.log10_ratio_zstar == pytest.approx(math.log10(2.0), abs=1e-10)
    assert r.kappa ** 2 <= r.delta_cap


def test_c15_equal_verdict(reports):
    r = reports["eq"]
    assert r.verdict == "riesz-basis" and r.ratio_trend == "bounded"


def test_c15_unequal_verdict(reports):
    r = reports["neq"]
    assert r.verdict == "no-basis"
    ov = [row.overlap.abs_overlap for row in r.rows]
    assert ov[-1] > 1 - 1e-6 and ov[-1] >= ov[0]


def test_c15_even_indices_double(reports):
    r = reports["plus"]
    assert r.all_beta_zero and r.verdict == "riesz-basis"
    assert all(row.overlap.geometric_multiplicity == 2 for row in r.rows)


def test_short_range_undecided():
    assert classify(C15_NEQ, "per-", range(5, 12)).verdict == "undecided"


def test_report_json(reports):
    d = json.loads(json.dumps(reports["xt"].to_dict()))
    assert d["schema_version"] == 1 and d["verdict"] == "riesz-basis" and len(d["rows"]) == 13


def test_psi_decreases_for_xt(reports):
    psi = [abs(row.overlap.psi) for row in reports["xt"].rows]
    assert max(psi[len(psi) // 2:]) <= max(psi[: len(psi) // 2]) + 1e-12
