import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_gaps.errors import PotentialParseError
from dirac_gaps.potentials import (Weight, check_submultiplicative, classify_symmetry, example_c15,
                                   format_potential, load_potential, parse_potential_text,
                                   potential_from_coeffs, potential_norm, weighted_norm, xt_potential)

coef = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)
even = st.integers(-6, 6).map(lambda k: 2 * k)
entries = st.lists(st.tuples(even, coef), max_size=5)


def test_empty_is_free_operator():
    v = potential_from_coeffs([], [])
    assert v.is_zero and v.support_bound == 0


def test_example_c15_entries():
    v = potential_from_coeffs([(2, 0.1), (-2, 0.2)], [(2, 0.3), (-2, 0.4)])
    assert v == example_c15(0.1, 0.2, 0.3, 0.4)
    x = np.linspace(0, np.pi, 7)
    P, Q = v.evaluate(x)
    assert np.allclose(P, 0.1 * np.exp(2j * x) + 0.2 * np.exp(-2j * x))
    assert np.allclose(Q, 0.3 * np.exp(2j * x) + 0.4 * np.exp(-2j * x))


def test_one_mode():
    v = potential_from_coeffs([(2, 0.1)], [(2, 0.1)])
    assert v.pc(2) == 0.1 and v.qc(2) == 0.1 and v.pc(-2) == 0


def test_duplicates_summed_and_zeros_dropped():
    v = potential_from_coeffs([(2, 0.1), (2, 0.2), (4, 0.0)], [])
    assert dict(v.p) == {2: pytest.approx(0.3)}


def test_odd_index_rejected():
    with pytest.raises(PotentialParseError, match="odd index"):
        potential_from_coeffs([(1, 0.1)], [])


def test_classify_x1():
    s = classify_symmetry(potential_from_coeffs([(2, 0.3)], [(-2, 0.3)]))
    assert s.is_xt and s.t == pytest.approx(1.0) and s.residual == 0


def test_classify_xm1():
    s = classify_symmetry(potential_from_coeffs([(2, 0.3)], [(-2, -0.3)]))
    assert s.is_xt and s.t == pytest.approx(-1.0)


def test_classify_general_c15():
    # mode 2 would need t = 0.3/0.1, mode -2 needs t = 0.2/0.5
    s = classify_symmetry(example_c15(0.1, 0.5, 0.2, 0.3))
    assert not s.is_xt and s.residual > 0


def test_classify_zero_is_general_with_note():
    s = classify_symmetry(potential_from_coeffs([], []))
    assert s.label == "general" and "every" in s.note


@given(entries, st.floats(0.05, 5.0) | st.floats(-5.0, -0.05))
@settings(max_examples=60, deadline=None)
def test_xt_construction_classifies(p, t):
    v = xt_potential(p, t)
    if v.is_zero:
        return
    s = classify_symmetry(v)
    assert s.is_xt and s.t == pytest.approx(t, rel=1e-12)


def test_weighted_norm_examples():
    assert weighted_norm({}, Weight.sobolev(2)) == 0
    assert weighted_norm({1: 1.0}, Weight.sobolev(2)) == 1.0
    assert weighted_norm({3: 2.0}, Weight.abel(1)) == pytest.approx(2 * math.e ** 3, rel=1e-15)


def test_potential_norm_reindexes_half_modes():
    v = potential_from_coeffs([(6, 2.0)], [(2, 1.0)])
    assert potential_norm(v, Weight.abel(1)) == pytest.approx(2 * math.e ** 3)


@given(st.dictionaries(st.integers(-8, 8), coef, max_size=6),
       st.complex_numbers(min_magnitude=1e-6, max_magnitude=1e6, allow_nan=False, allow_infinity=False))
@settings(max_examples=60, deadline=None)
def test_norm_homogeneous(seq, c):
    w = Weight.gevrey(1.0, 0.5)
    assert weighted_norm({k: c * x for k, x in seq.items()}, w) == pytest.approx(
        abs(c) * weighted_norm(seq, w), rel=1e-12, abs=1e-300)


@given(st.dictionaries(st.integers(-8, 8), coef, max_size=6))
@settings(max_examples=40, deadline=None)
def test_norm_monotone_in_weight(seq):
    assert weighted_norm(seq, Weight.sobolev(1)) <= weighted_norm(seq, Weight.abel(1)) + 1e-12


def test_submultiplicative():
    assert check_submultiplicative(Weight.abel(1), 20)[0]
    ok, ratio, _ = check_submultiplicative(Weight.gevrey(1, 0.5), 50)
    assert ok and ratio <= 1.0
    ok, ratio, pair = check_submultiplicative(Weight.custom({2: 1.0, 1: 0.5}), 1)
    assert not ok and pair in ((1, 1), (-1, -1)) and ratio == pytest.approx(4.0)


def test_weight_symmetry_and_validation():
    w = Weight.parse("gevrey:1,0.5")
    assert all(w(k) == w(-k) for k in range(10))
    with pytest.raises(ValueError):
        Weight.custom({1: 1.0, -1: 2.0})
    with pytest.raises(ValueError):
        Weight.parse("gevrey:1,1.5")
    with pytest.raises(ValueError):
        Weight.parse("nope:1")


def test_text_roundtrip():
    v = example_c15(0.1 + 0.2j, -0.3, 0.0, 1e-3)
    assert parse_potential_text(format_potential(v)) == v


def test_text_comments_and_preset():
    text = "# header\nP 2 0.1 0\n\nQ -2 0.1 0  # tail\n"
    assert parse_potential_text(text) == potential_from_coeffs([(2, 0.1)], [(-2, 0.1)])
    assert parse_potential_text("preset:example-c15 0.1 0.1 0.1 0.1") == example_c15(0.1, 0.1, 0.1, 0.1)


@pytest.mark.parametrize("text", ["P 3 0.1 0", "P 2 0.1", "R 2 0 0", "P 2 x 0",
                                  "example-c15 1 2 3", "preset:zero\nP 2 1 0"])
def test_text_errors(text):
    with pytest.raises(PotentialParseError):
        parse_potential_text(text)


def test_load_potential(tmp_path):
    f = tmp_path / "v.txt"
    f.write_text("P 2 0.5 0\n")
    assert load_potential([str(f)]).pc(2) == 0.5
    assert load_potential(["preset:zero"]).is_zero
    with pytest.raises(PotentialParseError):
        load_potential([str(tmp_path / "missing.txt")])
    with pytest.raises(PotentialParseError):
        load_potential(["preset:unknown"])
    with pytest.raises(PotentialParseError):
        load_potential([])


def test_adjoint_and_scaling():
    v = example_c15(0.1, 0.2j, 0.3, 0.4)
    w = v.scale_pq(2.0, 0.5)
    assert w.pc(2) == pytest.approx(0.2) and w.qc(2) == pytest.approx(0.15)
    assert v.adjoint().adjoint() == v


def test_classify_tiny_coefficients():
    s = classify_symmetry(xt_potential([(0, 2e-293)], 1.0))
    assert s.is_xt and s.t == pytest.approx(1.0)
