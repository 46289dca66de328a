"""Orthogonal-polynomial layer: recurrences, Gauss rules, Cauchy transforms."""
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from frobpade.errors import ConfigError, DomainError
from frobpade.orthoexp import (MeasureSpec, Weight, cauchy_transform, cauchy_transform_boundary,
                               clenshaw, eval_poly, eval_poly_and_second_kind, gauss_rule,
                               recurrence_coeffs, to_fraction)

PREC = 128


def _arcsine_moment_quad(spec, f, nodes=400):
    """Gauss-Chebyshev (first kind) rule: exact for the arcsine measure."""
    a, b = float(spec.a), float(spec.b)
    with mp.workprec(PREC):
        c, r = mp.mpf(a + b) / 2, mp.mpf(b - a) / 2
        xs = [c + r * mp.cos((2 * k - 1) * mp.pi / (2 * nodes)) for k in range(1, nodes + 1)]
        return mp.fsum(spec.weight(x) * f(x) for x in xs) / nodes


# ---------------------------------------------------------------- parsing

@pytest.mark.parametrize("text, value", [("1/3", Fraction(1, 3)), ("0.001", Fraction(1, 1000)),
                                         (2, Fraction(2)), (0.1, Fraction(1, 10)),
                                         ("-2.5", Fraction(-5, 2))])
def test_to_fraction_exact(text, value):
    assert to_fraction(text) == value


@pytest.mark.parametrize("bad", ["abc", float("nan"), True, None, "1/0"])
def test_to_fraction_rejects(bad):
    with pytest.raises(ConfigError):
        to_fraction(bad)


def test_measure_spec_validation():
    with pytest.raises(ConfigError):
        MeasureSpec(1, 0)
    spec = MeasureSpec.from_config({"interval": ["-1", "1/2"], "weight": ["1", "1/4"]})
    assert spec.a == -1 and spec.b == Fraction(1, 2)
    assert MeasureSpec.from_config(spec.to_config()) == spec


# ---------------------------------------------------------------- recurrences

def test_arcsine_recurrence_closed_form():
    # orthonormal Chebyshev on [a, b]: alpha = centre, beta_1 = r^2/2, beta_k = r^2/4
    rec = recurrence_coeffs(MeasureSpec(2, 3), 6, PREC)
    assert all(abs(a - 2.5) < 1e-30 for a in rec.alpha)
    assert abs(rec.beta[0] - 1) < 1e-30
    assert abs(rec.beta[1] - mp.mpf(1) / 8) < 1e-30
    assert all(abs(b - mp.mpf(1) / 16) < 1e-30 for b in rec.beta[2:])


@pytest.mark.parametrize("weight", [Weight.polynomial(["1", "1/2"]),
                                    Weight.polynomial(["2", "0", "1"]),
                                    Weight.rational(["1"], ["3", "1"])])
def test_orthonormality_weighted(weight):
    spec = MeasureSpec(-1, 1, weight)
    deg = 8
    rec = recurrence_coeffs(spec, deg + 2, PREC)
    with mp.workprec(PREC):
        for i in range(deg + 1):
            for j in range(i, deg + 1):
                g = _arcsine_moment_quad(spec, lambda x: eval_poly(rec, deg, x)[i] * eval_poly(rec, deg, x)[j])
                assert abs(g - (1 if i == j else 0)) < 1e-25


def test_affine_pushforward_matches_direct():
    base = recurrence_coeffs(MeasureSpec(-1, 1), 8, PREC)
    moved = base.affine(Fraction(1, 2), Fraction(5, 2))
    direct = recurrence_coeffs(MeasureSpec(2, 3), 8, PREC)
    for a, b in zip(moved.alpha + moved.beta, direct.alpha + direct.beta):
        assert abs(a - b) < 1e-30


# ---------------------------------------------------------------- Gauss rules

def test_gauss_chebyshev_nodes_and_weights():
    rule = gauss_rule(recurrence_coeffs(MeasureSpec(-1, 1), 12, PREC), 10)
    expect = sorted(np.cos((2 * np.arange(1, 11) - 1) * np.pi / 20))
    assert np.allclose(sorted(float(x) for x in rule.nodes), expect, atol=1e-14)
    with mp.workprec(PREC):
        assert all(abs(w - mp.mpf(1) / 10) < 1e-30 for w in rule.weights)


@settings(max_examples=10, deadline=None)
@given(st.integers(min_value=0, max_value=15))
def test_gauss_rule_exact_for_polynomials(k):
    spec = MeasureSpec(0, 2, Weight.polynomial(["1", "1"]))
    rec = recurrence_coeffs(spec, 12, PREC)
    rule = gauss_rule(rec, 8)
    with mp.workprec(PREC):
        got = rule.integrate([x ** k for x in rule.nodes])
    assert abs(got - _arcsine_moment_quad(spec, lambda x: x ** k)) < 1e-25 * max(1, 2 ** k)


# ---------------------------------------------------------------- evaluation

@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=10), st.floats(-3, 3), st.floats(-1, 1))
def test_clenshaw_matches_forward_sum(coeffs, x, y):
    rec = recurrence_coeffs(MeasureSpec(-1, 2), 12, PREC)
    z = mp.mpc(x, y)
    with mp.workprec(PREC):
        ps = eval_poly(rec, len(coeffs) - 1, z)
        direct = mp.fsum(c * p for c, p in zip(coeffs, ps))
        assert abs(clenshaw(rec, coeffs, z) - direct) < 1e-25 * max(1, abs(direct))


def test_second_kind_functions_against_quadrature():
    spec = MeasureSpec(-1, 1, Weight.polynomial(["1", "1/3"]))
    rec = recurrence_coeffs(spec, 40, PREC)
    z = mp.mpf(2)
    with mp.workprec(PREC):
        ps, qs = eval_poly_and_second_kind(rec, 6, z)
        for k in range(7):
            ref = _arcsine_moment_quad(spec, lambda x: eval_poly(rec, 6, x)[k] / (z - x))
            assert abs(qs[k] - ref) < 1e-25


# ---------------------------------------------------------------- Cauchy transforms

@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 6), st.floats(0.01, 3))
def test_cauchy_transform_arcsine_closed_form(x, y):
    spec = MeasureSpec(2, 3)
    z = complex(x, y)
    got = complex(cauchy_transform(spec, z, 64))
    # int dsigma(t) / (t - z) for the arcsine law is -1 / sqrt((z-2)(z-3)), branch ~ z
    w = np.sqrt(z - 2) * np.sqrt(z - 3)
    assert abs(got + 1 / w) < 1e-12 * max(1, abs(1 / w))


def test_cauchy_transform_weighted_against_mpmath_quad():
    spec = MeasureSpec(2, 3, Weight.rational(["1"], ["1", "1/4"]))
    z = mp.mpc(0.5, 0.25)
    with mp.workprec(PREC):
        got = cauchy_transform(spec, z, PREC)
        ref = mpmath.quad(lambda th: spec.weight(2.5 + 0.5 * mp.cos(th)) / (2.5 + 0.5 * mp.cos(th) - z),
                          [0, mp.pi]) / mp.pi
    assert abs(got - ref) < 1e-30


def test_cauchy_transform_domain_and_boundary():
    spec = MeasureSpec(2, 3)
    with pytest.raises(DomainError):
        cauchy_transform(spec, 2.5)
    up = cauchy_transform_boundary(spec, "2.5", +1, PREC)
    down = cauchy_transform_boundary(spec, "2.5", -1, PREC)
    # jump equals 2 pi i times the density 1 / (pi sqrt((x-a)(b-x)))
    assert abs((up - down) - 2j / mp.sqrt(mp.mpf(1) / 4)) < 1e-30
    with pytest.raises(DomainError):
        cauchy_transform_boundary(spec, 4, +1)
