"""Frobenius-Pade systems: exact recovery, orthogonality, evaluation."""
import json
import warnings

import pytest
from hypothesis import given, settings, strategies as st
from mpmath import mp

from frobpade.approximant import (Approximant, FrobeniusIndex, NonUniqueDenominatorWarning,
                                  PolyTarget, PoleTarget, build_frobenius_matrix, eval_C,
                                  eval_C_quadrature, eval_linear_form, eval_P, eval_Q,
                                  expansion_coefficients_of_R, solve_frobenius, zeros_of_Q)
from frobpade.errors import ConfigError, DomainError
from frobpade.orthoexp import MeasureSpec, Weight, mpq

PREC = 192
MU = MeasureSpec(-1, 1)
SIGMA = MeasureSpec(2, 3)


def _cheb_quad(spec, f, nodes=300):
    """Arcsine-weighted Gauss-Chebyshev rule, independent of the library's rules."""
    with mp.workprec(PREC):
        c, r = (mpq(spec.a) + mpq(spec.b)) / 2, (mpq(spec.b) - mpq(spec.a)) / 2
        xs = [c + r * mp.cos((2 * k - 1) * mp.pi / (2 * nodes)) for k in range(1, nodes + 1)]
        return mp.fsum(spec.weight(x) * f(x) for x in xs) / nodes


def _sigma_hat_arcsine(x):
    # int dsigma(t)/(t - x) for arcsine on [2, 3] and real x < 2
    return 1 / mp.sqrt((2 - x) * (3 - x))


def test_index_validation():
    with pytest.raises(ConfigError):
        FrobeniusIndex(0, 3)
    with pytest.raises(ConfigError):
        FrobeniusIndex(-1, 0)
    assert FrobeniusIndex(3, 2).total == 5


def test_overlapping_supports_rejected():
    with pytest.raises(DomainError):
        solve_frobenius(MU, MeasureSpec(0, 2), FrobeniusIndex(1, 1), 64)


@settings(max_examples=8, deadline=None)
@given(st.sampled_from(["1.5", "-2", "3/2", "-1.25", "4"]), st.integers(1, 4))
def test_pole_is_recovered_exactly(t0, m):
    appr = solve_frobenius(MU, PoleTarget(t0), FrobeniusIndex(m, 1), PREC)
    zs = zeros_of_Q(appr, MU).zeros
    assert len(zs) == 1
    with mp.workprec(PREC):
        t = mp.mpf(PoleTarget(t0).t0.numerator) / PoleTarget(t0).t0.denominator
        assert abs(zs[0] - t) < 1e-40
        z = mp.mpc("0.3", "0.7")
        assert abs(eval_P(appr, MU, z) / eval_Q(appr, MU, z) - 1 / (z - t)) < 1e-40


def test_polynomial_target_gives_constant_denominator():
    with pytest.warns(NonUniqueDenominatorWarning):
        appr = solve_frobenius(MU, PolyTarget(("1", "2", "-1")), FrobeniusIndex(3, 1), PREC)
    # f Q - P = 0 is solvable with Q constant, so the minimal solution has degree 0
    assert appr.degree == 0
    assert appr.non_unique


def test_non_unique_denominator_is_flagged():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        appr = solve_frobenius(MU, PoleTarget("2"), FrobeniusIndex(3, 3), PREC)
    assert appr.non_unique and appr.degree == 1
    assert any(issubclass(w.category, NonUniqueDenominatorWarning) for w in caught)


@pytest.mark.parametrize("m, n", [(1, 1), (2, 1), (3, 3), (5, 4), (6, 3)])
def test_defining_orthogonality_independent_quadrature(m, n):
    mu = MeasureSpec(-1, 1, Weight.polynomial(["1", "1/3"]))
    appr = solve_frobenius(mu, SIGMA, FrobeniusIndex(m, n), PREC)
    with mp.workprec(PREC):
        R = lambda x: eval_Q(appr, mu, x) * _sigma_hat_arcsine(x) - eval_P(appr, mu, x)
        norm = mp.sqrt(_cheb_quad(mu, lambda x: R(x) ** 2))
        for i in range(m + n + 1):
            assert abs(_cheb_quad(mu, lambda x: x ** i * R(x))) < 1e-40 * norm
        # the next moment does not vanish
        assert abs(_cheb_quad(mu, lambda x: x ** (m + n + 1) * R(x))) > 1e-10 * norm


def test_expansion_coefficients_of_R_vanish():
    appr = solve_frobenius(MU, SIGMA, FrobeniusIndex(4, 3), PREC)
    cs = expansion_coefficients_of_R(appr, MU, SIGMA, 9)
    scale = max(abs(c) for c in cs)
    assert all(abs(c) < 1e-45 * scale for c in cs[:8])
    assert abs(cs[8]) > 1e-6 * scale


def test_matrix_slicing_matches_direct_solve():
    big = build_frobenius_matrix(MU, SIGMA, FrobeniusIndex(10, 6), PREC)
    a = solve_frobenius(MU, SIGMA, FrobeniusIndex(5, 3), PREC, gram=big)
    b = solve_frobenius(MU, SIGMA, FrobeniusIndex(5, 3), PREC)
    assert max(abs(x - y) for x, y in zip(a.q_coeffs, b.q_coeffs)) < 1e-45


def test_denominator_zeros_on_sigma_support():
    appr = solve_frobenius(MU, SIGMA, FrobeniusIndex(6, 5), PREC)
    zs = zeros_of_Q(appr, MU).zeros
    assert len(zs) == 5
    assert all(abs(mp.im(z)) < 1e-30 and 2 < mp.re(z) < 3 for z in zs)


def test_json_round_trip():
    appr = solve_frobenius(MU, SIGMA, FrobeniusIndex(3, 2), PREC)
    back = Approximant.from_json(json.loads(appr.dumps()))
    assert back.index == appr.index and back.precision_bits == PREC
    assert max(abs(x - y) for x, y in zip(back.q_coeffs, appr.q_coeffs)) < 1e-55


def test_eval_C_tail_matches_quadrature():
    appr = solve_frobenius(MU, SIGMA, FrobeniusIndex(4, 4), PREC)
    z = mp.mpc(-2, 1)
    with mp.workprec(PREC):
        tail = eval_C(appr, MU, SIGMA, z)
        quad = eval_C_quadrature(appr, MU, SIGMA, z, 400, 2 * PREC)
        assert abs(tail - quad) < 1e-30 * abs(quad) + 1e-50
    with pytest.raises(DomainError):
        eval_C(appr, MU, SIGMA, 0)


def test_linear_form_small_far_from_sigma():
    appr = solve_frobenius(MU, SIGMA, FrobeniusIndex(8, 8), PREC)
    with pytest.raises(DomainError):
        eval_linear_form(appr, MU, SIGMA, 2.5)
    r_near = abs(eval_linear_form(appr, MU, SIGMA, mp.mpc(0, 0.1)))
    r_far = abs(eval_linear_form(appr, MU, SIGMA, mp.mpc(1.9, 0.1)))
    assert r_near < r_far
