"""Equilibrium measures, potentials, domain classifier and |Phi|."""
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from frobpade.densities import ChebDensity
from frobpade.equilibrium import (Region, classify_point, densities_from_curve, equilibrium,
                                  equilibrium_oracle, log_phi_modulus, predicted_rate,
                                  regular_part_distance)
from frobpade.errors import ConfigError
from frobpade.spectral_curve import solve_curve

DIAG = equilibrium((-1, 1), (2, 3), Fraction(1, 2))
GAP = equilibrium((-1, 0), (Fraction(1, 1000), 3), Fraction(1, 3))

# frozen from the curve-derived data; cross-checked against the iterative oracle below
E_DIAG_ZERO = 3.786640346399128


# ---------------------------------------------------------------- densities

def test_arcsine_potential_is_robin_constant():
    d = ChebDensity.from_g(2.0, 3.0, lambda x: np.ones_like(x), 32)
    # capacity of [a, b] is (b - a)/4, so V = log 4 on the support
    for x in (2.1, 2.5, 2.93):
        assert d.potential(x) == pytest.approx(np.log(4.0), abs=1e-12)
    # off the support V = -log|(z - c + w(z)) / 2|
    z = 0.5 + 1j
    w = np.sqrt(z - 2) * np.sqrt(z - 3)
    assert d.potential(z) == pytest.approx(-np.log(abs((z - 2.5 + w) / 2)), abs=1e-12)


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.99, 0.99))
def test_cdf_matches_scipy_quad(s):
    d = ChebDensity.from_g(-1.0, 1.0, lambda x: 1 + 0.5 * x, 64)
    ref, _ = integrate.quad(lambda t: (1 + 0.5 * np.cos(t)) / np.pi, np.arccos(s), np.pi)
    assert d.cdf(s) == pytest.approx(ref, abs=1e-12)


# ---------------------------------------------------------------- curve data

@pytest.mark.parametrize("eq, c", [(DIAG, 0.5), (GAP, 1 / 3)])
def test_masses(eq, c):
    assert eq.tau_mu.mass == pytest.approx(1, abs=1e-10)
    assert eq.tau_sigma.mass == pytest.approx(c, abs=1e-10)


@pytest.mark.parametrize("eq", [DIAG, GAP])
def test_equilibrium_relations_hold(eq):
    rm, rs = eq.residuals(64)
    assert rm < 1e-6 and rs < 1e-6


def test_classifier_value_at_zero():
    assert DIAG.classifier(0) == pytest.approx(E_DIAG_ZERO, rel=1e-12)
    assert predicted_rate(DIAG, 0) == pytest.approx(E_DIAG_ZERO, rel=1e-12)


def test_gap_configuration_domains():
    assert GAP.support_sigma[1] == pytest.approx(2.4897225183, abs=1e-9)
    assert classify_point(GAP, 2.8).region == Region.DIVERGENCE_MINUS
    assert classify_point(GAP, 2 + 0.5j).region == Region.CONVERGENCE_PLUS
    assert classify_point(GAP, -3).region == Region.CONVERGENCE_PLUS


def test_boundary_label_on_the_level_line():
    cl = classify_point(GAP, 2.8, tol=1.0)
    assert cl.region == Region.BOUNDARY


# ---------------------------------------------------------------- oracle

def test_oracle_agrees_with_curve():
    oracle = equilibrium_oracle((-1, 0), (1, 3), Fraction(1, 5))
    curve = equilibrium((-1, 0), (1, 3), Fraction(1, 5))
    dmu, dsig = regular_part_distance(curve, oracle)
    assert dmu < 1e-3 and dsig < 1e-3
    assert oracle.ell_sigma == pytest.approx(curve.ell_sigma, abs=1e-6)
    assert oracle.classifier(0.5j) == pytest.approx(curve.classifier(0.5j), abs=1e-6)
    assert oracle.history and oracle.history[-1][0] < 1e-9


def test_oracle_diagonal_classifier():
    oracle = equilibrium_oracle((-1, 1), (2, 3), Fraction(1, 2))
    assert oracle.classifier(0) == pytest.approx(E_DIAG_ZERO, abs=1e-7)


def test_oracle_rejects_touching_supports():
    with pytest.raises(ConfigError):
        equilibrium_oracle((-1, 0), (0, 3), Fraction(1, 3))


def test_degenerate_touching_densities():
    eq = densities_from_curve(solve_curve((-1, 0), (0, 3), Fraction(1, 3), 128))
    assert eq.support_sigma[1] == pytest.approx(2.43, abs=1e-12)
    assert eq.tau_sigma.mass == pytest.approx(1 / 3, abs=1e-8)
    assert eq.tau_mu.mass == pytest.approx(1, abs=1e-8)


# ---------------------------------------------------------------- Phi

@settings(max_examples=25, deadline=None)
@given(st.floats(-4, 5), st.floats(0.01, 3), st.integers(1, 60), st.integers(0, 60))
def test_sheet_sum_of_log_phi_vanishes(x, y, n, extra):
    z = complex(x, y)
    m = n - 1 + extra
    total = sum(log_phi_modulus(DIAG, z, k, m, n) for k in range(3))
    assert abs(total) < 1e-10 * (n + m)


@settings(max_examples=10, deadline=None)
@given(st.floats(-4, 5), st.floats(0.01, 3))
def test_sheet_difference_is_classifier(x, y):
    z = complex(x, y)
    d = log_phi_modulus(GAP, z, 0, 20, 10) - log_phi_modulus(GAP, z, 1, 20, 10)
    assert d == pytest.approx(30 * GAP.classifier(z), abs=1e-9)


def test_log_phi_rejects_bad_sheet():
    with pytest.raises(ConfigError):
        log_phi_modulus(DIAG, 1j, 3, 2, 2)
