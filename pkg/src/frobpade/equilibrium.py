"""Vector equilibrium pair, potentials, domain classifier and ``|Phi|``.

The pair ``(tau_mu, tau_sigma)`` of masses ``(1, c)`` satisfies

    2 V^{tau_sigma} - V^{tau_mu} = 3 l_sigma   on supp tau_sigma,
    2 V^{tau_mu} - V^{tau_sigma} = 3 l_mu      on Delta_mu,

with ``V^nu(z) = -int log|z - t| dnu(t)``.  It is obtained either from the
spectral curve (jumps of the branches) or from an independent balayage
iteration.  The sign of ``E = V^{tau_mu} - 2 V^{tau_sigma} + 3 l_sigma``
splits the plane into the convergence domain ``D+`` and the divergence
domain ``D-``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np
from scipy import optimize

from .densities import ChebDensity, MappedDensity, cheb_points
from .errors import ConfigError, ConvergenceError, NumericalError
from .spectral_curve import Configuration, CubicCurve, CurveCase, canonical_densities, solve_curve

Density = Union[ChebDensity, MappedDensity]

ORACLE_TOL = 1e-10
ORACLE_BUDGET = 200
BOUNDARY_REL_TOL = 1e-3


class Source(str, enum.Enum):
    FROM_CURVE = "FromCurve"
    FROM_ITERATION = "FromIteration"


class Region(str, enum.Enum):
    CONVERGENCE_PLUS = "ConvergencePlus"
    DIVERGENCE_MINUS = "DivergenceMinus"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class Classification:
    """Region label, classifier value and the tolerance band used."""

    region: Region
    value: float
    tol: float


@dataclass(frozen=True)
class EquilibriumData:
    """Equilibrium pair in user coordinates.

    Attributes
    ----------
    c : float
        Mass of ``tau_sigma``.
    tau_mu, tau_sigma : density objects
        Measures on ``Delta_mu`` and on ``Delta_{sigma,c}`` (``potential``,
        ``cauchy``, ``density``, ``cdf``, ``mass``).
    ell_mu, ell_sigma : float
        Equilibrium constants.
    ell_spread : tuple of float
        Spread of the three-point estimates of ``(ell_mu, ell_sigma)``.
    source : Source
    history : tuple
        Oracle only: ``(sup change, J)`` per iteration.
    """

    c: float
    delta_mu: tuple
    delta_sigma: tuple
    tau_mu: Density
    tau_sigma: Density
    ell_mu: float
    ell_sigma: float
    ell_spread: tuple
    source: Source
    history: tuple = field(default=())

    @property
    def support_sigma(self) -> tuple:
        return (self.tau_sigma.a, self.tau_sigma.b)

    def potential_mu(self, z):
        return self.tau_mu.potential(z)

    def potential_sigma(self, z):
        return self.tau_sigma.potential(z)

    def classifier(self, z):
        """``V^{tau_mu}(z) - 2 V^{tau_sigma}(z) + 3 l_sigma``; positive on ``D+``."""
        return self.potential_mu(z) - 2 * self.potential_sigma(z) + 3 * self.ell_sigma

    def energy(self) -> float:
        """``J = I(tau_mu) + I(tau_sigma) - I(tau_mu, tau_sigma)``."""
        return _energy(self.tau_mu, self.tau_sigma)

    def residuals(self, points: int = 64):
        """Max deviations from the two equilibrium relations on Chebyshev grids."""
        xs = _interior_grid(self.tau_sigma, points)
        xm = _interior_grid(self.tau_mu, points)
        rs = 2 * self.potential_sigma(xs) - self.potential_mu(xs) - 3 * self.ell_sigma
        rm = 2 * self.potential_mu(xm) - self.potential_sigma(xm) - 3 * self.ell_mu
        return float(np.max(np.abs(rm))), float(np.max(np.abs(rs)))


def _interior_grid(d: Density, points: int):
    s = cheb_points(points)
    return (d.a + d.b) / 2 + (d.b - d.a) / 2 * s


def _energy(tmu: Density, tsg: Density) -> float:
    i_mu = tmu.integrate(lambda x: tmu.potential(x))
    i_sg = tsg.integrate(lambda x: tsg.potential(x))
    i_x = tsg.integrate(lambda x: tmu.potential(x))
    return float(i_mu + i_sg - i_x)


def _ell_constants(tmu: Density, tsg: Density):
    """``ell`` from the equilibrium relations at three interior points per support."""
    fr = np.array([0.25, 0.5, 0.75])
    xs = tsg.a + fr * (tsg.b - tsg.a)
    xm = tmu.a + fr * (tmu.b - tmu.a)
    ls = (2 * tsg.potential(xs) - tmu.potential(xs)) / 3
    lm = (2 * tmu.potential(xm) - tsg.potential(xm)) / 3
    return (float(np.mean(lm)), float(np.mean(ls)),
            (float(np.ptp(lm)), float(np.ptp(ls))))


def _to_user(d: Density, orientation: int) -> Density:
    return d if orientation > 0 else d.reflected()


def densities_from_curve(curve: CubicCurve, nodes: int = 256) -> EquilibriumData:
    """Equilibrium data from the jumps of the curve's branches.

    Parameters
    ----------
    curve : CubicCurve
        An accepted curve.
    nodes : int
        Chebyshev nodes for the regular part of each density.

    Returns
    -------
    EquilibriumData
        Source ``FromCurve``; the constants are averages over three interior
        points of each support.
    """
    tmu, tsg = canonical_densities(curve, nodes)
    for d, name in ((tmu, "tau_mu"), (tsg, "tau_sigma")):
        x = _interior_grid(d, 64)
        if np.min(d.density(x)) < -1e-10:
            raise NumericalError(f"negative {name} density extracted from the curve")
    s = curve.orientation
    tmu, tsg = _to_user(tmu, s), _to_user(tsg, s)
    lm, ls, spread = _ell_constants(tmu, tsg)
    cfg = curve.config
    return EquilibriumData(float(curve.c), tuple(float(v) for v in cfg.delta_mu),
                           tuple(float(v) for v in cfg.delta_sigma), tmu, tsg, lm, ls, spread,
                           Source.FROM_CURVE)


# ---------------------------------------------------------------- oracle

def _balayage_mu(tsg: ChebDensity, bmu: float, amu: float, c: float, grid: int) -> ChebDensity:
    """``tau_mu = Bal(tau_sigma)/2 + (1 - c/2) * arcsine`` on ``[b_mu, a_mu]`` (sigma to the right)."""
    y, w = tsg.nodes_weights()

    def g(x):
        x = np.asarray(x)[:, None]
        k = np.sqrt((y - bmu) * (y - amu)) / (y - x)
        return 0.5 * (k @ w) + (1 - c / 2)
    return ChebDensity.from_g(bmu, amu, g, grid)


def _sigma_g(tmu: ChebDensity, asg: float, b: float, c: float):
    y, w = tmu.nodes_weights()

    def g(x):
        x = np.asarray(x)[:, None]
        k = np.sqrt((asg - y) * (b - y)) / (x - y)
        return 0.5 * (k @ w) - (0.5 - c)
    return g


def _soft_edge(tmu: ChebDensity, asg: float, bsg: float, c: float) -> float:
    """Right end where the candidate ``tau_sigma`` density vanishes like a square root."""
    if c >= 0.5:
        return bsg
    y, w = tmu.nodes_weights()
    f = lambda b: float(np.sum(w * np.sqrt((asg - y) / (b - y)))) - (1 - 2 * c)
    if f(bsg) >= 0:
        return bsg
    lo = asg + 1e-14 * max(1.0, abs(asg))
    return optimize.brentq(f, lo, bsg, xtol=1e-15, rtol=1e-15, maxiter=200)


def equilibrium_oracle(delta_mu, delta_sigma, c, grid: int = 256, tol: float = ORACLE_TOL,
                       max_iter: int = ORACLE_BUDGET) -> EquilibriumData:
    """Equilibrium pair by alternating balayage with support truncation.

    Parameters
    ----------
    delta_mu, delta_sigma : pair of numbers
        Disjoint intervals.
    c : number
        Mass of ``tau_sigma``, in ``(0, 1/2]``.
    grid : int
        Chebyshev nodes per density.
    tol : float
        Stop once the regular parts change by less than ``tol`` in sup norm.
    max_iter : int
        Iteration budget.

    Returns
    -------
    EquilibriumData
        Source ``FromIteration``; ``history`` holds ``(change, J)`` per step.

    Notes
    -----
    Given ``tau_sigma``, the ``Delta_mu`` relation is solved exactly by
    ``tau_mu = Bal(tau_sigma)/2 + (1 - c/2) omega``.  Given ``tau_mu``, the
    ``tau_sigma`` relation on ``[a_sigma, b]`` is solved by
    ``Bal(tau_mu)/2 - (1/2 - c) omega_b``; ``b`` is the largest endpoint in
    ``Delta_sigma`` at which that density stays nonnegative, i.e. the zero of
    its inverse-square-root coefficient, or ``b_sigma`` when none exists.
    """
    cfg = Configuration(delta_mu, delta_sigma, c)
    if cfg.touching:
        raise ConfigError("the oracle needs disjoint supports (the balayage kernels are singular "
                          "when the intervals touch)")
    bmu, amu, asg, bsg = (float(v) for v in cfg.canonical())
    cf = float(cfg.c)
    tmu = ChebDensity(bmu, amu, np.concatenate(([1.0], np.zeros(grid - 1))))
    tsg = None
    b = bsg
    history = []
    prev = None
    prev_b = None
    for it in range(max_iter):
        b = _soft_edge(tmu, asg, bsg, cf)
        tsg = ChebDensity.from_g(asg, b, _sigma_g(tmu, asg, b, cf), grid)
        tmu = _balayage_mu(tsg, bmu, amu, cf, grid)
        state = np.concatenate((tmu.coeffs, tsg.coeffs))
        change = np.inf if prev is None else float(np.max(np.abs(state - prev)) + abs(b - prev_b))
        history.append((change, _energy(tmu, tsg)))
        prev, prev_b = state, b
        if change < tol:
            break
    else:
        raise ConvergenceError(f"oracle did not settle in {max_iter} steps; last supports "
                               f"[{asg}, {prev_b}] and [{asg}, {b}]",
                               residual=history[-1][0], payload=(prev_b, b))
    s = cfg.orientation
    tmu_u, tsg_u = _to_user(tmu, s), _to_user(tsg, s)
    lm, ls, spread = _ell_constants(tmu_u, tsg_u)
    return EquilibriumData(cf, tuple(float(v) for v in cfg.delta_mu), tuple(float(v) for v in cfg.delta_sigma),
                           tmu_u, tsg_u, lm, ls, spread, Source.FROM_ITERATION, tuple(history))


def equilibrium(delta_mu, delta_sigma, c, prec: int | None = None) -> EquilibriumData:
    """Shortcut: solve the curve and extract its equilibrium data."""
    return densities_from_curve(solve_curve(delta_mu, delta_sigma, c, prec))


def regular_part_distance(a: EquilibriumData, b: EquilibriumData, points: int = 64):
    """Sup distances between the two pairs' densities times ``pi sqrt((x-l)(r-x))``.

    The factor is taken from ``a``'s supports; it removes the edge
    singularities so that the sup norm is finite.
    """
    out = []
    for da, db in ((a.tau_mu, b.tau_mu), (a.tau_sigma, b.tau_sigma)):
        x = _interior_grid(da, points)
        f = np.pi * np.sqrt((x - da.a) * (da.b - x))
        out.append(float(np.max(np.abs(f * (da.density(x) - db.density(x))))))
    return tuple(out)


# ---------------------------------------------------------------- domains and Phi

def classify_point(eq: EquilibriumData, point, tol: float | None = None) -> Classification:
    """Sign of the domain classifier at ``point``.

    ``tol`` defaults to ``1e-3`` times the local gradient magnitude of the
    classifier (by central differences); ``|E| < tol`` is reported as
    ``Boundary``.
    """
    z = complex(point)
    val = float(eq.classifier(z))
    if tol is None:
        span = max(abs(eq.delta_mu[1] - eq.delta_mu[0]), abs(eq.delta_sigma[1] - eq.delta_sigma[0]))
        h = 1e-6 * max(span, abs(z))
        gx = (eq.classifier(z + h) - eq.classifier(z - h)) / (2 * h)
        gy = (eq.classifier(z + 1j * h) - eq.classifier(z - 1j * h)) / (2 * h)
        tol = BOUNDARY_REL_TOL * math.hypot(gx, gy)
    if abs(val) < tol:
        region = Region.BOUNDARY
    elif val > 0:
        region = Region.CONVERGENCE_PLUS
    else:
        region = Region.DIVERGENCE_MINUS
    return Classification(region, val, float(tol))


def log_phi_modulus(eq: EquilibriumData, point, sheet: int, m: int, n: int) -> float:
    """``log|Phi_{m,n}|`` on sheet 0, 1 or 2 at ``point``.

    The three sheet values sum to zero; the difference of sheets 0 and 1
    is ``(n + m)`` times the domain classifier.
    """
    z = complex(point)
    vm = float(eq.potential_mu(z))
    vs = float(eq.potential_sigma(z))
    lm, ls = eq.ell_mu, eq.ell_sigma
    if sheet == 0:
        val = -vs + lm + 2 * ls
    elif sheet == 1:
        val = vs - vm + lm - ls
    elif sheet == 2:
        val = vm - 2 * lm - ls
    else:
        raise ConfigError(f"sheet must be 0, 1 or 2, got {sheet}")
    return (n + m) * val


def predicted_rate(eq: EquilibriumData, point) -> float:
    """Exponent ``V^{tau_mu - 2 tau_sigma}(z) + 3 l_sigma`` of the approximation error."""
    return float(eq.classifier(complex(point)))
