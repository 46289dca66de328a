"""Absolutely continuous measures on an interval and their logarithmic potentials.

Two representations share one interface (``density``, ``mass``,
``potential``, ``cauchy``, ``cdf``):

* :class:`ChebDensity` stores ``g`` with ``density = g(s) / (pi sqrt((x-a)(b-x)))``
  as a Chebyshev series in ``s = (x - c)/r``.  Potentials and Cauchy
  transforms have closed forms, so this is the accurate workhorse whenever
  ``g`` is analytic on the interval (hard and soft edges).
* :class:`MappedDensity` keeps a pointwise density and integrates through a
  change of variables that removes the edge singularities, including the
  ``|x - a|^{-2/3}`` behaviour at a point where three sheets meet.

All arithmetic here is float64; the measures are limits, the precision
budget lives in the approximants.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.fft import dct

EDGE_HARD = -0.5
EDGE_SOFT = 0.5
EDGE_TRIPLE = -2.0 / 3.0


def _phi(zeta):
    """Exterior map of [-1, 1]: ``zeta + sqrt(zeta^2 - 1)``, ``|phi| >= 1``."""
    zeta = np.asarray(zeta, dtype=complex)
    root = np.sqrt(zeta - 1) * np.sqrt(zeta + 1)
    phi = zeta + root
    # principal branches give |phi| >= 1 except on the cut; fix the rounding
    small = np.abs(phi) < 1
    phi = np.where(small, zeta - root, phi)
    return phi, np.where(small, -root, root)


def cheb_points(m: int) -> np.ndarray:
    """First-kind Chebyshev points, increasing."""
    k = np.arange(m)
    return -np.cos((2 * k + 1) * np.pi / (2 * m))


@dataclass(frozen=True)
class ChebDensity:
    """Measure ``g(s) dx / (pi sqrt((x-a)(b-x)))`` with ``g = sum_k coeffs[k] T_k(s)``."""

    a: float
    b: float
    coeffs: np.ndarray

    @classmethod
    def from_g(cls, a: float, b: float, g: Callable, m: int = 256) -> "ChebDensity":
        s = cheb_points(m)
        c, r = (a + b) / 2, (b - a) / 2
        vals = np.asarray(g(c + r * s), dtype=float)
        # DCT-II on reversed (decreasing) points gives Chebyshev coefficients
        coeffs = dct(vals[::-1], type=2) / m
        coeffs[0] /= 2
        return cls(float(a), float(b), coeffs)

    @classmethod
    def from_density(cls, a: float, b: float, psi: Callable, m: int = 256) -> "ChebDensity":
        """From a pointwise density ``psi(x, x - a, b - x)``."""
        s = cheb_points(m)
        c, r = (a + b) / 2, (b - a) / 2
        # accurate edge distances: r (1 + s) and r (1 - s)
        dl, dr = r * (1 + s), r * (1 - s)
        vals = np.pi * np.sqrt(dl * dr) * np.asarray(psi(c + r * s, dl, dr), dtype=float)
        coeffs = dct(vals[::-1], type=2) / m
        coeffs[0] /= 2
        return cls(float(a), float(b), coeffs)

    @property
    def center(self):
        return (self.a + self.b) / 2

    @property
    def radius(self):
        return (self.b - self.a) / 2

    @property
    def mass(self) -> float:
        return float(self.coeffs[0])

    @property
    def mean(self) -> float:
        # int x dnu = c g0 + r g1 / 2
        g1 = self.coeffs[1] if len(self.coeffs) > 1 else 0.0
        return float(self.center * self.coeffs[0] + self.radius * g1 / 2)

    def tail(self, k: int = 8) -> float:
        """Size of the last ``k`` coefficients (resolution diagnostic)."""
        return float(np.max(np.abs(self.coeffs[-k:])))

    def g(self, x):
        s = (np.asarray(x, dtype=float) - self.center) / self.radius
        return np.polynomial.chebyshev.chebval(np.clip(s, -1, 1), self.coeffs)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.g(x) / (np.pi * np.sqrt((x - self.a) * (self.b - x)))
        return np.where((x > self.a) & (x < self.b), out, 0.0)

    def _series(self, u):
        """``sum_{k>=1} coeffs[k] u^k / k``."""
        k = np.arange(1, len(self.coeffs))
        poly = np.concatenate(([0.0], self.coeffs[1:] / k))
        return np.polynomial.polynomial.polyval(u, poly)

    def potential(self, z):
        """``V(z) = -int log|z - t| dnu(t)``; valid on the support as well."""
        z = np.asarray(z, dtype=complex)
        phi, _ = _phi((z - self.center) / self.radius)
        u = 1 / phi
        val = self.coeffs[0] * (np.log(2.0) - np.log(np.abs(phi)) - np.log(self.radius)) + self._series(u).real
        return val.real if np.ndim(val) else float(np.real(val))

    def cauchy(self, z):
        """``int dnu(t) / (z - t)`` off the support."""
        z = np.asarray(z, dtype=complex)
        zeta = (z - self.center) / self.radius
        phi, root = _phi(zeta)
        u = 1 / phi
        series = np.polynomial.polynomial.polyval(u, self.coeffs)
        return series / (root * self.radius)

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        s = np.clip((x - self.center) / self.radius, -1, 1)
        theta = np.arccos(s)
        k = np.arange(1, len(self.coeffs))
        out = self.coeffs[0] * (np.pi - theta) / np.pi
        terms = -np.sin(np.multiply.outer(theta, k)) / (k * np.pi)
        out = out + terms @ self.coeffs[1:]
        return out

    def integrate(self, f: Callable, m: int | None = None) -> float:
        """``int f dnu`` by Gauss-Chebyshev quadrature in ``s``."""
        m = m or 2 * len(self.coeffs)
        s = cheb_points(m)
        x = self.center + self.radius * s
        return float(np.sum(f(x) * np.polynomial.chebyshev.chebval(s, self.coeffs)) / m)

    def nodes_weights(self, m: int | None = None):
        """Quadrature nodes and weights representing the measure."""
        m = m or 2 * len(self.coeffs)
        s = cheb_points(m)
        return self.center + self.radius * s, np.polynomial.chebyshev.chebval(s, self.coeffs) / m

    def reflected(self) -> "ChebDensity":
        """Image under ``x -> -x``."""
        signs = (-1.0) ** np.arange(len(self.coeffs))
        return ChebDensity(-self.b, -self.a, self.coeffs * signs)


@dataclass(frozen=True)
class MappedDensity:
    """Pointwise density ``psi(x, x - a, b - x)`` on ``[a, b]`` with given edge exponents.

    ``left`` / ``right`` are the exponents of ``(x - a)`` and ``(b - x)``:
    ``EDGE_HARD`` (-1/2), ``EDGE_SOFT`` (+1/2) or ``EDGE_TRIPLE`` (-2/3).
    Integrals run in ``theta in [0, pi]`` through ``x = a + L u^p`` (``p = 3``
    at a triple edge, else 1) and ``u = (1 - cos theta)/2``, which leaves a
    smooth integrand.
    """

    a: float
    b: float
    psi: Callable
    left: float = EDGE_HARD
    right: float = EDGE_HARD
    nodes: int = 400

    def _map(self, theta):
        """Point, Jacobian and accurate edge distances ``x - a``, ``b - x``."""
        L = self.b - self.a
        u = np.sin(theta / 2) ** 2
        v = np.cos(theta / 2) ** 2
        du = np.sin(theta) / 2
        if self.left == EDGE_TRIPLE:
            dl = L * u ** 3
            dr = L * v * (1 + u + u * u)
            return self.a + dl, 3 * L * u ** 2 * du, dl, dr
        if self.right == EDGE_TRIPLE:
            dr = L * v ** 3
            dl = L * u * (1 + v + v * v)
            return self.b - dr, 3 * L * v ** 2 * du, dl, dr
        return self.a + L * u, L * du, L * u, L * v

    def _theta_of(self, x):
        L = self.b - self.a
        if self.left == EDGE_TRIPLE:
            u = np.cbrt((x - self.a) / L)
        elif self.right == EDGE_TRIPLE:
            u = 1 - np.cbrt((self.b - x) / L)
        else:
            u = (x - self.a) / L
        return np.arccos(np.clip(1 - 2 * u, -1, 1))

    def _rule(self):
        t, w = np.polynomial.legendre.leggauss(self.nodes)
        theta = np.pi * (t + 1) / 2
        x, dx, dl, dr = self._map(theta)
        return x, w * np.pi / 2 * dx * self.psi(x, dl, dr)

    def density(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x > self.a) & (x < self.b)
        out = np.zeros_like(x)
        if np.any(inside):
            xi = x[inside]
            out[inside] = self.psi(xi, xi - self.a, self.b - xi)
        return out

    @property
    def mass(self) -> float:
        _, w = self._rule()
        return float(np.sum(w))

    @property
    def mean(self) -> float:
        x, w = self._rule()
        return float(np.sum(w * x))

    def _adaptive(self, f, breaks=()):
        def integrand(theta):
            x, dx, dl, dr = self._map(np.array([theta]))
            return float((f(x) * dx * self.psi(x, dl, dr))[0])
        pts = sorted(set(float(p) for p in breaks if 0 < p < np.pi))
        edges = [0.0] + pts + [np.pi]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
            total += val
        return total

    def potential(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        x, w = self._rule()
        out = np.empty(z.shape)
        L = self.b - self.a
        for i, zi in enumerate(z):
            near = abs(zi.imag) < 0.05 * L and self.a - 0.05 * L < zi.real < self.b + 0.05 * L
            if near:
                br = [self._theta_of(min(max(zi.real, self.a), self.b))]
                out[i] = -self._adaptive(lambda t: np.log(np.abs(zi - t)), br)
            else:
                out[i] = -float(np.sum(w * np.log(np.abs(zi - x))))
        return float(out[0]) if scalar else out

    def cauchy(self, z):
        z = np.asarray(z, dtype=complex)
        scalar = z.ndim == 0
        z = np.atleast_1d(z)
        x, w = self._rule()
        out = np.empty(z.shape, dtype=complex)
        L = self.b - self.a
        for i, zi in enumerate(z):
            near = abs(zi.imag) < 0.05 * L and self.a - 0.05 * L < zi.real < self.b + 0.05 * L
            if near:
                br = [self._theta_of(min(max(zi.real, self.a), self.b))]
                re = self._adaptive(lambda t: (1 / (zi - t)).real, br)
                im = self._adaptive(lambda t: (1 / (zi - t)).imag, br)
                out[i] = re + 1j * im
            else:
                out[i] = np.sum(w / (zi - x))
        return complex(out[0]) if scalar else out

    def cdf(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(x)
        for i, xi in enumerate(x):
            if xi <= self.a:
                out[i] = 0.0
            elif xi >= self.b:
                out[i] = self.mass
            else:
                th = float(self._theta_of(xi))
                f = lambda t: np.ones_like(t)
                out[i] = self._adaptive_range(f, 0.0, th)
        return out

    def _adaptive_range(self, f, lo, hi):
        def integrand(theta):
            x, dx, dl, dr = self._map(np.array([theta]))
            return float((f(x) * dx * self.psi(x, dl, dr))[0])
        val, _ = integrate.quad(integrand, lo, hi, limit=400, epsabs=1e-13, epsrel=1e-12)
        return val

    def integrate(self, f: Callable, m: int | None = None) -> float:
        x, w = self._rule()
        return float(np.sum(w * f(x)))

    def nodes_weights(self, m: int | None = None):
        return self._rule()

    def reflected(self) -> "MappedDensity":
        """Image under ``x -> -x``."""
        psi = self.psi
        return MappedDensity(-self.b, -self.a, lambda x, dl, dr: psi(-x, dr, dl),
                             self.right, self.left, self.nodes)
