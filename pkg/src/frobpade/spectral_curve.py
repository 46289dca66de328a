"""The cubic equation of the limiting log-derivative ``h`` and its three sheets.

Internally every configuration is put in canonical orientation (``Delta_sigma``
to the right of ``Delta_mu``); a left-lying ``sigma`` is handled by the
reflection ``z -> -z``, ``h -> -h``.  Endpoints follow the inner/outer
convention: ``a`` is the endpoint facing the other interval, ``b`` the far one.

With ``A = int dtau_sigma/(z-x)`` and ``M = int dtau_mu/(z-x)`` the sheets are
``h0 = A``, ``h1 = M - A``, ``h2 = -M``; they solve

    Pi h^3 - (1 - kappa) Pp h + kappa Pq = 0,    kappa = c - c^2,

with ``(Pi, Pp, Pq) = (Pi_4, P_2, P_1)`` in the generic case,
``(Pi_3, P~_1, 1)`` when the divergence domain touches the support and
``((z-b_mu)(z-a)^2, z-a, 1)`` when the two supports touch at ``a``.
"""
from __future__ import annotations

import cmath
import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from mpmath import mp

from .densities import EDGE_HARD, EDGE_SOFT, EDGE_TRIPLE, ChebDensity, MappedDensity
from .errors import ConfigError, ConvergenceError, DomainError, NumericalError
from .orthoexp import DEFAULT_PREC, fraction_str, mpq, to_fraction

HOMOTOPY_STEP = Fraction(1, 50)
MIN_HOMOTOPY_STEP = Fraction(1, 10 ** 6)
NEWTON_BUDGET = 60
DENSITY_NODES = 256


class CurveCase(str, enum.Enum):
    GENERIC = "Generic"
    TOUCHING = "Touching"
    DEGENERATE = "DegenerateTouching"


# ---------------------------------------------------------------- polynomials
# ascending coefficient lists of mpf

def padd(p, q):
    n = max(len(p), len(q))
    return [(p[k] if k < len(p) else 0) + (q[k] if k < len(q) else 0) for k in range(n)]


def pscale(p, s):
    return [s * c for c in p]


def pmul(p, q):
    out = [mp.zero] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def pfromroots(roots):
    out = [mp.one]
    for r in roots:
        out = pmul(out, [-r, mp.one])
    return out


def peval(p, z):
    acc = mp.zero
    for c in reversed(p):
        acc = acc * z + c
    return acc


def pderiv(p):
    return [k * p[k] for k in range(1, len(p))] or [mp.zero]


def _coef(p, k):
    return p[k] if k < len(p) else mp.zero


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class Configuration:
    """Two disjoint (or touching) intervals, in user coordinates, and ``c``."""

    delta_mu: tuple
    delta_sigma: tuple
    c: Fraction

    def __post_init__(self):
        mu = tuple(to_fraction(v) for v in self.delta_mu)
        sg = tuple(to_fraction(v) for v in self.delta_sigma)
        c = to_fraction(self.c)
        if len(mu) != 2 or len(sg) != 2 or not (mu[0] < mu[1] and sg[0] < sg[1]):
            raise ConfigError("intervals must be pairs (left, right) with left < right")
        if not (0 < c <= Fraction(1, 2)):
            raise ConfigError(f"c must lie in (0, 1/2], got {c}")
        if not (mu[1] <= sg[0] or sg[1] <= mu[0]):
            raise ConfigError(f"intervals overlap: {mu} and {sg}")
        object.__setattr__(self, "delta_mu", mu)
        object.__setattr__(self, "delta_sigma", sg)
        object.__setattr__(self, "c", c)

    @property
    def orientation(self) -> int:
        return 1 if self.delta_mu[1] <= self.delta_sigma[0] else -1

    def canonical(self):
        """``(b_mu, a_mu, a_sigma, b_sigma)`` with ``b_mu < a_mu <= a_sigma < b_sigma``."""
        s = self.orientation
        mu = sorted(s * v for v in self.delta_mu)
        sg = sorted(s * v for v in self.delta_sigma)
        return mu[0], mu[1], sg[0], sg[1]

    @property
    def touching(self) -> bool:
        _, amu, asg, _ = self.canonical()
        return amu == asg

    @property
    def kappa(self) -> Fraction:
        return self.c - self.c * self.c


@dataclass(frozen=True)
class CubicCurve:
    """Solved spectral curve, stored in canonical orientation.

    ``pi_roots``, ``pp_roots``, ``pq_roots`` are the zeros of the monic
    polynomials ``Pi``, ``Pp``, ``Pq`` (canonical coordinates).  ``p2``,
    ``p1`` (generic) and ``p1_tilde`` (touching) are ascending coefficient
    tuples in user coordinates.
    """

    case: CurveCase
    config: Configuration
    prec: int
    pi_roots: tuple
    pp_roots: tuple
    pq_roots: tuple
    b_sigma_c_canon: object
    zeta_canon: object
    square_factor: tuple = ()
    double_zero_canon: object = None
    newton_residual: object = None

    @property
    def c(self) -> Fraction:
        return self.config.c

    @property
    def kappa(self) -> Fraction:
        return self.config.kappa

    @property
    def orientation(self) -> int:
        return self.config.orientation

    # user-coordinate views -----------------------------------------------
    def _to_user_roots(self, roots):
        return tuple(self.orientation * r for r in roots)

    def _user_poly(self, roots):
        with mp.workprec(self.prec):
            return tuple(pfromroots(self._to_user_roots(roots)))

    @property
    def pi_poly(self):
        return self._user_poly(self.pi_roots)

    @property
    def p2(self):
        return self._user_poly(self.pp_roots) if self.case == CurveCase.GENERIC else None

    @property
    def p1(self):
        return self._user_poly(self.pq_roots) if self.case == CurveCase.GENERIC else None

    @property
    def p1_tilde(self):
        return self._user_poly(self.pp_roots) if self.case != CurveCase.GENERIC else None

    @property
    def b_sigma_c(self):
        return self.orientation * self.b_sigma_c_canon

    @property
    def zeta(self):
        return self.orientation * self.zeta_canon

    @property
    def endpoints(self) -> dict:
        bmu, amu, asg, bsg = self.config.canonical()
        s = self.orientation
        return {"a_mu": s * amu, "b_mu": s * bmu, "a_sigma": s * asg, "b_sigma": s * bsg,
                "a_sigma_c": s * asg, "b_sigma_c": self.b_sigma_c}

    def supports_canon(self):
        """``((lo, hi) of Delta_mu, (lo, hi) of Delta_sigma_c)`` in canonical floats."""
        bmu, amu, asg, _ = self.config.canonical()
        return (float(bmu), float(amu)), (float(asg), float(self.b_sigma_c_canon))

    def equation_polys(self):
        """``(Pi, Pp, Pq)`` ascending coefficients, user coordinates, with the
        equation ``Pi h^3 - (1-kappa) Pp h + kappa Pq = 0``."""
        # the reflection z -> -z, h -> -h keeps the same monic form
        with mp.workprec(self.prec):
            pi = pfromroots(self._to_user_roots(self.pi_roots))
            pp = pfromroots(self._to_user_roots(self.pp_roots))
            pq = pfromroots(self._to_user_roots(self.pq_roots))
        return tuple(pi), tuple(pp), tuple(pq)

    def discriminant_numerator(self):
        """``B = ((1-kappa)/3)^3 Pp^3 - (kappa/2)^2 Pq^2 Pi`` (user coordinates)."""
        with mp.workprec(self.prec):
            pi, pp, pq = self.equation_polys()
            k = mpq(self.kappa)
            L3 = ((1 - k) / 3) ** 3
            K = (k / 2) ** 2
            return tuple(padd(pscale(pmul(pmul(pp, pp), pp), L3), pscale(pmul(pmul(pq, pq), pi), -K)))

    def certificate(self) -> dict:
        """Residual of ``B`` against its claimed factorization.

        Generic: ``B = v^2``.  Touching: ``B = lead (z - z0)^2 (z - b_sigma_c)``.
        Degenerate: ``B = lead (z - a)^2 (z - b_sigma_c)``.
        """
        with mp.workprec(self.prec):
            B = list(self.discriminant_numerator())
            s = self.orientation
            if self.case == CurveCase.GENERIC:
                v = [s ** k * c for k, c in enumerate(self.square_factor)]
                model = pmul(v, v)
                kind = "perfect_square"
            else:
                lead = B[-1]
                z0 = s * self.double_zero_canon
                model = pscale(pmul(pfromroots([z0, z0]), pfromroots([self.b_sigma_c])), lead)
                kind = "square_times_linear"
            diff = padd(B, pscale(model, -1))
            scale = max(abs(c) for c in B)
            res = max(abs(c) for c in diff)
            return {"kind": kind, "residual": res, "relative_residual": res / scale,
                    "B": tuple(B), "model": tuple(model)}

    def to_json(self) -> dict:
        dps = int(self.prec * math.log10(2)) + 2
        fmt = lambda v: mp.nstr(v, dps, strip_zeros=False, min_fixed=1, max_fixed=0)
        fmtl = lambda p: [fmt(v) for v in p] if p is not None else None
        with mp.workprec(self.prec):
            cert = self.certificate()
            pi, pp, pq = self.equation_polys()
            return {
                "case": self.case.value,
                "c": fraction_str(self.c),
                "kappa": fraction_str(self.kappa),
                "delta_mu": [fraction_str(v) for v in self.config.delta_mu],
                "delta_sigma": [fraction_str(v) for v in self.config.delta_sigma],
                "precision_bits": self.prec,
                "pi_poly": fmtl(pi),
                "pp_poly": fmtl(pp),
                "pq_poly": fmtl(pq),
                "p2": fmtl(self.p2),
                "p1": fmtl(self.p1),
                "p1_tilde": fmtl(self.p1_tilde),
                "endpoints": {k: fmt(mp.mpf(v) if not isinstance(v, Fraction) else mpq(v))
                              for k, v in self.endpoints.items()},
                "b_sigma_c": fmt(self.b_sigma_c),
                "zeta": fmt(self.zeta),
                "certificate": {"kind": cert["kind"], "residual": fmt(cert["residual"])},
            }

    # float evaluation ---------------------------------------------------------
    def coefficients_canon(self, z, offsets=None):
        """``(Pi, Pp, Pq)`` values at canonical points ``z`` (complex arrays).

        ``offsets`` maps an endpoint value to an accurate ``z - endpoint`` array,
        used near edges where ``z - e`` would lose digits.
        """
        z = np.asarray(z, dtype=complex)
        vals = []
        for roots in (self.pi_roots, self.pp_roots, self.pq_roots):
            acc = np.ones_like(z)
            for r in roots:
                rf = float(mp.re(r)) + 1j * float(mp.im(r))
                d = None
                if offsets is not None:
                    for e, off in offsets:
                        if abs(rf - e) == 0:
                            d = off
                            break
                acc = acc * (d if d is not None else z - rf)
            vals.append(acc)
        return tuple(vals)

    def roots_canon(self, z, offsets=None):
        """Unlabeled roots (N, 3) of the canonical cubic at canonical points."""
        pi, pp, pq = self.coefficients_canon(z, offsets)
        k = float(self.kappa)
        p = -(1 - k) * pp / pi
        q = k * pq / pi
        return cubic_roots(p, q)


def cubic_roots(p, q):
    """Roots of ``h^3 + p h + q`` (vectorized Cardano plus one Newton step)."""
    p = np.atleast_1d(np.asarray(p, dtype=complex))
    q = np.atleast_1d(np.asarray(q, dtype=complex))
    d0 = -3 * p
    d1 = 27 * q
    sq = np.sqrt(d1 * d1 - 4 * d0 ** 3)
    c_plus = (d1 + sq) / 2
    c_minus = (d1 - sq) / 2
    cc = np.where(np.abs(c_plus) >= np.abs(c_minus), c_plus, c_minus)
    C = cc ** (1 / 3)
    xi = np.exp(2j * np.pi / 3)
    out = np.empty(p.shape + (3,), dtype=complex)
    for k in range(3):
        Ck = C * xi ** k
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(np.abs(Ck) > 0, -(Ck + d0 / Ck) / 3, 0)
        out[..., k] = r
    for _ in range(2):
        f = out ** 3 + p[..., None] * out + q[..., None]
        df = 3 * out ** 2 + p[..., None]
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(np.abs(df) > 0, f / df, 0)
        out = out - step
    return out


# ---------------------------------------------------------------- closed form

def b_sigma_c_degenerate(b_mu, a, c):
    """Moving endpoint when the supports touch at ``a`` (exact rational arithmetic).

    Returns a ``Fraction`` for rational input.  Raises ``DomainError`` at
    ``c = 1/2`` where the endpoint escapes to infinity.
    """
    b_mu, a, c = to_fraction(b_mu), to_fraction(a), to_fraction(c)
    if not (0 < c <= Fraction(1, 2)):
        raise ConfigError(f"c must lie in (0, 1/2], got {c}")
    if b_mu == a:
        raise ConfigError("b_mu and a must differ")
    k = c - c * c
    L3 = ((1 - k) / 3) ** 3
    K = (k / 2) ** 2
    den = L3 - K
    if den == 0:
        raise DomainError("b_sigma_c is infinite at c = 1/2 (the divergence domain is empty)")
    return (L3 * a - K * b_mu) / den


# ---------------------------------------------------------------- solvers

def _measure_moments(lo, hi, mass):
    """Moments 0..3 of ``mass`` times the arcsine distribution of [lo, hi]."""
    c = (lo + hi) / 2
    r = (hi - lo) / 2
    # arcsine moments about the centre: 1, 0, r^2/2, 0
    m = [mp.one, c, c * c + r * r / 2, c ** 3 + 3 * c * r * r / 2, c ** 4 + 3 * c * c * r * r + 3 * r ** 4 / 8]
    return [mass * v for v in m]


def _laurent_from_moments(mom, terms):
    """Coefficients ``f_j`` of ``sum_j f_j z^{-j}`` for ``int dnu/(z-x)``, j = 0..terms."""
    return [mp.zero] + [mom[j - 1] if j - 1 < len(mom) else mp.zero for j in range(1, terms + 1)]


def _lmul(f, g, terms):
    out = [mp.zero] * (terms + 1)
    for i in range(terms + 1):
        for j in range(terms + 1 - i):
            out[i + j] += f[i] * g[j]
    return out


def _poly_part(laurent, pi):
    """Polynomial part of ``laurent(z) * pi(z)``; ``laurent`` in powers ``z^{-j}``."""
    deg = len(pi) - 1
    out = []
    for d in range(deg + 1):
        out.append(mp.fsum(pi[d + j] * laurent[j] for j in range(len(laurent)) if d + j <= deg))
    while len(out) > 1 and abs(out[-1]) < mp.mpf(10) ** -30:
        out.pop()
    return out


def _moment_warm_start(bmu, amu, asg, bsg, c):
    """Crude ``(P2, P1)`` from arcsine stand-ins for both equilibrium measures."""
    k = c - c * c
    terms = 6
    A = _laurent_from_moments(_measure_moments(asg, bsg, c), terms)
    M = _laurent_from_moments(_measure_moments(bmu, amu, mp.one), terms)
    pi = pfromroots([amu, bmu, asg, bsg])
    AA, MM, AM = _lmul(A, A, terms), _lmul(M, M, terms), _lmul(A, M, terms)
    e2 = [x + y - w for x, y, w in zip(AA, MM, AM)]
    e3 = _lmul(AM, [y - x for x, y in zip(A, M)], terms)
    p2 = _poly_part(e2, pi)
    p1 = _poly_part(e3, pi)
    p2 = pscale(p2[:3], 1 / (1 - k))
    p1 = pscale(p1[:2], 1 / k)
    return p2, p1


def _square_root_top(B, v3):
    """Leading coefficients of ``sqrt(B)`` as a cubic, matching ``z^6..z^3``."""
    # B = v^2 with v = v3 z^3 + v2 z^2 + v1 z + v0 (v3 may vanish)
    if v3 != 0:
        v2 = B[5] / (2 * v3)
        v1 = (B[4] - v2 * v2) / (2 * v3)
        v0 = (B[3] - 2 * v2 * v1) / (2 * v3)
        return [v0, v1, v2]
    # quadratic square root from z^4..z^2
    v2 = mp.sqrt(abs(B[4]))
    v1 = B[3] / (2 * v2)
    v0 = (B[2] - v1 * v1) / (2 * v2)
    return [v0, v1, v2]


def _generic_residual(x, pi, L3, K, v3):
    p2 = [x[1], x[0], mp.one]
    p1 = [x[2], mp.one]
    v = [x[5], x[4], x[3], v3]
    B = padd(pscale(pmul(pmul(p2, p2), p2), L3), pscale(pmul(pmul(p1, p1), pi), -K))
    F = padd(B, pscale(pmul(v, v), -1))
    return [_coef(F, k) for k in range(6)], p2, p1, v


def _generic_jacobian(p2, p1, v, pi, L3, K):
    p2sq = pmul(p2, p2)
    cols = [
        pscale(pmul(p2sq, [0, 1]), 3 * L3),
        pscale(p2sq, 3 * L3),
        pscale(pmul(p1, pi), -2 * K),
        pscale(pmul(v, [0, 0, 1]), -2),
        pscale(pmul(v, [0, 1]), -2),
        pscale(v, -2),
    ]
    J = mp.matrix(6, 6)
    for j, col in enumerate(cols):
        for i in range(6):
            J[i, j] = _coef(col, i)
    return J


def _newton_generic(x, pi, L3, K, v3, prec):
    tol = mp.mpf(2) ** (-prec + 12)
    F, p2, p1, v = _generic_residual(x, pi, L3, K, v3)
    norm = max(abs(f) for f in F)
    for it in range(NEWTON_BUDGET):
        if norm <= tol:
            return x, norm
        J = _generic_jacobian(p2, p1, v, pi, L3, K)
        try:
            delta = mp.lu_solve(J, mp.matrix(F))
        except ZeroDivisionError as exc:
            raise NumericalError("singular Jacobian in the generic curve solve", residual=norm) from exc
        lam = mp.one
        while True:
            trial = [xi - lam * di for xi, di in zip(x, delta)]
            Ft, p2t, p1t, vt = _generic_residual(trial, pi, L3, K, v3)
            nt = max(abs(f) for f in Ft)
            if nt < (1 - lam / 4) * norm or lam < mp.mpf(2) ** -20:
                break
            lam /= 2
        x, F, p2, p1, v, norm = trial, Ft, p2t, p1t, vt, nt
    if norm <= tol * 2 ** 20:
        return x, norm
    raise ConvergenceError("generic curve Newton iteration did not converge", residual=norm)


def _generic_state(cfg, x, v3, prec, pi, res):
    bmu, amu, asg, bsg = (mpq(v) for v in cfg.canonical())
    p2 = [x[1], x[0], mp.one]
    disc = p2[1] ** 2 - 4 * p2[0]
    rd = mp.sqrt(disc) if disc >= 0 else mp.sqrt(mp.mpc(disc))
    pp_roots = ((-p2[1] + rd) / 2, (-p2[1] - rd) / 2)
    zeta = -x[2]
    v = (x[5], x[4], x[3], v3)
    return CubicCurve(CurveCase.GENERIC, cfg, prec, (amu, bmu, asg, bsg), pp_roots, (zeta,),
                      bsg, zeta, v, None, res)


def _sigma_mass(curve) -> float:
    (sl, sr) = curve.supports_canon()[1]
    f = lambda x, dl, dr: cut_density_canon(curve, "sigma", x, dl, dr)
    return ChebDensity.from_density(sl, sr, f, 64).mass


def _solve_generic(cfg: Configuration, prec: int) -> CubicCurve:
    """Generic curve by homotopy in ``c`` from ``1/2`` down to the target.

    ``kappa`` is symmetric under ``c -> 1 - c``; both solution branches leave
    the ``c = 1/2`` solution, distinguished by the sign of the leading
    coefficient of the square root ``v``.  The first step tries both signs
    and keeps the one whose ``tau_sigma`` mass is ``c`` rather than ``1 - c``.
    """
    bmu, amu, asg, bsg = (mpq(v) for v in cfg.canonical())
    pi = pfromroots([amu, bmu, asg, bsg])
    target = cfg.c
    half = Fraction(1, 2)

    def consts(ck):
        k = mpq(ck - ck * ck)
        L3 = ((1 - k) / 3) ** 3
        K = (k / 2) ** 2
        return L3, K, mp.sqrt(max(L3 - K, mp.zero))

    L3, K, v3 = consts(half)
    p2, p1 = _moment_warm_start(bmu, amu, asg, bsg, mpq(half))
    B = padd(pscale(pmul(pmul(p2, p2), p2), L3), pscale(pmul(pmul(p1, p1), pi), -K))
    B = [_coef(B, j) for j in range(7)]
    v = _square_root_top(B, v3)
    x = [p2[1], p2[0], p1[0], v[2], v[1], v[0]]
    x, res = _newton_generic(x, pi, L3, K, v3, prec)
    if target == half:
        return _generic_state(cfg, x, v3, prec, pi, res)
    # first step: pick the branch whose sigma mass is c rather than 1 - c
    ck = max(target, half - HOMOTOPY_STEP)
    L3, K, v3 = consts(ck)
    trials = []
    for sg in (1, -1):
        try:
            xt, rt = _newton_generic(list(x), pi, L3, K, sg * v3, prec)
        except NumericalError:
            continue
        cand = _generic_state(Configuration(cfg.delta_mu, cfg.delta_sigma, ck), xt, sg * v3, prec, pi, rt)
        trials.append((abs(_sigma_mass(cand) - float(ck)), sg, xt, rt))
    if not trials:
        raise ConvergenceError("generic homotopy failed at its first step")
    _, sign, x_new, res = min(trials, key=lambda t: t[0])
    # secant-predicted continuation with adaptive steps; the Jacobian degenerates
    # as c approaches the switch to the touching case, where steps must shrink
    prev, x, cur_c, last_h = x, x_new, ck, half - ck
    h = HOMOTOPY_STEP
    while cur_c > target:
        step = min(h, cur_c - target)
        cn = cur_c - step
        L3, K, v3 = consts(cn)
        ratio = mpq(step) / mpq(last_h) if last_h else 0
        pred = [b + (b - a) * ratio for a, b in zip(prev, x)]
        try:
            xn, res = _newton_generic(pred, pi, L3, K, sign * v3, prec)
        except NumericalError as exc:
            h = step / 4
            if h < MIN_HOMOTOPY_STEP:
                raise ConvergenceError(f"generic homotopy stalled near c = {float(cur_c):.6g}",
                                       residual=getattr(exc, "residual", None)) from exc
            continue
        prev, x, last_h, cur_c = x, xn, step, cn
        h = min(HOMOTOPY_STEP, step * 2)
    return _generic_state(cfg, x, sign * v3, prec, pi, res)


def _disc_poly_in_t(e1, e2, e3, L3, K):
    """Discriminant in ``z`` of ``L3 (z - t)^3 - K Pi3(z)`` as a polynomial in ``t``."""
    B3 = [L3 - K]
    B2 = [K * e1, -3 * L3]
    B1 = [-K * e2, mp.zero, 3 * L3]
    B0 = [K * e3, mp.zero, mp.zero, -L3]
    terms = [
        pscale(pmul(pmul(pmul(B3, B2), B1), B0), 18),
        pscale(pmul(pmul(pmul(B2, B2), B2), B0), -4),
        pmul(pmul(B2, B2), pmul(B1, B1)),
        pscale(pmul(B3, pmul(pmul(B1, B1), B1)), -4),
        pscale(pmul(pmul(B3, B3), pmul(B0, B0)), -27),
    ]
    out = [mp.zero]
    for t in terms:
        out = padd(out, t)
    while len(out) > 1 and out[-1] == 0:
        out.pop()
    return out


def _touching_b(t, pi3, L3, K):
    B = padd(pscale(pfromroots([t, t, t]), L3), pscale(pi3, -K))
    return B


def _solve_touching(cfg: Configuration, prec: int):
    bmu, amu, asg, bsg = (mpq(v) for v in cfg.canonical())
    k = mpq(cfg.kappa)
    L3 = ((1 - k) / 3) ** 3
    K = (k / 2) ** 2
    pi3 = pfromroots([amu, bmu, asg])
    e1 = amu + bmu + asg
    e2 = amu * bmu + amu * asg + bmu * asg
    e3 = amu * bmu * asg
    dpoly = _disc_poly_in_t(e1, e2, e3, L3, K)
    with mp.workprec(prec + 64):
        troots = mp.polyroots(list(reversed(dpoly)), maxsteps=400, extraprec=2 * prec)
    candidates = []
    for t in troots:
        if abs(mp.im(t)) > mp.mpf(10) ** -10 * max(1, abs(t)):
            continue
        t = mp.re(t)
        B = _touching_b(t, pi3, L3, K)
        # the double zero is a critical point of B; the simple zero follows from Vieta
        b3, b2, b1 = B[3], B[2], B[1]
        dd = (2 * b2) ** 2 - 12 * b3 * b1
        if dd < 0:
            continue
        crit = [(-2 * b2 + sgn * mp.sqrt(dd)) / (6 * b3) for sgn in (1, -1)]
        z0 = min(crit, key=lambda z: abs(peval(B, z)))
        bc = -b2 / b3 - 2 * z0
        if asg < bc < bsg:
            candidates.append((t, z0, bc))
    if not candidates:
        raise NumericalError("no admissible touching solution (b_sigma_c outside Delta_sigma)")
    polished = []
    for t, z0, bc in candidates:
        t, z0, res = _newton_touching(t, z0, pi3, L3, K, prec)
        B = _touching_b(t, pi3, L3, K)
        bc = -B[2] / B[3] - 2 * z0
        polished.append((t, z0, bc, res))
    return pi3, polished


def _newton_touching(t, z0, pi3, L3, K, prec):
    tol = mp.mpf(2) ** (-prec + 12)
    dpi = pderiv(pi3)
    d2pi = pderiv(dpi)
    res = None
    for _ in range(NEWTON_BUDGET):
        d = z0 - t
        f1 = L3 * d ** 3 - K * peval(pi3, z0)
        f2 = 3 * L3 * d ** 2 - K * peval(dpi, z0)
        res = max(abs(f1), abs(f2))
        if res <= tol:
            return t, z0, res
        J = mp.matrix([[-3 * L3 * d ** 2, 3 * L3 * d ** 2 - K * peval(dpi, z0)],
                       [-6 * L3 * d, 6 * L3 * d - K * peval(d2pi, z0)]])
        try:
            delta = mp.lu_solve(J, mp.matrix([f1, f2]))
        except ZeroDivisionError as exc:
            raise NumericalError("singular Jacobian in the touching curve solve", residual=res) from exc
        t -= delta[0]
        z0 -= delta[1]
    if res is not None and res <= tol * 2 ** 20:
        return t, z0, res
    raise ConvergenceError("touching curve Newton iteration did not converge", residual=res)


def solve_curve(delta_mu, delta_sigma, c, prec: int | None = None) -> CubicCurve:
    """Spectral curve of the configuration ``(Delta_mu, Delta_sigma, c)``.

    Parameters
    ----------
    delta_mu, delta_sigma : pair of numbers
        Intervals ``(left, right)`` in user coordinates; they may touch but
        not overlap.
    c : number
        Ray parameter in ``(0, 1/2]``; decimal strings and fractions are exact.
    prec : int, optional
        Working precision in bits.

    Returns
    -------
    CubicCurve
        Touching supports give the degenerate solution.  Otherwise the
        touching solution is tried first and returned when its densities are
        admissible (masses ``1`` and ``c``, nonnegative); failing that the
        generic solution, whose zero of ``P_1`` must lie at or beyond
        ``b_sigma``.

    Raises
    ------
    NumericalError
        If neither branch is admissible.
    """
    cfg = delta_mu if isinstance(delta_mu, Configuration) else Configuration(delta_mu, delta_sigma, c)
    prec = prec or DEFAULT_PREC
    with mp.workprec(prec):
        if cfg.touching:
            return _degenerate_curve(cfg, prec)
        bmu, amu, asg, bsg = (mpq(v) for v in cfg.canonical())
        # the two cases are exclusive: an admissible touching solution exists
        # exactly when the generic zeta would fall left of b_sigma; it is far
        # cheaper to find, so it is tried first
        touching_error = "c = 1/2"
        if cfg.c != Fraction(1, 2):
            try:
                pi3, cands = _solve_touching(cfg, prec)
                reasons = []
                for t, z0, bc, res in cands:
                    curve = CubicCurve(CurveCase.TOUCHING, cfg, prec, (amu, bmu, asg), (t,), (), bc, bc,
                                       (), z0, res)
                    ok, why = _densities_admissible(curve)
                    if ok:
                        return curve
                    reasons.append(why)
                touching_error = "; ".join(reasons)
            except NumericalError as exc:
                touching_error = str(exc)
        try:
            curve = _solve_generic(cfg, prec)
        except NumericalError as exc:
            raise NumericalError(f"no admissible branch: touching rejected ({touching_error}); "
                                 f"generic failed ({exc})") from exc
        zeta = curve.zeta_canon
        if zeta < bsg - mp.mpf(2) ** (-prec // 2):
            raise NumericalError(f"no admissible branch: touching rejected ({touching_error}); "
                                 f"generic zero of P1 at {mp.nstr(zeta, 12)} lies left of b_sigma")
        ok, why = _densities_admissible(curve)
        if not ok:
            raise NumericalError(f"no admissible branch: touching rejected ({touching_error}); "
                                 f"generic densities rejected ({why})")
        return curve


def _degenerate_curve(cfg: Configuration, prec: int) -> CubicCurve:
    bmu, a, _, bsg = cfg.canonical()
    bc = b_sigma_c_degenerate(bmu, a, cfg.c)
    if not (a < bc < bsg):
        raise ConfigError(
            f"touching supports: b_sigma_c = {float(bc):.6g} is not inside Delta_sigma; "
            "only the touching-divergence case is supported for touching supports")
    am, bmm, bcm = mpq(a), mpq(bmu), mpq(bc)
    return CubicCurve(CurveCase.DEGENERATE, cfg, prec, (bmm, am, am), (am,), (), bcm, bcm,
                      (), am, mp.zero)


# ---------------------------------------------------------------- densities

def cut_density_canon(curve: CubicCurve, which: str, x, dl=None, dr=None):
    """Equilibrium density on a canonical cut: ``|Im h| / pi`` of the conjugate pair.

    ``which`` is ``"sigma"`` (on ``[a_sigma, b_sigma_c]``) or ``"mu"``.
    ``dl``, ``dr`` are accurate distances to the cut's left/right ends.
    """
    (ml, mr), (sl, sr) = curve.supports_canon()
    lo, hi = (sl, sr) if which == "sigma" else (ml, mr)
    x = np.asarray(x, dtype=float)
    offsets = []
    if dl is not None:
        offsets.append((lo, np.asarray(dl, dtype=complex)))
    if dr is not None:
        offsets.append((hi, -np.asarray(dr, dtype=complex)))
    roots = curve.roots_canon(x.astype(complex), offsets)
    return np.max(np.abs(roots.imag), axis=-1) / np.pi


def _edge_types(curve: CubicCurve):
    if curve.case == CurveCase.GENERIC:
        return (EDGE_HARD, EDGE_HARD), (EDGE_HARD, EDGE_HARD)
    if curve.case == CurveCase.TOUCHING:
        return (EDGE_HARD, EDGE_HARD), (EDGE_HARD, EDGE_SOFT)
    return (EDGE_HARD, EDGE_TRIPLE), (EDGE_TRIPLE, EDGE_SOFT)


def canonical_densities(curve: CubicCurve, nodes: int = DENSITY_NODES):
    """``(tau_mu, tau_sigma)`` densities in canonical coordinates."""
    (ml, mr), (sl, sr) = curve.supports_canon()
    emu, esg = _edge_types(curve)
    f_mu = lambda x, dl, dr: cut_density_canon(curve, "mu", x, dl, dr)
    f_sg = lambda x, dl, dr: cut_density_canon(curve, "sigma", x, dl, dr)
    if curve.case == CurveCase.DEGENERATE:
        return (MappedDensity(ml, mr, f_mu, *emu), MappedDensity(sl, sr, f_sg, *esg))
    return ChebDensity.from_density(ml, mr, f_mu, nodes), ChebDensity.from_density(sl, sr, f_sg, nodes)


def _densities_admissible(curve: CubicCurve, tol: float = 1e-8):
    try:
        tmu, tsg = canonical_densities(curve)
    except (FloatingPointError, ValueError) as exc:
        return False, f"density extraction failed: {exc}"
    c = float(curve.c)
    if not (abs(tmu.mass - 1) < tol and abs(tsg.mass - c) < tol):
        return False, f"masses ({tmu.mass:.10g}, {tsg.mass:.10g}) differ from (1, {c:.10g})"
    return True, ""


# ---------------------------------------------------------------- branches

@dataclass(frozen=True)
class SheetValues:
    h0: complex
    h1: complex
    h2: complex
    point: complex
    continuation_tag: str

    def as_tuple(self):
        return (self.h0, self.h1, self.h2)


def _scale(curve: CubicCurve):
    (ml, mr), (sl, sr) = curve.supports_canon()
    _, _, _, bsg = curve.config.canonical()
    span = max(abs(ml), abs(float(bsg)), abs(mr), abs(sl), 1.0)
    gap = max(sl - mr, 0.0)
    return span, gap, float(bsg) - ml


def _far_labels(curve: CubicCurve, zc: complex):
    """Sheet-ordered roots at a far point from the residue asymptotics."""
    r = curve.roots_canon(np.array([zc]))[0]
    c = float(curve.c)
    hz = r * zc
    order = np.argsort(hz.real)
    h2 = r[order[0]]
    a, b = r[order[1]], r[order[2]]
    if c < 0.5:
        h0, h1 = (a, b) if (a * zc).real < (b * zc).real else (b, a)
    else:
        # h0 - h1 ~ (mean_sigma - mean_mu)/z^2 with sigma to the right
        h0, h1 = (a, b) if ((a - b) * zc * zc).real > 0 else (b, a)
    return np.array([h0, h1, h2])


def _match(prev, new):
    """Best permutation of ``new`` onto ``prev`` and its ambiguity margin."""
    best, best_cost = None, np.inf
    for perm in itertools.permutations(range(3)):
        cost = max(abs(prev[i] - new[perm[i]]) for i in range(3))
        if cost < best_cost:
            best, best_cost = perm, cost
    gaps = min(abs(new[i] - new[j]) for i, j in itertools.combinations(range(3), 2))
    return np.array([new[best[i]] for i in range(3)]), best_cost, gaps


def _far_height(curve: CubicCurve):
    span, gap, length = _scale(curve)
    c = float(curve.c)
    base = 100.0 * span * max(1.0, span / max(gap, 1e-3 * span))
    if c < 0.5:
        return max(base, min(100.0 * span / (1 - 2 * c), 1e12 * span))
    return base


def label_canon(curve: CubicCurve, zc: complex, max_steps: int = 20000):
    """Continue the sheet labels from far above (or below) down to ``zc``."""
    zc = complex(zc)
    side = 1.0 if zc.imag >= 0 else -1.0
    Y = _far_height(curve) * side
    x = zc.real
    target = zc.imag
    h = _far_labels(curve, complex(x, Y))
    y = Y
    span, _, _ = _scale(curve)
    steps = 0
    dy = (target - y) * 0.25
    while y != target:
        if steps > max_steps:
            raise ConvergenceError("branch continuation exceeded its step budget", payload=zc)
        nxt = y + dy
        if (dy < 0 and nxt < target) or (dy > 0 and nxt > target):
            nxt = target
        new = curve.roots_canon(np.array([complex(x, nxt)]))[0]
        matched, move, gap = _match(h, new)
        if not np.all(np.isfinite(new)):
            raise DomainError(f"branch values blow up at {complex(x, nxt)} (pole or branch point)")
        if move * 2 < gap or abs(dy) < 1e-14 * span:
            if abs(dy) < 1e-14 * span and move * 2 >= gap:
                raise DomainError(f"point {zc} is too close to a branch point; use a local expansion")
            h = matched
            y = nxt
            # grow the step geometrically while tracking is easy
            rem = target - y
            dy = rem * 0.25 if abs(rem) > 1e-3 * span else rem
            if move * 8 > gap:
                dy = dy / 4
        else:
            dy /= 2
        steps += 1
    return h


def branches_at(curve: CubicCurve, point, polish: bool = True) -> SheetValues:
    """Sheet values ``(h0, h1, h2)`` at ``point`` (user coordinates).

    Labels come from continuation along a vertical path from a far point
    where the residues ``c, 1 - c, -1`` (and at ``c = 1/2`` the sign of the
    next Laurent term) fix them; values are never sorted.
    """
    z = complex(point)
    s = curve.orientation
    zc = s * z
    (ml, mr), (sl, sr) = curve.supports_canon()
    if zc.imag == 0 and ((ml < zc.real < mr) or (sl < zc.real < sr)):
        raise DomainError(f"{point} lies on a cut; approach it with a small imaginary offset")
    for e in set(float(mp.re(r)) for r in curve.pi_roots) | {float(curve.b_sigma_c_canon)}:
        if abs(zc - e) < 10 ** (-(curve.prec * math.log10(2)) / 2) * max(1.0, abs(e)):
            raise DomainError(f"{point} is within 10^(-P/2) of the branch point {s * e}")
    h = label_canon(curve, zc)
    if polish:
        h = _polish_mp(curve, zc, h)
    vals = s * np.asarray(h)
    return SheetValues(complex(vals[0]), complex(vals[1]), complex(vals[2]), z,
                       f"vertical:{'+' if zc.imag >= 0 else '-'}")


def _polish_mp(curve: CubicCurve, zc: complex, h):
    """A few Newton steps on the canonical cubic at working precision (float output)."""
    with mp.workprec(max(curve.prec, 64)):
        z = mp.mpc(zc.real, zc.imag)
        k = mpq(curve.kappa)
        pi = mp.fprod(z - r for r in curve.pi_roots)
        pp = mp.fprod(z - r for r in curve.pp_roots) if curve.pp_roots else mp.one
        pq = mp.fprod(z - r for r in curve.pq_roots) if curve.pq_roots else mp.one
        p = -(1 - k) * pp / pi
        q = k * pq / pi
        out = []
        for hv in h:
            w = mp.mpc(hv.real, hv.imag)
            for _ in range(4):
                d = 3 * w * w + p
                if d == 0:
                    break
                w = w - (w ** 3 + p * w + q) / d
            out.append(complex(w))
    return np.array(out)


def branch_points(curve: CubicCurve):
    """Projections of the branch points (user coordinates)."""
    s = curve.orientation
    pts = sorted({float(mp.re(r)) for r in curve.pi_roots} | {float(curve.b_sigma_c_canon)})
    if curve.case == CurveCase.GENERIC:
        pts = sorted({float(mp.re(r)) for r in curve.pi_roots})
    return sorted(s * p for p in pts)


# ---------------------------------------------------------------- trajectory

@dataclass(frozen=True)
class Trajectory:
    """Polyline of one branch of the level line through ``b_sigma_c``."""

    points: np.ndarray
    arclength: np.ndarray
    residual: np.ndarray
    reason: str


@dataclass(frozen=True)
class TrajectoryPair:
    upper: Trajectory
    lower: Trajectory
    step: float

    @property
    def start(self):
        return self.upper.points[0]


def _g_tracked(curve, z, labels):
    """``h0 - h1`` at canonical ``z`` with labels continued from ``labels``."""
    new = curve.roots_canon(np.array([z]))[0]
    matched, move, gap = _match(labels, new)
    return matched, move, gap


def _trace_one(curve: CubicCurve, start: complex, labels0, step: float, max_points: int,
               res0: float):
    (ml, mr), (sl, sr) = curve.supports_canon()
    b = float(curve.b_sigma_c_canon)
    pts = [start]
    arc = [0.0]
    resid = [res0]
    labels = labels0
    z = start
    g0 = labels[0] - labels[1]
    # orientation: move away from the branch point
    d0 = 1j * np.conj(g0) / abs(g0)
    sgn = 1.0 if ((z - b) * np.conj(d0)).real > 0 else -1.0
    prev_dir = sgn * d0
    acc = res0
    reason = "max_points"

    def field(zz, lab):
        lab2, move, gap = _g_tracked(curve, zz, lab)
        g = lab2[0] - lab2[1]
        d = 1j * np.conj(g) / abs(g)
        return d, lab2, g, move, gap

    while len(pts) < max_points:
        hstep = step
        for _ in range(30):
            k1, l1, g_a, _, _ = field(z, labels)
            k1 = k1 if (k1 * np.conj(prev_dir)).real >= 0 else -k1
            k2, l2, _, _, _ = field(z + hstep / 2 * k1, l1)
            k2 = k2 if (k2 * np.conj(k1)).real >= 0 else -k2
            k3, l3, _, _, _ = field(z + hstep / 2 * k2, l2)
            k3 = k3 if (k3 * np.conj(k1)).real >= 0 else -k3
            k4, l4, _, move, gap = field(z + hstep * k3, l3)
            k4 = k4 if (k4 * np.conj(k1)).real >= 0 else -k4
            zn = z + hstep / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            ln, move, gap = _g_tracked(curve, zn, labels)
            # Simpson estimate of Re int g dz over the step
            zm = (z + zn) / 2
            lm, _, _ = _g_tracked(curve, zm, labels)
            gm = lm[0] - lm[1]
            gn = ln[0] - ln[1]
            inc = ((g_a + 4 * gm + gn) / 6 * (zn - z)).real
            if move * 2 < gap and abs(acc + inc) < 10 * step ** 2:
                break
            hstep /= 2
        else:
            raise ConvergenceError("trajectory step rejected down to the floor", payload=z)
        acc += inc
        prev_dir = k1
        # stop when crossing the real axis or entering a cut
        if np.sign(zn.imag) != np.sign(start.imag) and zn.imag != 0:
            t = z.imag / (z.imag - zn.imag)
            zc = z + t * (zn - z)
            pts.append(complex(zc.real, 0.0))
            arc.append(arc[-1] + abs(zc - z))
            resid.append(acc)
            x = zc.real
            if ml <= x <= mr:
                reason = "hit Delta_mu"
            elif sl <= x <= sr:
                reason = "hit Delta_sigma_c"
            else:
                reason = "crossed real axis"
            break
        z = zn
        labels = ln
        pts.append(z)
        arc.append(arc[-1] + hstep)
        resid.append(acc)
    return np.array(pts), np.array(arc), np.array(resid), reason


def trace_divergence_boundary(curve: CubicCurve, step: float = 1e-2, max_points: int = 5000) -> TrajectoryPair:
    """Level line ``Re int (h0 - h1) dz = 0`` through ``b_sigma_c``.

    Integrates the arclength field ``dz/ds = i conj(g)/|g|`` with RK4
    (``g = h0 - h1``), starting ``10 * step`` from the branch point along the
    two non-real rays of the local ``(z - b)^{1/2}`` behaviour.  Steps are
    halved whenever root tracking is ambiguous or the accumulated residual
    ``|Re int g dz|`` exceeds ``10 step^2``.
    """
    if curve.case == CurveCase.GENERIC:
        raise ConfigError("the generic case has no divergence boundary through b_sigma; "
                          "use the classifier level set instead")
    b = float(curve.b_sigma_c_canon)
    out = []
    r0 = 10 * step
    for sign in (1, -1):
        # the cut ray points left; the other two leave at +-pi/3
        z0 = b + r0 * cmath.exp(sign * 1j * math.pi / 3)
        labels = label_canon(curve, z0)
        # residual of the start offset from the local expansion g ~ C (z - b)^{1/2}
        g0 = labels[0] - labels[1]
        res0 = float((2.0 / 3.0 * g0 * (z0 - b)).real)
        pts, arc, res, reason = _trace_one(curve, z0, labels, step, max_points, res0)
        pts = curve.orientation * pts
        out.append(Trajectory(np.concatenate(([curve.orientation * b + 0j], pts)),
                              np.concatenate(([0.0], arc + r0)),
                              np.concatenate(([0.0], res)), reason))
    return TrajectoryPair(out[0], out[1], step)
