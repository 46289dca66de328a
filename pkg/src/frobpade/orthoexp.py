"""Orthonormal polynomials of measures with analytic arcsine-relative weights.

A measure is ``dnu(x) = rho(x) dx / (pi * sqrt((x - a)(b - x)))`` on ``[a, b]``
with ``rho`` positive on the interval.  Everything here works in mpmath at a
configurable binary precision; helper routines that are pure plumbing
(eigenvalue guesses for Gauss nodes) use float64 and are refined afterwards.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np
from mpmath import mp, mpc, mpf
from scipy.linalg import eigh_tridiagonal

from .errors import ConfigError, ConvergenceError, DomainError, NumericalError

DEFAULT_PREC = 256

_MAX_STIELTJES_DOUBLINGS = 9
_MAX_MILLER_START = 40000


def to_fraction(value) -> Fraction:
    """Exact rational from an int, decimal string, Fraction or float.

    Floats go through ``repr`` so that ``0.1`` means one tenth.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ConfigError(f"not a number: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ConfigError(f"non-finite number: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"cannot parse number {value!r}") from exc
    raise ConfigError(f"unsupported number type {type(value).__name__}")


def mpq(value: Fraction):
    return mpf(value.numerator) / value.denominator


def fraction_str(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def digits(prec: int) -> float:
    """Decimal digits carried by ``prec`` bits."""
    return prec * math.log10(2.0)


@dataclass(frozen=True)
class Weight:
    """Analytic weight relative to the arcsine distribution.

    ``kind`` is ``"one"``, ``"poly"`` or ``"rational"``.  Coefficient tuples
    are in ascending powers of ``x``.
    """

    kind: str = "one"
    num: tuple = (Fraction(1),)
    den: tuple = (Fraction(1),)

    def __post_init__(self):
        if self.kind not in ("one", "poly", "rational"):
            raise ConfigError(f"unknown weight kind {self.kind!r}")
        object.__setattr__(self, "num", tuple(to_fraction(c) for c in self.num))
        object.__setattr__(self, "den", tuple(to_fraction(c) for c in self.den))
        if self.kind == "one":
            object.__setattr__(self, "num", (Fraction(1),))
            object.__setattr__(self, "den", (Fraction(1),))
        if not any(self.num) or not any(self.den):
            raise ConfigError("weight polynomial is identically zero")
        if self.kind == "poly":
            object.__setattr__(self, "den", (Fraction(1),))

    @classmethod
    def one(cls) -> "Weight":
        return cls("one")

    @classmethod
    def polynomial(cls, coeffs: Sequence) -> "Weight":
        return cls("poly", tuple(coeffs))

    @classmethod
    def rational(cls, num: Sequence, den: Sequence) -> "Weight":
        return cls("rational", tuple(num), tuple(den))

    @property
    def is_constant_one(self) -> bool:
        return self.kind == "one" or (self.num == (1,) and self.den == (1,))

    @property
    def is_polynomial(self) -> bool:
        return self.kind != "rational" or len(self.den) == 1

    @property
    def degree(self) -> int:
        return len(self.num) - 1

    def __call__(self, x):
        """Evaluate at an mpf/mpc point (Horner, current mp precision)."""
        return _horner(self.num, x) / _horner(self.den, x) if self.kind == "rational" else _horner(self.num, x)

    def as_float(self, x: np.ndarray) -> np.ndarray:
        num = np.polynomial.polynomial.polyval(x, [float(c) for c in self.num])
        den = np.polynomial.polynomial.polyval(x, [float(c) for c in self.den])
        return num / den

    def to_config(self):
        if self.kind == "one":
            return "one"
        if self.kind == "poly":
            return [fraction_str(c) for c in self.num]
        return {"num": [fraction_str(c) for c in self.num],
                "den": [fraction_str(c) for c in self.den]}

    @classmethod
    def from_config(cls, obj) -> "Weight":
        if obj is None or obj == "one":
            return cls.one()
        if isinstance(obj, (list, tuple)):
            return cls.polynomial(obj)
        if isinstance(obj, dict) and set(obj) == {"num", "den"}:
            return cls.rational(obj["num"], obj["den"])
        raise ConfigError(f"weight must be 'one', a coefficient list or {{num, den}}: got {obj!r}")


def _horner(coeffs, x):
    acc = mpf(0)
    for c in reversed(coeffs):
        acc = acc * x + mpq(c)
    return acc


@dataclass(frozen=True)
class MeasureSpec:
    """Interval ``[a, b]`` with weight ``rho`` relative to arcsine.

    ``mass`` is optional; when given it is checked against the weight.
    """

    a: Fraction
    b: Fraction
    weight: Weight = field(default_factory=Weight.one)
    mass: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "a", to_fraction(self.a))
        object.__setattr__(self, "b", to_fraction(self.b))
        if not self.a < self.b:
            raise ConfigError(f"interval must satisfy a < b, got [{self.a}, {self.b}]")
        if self.mass is not None:
            object.__setattr__(self, "mass", to_fraction(self.mass))
        # rho must not vanish on the interval; sample densely including ends
        xs = np.linspace(float(self.a), float(self.b), 513)
        with np.errstate(all="ignore"):
            vals = self.weight.as_float(xs)
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0):
            raise ConfigError("weight must be finite and positive on the interval "
                              f"[{self.a}, {self.b}] (min sample {np.nanmin(vals):.3g})")
        if self.mass is not None:
            computed = self.total_mass(53)
            if abs(computed - float(self.mass)) > 1e-10 * max(1.0, abs(computed)):
                raise ConfigError(f"declared mass {self.mass} does not match weight "
                                  f"(integrates to {computed:.15g})")

    @classmethod
    def arcsine(cls, a, b) -> "MeasureSpec":
        return cls(a, b, Weight.one())

    def interval(self):
        """Endpoints as mpf at the current precision."""
        return mpq(self.a), mpq(self.b)

    def center_radius(self):
        a, b = self.interval()
        return (a + b) / 2, (b - a) / 2

    def contains(self, z, closed=True) -> bool:
        """Whether ``z`` lies on the (closed or open) real interval."""
        z = mp.mpmathify(z)
        if mp.im(z) != 0:
            return False
        x = mp.re(z)
        a, b = self.interval()
        return a <= x <= b if closed else a < x < b

    def total_mass(self, prec: int | None = None) -> float:
        with mp.workprec(prec or DEFAULT_PREC):
            return float(_weight_mean(self, prec or DEFAULT_PREC))

    def to_config(self):
        return {"interval": [fraction_str(self.a), fraction_str(self.b)],
                "weight": self.weight.to_config()}

    @classmethod
    def from_config(cls, obj) -> "MeasureSpec":
        if not isinstance(obj, dict) or "interval" not in obj:
            raise ConfigError(f"measure needs an 'interval' entry: {obj!r}")
        iv = obj["interval"]
        if not isinstance(iv, (list, tuple)) or len(iv) != 2:
            raise ConfigError(f"interval must be a pair [a, b]: {iv!r}")
        return cls(iv[0], iv[1], Weight.from_config(obj.get("weight", "one")), obj.get("mass"))


def _weight_mean(spec: MeasureSpec, prec: int):
    """Integral of rho against the arcsine probability measure."""
    with mp.workprec(prec + 20):
        c, r = spec.center_radius()
        prev = None
        m = max(8, spec.weight.degree + 2)
        for _ in range(_MAX_STIELTJES_DOUBLINGS + 4):
            val = mp.fsum(spec.weight(c + r * mp.cos((2 * k - 1) * mp.pi / (2 * m)))
                          for k in range(1, m + 1)) / m
            if spec.weight.is_polynomial or (prev is not None and abs(val - prev) <= abs(val) * mp.mpf(2) ** (-prec)):
                return val
            prev = val
            m *= 2
        raise ConvergenceError("mass quadrature did not converge", residual=abs(val - prev))


def w_branch(spec: MeasureSpec, z):
    """``sqrt((z-a)(z-b))`` holomorphic off ``[a, b]`` with ``w(z)/z -> 1``.

    Real points outside the interval return an mpf.
    """
    a, b = spec.interval()
    z = mp.mpmathify(z)
    if mp.im(z) == 0:
        x = mp.re(z)
        if a <= x <= b:
            raise DomainError(f"w is discontinuous on [{spec.a}, {spec.b}]; got {x}")
        root = mp.sqrt((x - a) * (x - b))
        return root if x > b else -root
    return mp.sqrt(z - a) * mp.sqrt(z - b)


def w_boundary(spec: MeasureSpec, x, side: int):
    """Boundary value ``w^{+}`` (side=+1, from above) or ``w^{-}`` on the open interval."""
    a, b = spec.interval()
    x = mp.mpf(x)
    return mpc(0, side) * mp.sqrt((x - a) * (b - x))


def density(spec: MeasureSpec, x):
    """Lebesgue density ``rho(x) / (pi sqrt((x-a)(b-x)))`` at interior ``x``."""
    a, b = spec.interval()
    return spec.weight(x) / (mp.pi * mp.sqrt((x - a) * (b - x)))


@dataclass(frozen=True)
class Recurrence:
    """Three-term recurrence of the orthonormal polynomials.

    ``sqrt(beta[k+1]) p_{k+1} = (x - alpha[k]) p_k - sqrt(beta[k]) p_{k-1}``
    with ``p_0 = 1/sqrt(beta[0])``; ``beta[0]`` is the total mass.
    """

    alpha: tuple
    beta: tuple
    prec: int
    spec: MeasureSpec | None = None

    def __post_init__(self):
        if len(self.alpha) != len(self.beta):
            raise ConfigError("alpha and beta must have equal length")
        if any(b <= 0 for b in self.beta):
            raise NumericalError("recurrence has non-positive beta", payload=self.beta)

    @property
    def length(self) -> int:
        return len(self.alpha)

    def sqrt_beta(self):
        # cached on the instance: hashing the mpf tuples costs more than the roots
        cached = self.__dict__.get("_sqrt_beta")
        if cached is None:
            with mp.workprec(self.prec):
                cached = tuple(mp.sqrt(b) for b in self.beta)
            object.__setattr__(self, "_sqrt_beta", cached)
        return cached

    def affine(self, scale, shift) -> "Recurrence":
        """Recurrence of the push-forward under ``x -> scale*x + shift``."""
        with mp.workprec(self.prec):
            s, t = (v if isinstance(v, mp.mpf) else mpq(to_fraction(v)) for v in (scale, shift))
            alpha = tuple(s * a + t for a in self.alpha)
            beta = (self.beta[0],) + tuple(s * s * b for b in self.beta[1:])
        return Recurrence(alpha, beta, self.prec, None)


_REC_CACHE: dict = {}


def recurrence_coeffs(spec: MeasureSpec, count: int, prec: int | None = None) -> Recurrence:
    """Recurrence coefficients ``alpha_0..alpha_{count-1}``, ``beta_0..beta_{count-1}``.

    The arcsine weight uses the closed form; other weights run the
    discretized Stieltjes procedure on Gauss-Chebyshev grids, doubling the
    grid until consecutive coefficient sets agree to ``P - 8`` digits.
    """
    if count < 1:
        raise ConfigError("count must be >= 1")
    prec = prec or DEFAULT_PREC
    key = (spec, prec)
    cached = _REC_CACHE.get(key)
    if cached is not None and cached.length >= count:
        if cached.length == count:
            return cached
        return Recurrence(cached.alpha[:count], cached.beta[:count], prec, spec)
    if spec.weight.is_constant_one:
        rec = _arcsine_recurrence(spec, count, prec)
    else:
        # extra coefficients are cheap compared to restarting later
        rec = _stieltjes_recurrence(spec, max(count, 2 * (cached.length if cached else 0)), prec)
    _REC_CACHE[key] = rec
    if rec.length == count:
        return rec
    return Recurrence(rec.alpha[:count], rec.beta[:count], prec, spec)


def _arcsine_recurrence(spec: MeasureSpec, count: int, prec: int) -> Recurrence:
    with mp.workprec(prec):
        c, r = spec.center_radius()
        alpha = (c,) * count
        beta = [mp.mpf(1)]
        if count > 1:
            beta.append(r * r / 2)
        beta.extend([r * r / 4] * (count - 2))
    return Recurrence(alpha, tuple(beta[:count]), prec, spec)


def _stieltjes_discrete(xs, ws, count):
    """Orthonormal Stieltjes procedure on a discrete positive measure."""
    alpha, beta = [], []
    b0 = mp.fsum(ws)
    beta.append(b0)
    q_prev = [mp.zero] * len(xs)
    inv = 1 / mp.sqrt(b0)
    q = [inv] * len(xs)
    sb = mp.zero
    for k in range(count):
        wq = [w * v for w, v in zip(ws, q)]
        a_k = mp.fsum(x * t * v for x, t, v in zip(xs, wq, q))
        alpha.append(a_k)
        if k == count - 1:
            break
        v = [(x - a_k) * qq - sb * qp for x, qq, qp in zip(xs, q, q_prev)]
        b_next = mp.fsum(w * t * t for w, t in zip(ws, v))
        if b_next <= 0:
            raise NumericalError("Stieltjes produced a non-positive beta", residual=b_next)
        beta.append(b_next)
        sb = mp.sqrt(b_next)
        q_prev, q = q, [t / sb for t in v]
    return alpha, beta


def _stieltjes_recurrence(spec: MeasureSpec, count: int, prec: int) -> Recurrence:
    work = prec + 32
    tol_digits = digits(prec) - 8
    with mp.workprec(work):
        c, r = spec.center_radius()
        m = count + spec.weight.degree + 32
        prev = None
        change = None
        for _ in range(_MAX_STIELTJES_DOUBLINGS):
            xs = [c + r * mp.cos((2 * k - 1) * mp.pi / (2 * m)) for k in range(1, m + 1)]
            ws = [spec.weight(x) / m for x in xs]
            if any(w <= 0 for w in ws):
                raise ConfigError("weight is not positive on the interval")
            alpha, beta = _stieltjes_discrete(xs, ws, count)
            if prev is not None:
                scale = max(abs(r), abs(c), mp.one)
                change = max(max(abs(x - y) for x, y in zip(alpha, prev[0])),
                             max(abs(x - y) for x, y in zip(beta, prev[1]))) / scale
                if change == 0 or -mp.log10(change) >= tol_digits:
                    break
            prev = (alpha, beta)
            m *= 2
        else:
            raise ConvergenceError(
                f"discretized Stieltjes did not converge for {count} coefficients",
                residual=change)
    with mp.workprec(prec):
        alpha = tuple(+a for a in alpha)
        beta = tuple(+b for b in beta)
    return Recurrence(alpha, beta, prec, spec)


@dataclass(frozen=True)
class GaussRule:
    nodes: tuple
    weights: tuple
    prec: int

    def integrate(self, values: Sequence):
        with mp.workprec(self.prec):
            return mp.fsum(w * v for w, v in zip(self.weights, values))


_GAUSS_CACHE: dict = {}


def gauss_rule(rec: Recurrence, nodes: int) -> GaussRule:
    """Gauss rule with ``nodes`` points for the measure of ``rec``.

    Exact for polynomials of degree ``<= 2*nodes - 1``; weights are positive
    and sum to ``beta[0]``.  Nodes come from the float64 Jacobi eigenvalues,
    polished by Newton iterations on ``p_nodes`` at full precision.
    """
    if nodes < 1 or nodes > rec.length:
        raise ConfigError(f"need 1 <= nodes <= {rec.length}, got {nodes}")
    key = (rec.spec, rec.prec, nodes) if rec.spec is not None else None
    if key is not None and key in _GAUSS_CACHE:
        return _GAUSS_CACHE[key]
    if rec.spec is not None and rec.spec.weight.is_constant_one:
        rule = _arcsine_gauss(rec, nodes)
    else:
        rule = _newton_gauss(rec, nodes)
    if key is not None:
        _GAUSS_CACHE[key] = rule
    return rule


def _arcsine_gauss(rec: Recurrence, n: int) -> GaussRule:
    with mp.workprec(rec.prec):
        c, r = rec.spec.center_radius()
        xs = tuple(c + r * mp.cos((2 * k - 1) * mp.pi / (2 * n)) for k in range(n, 0, -1))
        w = rec.beta[0] / n
        return GaussRule(xs, (w,) * n, rec.prec)


def _newton_gauss(rec: Recurrence, n: int) -> GaussRule:
    diag = np.array([float(a) for a in rec.alpha[:n]])
    off = np.array([float(mp.sqrt(b)) for b in rec.beta[1:n]])
    try:
        guess = eigh_tridiagonal(diag, off, eigvals_only=True)
    except Exception as exc:  # LinAlgError and friends
        raise NumericalError("tridiagonal eigen-solve failed",
                             payload={"diag": diag, "offdiag": off}) from exc
    work = rec.prec + 16
    full = Recurrence(rec.alpha[:n + 1], rec.beta[:n + 1], rec.prec, rec.spec) if rec.length > n else None
    with mp.workprec(work):
        sb = [mp.sqrt(b) for b in rec.beta[:n]]
        # p_n needs sqrt(beta_n); its value only rescales p_n, so use 1 if absent
        sbn = mp.sqrt(full.beta[n]) if full is not None else mp.one
        xs, ws = [], []
        tol = mp.mpf(2) ** (-rec.prec - 4)
        for g in guess:
            x = mp.mpf(g)
            for _ in range(60):
                p, dp, ssum = _pn_and_derivative(rec.alpha, sb, sbn, n, x)
                step = p / dp
                x -= step
                if abs(step) <= tol * max(1, abs(x)):
                    break
            else:
                raise ConvergenceError("Gauss node Newton iteration stalled", residual=abs(step))
            _, _, ssum = _pn_and_derivative(rec.alpha, sb, sbn, n, x)
            xs.append(x)
            ws.append(1 / ssum)
    with mp.workprec(rec.prec):
        return GaussRule(tuple(+x for x in xs), tuple(+w for w in ws), rec.prec)


def _pn_and_derivative(alpha, sb, sbn, n, x):
    """``p_n(x)``, ``p_n'(x)`` and ``sum_{k<n} p_k(x)^2``."""
    p_prev, p = mp.zero, 1 / sb[0]
    d_prev, d = mp.zero, mp.zero
    ssum = p * p
    for k in range(n):
        s_next = sb[k + 1] if k + 1 < n else sbn
        s_k = sb[k] if k > 0 else mp.zero
        p_next = ((x - alpha[k]) * p - s_k * p_prev) / s_next
        d_next = (p + (x - alpha[k]) * d - s_k * d_prev) / s_next
        p_prev, p = p, p_next
        d_prev, d = d, d_next
        if k + 1 < n:
            ssum += p * p
    return p, d, ssum


def eval_poly(rec: Recurrence, degree: int, z) -> list:
    """``[p_0(z), ..., p_degree(z)]`` by forward recurrence (any complex z)."""
    if degree >= rec.length:
        raise ConfigError(f"degree {degree} needs {degree + 1} recurrence coefficients, have {rec.length}")
    sb = rec.sqrt_beta()
    with mp.workprec(rec.prec):
        z = mp.mpmathify(z)
        out = [1 / sb[0]]
        p_prev = mp.zero
        for k in range(degree):
            s_k = sb[k] if k > 0 else mp.zero
            nxt = ((z - rec.alpha[k]) * out[-1] - s_k * p_prev) / sb[k + 1]
            p_prev = out[-1]
            out.append(nxt)
        return out


def eval_poly_matrix(rec: Recurrence, degree: int, points: Sequence) -> list:
    """Rows ``p_0..p_degree`` evaluated at each point (list of lists)."""
    return [eval_poly(rec, degree, z) for z in points]


def clenshaw(rec: Recurrence, coeffs: Sequence, z):
    """``sum_j coeffs[j] p_j(z)`` via the Clenshaw recurrence."""
    n = len(coeffs) - 1
    if n >= rec.length:
        raise ConfigError("not enough recurrence coefficients for this expansion")
    sb = rec.sqrt_beta()
    with mp.workprec(rec.prec):
        z = mp.mpmathify(z)
        b1 = b2 = mp.zero
        for k in range(n, -1, -1):
            b0 = coeffs[k] + mp.zero
            if k < n:
                b0 += (z - rec.alpha[k]) / sb[k + 1] * b1
            if k + 1 < n:
                b0 -= sb[k + 1] / sb[k + 2] * b2
            b2, b1 = b1, b0
        return b1 / sb[0]


def phi_modulus(spec: MeasureSpec, z):
    """``|phi(z)|`` of the exterior conformal map of the interval (``> 1`` off it)."""
    c, r = spec.center_radius()
    zeta = (mp.mpmathify(z) - c) / r
    root = mp.sqrt(zeta - 1) * mp.sqrt(zeta + 1)
    return max(abs(zeta + root), abs(zeta - root))


def miller_start(rec_spec: MeasureSpec, degree: int, z, prec: int) -> int:
    """Backward-recurrence starting index reaching ``prec`` bits at ``degree``."""
    with mp.workprec(53):
        ph = phi_modulus(rec_spec, z)
        lg = float(mp.log(ph))
    if lg <= 0:
        return _MAX_MILLER_START
    extra = int(math.ceil((prec + 10) * math.log(2) / (2 * lg)))
    return min(degree + extra + 20, _MAX_MILLER_START)


def eval_poly_and_second_kind(rec: Recurrence, degree: int, point):
    """Values ``p_0..p_degree`` and second-kind functions ``q_0..q_degree``.

    ``q_k(t) = int p_k(x) dmu(x) / (t - x)`` is the minimal solution of the
    recurrence; it is generated backwards (Miller) from a starting index far
    enough out for the requested precision and anchored by the directly
    computed ``q_0``.  Raises ``DomainError`` on the open support.
    """
    spec = rec.spec
    if spec is None:
        raise ConfigError("second-kind functions need the recurrence's MeasureSpec")
    with mp.workprec(rec.prec):
        point = mp.mpmathify(point)
        if spec.contains(point, closed=False):
            raise DomainError(f"second-kind functions jump on the support; got t={point}")
        p = eval_poly(rec, degree, point)
        start = miller_start(spec, degree, point, rec.prec)
        long_rec = recurrence_coeffs(spec, start + 2, rec.prec)
        sb = long_rec.sqrt_beta()
        with mp.workprec(rec.prec + 20):
            y_next, y = mp.zero, mp.mpf(2) ** (-rec.prec)
            ys = [None] * (start + 1)
            ys[start] = y
            for k in range(start, 0, -1):
                y_prev = ((point - long_rec.alpha[k]) * y - sb[k + 1] * y_next) / sb[k]
                y_next, y = y, y_prev
                ys[k - 1] = y
            q0 = -p[0] * cauchy_transform(spec, point, rec.prec + 20)
            scale = q0 / ys[0]
            q = [ys[k] * scale for k in range(degree + 1)]
        return p, [+v for v in q]


_CAUCHY_NODES: dict = {}


def _cheb_nodes(spec: MeasureSpec, m: int, prec: int):
    key = (spec.a, spec.b, m, prec)
    if key not in _CAUCHY_NODES:
        with mp.workprec(prec):
            c, r = spec.center_radius()
            _CAUCHY_NODES[key] = tuple(c + r * mp.cos((2 * k - 1) * mp.pi / (2 * m)) for k in range(1, m + 1))
    return _CAUCHY_NODES[key]


def _divided_difference_mean(spec: MeasureSpec, z, rho_z, prec: int):
    """Arcsine mean of ``(rho(t) - rho(z)) / (t - z)``; exact for polynomial rho."""
    weight = spec.weight
    if weight.is_constant_one:
        return mp.zero
    m = max(4, weight.degree + 2)
    prev = None
    for _ in range(_MAX_STIELTJES_DOUBLINGS + 4):
        ts = _cheb_nodes(spec, m, prec)
        val = mp.fsum((weight(t) - rho_z) / (t - z) for t in ts) / m
        if weight.is_polynomial:
            return val
        if prev is not None and abs(val - prev) <= mp.mpf(2) ** (-prec + 4) * max(abs(val), abs(rho_z), 1):
            return val
        prev = val
        m *= 2
    raise ConvergenceError("Cauchy transform quadrature did not converge", residual=abs(val - prev))


def cauchy_transform(spec: MeasureSpec, point, prec: int | None = None):
    """``int dsigma(t) / (t - z)`` for ``z`` off the closed support.

    Uses ``-rho(z)/w(z)`` plus the arcsine mean of the divided difference of
    ``rho``, which removes the endpoint singularity analytically.
    """
    prec = prec or DEFAULT_PREC
    with mp.workprec(prec + 10):
        z = mp.mpmathify(point)
        if spec.contains(z, closed=True):
            raise DomainError(f"point {z} lies on the support [{spec.a}, {spec.b}]")
        rho_z = spec.weight(z)
        val = -rho_z / w_branch(spec, z) + _divided_difference_mean(spec, z, rho_z, prec + 10)
    with mp.workprec(prec):
        return +val


def cauchy_transform_boundary(spec: MeasureSpec, x, side: int, prec: int | None = None):
    """Boundary value from above (side=+1) or below (side=-1) on the open support."""
    prec = prec or DEFAULT_PREC
    with mp.workprec(prec + 10):
        x = mp.mpf(x)
        if not spec.contains(x, closed=False):
            raise DomainError("boundary values exist only on the open support")
        rho_x = spec.weight(x)
        val = -rho_x / w_boundary(spec, x, side) + _divided_difference_mean(spec, x, rho_x, prec + 10)
    with mp.workprec(prec):
        return +val


def make_cauchy(spec: MeasureSpec, prec: int | None = None) -> Callable:
    """Callable ``z -> sigma_hat(z)`` at fixed precision."""
    return lambda z: cauchy_transform(spec, z, prec)
