"""Frobenius-Pade approximants of Markov functions.

For a target ``f`` (usually ``sigma_hat``) and an orthonormal system
``p_j`` of ``mu``, the approximant of type ``(m, n)`` is the pair ``(Q, P)``
with ``deg Q <= n``, ``deg P <= m`` and

    c_i(Q f - P; mu) = 0,   i = 0, ..., m + n.

Both polynomials are stored by their coefficients in the ``p_j`` basis.
"""
from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpz
from mpmath import mp

from .errors import ConfigError, DomainError, NumericalError
from .orthoexp import (DEFAULT_PREC, MeasureSpec, cauchy_transform, clenshaw,
                       eval_poly, eval_poly_and_second_kind, gauss_rule,
                       phi_modulus, recurrence_coeffs, to_fraction)

QUAD_MARGIN = 32
MAX_MARGIN = 4000


class NonUniqueDenominatorWarning(UserWarning):
    """The denominator block has a null space of dimension > 1 (numerically)."""


@dataclass(frozen=True)
class FrobeniusIndex:
    m: int
    n: int

    def __post_init__(self):
        if not isinstance(self.m, int) or not isinstance(self.n, int):
            raise ConfigError("m and n must be integers")
        if self.m < 0 or self.n < 1:
            raise ConfigError(f"need m >= 0 and n >= 1, got ({self.m}, {self.n})")
        if self.n - 1 > self.m:
            raise ConfigError(f"index must satisfy n - 1 <= m, got ({self.m}, {self.n})")

    @property
    def total(self) -> int:
        return self.m + self.n


# ---------------------------------------------------------------- targets

@dataclass(frozen=True)
class MarkovTarget:
    """``f = sigma_hat``, the Cauchy transform of ``sigma``."""

    sigma: MeasureSpec

    def __call__(self, x, prec):
        return cauchy_transform(self.sigma, x, prec)

    def check_disjoint(self, mu: MeasureSpec):
        if not (self.sigma.b < mu.a or mu.b < self.sigma.a):
            raise DomainError(
                f"supports must be disjoint: mu on [{mu.a}, {mu.b}], sigma on [{self.sigma.a}, {self.sigma.b}]")


@dataclass(frozen=True)
class PoleTarget:
    """``f(x) = 1 / (x - t0)``; the approximant recovers it exactly."""

    t0: object

    def __post_init__(self):
        object.__setattr__(self, "t0", to_fraction(self.t0))

    def __call__(self, x, prec):
        with mp.workprec(prec):
            return 1 / (x - mp.mpf(self.t0.numerator) / self.t0.denominator)

    def check_disjoint(self, mu: MeasureSpec):
        if mu.a <= self.t0 <= mu.b:
            raise DomainError(f"pole {self.t0} lies on the support of mu")


@dataclass(frozen=True)
class PolyTarget:
    """Polynomial target, coefficients ascending in ``x``."""

    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(to_fraction(c) for c in self.coeffs))

    def __call__(self, x, prec):
        with mp.workprec(prec):
            acc = mp.zero
            for c in reversed(self.coeffs):
                acc = acc * x + mp.mpf(c.numerator) / c.denominator
            return acc

    def check_disjoint(self, mu):
        return None


def as_target(f):
    if isinstance(f, MeasureSpec):
        return MarkovTarget(f)
    if isinstance(f, (MarkovTarget, PoleTarget, PolyTarget)):
        return f
    if callable(f):
        return _CallableTarget(f)
    raise ConfigError(f"cannot interpret {f!r} as a target function")


@dataclass(frozen=True)
class _CallableTarget:
    func: Callable

    def __call__(self, x, prec):
        with mp.workprec(prec):
            return self.func(x)

    def check_disjoint(self, mu):
        return None


# ---------------------------------------------------------------- data

@dataclass(frozen=True)
class Approximant:
    """Coefficients of ``Q`` (length n+1) and ``P`` (length m+1) in the ``p_j`` basis.

    ``smallest_singular_value`` is the smallest nonzero singular value of the
    row-equilibrated denominator block, the conditioning witness.
    """

    index: FrobeniusIndex
    q_coeffs: tuple
    p_coeffs: tuple
    smallest_singular_value: object
    precision_bits: int
    non_unique: bool = False
    degree: int = -1
    null_residual: object = None

    def __post_init__(self):
        if len(self.q_coeffs) != self.index.n + 1 or len(self.p_coeffs) != self.index.m + 1:
            raise ConfigError("coefficient vector lengths do not match the index")
        if self.degree < 0:
            object.__setattr__(self, "degree", self.index.n)

    @property
    def degree_exact(self) -> bool:
        return self.degree == self.index.n

    def to_json(self) -> dict:
        dps = int(self.precision_bits * math.log10(2)) + 2
        fmt = lambda v: mp.nstr(v, dps, strip_zeros=False, min_fixed=1, max_fixed=0)
        return {
            "m": self.index.m,
            "n": self.index.n,
            "precision_bits": self.precision_bits,
            "q_coeffs": [fmt(v) for v in self.q_coeffs],
            "p_coeffs": [fmt(v) for v in self.p_coeffs],
            "smallest_singular_value": fmt(self.smallest_singular_value),
            "non_unique": self.non_unique,
            "degree": self.degree,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Approximant":
        prec = int(obj["precision_bits"])
        with mp.workprec(prec):
            return cls(FrobeniusIndex(int(obj["m"]), int(obj["n"])),
                       tuple(mp.mpf(v) for v in obj["q_coeffs"]),
                       tuple(mp.mpf(v) for v in obj["p_coeffs"]),
                       mp.mpf(obj["smallest_singular_value"]), prec,
                       bool(obj.get("non_unique", False)), int(obj.get("degree", obj["n"])))

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class FrobeniusMatrix:
    """Entries ``c_i(p_j f; mu)`` for ``i < rows``, ``j < cols``, plus the rule used."""

    entries: object  # mp.matrix
    nodes: int
    prec: int


def build_frobenius_matrix(mu: MeasureSpec, f, index: FrobeniusIndex,
                           prec: int | None = None, margin: int = QUAD_MARGIN) -> FrobeniusMatrix:
    """Stacked Frobenius system: entry ``(i, j) = int f p_i p_j dmu``, ``i <= m+n``, ``j <= n``.

    Gauss-``mu`` quadrature with ``m + n + 1 + margin`` nodes, the margin
    enlarged when a singularity of ``f`` lies close to the support.
    """
    prec = prec or DEFAULT_PREC
    return frobenius_gram(mu, f, index.total + 1, index.n + 1, prec,
                          index.total + 1 + max(margin, _exact_margin(mu, as_target(f), prec)))


def _exact_margin(mu: MeasureSpec, target, prec: int) -> int:
    """Extra nodes resolving the target's nearest singularity to ``prec`` bits.

    Gauss rules converge like ``rho^{-2N}`` where ``rho`` is the Bernstein
    ellipse parameter of the singularity closest to ``Delta_mu`` (the pole
    or the near endpoint of ``Delta_sigma``).  A fixed margin is only
    adequate when that singularity is far away.
    """
    if isinstance(target, PoleTarget):
        near = target.t0
    elif isinstance(target, MarkovTarget):
        s = target.sigma
        near = s.a if s.a > mu.b else s.b
    else:
        return 0
    with mp.workprec(53):
        t0 = mp.mpf(near.numerator) / near.denominator
        lr = float(mp.log(phi_modulus(mu, t0)))
    return min(int(math.ceil(prec * math.log(2) / (2 * lr))) + 8, MAX_MARGIN)


def frobenius_gram(mu: MeasureSpec, f, rows: int, cols: int, prec: int | None = None,
                   nodes: int | None = None) -> FrobeniusMatrix:
    prec = prec or DEFAULT_PREC
    target = as_target(f)
    target.check_disjoint(mu)
    nodes = nodes or rows + QUAD_MARGIN
    deg = max(rows, cols) - 1
    rec = recurrence_coeffs(mu, max(nodes + 1, deg + 2), prec)
    rule = gauss_rule(rec, nodes)
    with mp.workprec(prec):
        ptab = [eval_poly(rec, deg, x) for x in rule.nodes]
        wf = [w * target(x, prec) for w, x in zip(rule.weights, rule.nodes)]
        if all(isinstance(v, mp.mpf) for v in wf):
            G = _gram_fixed_point(ptab, wf, rows, cols, prec)
        else:
            G = mp.matrix(rows, cols)
            for j in range(cols):
                col = [wf[l] * ptab[l][j] for l in range(nodes)]
                for i in range(rows):
                    if i < cols and i < j:
                        G[i, j] = G[j, i]
                        continue
                    G[i, j] = mp.fsum(col[l] * ptab[l][i] for l in range(nodes))
    return FrobeniusMatrix(G, nodes, prec)


def _gram_fixed_point(ptab, wf, rows, cols, prec):
    """Real Gram sums in scaled integer arithmetic (exact accumulation, one rounding per value)."""
    shift = prec + 64
    scale = mp.mpf(2) ** shift
    P = np.array([[mpz(mp.nint(v * scale)) for v in row[:rows]] for row in ptab], dtype=object)
    W = np.array([mpz(mp.nint(v * scale)) for v in wf], dtype=object)
    S = P.T.dot(W[:, None] * P[:, :cols])
    den = mp.mpf(2) ** (3 * shift)
    G = mp.matrix(rows, cols)
    for i in range(rows):
        for j in range(cols):
            G[i, j] = mp.mpf(int(S[i, j])) / den
    return G


# ---------------------------------------------------------------- solve

def _leading_sign_normalize(vec, tol):
    """Unit norm with the highest significant coefficient positive."""
    norm = mp.norm(vec)
    vec = [v / norm for v in vec]
    deg = max((k for k, v in enumerate(vec) if abs(v) > tol), default=len(vec) - 1)
    if vec[deg] < 0:
        vec = [-v for v in vec]
    return vec, deg


def _null_vector(A, prec, scale=None):
    """Right null vector of an ``n x (n+1)`` block.

    Returns ``(vector, smallest_sv, residual, non_unique)``.  Rows below
    ``2^(-3 prec / 4) * scale`` carry only rounding error and impose no
    condition; they are dropped (which makes the solution non-unique).  The
    remaining rows are equilibrated; the singular values certify the gap and
    the vector itself comes from a full QR of ``A^T``.
    """
    cols = A.cols
    norms = [max(abs(A[i, j]) for j in range(cols)) for i in range(A.rows)]
    scale = scale if scale is not None else max(norms, default=mp.zero)
    cut = mp.mpf(2) ** (-(3 * prec) // 4) * scale
    keep = [i for i in range(A.rows) if norms[i] > cut]
    if not keep:
        v = [mp.one] + [mp.zero] * (cols - 1)
        return v, mp.zero, mp.zero, True
    n = len(keep)
    scaled = mp.matrix(n, cols)
    for r, i in enumerate(keep):
        for j in range(cols):
            scaled[r, j] = A[i, j] / norms[i]
    svals = mp.svd_r(scaled, compute_uv=False)
    smin = min(svals[k] for k in range(n))
    smax = max(svals[k] for k in range(n))
    Q, _ = mp.qr(scaled.T, mode="full")
    v = [Q[k, cols - 1] for k in range(cols)]
    res = mp.norm(scaled * mp.matrix(v))
    # singular values this far below the largest are treated as zero
    floor = max(res, mp.mpf(2) ** (-(3 * prec) // 4) * smax)
    non_unique = smin < 10 * floor or n < A.rows
    if non_unique:
        _, S, V = mp.svd_r(scaled, full_matrices=True)
        tol = 10 * floor
        k_null = cols - sum(1 for k in range(n) if S[k] >= tol)
        # V rows are right singular vectors; the last k_null span the null space
        basis = [[V[cols - 1 - r, j] for j in range(cols)] for r in range(k_null)]
        v = _minimal_degree(basis)
        res = mp.norm(scaled * mp.matrix(v))
    return v, smin, res, non_unique


def _minimal_degree(basis):
    """Vector of lowest degree in the span of ``basis`` (Gaussian elimination from the top)."""
    rows = [list(b) for b in basis]
    cols = len(rows[0])
    k = len(rows)
    # eliminate the highest coefficients using k-1 pivots
    used = []
    for col in range(cols - 1, -1, -1):
        if len(used) == k - 1:
            break
        cand = [r for r in range(k) if r not in used]
        piv = max(cand, key=lambda r: abs(rows[r][col]))
        if abs(rows[piv][col]) == 0:
            continue
        for r in cand:
            if r != piv:
                f = rows[r][col] / rows[piv][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[piv])]
        used.append(piv)
    rest = [r for r in range(k) if r not in used]
    return rows[rest[0]]


def solve_frobenius(mu: MeasureSpec, sigma, index: FrobeniusIndex, prec: int | None = None,
                    gram: FrobeniusMatrix | None = None) -> Approximant:
    """Frobenius-Pade approximant of type ``index`` for ``f = sigma_hat``.

    Parameters
    ----------
    mu : MeasureSpec
        Expansion measure.
    sigma : MeasureSpec or target
        Measure whose Cauchy transform is approximated, or any target
        accepted by :func:`as_target`.
    index : FrobeniusIndex
    prec : int, optional
        Working precision in bits.
    gram : FrobeniusMatrix, optional
        Precomputed (possibly larger) system; it is sliced to the index.

    Returns
    -------
    Approximant
        ``Q`` normalized to unit coefficient norm with positive leading
        monomial coefficient.  A numerically non-unique denominator is
        flagged (and warned about); the minimal-degree solution is returned.
    """
    prec = prec or (gram.prec if gram is not None else DEFAULT_PREC)
    m, n = index.m, index.n
    if gram is None:
        gram = build_frobenius_matrix(mu, sigma, index, prec)
    G = gram.entries
    if G.rows < m + n + 1 or G.cols < n + 1:
        raise ConfigError("precomputed Frobenius matrix is too small for this index")
    with mp.workprec(prec):
        A = mp.matrix(n, n + 1)
        for i in range(n):
            for j in range(n + 1):
                A[i, j] = G[m + 1 + i, j]
        scale = max(abs(G[i, j]) for i in range(m + n + 1) for j in range(n + 1))
        vec, smin, res, non_unique = _null_vector(A, prec, scale)
        tol = mp.mpf(2) ** (-prec // 2)
        a, deg = _leading_sign_normalize(vec, tol)
        b = [mp.fsum(G[i, j] * a[j] for j in range(n + 1)) for i in range(m + 1)]
    if non_unique:
        warnings.warn(f"non-unique denominator for index ({m}, {n}); minimal-degree solution returned",
                      NonUniqueDenominatorWarning, stacklevel=2)
    return Approximant(index, tuple(a), tuple(b), smin, prec, non_unique, deg, res)


# ---------------------------------------------------------------- evaluation

def _rec_for(mu: MeasureSpec, degree: int, prec: int):
    return recurrence_coeffs(mu, degree + 2, prec)


def eval_Q(appr: Approximant, mu: MeasureSpec, point, prec: int | None = None):
    prec = prec or appr.precision_bits
    return clenshaw(_rec_for(mu, appr.index.n, prec), appr.q_coeffs, point)


def eval_P(appr: Approximant, mu: MeasureSpec, point, prec: int | None = None):
    prec = prec or appr.precision_bits
    return clenshaw(_rec_for(mu, appr.index.m, prec), appr.p_coeffs, point)


def _on_support(spec: MeasureSpec, z) -> bool:
    return spec.contains(z, closed=True)


@dataclass(frozen=True)
class LinearFormValue:
    value: object
    precision_used: int
    cancellation_digits: float


def eval_linear_form_detail(appr: Approximant, mu: MeasureSpec, sigma, point) -> LinearFormValue:
    """``R = Q sigma_hat - P`` with precision escalation against cancellation.

    The coefficients are exact data; if ``|Q sigma_hat|`` and ``|P|`` agree
    to more than half the working digits the evaluation is repeated at
    doubled precision (up to eight times the base).
    """
    target = as_target(sigma)
    if isinstance(target, MarkovTarget) and _on_support(target.sigma, point):
        raise DomainError(f"R jumps across the support of sigma; got {point}")
    base = appr.precision_bits
    prec = base
    while True:
        with mp.workprec(prec):
            z = mp.mpmathify(point)
            qv = eval_Q(appr, mu, z, prec)
            fv = target(z, prec + 10)
            pv = eval_P(appr, mu, z, prec)
            qf = qv * fv
            r = qf - pv
            scale = max(abs(qf), abs(pv))
            lost = float(mp.log10(scale / abs(r))) if r != 0 and scale != 0 else (0.0 if scale == 0 else math.inf)
            digits_avail = prec * math.log10(2)
            if lost <= digits_avail / 2 or prec >= 8 * base:
                return LinearFormValue(+r, prec, lost)
        prec *= 2


def eval_linear_form(appr: Approximant, mu: MeasureSpec, sigma, point):
    """Value of ``R_{m,n} = Q sigma_hat - P`` at ``point`` (off the support of sigma)."""
    return eval_linear_form_detail(appr, mu, sigma, point).value


def expansion_coefficients_of_R(appr: Approximant, mu: MeasureSpec, sigma, upto: int,
                                prec: int | None = None, margin: int = QUAD_MARGIN):
    """``c_k(R; mu)`` for ``k = 0..upto`` by Gauss-``mu`` quadrature of ``R``."""
    prec = prec or appr.precision_bits
    target = as_target(sigma)
    nodes = upto + 1 + max(margin, _exact_margin(mu, target, prec))
    rec = recurrence_coeffs(mu, nodes + 1, prec)
    rule = gauss_rule(rec, nodes)
    with mp.workprec(prec):
        out = [mp.zero] * (upto + 1)
        for x, w in zip(rule.nodes, rule.weights):
            ps = eval_poly(rec, upto, x)
            qv = clenshaw(rec, appr.q_coeffs, x)
            pv = clenshaw(rec, appr.p_coeffs, x)
            rv = w * (qv * target(x, prec) - pv)
            for k in range(upto + 1):
                out[k] += rv * ps[k]
    return out


def eval_C(appr: Approximant, mu: MeasureSpec, sigma, point, prec: int | None = None):
    """``C_{m,n}(z) = int R(x) dmu(x) / (x - z)`` off both supports.

    Uses ``1/(z - x) = sum_k q_k(z) p_k(x)``, so
    ``C(z) = -sum_{k > m+n} c_k(R) q_k(z)``; the vanishing of the first
    ``m + n + 1`` coefficients is what makes the result tiny at infinity,
    and summing only the tail avoids the cancellation a direct quadrature
    would suffer.  The tail length is chosen from the geometric decay
    rates of both factors.
    """
    target = as_target(sigma)
    prec = prec or appr.precision_bits
    with mp.workprec(prec):
        z = mp.mpmathify(point)
        if _on_support(mu, z):
            raise DomainError(f"C jumps across the support of mu; got {point}")
        if isinstance(target, MarkovTarget) and _on_support(target.sigma, z):
            raise DomainError(f"C is not defined on the support of sigma; got {point}")
        total = appr.index.total
        with mp.workprec(53):
            rz = float(mp.log(phi_modulus(mu, z)))
            if isinstance(target, MarkovTarget):
                s = target.sigma
                near = s.a if s.a > mu.b else s.b
                rs = float(mp.log(phi_modulus(mu, mp.mpf(near.numerator) / near.denominator)))
            else:
                rs = 1.0
        tail = int(math.ceil((prec + 10) * math.log(2) / max(rz + rs, 1e-3))) + 8
        upto = total + 1 + min(tail, 4000)
        coeffs = expansion_coefficients_of_R(appr, mu, sigma, upto, prec + 10)
        rec = recurrence_coeffs(mu, upto + 2, prec + 10)
        _, q = eval_poly_and_second_kind(rec, upto, z)
        return -mp.fsum(coeffs[k] * q[k] for k in range(total + 1, upto + 1))


def eval_C_quadrature(appr: Approximant, mu: MeasureSpec, sigma, point, nodes: int,
                      prec: int | None = None):
    """Direct Gauss-``mu`` quadrature of ``R(x)/(x - z)`` (reference for tests)."""
    prec = prec or appr.precision_bits
    target = as_target(sigma)
    rec = recurrence_coeffs(mu, nodes + 1, prec)
    rule = gauss_rule(rec, nodes)
    with mp.workprec(prec):
        z = mp.mpmathify(point)
        acc = mp.zero
        for x, w in zip(rule.nodes, rule.weights):
            rv = clenshaw(rec, appr.q_coeffs, x) * target(x, prec) - clenshaw(rec, appr.p_coeffs, x)
            acc += w * rv / (x - z)
        return acc


# ---------------------------------------------------------------- zeros

@dataclass(frozen=True)
class QZeros:
    zeros: tuple
    degree_deficient: bool
    newton_steps: int


def _q_and_derivative(rec, coeffs, x):
    """``Q(x)`` and ``Q'(x)`` by forward recurrence on ``p`` and ``p'``."""
    sb = rec.sqrt_beta()
    n = len(coeffs) - 1
    p_prev, p = mp.zero, 1 / sb[0]
    d_prev, d = mp.zero, mp.zero
    qv = coeffs[0] * p
    dq = mp.zero
    for k in range(n):
        s_k = sb[k] if k > 0 else mp.zero
        p_next = ((x - rec.alpha[k]) * p - s_k * p_prev) / sb[k + 1]
        d_next = (p + (x - rec.alpha[k]) * d - s_k * d_prev) / sb[k + 1]
        p_prev, p, d_prev, d = p, p_next, d, d_next
        qv += coeffs[k + 1] * p
        dq += coeffs[k + 1] * d
    return qv, dq


def zeros_of_Q(appr: Approximant, mu: MeasureSpec, newton_steps: int = 2) -> QZeros:
    """Zeros of ``Q`` from the comrade matrix of ``mu``'s recurrence.

    The matrix is the Jacobi matrix with its last row corrected by the
    coefficients of ``Q``; eigenvalues are computed at working precision and
    polished by Newton steps on ``Q`` itself.  Trailing coefficients that are
    negligible reduce the degree and set ``degree_deficient``.
    """
    prec = appr.precision_bits
    rec = recurrence_coeffs(mu, appr.index.n + 2, prec)
    a = list(appr.q_coeffs)
    tol = mp.mpf(2) ** (-prec // 2) * max(abs(v) for v in a)
    deg = len(a) - 1
    while deg > 0 and abs(a[deg]) <= tol:
        deg -= 1
    if deg == 0:
        return QZeros((), appr.index.n > 0, 0)
    sb = rec.sqrt_beta()
    with mp.workprec(prec):
        C = mp.matrix(deg, deg)
        for k in range(deg):
            C[k, k] = rec.alpha[k]
            if k + 1 < deg:
                C[k, k + 1] = sb[k + 1]
                C[k + 1, k] = sb[k + 1]
        for j in range(deg):
            C[deg - 1, j] -= sb[deg] * a[j] / a[deg]
        ev = mp.eig(C, left=False, right=False)
        if isinstance(ev, tuple):
            ev = ev[0]
        coeffs = a[:deg + 1]
        zs = []
        for z in ev:
            if abs(mp.im(z)) <= mp.mpf(2) ** (-prec // 2) * max(1, abs(z)):
                z = mp.re(z)
            for _ in range(newton_steps):
                qv, dq = _q_and_derivative(rec, coeffs, z)
                if dq == 0:
                    break
                z = z - qv / dq
            zs.append(z)
    zs.sort(key=lambda t: (float(mp.re(t)), float(mp.im(t))))
    return QZeros(tuple(zs), deg < appr.index.n, newton_steps)
