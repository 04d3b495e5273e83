"""Uniform-case reductions of the majority map.

With two equally likely opinions and undecided mass t, the probability
that n children produce no strict majority is

    f_n(t) = sum_{0 <= 2k <= n} C(n, 2k) C(2k, k) ((1-t)/2)^(2k) t^(n-2k),

a degree-n polynomial stored with exact rational coefficients. Exact
arguments (int or Fraction) are evaluated exactly by Horner's rule. Float
arguments go through the Bernstein form

    f_n(t) = sum_j xi_j * P(Bin(n, 1-t) = j),   xi_j = P(tie among j fair votes),

which is numerically stable on [0, 1] where the monomial coefficients are
not (they reach ~1e13 at n = 50).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np
from scipy.special import xlog1py, xlogy

from .errors import DomainError, IdentityViolation
from .offspring import DEFAULT_EPS_TAIL, OffspringDistribution
from .polynomial import RationalPolynomial
from .roots import find_root

INTEGRAL_AGREEMENT = 1e-10


class QuadratureWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class MajorityPolynomial:
    """f_n with exact coefficients in the monomial basis of t."""

    n: int
    poly: RationalPolynomial

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self.poly.coefficients

    @property
    def degree(self) -> int:
        return self.poly.degree

    def __call__(self, t):
        return self.poly(t)

    def derivative(self, order: int = 1) -> RationalPolynomial:
        return self.poly.derivative(order)


def _tie_probability(j: int) -> Fraction:
    return Fraction(math.comb(j, j // 2), 2**j) if j % 2 == 0 else Fraction(0)


@lru_cache(maxsize=None)
def build_fn(n: int) -> MajorityPolynomial:
    if n < 1:
        raise DomainError(f"arity must be >= 1, got {n}")
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n // 2 + 1):
        w = Fraction(math.comb(n, 2 * k) * math.comb(2 * k, k), 4**k)
        # ((1-t)/2)^{2k} t^{n-2k} expanded; the 2^{-2k} is already in w
        for j in range(2 * k + 1):
            coeffs[n - 2 * k + j] += w * math.comb(2 * k, j) * (-1) ** j
    return MajorityPolynomial(n, RationalPolynomial(coeffs))


def _check_t(t, hi=1.0):
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or np.any(arr > hi) or np.any(np.isnan(arr)):
        raise DomainError(f"argument outside [0, {hi}]: {t}")


def _exact(t) -> bool:
    return isinstance(t, (int, Fraction)) and not isinstance(t, bool)


@lru_cache(maxsize=None)
def _log_binomials(m: int) -> np.ndarray:
    return np.array([math.log(math.comb(m, j)) for j in range(m + 1)])


def _binomial_pmf(m: int, s: np.ndarray) -> np.ndarray:
    """P(Bin(m, s) = j) for j = 0..m (rows) and each s (columns)."""
    j = np.arange(m + 1)[:, None]
    s = s[None, :]
    return np.exp(_log_binomials(m)[:, None] + xlogy(j, s) + xlog1py(m - j, -s))


@lru_cache(maxsize=None)
def _bernstein_weights(n: int, order: int) -> np.ndarray:
    """Scaled forward differences of xi_j: the Bernstein coefficients of f_n^(order)."""
    b = np.array([float(_tie_probability(j)) for j in range(n + 1)])
    b = np.diff(b, n=order)
    return (-1) ** order * math.perm(n, order) * b


def eval_fn_derivative(n: int, order: int, t):
    """f_n^(order)(t); exact for rational t, float (scalar or array) otherwise."""
    _check_t(t)
    if not 0 <= order:
        raise DomainError(f"derivative order must be >= 0, got {order}")
    if order > n:
        return Fraction(0) if _exact(t) else 0.0 * np.asarray(t, dtype=float) + 0.0
    if _exact(t):
        return build_fn(n).derivative(order)(Fraction(t))
    t_arr = np.asarray(t, dtype=float)
    pmf = _binomial_pmf(n - order, 1.0 - t_arr.reshape(-1))
    out = _bernstein_weights(n, order) @ pmf
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def eval_fn(n: int, t):
    return eval_fn_derivative(n, 0, t)


@lru_cache(maxsize=None)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return np.cos(0.5 * np.pi * (x + 1.0)), 0.5 * w


def eval_fn_integral(n: int, t, quadrature_order: int | None = None, check: bool = False):
    """(1/pi) * integral over [0, pi] of ((1-t) cos x + t)^n, by Gauss-Legendre.

    With ``check=True`` the value is compared against a rule of twice the
    order and a :class:`QuadratureWarning` is issued if they disagree.
    """
    _check_t(t)
    order = quadrature_order or max(40, 2 * n)
    t_arr = np.asarray(t, dtype=float)

    def rule(m):
        cos, w = _gauss_legendre(m)
        return ((1.0 - t_arr[..., None]) * cos + t_arr[..., None]) ** n @ w

    val = rule(order)
    if check:
        gap = float(np.max(np.abs(rule(2 * order) - val)))
        if gap > INTEGRAL_AGREEMENT:
            warnings.warn(
                f"quadrature order {order} too low for n={n}: disagreement {gap:.2e}",
                QuadratureWarning,
                stacklevel=2,
            )
    return float(val) if t_arr.ndim == 0 else val


@lru_cache(maxsize=None)
def _strict_wins(r: int, k: int) -> int:
    """Number of ways to give r labelled deciders one of k opinions so that
    opinion 1 holds a strict maximum."""
    if k == 1:
        return 1 if r >= 1 else 0
    total = Fraction(0)
    for j in range(1, r + 1):
        rest = r - j
        # exponential generating function of one other opinion with < j votes
        egf = [Fraction(1, math.factorial(i)) for i in range(min(j, rest + 1))]
        power = [Fraction(1)]
        for _ in range(k - 1):
            nxt = [Fraction(0)] * min(len(power) + len(egf) - 1, rest + 1)
            for a, ca in enumerate(power):
                for b, cb in enumerate(egf):
                    if a + b <= rest:
                        nxt[a + b] += ca * cb
            power = nxt
        coef = power[rest] if rest < len(power) else Fraction(0)
        total += math.comb(r, j) * math.factorial(rest) * coef
    return int(total)


def eval_hk(k: int, dist: OffspringDistribution, x, eps_tail: float = DEFAULT_EPS_TAIL):
    """h_k(x): probability that opinion 1 wins when each child holds each of
    k opinions with probability x and is undecided with probability 1 - k x."""
    if k < 1:
        raise DomainError("need at least one opinion")
    if _exact(x):
        x = Fraction(x)
        if not 0 <= x <= Fraction(1, k):
            raise DomainError(f"x={x} outside [0, 1/{k}]")
        u = 1 - k * x
    else:
        x = float(x)
        if not 0 <= x <= 1 / k + 1e-15:
            raise DomainError(f"x={x} outside [0, 1/{k}]")
        u = max(0.0, 1.0 - k * x)
    trunc = dist.truncate(eps_tail)
    total = 0 * x
    for n, q in zip(trunc.ns, trunc.qs):
        if not _exact(x):
            q = float(q)
        s = 0 * x
        for r in range(1, n + 1):
            s += math.comb(n, r) * _strict_wins(r, k) * u ** (n - r) * x**r
        total += q * s
    return total


@dataclass(frozen=True)
class GWMixture:
    """f = sum_n q_n f_n with the outer sum cut where the tail mass drops below eps."""

    dist: OffspringDistribution
    truncation: int
    tail_mass: float
    eps_tail: float = DEFAULT_EPS_TAIL

    @classmethod
    def of(cls, dist: OffspringDistribution, eps_tail: float = DEFAULT_EPS_TAIL) -> "GWMixture":
        trunc = dist.truncate(eps_tail)
        return cls(dist, trunc.ns[-1], trunc.tail_mass, eps_tail)

    def derivative(self, order: int, t):
        trunc = self.dist.truncate(self.eps_tail)
        if _exact(t) and all(_exact(q) for q in trunc.qs):
            return sum(q * eval_fn_derivative(n, order, Fraction(t)) for n, q in zip(trunc.ns, trunc.qs))
        t = np.asarray(t, dtype=float)
        out = sum(float(q) * eval_fn_derivative(n, order, t) for n, q in zip(trunc.ns, trunc.qs))
        return float(out) if np.ndim(out) == 0 else out

    def __call__(self, t):
        return self.derivative(0, t)


def eval_f_gw(dist: OffspringDistribution, t, eps_tail: float = DEFAULT_EPS_TAIL):
    """Mixture f(t); the truncation error is at most the reported tail mass."""
    _check_t(t)
    return GWMixture.of(dist, eps_tail)(t)


def _geom_radicand(p: float, t):
    if not 0 < p < 1:
        raise DomainError(f"geometric parameter must lie in (0, 1), got {p}")
    _check_t(t)
    rad = p * (2.0 - p + 2.0 * np.asarray(t, dtype=float) * (p - 1.0))
    if np.any(rad <= 0):
        raise DomainError("nonpositive radicand")
    return rad


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def geometric_f_closed(p: float, t):
    """Closed form of f for q_n = p (1-p)^(n-2)."""
    rad = _geom_radicand(p, t)
    t = np.asarray(t, dtype=float)
    return _scalar(p / (1 - p) ** 2 * (-((1 - p) * t + 1) + rad**-0.5))


def geometric_f_derivative(p: float, t, order: int = 1):
    rad = _geom_radicand(p, t)
    if order == 1:
        return _scalar(p / (1 - p) * (-1.0 + p * rad**-1.5))
    if order == 2:
        return _scalar(3 * p**3 * rad**-2.5)
    raise DomainError("only first and second derivatives are tabulated")


def eval_f3(n: int, t):
    """Undecided probability with three equally likely opinions.

    Three-way ties k-k-k, plus two-way ties at the top (k >= 1 each) with
    the third opinion holding j < k votes.
    """
    if n < 1:
        raise DomainError(f"arity must be >= 1, got {n}")
    _check_t(t)
    if _exact(t):
        t = Fraction(t)
    else:
        t = float(t)
    x = (1 - t) / 3
    total = 0 * t
    for k in range(n // 3 + 1):
        total += (
            math.comb(n, 3 * k) * math.comb(3 * k, k) * math.comb(2 * k, k) * t ** (n - 3 * k) * x ** (3 * k)
        )
    for k in range(1, n // 2 + 1):
        inner = 0 * t
        for j in range(min(k - 1, n - 2 * k) + 1):
            inner += math.comb(n - 2 * k, j) * t ** (n - 2 * k - j) * x ** (2 * k + j)
        total += 3 * math.comb(n, 2 * k) * math.comb(2 * k, k) * inner
    return total


@dataclass(frozen=True)
class RecurrenceReport:
    n: int
    points: tuple
    derivative_step: bool
    telescoped: bool
    argmin_residual: float | None


def _f(n: int) -> RationalPolynomial:
    return RationalPolynomial([0, 1]) if n == 1 else build_fn(n).poly


def xhat_even(n: int) -> float:
    """Minimiser of f_n on [0, 1] for even n (the unique zero of f_n')."""
    if n % 2 or n < 2:
        raise DomainError(f"minimiser defined for even n >= 2, got {n}")
    return find_root(
        lambda t: eval_fn_derivative(n, 1, t),
        0.0,
        1.0,
        lambda t: eval_fn_derivative(n, 2, t),
    )


def check_recurrences(n: int, ts: Iterable, argmin_tol: float = 1e-10) -> RecurrenceReport:
    """Exact checks of

        (t-1)/n * f_n'(t) = f_n(t) - f_{n-1}(t)
        f_n(t) - t = (t-1) * sum_{k=2}^{n} f_k'(t)/k

    at each rational t, and for even n the float check f_n(x) = f_{n-1}(x)
    at the minimiser x of f_n. Raises :class:`IdentityViolation` on failure.
    """
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    pts = tuple(Fraction(t) for t in ts)
    fn, fprev, dfn = _f(n), _f(n - 1), _f(n).derivative()
    for t in pts:
        if (t - 1) / n * dfn(t) != fn(t) - fprev(t):
            raise IdentityViolation(f"derivative step fails for n={n} at t={t}")
        tail = sum((_f(k).derivative()(t) / k for k in range(2, n + 1)), Fraction(0))
        if fn(t) - t != (t - 1) * tail:
            raise IdentityViolation(f"telescoped form fails for n={n} at t={t}")
    residual = None
    if n % 2 == 0:
        x = xhat_even(n)
        residual = abs(eval_fn(n, x) - eval_fn(n - 1, x))
        if residual > argmin_tol:
            raise IdentityViolation(f"f_{n} and f_{n - 1} differ by {residual:.3e} at the minimiser")
    return RecurrenceReport(n, pts, True, True, residual)


def write_polynomial_csv(ns: Iterable[int], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "degree", "power", "numerator", "denominator"])
    for n in ns:
        poly = build_fn(n)
        for power, c in enumerate(poly.coefficients):
            w.writerow([n, poly.degree, power, c.numerator, c.denominator])


def read_polynomial_csv(fh: TextIO) -> dict[int, RationalPolynomial]:
    coeffs: dict[int, dict[int, Fraction]] = {}
    for row in csv.DictReader(fh):
        coeffs.setdefault(int(row["n"]), {})[int(row["power"])] = Fraction(
            int(row["numerator"]), int(row["denominator"])
        )
    return {n: RationalPolynomial([c.get(i, 0) for i in range(max(c) + 1)]) for n, c in coeffs.items()}


def write_curves_csv(ts: Sequence[float], curves: Mapping[str, Sequence[float]], fh: TextIO, digits: int = 17) -> None:
    w = csv.writer(fh, lineterminator="\n")
    names = list(curves)
    w.writerow(["t", *names])
    for i, t in enumerate(ts):
        w.writerow([format(float(t), f".{digits}g")] + [format(float(curves[c][i]), f".{digits}g") for c in names])
