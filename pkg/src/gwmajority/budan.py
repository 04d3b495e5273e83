"""Budan-Fourier root bounds in exact arithmetic, and the monotonicity
certificate for gamma(t) = t f_n(t).

Under s = (1-t)/t one has gamma'(t) = t^n g(s) with

    g(s) = sum_{0 <= 2k <= n} 4^{-k} C(n,2k) C(2k,k) [(n+1-2k) s^{2k} - 2k s^{2k-1}],

so gamma is strictly increasing on (0, 1/2) as soon as g has no root in
(1, +inf) and is positive there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError
from .polynomial import RationalPolynomial

Number = Union[int, Fraction]


def _sign(x) -> int:
    return (x > 0) - (x < 0)


def _count_variations(values) -> int:
    signs = [_sign(v) for v in values if v != 0]
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def derivative_sequence(P: RationalPolynomial, c: Number) -> list[Fraction]:
    """(P(c), P'(c), ..., P^(deg)(c))."""
    out, Q = [], P
    for _ in range(P.degree + 1):
        out.append(Q(Fraction(c)))
        Q = Q.derivative()
    return out


def sign_variations(P: RationalPolynomial, c: Union[Number, float]) -> int:
    """V_c(P); ``c = math.inf`` uses the leading-coefficient signs."""
    if P.is_zero():
        raise DomainError("sign variations of the zero polynomial are undefined")
    if c == math.inf:
        leads, Q = [], P
        for _ in range(P.degree + 1):
            leads.append(Q.leading_coefficient)
            Q = Q.derivative()
        return _count_variations(leads)
    return _count_variations(derivative_sequence(P, c))


def budan_root_bound(P: RationalPolynomial, a: Number, b: Union[Number, float] = math.inf) -> tuple[int, bool]:
    """(V_a - V_b, exact) where the number of roots in (a, b], counted with
    multiplicity, is the bound minus an even integer. ``exact`` is True when
    the bound is 0 or 1, in which case it equals the root count."""
    if not a < b:
        raise DomainError(f"need a < b, got a={a}, b={b}")
    bound = sign_variations(P, a) - sign_variations(P, b)
    return bound, bound <= 1


def build_g(n: int) -> RationalPolynomial:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    coeffs = [Fraction(0)] * (n + 1)
    for k in range(n // 2 + 1):
        c = Fraction(math.comb(n, 2 * k) * math.comb(2 * k, k), 4**k)
        coeffs[2 * k] += c * (n + 1 - 2 * k)
        if k:
            coeffs[2 * k - 1] -= c * 2 * k
    return RationalPolynomial(coeffs)


def g_derivatives_at_one(n: int) -> list[Fraction]:
    """Closed form of g^(l)(1), l = 0..n, independent of the expansion in build_g:

        n!/(n-l)! * sum_{l <= 2k <= n} 4^{-k} C(2k,k) C(n-l, 2k-l) (n+1+l-4k).
    """
    out = []
    for ell in range(n + 1):
        s = Fraction(0)
        for k in range((ell + 1) // 2, n // 2 + 1):
            s += Fraction(math.comb(2 * k, k) * math.comb(n - ell, 2 * k - ell) * (n + 1 + ell - 4 * k), 4**k)
        out.append(math.perm(n, ell) * s)
    return out


@dataclass(frozen=True)
class Certificate:
    n: int
    bound: int
    derivative_signs_at_1: tuple[int, ...]
    verdict: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "bound": self.bound,
            "derivative_signs_at_1": list(self.derivative_signs_at_1),
            "verdict": self.verdict,
        }


def gamma_certificate(n: int) -> Certificate:
    g = build_g(n)
    bound, _ = budan_root_bound(g, 1, math.inf)
    signs = tuple(_sign(v) for v in derivative_sequence(g, 1))
    return Certificate(n, bound, signs, bound == 0 and g.leading_coefficient > 0)


def gamma_monotone_certificate(n: int) -> bool:
    """True when t -> t f_n(t) is certified strictly increasing on (0, 1/2)."""
    return gamma_certificate(n).verdict
