"""Independent reference computations used by the tests."""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction


def majority_outcome(opinions, k: int) -> int:
    """Parent opinion from child opinions by direct counting."""
    tallies = [sum(1 for o in opinions if o == j) for j in range(1, k + 1)]
    top = max(tallies)
    if top == 0 or tallies.count(top) > 1:
        return 0
    return tallies.index(top) + 1


def brute_force_H(p, n_children: int):
    """Root law one level up, by enumerating all (k+1)^N child assignments."""
    k = len(p) - 1
    out = [Fraction(0)] * (k + 1)
    for outcome in itertools.product(range(k + 1), repeat=n_children):
        prob = Fraction(1)
        for o in outcome:
            prob *= p[o]
        out[majority_outcome(outcome, k)] += prob
    return out


def random_rational_state(rng: random.Random, k: int, denom: int = 97):
    while True:
        w = [rng.randint(0, denom) for _ in range(k + 1)]
        total = sum(w)
        if total and w[0] < total:
            return [Fraction(x, total) for x in w]


def brute_force_three_opinion(n: int, t: Fraction) -> Fraction:
    x = (1 - t) / 3
    total = Fraction(0)
    for outcome in itertools.product(range(4), repeat=n):
        prob = Fraction(1)
        for o in outcome:
            prob *= t if o == 0 else x
        if majority_outcome(outcome, 3) == 0:
            total += prob
    return total


def fn_expanded(n: int):
    """f_n as a sympy polynomial in t, straight from the defining sum."""
    import sympy as sp

    t = sp.symbols("t")
    expr = sum(
        sp.binomial(n, 2 * k) * sp.binomial(2 * k, k) * ((1 - t) / 2) ** (2 * k) * t ** (n - 2 * k)
        for k in range(n // 2 + 1)
    )
    return sp.Poly(sp.expand(expr), t), t


def g_from_gamma(n: int):
    """Coefficients of g obtained symbolically: gamma'(t) = t^n g((1-t)/t)."""
    import sympy as sp

    f, t = fn_expanded(n)
    s = sp.symbols("s")
    gamma_prime = sp.diff(t * f.as_expr(), t)
    g = sp.simplify(gamma_prime.subs(t, 1 / (1 + s)) * (1 + s) ** n)
    poly = sp.Poly(sp.expand(g), s)
    return [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]


def central(m: int) -> float:
    return math.comb(m, m // 2) / 2**m
