"""Central binomial and Wallis estimates, binomial identities, and the
envelope of the fixed points alpha_n.

Inequalities are evaluated with mpmath at 50 significant digits; exact
quantities (xi_m, Wallis integrals up to a power of pi) are kept as
fractions until that comparison.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Optional, Sequence

import mpmath

from .errors import DomainError, IdentityViolation, PreconditionError

DPS = 50
ENVELOPE_PROVEN_FROM = 536

PASS, FAIL, WARN = "pass", "fail", "warn"


def xi(m: int) -> Fraction:
    """2^{-m} C(m, m/2) for even m >= 0."""
    if m < 0 or m % 2:
        raise DomainError(f"xi is defined for even m >= 0, got {m}")
    return Fraction(math.comb(m, m // 2), 2**m)


@dataclass(frozen=True)
class WallisValue:
    """coefficient * pi**pi_power."""

    coefficient: Fraction
    pi_power: int

    def __mul__(self, other):
        if isinstance(other, WallisValue):
            return WallisValue(self.coefficient * other.coefficient, self.pi_power + other.pi_power)
        return WallisValue(self.coefficient * Fraction(other), self.pi_power)

    __rmul__ = __mul__

    def to_mpf(self):
        return _mpf(self.coefficient) * mpmath.pi**self.pi_power

    def __float__(self):
        return float(self.coefficient) * math.pi**self.pi_power


@lru_cache(maxsize=None)
def wallis(n: int) -> WallisValue:
    """W_n = integral of sin^n over [0, pi/2]."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if n == 0:
        return WallisValue(Fraction(1, 2), 1)
    if n == 1:
        return WallisValue(Fraction(1), 0)
    return wallis(n - 2) * Fraction(n - 1, n)


def _mpf(x):
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


@dataclass(frozen=True)
class CheckResult:
    """One inequality lhs < rhs (or lhs <= rhs); margin = rhs - lhs."""

    name: str
    n: int
    lhs: float
    rhs: float
    margin: float
    verdict: str

    def as_dict(self) -> dict:
        return dict(name=self.name, n=self.n, lhs=self.lhs, rhs=self.rhs, margin=self.margin, verdict=self.verdict)


def _compare(name, n, lhs, rhs, strict=True, soft=False) -> CheckResult:
    margin = rhs - lhs
    ok = margin > 0 if strict else margin >= 0
    verdict = PASS if ok else (WARN if soft else FAIL)
    return CheckResult(name, n, float(lhs), float(rhs), float(margin), verdict)


def _raise_on_fail(results: Sequence[CheckResult]) -> None:
    bad = [r for r in results if r.verdict == FAIL]
    if bad:
        r = bad[0]
        raise IdentityViolation(f"{r.name} fails at n={r.n}: lhs={r.lhs!r}, rhs={r.rhs!r}")


def check_xi_bounds(n: int, strict: bool = True) -> list[CheckResult]:
    """Two-sided bound on xi_{2n}, the ratio bound xi_{4n} < e^{1/(4n)} xi_{2n} / sqrt 2,
    and the two-sided Wallis bound on W_n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    with mpmath.workdps(DPS):
        pi = mpmath.pi
        x2n, x4n = _mpf(xi(2 * n)), _mpf(xi(4 * n))
        w = wallis(n).to_mpf()
        out = [
            _compare("xi_lower", n, 2 / mpmath.sqrt(2 * pi * (2 * n + 1)), x2n),
            _compare("xi_upper", n, x2n, 1 / mpmath.sqrt(pi * n)),
            _compare("xi_ratio", n, x4n, mpmath.exp(mpmath.mpf(1) / (4 * n)) * x2n / mpmath.sqrt(2)),
            _compare("wallis_lower", n, mpmath.sqrt(pi / (2 * (n + 1))), w),
            _compare("wallis_upper", n, w, mpmath.sqrt(pi / (2 * n))),
        ]
    if strict:
        _raise_on_fail(out)
    return out


def n_sharp(n: int) -> int:
    return 2 * (n // 2)


def check_alpha_envelope(n: int, alpha: Optional[float] = None, strict: bool = True) -> list[CheckResult]:
    """xi_{4n} <= alpha_n <= xi_{n#} <= sqrt(2 / (pi (n-1))) together with
    1/sqrt(2 pi (n + 1/4)) < xi_{4n}.

    The bound xi_{4n} <= alpha_n is only established for n >= 536; below that
    a violation is reported with verdict ``warn`` rather than ``fail``.
    """
    if n < 3:
        raise DomainError(f"envelope is stated for n >= 3, got {n}")
    if alpha is None:
        from .fixed_points import alpha_n

        alpha = alpha_n(n)
    with mpmath.workdps(DPS):
        a = mpmath.mpf(alpha)
        x4n, xs = _mpf(xi(4 * n)), _mpf(xi(n_sharp(n)))
        out = [
            _compare("alpha_upper", n, a, xs, strict=False),
            _compare("xi_sharp_upper", n, xs, mpmath.sqrt(2) / mpmath.sqrt(mpmath.pi * (n - 1)), strict=False),
            _compare("alpha_lower", n, x4n, a, strict=False, soft=n < ENVELOPE_PROVEN_FROM),
            _compare("xi_4n_lower", n, 1 / mpmath.sqrt(2 * mpmath.pi * (n + mpmath.mpf(1) / 4)), x4n),
        ]
    if strict:
        _raise_on_fail(out)
    return out


def dpa_w(n: int):
    """The threshold sequence w_n (mpmath value)."""
    with mpmath.workdps(DPS):
        m = mpmath.mpf(n - 1)
        c = 1 / (2 * mpmath.sqrt(2 * mpmath.pi))
        e = mpmath.exp(-m / 2)
        return (
            mpmath.sqrt(m) * c * e
            + c * e
            + 1 / m
            + m * mpmath.exp(-m / mpmath.sqrt(2 * mpmath.pi * (n + 1)))
        )


def check_dpa_threshold(n: int) -> list[CheckResult]:
    """Sign of 1/4 - w_n, and the direct value of f_n'(zeta_n) with
    zeta_n = 1/sqrt(2 pi (n+1)) (reported as margin 0 < f_n'(zeta_n))."""
    if n < 4 or n % 2:
        raise DomainError(f"n must be even and >= 4, got {n}")
    from .uniform import eval_fn_derivative

    zeta = 1.0 / math.sqrt(2 * math.pi * (n + 1))
    d = eval_fn_derivative(n, 1, zeta)
    return [
        _compare("dpa_threshold", n, dpa_w(n), mpmath.mpf(1) / 4),
        _compare("deriv_at_zeta", n, 0.0, d),
    ]


def _falling(x: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= x - i
    return out


def _exact(name, n, lhs, rhs) -> CheckResult:
    if lhs != rhs:
        raise IdentityViolation(f"{name} fails at n={n}: {lhs} != {rhs}")
    return CheckResult(name, n, float(lhs), float(rhs), 0.0, PASS)


def identity_suite(n_max: int, ell_max: int, seed: int = 0) -> list[CheckResult]:
    """Exact checks, for 0 <= n <= n_max and 1 <= l <= ell_max, of

        sum 2k C(n,2k) = sum (2k+1) C(n,2k+1) = n 2^{n-2}         (n != 1)
        sum_j C(n,2j) C(2j,j) 4^{-j} = 2^{-n} C(2n,n)
        sum_j j^(l) C(n,2j) C(2j,j) 4^{-j} = 2^{-n} C(2(n-l),n-l) (n-l)^(l)
        sum_k C(n,2k) x^{2k} y^{n-2k} = ((x+y)^n + (y-x)^n) / 2

    where j^(l) is the falling factorial; the last at a random rational (x, y).
    """
    if n_max < 0 or ell_max < 0:
        raise DomainError("n_max and ell_max must be nonnegative")
    rng = random.Random(seed)
    out = []
    for n in range(n_max + 1):
        js = range(n // 2 + 1)
        if n != 1:
            even = sum(2 * k * math.comb(n, 2 * k) for k in js)
            odd = sum((2 * k + 1) * math.comb(n, 2 * k + 1) for k in range((n + 1) // 2))
            out.append(_exact("parity_weighted_sum", n, even, odd))
            out.append(_exact("parity_weighted_sum_closed", n, even, Fraction(n * 2**n, 4)))
        base = [Fraction(math.comb(n, 2 * j) * math.comb(2 * j, j), 4**j) for j in js]
        out.append(_exact("central_binomial_sum", n, sum(base), Fraction(math.comb(2 * n, n), 2**n)))
        for ell in range(1, ell_max + 1):
            lhs = sum(_falling(j, ell) * b for j, b in zip(js, base))
            rhs = Fraction(math.comb(2 * (n - ell), n - ell) * _falling(n - ell, ell), 2**n) if n >= ell else Fraction(0)
            out.append(_exact(f"falling_factorial_sum_l{ell}", n, lhs, rhs))
        x = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        y = Fraction(rng.randint(-50, 50), rng.randint(1, 50))
        lhs = sum(math.comb(n, 2 * k) * x ** (2 * k) * y ** (n - 2 * k) for k in js)
        out.append(_exact("even_binomial_part", n, lhs, ((x + y) ** n + (y - x) ** n) / 2))
    return out


def _monotone(seq) -> Optional[str]:
    inc = all(a <= b for a, b in zip(seq, seq[1:]))
    dec = all(a >= b for a, b in zip(seq, seq[1:]))
    if inc and dec:
        return "constant"
    return "increasing" if inc else "decreasing" if dec else None


def weighted_mean_inequality(mu, nu, alpha, ell: int, n: int) -> bool:
    """Compare the mu- and nu-weighted means of alpha over indices l..n.

    Requires mu, nu positive with nu/mu nondecreasing and alpha monotone.
    Returns True iff mean_mu >= mean_nu for nonincreasing alpha (and <= for
    nondecreasing alpha). Evaluated exactly on the given values.
    """
    if not 0 <= ell <= n < min(len(mu), len(nu), len(alpha)):
        raise PreconditionError(f"need 0 <= l <= n < sequence length, got l={ell}, n={n}")
    mu = [Fraction(v) for v in mu[ell : n + 1]]
    nu = [Fraction(v) for v in nu[ell : n + 1]]
    al = [Fraction(v) for v in alpha[ell : n + 1]]
    if any(v <= 0 for v in mu + nu):
        raise PreconditionError("weights must be positive")
    if _monotone([b / a for a, b in zip(mu, nu)]) not in ("increasing", "constant"):
        raise PreconditionError("nu/mu must be nondecreasing")
    direction = _monotone(al)
    if direction is None:
        raise PreconditionError("alpha must be monotone")
    m_mu = sum(a * w for a, w in zip(al, mu)) / sum(mu)
    m_nu = sum(a * w for a, w in zip(al, nu)) / sum(nu)
    if direction == "constant":
        return m_mu == m_nu
    return m_mu >= m_nu if direction == "decreasing" else m_mu <= m_nu
