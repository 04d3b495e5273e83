"""Offspring laws with q_0 = q_1 = 0 and their generating functions.

Three kinds are supported: the n-ary tree (``NAry``), the shifted
geometric law q_n = p (1-p)^(n-2) on n >= 2 (``ShiftedGeometric``), and a
finite explicit pmf (``Explicit``). Probabilities may be given as
``Fraction`` for exact work; float arithmetic is used otherwise.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, TruncationError
from .roots import find_root

DEFAULT_EPS_TAIL = 1e-14
MAX_TRUNCATION = 200_000


class SupportParity(str, enum.Enum):
    ALL_ODD = "AllOdd"
    ALL_EVEN = "AllEven"
    MIXED = "Mixed"


@dataclass(frozen=True)
class Truncation:
    """Finite part of an offspring law used by outer sums over n."""

    ns: tuple[int, ...]
    qs: tuple
    tail_mass: float


def _check_s(s):
    arr = np.asarray(s, dtype=float)
    if np.any(arr < -1e-15) or np.any(arr > 1 + 1e-15):
        raise DomainError(f"generating function argument outside [0, 1]: {s}")


def _falling(n: int, k: int) -> int:
    out = 1
    for i in range(k):
        out *= n - i
    return out


class OffspringDistribution:
    """Common interface; concrete laws subclass this."""

    def pmf(self, n: int):
        raise NotImplementedError

    def truncate(self, eps_tail: float = DEFAULT_EPS_TAIL) -> Truncation:
        raise NotImplementedError

    @property
    def has_finite_support(self) -> bool:
        return True

    @property
    def min_support(self) -> int:
        """Smallest n with q_n > 0."""
        return self.truncate().ns[0]

    def G(self, s):
        return self.G_derivative(0, s)

    def G_derivative(self, order: int, s):
        _check_s(s)
        trunc = self.truncate()
        s = np.asarray(s, dtype=float)
        out = np.zeros_like(s)
        for n, q in zip(trunc.ns, trunc.qs):
            if n >= order:
                out = out + float(q) * _falling(n, order) * s ** (n - order)
        return out if out.ndim else float(out)

    def factorial_moment(self, order: int) -> float:
        """E[N (N-1) ... (N-order+1)], i.e. G^(order)(1)."""
        return float(self.G_derivative(order, 1.0))

    @property
    def mean(self) -> float:
        return self.factorial_moment(1)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        trunc = self.truncate()
        probs = np.array([float(q) for q in trunc.qs])
        return rng.choice(np.array(trunc.ns), size=size, p=probs / probs.sum())

    def spec(self) -> str:
        """Round-trippable text form accepted by :func:`parse_distribution`."""
        raise NotImplementedError


@dataclass(frozen=True)
class NAry(OffspringDistribution):
    n: int

    def __post_init__(self):
        if self.n < 2:
            raise DomainError(f"n-ary tree needs n >= 2, got {self.n}")

    def pmf(self, n):
        return Fraction(1) if n == self.n else Fraction(0)

    def truncate(self, eps_tail=DEFAULT_EPS_TAIL):
        return Truncation((self.n,), (Fraction(1),), 0.0)

    def G_derivative(self, order, s):
        _check_s(s)
        if order > self.n:
            return 0.0 * np.asarray(s, dtype=float) if np.ndim(s) else 0.0
        return _falling(self.n, order) * np.asarray(s, dtype=float) ** (self.n - order) + 0.0

    def sample(self, rng, size):
        return np.full(size, self.n, dtype=np.int64)

    def spec(self):
        return f"nary:{self.n}"


@dataclass(frozen=True)
class ShiftedGeometric(OffspringDistribution):
    """q_n = p (1-p)^(n-2) for n >= 2, i.e. N = 1 + Geometric(p)."""

    p: float

    def __post_init__(self):
        if not 0 < self.p < 1:
            raise DomainError(f"geometric parameter must lie in (0, 1), got {self.p}")

    @property
    def has_finite_support(self):
        return False

    @property
    def min_support(self):
        return 2

    def pmf(self, n):
        return self.p * (1 - self.p) ** (n - 2) if n >= 2 else 0 * self.p

    def truncate(self, eps_tail=DEFAULT_EPS_TAIL):
        # tail beyond N* is (1-p)^(N*-1)
        r = float(1 - self.p)
        n_star = max(2, math.ceil(1 + math.log(eps_tail) / math.log(r)))
        while r ** (n_star - 1) >= eps_tail:
            n_star += 1
        if n_star > MAX_TRUNCATION:
            raise TruncationError(
                f"geometric law with p={self.p} needs {n_star} terms", r ** (MAX_TRUNCATION - 1)
            )
        ns = tuple(range(2, n_star + 1))
        return Truncation(ns, tuple(self.pmf(n) for n in ns), r ** (n_star - 1))

    def G_derivative(self, order, s):
        # closed forms of p s^2 / (1 - r s)
        _check_s(s)
        s = np.asarray(s, dtype=float)
        p, r = float(self.p), float(1 - self.p)
        d = 1.0 - r * s
        if order == 0:
            out = p * s * s / d
        elif order == 1:
            out = p * s * (2.0 - r * s) / d**2
        else:
            out = p * math.factorial(order) * r ** (order - 2) / d ** (order + 1)
        return out if out.ndim else float(out)

    def sample(self, rng, size):
        return 1 + rng.geometric(float(self.p), size=size)

    def spec(self):
        return f"geom:{self.p!r}"


@dataclass(frozen=True)
class Explicit(OffspringDistribution):
    """Finite pmf given as ``((n, q_n), ...)`` pairs."""

    items: tuple

    def __post_init__(self):
        items = tuple(sorted((int(n), q) for n, q in self.items if q != 0))
        object.__setattr__(self, "items", items)
        if not items:
            raise DomainError("empty offspring law")
        if any(n < 2 for n, _ in items):
            raise DomainError("offspring law must satisfy q_0 = q_1 = 0")
        if any(q < 0 for _, q in items):
            raise DomainError("negative probability in offspring law")
        total = sum(q for _, q in items)
        if abs(total - 1) > 1e-14:
            raise DomainError(f"offspring probabilities sum to {total}, not 1")

    @classmethod
    def from_mapping(cls, mapping) -> "Explicit":
        return cls(tuple(mapping.items()))

    def pmf(self, n):
        return dict(self.items).get(n, 0)

    def truncate(self, eps_tail=DEFAULT_EPS_TAIL):
        return Truncation(tuple(n for n, _ in self.items), tuple(q for _, q in self.items), 0.0)

    def spec(self):
        return "pmf:" + ",".join(f"{n}={q}" for n, q in self.items)


def G(dist: OffspringDistribution, s):
    """Generating function E[s^N]."""
    return dist.G(s)


def G_derivative(dist: OffspringDistribution, order: int, s):
    """E[N (N-1) ... (N-order+1) s^(N-order)]."""
    return dist.G_derivative(order, s)


def support_parity(dist: OffspringDistribution) -> SupportParity:
    if isinstance(dist, NAry):
        return SupportParity.ALL_EVEN if dist.n % 2 == 0 else SupportParity.ALL_ODD
    if isinstance(dist, ShiftedGeometric):
        return SupportParity.MIXED
    parities = {n % 2 for n in dist.truncate().ns}
    if parities == {0}:
        return SupportParity.ALL_EVEN
    if parities == {1}:
        return SupportParity.ALL_ODD
    return SupportParity.MIXED


def persistence_threshold(dist: OffspringDistribution) -> float:
    """The u* in (0, 1] solving G'(1 - u) = 1."""
    g = lambda u: dist.G_derivative(1, 1.0 - u) - 1.0
    dg = lambda u: -dist.G_derivative(2, 1.0 - u)
    return find_root(g, 0.0, 1.0, dg, residual_tol=1e-15)


def persistence_floor(dist: OffspringDistribution, k: int, p1: float) -> float:
    """Lower bound beta on the major-opinion mass p_1(m) along a canonical orbit.

    With eta = u*/k, any canonical state with p_1 <= eta has
    G'(p_0) >= G'(1 - k p_1) >= 1, so p_1 cannot decrease there; above eta
    the term with exactly ``a`` opinion-1 children keeps p_1 >= eta^a q_a,
    where ``a`` is the smallest offspring count.
    """
    if p1 <= 0:
        raise DomainError("major mass p1 must be positive")
    if k < 1:
        raise DomainError("need at least one opinion")
    eta = persistence_threshold(dist) / k
    a = dist.min_support
    return min(eta**a * float(dist.pmf(a)), float(p1))


_SPEC = re.compile(r"^\s*(nary|geom|pmf)\s*:\s*(.+?)\s*$")


def _number(text: str):
    text = text.strip()
    if "/" in text:
        return Fraction(text)
    return float(text)


def parse_distribution(text: str) -> OffspringDistribution:
    """Parse ``nary:5``, ``geom:0.25`` or ``pmf:2=0.3,3=0.7``.

    Rational probabilities such as ``pmf:3=1/2,5=1/2`` are kept exact.
    """
    m = _SPEC.match(text)
    if not m:
        raise ValueError(f"unrecognised distribution spec {text!r}")
    kind, body = m.groups()
    try:
        if kind == "nary":
            return NAry(int(body))
        if kind == "geom":
            return ShiftedGeometric(_number(body))
        items = []
        for part in body.split(","):
            n, q = part.split("=")
            items.append((int(n), _number(q)))
        return Explicit(tuple(items))
    except DomainError:
        raise
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad distribution spec {text!r}: {exc}") from None
