"""Root-state distributions on the simplex and the one-generation map H.

A state p = (p_0, p_1, ..., p_k) gives the probability that a node is
undecided (p_0) or holds opinion i. ``step_H`` pushes the law of the
children's states to the law of their parent's state under the majority
rules: undecided children are ignored, a strict relative majority wins,
and a tie at the top (or no decided child at all) leaves the parent
undecided.

Float states are evaluated through a compiled monomial table with numpy;
states whose entries are all ``Fraction`` are evaluated exactly.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Optional, Sequence, TextIO

import numpy as np

from .errors import DomainError
from .offspring import DEFAULT_EPS_TAIL, OffspringDistribution

SUM_TOL = 1e-12
DEFAULT_TOL = 1e-12
DEFAULT_MAX_STEPS = 10_000


def _is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


@dataclass(frozen=True)
class ProbabilityVector:
    """A point (p_0, ..., p_k) of the simplex with p_0 < 1."""

    entries: tuple

    def __init__(self, entries: Iterable):
        vals = list(entries)
        if all(_is_exact(v) for v in vals):
            vals = [Fraction(v) for v in vals]
        else:
            vals = [float(v) for v in vals]
        if len(vals) < 2:
            raise DomainError("a state needs p_0 and at least one opinion")
        if any(v < 0 for v in vals):
            raise DomainError(f"negative probability in {vals}")
        if abs(sum(vals) - 1) > SUM_TOL:
            raise DomainError(f"probabilities sum to {float(sum(vals))!r}, not 1")
        if vals[0] >= 1:
            raise DomainError("p_0 = 1: no opinion present")
        object.__setattr__(self, "entries", tuple(vals))

    @property
    def k(self) -> int:
        return len(self.entries) - 1

    @property
    def is_exact(self) -> bool:
        return isinstance(self.entries[0], Fraction)

    def __getitem__(self, i):
        return self.entries[i]

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def as_array(self) -> np.ndarray:
        return np.array([float(v) for v in self.entries])

    @classmethod
    def uniform(cls, k: int, x, majors: Optional[int] = None) -> "ProbabilityVector":
        """``(1 - i x, x, ..., x, 0, ..., 0)`` with ``i = majors`` (default k) tied opinions."""
        i = k if majors is None else majors
        return cls([1 - i * x] + [x] * i + [0 * x] * (k - i))


@dataclass(frozen=True)
class CanonicalState:
    """A state with opinions relabelled so that p_1 >= ... >= p_k.

    ``permutation[j]`` is the original label now at position ``j``
    (position 0, the undecided state, is never moved).
    """

    vector: ProbabilityVector
    permutation: tuple[int, ...]
    major_count: int


def canonicalize(p: ProbabilityVector) -> CanonicalState:
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    order = sorted(range(1, p.k + 1), key=lambda j: -p[j])  # stable: ties keep index order
    vec = ProbabilityVector([p[0]] + [p[j] for j in order])
    top = vec[1]
    major = max(j for j in range(1, vec.k + 1) if vec[j] == top)
    return CanonicalState(vec, (0, *order), major)


def _bounded_compositions(total: int, parts: int, cap: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    if total > parts * cap:
        return
    for first in range(min(total, cap), -1, -1):
        for rest in _bounded_compositions(total - first, parts - 1, cap):
            yield (first, *rest)


@lru_cache(maxsize=None)
def winning_compositions(i: int, n: int, k: int) -> frozenset:
    """Tuples (m_1, ..., m_k) summing to n in which m_i beats every other entry."""
    if not 1 <= i <= k:
        raise DomainError(f"opinion index {i} outside 1..{k}")
    out = []
    for top in range(1, n + 1):
        for tail in _bounded_compositions(n - top, k - 1, top - 1):
            out.append(tail[: i - 1] + (top,) + tail[i - 1 :])
    return frozenset(out)


def _multinomial(parts: Sequence[int]) -> int:
    out, acc = 1, 0
    for m in parts:
        acc += m
        out *= math.comb(acc, m)
    return out


@dataclass
class MajorityMap:
    """H for a fixed offspring law and opinion count, as a table of monomials.

    Float evaluation uses only the terms in which opinion 1 wins: row ``t``
    contributes ``coef[t] * prod_j v_j ** exponents[t, j]`` to H_1(v). Each
    H_i is H_1 at the relabelled vector (p_0, p_i, remaining opinions sorted),
    so tied opinions go through bit-identical arithmetic and stay tied.
    Rounding would otherwise split an exact tie, which the dynamics amplify.
    """

    k: int
    exponents: np.ndarray
    coef: np.ndarray
    exact_terms: list = field(repr=False)
    tail_mass: float = 0.0

    def opinions(self, x: np.ndarray) -> np.ndarray:
        """(H_1, ..., H_k) at an arbitrary real point, no domain checks."""
        x = np.asarray(x, dtype=float)
        out = np.empty(self.k)
        for i in range(1, self.k + 1):
            rest = np.sort(np.delete(x[1:], i - 1))
            v = np.concatenate((x[:1], x[i : i + 1], rest))
            out[i - 1] = self.coef @ np.prod(v[None, :] ** self.exponents, axis=1)
        return out

    def exact_opinions(self, p: Sequence[Fraction]) -> list:
        out = [Fraction(0)] * (self.k + 1)
        for win, c, exps in self.exact_terms:
            term = c
            for base, e in zip(p, exps):
                if e:
                    term *= base**e
            out[win] += term
        return out[1:]

    def __call__(self, p: ProbabilityVector) -> ProbabilityVector:
        if p.k != self.k:
            raise DomainError(f"state has {p.k} opinions, map built for {self.k}")
        if p.is_exact:
            h = self.exact_opinions(p.entries)
            return ProbabilityVector([1 - sum(h)] + h)
        h = self.opinions(p.as_array())
        h0 = 1.0 - h.sum()
        if -SUM_TOL < h0 < 0:
            # rounding overshoot next to a vertex
            h = h / h.sum()
            h0 = 0.0
        return ProbabilityVector([h0, *h])


@lru_cache(maxsize=64)
def compile_map(dist: OffspringDistribution, k: int, eps_tail: float = DEFAULT_EPS_TAIL) -> MajorityMap:
    """Tabulate the double sum over children count n, undecided count m_0
    and winning compositions of the remaining n - m_0 decided children."""
    trunc = dist.truncate(eps_tail)
    exps, coefs, exact = [], [], []
    for n, q in zip(trunc.ns, trunc.qs):
        for m0 in range(n):
            base = q * math.comb(n, m0)
            for i in range(1, k + 1):
                for comp in winning_compositions(i, n - m0, k):
                    c = base * _multinomial(comp)
                    e = (m0, *comp)
                    exact.append((i, c, e))
                    if i == 1:
                        exps.append(e)
                        coefs.append(float(c))
    return MajorityMap(
        k=k,
        exponents=np.array(exps, dtype=np.int64).reshape(-1, k + 1),
        coef=np.array(coefs),
        exact_terms=exact,
        tail_mass=trunc.tail_mass,
    )


def step_H(p: ProbabilityVector, dist: OffspringDistribution, eps_tail: float = DEFAULT_EPS_TAIL) -> ProbabilityVector:
    """One generation: the root law of a tree one level taller."""
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    return compile_map(dist, p.k, eps_tail)(p)


@dataclass(frozen=True)
class Trajectory:
    states: tuple
    converged: bool
    limit_estimate: Optional[ProbabilityVector]
    tail_mass: float = 0.0

    def __len__(self):
        return len(self.states)

    def as_array(self) -> np.ndarray:
        return np.array([s.as_array() for s in self.states])


def _max_diff(a: ProbabilityVector, b: ProbabilityVector) -> float:
    return max(abs(float(x - y)) for x, y in zip(a, b))


def iterate(
    p: ProbabilityVector,
    dist: OffspringDistribution,
    max_steps: int = DEFAULT_MAX_STEPS,
    tol: float = DEFAULT_TOL,
    eps_tail: float = DEFAULT_EPS_TAIL,
) -> Trajectory:
    """Apply H until successive states differ by less than ``tol`` (max norm)."""
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    hmap = compile_map(dist, p.k, eps_tail)
    states = [p]
    converged = False
    for _ in range(max_steps):
        nxt = hmap(states[-1])
        states.append(nxt)
        if _max_diff(nxt, states[-2]) < tol:
            converged = True
            break
    return Trajectory(tuple(states), converged, states[-1] if converged else None, hmap.tail_mass)


def minor_decay_ratios(traj: Trajectory, major_count: int) -> list[float]:
    """w_m = p_{i+1}(m) / p_1(m) along a canonical trajectory (i = major_count).

    Empty when there is no minor opinion.
    """
    first = traj.states[0]
    i = major_count
    if i >= first.k or first[i + 1] == 0:
        return []
    out = []
    for m, s in enumerate(traj.states):
        if s[1] <= 0:
            raise DomainError(f"major mass vanished at step {m}; persistence floor violated")
        out.append(float(s[i + 1]) / float(s[1]))
    return out


def decay_rate(ratios: Sequence[float], start: int = 5, stop: int = 30) -> float:
    """Geometric factor r from a least-squares fit log w_m ~ a + m log r."""
    ms = np.arange(len(ratios))[start:stop]
    ws = np.asarray(ratios, dtype=float)[start:stop]
    keep = ws > 0
    if keep.sum() < 2:
        raise DomainError("not enough positive ratios to fit a decay rate")
    slope = np.polyfit(ms[keep], np.log(ws[keep]), 1)[0]
    return float(np.exp(slope))


def _expand(x: np.ndarray, i: int) -> np.ndarray:
    """Reduced coordinates (x_1, x_{i+1}, ..., x_k) to a full state."""
    return np.concatenate(([1.0 - i * x[0] - x[1:].sum()], np.repeat(x[0], i), x[1:]))


def jacobian_fd(
    p: ProbabilityVector,
    dist: OffspringDistribution,
    h: float = 1e-6,
    major_count: Optional[int] = None,
    eps_tail: float = DEFAULT_EPS_TAIL,
) -> np.ndarray:
    """Finite-difference Jacobian of (H_1, H_{i+1}, ..., H_k) in the
    coordinates (x_1, x_{i+1}, ..., x_k), where x_1 is the common mass of
    the i tied major opinions.

    Central differences are used where both neighbours stay in the domain
    (all entries nonnegative); at a face such as x_j = 0 a second-order
    one-sided stencil is used instead.
    """
    if not isinstance(p, ProbabilityVector):
        p = ProbabilityVector(p)
    i = canonicalize(p).major_count if major_count is None else major_count
    hmap = compile_map(dist, p.k, eps_tail)
    x0 = np.array([float(p[1])] + [float(p[j]) for j in range(i + 1, p.k + 1)])
    idx = [0] + list(range(i, p.k))  # positions of H_1, H_{i+1}.. in opinions()

    def H(x):
        return hmap.opinions(_expand(x, i))[idx]

    def inside(x):
        return bool(np.all(_expand(x, i) >= -1e-15))

    dim = len(x0)
    jac = np.empty((dim, dim))
    for r in range(dim):
        e = np.zeros(dim)
        e[r] = h
        if inside(x0 + e) and inside(x0 - e):
            col = (H(x0 + e) - H(x0 - e)) / (2 * h)
        elif inside(x0 + e) and inside(x0 + 2 * e):
            col = (-3 * H(x0) + 4 * H(x0 + e) - H(x0 + 2 * e)) / (2 * h)
        elif inside(x0 - e) and inside(x0 - 2 * e):
            col = (3 * H(x0) - 4 * H(x0 - e) + H(x0 - 2 * e)) / (2 * h)
        else:
            raise DomainError(f"step h={h} leaves the domain in direction {r}")
        jac[:, r] = col
    return jac


def write_trajectory_csv(traj: Trajectory, fh: TextIO, digits: int = 17) -> None:
    k = traj.states[0].k
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["m"] + [f"p_{j}" for j in range(k + 1)])
    for m, s in enumerate(traj.states):
        w.writerow([m] + [format(float(v), f".{digits}g") for v in s])


def read_trajectory_csv(fh: TextIO) -> np.ndarray:
    """Rows of (p_0, ..., p_k) in step order."""
    rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    if header[0] != "m" or any(h != f"p_{j}" for j, h in enumerate(header[1:])):
        raise ValueError(f"unexpected trajectory header {header}")
    return np.array([[float(v) for v in r[1:]] for r in body])
