"""Monte Carlo estimate of the root opinion law, independent of the map H.

Trees are sampled explicitly: offspring counts level by level from the
root, i.i.d. leaf opinions at height m, then the majority rules are applied
bottom-up. Work is split into batches, each with its own ``SeedSequence``
child, so results depend only on (seed, samples, parallel_batches) and not
on how batches are scheduled across threads.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .offspring import OffspringDistribution, parse_distribution
from .simplex import ProbabilityVector, compile_map

CONFIDENCE = 0.99
MAX_HEIGHT = 64
NODE_BUDGET = 2_000_000


@dataclass(frozen=True)
class SimConfig:
    dist: OffspringDistribution
    height: int
    leaf_probs: ProbabilityVector
    samples: int
    seed: int
    parallel_batches: int = 1

    def __post_init__(self):
        if self.samples < 1:
            raise DomainError("samples must be >= 1")
        if not 0 <= self.height <= MAX_HEIGHT:
            raise DomainError(f"height must lie in [0, {MAX_HEIGHT}], got {self.height}")
        if self.parallel_batches < 1:
            raise DomainError("parallel_batches must be >= 1")
        if not isinstance(self.leaf_probs, ProbabilityVector):
            object.__setattr__(self, "leaf_probs", ProbabilityVector(self.leaf_probs))

    def as_dict(self) -> dict:
        return {
            "dist": self.dist.spec(),
            "height": self.height,
            "leaf_probs": [float(v) for v in self.leaf_probs],
            "samples": self.samples,
            "seed": self.seed,
            "parallel_batches": self.parallel_batches,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SimConfig":
        return cls(
            parse_distribution(d["dist"]),
            int(d["height"]),
            ProbabilityVector(d["leaf_probs"]),
            int(d["samples"]),
            int(d["seed"]),
            int(d.get("parallel_batches", 1)),
        )


@dataclass(frozen=True)
class SimResult:
    config: SimConfig
    counts: tuple[int, ...]
    estimates: tuple[float, ...]
    radii: tuple[float, ...]

    @property
    def seed(self) -> int:
        return self.config.seed

    def to_json(self) -> str:
        return json.dumps(
            {
                "config": self.config.as_dict(),
                "counts": list(self.counts),
                "estimates": list(self.estimates),
                "radii": list(self.radii),
                "seed": self.seed,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SimResult":
        d = json.loads(text)
        return cls(SimConfig.from_dict(d["config"]), tuple(d["counts"]), tuple(d["estimates"]), tuple(d["radii"]))


def _leaf_opinions(leaf_probs: ProbabilityVector, rng: np.random.Generator, size: int) -> np.ndarray:
    probs = leaf_probs.as_array()
    return rng.choice(len(probs), size=size, p=probs / probs.sum())


def _decide(tallies: np.ndarray) -> np.ndarray:
    """Parent opinions from rows of tallies (column 0 = undecided children)."""
    decided = tallies[:, 1:]
    top = decided.max(axis=1)
    n_top = (decided == top[:, None]).sum(axis=1)
    winner = decided.argmax(axis=1) + 1
    return np.where((top > 0) & (n_top == 1), winner, 0)


def sample_root(
    dist: OffspringDistribution,
    m: int,
    leaf_probs: ProbabilityVector,
    rng: np.random.Generator,
    max_height: int = MAX_HEIGHT,
) -> int:
    """Opinion of the root of one tree of height ``m`` (depth-first)."""
    if m > max_height:
        raise DomainError(f"height {m} exceeds the recursion budget {max_height}")
    if m == 0:
        return int(_leaf_opinions(leaf_probs, rng, 1)[0])
    n = int(dist.sample(rng, 1)[0])
    tallies = np.zeros(len(leaf_probs), dtype=np.int64)
    for _ in range(n):
        tallies[sample_root(dist, m - 1, leaf_probs, rng, max_height)] += 1
    return int(_decide(tallies[None, :])[0])


def sample_roots(
    dist: OffspringDistribution,
    m: int,
    leaf_probs: ProbabilityVector,
    rng: np.random.Generator,
    size: int,
) -> np.ndarray:
    """Root opinions of ``size`` independent trees, one numpy pass per level."""
    if m < 0:
        raise DomainError("height must be >= 0")
    parents = []  # (width of level l, parent index of each node at level l+1)
    width = size
    for _ in range(m):
        kids = dist.sample(rng, width)
        parents.append((width, np.repeat(np.arange(width), kids)))
        width = int(kids.sum())
    ops = _leaf_opinions(leaf_probs, rng, width)
    slots = len(leaf_probs)
    for n_par, par in reversed(parents):
        tallies = np.bincount(par * slots + ops, minlength=n_par * slots)
        ops = _decide(tallies.reshape(-1, slots))
    return ops


def _batch_counts(config: SimConfig, seq: np.random.SeedSequence, samples: int) -> np.ndarray:
    rng = np.random.default_rng(seq)
    slots = len(config.leaf_probs)
    per_tree = max(1.0, config.dist.mean) ** config.height
    chunk = max(1, int(NODE_BUDGET / per_tree))
    counts = np.zeros(slots, dtype=np.int64)
    done = 0
    while done < samples:
        size = min(chunk, samples - done)
        roots = sample_roots(config.dist, config.height, config.leaf_probs, rng, size)
        counts += np.bincount(roots, minlength=slots)
        done += size
    return counts


def confidence_radius(p_hat, samples: int, level: float = CONFIDENCE) -> np.ndarray:
    z = NormalDist().inv_cdf(0.5 + level / 2)
    p_hat = np.asarray(p_hat, dtype=float)
    return z * np.sqrt(p_hat * (1 - p_hat) / samples)


def estimate(config: SimConfig, workers: Optional[int] = None) -> SimResult:
    """Empirical root law with per-coordinate normal-approximation radii."""
    b = config.parallel_batches
    sizes = [config.samples // b + (i < config.samples % b) for i in range(b)]
    seqs = np.random.SeedSequence(config.seed).spawn(b)
    jobs = [(s, n) for s, n in zip(seqs, sizes) if n]
    if workers and workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda j: _batch_counts(config, *j), jobs))
    else:
        parts = [_batch_counts(config, *j) for j in jobs]
    counts = np.sum(parts, axis=0)
    est = counts / config.samples
    return SimResult(
        config,
        tuple(int(c) for c in counts),
        tuple(float(e) for e in est),
        tuple(float(r) for r in confidence_radius(est, config.samples)),
    )


def exact_root_law(config: SimConfig) -> ProbabilityVector:
    """H^m applied to the leaf law: the quantity the simulation estimates."""
    hmap = compile_map(config.dist, config.leaf_probs.k)
    p = config.leaf_probs
    for _ in range(config.height):
        p = hmap(p)
    return p


def compare_exact(result: SimResult) -> list[dict]:
    exact = exact_root_law(result.config)
    return [
        {
            "opinion": i,
            "exact": float(e),
            "estimate": est,
            "radius": r,
            "within": abs(est - float(e)) <= r,
        }
        for i, (e, est, r) in enumerate(zip(exact, result.estimates, result.radii))
    ]


def within_radius(result: SimResult, exact: Sequence[float]) -> bool:
    return all(abs(e - float(x)) <= r for e, x, r in zip(result.estimates, exact, result.radii))
