"""Deterministic seeding, sampling and small statistics helpers."""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(seed: int, index: int) -> int:
    """Derive a substream seed from (seed, index) with a splitmix64 finalizer.

    Fixed mixing function: substreams depend only on the pair, never on how
    work is chunked or scheduled, so results are reproducible for a given
    seed regardless of batching.
    """
    z = (int(seed) ^ ((int(index) + 1) * _GOLDEN)) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def substream(seed: int, index: int) -> np.random.Generator:
    """Per-sample generator keyed by the fixed 64-bit mixer."""
    return np.random.Generator(np.random.PCG64(mix64(seed, index)))


def sample_blocks(probs: np.ndarray, n: int, count: int, seed: int, first_index: int = 0) -> np.ndarray:
    """Draw `count` i.i.d. blocks of length n from a probability vector.

    Sample t uses its own substream mix64(seed, first_index + t), so a batch
    can be produced in any chunking and still be bitwise reproducible.
    """
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    out = np.empty((count, n), dtype=np.int64)
    for t in range(count):
        rng = substream(seed, first_index + t)
        out[t] = np.searchsorted(cdf, rng.random(n), side="right")
    return out


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval (center, radius) for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    radius = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return float(center), float(radius)


def bisect_min_true(predicate, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Smallest x in [lo, hi] with predicate(x) true, for monotone predicates.

    Requires predicate(hi) true; if predicate(lo) holds the bracket collapses
    to lo immediately.
    """
    if predicate(lo):
        return lo
    if not predicate(hi):
        raise ValueError("predicate is false at the upper bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            hi = mid
        else:
            lo = mid
    return hi


def bisect_max_true(predicate, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Largest x in [lo, hi] with predicate(x) true, for monotone predicates."""
    if predicate(hi):
        return hi
    if not predicate(lo):
        raise ValueError("predicate is false at the lower bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if predicate(mid):
            lo = mid
        else:
            hi = mid
    return lo
