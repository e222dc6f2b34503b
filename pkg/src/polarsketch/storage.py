"""Storage sets: which transformed components must be kept for lossless recovery.

A storage set collects the indices whose conditional entropy H(U_i | U^{i-1})
is at least delta.  Three constructions are provided: exact enumeration (small
blocks), a Monte-Carlo estimator of the conditional entropies (any block size,
deterministic for a given seed), and a binary erasure-channel proxy that upper
bounds the exact set.

File format (PSET, little-endian): magic "PSET", version byte 0x01, u16 a,
u32 n, f64 delta, u8 provenance tag (0 exact / 1 monte_carlo / 2 bec),
u32 count, then count u32 zero-based indices sorted ascending.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ._util import sample_blocks
from ._validation import check_power_of_two, check_seed
from .errors import FormatError, UnsupportedAlphabetError
from .measures import Dist, as_dist
from .polar import (
    bec_erasure_profile,
    exact_joint_conditionals,
    transform_array,
    true_symbol_conditionals,
)

_PSET_MAGIC = b"PSET"
_PSET_VERSION = 1
_PROVENANCE_TAGS = {"exact": 0, "monte_carlo": 1, "bec": 2}
_PROVENANCE_NAMES = {v: k for k, v in _PROVENANCE_TAGS.items()}

_MC_CHUNK = 512  # samples per sweep; results do not depend on this value


@dataclass(frozen=True)
class Provenance:
    kind: str
    samples: int | None = None
    seed: int | None = None
    guard: float | None = None

    def __post_init__(self):
        if self.kind not in _PROVENANCE_TAGS:
            raise ValueError(f"unknown provenance kind {self.kind!r}")


@dataclass(frozen=True)
class StorageSet:
    """Sorted index set S = {i : H(U_i | U^{i-1}) >= delta} with its origin."""

    n: int
    a: int
    delta: float
    indices: np.ndarray
    provenance: Provenance
    entropy_estimates: np.ndarray | None = None
    entropy_stderrs: np.ndarray | None = None

    def __post_init__(self):
        check_power_of_two(self.n)
        idx = np.asarray(self.indices, dtype=np.int64).copy()
        idx.sort()
        if idx.size:
            if idx[0] < 0 or idx[-1] >= self.n:
                raise ValueError("indices out of range")
            if np.any(np.diff(idx) == 0):
                raise ValueError("indices must be unique")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])

    @property
    def rate(self) -> float:
        return self.size / self.n

    def mask(self) -> np.ndarray:
        m = np.zeros(self.n, dtype=bool)
        m[self.indices] = True
        return m


def storage_set_exact(p, n: int, delta: float) -> StorageSet:
    """Exact storage set by full enumeration; limited by the oracle cap."""
    p = as_dist(p)
    h = exact_joint_conditionals(p, n)
    idx = np.flatnonzero(h >= delta)
    return StorageSet(
        n, p.a, float(delta), idx, Provenance("exact"),
        entropy_estimates=h, entropy_stderrs=np.zeros(n),
    )


def estimate_conditional_entropies_mc(p, n: int, samples: int, seed: int):
    """Monte-Carlo estimates of H(U_i | U^{i-1}) with standard errors.

    Each sample draws a block i.i.d. p from its own substream, transforms it
    and accumulates -log_a of the realized conditional probabilities, which is
    an unbiased estimator per index.  Output is bitwise reproducible for a
    given seed regardless of chunking.
    """
    p = as_dist(p)
    n = check_power_of_two(n)
    samples = int(samples)
    if samples < 1:
        raise ValueError("need at least one sample")
    seed = check_seed(seed)
    log_a = np.log(p.a)
    acc = np.zeros(n)
    acc_sq = np.zeros(n)
    for start in range(0, samples, _MC_CHUNK):
        count = min(_MC_CHUNK, samples - start)
        x = sample_blocks(p.probs, n, count, seed, first_index=start)
        u = transform_array(x, p.a)
        probs = true_symbol_conditionals(p, u)
        vals = -np.log(probs) / log_a
        # strict sample-index accumulation order: results are independent of
        # the chunk size
        for row in vals:
            acc += row
            acc_sq += row * row
    mean = acc / samples
    if samples > 1:
        var = np.maximum(acc_sq - samples * mean * mean, 0.0) / (samples - 1)
        stderr = np.sqrt(var / samples)
    else:
        stderr = np.zeros(n)
    return mean, stderr


def storage_set_mc(p, n: int, delta: float, samples: int, seed: int, guard: float = 2.0) -> StorageSet:
    """Monte-Carlo storage set, thresholding at delta - guard * stderr.

    The guard band keeps borderline indices, erring toward storing more; a
    larger guard always yields a superset.
    """
    p = as_dist(p)
    if guard < 0:
        raise ValueError("guard must be nonnegative")
    est, se = estimate_conditional_entropies_mc(p, n, samples, seed)
    idx = np.flatnonzero(est >= delta - guard * se)
    return StorageSet(
        n, p.a, float(delta), idx,
        Provenance("monte_carlo", samples=int(samples), seed=int(seed), guard=float(guard)),
        entropy_estimates=est, entropy_stderrs=se,
    )


def storage_set_bec(p, n: int, delta: float) -> StorageSet:
    """Erasure-channel proxy set for binary sources; contains the exact set.

    The source is mapped to its Bhattacharyya parameter z = 2 sqrt(p0 p1) and
    polarized through the erasure recursion; a synthesized erasure channel's
    entropy equals its erasure probability, so thresholding the leaf values at
    delta gives a conservative storage set.
    """
    p = as_dist(p)
    if p.a != 2:
        raise UnsupportedAlphabetError("the erasure proxy is defined for a = 2")
    z = bec_erasure_profile(2.0 * np.sqrt(p.probs[0] * p.probs[1]), n)
    idx = np.flatnonzero(z >= delta)
    return StorageSet(n, 2, float(delta), idx, Provenance("bec"), entropy_estimates=z)


def _check_compatible(sets):
    first = sets[0]
    for s in sets[1:]:
        if (s.n, s.a) != (first.n, first.a) or abs(s.delta - first.delta) > 1e-12:
            raise ValueError("storage sets must share n, a and delta")


def union_storage(sets) -> StorageSet:
    """Union of storage sets over the same block and threshold."""
    sets = list(sets)
    if not sets:
        raise ValueError("need at least one storage set")
    _check_compatible(sets)
    idx = np.unique(np.concatenate([s.indices for s in sets]))
    return StorageSet(sets[0].n, sets[0].a, sets[0].delta, idx, sets[0].provenance)


def is_nested(s1: StorageSet, s2: StorageSet) -> bool:
    """True when s1 is a subset of s2."""
    _check_compatible([s1, s2])
    return bool(np.isin(s1.indices, s2.indices).all())


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def encode_pset(sset: StorageSet) -> bytes:
    head = _PSET_MAGIC + struct.pack(
        "<BHIdBI",
        _PSET_VERSION,
        sset.a,
        sset.n,
        sset.delta,
        _PROVENANCE_TAGS[sset.provenance.kind],
        sset.size,
    )
    return head + sset.indices.astype("<u4").tobytes()


def decode_pset(data: bytes) -> StorageSet:
    if len(data) < 4 or data[:4] != _PSET_MAGIC:
        raise FormatError("bad PSET magic", offset=0)
    fixed = struct.calcsize("<BHIdBI")
    if len(data) < 4 + fixed:
        raise FormatError("truncated PSET header", offset=len(data))
    version, a, n, delta, tag, count = struct.unpack_from("<BHIdBI", data, 4)
    if version != _PSET_VERSION:
        raise FormatError(f"unsupported PSET version {version}", offset=4)
    if tag not in _PROVENANCE_NAMES:
        raise FormatError(f"unknown provenance tag {tag}", offset=4 + 2 + 4 + 8)
    body = data[4 + fixed :]
    if len(body) != 4 * count:
        raise FormatError(
            f"index payload holds {len(body)} bytes, expected {4 * count}",
            offset=4 + fixed,
        )
    idx = np.frombuffer(body, dtype="<u4").astype(np.int64)
    if idx.size and (np.any(np.diff(idx) <= 0) or idx[-1] >= n):
        raise FormatError("indices must be strictly increasing and within range", offset=4 + fixed)
    try:
        return StorageSet(n, a, delta, idx, Provenance(_PROVENANCE_NAMES[tag]))
    except ValueError as exc:
        raise FormatError(str(exc), offset=4) from exc


def save_pset(sset: StorageSet, path) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pset(sset))


def load_pset(path) -> StorageSet:
    with open(path, "rb") as fh:
        return decode_pset(fh.read())


def entropy_csv_lines(sset: StorageSet):
    """CSV export `index,entropy,stderr`, 12 significant digits."""
    if sset.entropy_estimates is None:
        raise ValueError("storage set carries no entropy estimates")
    se = sset.entropy_stderrs
    if se is None:
        se = np.zeros(sset.n)
    yield "index,entropy,stderr"
    for i in range(sset.n):
        yield f"{i},{sset.entropy_estimates[i]:.12g},{se[i]:.12g}"
