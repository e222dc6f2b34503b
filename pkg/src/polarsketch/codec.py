"""Successive-cancellation decoding, the adaptive checker decoder, and the
universal binary compressor with its bit-exact container.

The compressor stores the transformed components on the storage set of the
entropy-R design distribution plus the last component as a checker; the
decompressor decodes under both binary distributions of entropy R and keeps
the model whose reconstruction matches the stored checker, which identifies
the side of the alphabet the source favours.

Wire format (PLRC, little-endian): magic "PLRC", version 0x01, u16 a, u32 n,
f64 R, f64 delta, u8 storage-set-mode (0 = embedded bitmap), ceil(n/8) bytes
bitmap (index i at byte i>>3, bit i&7), u32 stored-symbol count, stored
symbols packed at ceil(log2 a) bits each LSB-first, u16 checker count, u32
checker indices, packed checker symbols, and a trailing CRC-32 of all
preceding bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from ._util import mix64, sample_blocks, substream, wilson_interval
from ._validation import check_power_of_two, check_seed, check_symbols
from .errors import FormatError
from .measures import Dist, as_dist, binary_dist_with_entropy
from .polar import decode_with_stored, transform_array
from .storage import StorageSet, storage_set_exact, storage_set_mc
from .polar import ORACLE_CAP

_PLRC_MAGIC = b"PLRC"
_PLRC_VERSION = 1


@dataclass(frozen=True)
class ModelSet:
    """Ordered candidate source distributions for adaptive decoding."""

    models: tuple

    def __post_init__(self):
        models = tuple(as_dist(m) for m in self.models)
        if not models:
            raise ValueError("need at least one model")
        if len({m.a for m in models}) != 1:
            raise ValueError("models must share one alphabet")
        object.__setattr__(self, "models", models)

    @property
    def a(self) -> int:
        return self.models[0].a

    def __len__(self):
        return len(self.models)


@dataclass(frozen=True)
class CompressedBlock:
    """Bit-exact container for one compressed block."""

    a: int
    n: int
    rate_param: float
    delta: float
    storage_bitmap: np.ndarray
    stored_symbols: np.ndarray
    checker_indices: np.ndarray
    checker_symbols: np.ndarray

    def __post_init__(self):
        check_power_of_two(self.n)
        bitmap = np.asarray(self.storage_bitmap, dtype=bool).copy()
        if bitmap.shape != (self.n,):
            raise ValueError("bitmap length must equal n")
        stored = np.asarray(self.stored_symbols, dtype=np.int64).copy()
        if stored.shape[0] != int(bitmap.sum()):
            raise ValueError("stored symbol count must match the bitmap population")
        ch_idx = np.asarray(self.checker_indices, dtype=np.int64).copy()
        ch_sym = np.asarray(self.checker_symbols, dtype=np.int64).copy()
        if ch_idx.shape != ch_sym.shape:
            raise ValueError("checker indices and symbols must align")
        if ch_idx.size and bitmap[ch_idx].any():
            raise ValueError("checker indices must be disjoint from the bitmap")
        for arr in (bitmap, stored, ch_idx, ch_sym):
            arr.flags.writeable = False
        object.__setattr__(self, "storage_bitmap", bitmap)
        object.__setattr__(self, "stored_symbols", stored)
        object.__setattr__(self, "checker_indices", ch_idx)
        object.__setattr__(self, "checker_symbols", ch_sym)

    @property
    def rate(self) -> float:
        return (self.stored_symbols.size + self.checker_symbols.size) / self.n


def polar_dec(p, n: int, storage, u_s) -> np.ndarray:
    """Successive-cancellation reconstruction from the stored components.

    ``storage`` is a StorageSet or an index array; ``u_s`` holds the stored
    symbols in index order, either one block (|S|,) or a batch (B, |S|).
    Free indices are filled with the conditional argmax, ties broken toward
    the smallest symbol, and the source word u G_n^{-1} is returned with the
    batch shape of ``u_s``.
    """
    p = as_dist(p)
    n = check_power_of_two(n)
    indices = storage.indices if isinstance(storage, StorageSet) else np.asarray(storage, dtype=np.int64)
    u_s = np.asarray(u_s, dtype=np.int64)
    single = u_s.ndim == 1
    if single:
        u_s = u_s[None, :]
    if u_s.shape[1] != indices.shape[0]:
        raise ValueError(
            f"stored symbols ({u_s.shape[1]}) do not match the storage set ({indices.shape[0]})"
        )
    mask = np.zeros(n, dtype=bool)
    mask[indices] = True
    full = np.zeros((u_s.shape[0], n), dtype=np.int64)
    full[:, indices] = u_s
    _, x_hat = decode_with_stored(p, mask, full)
    return x_hat[0] if single else x_hat


def _decode_u(p, n, mask, full_values):
    u_hat, x_hat = decode_with_stored(p, mask, full_values)
    return u_hat, x_hat


def polar_dec_adapt(models, n: int, storage, checkers, u_s, u_t, seed: int = 0,
                    decode_with_union: bool = False):
    """Adaptive decoding: try every model, keep the one matching the checkers.

    Each model decodes from u[S]; candidates are scored by Hamming distance
    between their reconstruction on the checker set T (disjoint from S) and
    the stored u[T], with ties resolved uniformly by the seeded generator.
    Returns (x_hat, chosen_model_index).  With ``decode_with_union`` the
    winning model is re-run with the checkers pinned as well.
    """
    models = models if isinstance(models, ModelSet) else ModelSet(tuple(models))
    n = check_power_of_two(n)
    s_idx = storage.indices if isinstance(storage, StorageSet) else np.asarray(storage, dtype=np.int64)
    t_idx = np.asarray(checkers, dtype=np.int64)
    if np.intersect1d(s_idx, t_idx).size:
        raise ValueError("checker set must be disjoint from the storage set")
    u_s = np.asarray(u_s, dtype=np.int64)
    u_t = np.asarray(u_t, dtype=np.int64)
    single = u_s.ndim == 1
    if single:
        u_s = u_s[None, :]
        u_t = u_t[None, :] if u_t.ndim == 1 else u_t
    batch = u_s.shape[0]
    if u_t.shape != (batch, t_idx.size):
        raise ValueError("checker symbols must be shaped (batch, |T|)")

    mask = np.zeros(n, dtype=bool)
    mask[s_idx] = True
    full = np.zeros((batch, n), dtype=np.int64)
    full[:, s_idx] = u_s

    dists = np.empty((batch, len(models)), dtype=np.int64)
    recons = []
    for j, model in enumerate(models.models):
        u_hat, x_hat = _decode_u(model, n, mask, full)
        dists[:, j] = (u_hat[:, t_idx] != u_t).sum(axis=1) if t_idx.size else 0
        recons.append(x_hat)

    rng = substream(seed, 0)
    chosen = np.empty(batch, dtype=np.int64)
    for b in range(batch):
        best = np.flatnonzero(dists[b] == dists[b].min())
        chosen[b] = best[0] if best.size == 1 else best[rng.integers(best.size)]

    if decode_with_union:
        mask_union = mask.copy()
        mask_union[t_idx] = True
        full_union = full.copy()
        full_union[:, t_idx] = u_t
        out = np.empty((batch, n), dtype=np.int64)
        for j, model in enumerate(models.models):
            sel = chosen == j
            if sel.any():
                _, x_hat = _decode_u(model, n, mask_union, full_union[sel])
                out[sel] = x_hat
    else:
        out = np.empty((batch, n), dtype=np.int64)
        for j in range(len(models)):
            sel = chosen == j
            if sel.any():
                out[sel] = recons[j][sel]

    if single:
        return out[0], int(chosen[0])
    return out, chosen


# ---------------------------------------------------------------------------
# Universal binary compression
# ---------------------------------------------------------------------------

def design_storage_set(R: float, n: int, delta: float, samples: int = 2000,
                       guard: float = 2.0, seed: int = 0) -> StorageSet:
    """Storage set of the entropy-R binary design distribution p_0(R)."""
    p0 = binary_dist_with_entropy(R, 0)
    if 2 ** n <= ORACLE_CAP:
        return storage_set_exact(p0, n, delta)
    return storage_set_mc(p0, n, delta, samples, seed, guard)


def universal_compress(x, R: float, delta: float, storage: StorageSet | None = None,
                       samples: int = 2000, guard: float = 2.0, seed: int = 0) -> CompressedBlock:
    """Compress a binary block at design rate R without knowing its law.

    Stores u = x G_n on the storage set of p_0(R) plus the last transformed
    component as a checker (the side discriminator).  When the storage set
    already contains the last index, the checker list stays empty and the
    index is simply part of the stored payload.
    """
    x = check_symbols(x, 2)
    if x.ndim != 1:
        raise ValueError("compress one block at a time")
    n = check_power_of_two(x.shape[0])
    if not 0.0 <= R <= 1.0:
        raise ValueError("R must be in [0, 1]")
    if storage is None:
        storage = design_storage_set(R, n, delta, samples, guard, seed)
    if storage.n != n or storage.a != 2:
        raise ValueError("storage set does not match the block")
    u = transform_array(x, 2)
    bitmap = storage.mask()
    checker = np.array([], dtype=np.int64) if bitmap[n - 1] else np.array([n - 1])
    return CompressedBlock(
        a=2, n=n, rate_param=float(R), delta=float(delta),
        storage_bitmap=bitmap,
        stored_symbols=u[storage.indices],
        checker_indices=checker,
        checker_symbols=u[checker],
    )


def universal_decompress(block: CompressedBlock, seed: int = 0, return_model: bool = False):
    """Reconstruct a universally compressed block.

    Runs the adaptive decoder with the two entropy-R design distributions and
    the stored checker; returns the bit block, optionally with the index of
    the model that matched (0: mass on symbol 0, 1: mirrored).
    """
    if block.a != 2:
        raise ValueError("universal decompression is defined for binary blocks")
    models = ModelSet((
        binary_dist_with_entropy(block.rate_param, 0),
        binary_dist_with_entropy(block.rate_param, 1),
    ))
    indices = np.flatnonzero(block.storage_bitmap)
    x_hat, chosen = polar_dec_adapt(
        models, block.n, indices, block.checker_indices,
        block.stored_symbols, block.checker_symbols, seed=seed,
    )
    if return_model:
        return x_hat, chosen
    return x_hat


# ---------------------------------------------------------------------------
# Wire format
# ---------------------------------------------------------------------------

def _symbol_bits(a: int) -> int:
    return max(1, int(np.ceil(np.log2(a))))


def _pack_symbols(symbols: np.ndarray, a: int) -> bytes:
    bits = _symbol_bits(a)
    if symbols.size == 0:
        return b""
    expanded = (symbols[:, None] >> np.arange(bits)) & 1
    return np.packbits(expanded.astype(np.uint8).ravel(), bitorder="little").tobytes()


def _unpack_symbols(data: bytes, count: int, a: int, offset: int) -> np.ndarray:
    bits = _symbol_bits(a)
    need = (count * bits + 7) // 8
    if len(data) < need:
        raise FormatError("truncated symbol payload", offset=offset)
    raw = np.unpackbits(np.frombuffer(data[:need], dtype=np.uint8), bitorder="little")
    raw = raw[: count * bits].reshape(count, bits)
    symbols = (raw.astype(np.int64) << np.arange(bits)).sum(axis=1)
    if symbols.size and symbols.max() >= a:
        raise FormatError("symbol value out of range", offset=offset)
    return symbols


def encode_block(block: CompressedBlock) -> bytes:
    out = bytearray()
    out += _PLRC_MAGIC
    out += struct.pack("<BHIddB", _PLRC_VERSION, block.a, block.n,
                       block.rate_param, block.delta, 0)
    out += np.packbits(block.storage_bitmap.astype(np.uint8), bitorder="little").tobytes()
    out += struct.pack("<I", block.stored_symbols.size)
    out += _pack_symbols(block.stored_symbols, block.a)
    out += struct.pack("<H", block.checker_indices.size)
    out += block.checker_indices.astype("<u4").tobytes()
    out += _pack_symbols(block.checker_symbols, block.a)
    out += struct.pack("<I", zlib.crc32(bytes(out)))
    return bytes(out)


def decode_block(data: bytes) -> CompressedBlock:
    if len(data) < 4 or data[:4] != _PLRC_MAGIC:
        raise FormatError("bad PLRC magic", offset=0)
    if len(data) < 8:
        raise FormatError("truncated container", offset=len(data))
    crc_stored = struct.unpack_from("<I", data, len(data) - 4)[0]
    if zlib.crc32(data[:-4]) != crc_stored:
        raise FormatError("checksum mismatch", offset=len(data) - 4)
    pos = 4
    head_fmt = "<BHIddB"
    head_len = struct.calcsize(head_fmt)
    if len(data) - 4 < pos + head_len:
        raise FormatError("truncated header", offset=pos)
    version, a, n, rate_param, delta, mode = struct.unpack_from(head_fmt, data, pos)
    pos += head_len
    if version != _PLRC_VERSION:
        raise FormatError(f"unsupported version {version}", offset=4)
    if mode != 0:
        raise FormatError(f"unknown storage-set mode {mode}", offset=pos - 1)
    if a < 2 or n < 1 or n & (n - 1):
        raise FormatError("invalid alphabet or block length", offset=5)
    bitmap_len = (n + 7) // 8
    if len(data) - 4 < pos + bitmap_len + 4:
        raise FormatError("truncated bitmap", offset=pos)
    bitmap = np.unpackbits(
        np.frombuffer(data[pos : pos + bitmap_len], dtype=np.uint8), bitorder="little"
    )[:n].astype(bool)
    pos += bitmap_len
    (stored_count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    if stored_count != int(bitmap.sum()):
        raise FormatError("stored-symbol count disagrees with the bitmap", offset=pos - 4)
    stored = _unpack_symbols(data[pos:-4], stored_count, a, pos)
    pos += (stored_count * _symbol_bits(a) + 7) // 8
    if len(data) - 4 < pos + 2:
        raise FormatError("truncated checker count", offset=pos)
    (checker_count,) = struct.unpack_from("<H", data, pos)
    pos += 2
    if len(data) - 4 < pos + 4 * checker_count:
        raise FormatError("truncated checker indices", offset=pos)
    ch_idx = np.frombuffer(data[pos : pos + 4 * checker_count], dtype="<u4").astype(np.int64)
    pos += 4 * checker_count
    ch_sym = _unpack_symbols(data[pos:-4], checker_count, a, pos)
    pos += (checker_count * _symbol_bits(a) + 7) // 8
    if pos != len(data) - 4:
        raise FormatError("trailing bytes in container", offset=pos)
    if ch_idx.size and (ch_idx.max() >= n or bitmap[ch_idx].any()):
        raise FormatError("checker indices out of range or overlapping the bitmap", offset=pos)
    try:
        return CompressedBlock(a, n, rate_param, delta, bitmap, stored, ch_idx, ch_sym)
    except ValueError as exc:
        raise FormatError(str(exc), offset=4) from exc


# ---------------------------------------------------------------------------
# Mismatch harness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MismatchReport:
    """Empirical P{X != X_hat} when decoding p2-data with a p1-designed code."""

    error_rate: float
    ci_radius: float
    errors: int
    trials: int
    storage_rate: float


def estimate_mismatch_error(p1, p2, n: int, delta: float, trials: int, seed: int,
                            samples: int = 2000, guard: float = 2.0) -> MismatchReport:
    """Draw i.i.d.-p2 blocks, store them on p1's set, decode with p1.

    The storage set is exact when a**n is under the oracle cap, Monte-Carlo
    (with its own substream of ``seed``) otherwise.  The confidence radius is
    a 95% Wilson interval.  Reusing a seed reuses the same source blocks, so
    two calls with common randomness compare decoders on identical data.
    """
    p1, p2 = as_dist(p1), as_dist(p2)
    if p1.a != p2.a:
        raise ValueError("alphabet mismatch")
    n = check_power_of_two(n)
    seed = check_seed(seed)
    trials = int(trials)
    if p1.a ** n <= ORACLE_CAP:
        storage = storage_set_exact(p1, n, delta)
    else:
        storage = storage_set_mc(p1, n, delta, samples, mix64(seed, 0), guard)
    x = sample_blocks(p2.probs, n, trials, mix64(seed, 1))
    u = transform_array(x, p1.a)
    x_hat = polar_dec(p1, n, storage, u[:, storage.indices])
    errors = int((x_hat != x).any(axis=1).sum())
    _, radius = wilson_interval(errors, trials)
    return MismatchReport(errors / trials, radius, errors, trials, storage.rate)
