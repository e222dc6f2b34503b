"""The polar transform over Z_a and its successive-cancellation recursion.

The transform is the Kronecker power of the kernel [[1, 0], [1, 1]] applied to
row vectors, without any bit-reversal permutation: index i always means the
i-th output of the pure Kronecker-power transform, and indices are 0-based
throughout the package.

Decoding machinery works on probability-domain messages over Z_a and is
batched: all message arrays have shape (batch, block, a) and the control flow
of a successive-cancellation sweep is data independent, so a batch of blocks
costs the same number of array operations as a single block.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import check_power_of_two, check_prime, check_symbols
from .errors import ResourceLimitError
from .measures import Dist, as_dist

ORACLE_CAP = 2 ** 20  # largest a**n enumerated exactly


@dataclass(frozen=True)
class SymbolBlock:
    """A length-n word over Z_a with n a power of two."""

    a: int
    symbols: np.ndarray

    def __post_init__(self):
        check_prime(self.a)
        sym = check_symbols(self.symbols, self.a)
        if sym.ndim != 1:
            raise ValueError("SymbolBlock holds a single 1-d word")
        check_power_of_two(sym.shape[0])
        sym.flags.writeable = False
        object.__setattr__(self, "symbols", sym)

    @property
    def n(self) -> int:
        return int(self.symbols.shape[0])


@dataclass(frozen=True)
class ScMessage:
    """A conditional distribution over the next transformed symbol."""

    a: int
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).copy()
        if p.shape != (self.a,):
            raise ValueError("message length must equal a")
        if p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("message must be a normalized probability vector")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)


def transform_array(x: np.ndarray, a: int) -> np.ndarray:
    """Apply u = x G_n along the last axis of an integer array."""
    arr = np.array(x, dtype=np.int64)
    n = arr.shape[-1]
    check_power_of_two(n)
    half = n // 2
    while half >= 1:
        view = arr.reshape(arr.shape[:-1] + (-1, 2, half))
        view[..., 0, :] = (view[..., 0, :] + view[..., 1, :]) % a
        half //= 2
    return arr


def inverse_array(u: np.ndarray, a: int) -> np.ndarray:
    """Invert ``transform_array`` (same map for a = 2)."""
    arr = np.array(u, dtype=np.int64)
    n = arr.shape[-1]
    check_power_of_two(n)
    half = 1
    while half < n:
        view = arr.reshape(arr.shape[:-1] + (-1, 2, half))
        view[..., 0, :] = (view[..., 0, :] - view[..., 1, :]) % a
        half *= 2
    return arr


def polar_transform(x: SymbolBlock) -> SymbolBlock:
    """u = x G_n with G_n the log2(n)-fold Kronecker power of [[1,0],[1,1]]."""
    return SymbolBlock(x.a, transform_array(x.symbols, x.a))


def polar_inverse(u: SymbolBlock) -> SymbolBlock:
    """x such that polar_transform(x) = u; identical to the transform when a = 2."""
    return SymbolBlock(u.a, inverse_array(u.symbols, u.a))


# ---------------------------------------------------------------------------
# Message combines
# ---------------------------------------------------------------------------

_CONV_IDX: dict[int, np.ndarray] = {}


def _conv_index(a: int) -> np.ndarray:
    idx = _CONV_IDX.get(a)
    if idx is None:
        idx = (np.arange(a)[:, None] - np.arange(a)[None, :]) % a
        _CONV_IDX[a] = idx
    return idx


def _combine_check(left: np.ndarray, right: np.ndarray, a: int) -> np.ndarray:
    # Message of A_j = L_j + R_j: circular convolution along the symbol axis.
    if a == 2:
        l0, l1 = left[..., 0], left[..., 1]
        r0, r1 = right[..., 0], right[..., 1]
        out = np.empty_like(left)
        np.multiply(l0, r0, out=out[..., 0])
        out[..., 0] += l1 * r1
        np.multiply(l0, r1, out=out[..., 1])
        out[..., 1] += l1 * r0
    else:
        out = np.einsum("...sb,...b->...s", left[..., _conv_index(a)], right)
    return out / out.sum(axis=-1, keepdims=True)


def _combine_var(left: np.ndarray, right: np.ndarray, decided: np.ndarray, a: int) -> np.ndarray:
    # Message of R_j once A_j is decided: right(b) * left(decided - b), renormalized.
    if a == 2:
        flip = decided.astype(bool)
        out = np.empty_like(right)
        out[..., 0] = right[..., 0] * np.where(flip, left[..., 1], left[..., 0])
        out[..., 1] = right[..., 1] * np.where(flip, left[..., 0], left[..., 1])
    else:
        shift = (decided[..., None] - np.arange(a)) % a
        out = right * np.take_along_axis(left, shift, axis=-1)
    total = out.sum(axis=-1, keepdims=True)
    dead = total <= 0.0
    if np.any(dead):
        # Impossible prefix under this model (zero-probability symbol seen):
        # keep decoding with a flat message rather than dividing by zero.
        out = np.where(dead, 1.0, out)
        total = out.sum(axis=-1, keepdims=True)
    return out / total


def _sc_run(msgs: np.ndarray, offset: int, handler, a: int):
    """Depth-first successive-cancellation sweep.

    ``handler(i, probs)`` receives the conditional message (batch, a) for
    transformed index i and returns the (batch,) symbols to commit; it is
    called exactly once per index, left to right.  Returns the committed
    u-block and the reconstructed source block, both (batch, m).
    """
    batch, m, _ = msgs.shape
    if m == 1:
        u = handler(offset, msgs[:, 0, :])
        u = np.asarray(u, dtype=np.int64).reshape(batch, 1)
        return u, u.copy()
    half = m // 2
    left = _combine_check(msgs[:, :half, :], msgs[:, half:, :], a)
    u_left, x_sum = _sc_run(left, offset, handler, a)
    right = _combine_var(msgs[:, :half, :], msgs[:, half:, :], x_sum, a)
    u_right, x_right = _sc_run(right, offset + half, handler, a)
    x = np.concatenate([(x_sum - x_right) % a, x_right], axis=1)
    return np.concatenate([u_left, u_right], axis=1), x


def _leaf_messages(p: Dist, n: int, batch: int) -> np.ndarray:
    return np.broadcast_to(p.probs, (batch, n, p.a)).copy()


def decode_with_stored(p, stored_mask: np.ndarray, stored_values: np.ndarray):
    """Successive-cancellation decoding with pinned components.

    ``stored_mask`` is a length-n boolean array; ``stored_values`` has shape
    (batch, n) and is read only where the mask is set.  Free indices are
    decided by argmax with ties broken toward the smallest symbol.  Returns
    (u_hat, x_hat), both (batch, n).
    """
    p = as_dist(p)
    stored_mask = np.asarray(stored_mask, dtype=bool)
    n = stored_mask.shape[0]
    check_power_of_two(n)
    stored_values = np.asarray(stored_values, dtype=np.int64)
    if stored_values.ndim == 1:
        stored_values = stored_values[None, :]
    batch = stored_values.shape[0]

    def handler(i, probs):
        if stored_mask[i]:
            return stored_values[:, i]
        return np.argmax(probs, axis=-1)

    return _sc_run(_leaf_messages(p, n, batch), 0, handler, p.a)


def true_symbol_conditionals(p, u: np.ndarray) -> np.ndarray:
    """P(U_i = u_i | U^{i-1} = u^{i-1}) for every index of every block.

    ``u`` has shape (batch, n) and holds transformed words; the sweep follows
    the true prefixes, so the result (batch, n) is exact and the whole batch
    is processed with a fixed number of array operations.
    """
    p = as_dist(p)
    u = np.asarray(u, dtype=np.int64)
    single = u.ndim == 1
    if single:
        u = u[None, :]
    batch, n = u.shape
    check_power_of_two(n)
    out = np.empty((batch, n), dtype=float)

    def handler(i, probs):
        out[:, i] = np.take_along_axis(probs, u[:, i : i + 1], axis=-1)[:, 0]
        return u[:, i]

    _sc_run(_leaf_messages(p, n, batch), 0, handler, p.a)
    return out[0] if single else out


def conditional_profile(p, u: np.ndarray) -> np.ndarray:
    """Full conditional laws P(U_i = . | u^{i-1}) along true prefixes, (batch, n, a)."""
    p = as_dist(p)
    u = np.asarray(u, dtype=np.int64)
    if u.ndim == 1:
        u = u[None, :]
    batch, n = u.shape
    check_power_of_two(n)
    out = np.empty((batch, n, p.a), dtype=float)

    def handler(i, probs):
        out[:, i, :] = probs
        return u[:, i]

    _sc_run(_leaf_messages(p, n, batch), 0, handler, p.a)
    return out


def sc_conditional(p, n: int, decided, i: int, workspace: dict | None = None) -> ScMessage:
    """Exact conditional law of U_i given U^{i-1} = decided, X^n i.i.d. p.

    ``i`` is 0-based and ``decided`` must hold the i previously committed
    symbols.  The computation walks one root-to-leaf path of the combine
    tree: the check branch convolves sibling messages, the variable branch
    conditions on the inverse transform of the decided half.  A full sweep
    over all i costs O(a^2 n log n) when done through the batched engine;
    this reference form costs O(a^2 n) per call.  ``workspace`` is an
    optional scratch dict reused across calls.
    """
    p = as_dist(p)
    n = check_power_of_two(n)
    decided = np.asarray(decided, dtype=np.int64)
    a = p.a
    if not 0 <= i < n:
        raise ValueError(f"index must be in [0, {n}), got {i}")
    if decided.shape != (i,):
        raise ValueError(f"decided prefix must have length {i}, got {decided.shape}")
    if workspace is None:
        workspace = {}

    def walk(msgs: np.ndarray, dec: np.ndarray, idx: int) -> np.ndarray:
        m = msgs.shape[0]
        if m == 1:
            v = msgs[0]
            return v / v.sum()
        half = m // 2
        if idx < half:
            left = _combine_check(msgs[None, :half, :], msgs[None, half:, :], a)[0]
            return walk(left, dec[: min(idx, half)], idx)
        x_sum = inverse_array(dec[:half], a)
        right = _combine_var(msgs[None, :half, :], msgs[None, half:, :], x_sum[None, :], a)[0]
        return walk(right, dec[half:], idx - half)

    msgs = workspace.get(("leaf", a, n))
    if msgs is None:
        msgs = workspace[("leaf", a, n)] = np.empty((n, a))
    msgs[:] = p.probs
    return ScMessage(a, walk(msgs, decided, i))


# ---------------------------------------------------------------------------
# Exact enumeration oracle
# ---------------------------------------------------------------------------

def exact_joint_law(p, n: int) -> np.ndarray:
    """Joint law of U^n as a flat vector indexed lexicographically by u.

    Enumerates all a**n words (u_0 is the most significant digit), maps each
    back to its source word and multiplies the source probabilities.  Subject
    to a**n <= ORACLE_CAP.
    """
    p = as_dist(p)
    n = check_power_of_two(n)
    a = p.a
    total = a ** n
    if total > ORACLE_CAP:
        raise ResourceLimitError(
            f"a**n = {total} exceeds the exact-enumeration cap {ORACLE_CAP}"
        )
    words = np.empty((total, n), dtype=np.int16)
    ar = np.arange(total)
    for j in range(n):
        words[:, j] = (ar // a ** (n - 1 - j)) % a
    x = inverse_array(words, a)
    w = np.ones(total, dtype=float)
    for j in range(n):
        w *= p.probs[x[:, j]]
    return w


def exact_joint_conditionals(p, n: int) -> np.ndarray:
    """Exact conditional entropies H(U_i | U^{i-1}), base a, for i = 0..n-1."""
    p = as_dist(p)
    a = p.a
    w = exact_joint_law(p, n)
    log_a = np.log(a)

    def prefix_entropy(i: int) -> float:
        if i == 0:
            return 0.0
        marg = w.reshape(a ** i, -1).sum(axis=1)
        nz = marg[marg > 0]
        return float(-(nz * np.log(nz)).sum() / log_a)

    h = np.array([prefix_entropy(i) for i in range(n + 1)])
    return np.maximum(np.diff(h), 0.0)


def bec_erasure_profile(z_root: float, n: int) -> np.ndarray:
    """Erasure parameters of the n synthesized erasure channels, transform order.

    One stage maps z to (2z - z^2, z^2); the minus child lands at index 2r,
    the plus child at 2r + 1, matching the no-bit-reversal index convention
    (index 0 ends up least reliable, index n-1 most).
    """
    n = check_power_of_two(n)
    z = np.array([float(z_root)])
    while z.shape[0] < n:
        nxt = np.empty(2 * z.shape[0])
        nxt[0::2] = 2.0 * z - z * z
        nxt[1::2] = z * z
        z = nxt
    return z
