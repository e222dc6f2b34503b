"""Input validation helpers shared by the core modules, estimators and CLI."""

from __future__ import annotations

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def check_power_of_two(n: int, name: str = "n") -> int:
    n = int(n)
    if not is_power_of_two(n):
        raise ValueError(f"{name} must be a power of 2, got {n}")
    return n


def is_prime(a: int) -> bool:
    if a < 2:
        return False
    if a in (2, 3):
        return True
    if a % 2 == 0:
        return False
    d = 3
    while d * d <= a:
        if a % d == 0:
            return False
        d += 2
    return True


def check_prime(a: int, name: str = "a") -> int:
    a = int(a)
    if not is_prime(a):
        raise ValueError(f"{name} must be a prime >= 2, got {a}")
    return a


def check_symbols(x, a: int, n: int | None = None) -> np.ndarray:
    """Coerce to an integer array of symbols in [0, a), optionally of width n.

    Accepts a 1-d block or a 2-d batch of blocks; the shape is preserved.
    """
    arr = np.asarray(x)
    if arr.ndim not in (1, 2):
        raise ValueError(f"expected a 1-d or 2-d symbol array, got ndim={arr.ndim}")
    if not np.issubdtype(arr.dtype, np.integer):
        rounded = np.rint(arr)
        if not np.allclose(arr, rounded, atol=0):
            raise ValueError("symbol array must be integer-valued")
        arr = rounded
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= a):
        raise ValueError(f"symbols must lie in [0, {a})")
    if n is not None and arr.shape[-1] != n:
        raise ValueError(f"expected blocks of length {n}, got {arr.shape[-1]}")
    return arr


def check_seed(seed) -> int:
    seed = int(seed)
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    return seed
