"""Compound-source bounds: can one storage set serve two source laws at once?

The achievable storage rate for a pair (p, q) is bracketed by averaging, over
the 2^l synthesized sources at depth l, the larger of the two conditional
entropies (lower bound) and the larger of the two erasure proxies (binary
upper bound).  The ternary counterexample shows the lower bound can exceed
max(H(p), H(q)), so a single polar storage set cannot always run at the
compound-optimal rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnsupportedAlphabetError
from .measures import Dist, as_dist, entropy
from .polar import bec_erasure_profile, exact_joint_conditionals

CHAIN_RULE_TOL = 1e-8


@dataclass(frozen=True)
class SynthEntropyTree:
    """Conditional entropies of the 2^level synthesized sources, transform order."""

    a: int
    level: int
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float).copy()
        if vals.shape != (2 ** self.level,):
            raise ValueError("tree must hold 2**level values")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @property
    def mean(self) -> float:
        return float(self.values.mean())


def synthesized_entropies(p, level: int) -> SynthEntropyTree:
    """Exact H(U_i | U^{i-1}) for the depth-level transform (n = 2^level)."""
    p = as_dist(p)
    level = int(level)
    if level < 0:
        raise ValueError("level must be nonnegative")
    if level == 0:
        values = np.array([entropy(p, p.a)])
    else:
        values = exact_joint_conditionals(p, 2 ** level)
    tree = SynthEntropyTree(p.a, level, values)
    if abs(tree.mean - entropy(p, p.a)) > CHAIN_RULE_TOL:
        raise AssertionError("chain rule violated in synthesized entropies")
    return tree


def synthesized_informations(tree: SynthEntropyTree) -> np.ndarray:
    """Mutual informations 1 - H of the dual additive-noise channels."""
    return 1.0 - tree.values


def compound_lower_bound(p, q, level: int) -> float:
    """Average of the elementwise max of the two entropy trees.

    Non-decreasing in level and converging to the compound polar rate.
    """
    p, q = as_dist(p), as_dist(q)
    if p.a != q.a:
        raise ValueError("alphabet mismatch")
    tp = synthesized_entropies(p, level)
    tq = synthesized_entropies(q, level)
    return float(np.maximum(tp.values, tq.values).mean())


def compound_upper_bound_bec(p, q, level: int) -> float:
    """Binary upper bound from erasure proxies.

    Each source is replaced by the erasure channel matching its Bhattacharyya
    parameter; the per-leaf erasure probabilities are combined with max and
    averaged.  Max and the erasure recursion commute (both maps are monotone),
    so this equals the storage rate of the proxy set built from the larger
    root parameter.
    """
    p, q = as_dist(p), as_dist(q)
    if p.a != 2 or q.a != 2:
        raise UnsupportedAlphabetError("the erasure upper bound is defined for a = 2")
    n = 2 ** int(level)
    zp = bec_erasure_profile(2.0 * np.sqrt(p.probs[0] * p.probs[1]), n)
    zq = bec_erasure_profile(2.0 * np.sqrt(q.probs[0] * q.probs[1]), n)
    return float(np.maximum(zp, zq).mean())


@dataclass(frozen=True)
class CounterexampleReport:
    """The ternary pair for which the lower bound exceeds max(H(p), H(q))."""

    p: Dist
    q: Dist
    H_p: float
    H_q: float
    C: float
    lower_bound_l1: float
    exceeds: bool

    def lines(self):
        yield f"H(p)            = {self.H_p:.6f}"
        yield f"H(q)            = {self.H_q:.6f}"
        yield f"C = max         = {self.C:.6f}"
        yield f"lower bound l=1 = {self.lower_bound_l1:.6f}"
        yield f"strict excess   = {'yes' if self.exceeds else 'no'}"


_COUNTEREXAMPLE_P = (0.08, 0.36, 0.56)
_COUNTEREXAMPLE_Q = (0.11, 0.62, 0.27)


def counterexample_report(p=None, q=None) -> CounterexampleReport:
    """Evaluate the compound bound on the standard ternary counterexample pair."""
    p = as_dist(p if p is not None else _COUNTEREXAMPLE_P)
    q = as_dist(q if q is not None else _COUNTEREXAMPLE_Q)
    h_p = entropy(p, p.a)
    h_q = entropy(q, q.a)
    c = max(h_p, h_q)
    lb = compound_lower_bound(p, q, 1)
    return CounterexampleReport(p, q, h_p, h_q, c, lb, lb > c)
