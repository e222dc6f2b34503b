"""Deterministic sketching of sparse words over Z_a and exact recovery.

The measurement matrix is the polar transform with rows deleted: y = (x G_n)
restricted to a storage set built for a worst-case decoding distribution.
Design choices for that distribution:

* ``known_dist``: the spike with off-mass epsilon (the signal law is known),
* ``pcp``:        the spike with off-mass eta(a, epsilon), which every
                  epsilon-sparse source dominates along convolutional paths,
* ``brut_A`` / ``brut_B``: the spike found by the empirical containment scan
  ``brut_univ_sketching``, usually far smaller than eta for moderate epsilon.

Recovery is plain successive-cancellation decoding under the design spike;
the patched variant decodes under a discretized model list with checkers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ._util import bisect_min_true, mix64
from ._validation import check_power_of_two, check_prime, check_seed, check_symbols
from .codec import ModelSet, polar_dec, polar_dec_adapt
from .errors import UnsupportedAlphabetError
from .measures import Dist, as_dist, entropy, eta, make_spike
from .polar import ORACLE_CAP, transform_array
from .storage import (
    StorageSet,
    decode_pset,
    encode_pset,
    is_nested,
    storage_set_exact,
    storage_set_mc,
)

METHODS = ("known_dist", "pcp", "brut_A", "brut_B")


@dataclass(frozen=True)
class SketchSpec:
    """Implicit m x n measurement matrix: keep the storage-set rows of G_n."""

    a: int
    n: int
    epsilon: float
    delta: float
    method: str
    decode_dist: Dist
    storage: StorageSet
    eta_mass: float
    seed: int

    @property
    def m(self) -> int:
        return self.storage.size

    @property
    def measurement_rate(self) -> float:
        return self.m / self.n


@dataclass(frozen=True)
class BrutResult:
    """Outcome of the universal containment scan."""

    eta_star: float
    variant: str
    probes: tuple
    steps: int
    fell_back: bool


def _storage_for(dist: Dist, n: int, delta: float, samples: int, guard: float, seed: int) -> StorageSet:
    if dist.a ** n <= ORACLE_CAP:
        return storage_set_exact(dist, n, delta)
    return storage_set_mc(dist, n, delta, samples, seed, guard)


def hull_face_grid(a: int, epsilon: float, grid: int, reduce_symmetry: bool = True):
    """Discretize the hull of the sparse extremes {(1-eps, w): sum w = eps}.

    Compositions of epsilon into a-1 parts with ``grid`` steps; when
    ``reduce_symmetry`` holds, points equivalent under symbol negation
    (x -> -x mod a), which preserves storage sets, are emitted once.
    """
    check_prime(a)
    if grid < 1:
        raise ValueError("grid must be at least 1")
    points = []
    seen = set()

    def compositions(total, parts):
        if parts == 1:
            yield (total,)
            return
        for head in range(total + 1):
            for tail in compositions(total - head, parts - 1):
                yield (head,) + tail

    for comp in compositions(grid, a - 1):
        w = np.array(comp, dtype=float) * (epsilon / grid)
        probs = np.concatenate([[1.0 - epsilon], w])
        if reduce_symmetry:
            mirrored = tuple(np.round(probs[(-np.arange(a)) % a], 15))
            key = min(tuple(np.round(probs, 15)), mirrored)
            if key in seen:
                continue
            seen.add(key)
        points.append(Dist(a, probs))
    return points


def brut_univ_sketching(a: int, epsilon: float, n: int, delta: float, variant: str = "B",
                        eta_step: float | None = None, hull_grid: int = 4,
                        samples: int = 1500, guard: float = 2.0, seed: int = 0,
                        dichotomic: bool = False) -> BrutResult:
    """Scan spike masses upward until the spike's storage set absorbs the probes.

    Variant B probes the single extreme (1-eps, eps, 0, ...); Variant A probes
    a grid of the whole extreme-point hull.  Probe and candidate sets are
    computed with matched (delta, samples, guard, seed).  The scan starts at
    eta = epsilon and is capped by eta(a, epsilon), where containment is
    guaranteed in exact arithmetic; reaching the cap counts as a fallback.
    ``dichotomic`` switches to bisection, which assumes containment is
    monotone in the spike mass (true for exact sets).
    """
    check_prime(a)
    n = check_power_of_two(n)
    seed = check_seed(seed)
    if variant not in ("A", "B"):
        raise ValueError("variant must be 'A' or 'B'")
    eta_cap = eta(a, epsilon)
    if a == 2:
        return BrutResult(epsilon, variant, (make_spike(2, 0, epsilon),), 0, False)

    if variant == "B":
        probs = np.zeros(a)
        probs[0] = 1.0 - epsilon
        probs[1] = epsilon
        probes = (Dist(a, probs),)
    else:
        probes = tuple(hull_face_grid(a, epsilon, hull_grid))

    probe_sets = [_storage_for(q, n, delta, samples, guard, seed) for q in probes]

    def contained(eta_val: float) -> bool:
        cand = _storage_for(make_spike(a, 0, eta_val), n, delta, samples, guard, seed)
        return all(is_nested(ps, cand) for ps in probe_sets)

    if eta_step is None:
        eta_step = max((eta_cap - epsilon) / 32.0, 1e-6)
    steps = 0
    if dichotomic:
        if contained(epsilon):
            return BrutResult(epsilon, variant, probes, 1, False)
        if not contained(eta_cap):
            return BrutResult(eta_cap, variant, probes, 2, True)
        val = bisect_min_true(contained, epsilon, eta_cap, tol=max(eta_step / 4, 1e-9))
        return BrutResult(float(val), variant, probes, steps, False)

    eta_val = epsilon
    while eta_val < eta_cap:
        steps += 1
        if contained(eta_val):
            return BrutResult(float(eta_val), variant, probes, steps, False)
        eta_val += eta_step
    return BrutResult(float(eta_cap), variant, probes, steps, True)


def build_sketch_spec(a: int, epsilon: float, n: int, delta: float, method: str = "pcp",
                      samples: int = 2000, guard: float = 2.0, seed: int = 0,
                      eta_step: float | None = None, hull_grid: int = 4) -> SketchSpec:
    """Construct the implicit measurement matrix for epsilon-sparse signals."""
    check_prime(a)
    n = check_power_of_two(n)
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}")
    if method == "known_dist":
        eta_mass = float(epsilon)
    elif method == "pcp":
        eta_mass = eta(a, epsilon)
    else:
        eta_mass = brut_univ_sketching(
            a, epsilon, n, delta, variant=method[-1], eta_step=eta_step,
            hull_grid=hull_grid, samples=samples, guard=guard, seed=seed,
        ).eta_star
    decode_dist = make_spike(a, 0, eta_mass)
    storage = _storage_for(decode_dist, n, delta, samples, guard, seed)
    return SketchSpec(a, n, float(epsilon), float(delta), method, decode_dist,
                      storage, eta_mass, seed)


def sketch(spec: SketchSpec, x) -> np.ndarray:
    """Measure: y = (x G_n) restricted to the storage set, over Z_a."""
    x = check_symbols(x, spec.a, spec.n)
    u = transform_array(x, spec.a)
    return u[..., spec.storage.indices]


def recover(spec: SketchSpec, y) -> np.ndarray:
    """Exact reconstruction attempt from measurements via polar decoding."""
    y = check_symbols(y, spec.a)
    if y.shape[-1] != spec.m:
        raise ValueError(f"expected {spec.m} measurements, got {y.shape[-1]}")
    return polar_dec(spec.decode_dist, spec.n, spec.storage, y)


def measurement_count_formula(a: int, epsilon: float, n: int) -> float:
    """Predicted measurement count n H(p_epsilon) in base-a symbols.

    Evaluated in closed form, n [ (1-e) log_a 1/(1-e) + e log_a (a-1)/e ],
    so arbitrarily large alphabets are fine.  With k = n epsilon this is
    k log_a((a-1) n / k) plus a vanishing term, i.e. about 1.44 k ln(n/k)
    bits for a = 2 and at most 2k symbols for very large a.
    """
    check_prime(a)
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must be in (0, 1)")
    log_a = np.log(a)
    h = (1 - epsilon) * np.log(1 / (1 - epsilon)) / log_a
    h += epsilon * np.log((a - 1) / epsilon) / log_a
    return float(n * h)


# ---------------------------------------------------------------------------
# Patched universal recovery
# ---------------------------------------------------------------------------

def checker_indices_for(spec: SketchSpec, count: int | None = None) -> np.ndarray:
    """Lowest-entropy indices outside the storage set, default ceil(sqrt(n)) many."""
    if spec.storage.entropy_estimates is None:
        raise ValueError("storage set carries no entropy estimates")
    if count is None:
        count = int(np.ceil(np.sqrt(spec.n)))
    free = np.setdiff1d(np.arange(spec.n), spec.storage.indices)
    order = np.argsort(spec.storage.entropy_estimates[free], kind="stable")
    return np.sort(free[order[:count]])


def sketch_with_checkers(spec: SketchSpec, checkers, x):
    """Measurements on the storage set plus stored checker symbols."""
    x = check_symbols(x, spec.a, spec.n)
    u = transform_array(x, spec.a)
    checkers = np.asarray(checkers, dtype=np.int64)
    return u[..., spec.storage.indices], u[..., checkers]


def recover_patched(spec: SketchSpec, checkers, y, y_checkers, models=None,
                    epsilon_prime: float | None = None, model_grid: int = 4,
                    seed: int = 0):
    """Adaptive recovery against a discretized model hull.

    The model list defaults to a grid over the extreme-point hull at a
    slightly enlarged sparsity epsilon_prime (so the dense family still
    dominates every epsilon-sparse source); the checker symbols pick the
    model whose reconstruction matches.  Returns (x_hat, chosen_index).
    """
    if models is None:
        if epsilon_prime is None:
            epsilon_prime = min(1.05 * spec.epsilon, (spec.a - 1) / spec.a - 1e-9)
        models = hull_face_grid(spec.a, epsilon_prime, model_grid, reduce_symmetry=False)
    return polar_dec_adapt(ModelSet(tuple(models)), spec.n, spec.storage,
                           checkers, y, y_checkers, seed=seed)


# ---------------------------------------------------------------------------
# Serialization: PSET payload plus a JSON sidecar of the scalars
# ---------------------------------------------------------------------------

def save_sketch_spec(spec: SketchSpec, path) -> None:
    path = str(path)
    with open(path, "wb") as fh:
        fh.write(encode_pset(spec.storage))
    sidecar = {
        "a": spec.a, "n": spec.n, "epsilon": spec.epsilon, "delta": spec.delta,
        "method": spec.method, "eta": spec.eta_mass, "seed": spec.seed,
    }
    with open(path + ".json", "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, sort_keys=True)
        fh.write("\n")


def load_sketch_spec(path) -> SketchSpec:
    path = str(path)
    with open(path, "rb") as fh:
        storage = decode_pset(fh.read())
    with open(path + ".json", "r", encoding="utf-8") as fh:
        meta = json.load(fh)
    decode_dist = make_spike(int(meta["a"]), 0, float(meta["eta"]))
    return SketchSpec(
        int(meta["a"]), int(meta["n"]), float(meta["epsilon"]), float(meta["delta"]),
        str(meta["method"]), decode_dist, storage, float(meta["eta"]), int(meta["seed"]),
    )
