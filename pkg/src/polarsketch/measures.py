"""Probability measures on Z_a and their convolution orderings.

Distributions live on the cyclic group Z_a with a prime.  The module provides
entropy, circular convolution, the discrete Fourier transform, spike measures
(one heavy symbol, the rest equiprobable), three comparison relations built on
them, and the worst-case projections used to design universal codes:

* ``dominates_c``  -- p1 is reachable from p2 by circular convolution,
* ``dominates_d``  -- majorization (doubly stochastic mixing),
* ``dominates_cp`` -- reachable by an infinitely divisible convolver, i.e. by
  arbitrarily small convolutional steps.

``eta_bar`` and ``eta`` compute the off-symbol mass of the least-entropy spike
that every epsilon-sparse source dominates under the c / cp relation; they are
the design distributions for universal sketching.  ``p_c_ball`` performs the
analogous search against an entropy ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import bisect_max_true, bisect_min_true
from ._validation import check_prime
from .errors import IndeterminateSpectrumError, InfeasibleError, UnsupportedAlphabetError

# Numeric policy: double precision with alphabet sizes up to a few dozen.
NONNEG_TOL = 1e-9        # tolerance when testing coefficient nonnegativity
SPECTRUM_ZERO_TOL = 1e-12  # below this modulus a spectral coefficient counts as zero
ENTRY_CLAMP = 1e-12      # construction clamps entries in [-ENTRY_CLAMP, 0) to 0
SUM_TOL = 1e-9
BISECT_TOL = 1e-12


@dataclass(frozen=True)
class Dist:
    """A probability vector on Z_a, a prime.

    Entries at least -1e-12 are clamped to zero on construction; the vector
    must sum to 1 within 1e-9.  Instances are immutable and safe to share.
    """

    a: int
    probs: np.ndarray

    def __post_init__(self):
        check_prime(self.a)
        p = np.asarray(self.probs, dtype=float).copy()
        if p.shape != (self.a,):
            raise ValueError(f"probs must have length a={self.a}, got shape {p.shape}")
        if p.min() < -ENTRY_CLAMP:
            raise ValueError(f"negative probability entry {p.min()}")
        p[p < 0] = 0.0
        if abs(p.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"probabilities sum to {p.sum()}, expected 1")
        p.flags.writeable = False
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "a", int(self.a))

    def __iter__(self):
        return iter(self.probs)


@dataclass(frozen=True)
class Spectrum:
    """DFT of a distribution: values(w) = sum_k p(k) exp(-2 pi i k w / a)."""

    a: int
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex).copy()
        if v.shape != (self.a,):
            raise ValueError("spectrum length must equal a")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)


@dataclass(frozen=True)
class OrderWitness:
    """Outcome of a convolution-order query.

    ``witness`` is the convolver c with p1 = c * p2 (or the divisor nu for the
    cp relation) when the relation holds, otherwise None.  ``max_violation``
    records the most negative coefficient seen by the criterion, which for a
    failed query quantifies how badly it failed.
    """

    holds: bool
    witness: Dist | None
    max_violation: float


def as_dist(p, a: int | None = None) -> Dist:
    """Coerce an array-like (or pass through a Dist) to a validated Dist."""
    if isinstance(p, Dist):
        return p
    arr = np.asarray(p, dtype=float)
    return Dist(a if a is not None else arr.shape[0], arr)


def uniform(a: int) -> Dist:
    return Dist(a, np.full(a, 1.0 / a))


def point_mass(a: int, k: int) -> Dist:
    p = np.zeros(a)
    p[k % a] = 1.0
    return Dist(a, p)


def make_spike(a: int, k: int, non_special_mass: float) -> Dist:
    """Spike measure: mass 1 - eta at symbol k, eta/(a-1) on every other symbol.

    ``non_special_mass`` must lie in [0, (a-1)/a]; the spike family ends at the
    uniform distribution.
    """
    check_prime(a)
    eta = float(non_special_mass)
    if not 0.0 <= eta <= (a - 1) / a + 1e-15:
        raise ValueError(f"non_special_mass must be in [0, {(a - 1) / a}], got {eta}")
    if not 0 <= k < a:
        raise ValueError(f"spike position must be in [0, {a})")
    p = np.full(a, eta / (a - 1))
    p[k] = 1.0 - eta
    return Dist(a, p)


def _off_axis_point(a: int, eta: float) -> Dist:
    # Point (1 - eta, eta/(a-1), ...) of the equal-off-mass line, eta in [0, 1].
    # Beyond (a-1)/a this leaves the spike family but stays a distribution.
    p = np.full(a, eta / (a - 1))
    p[0] = 1.0 - eta
    return Dist(a, p)


def entropy(p, base: float) -> float:
    """Shannon entropy -sum p log_base p, with 0 log 0 = 0."""
    if base <= 1:
        raise ValueError(f"entropy base must exceed 1, got {base}")
    p = as_dist(p)
    nz = p.probs[p.probs > 0]
    return float(-(nz * np.log(nz)).sum() / np.log(base))


def circular_convolve(p, q) -> Dist:
    """Circular convolution on Z_a: (p * q)(k) = sum_v p(k - v) q(v)."""
    p, q = as_dist(p), as_dist(q)
    if p.a != q.a:
        raise ValueError(f"alphabet mismatch: {p.a} vs {q.a}")
    a = p.a
    idx = (np.arange(a)[:, None] - np.arange(a)[None, :]) % a
    out = p.probs[idx] @ q.probs
    return Dist(a, np.maximum(out, 0.0))


def dft(p) -> Spectrum:
    """Forward transform; values(0) = 1 for any distribution."""
    p = as_dist(p)
    return Spectrum(p.a, np.fft.fft(p.probs))


def idft(s) -> np.ndarray:
    """Inverse transform with the 1/a normalization; returns complex values."""
    if isinstance(s, Spectrum):
        return np.fft.ifft(s.values)
    return np.fft.ifft(np.asarray(s, dtype=complex))


def _spectrum_values(p) -> np.ndarray:
    return np.fft.fft(as_dist(p).probs)


def _quotient_convolver(p1: Dist, p2: Dist) -> np.ndarray:
    """idft(F(p1)/F(p2)); raises when F(p2) has a vanishing coefficient."""
    f2 = _spectrum_values(p2)
    if np.min(np.abs(f2)) <= SPECTRUM_ZERO_TOL:
        raise IndeterminateSpectrumError(
            "right operand has a vanishing spectral coefficient; the quotient criterion is undefined"
        )
    return np.fft.ifft(_spectrum_values(p1) / f2)


def dominates_c(p1, p2) -> OrderWitness:
    """Does p1 = c * p2 hold for some distribution c (p1 below p2)?

    Decided through the Fourier quotient: c = idft(F(p1)/F(p2)) must be real
    and nonnegative within tolerance.  The witness, when the relation holds,
    is c clamped to the simplex.
    """
    p1, p2 = as_dist(p1), as_dist(p2)
    if p1.a != p2.a:
        raise ValueError("alphabet mismatch")
    c = _quotient_convolver(p1, p2)
    max_imag = float(np.max(np.abs(c.imag)))
    min_real = float(np.min(c.real))
    holds = max_imag <= NONNEG_TOL and min_real >= -NONNEG_TOL
    witness = None
    if holds:
        w = np.maximum(c.real, 0.0)
        witness = Dist(p1.a, w / w.sum())
    return OrderWitness(holds, witness, min_real)


def dominates_d(p1, p2) -> bool:
    """Majorization test: descending prefix sums of p1 never exceed p2's."""
    p1, p2 = as_dist(p1), as_dist(p2)
    if p1.a != p2.a:
        raise ValueError("alphabet mismatch")
    cs1 = np.cumsum(np.sort(p1.probs)[::-1])
    cs2 = np.cumsum(np.sort(p2.probs)[::-1])
    return bool(np.all(cs1 <= cs2 + NONNEG_TOL))


def is_infinitely_divisible(nu) -> tuple[bool, np.ndarray]:
    """Log-spectrum divisibility test.

    Writes F(nu)(j) = r_j exp(i theta_j) with theta_j in the principal branch
    (-pi, pi], forms y = idft(log r + i theta), and declares nu infinitely
    divisible when y(1..a-1) has nonnegative real parts and vanishing
    imaginary parts.  Returns (verdict, y) with y as the diagnostic vector.
    """
    nu = as_dist(nu)
    f = _spectrum_values(nu)
    if np.min(np.abs(f)) <= SPECTRUM_ZERO_TOL:
        raise IndeterminateSpectrumError(
            "vanishing spectral coefficient: the log criterion is undefined"
        )
    w = np.log(np.abs(f)) + 1j * np.angle(f)
    y = np.fft.ifft(w)
    ok = bool(
        np.min(y.real[1:]) >= -NONNEG_TOL and np.max(np.abs(y.imag)) <= NONNEG_TOL
    )
    return ok, y


def dominates_cp(p1, p2) -> OrderWitness:
    """Does p1 = p2 * nu hold with nu infinitely divisible?

    The cp relation refines ``dominates_c``: the convolver must additionally
    pass the log-spectrum divisibility test, i.e. p1 must be reachable from p2
    by arbitrarily small convolutional steps.
    """
    p1, p2 = as_dist(p1), as_dist(p2)
    if p1.a != p2.a:
        raise ValueError("alphabet mismatch")
    c = _quotient_convolver(p1, p2)
    min_real = float(np.min(c.real))
    if np.max(np.abs(c.imag)) > NONNEG_TOL or min_real < -NONNEG_TOL:
        return OrderWitness(False, None, min_real)
    w = np.maximum(c.real, 0.0)
    nu = Dist(p1.a, w / w.sum())
    ok, y = is_infinitely_divisible(nu)
    if ok:
        return OrderWitness(True, nu, min_real)
    return OrderWitness(False, None, float(np.min(y.real[1:])))


# ---------------------------------------------------------------------------
# Spike projections of the sparse prior
# ---------------------------------------------------------------------------

def _sparse_extreme(a: int, eps: float) -> Dist:
    p = np.zeros(a)
    p[0] = 1.0 - eps
    p[1] = eps
    return Dist(a, p)


def _check_eps(a: int, eps: float) -> float:
    eps = float(eps)
    hi = (a - 1) / a
    if not 0.0 < eps < hi:
        raise ValueError(f"epsilon must be in (0, {hi}), got {eps}")
    return eps


def eta_bar(a: int, eps: float) -> float:
    """Off-symbol mass of the least-entropy spike c-dominated by (1-eps, eps, 0, ...).

    Computed as the feasibility boundary of the Fourier-quotient criterion on
    the spike line (the relation is monotone in the spike mass).  For a = 3
    this equals the closed form 2 eps (1 - eps); for a = 2 it is eps itself.
    """
    check_prime(a)
    eps = _check_eps(a, eps)
    if a == 2:
        return eps
    q = _sparse_extreme(a, eps)

    def feasible(eta: float) -> bool:
        return dominates_c(make_spike(a, 0, eta), q).holds

    return bisect_min_true(feasible, 0.0, (a - 1) / a - 1e-11, tol=BISECT_TOL)


def eta(a: int, eps: float) -> float:
    """Off-symbol mass of the least-entropy spike cp-dominated by the sparse extreme.

    Feasibility is the divisibility criterion applied to the quotient of the
    spike by (1-eps, eps, 0, ..., 0); a scalar bisection finds the boundary.
    Satisfies eta(a, eps) <= (a-1) eps, with equality in the limit eps -> 0,
    and eta(2, eps) = eps.
    """
    check_prime(a)
    eps = _check_eps(a, eps)
    if a == 2:
        return eps
    q = _sparse_extreme(a, eps)

    def feasible(eta_val: float) -> bool:
        return dominates_cp(make_spike(a, 0, eta_val), q).holds

    hi = (a - 1) / a - 1e-11
    if not feasible(hi):
        raise InfeasibleError("no spike below uniform is cp-dominated by the sparse extreme")
    return bisect_min_true(feasible, 0.0, hi, tol=BISECT_TOL)


def eta_ternary_closed_form(eps: float) -> float:
    """a = 3 value of ``eta`` via the exponential convolution path.

    The path tau(c) = idft(exp(c (lambda_w - 1)) F(q)) starts at the extreme
    point q = (1-eps, eps, 0) and moves by infinitesimal steps of the backward
    cyclic shift; the smallest c at which the two off coordinates coincide has
    the closed form c* = (2/sqrt(3)) atan2(sqrt(3) eps / 2, 1 - 3 eps / 2),
    and the off-symbol mass there is returned.
    """
    eps = _check_eps(3, eps)
    c = 2.0 / np.sqrt(3.0) * np.arctan2(np.sqrt(3.0) / 2.0 * eps, 1.0 - 1.5 * eps)
    modulus = np.sqrt(1.0 - 3.0 * eps + 3.0 * eps * eps)
    return float(2.0 / 3.0 * (1.0 - np.exp(-1.5 * c) * modulus))


def convolution_path_point(a: int, eps: float, c: float) -> Dist:
    """Point tau(c) of the exponential convolution path from (1-eps, eps, 0, ...)."""
    check_prime(a)
    eps = _check_eps(a, eps)
    lam = np.exp(2j * np.pi * np.arange(a) / a)
    vals = np.exp(c * (lam - 1.0)) * _spectrum_values(_sparse_extreme(a, eps))
    point = np.fft.ifft(vals).real
    return Dist(a, np.maximum(point, 0.0))


def p_cp_spa(a: int, eps: float) -> Dist:
    """The spike with off-symbol mass eta(a, eps): the universal decoding prior."""
    return make_spike(a, 0, eta(a, eps))


def binary_dist_with_entropy(R: float, side: int) -> Dist:
    """Binary distribution with entropy R (base 2); side selects the heavy symbol.

    side 0 returns [1 - theta, theta] (mass on symbol 0), side 1 the mirror.
    Solved by bisection on theta in [0, 1/2] to 1e-12.
    """
    if not 0.0 <= R <= 1.0:
        raise ValueError(f"R must be in [0, 1], got {R}")
    if side not in (0, 1):
        raise ValueError("side must be 0 or 1")

    def h2(t: float) -> float:
        if t <= 0.0 or t >= 1.0:
            return 0.0
        return float(-(t * np.log2(t) + (1 - t) * np.log2(1 - t)))

    lo, hi = 0.0, 0.5
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if h2(mid) < R:
            lo = mid
        else:
            hi = mid
    theta = 0.5 * (lo + hi) if R < 1.0 else 0.5
    probs = np.array([1.0 - theta, theta]) if side == 0 else np.array([theta, 1.0 - theta])
    return Dist(2, probs)


# ---------------------------------------------------------------------------
# Domination regions and the entropy-ball projection
# ---------------------------------------------------------------------------

GRID_MODES = ("dominated_by_c", "dominates_c", "dominated_by_h", "dominates_h")


def _memberships(points: np.ndarray, anchor: Dist, mode: str) -> np.ndarray:
    a = anchor.a
    if mode in ("dominated_by_h", "dominates_h"):
        h_anchor = entropy(anchor, a)
        hs = np.array([entropy(Dist(a, q), a) for q in points])
        if mode == "dominated_by_h":
            return hs >= h_anchor - NONNEG_TOL
        return hs <= h_anchor + NONNEG_TOL

    f_anchor = _spectrum_values(anchor)
    f_points = np.fft.fft(points, axis=1)
    uni = np.full(a, 1.0 / a)
    if mode == "dominated_by_c":
        # q <=_c anchor: quotient F(q)/F(anchor)
        if np.min(np.abs(f_anchor)) <= SPECTRUM_ZERO_TOL:
            # only the uniform anchor has spectral zeros; then q must be uniform
            return np.array([np.allclose(q, uni, atol=1e-9) for q in points])
        conv = np.fft.ifft(f_points / f_anchor, axis=1)
    else:
        # anchor <=_c q: quotient F(anchor)/F(q), undefined where F(q) vanishes
        bad = np.min(np.abs(f_points), axis=1) <= SPECTRUM_ZERO_TOL
        safe = np.where(bad[:, None], 1.0, f_points)
        conv = np.fft.ifft(f_anchor[None, :] / safe, axis=1)
        anchor_uniform = np.allclose(anchor.probs, uni, atol=1e-9)
        member = (np.max(np.abs(conv.imag), axis=1) <= NONNEG_TOL) & (
            np.min(conv.real, axis=1) >= -NONNEG_TOL
        )
        member[bad] = anchor_uniform
        return member
    return (np.max(np.abs(conv.imag), axis=1) <= NONNEG_TOL) & (
        np.min(conv.real, axis=1) >= -NONNEG_TOL
    )


def dom_region_grid(p, mode: str, resolution: int) -> list[tuple[Dist, bool]]:
    """Barycentric grid over the ternary simplex with a membership flag per point.

    Modes flag the grid point q relative to the anchor p:

    * ``dominated_by_c``: q = c * p for some distribution c,
    * ``dominates_c``:    p = c * q (the region that dominates p),
    * ``dominated_by_h``: H(q) >= H(p),
    * ``dominates_h``:    H(q) <= H(p).

    Both orientations of each relation are exposed since region plots are used
    with either convention.
    """
    p = as_dist(p)
    if p.a != 3:
        raise UnsupportedAlphabetError("domination-region grids are only supported for a = 3")
    if mode not in GRID_MODES:
        raise ValueError(f"mode must be one of {GRID_MODES}")
    resolution = int(resolution)
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    pts = []
    for i in range(resolution + 1):
        for j in range(resolution + 1 - i):
            k = resolution - i - j
            pts.append((i / resolution, j / resolution, k / resolution))
    points = np.array(pts)
    member = _memberships(points, p, mode)
    return [(Dist(3, q), bool(m)) for q, m in zip(points, member)]


def _entropy_ball_sample(R: float, boundary_points: int, interior_resolution: int = 24) -> np.ndarray:
    """Discretize {q in M(3): H(q) <= R}: level-curve samples plus a grid filter."""
    u = np.ones(3) / 3.0
    e1 = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    e2 = np.array([1.0, 1.0, -2.0]) / np.sqrt(6.0)
    pts = []
    for j in range(boundary_points):
        phi = 2.0 * np.pi * j / boundary_points
        d = np.cos(phi) * e1 + np.sin(phi) * e2
        with np.errstate(divide="ignore"):
            limits = np.where(d < 0, -u / d, np.inf)
        rmax = float(limits.min()) * (1 - 1e-12)
        if entropy(Dist(3, np.maximum(u + rmax * d, 0.0)), 3) > R:
            continue  # the ball does not extend in this direction
        lo, hi = 0.0, rmax
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if entropy(Dist(3, np.maximum(u + mid * d, 0.0)), 3) > R:
                lo = mid
            else:
                hi = mid
        pts.append(np.maximum(u + hi * d, 0.0))
    r = interior_resolution
    for i in range(r + 1):
        for j in range(r + 1 - i):
            q = np.array([i / r, j / r, (r - i - j) / r])
            if entropy(Dist(3, q), 3) <= R:
                pts.append(q)
    return np.array(pts)


def p_c_ball(a: int, R: float, boundary_points: int = 200) -> Dist:
    """Least-entropy point of the equal-off-mass line c-dominated by the ball H <= R.

    The ball is discretized (level-curve samples plus an interior grid) and the
    line (1 - eta, eta/2, eta/2), eta in [0, 1], is searched on both sides of
    the uniform point; feasibility against the sample is monotone on each side.
    The search is restricted to this line; by the cyclic symmetry of the ball
    the unrestricted minimizer is conjectured, not proven, to lie on it.
    """
    if a != 3:
        raise UnsupportedAlphabetError("the entropy-ball projection is implemented for a = 3")
    if boundary_points < 50:
        raise ValueError("need at least 50 boundary points")
    if not 0.0 < R <= 1.0:
        raise ValueError(f"R must be in (0, 1], got {R}")
    if R >= 1.0:
        return uniform(3)

    sample = _entropy_ball_sample(R, boundary_points)
    if len(sample) == 0:
        raise InfeasibleError("the discretized entropy ball is empty")
    f_sample = np.fft.fft(sample, axis=1)
    if np.min(np.abs(f_sample)) <= SPECTRUM_ZERO_TOL:
        # Only the uniform point has spectral zeros and H(uniform) = 1 > R.
        raise InfeasibleError("degenerate sample point in the entropy ball")

    def feasible(eta_val: float) -> bool:
        spike = _off_axis_point(3, eta_val)
        conv = np.fft.ifft(_spectrum_values(spike)[None, :] / f_sample, axis=1)
        return bool(
            np.max(np.abs(conv.imag)) <= NONNEG_TOL and np.min(conv.real) >= -NONNEG_TOL
        )

    mid = 2.0 / 3.0
    if not feasible(mid - 1e-9):
        raise InfeasibleError("no point of the spike line is dominated by the sampled ball")
    eta_lo = bisect_min_true(feasible, 0.0, mid - 1e-9, tol=BISECT_TOL)
    eta_hi = bisect_max_true(feasible, mid + 1e-9, 1.0, tol=BISECT_TOL)
    low = _off_axis_point(3, eta_lo)
    high = _off_axis_point(3, eta_hi)
    return low if entropy(low, 3) <= entropy(high, 3) else high
