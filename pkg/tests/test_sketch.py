import numpy as np
import pytest

from polarsketch import (
    Dist,
    brut_univ_sketching,
    build_sketch_spec,
    entropy,
    eta,
    load_sketch_spec,
    make_spike,
    measurement_count_formula,
    recover,
    save_sketch_spec,
    sketch,
)
from polarsketch._util import mix64, sample_blocks
from polarsketch.polar import transform_array
from polarsketch.sketch import (
    checker_indices_for,
    hull_face_grid,
    recover_patched,
    sketch_with_checkers,
)
from polarsketch.storage import is_nested, storage_set_exact


# ---------------------------------------------------------------------------
# spec construction
# ---------------------------------------------------------------------------

def test_known_and_pcp_coincide_for_binary():
    s1 = build_sketch_spec(2, 0.1, 64, 0.05, method="known_dist")
    s2 = build_sketch_spec(2, 0.1, 64, 0.05, method="pcp")
    assert np.array_equal(s1.storage.indices, s2.storage.indices)
    assert np.allclose(s1.decode_dist.probs, s2.decode_dist.probs)


def test_pcp_spec_uses_eta_spike():
    spec = build_sketch_spec(3, 0.1, 64, 0.05, method="pcp")
    assert spec.eta_mass == pytest.approx(eta(3, 0.1), abs=1e-12)
    assert spec.decode_dist.probs[0] == pytest.approx(1 - spec.eta_mass)


def test_spec_rejects_bad_method():
    with pytest.raises(ValueError):
        build_sketch_spec(2, 0.1, 64, 0.05, method="magic")


# ---------------------------------------------------------------------------
# sketch / recover
# ---------------------------------------------------------------------------

def test_sketch_zero_block():
    spec = build_sketch_spec(2, 0.1, 64, 0.05)
    y = sketch(spec, np.zeros(64, dtype=int))
    assert np.all(y == 0)
    assert y.shape == (spec.m,)


def test_sketch_full_set_is_transform():
    spec = build_sketch_spec(2, 0.45, 16, 1e-9, method="known_dist")
    if spec.m == 16:
        rng = np.random.default_rng(0)
        x = rng.integers(0, 2, size=16)
        assert np.array_equal(sketch(spec, x), transform_array(x, 2))


def test_sketch_tiny_example():
    # n = 2, storage {0}: y = (x0 + x1) mod a
    spec = build_sketch_spec(2, 0.2, 2, 0.7, method="known_dist")
    assert np.array_equal(spec.storage.indices, [0])
    assert np.array_equal(sketch(spec, np.array([1, 0])), [1])


def test_recover_zero_measurements_give_zero_signal():
    spec = build_sketch_spec(3, 0.05, 64, 0.05)
    x_hat = recover(spec, np.zeros(spec.m, dtype=int))
    assert np.all(x_hat == 0)


def test_recover_dimension_check():
    spec = build_sketch_spec(2, 0.1, 64, 0.05)
    with pytest.raises(ValueError):
        recover(spec, np.zeros(spec.m + 1, dtype=int))


def test_successful_recovery_is_exact_binary():
    spec = build_sketch_spec(2, 0.05, 512, 0.002, samples=1500, guard=2.0, seed=1)
    x = sample_blocks(np.array([0.95, 0.05]), 512, 30, mix64(4, 0))
    y = sketch(spec, x)
    x_hat = recover(spec, y)
    ok = (x_hat == x).all(axis=1)
    assert ok.sum() >= 24
    # flagged successes reproduce the signal symbol for symbol
    assert np.array_equal(x_hat[ok], x[ok])


def test_recovery_ternary_extreme_source():
    spec = build_sketch_spec(3, 0.05, 512, 0.002, samples=1500, guard=2.0, seed=1)
    x = sample_blocks(np.array([0.95, 0.05, 0.0]), 512, 20, mix64(5, 0))
    x_hat = recover(spec, sketch(spec, x))
    assert (x_hat == x).all(axis=1).sum() >= 16


# ---------------------------------------------------------------------------
# brut-univ-sketching
# ---------------------------------------------------------------------------

def test_brut_binary_stops_immediately():
    res = brut_univ_sketching(2, 0.07, 64, 0.05)
    assert res.eta_star == 0.07
    assert not res.fell_back


def test_brut_exact_results_bounded_by_eta():
    for eps in (0.05, 0.1, 0.2):
        res_b = brut_univ_sketching(3, eps, 8, 0.05, variant="B")
        res_a = brut_univ_sketching(3, eps, 8, 0.05, variant="A", hull_grid=6)
        cap = eta(3, eps)
        assert res_b.eta_star <= cap + 1e-12
        assert res_a.eta_star >= res_b.eta_star - 1e-12


def test_brut_universality_nesting_exact():
    # every hull probe's exact storage set sits inside the Variant-A spike set
    eps, n, delta = 0.1, 8, 0.05
    res = brut_univ_sketching(3, eps, n, delta, variant="A", hull_grid=6)
    cand = storage_set_exact(make_spike(3, 0, res.eta_star), n, delta)
    for q in hull_face_grid(3, eps, 6):
        assert is_nested(storage_set_exact(q, n, delta), cand)


def test_brut_containment_has_teeth():
    # a spike smaller than the sparsity level must not absorb the probe
    eps, n, delta = 0.2, 8, 0.05
    probe = storage_set_exact(Dist(3, [1 - eps, eps, 0.0]), n, delta)
    small = storage_set_exact(make_spike(3, 0, eps / 4), n, delta)
    assert not is_nested(probe, small)


def test_brut_monotone_in_delta():
    # lower thresholds enlarge every storage set, so the scan stops no later
    vals = [
        brut_univ_sketching(3, 0.1, 8, d, variant="B", eta_step=0.002).eta_star
        for d in (0.2, 0.1, 0.05)
    ]
    assert vals[0] >= vals[1] >= vals[2] - 1e-12


def test_brut_dichotomic_agrees_with_scan():
    step = 0.002
    scan = brut_univ_sketching(3, 0.1, 8, 0.05, variant="B", eta_step=step)
    dich = brut_univ_sketching(3, 0.1, 8, 0.05, variant="B", eta_step=step, dichotomic=True)
    assert abs(scan.eta_star - dich.eta_star) <= step + 1e-12


def test_hull_face_grid_symmetry_reduction():
    full = hull_face_grid(3, 0.1, 6, reduce_symmetry=False)
    reduced = hull_face_grid(3, 0.1, 6, reduce_symmetry=True)
    assert len(reduced) < len(full)
    # an extreme point survives (possibly as its mirror image)
    probs = np.array([d.probs for d in reduced])
    assert np.any(np.isclose(probs[:, 1:], 0.1))


# ---------------------------------------------------------------------------
# measurement count formula
# ---------------------------------------------------------------------------

def test_formula_binary_value():
    h = -(0.05 * np.log2(0.05) + 0.95 * np.log2(0.95))
    assert measurement_count_formula(2, 0.05, 1000) == pytest.approx(1000 * h, abs=1e-9)


def test_formula_large_alphabet_two_k():
    # with k = n eps and n/k fixed, the count falls under 2k symbols for
    # large alphabets (the infinite-precision regime) and never under k
    n, eps = 4000, 0.25
    k = n * eps
    m = measurement_count_formula(10**9 + 7, eps, n)
    assert k * 0.95 <= m <= 2 * k
    # and the dominant term is k log_a((a-1) n / k)
    a = 10**9 + 7
    lead = k * np.log((a - 1) * n / k) / np.log(a)
    assert m == pytest.approx(lead, rel=0.05)


def test_formula_leading_constant():
    # the reported 1.44 k ln(n/k) is the leading term k log2(n/k)
    n = 2**20
    k = 0.05 * n
    assert 1.44 * k * np.log(n / k) == pytest.approx(k * np.log2(n / k), rel=0.02)


# ---------------------------------------------------------------------------
# patched recovery
# ---------------------------------------------------------------------------

def test_patched_recovery_round_trip():
    spec = build_sketch_spec(3, 0.08, 256, 0.002, samples=1200, guard=2.0, seed=2)
    checkers = checker_indices_for(spec)
    assert checkers.size == int(np.ceil(np.sqrt(256)))
    assert not np.isin(checkers, spec.storage.indices).any()
    x = sample_blocks(np.array([0.92, 0.05, 0.03]), 256, 10, mix64(6, 0))
    y, y_check = sketch_with_checkers(spec, checkers, x)
    x_hat, chosen = recover_patched(spec, checkers, y, y_check, model_grid=3, seed=0)
    assert (x_hat == x).all(axis=1).sum() >= 7
    assert chosen.shape == (10,)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_spec_save_load_round_trip(tmp_path):
    spec = build_sketch_spec(3, 0.1, 64, 0.05, method="pcp", seed=9)
    path = tmp_path / "spec.pset"
    save_sketch_spec(spec, path)
    back = load_sketch_spec(path)
    assert (back.a, back.n, back.method) == (spec.a, spec.n, spec.method)
    assert back.eta_mass == spec.eta_mass
    assert np.array_equal(back.storage.indices, spec.storage.indices)
    assert np.allclose(back.decode_dist.probs, spec.decode_dist.probs)
