import numpy as np
import pytest

from conftest import make_handle, random_handle
from relgraph.errors import DimensionMismatch, SubsetTooLarge
from relgraph.kernel import KernelConfig
from relgraph.outlier import OutlierConfig, outlier_scores, sample_reference

PLAIN = OutlierConfig(kernel=KernelConfig(temperature=1.0, clamp=0.0, use_compatibility=False))


def test_sample_reference_all_when_zero():
    rng = np.random.default_rng(0)
    ref = random_handle(rng, 5)
    assert np.array_equal(sample_reference(ref, OutlierConfig(subset_size=0)), np.arange(5))


def test_sample_reference_full_size():
    rng = np.random.default_rng(1)
    ref = random_handle(rng, 6)
    picked = sample_reference(ref, OutlierConfig(subset_size=6))
    assert np.array_equal(picked, np.arange(6))


def test_sample_reference_too_large():
    rng = np.random.default_rng(2)
    ref = random_handle(rng, 4)
    with pytest.raises(SubsetTooLarge):
        sample_reference(ref, OutlierConfig(subset_size=5))


def test_sample_reference_deterministic_and_seed_sensitive():
    rng = np.random.default_rng(3)
    ref = random_handle(rng, 10000)
    a = sample_reference(ref, OutlierConfig(subset_size=100, seed=42))
    b = sample_reference(ref, OutlierConfig(subset_size=100, seed=42))
    c = sample_reference(ref, OutlierConfig(subset_size=100, seed=43))
    assert np.array_equal(a, b)
    assert np.all(np.diff(a) > 0)  # sorted, no duplicates
    assert not np.array_equal(a, c)


def identical_rows_handle(n):
    features = np.tile(np.array([[1.0, 2.0]], dtype=np.float32), (n, 1))
    probs = np.tile(np.array([[1.0, 0.0]], dtype=np.float32), (n, 1))
    return make_handle(features, probs)


def test_identical_rows_score_one_over_m():
    ref = identical_rows_handle(8)
    query = identical_rows_handle(1)
    scores = outlier_scores(query, ref, np.arange(8), PLAIN)
    assert scores[0] == pytest.approx(1.0 / 8.0, abs=1e-7)


def test_orthogonal_query_gets_infinity():
    ref = make_handle([[1.0, 0.0]], [[1.0, 0.0]])
    query = make_handle([[0.0, 1.0]], [[1.0, 0.0]])
    scores = outlier_scores(query, ref, np.array([0]), PLAIN)
    assert np.isinf(scores[0]) and scores[0] > 0


def test_hand_computed_mass():
    # kernel terms 0.5 and 0.25 -> 1 / 0.75
    ref = make_handle(
        [[1.0, 0.0], [1.0, 0.0]],
        [[0.5, 0.5], [0.25, 0.75]],
    )
    query = make_handle([[1.0, 0.0]], [[1.0, 0.0]])
    config = OutlierConfig(kernel=KernelConfig(temperature=1.0, clamp=0.0))
    scores = outlier_scores(query, ref, np.arange(2), config)
    assert scores[0] == pytest.approx(1.0 / 0.75, abs=1e-6)


def test_dimension_mismatch():
    ref = make_handle([[1.0, 0.0]], [[1.0, 0.0]])
    query = make_handle([[1.0, 0.0, 0.0]], [[1.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        outlier_scores(query, ref, np.array([0]), PLAIN)
    query2 = make_handle([[1.0, 0.0]], [[0.5, 0.25, 0.25]])
    with pytest.raises(DimensionMismatch):
        outlier_scores(query2, ref, np.array([0]), PLAIN)


def first_principles_kernel(fa, pa, fb, pb, t, clamp):
    na, nb = np.linalg.norm(fa), np.linalg.norm(fb)
    sim = 0.0 if na == 0 or nb == 0 else max(0.0, float(fa @ fb) / (na * nb))
    base = sim * float(pa @ pb)
    return 0.0 if base < clamp else base**t


def test_scores_match_scalar_kernel_sums():
    rng = np.random.default_rng(5)
    ref = random_handle(rng, 12)
    query = random_handle(rng, 6)
    config = OutlierConfig(kernel=KernelConfig(temperature=2.0))
    subset = np.array([0, 3, 5, 9])
    scores = outlier_scores(query, ref, subset, config, tile_size=3)
    for q in range(6):
        mass = sum(
            first_principles_kernel(
                query.features[q].astype(np.float64),
                query.probs[q].astype(np.float64),
                ref.features[i].astype(np.float64),
                ref.probs[i].astype(np.float64),
                config.kernel.temperature,
                config.kernel.clamp,
            )
            for i in subset
        )
        expected = 1.0 / mass if mass > 0 else np.inf
        assert scores[q] == pytest.approx(expected, rel=1e-5)


def test_positivity_and_subset_monotonicity():
    rng = np.random.default_rng(6)
    ref = random_handle(rng, 40)
    query = random_handle(rng, 15)
    config = OutlierConfig(kernel=KernelConfig(temperature=1.0))
    small = outlier_scores(query, ref, np.arange(10), config)
    large = outlier_scores(query, ref, np.arange(40), config)
    finite = np.isfinite(small)
    assert np.all(small[finite] > 0)
    # growing the subset can only add mass, so scores cannot increase
    assert np.all(large <= small + 1e-12)


def test_scale_invariance():
    rng = np.random.default_rng(7)
    ref = random_handle(rng, 20)
    query = random_handle(rng, 8)
    config = OutlierConfig(kernel=KernelConfig(temperature=1.0))
    base = outlier_scores(query, ref, np.arange(20), config)
    ref_scaled = make_handle(ref.features * 7.5, ref.probs, ref.labels)
    query_scaled = make_handle(query.features * 7.5, query.probs, query.labels)
    scaled = outlier_scores(query_scaled, ref_scaled, np.arange(20), config)
    assert np.allclose(base, scaled, rtol=1e-5)


def test_self_kernel_included_when_query_is_reference():
    ref = identical_rows_handle(3)
    scores = outlier_scores(ref, ref, np.arange(3), PLAIN)
    # each denominator includes the query's own kernel term (= 1)
    assert np.allclose(scores, 1.0 / 3.0)
