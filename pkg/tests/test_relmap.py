import numpy as np
import pytest

from conftest import random_handle
from relgraph.errors import InvalidAnchor, ShapeMismatch, ValidationError
from relgraph.kernel import KernelConfig
from relgraph.relmap import (
    RelationMapPoint,
    checkpoint_series,
    emit_scatter,
    parse_scatter_csv,
    relation_map,
)

PLAIN = KernelConfig(temperature=1.0, clamp=0.0, use_compatibility=False)


def series_from_handles(handles):
    return handles


def random_series(rng, k, n=6, dim=4, n_classes=3):
    labels = rng.integers(0, n_classes, size=n)
    pairs = [
        (
            rng.normal(size=(n, dim)).astype(np.float32),
            rng.dirichlet(np.ones(n_classes), size=n).astype(np.float32),
        )
        for _ in range(k)
    ]
    return checkpoint_series(pairs, labels)


def test_single_checkpoint_has_zero_std():
    rng = np.random.default_rng(0)
    series = random_series(rng, 1)
    points = relation_map(series, 0, PLAIN)
    assert len(points) == 5
    for pt in points:
        assert pt.std == 0.0
        assert pt.mean == pytest.approx(pt.final)


def test_two_checkpoint_hand_stats():
    # engineered pair relations 0.5 then 0.7 -> mean 0.6, population std 0.1
    labels = np.array([0, 0])
    probs = np.full((2, 2), 0.5, dtype=np.float32)

    def features_with_cos(c):
        return np.array([[1.0, 0.0], [c, np.sqrt(1 - c * c)]], dtype=np.float32)

    series = checkpoint_series(
        [(features_with_cos(0.5), probs), (features_with_cos(0.7), probs)], labels
    )
    points = relation_map(series, 0, PLAIN)
    assert len(points) == 1
    assert points[0].partner_index == 1
    assert points[0].mean == pytest.approx(0.6, abs=1e-6)
    assert points[0].std == pytest.approx(0.1, abs=1e-6)
    assert points[0].final == pytest.approx(0.7, abs=1e-6)


def test_orthogonal_partners_all_zero():
    labels = np.array([0, 1, 1])
    probs = np.full((3, 2), 0.5, dtype=np.float32)
    features = np.eye(3, dtype=np.float32)
    series = checkpoint_series([(features, probs), (features, probs)], labels)
    for pt in relation_map(series, 0, PLAIN):
        assert (pt.mean, pt.std, pt.final) == (0.0, 0.0, 0.0)


def test_identical_checkpoints_zero_std():
    rng = np.random.default_rng(1)
    h = random_handle(rng, 7)
    series = checkpoint_series([(h.features, h.probs)] * 4, h.labels)
    for pt in relation_map(series, 3, KernelConfig(temperature=2.0)):
        assert pt.std == 0.0
        assert -1.0 <= pt.mean <= 1.0


def test_mean_bounded_by_max_abs():
    rng = np.random.default_rng(2)
    series = random_series(rng, 5, n=8)
    for anchor in range(3):
        points = relation_map(series, anchor, KernelConfig(temperature=2.0))
        for pt in points:
            assert -1.0 <= pt.mean <= 1.0
            assert 0.0 <= pt.std <= 1.0


def test_invalid_anchor():
    rng = np.random.default_rng(3)
    series = random_series(rng, 2, n=4)
    with pytest.raises(InvalidAnchor):
        relation_map(series, 4, PLAIN)
    with pytest.raises(InvalidAnchor):
        relation_map(series, -1, PLAIN)


def test_checkpoint_shape_mismatch():
    rng = np.random.default_rng(4)
    labels = np.zeros(3, dtype=np.int64)
    good = (np.ones((3, 2), np.float32), np.full((3, 2), 0.5, np.float32))
    bad = (np.ones((3, 5), np.float32), np.full((3, 2), 0.5, np.float32))
    with pytest.raises(ShapeMismatch):
        checkpoint_series([good, bad], labels)


def test_csv_format_and_round_trip(tmp_path):
    points = [
        RelationMapPoint(1, 0.6, 0.1, 0.7),
        RelationMapPoint(4, -0.123456789, 0.0123456789, -1.0),
    ]
    path = tmp_path / "map.csv"
    emit_scatter(points, path, "csv")
    text = path.read_text().splitlines()
    assert text[0] == "partner,mean,std,final"
    assert text[1] == "1,0.6,0.1,0.7"
    back = parse_scatter_csv(path)
    for orig, parsed in zip(points, back):
        assert parsed.partner_index == orig.partner_index
        assert parsed.mean == pytest.approx(orig.mean, abs=1e-7)
        assert parsed.std == pytest.approx(orig.std, abs=1e-7)
        assert parsed.final == pytest.approx(orig.final, abs=1e-7)


def test_svg_output(tmp_path):
    points = [
        RelationMapPoint(0, 0.0, 0.0, 0.0),
        RelationMapPoint(1, 1.0, 0.9, 1.0),
        RelationMapPoint(2, -1.0, 0.2, -1.0),
    ]
    path = tmp_path / "map.svg"
    emit_scatter(points, path, "svg")
    text = path.read_text()
    assert text.startswith("<svg")
    assert 'viewBox="0 0 600 600"' in text
    assert text.count("<circle") == 3
    assert "#808080" in text  # final == 0 sits exactly at the ramp midpoint
    assert "#ff0000" in text  # +1 end
    assert "#0000ff" in text  # -1 end
    # std clipped: 0.9 lands on the right edge
    assert 'cx="600.00"' in text


def test_emit_rejects_empty_and_bad_format(tmp_path):
    with pytest.raises(ValidationError):
        emit_scatter([], tmp_path / "x.csv", "csv")
    with pytest.raises(ValidationError):
        emit_scatter([RelationMapPoint(0, 0, 0, 0)], tmp_path / "x.png", "png")
