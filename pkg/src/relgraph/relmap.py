"""Relation maps: how one sample relates to the rest across checkpoints.

For an anchor sample, every other sample becomes a point at
(std, mean) of the anchor-partner relation value over a series of model
checkpoints, colored by the relation at the final checkpoint. Clean
samples show mostly positive low-variance relations, mislabeled ones
mostly negative, outliers hover near zero. Output is a CSV table or a
static SVG scatter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel as K
from .errors import InvalidAnchor, ShapeMismatch, ValidationError
from .tensorio import DatasetHandle, validate_dataset

SVG_SIZE = 600
STD_AXIS_MAX = 0.5  # x axis clips at this std
COLOR_NEG = (0, 0, 255)  # relation -1
COLOR_MID = (128, 128, 128)  # relation  0
COLOR_POS = (255, 0, 0)  # relation +1


@dataclass(frozen=True)
class RelationMapPoint:
    partner_index: int
    mean: float
    std: float
    final: float


def checkpoint_series(
    feature_prob_pairs, labels: np.ndarray
) -> list[DatasetHandle]:
    """Validate a checkpoint series: one (features, probs) pair per
    checkpoint over the same samples and labels."""
    if not feature_prob_pairs:
        raise ValidationError("need at least one checkpoint")
    handles = [validate_dataset(f, p, labels) for f, p in feature_prob_pairs]
    first = handles[0]
    for idx, handle in enumerate(handles[1:], start=1):
        if (handle.n, handle.dim, handle.n_classes) != (first.n, first.dim, first.n_classes):
            raise ShapeMismatch(
                f"checkpoint {idx} shape ({handle.n}, {handle.dim}, {handle.n_classes}) "
                f"differs from checkpoint 0 ({first.n}, {first.dim}, {first.n_classes})"
            )
    return handles


def relation_map(
    series: list[DatasetHandle],
    anchor: int,
    config: K.KernelConfig,
) -> list[RelationMapPoint]:
    """Per-partner relation statistics for one anchor sample.

    Returns n-1 points: the mean and population standard deviation of the
    anchor-partner relation over the checkpoints, plus the last
    checkpoint's value.
    """
    n = series[0].n
    if not 0 <= anchor < n:
        raise InvalidAnchor(f"anchor {anchor} outside [0, {n})")
    rows = np.empty((len(series), n), dtype=np.float64)
    for k, handle in enumerate(series):
        rows[k] = K.relation_block(handle, np.array([anchor]), np.arange(n), config)[0]
    partners = np.concatenate([np.arange(anchor), np.arange(anchor + 1, n)])
    rel = rows[:, partners]
    means = rel.mean(axis=0)
    stds = rel.std(axis=0)  # population std: checkpoints are the whole set
    final = rel[-1]
    return [
        RelationMapPoint(int(p), float(m), float(s), float(f))
        for p, m, s, f in zip(partners, means, stds, final)
    ]


def _ramp_color(value: float) -> str:
    """Blue (-1) -> gray (0) -> red (+1), linear per channel."""
    value = min(1.0, max(-1.0, value))
    if value < 0:
        lo, hi, t = COLOR_NEG, COLOR_MID, value + 1.0
    else:
        lo, hi, t = COLOR_MID, COLOR_POS, value
    channels = (round(a + (b - a) * t) for a, b in zip(lo, hi))
    return "#{:02x}{:02x}{:02x}".format(*channels)


def emit_scatter(points: list[RelationMapPoint], path, fmt: str) -> None:
    """Write relation-map points as CSV ("partner,mean,std,final", 9
    significant digits) or as a fixed 600x600 SVG scatter
    (x = std clipped to [0, 0.5], y = mean in [-1, 1], fill from the
    final-relation color ramp)."""
    if not points:
        raise ValidationError("no points to emit")
    if fmt == "csv":
        lines = ["partner,mean,std,final"]
        for pt in points:
            lines.append(
                f"{pt.partner_index},{pt.mean:.9g},{pt.std:.9g},{pt.final:.9g}"
            )
        payload = "\n".join(lines) + "\n"
    elif fmt == "svg":
        body = []
        for pt in points:
            x = min(max(pt.std, 0.0), STD_AXIS_MAX) / STD_AXIS_MAX * SVG_SIZE
            y = (1.0 - (min(max(pt.mean, -1.0), 1.0) + 1.0) / 2.0) * SVG_SIZE
            body.append(
                f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" '
                f'fill="{_ramp_color(pt.final)}" fill-opacity="0.7"/>'
            )
        payload = (
            f'<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">\n'
            f'<rect width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>\n'
            + "\n".join(body)
            + "\n</svg>\n"
        )
    else:
        raise ValidationError(f"format must be csv or svg, got {fmt!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)


def parse_scatter_csv(path) -> list[RelationMapPoint]:
    """Read back a CSV written by emit_scatter."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != "partner,mean,std,final":
        raise ValidationError(f"{path}: not a relation-map CSV")
    points = []
    for line in lines[1:]:
        partner, mean, std, final = line.split(",")
        points.append(RelationMapPoint(int(partner), float(mean), float(std), float(final)))
    return points
