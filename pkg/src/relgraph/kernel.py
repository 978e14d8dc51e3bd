"""Bounded similarity kernel and signed relation values over sample pairs.

The kernel multiplies a feature similarity (truncated cosine by default,
RBF optionally) with a prediction-compatibility term, clamps small base
values to zero, and sharpens with a temperature exponent. The relation
value attaches a sign: positive when two samples carry the same label,
negative otherwise. Blocked (tiled) evaluation keeps the O(n^2) sweep
memory-bounded; tiles are pure functions of their inputs, so any number
of workers may compute them concurrently with bitwise-stable results.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .tensorio import DatasetHandle

COSINE = "cosine"
RBF = "rbf"

#: Base kernel values below this threshold are zeroed before the
#: temperature exponent is applied; suppresses accumulated noise from
#: near-orthogonal pairs.
DEFAULT_CLAMP = 0.03


@dataclass(frozen=True)
class KernelConfig:
    """Kernel shape parameters.

    temperature sharpens the kernel value distribution (values in (0, 1)
    shrink as it grows); clamp zeroes base values below the threshold
    before exponentiation; rbf_gamma is the RBF bandwidth, used only when
    kind == "rbf".
    """

    kind: str = COSINE
    temperature: float = 1.0
    clamp: float = DEFAULT_CLAMP
    use_compatibility: bool = True
    rbf_gamma: float = 1.0

    def __post_init__(self):
        if self.kind not in (COSINE, RBF):
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if not self.temperature > 0:
            raise ValidationError(f"temperature must be > 0, got {self.temperature}")
        if not 0.0 <= self.clamp < 1.0:
            raise ValidationError(f"clamp must be in [0, 1), got {self.clamp}")
        if self.kind == RBF and not self.rbf_gamma > 0:
            raise ValidationError(f"rbf_gamma must be > 0, got {self.rbf_gamma}")


@dataclass(frozen=True)
class KernelTile:
    """A blocked slab of kernel or relation values.

    values[a, b] corresponds to the pair (row_range[a], col_range[b]).
    Kernel values lie in [0, 1]; relation values in [-1, 1].
    """

    row_range: range
    col_range: range
    values: np.ndarray


def feature_similarity(handle: DatasetHandle, i: int, j: int, config: KernelConfig) -> float:
    """Similarity of feature rows i and j, in [0, 1].

    Truncated cosine hinges at zero: max(0, cos). A zero-norm row has
    cosine 0 against everything (including itself), keeping the kernel
    total.
    """
    return _feature_similarity_pair(handle, i, handle, j, config)


def _feature_similarity_pair(ha, i, hb, j, config) -> float:
    fa = ha.features[i].astype(np.float64)
    fb = hb.features[j].astype(np.float64)
    if config.kind == RBF:
        diff = fa - fb
        return float(np.exp(-config.rbf_gamma * np.dot(diff, diff)))
    na, nb = ha.row_norms[i], hb.row_norms[j]
    if na == 0.0 or nb == 0.0:
        return 0.0
    cos = np.dot(fa, fb) / (na * nb)
    return float(min(1.0, max(0.0, cos)))


def compatibility(probs: np.ndarray, i: int, j: int) -> float:
    """Probability that samples i and j receive the same predicted class."""
    value = np.dot(probs[i].astype(np.float64), probs[j].astype(np.float64))
    return float(min(1.0, max(0.0, value)))


def kernel_value(handle: DatasetHandle, i: int, j: int, config: KernelConfig) -> float:
    """Kernel value for the pair (i, j), in [0, 1]."""
    return _kernel_value_pair(handle, i, handle, j, config)


def _kernel_value_pair(ha, i, hb, j, config) -> float:
    base = _feature_similarity_pair(ha, i, hb, j, config)
    if config.use_compatibility:
        value = np.dot(ha.probs[i].astype(np.float64), hb.probs[j].astype(np.float64))
        base *= float(min(1.0, max(0.0, value)))
    if base < config.clamp:
        return 0.0
    return float(base**config.temperature)


def relation_value(handle: DatasetHandle, i: int, j: int, config: KernelConfig) -> float:
    """Signed kernel value: +k for matching labels, -k otherwise.

    Defined for i == j as well, but graph algorithms treat self-edges as
    weight zero (see relation_tile, which blanks the diagonal).
    """
    if handle.labels is None:
        raise ValidationError("relation values require labels")
    k = kernel_value(handle, i, j, config)
    return k if handle.labels[i] == handle.labels[j] else -k


def _unit_rows(handle: DatasetHandle, idx) -> np.ndarray:
    """float64 feature rows scaled to unit norm; zero rows stay zero."""
    rows = handle.features[idx].astype(np.float64)
    norms = handle.row_norms[idx]
    safe = np.where(norms == 0.0, 1.0, norms)
    return rows / safe[:, None]


def kernel_block(
    rows_handle: DatasetHandle,
    cols_handle: DatasetHandle,
    row_idx,
    col_idx,
    config: KernelConfig,
) -> np.ndarray:
    """Vectorized kernel values for row_idx x col_idx, as float32.

    `row_idx`/`col_idx` may be ranges or integer arrays. Inner products
    accumulate in float64 with a fixed index order, so results do not
    depend on tiling or thread count.
    """
    row_idx = np.asarray(row_idx)
    col_idx = np.asarray(col_idx)
    if config.kind == RBF:
        fr = rows_handle.features[row_idx].astype(np.float64)
        fc = cols_handle.features[col_idx].astype(np.float64)
        sq = (
            (rows_handle.row_norms[row_idx] ** 2)[:, None]
            + (cols_handle.row_norms[col_idx] ** 2)[None, :]
            - 2.0 * (fr @ fc.T)
        )
        base = np.exp(-config.rbf_gamma * np.maximum(sq, 0.0))
    else:
        base = _unit_rows(rows_handle, row_idx) @ _unit_rows(cols_handle, col_idx).T
        np.clip(base, 0.0, 1.0, out=base)
    if config.use_compatibility:
        compat = (
            rows_handle.probs[row_idx].astype(np.float64)
            @ cols_handle.probs[col_idx].astype(np.float64).T
        )
        np.clip(compat, 0.0, 1.0, out=compat)
        base *= compat
    base[base < config.clamp] = 0.0
    return (base**config.temperature).astype(np.float32)


def relation_block(
    handle: DatasetHandle,
    row_idx,
    col_idx,
    config: KernelConfig,
) -> np.ndarray:
    """Signed kernel block with self-pairs (same global index) zeroed."""
    if handle.labels is None:
        raise ValidationError("relation values require labels")
    row_idx = np.asarray(row_idx)
    col_idx = np.asarray(col_idx)
    values = kernel_block(handle, handle, row_idx, col_idx, config)
    sign = np.where(
        handle.labels[row_idx][:, None] == handle.labels[col_idx][None, :],
        np.float32(1.0),
        np.float32(-1.0),
    )
    values *= sign
    values[row_idx[:, None] == col_idx[None, :]] = 0.0
    return values


def relation_tile(
    handle: DatasetHandle,
    row_range: range,
    col_range: range,
    config: KernelConfig,
) -> KernelTile:
    """Relation values over a contiguous index block, diagonal forced to 0."""
    n = handle.n
    for rng in (row_range, col_range):
        if len(rng) and not (0 <= rng.start and rng.stop <= n):
            raise ValidationError(f"tile range {rng} outside [0, {n})")
    values = relation_block(handle, row_range, col_range, config)
    return KernelTile(row_range=row_range, col_range=col_range, values=values)
