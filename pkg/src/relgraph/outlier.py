"""Outlier/OOD scoring by inverse aggregated kernel mass.

A sample with no similar neighbors in the reference set accumulates
little kernel mass, so the reciprocal of the mass grows; zero mass maps
to +inf, the maximal-outlier sentinel. The reference may be subsampled
uniformly to cut cost with little ranking change.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel as K
from ._parallel import DEFAULT_TILE, block_ranges, ordered_map
from .errors import DimensionMismatch, SubsetTooLarge
from .tensorio import DatasetHandle


@dataclass(frozen=True)
class OutlierConfig:
    """subset_size of 0 uses the whole reference set; seed drives the
    uniform subsample. Kernel temperature defaults to 1 (the OOD
    setting); pass 6 for training-set outlier scoring."""

    subset_size: int = 0
    seed: int = 0
    kernel: K.KernelConfig = field(default_factory=lambda: K.KernelConfig(temperature=1.0))


def sample_reference(ref: DatasetHandle, config: OutlierConfig) -> np.ndarray:
    """Uniform sample without replacement of reference indices, sorted.

    Deterministic for a fixed seed; subset_size 0 selects every index.
    """
    n = ref.n
    if config.subset_size == 0:
        return np.arange(n, dtype=np.int64)
    if config.subset_size > n:
        raise SubsetTooLarge(
            f"subset_size {config.subset_size} exceeds reference size {n}"
        )
    rng = np.random.default_rng(config.seed)
    picked = rng.choice(n, size=config.subset_size, replace=False)
    return np.sort(picked).astype(np.int64)


def outlier_scores(
    query: DatasetHandle,
    ref: DatasetHandle,
    subset: np.ndarray,
    config: OutlierConfig,
    *,
    tile_size: int = DEFAULT_TILE,
    threads: int | None = None,
) -> np.ndarray:
    """score[q] = 1 / sum of kernel values between query q and the subset.

    Denominators accumulate in float64 over the subset in index order.
    Query rows that also appear in the reference keep their self-kernel
    term; with the default kernel that adds a constant 1 per denominator
    and leaves the ranking unchanged (pre-exclude rows if undesired).
    A zero denominator yields +inf.
    """
    if query.dim != ref.dim:
        raise DimensionMismatch(
            f"feature dims disagree: query {query.dim}, reference {ref.dim}"
        )
    if query.n_classes != ref.n_classes:
        raise DimensionMismatch(
            f"class counts disagree: query {query.n_classes}, reference {ref.n_classes}"
        )
    subset = np.asarray(subset, dtype=np.int64)
    col_chunks = [subset[lo : lo + tile_size] for lo in range(0, subset.size, tile_size)]

    def mass(rows: range) -> np.ndarray:
        acc = np.zeros(len(rows), dtype=np.float64)
        for cols in col_chunks:
            block = K.kernel_block(query, ref, rows, cols, config.kernel)
            acc += block.sum(axis=1, dtype=np.float64)
        return acc

    parts = ordered_map(mass, block_ranges(query.n, tile_size), threads)
    denom = np.concatenate(list(parts))
    with np.errstate(divide="ignore"):
        return np.where(denom > 0.0, 1.0 / np.where(denom > 0.0, denom, 1.0), np.inf)
