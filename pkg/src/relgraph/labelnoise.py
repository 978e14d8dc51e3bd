"""Label-noise scoring via regularized max-cut on the relation graph.

Edge weights are negative relation values, so the cut between an
estimated-noisy subset and the rest measures how strongly the two groups'
labels conflict. Two solvers are provided: a set-level iteration that
rethresholds the whole score vector each pass (fast on large graphs), and
a single-node local search that moves one sample at a time and provably
increases the regularized cut at every move. Partitioned execution runs
the set-level solver independently on shuffled chunks, trading a little
accuracy for O(n * partition) cost.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import kernel as K
from ._parallel import DEFAULT_TILE, block_ranges, ordered_map
from .errors import InvalidPartitionSize, LengthMismatch, TooLarge, ValidationError
from .tensorio import DatasetHandle

#: Dense-matrix guard for the single-node solver.
SINGLE_NODE_MAX = 20000


@dataclass(frozen=True)
class MaxCutConfig:
    """Solver parameters.

    `lam` is the cardinality regularizer, interpreted against scores
    rescaled to a maximum absolute value of 1 in the set-level solver and
    against raw scores in the single-node solver (whose objective it
    enters directly). `max_iters` bounds set-level passes or single-node
    moves. `partition_size` of 0 means no partitioning. `seed` drives the
    partition shuffle.
    """

    lam: float = 0.05
    max_iters: int = 100
    partition_size: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValidationError(f"lam must be >= 0, got {self.lam}")
        if self.max_iters < 1:
            raise ValidationError(f"max_iters must be >= 1, got {self.max_iters}")


@dataclass
class IterationState:
    """One solver iteration: the active noisy set and the score vector
    consistent with it (used by identity checks)."""

    noisy_set: np.ndarray
    scores: np.ndarray


@dataclass
class NoiseScoreResult:
    """Output of a label-noise run.

    scores are unscaled (higher = more likely mislabeled); noisy_set is
    the sorted estimated-noisy index list; objective_trace holds the
    regularized cut value per iteration (set-level) or per move
    (single-node, preceded by the starting objective). `update_passes`
    counts score-vector updates, the unit compared across solver variants.
    """

    scores: np.ndarray
    noisy_set: np.ndarray
    iterations: int
    converged: bool
    objective_trace: list[float]
    update_passes: int = 0
    history: list[IterationState] = field(default_factory=list, repr=False)

    def to_json_dict(self) -> dict:
        return {
            "scores": [float(v) for v in self.scores],
            "noisy_set": [int(i) for i in self.noisy_set],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "objective_trace": [float(v) for v in self.objective_trace],
        }


def initial_scores(
    handle: DatasetHandle,
    config: K.KernelConfig,
    *,
    tile_size: int = DEFAULT_TILE,
    threads: int | None = None,
) -> np.ndarray:
    """Edge-weight row sums: score[i] = sum_j -relation(i, j).

    Streamed over relation tiles with float64 accumulation in a fixed
    tile order; row blocks are independent, so worker count never changes
    the result.
    """
    n = handle.n
    col_blocks = block_ranges(n, tile_size)

    def row_sums(rows: range) -> np.ndarray:
        acc = np.zeros(len(rows), dtype=np.float64)
        for cols in col_blocks:
            block = K.relation_block(handle, rows, cols, config)
            acc += block.sum(axis=1, dtype=np.float64)
        return -acc

    parts = ordered_map(row_sums, block_ranges(n, tile_size), threads)
    return np.concatenate(list(parts))


def _noisy_column_sums(
    handle: DatasetHandle,
    config: K.KernelConfig,
    noisy_idx: np.ndarray,
    *,
    tile_size: int = DEFAULT_TILE,
    threads: int | None = None,
) -> np.ndarray:
    """rowsum[i] = sum over j in the noisy set of w(i, j), w = -relation."""
    n = handle.n
    if noisy_idx.size == 0:
        return np.zeros(n, dtype=np.float64)
    col_chunks = [
        noisy_idx[lo : lo + tile_size] for lo in range(0, noisy_idx.size, tile_size)
    ]

    def row_sums(rows: range) -> np.ndarray:
        acc = np.zeros(len(rows), dtype=np.float64)
        for cols in col_chunks:
            block = K.relation_block(handle, rows, cols, config)
            acc += block.sum(axis=1, dtype=np.float64)
        return -acc

    parts = ordered_map(row_sums, block_ranges(n, tile_size), threads)
    return np.concatenate(list(parts))


def detect_label_noise(
    handle: DatasetHandle,
    kconfig: K.KernelConfig,
    mconfig: MaxCutConfig,
    *,
    keep_history: bool = False,
    tile_size: int = DEFAULT_TILE,
    threads: int | None = None,
) -> NoiseScoreResult:
    """Set-level max-cut iteration.

    Each pass rescales the score vector to max |s| = 1, thresholds it at
    `lam` to form the noisy set, and recomputes every score against that
    set from the cached initial scores. Stops when the noisy set repeats
    (a fixed point: the same set regenerates the same scores) or after
    max_iters passes. Ignores `partition_size`; see detect_partitioned.
    """
    sbar = initial_scores(handle, kconfig, tile_size=tile_size, threads=threads)
    scores = sbar.copy()
    prev_set: frozenset = frozenset()
    trace: list[float] = []
    history: list[IterationState] = []
    noisy_idx = np.empty(0, dtype=np.int64)
    converged = False
    iterations = 0
    update_passes = 0

    for iteration in range(1, mconfig.max_iters + 1):
        iterations = iteration
        peak = float(np.abs(scores).max())
        if peak == 0.0:
            noisy_idx = np.empty(0, dtype=np.int64)
            trace.append(0.0)
            converged = True
            if keep_history:
                history.append(IterationState(noisy_idx.copy(), scores.copy()))
            break
        mask = scores > mconfig.lam * peak
        noisy_idx = np.flatnonzero(mask).astype(np.int64)
        if frozenset(noisy_idx.tolist()) == prev_set:
            # Fixed point: this set already produced the current scores.
            trace.append(trace[-1] if trace else 0.0)
            converged = True
            if keep_history:
                history.append(IterationState(noisy_idx.copy(), scores.copy()))
            break
        rowsum = _noisy_column_sums(
            handle, kconfig, noisy_idx, tile_size=tile_size, threads=threads
        )
        cut = float(np.sum(sbar[mask] - rowsum[mask]))
        trace.append(cut - mconfig.lam * noisy_idx.size)
        prev_set = frozenset(noisy_idx.tolist())
        if iteration < mconfig.max_iters:
            scores = sbar - 2.0 * rowsum
            update_passes += 1
            if keep_history:
                history.append(IterationState(noisy_idx.copy(), scores.copy()))

    return NoiseScoreResult(
        scores=scores,
        noisy_set=noisy_idx,
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
        update_passes=update_passes,
        history=history,
    )


def detect_label_noise_single(
    handle: DatasetHandle,
    kconfig: K.KernelConfig,
    mconfig: MaxCutConfig,
) -> NoiseScoreResult:
    """Single-node local search (Kernighan-Lin style) on a dense graph.

    Repeatedly moves the sample whose side switch most increases the
    regularized cut, stopping when no move improves it. Each move adds
    exactly its improvement to the objective, so the trace strictly
    increases and the final set is a local optimum. Requires a dense
    weight matrix; guarded to n <= SINGLE_NODE_MAX.
    """
    n = handle.n
    if n > SINGLE_NODE_MAX:
        raise TooLarge(
            f"single-node solver is dense; n={n} exceeds the {SINGLE_NODE_MAX} guard"
        )
    weights = np.empty((n, n), dtype=np.float32)
    for rows in block_ranges(n):
        for cols in block_ranges(n):
            weights[rows.start : rows.stop, cols.start : cols.stop] = -K.relation_block(
                handle, rows, cols, kconfig
            )

    scores = weights.sum(axis=1, dtype=np.float64)
    inside = np.zeros(n, dtype=bool)
    direction = np.ones(n, dtype=np.float64)  # +1 outside the noisy set, -1 inside
    objective = 0.0
    trace = [0.0]
    moves = 0
    converged = False

    while moves < mconfig.max_iters:
        gains = direction * (scores - mconfig.lam)
        best = int(np.argmax(gains))
        if gains[best] <= 0.0:
            converged = True
            break
        objective += float(gains[best])
        scores += (2.0 * direction[best]) * (-weights[:, best].astype(np.float64))
        inside[best] = ~inside[best]
        direction[best] = -direction[best]
        trace.append(objective)
        moves += 1
    else:
        # Move budget exhausted before reaching a local optimum.
        converged = False

    return NoiseScoreResult(
        scores=scores,
        noisy_set=np.flatnonzero(inside).astype(np.int64),
        iterations=moves,
        converged=converged,
        objective_trace=trace,
        update_passes=moves,
    )


def detect_partitioned(
    handle: DatasetHandle,
    kconfig: K.KernelConfig,
    mconfig: MaxCutConfig,
    *,
    tile_size: int = DEFAULT_TILE,
    threads: int | None = None,
) -> NoiseScoreResult:
    """Set-level detection on seeded shuffled partitions.

    Samples are shuffled once, split into ceil(n / partition_size)
    contiguous chunks, and solved independently; scores map back to the
    original indices and the noisy set is the union. The trace sums the
    per-partition objectives (partitions are disjoint subgraphs), padding
    finished partitions with their final value.
    """
    n = handle.n
    size = mconfig.partition_size
    if not 2 <= size <= n:
        raise InvalidPartitionSize(f"partition_size must be in [2, {n}], got {size}")
    rng = np.random.default_rng(mconfig.seed)
    perm = rng.permutation(n)
    chunks = [perm[lo : lo + size] for lo in range(0, n, size)]
    sub_config = replace(mconfig, partition_size=0)

    scores = np.zeros(n, dtype=np.float64)
    noisy: list[int] = []
    traces: list[list[float]] = []
    iterations = 0
    update_passes = 0
    converged = True
    for chunk in chunks:
        result = detect_label_noise(
            handle.take(chunk), kconfig, sub_config, tile_size=tile_size, threads=threads
        )
        scores[chunk] = result.scores
        noisy.extend(int(i) for i in chunk[result.noisy_set])
        traces.append(result.objective_trace)
        iterations = max(iterations, result.iterations)
        update_passes += result.update_passes
        converged = converged and result.converged

    depth = max(len(t) for t in traces)
    trace = [
        float(sum(t[min(step, len(t) - 1)] for t in traces)) for step in range(depth)
    ]
    return NoiseScoreResult(
        scores=scores,
        noisy_set=np.array(sorted(noisy), dtype=np.int64),
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
        update_passes=update_passes,
    )


def ensemble_scores(per_checkpoint_scores) -> np.ndarray:
    """Average label-noise scores across training checkpoints.

    Each vector is scaled to a maximum absolute value of 1 first (all-zero
    vectors pass through unscaled) so no single checkpoint's magnitude
    dominates the mean.
    """
    vectors = [np.asarray(v, dtype=np.float64) for v in per_checkpoint_scores]
    if not vectors:
        raise LengthMismatch("need at least one score vector")
    length = vectors[0].shape
    if any(v.shape != length for v in vectors):
        raise LengthMismatch(
            f"score vectors disagree on length: {[v.shape for v in vectors]}"
        )
    scaled = []
    for v in vectors:
        peak = np.abs(v).max()
        scaled.append(v / peak if peak > 0 else v)
    return np.mean(scaled, axis=0)
