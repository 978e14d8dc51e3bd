"""Shared fixtures and independent oracles.

The oracles here deliberately re-derive quantities from first principles
(dense numpy formulas, exhaustive enumeration, pairwise counting) so the
production code paths are checked against something they do not share.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from relgraph.kernel import COSINE, RBF, KernelConfig, relation_block
from relgraph.tensorio import DatasetHandle, validate_dataset


# -- dataset builders ----------------------------------------------------------


def make_handle(features, probs, labels=None) -> DatasetHandle:
    return validate_dataset(
        np.asarray(features, dtype=np.float32),
        np.asarray(probs, dtype=np.float32),
        None if labels is None else np.asarray(labels, dtype=np.int64),
    )


def random_handle(rng, n, dim=4, n_classes=3) -> DatasetHandle:
    features = rng.normal(size=(n, dim)).astype(np.float32)
    probs = rng.dirichlet(np.ones(n_classes), size=n).astype(np.float32)
    labels = rng.integers(0, n_classes, size=n)
    return make_handle(features, probs, labels)


def unit_rows_from_gram(gram: np.ndarray) -> np.ndarray:
    """Unit vectors realizing a target cosine Gram matrix (Cholesky)."""
    return np.linalg.cholesky(np.asarray(gram, dtype=np.float64))


@pytest.fixture
def toy3() -> DatasetHandle:
    """Three samples with relation values r(0,1)=0.9, r(0,2)=-0.8, r(1,2)=-0.8
    under a plain truncated-cosine kernel (t=1, no compatibility term).

    Edge weights w = -r are then [[0,-0.9,0.8],[-0.9,0,0.8],[0.8,0.8,0]],
    giving initial scores [-0.1, -0.1, 1.6].
    """
    gram = [[1.0, 0.9, 0.8], [0.9, 1.0, 0.8], [0.8, 0.8, 1.0]]
    features = unit_rows_from_gram(gram)
    probs = np.full((3, 2), 0.5)
    labels = [0, 0, 1]
    return make_handle(features, probs, labels)


@pytest.fixture
def toy3_config() -> KernelConfig:
    return KernelConfig(kind=COSINE, temperature=1.0, clamp=0.0, use_compatibility=False)


# -- kernel oracle -------------------------------------------------------------


def oracle_relation_dense(handle: DatasetHandle, config: KernelConfig) -> np.ndarray:
    """Dense relation matrix from first principles (float64, diagonal 0)."""
    f = handle.features.astype(np.float64)
    if config.kind == RBF:
        sq = ((f[:, None, :] - f[None, :, :]) ** 2).sum(axis=2)
        sim = np.exp(-config.rbf_gamma * sq)
    else:
        norms = np.linalg.norm(f, axis=1)
        safe = np.where(norms == 0, 1.0, norms)
        sim = (f / safe[:, None]) @ (f / safe[:, None]).T
        sim[norms == 0, :] = 0.0
        sim[:, norms == 0] = 0.0
        sim = np.clip(sim, 0.0, 1.0)
    base = sim
    if config.use_compatibility:
        p = handle.probs.astype(np.float64)
        base = base * np.clip(p @ p.T, 0.0, 1.0)
    base = np.where(base < config.clamp, 0.0, base)
    kernel = base**config.temperature
    sign = np.where(handle.labels[:, None] == handle.labels[None, :], 1.0, -1.0)
    rel = sign * kernel
    np.fill_diagonal(rel, 0.0)
    return rel


def dense_weights(handle: DatasetHandle, config: KernelConfig) -> np.ndarray:
    """The graph's canonical float32 edge weights, materialized densely."""
    return -relation_block(handle, np.arange(handle.n), np.arange(handle.n), config)


# -- max-cut oracles -----------------------------------------------------------


def cut_objective(weights: np.ndarray, subset: np.ndarray, lam: float) -> float:
    """cut(subset, rest) - lam * |subset| computed directly."""
    inside = np.zeros(weights.shape[0], dtype=bool)
    inside[np.asarray(subset, dtype=np.int64)] = True
    w64 = weights.astype(np.float64)
    return float(w64[inside][:, ~inside].sum() - lam * inside.sum())


def enumerate_best_cut(weights: np.ndarray, lam: float) -> tuple[float, frozenset]:
    """Global max of the regularized cut by trying all 2^n subsets."""
    n = weights.shape[0]
    best, best_set = -np.inf, frozenset()
    for size in range(n + 1):
        for subset in itertools.combinations(range(n), size):
            value = cut_objective(weights, np.array(subset, dtype=np.int64), lam)
            if value > best:
                best, best_set = value, frozenset(subset)
    return best, best_set


def identity_scores(weights: np.ndarray, subset: np.ndarray) -> np.ndarray:
    """s[i] = sum_{j not in N} w(i,j) - sum_{j in N} w(i,j), densely."""
    inside = np.zeros(weights.shape[0], dtype=bool)
    inside[np.asarray(subset, dtype=np.int64)] = True
    w64 = weights.astype(np.float64)
    return w64[:, ~inside].sum(axis=1) - w64[:, inside].sum(axis=1)


# -- metric oracles -------------------------------------------------------------


def oracle_average_precision(scores, truth) -> float:
    """Rank-walk AP with stable index tie-breaks, one rank at a time."""
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    n_pos = int(truth.sum())
    hits = 0
    total = 0.0
    for rank, idx in enumerate(order, start=1):
        if truth[idx]:
            hits += 1
            total += hits / rank
    return total / n_pos


def oracle_auroc(scores, truth) -> float:
    """All positive-negative pairs counted explicitly, ties worth 0.5."""
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    pos = scores[truth]
    neg = scores[~truth]
    wins = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                wins += 1.0
            elif p == q:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def oracle_tnr_at_tpr(scores, truth, target=0.95) -> float:
    """Sweep every candidate threshold, keep the largest reaching the target."""
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth, dtype=bool)
    pos = scores[truth]
    neg = scores[~truth]
    best_theta = None
    for theta in sorted(set(scores.tolist()), reverse=True):
        tpr = np.mean(pos >= theta)
        if tpr >= target:
            best_theta = theta
            break
    assert best_theta is not None  # theta = min positive always reaches TPR 1
    return float(np.mean(neg < best_theta))
