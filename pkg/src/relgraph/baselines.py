"""Reference scorers the relation-graph methods are compared against.

Every scorer follows the same convention: higher score = more likely
problematic (mislabeled for the label scorers, out-of-distribution for
the OOD scorers). Confidence-style quantities are therefore negated.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingInput, WrongKind

LABEL_KINDS = ("entropy", "least_confidence", "margin", "loss")
OOD_KINDS = ("msp", "max_logit", "energy", "knn")

#: Floor inside the loss log; float32 one-hot rows would otherwise hit -log 0.
LOSS_FLOOR = 1e-12


@dataclass
class BaselineScores:
    """Scores plus KNN bookkeeping (k used, whether it was clamped)."""

    scores: np.ndarray
    k: int | None = None
    k_clamped: bool = False


def score_label_baseline(kind: str, probs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """Per-sample label-suspicion score from prediction probabilities.

    entropy: prediction entropy (0 log 0 taken as 0)
    least_confidence: 1 - p[assigned label]
    margin: negated margin of the assigned label over the best other class
    loss: cross-entropy of the assigned label, floored at LOSS_FLOOR
    """
    if kind not in LABEL_KINDS:
        raise WrongKind(f"kind must be one of {LABEL_KINDS}, got {kind!r}")
    probs = np.asarray(probs, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    rows = np.arange(probs.shape[0])
    if kind == "entropy":
        contrib = np.where(probs > 0.0, probs * np.log(np.where(probs > 0.0, probs, 1.0)), 0.0)
        return -contrib.sum(axis=1)
    assigned = probs[rows, labels]
    if kind == "least_confidence":
        return 1.0 - assigned
    if kind == "margin":
        others = probs.copy()
        others[rows, labels] = -np.inf
        return -(assigned - others.max(axis=1))
    return -np.log(np.maximum(assigned, LOSS_FLOOR))


def _logsumexp_rows(logits: np.ndarray) -> np.ndarray:
    shift = logits.max(axis=1, keepdims=True)
    return shift[:, 0] + np.log(np.exp(logits - shift).sum(axis=1))


def _unit_rows(x: np.ndarray) -> np.ndarray:
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms == 0.0, 1.0, norms)


def knn_k_for_ratio(ref_used: int, ref_total: int) -> int:
    """Neighbor count rule k = 1000 * (used / total), at least 1."""
    return max(1, round(1000.0 * ref_used / ref_total))


def score_ood_baseline(
    kind: str,
    *,
    probs: np.ndarray | None = None,
    logits: np.ndarray | None = None,
    features: np.ndarray | None = None,
    ref_features: np.ndarray | None = None,
    ref_total: int | None = None,
    k: int | None = None,
) -> BaselineScores:
    """Per-sample OOD score.

    msp needs probs; max_logit and energy need logits; knn needs features
    and ref_features. For knn the score is the cosine distance to the k-th
    nearest reference row on unit-normalized features, with k defaulting
    to the 1000-per-full-reference rule scaled by the fraction of the
    reference actually used (`ref_total` defaults to the rows given);
    an oversized k is clamped to the reference size and flagged.
    """
    if kind not in OOD_KINDS:
        raise WrongKind(f"kind must be one of {OOD_KINDS}, got {kind!r}")
    if kind == "msp":
        if probs is None:
            raise MissingInput("msp needs probs")
        return BaselineScores(scores=-np.asarray(probs, dtype=np.float64).max(axis=1))
    if kind == "max_logit":
        if logits is None:
            raise MissingInput("max_logit needs logits")
        return BaselineScores(scores=-np.asarray(logits, dtype=np.float64).max(axis=1))
    if kind == "energy":
        if logits is None:
            raise MissingInput("energy needs logits")
        return BaselineScores(scores=-_logsumexp_rows(np.asarray(logits, dtype=np.float64)))

    if features is None or ref_features is None:
        raise MissingInput("knn needs features and ref_features")
    features = np.asarray(features, dtype=np.float64)
    ref_features = np.asarray(ref_features, dtype=np.float64)
    if features.shape[1] != ref_features.shape[1]:
        raise MissingInput(
            f"knn feature dims disagree: {features.shape[1]} vs {ref_features.shape[1]}"
        )
    n_ref = ref_features.shape[0]
    if k is None:
        k = knn_k_for_ratio(n_ref, ref_total if ref_total is not None else n_ref)
    clamped = k > n_ref
    k = min(k, n_ref)
    sims = _unit_rows(features) @ _unit_rows(ref_features).T
    distances = 1.0 - sims
    kth = np.partition(distances, k - 1, axis=1)[:, k - 1]
    return BaselineScores(scores=kth, k=k, k_clamped=clamped)
