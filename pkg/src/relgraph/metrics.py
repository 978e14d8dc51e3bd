"""Detection metrics: average precision, AUROC, TNR at a TPR target.

All three read scores as "higher = predicted positive" and are invariant
under strictly increasing score transforms. Tie conventions are fixed so
results are deterministic: AP breaks score ties by original index (stable
sort), AUROC gives ties half credit, TNR thresholds with score >= theta.
"""

from __future__ import annotations

import numpy as np

from .errors import DegenerateTruth, NoPositives, ValidationError


def _as_scores_truth(scores, truth):
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth).astype(bool)
    if scores.ndim != 1 or truth.shape != scores.shape:
        raise ValidationError(
            f"scores and truth must be equal-length 1-D, got {scores.shape} and {truth.shape}"
        )
    return scores, truth


def average_precision(scores, truth) -> float:
    """Area under the precision-recall step curve.

    Samples are ranked by descending score (ties by original index); each
    positive contributes the precision at its rank, averaged over all
    positives.
    """
    scores, truth = _as_scores_truth(scores, truth)
    n_pos = int(truth.sum())
    if n_pos == 0:
        raise NoPositives("average precision needs at least one positive")
    order = np.argsort(-scores, kind="stable")
    hits = truth[order]
    ranks = np.arange(1, scores.size + 1)
    precision = np.cumsum(hits) / ranks
    return float(precision[hits].sum() / n_pos)


def auroc(scores, truth) -> float:
    """Probability a random positive outscores a random negative
    (Mann-Whitney; ties count half)."""
    scores, truth = _as_scores_truth(scores, truth)
    pos = scores[truth]
    neg = scores[~truth]
    if pos.size == 0 or neg.size == 0:
        raise DegenerateTruth("AUROC needs at least one positive and one negative")
    neg_sorted = np.sort(neg)
    below = np.searchsorted(neg_sorted, pos, side="left")
    tied = np.searchsorted(neg_sorted, pos, side="right") - below
    wins = below.sum(dtype=np.float64) + 0.5 * tied.sum(dtype=np.float64)
    return float(wins / (pos.size * neg.size))


def tnr_at_tpr(scores, truth, tpr_target: float = 0.95) -> float:
    """True-negative rate at the loosest threshold reaching the TPR target.

    Thresholds classify score >= theta as positive; theta is the largest
    value with TPR >= tpr_target, i.e. the m-th highest positive score for
    the smallest m with m / P >= tpr_target. Negatives strictly below
    theta count as true negatives.
    """
    scores, truth = _as_scores_truth(scores, truth)
    if not 0.0 < tpr_target <= 1.0:
        raise ValidationError(f"tpr_target must be in (0, 1], got {tpr_target}")
    pos = scores[truth]
    neg = scores[~truth]
    if pos.size == 0 or neg.size == 0:
        raise DegenerateTruth("TNR@TPR needs at least one positive and one negative")
    n_pos = pos.size
    needed = int(np.ceil(tpr_target * n_pos))
    # float products like 0.95 * 20 can land on either side of the integer;
    # fix up so `needed` is exactly the smallest count meeting the target.
    while needed > 1 and (needed - 1) / n_pos >= tpr_target:
        needed -= 1
    while needed / n_pos < tpr_target:
        needed += 1
    theta = np.sort(pos)[::-1][needed - 1]
    return float(np.mean(neg < theta))
