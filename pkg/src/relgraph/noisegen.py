"""Synthetic label-noise injection for controlled benchmarks.

Flips a fixed fraction of correctly classified samples to the model's
second-choice class, which produces realistic, hard-to-spot label errors
(the flipped label is always a plausible confusion). The flip mask is the
ground truth that detection metrics score against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoolTooSmall, ValidationError


@dataclass(frozen=True)
class NoiseSpec:
    ratio: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.ratio < 1.0:
            raise ValidationError(f"ratio must be in [0, 1), got {self.ratio}")


def inject_noise(
    probs: np.ndarray, labels: np.ndarray, spec: NoiseSpec
) -> tuple[np.ndarray, np.ndarray]:
    """Flip floor(ratio * n) correct labels to the runner-up class.

    Eligible samples are those whose label matches the argmax prediction
    (argmax ties broken by lowest class index); floor(ratio * n) of them
    are drawn uniformly without replacement under the seed, and each gets
    the second-highest-probability class (ties again by lowest index).

    Returns the new label vector and a boolean mask of flipped positions.

    Raises PoolTooSmall when fewer correct samples exist than flips
    requested.
    """
    probs = np.asarray(probs, dtype=np.float32)
    labels = np.asarray(labels, dtype=np.int64)
    n, n_classes = probs.shape
    if n_classes < 2:
        raise ValidationError("need at least 2 classes to flip to a runner-up")
    top = probs.argmax(axis=1)
    pool = np.flatnonzero(top == labels)
    # guard the float product: 0.3 * 10 rounds to 2.9999999999999996
    target = int(math.floor(spec.ratio * n + 1e-9))
    if pool.size < target:
        raise PoolTooSmall(
            f"{target} flips requested but only {pool.size} correctly classified samples"
        )
    new_labels = labels.copy()
    mask = np.zeros(n, dtype=bool)
    if target == 0:
        return new_labels, mask
    rng = np.random.default_rng(spec.seed)
    chosen = rng.choice(pool, size=target, replace=False)
    masked = probs[chosen].copy()
    masked[np.arange(target), top[chosen]] = -np.inf
    runner_up = masked.argmax(axis=1)
    new_labels[chosen] = runner_up
    mask[chosen] = True
    return new_labels, mask
