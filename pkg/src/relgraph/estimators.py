"""Scikit-learn style estimators wrapping the functional core.

Both estimators follow the sklearn parameter contract (constructor args
stored verbatim, ``get_params``/``set_params`` inherited from
BaseEstimator) so they compose with pipelines and parameter search. The
score convention is the toolkit's, not sklearn's: higher always means
more problematic.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from . import kernel as K
from . import labelnoise, outlier
from .tensorio import DatasetHandle, validate_dataset


def _kernel_config(est) -> K.KernelConfig:
    return K.KernelConfig(
        kind=est.kernel,
        temperature=est.temperature,
        clamp=est.clamp,
        use_compatibility=est.use_compatibility,
        rbf_gamma=est.rbf_gamma,
    )


class LabelNoiseDetector(BaseEstimator):
    """Flags likely label errors in a labeled dataset.

    Needs model prediction probabilities alongside features and labels;
    fit(X, y, probs=...) scores every training sample. `method` selects
    the set-level solver ("set"), the single-node local search
    ("single"), or partitioned set-level execution (partition_size > 0
    with "set").

    Attributes after fit: ``noise_scores_`` (higher = more suspect),
    ``noisy_indices_``, ``n_iterations_``, ``converged_``,
    ``objective_trace_``.
    """

    def __init__(
        self,
        temperature: float = 4.0,
        lam: float = 0.05,
        clamp: float = K.DEFAULT_CLAMP,
        kernel: str = K.COSINE,
        use_compatibility: bool = True,
        rbf_gamma: float = 1.0,
        max_iters: int = 100,
        partition_size: int = 0,
        method: str = "set",
        seed: int = 0,
        threads: int | None = None,
    ):
        self.temperature = temperature
        self.lam = lam
        self.clamp = clamp
        self.kernel = kernel
        self.use_compatibility = use_compatibility
        self.rbf_gamma = rbf_gamma
        self.max_iters = max_iters
        self.partition_size = partition_size
        self.method = method
        self.seed = seed
        self.threads = threads

    def fit(self, X, y, probs=None):
        if probs is None:
            raise ValueError("LabelNoiseDetector.fit requires probs=<n x C probabilities>")
        handle = validate_dataset(X, probs, y)
        result = self._run(handle)
        self.noise_scores_ = result.scores
        self.noisy_indices_ = result.noisy_set
        self.n_iterations_ = result.iterations
        self.converged_ = result.converged
        self.objective_trace_ = result.objective_trace
        self.n_samples_ = handle.n
        return self

    def _run(self, handle: DatasetHandle) -> labelnoise.NoiseScoreResult:
        kconfig = _kernel_config(self)
        mconfig = labelnoise.MaxCutConfig(
            lam=self.lam,
            max_iters=self.max_iters,
            partition_size=self.partition_size,
            seed=self.seed,
        )
        if self.method == "single":
            return labelnoise.detect_label_noise_single(handle, kconfig, mconfig)
        if self.method != "set":
            raise ValueError(f"method must be 'set' or 'single', got {self.method!r}")
        if self.partition_size > 0:
            return labelnoise.detect_partitioned(
                handle, kconfig, mconfig, threads=self.threads
            )
        return labelnoise.detect_label_noise(handle, kconfig, mconfig, threads=self.threads)

    def _check_fitted(self):
        if not hasattr(self, "noise_scores_"):
            raise NotFittedError("call fit before predict/score_samples")

    def score_samples(self, X=None):
        """Noise scores of the fitted training samples (X is ignored;
        scoring is transductive)."""
        self._check_fitted()
        return self.noise_scores_

    def predict(self, X=None):
        """Boolean mask over the fitted samples: True = estimated noisy."""
        self._check_fitted()
        mask = np.zeros(self.n_samples_, dtype=bool)
        mask[self.noisy_indices_] = True
        return mask

    def fit_predict(self, X, y, probs=None):
        return self.fit(X, y, probs=probs).predict()


class OutlierScorer(BaseEstimator):
    """Scores how distributionally isolated samples are from a reference set.

    fit(X, probs=...) stores the reference (optionally subsampled);
    score_samples(X, probs=...) returns inverse aggregated kernel mass,
    +inf for samples with no kernel mass at all. Higher = more outlier.
    """

    def __init__(
        self,
        temperature: float = 1.0,
        clamp: float = K.DEFAULT_CLAMP,
        kernel: str = K.COSINE,
        use_compatibility: bool = True,
        rbf_gamma: float = 1.0,
        subset_size: int = 0,
        seed: int = 0,
        threads: int | None = None,
    ):
        self.temperature = temperature
        self.clamp = clamp
        self.kernel = kernel
        self.use_compatibility = use_compatibility
        self.rbf_gamma = rbf_gamma
        self.subset_size = subset_size
        self.seed = seed
        self.threads = threads

    def _config(self) -> outlier.OutlierConfig:
        return outlier.OutlierConfig(
            subset_size=self.subset_size,
            seed=self.seed,
            kernel=_kernel_config(self),
        )

    def fit(self, X, y=None, probs=None):
        if probs is None:
            raise ValueError("OutlierScorer.fit requires probs=<n x C probabilities>")
        self.reference_ = validate_dataset(X, probs)
        self.subset_indices_ = outlier.sample_reference(self.reference_, self._config())
        return self

    def score_samples(self, X, probs=None):
        if not hasattr(self, "reference_"):
            raise NotFittedError("call fit before score_samples")
        if probs is None:
            raise ValueError("OutlierScorer.score_samples requires probs=")
        query = validate_dataset(X, probs)
        return outlier.outlier_scores(
            query, self.reference_, self.subset_indices_, self._config(), threads=self.threads
        )

    def fit_score(self, X, probs=None):
        """Score the reference against itself (training-set outliers)."""
        self.fit(X, probs=probs)
        return self.score_samples(X, probs=probs)
