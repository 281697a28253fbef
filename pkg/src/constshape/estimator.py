"""Scikit-learn style front end.

``ConstellationShaper`` is a fit/transform/predict wrapper around the ascent
loop: ``fit`` learns the shaped constellation against the configured channel
(it takes no training data; ``X`` is accepted and ignored for pipeline
compatibility), ``transform`` maps symbol indices to transmit symbols, and
``predict`` / ``predict_proba`` demap received samples with the exact
posterior.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .channel import AwgnChannel
from .constellation import ShapingMode
from .demapper import smd_posterior
from .objectives import ObjectiveKind
from .training import TrainConfig, train


def _as_received(X) -> np.ndarray:
    """Accept complex (n,) or real (n, 2) received samples."""
    arr = np.asarray(X)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    arr = np.asarray(arr, dtype=np.complex128).ravel()
    if not np.all(np.isfinite(arr.real)) or not np.all(np.isfinite(arr.imag)):
        raise ValueError("received samples must be finite")
    return arr


class ConstellationShaper(BaseEstimator):
    """Learn joint geometric/probabilistic constellation shaping for one SNR.

    Parameters mirror :class:`constshape.training.TrainConfig`; ``objective``
    and ``mode`` accept either the enums or their string values
    ("mi"/"gmi", "geo"/"prob"/"joint").

    Attributes after ``fit``: ``constellation_`` (the learned state),
    ``points_`` (normalized transmit points), ``probs_``, ``labels_``,
    ``trace_``, ``rate_`` (final exact objective, bits), ``entropy_``.
    """

    def __init__(
        self,
        m=16,
        snr_db=8.0,
        objective="mi",
        mode="prob",
        batch_size=4000,
        learning_rate=5e-3,
        steps=3000,
        seed=0,
        adam_beta1=0.9,
        adam_beta2=0.999,
        adam_eps=1e-8,
        eval_every=100,
        gh_nodes=32,
    ):
        self.m = m
        self.snr_db = snr_db
        self.objective = objective
        self.mode = mode
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.steps = steps
        self.seed = seed
        self.adam_beta1 = adam_beta1
        self.adam_beta2 = adam_beta2
        self.adam_eps = adam_eps
        self.eval_every = eval_every
        self.gh_nodes = gh_nodes

    def _config(self) -> TrainConfig:
        return TrainConfig(
            m=int(self.m),
            snr_db=float(self.snr_db),
            objective=ObjectiveKind(self.objective),
            mode=ShapingMode(self.mode),
            batch_size=int(self.batch_size),
            learning_rate=float(self.learning_rate),
            steps=int(self.steps),
            seed=int(self.seed),
            adam_beta1=float(self.adam_beta1),
            adam_beta2=float(self.adam_beta2),
            adam_eps=float(self.adam_eps),
            eval_every=int(self.eval_every),
            gh_nodes=int(self.gh_nodes),
        )

    def fit(self, X=None, y=None):
        """Run the ascent loop; X and y are ignored."""
        result = train(self._config())
        self.result_ = result
        self.constellation_ = result.constellation
        self.points_ = result.constellation.normalized_points()
        self.probs_ = result.constellation.probabilities()
        self.labels_ = result.constellation.labels
        self.trace_ = result.trace
        self.rate_ = result.trace[-1].exact_objective
        self.entropy_ = result.trace[-1].entropy_bits
        self.n_iter_ = result.config.steps
        return self

    def transform(self, X) -> np.ndarray:
        """Map symbol indices to normalized transmit symbols (complex array)."""
        check_is_fitted(self, "constellation_")
        idx = np.asarray(X, dtype=np.int64).ravel()
        if idx.size and (idx.min() < 0 or idx.max() >= self.constellation_.m):
            raise ValueError(f"symbol indices must lie in [0, {self.constellation_.m})")
        return self.points_[idx]

    def predict_proba(self, X) -> np.ndarray:
        """Exact symbol posteriors of received samples, shape (n, M)."""
        check_is_fitted(self, "constellation_")
        received = _as_received(X)
        channel = AwgnChannel.from_snr_db(float(self.snr_db))
        return smd_posterior(received, self.constellation_, channel)

    def predict(self, X) -> np.ndarray:
        """Maximum-posterior symbol indices of received samples."""
        return np.argmax(self.predict_proba(X), axis=-1)

    def score(self, X=None, y=None) -> float:
        """Final exact objective (bits); X and y are ignored."""
        check_is_fitted(self, "rate_")
        return float(self.rate_)
