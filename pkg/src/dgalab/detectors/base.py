"""Common detector interface and the training entry point.

Every detector scores a full domain name with P(benign) in [0, 1]; a domain
is ruled legitimate when the score reaches the decision threshold (0.5 by
default, calibrated into the score during training).
"""

from __future__ import annotations

import numpy as np

from ..corpora import LabeledCorpus
from ..domains import validate_domain
from ..errors import DataError, ScoringError

KINDS = ("statistics", "fanci", "wordgraph", "neural")


class DetectorModel:
    kind: str = "?"

    def __init__(self, threshold: float = 0.5):
        self.threshold = float(threshold)

    def _score_one(self, domain: str) -> float:
        raise NotImplementedError

    def score(self, domain: str) -> float:
        """P(benign); deterministic, in [0, 1]."""
        if not validate_domain(domain):
            raise ScoringError(f"invalid domain {domain!r}")
        return float(np.clip(self._score_one(domain), 0.0, 1.0))

    def score_many(self, domains) -> np.ndarray:
        return np.array([self.score(d) for d in domains], dtype=np.float64)

    def is_benign(self, domain: str) -> bool:
        return self.score(domain) >= self.threshold

    def to_blobs(self) -> dict:
        raise NotImplementedError

    def save(self, path) -> None:
        from ..checkpoint import save_blobs
        save_blobs(path, self.kind, self.to_blobs())


def train_detector(kind: str, corpus: LabeledCorpus, hp: dict | None = None,
                   rng_seed: int = 0) -> DetectorModel:
    """Train one detector kind on a labeled corpus; deterministic per seed."""
    corpus.require_both()
    hp = dict(hp or {})
    if kind == "statistics":
        from .statistics import StatisticsDetector
        return StatisticsDetector.train(corpus, hp, rng_seed)
    if kind == "fanci":
        from .fanci import FanciDetector
        return FanciDetector.train(corpus, hp, rng_seed)
    if kind == "wordgraph":
        from .wordgraph import WordGraphDetector
        return WordGraphDetector.train(corpus, hp, rng_seed)
    if kind == "neural":
        from .neural import NeuralDetector
        return NeuralDetector.train(corpus, hp, rng_seed)
    raise DataError(f"unknown detector kind {kind!r}")


def load_detector(path) -> DetectorModel:
    from ..checkpoint import load_blobs
    kind, blobs = load_blobs(path)
    if kind == "statistics":
        from .statistics import StatisticsDetector
        return StatisticsDetector.from_blobs(blobs)
    if kind == "fanci":
        from .fanci import FanciDetector
        return FanciDetector.from_blobs(blobs)
    if kind == "wordgraph":
        from .wordgraph import WordGraphDetector
        return WordGraphDetector.from_blobs(blobs)
    from .neural import NeuralDetector
    return NeuralDetector.from_blobs(blobs)


def fit_logistic(features, labels, iters=800, lr=0.5):
    """Tiny deterministic logistic regression on standardized features.

    Returns (weights, bias, mean, std); used by the statistics and word-graph
    detectors to calibrate raw distances into a benign probability with a
    0.5 decision point.
    """
    X = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    Z = (X - mean) / std
    w = np.zeros(Z.shape[1])
    b = 0.0
    for _ in range(iters):
        p = 1.0 / (1.0 + np.exp(-(Z @ w + b)))
        err = p - y
        w -= lr * (Z.T @ err) / len(y)
        b -= lr * err.mean()
    return w, b, mean, std


def logistic_score(x, w, b, mean, std) -> np.ndarray:
    z = (np.asarray(x, dtype=np.float64) - mean) / std
    return 1.0 / (1.0 + np.exp(-(z @ w + b)))
