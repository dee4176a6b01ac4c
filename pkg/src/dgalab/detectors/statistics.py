"""Distance-profile detector: a domain is benign-like when its character
distribution, bigram sets, and edit distances sit close to a benign profile.

Three distances are computed against the benign training profile and fused
by a logistic layer fit on the training corpus:

* KL divergence of the core's character distribution from the (smoothed)
  benign character profile;
* maximum bigram Jaccard similarity against a fixed reference sample;
* minimum normalized edit distance against a second reference sample.

Training entries are deduplicated first, so repeated corpus rows cannot
shift the profile.
"""

from __future__ import annotations

import numpy as np

from ..domains import LABEL_CHARS
from ..rng import stream
from .base import DetectorModel, fit_logistic, logistic_score
from .features import split_core
from .distances import (add_one_smooth, bigram_set, edit_distance,
                        jaccard_bigrams, kl_divergence)

_CHAR_INDEX = {c: i for i, c in enumerate(LABEL_CHARS)}
_EDIT_CAP = 24  # cores are compared on their first 24 characters


class StatisticsDetector(DetectorModel):
    kind = "statistics"

    def __init__(self, profile, jaccard_refs, edit_refs, w, b, mean, std,
                 threshold=0.5):
        super().__init__(threshold)
        self.profile = np.asarray(profile, dtype=np.float64)
        self.jaccard_refs = tuple(jaccard_refs)
        self.edit_refs = tuple(edit_refs)
        self._ref_bigrams = [bigram_set(r) for r in self.jaccard_refs]
        self.w = np.asarray(w, dtype=np.float64)
        self.b = float(b)
        self.mean = np.asarray(mean, dtype=np.float64)
        self.std = np.asarray(std, dtype=np.float64)

    # -- distances ---------------------------------------------------------
    def distances(self, domain: str) -> np.ndarray:
        core = split_core(domain)[0]
        counts = np.zeros(len(LABEL_CHARS))
        for c in core:
            counts[_CHAR_INDEX[c]] += 1
        p = counts / counts.sum()
        kl = kl_divergence(p, self.profile)
        if len(core) >= 2:
            bg = bigram_set(core)
            jac = max((len(bg & rb) / len(bg | rb) for rb in self._ref_bigrams),
                      default=0.0)
        else:
            jac = 0.0
        short = core[:_EDIT_CAP]
        edit = min(edit_distance(short, r) / max(len(short), len(r))
                   for r in self.edit_refs)
        return np.array([kl, jac, edit])

    def _score_one(self, domain: str) -> float:
        return float(logistic_score(self.distances(domain)[None, :], self.w,
                                    self.b, self.mean, self.std)[0])

    # -- training ----------------------------------------------------------
    @classmethod
    def train(cls, corpus, hp, rng_seed):
        n_jac = int(hp.get("jaccard_refs", 64))
        n_edit = int(hp.get("edit_refs", 8))
        benign = list(dict.fromkeys(corpus.benign))
        agd = list(dict.fromkeys(corpus.agd))
        cores = [split_core(d)[0] for d in benign]

        counts = np.zeros(len(LABEL_CHARS))
        for core in cores:
            for c in core:
                counts[_CHAR_INDEX[c]] += 1
        profile = add_one_smooth(counts)

        rng = stream("statistics-refs", rng_seed)
        usable = [c for c in cores if len(c) >= 2] or cores
        jac_refs = [usable[i] for i in rng.integers(0, len(usable), size=n_jac)]
        edit_refs = [cores[i][:_EDIT_CAP]
                     for i in rng.integers(0, len(cores), size=n_edit)]

        probe = cls(profile, jac_refs, edit_refs,
                    np.zeros(3), 0.0, np.zeros(3), np.ones(3))
        feats = np.stack([probe.distances(d) for d in benign + agd])
        labels = np.array([1.0] * len(benign) + [0.0] * len(agd))
        w, b, mean, std = fit_logistic(feats, labels)
        return cls(profile, jac_refs, edit_refs, w, b, mean, std)

    # -- serialization -----------------------------------------------------
    def to_blobs(self) -> dict:
        return {
            "profile": self.profile.astype(np.float32),
            "jaccard_refs": "\n".join(self.jaccard_refs).encode("utf-8"),
            "edit_refs": "\n".join(self.edit_refs).encode("utf-8"),
            "logistic": np.concatenate([self.w, [self.b]]).astype(np.float32),
            "standardize": np.concatenate([self.mean, self.std]).astype(np.float32),
            "threshold": np.array([self.threshold], dtype=np.float32),
        }

    @classmethod
    def from_blobs(cls, blobs) -> "StatisticsDetector":
        logi = blobs["logistic"]
        stand = blobs["standardize"]
        return cls(blobs["profile"],
                   blobs["jaccard_refs"].decode("utf-8").split("\n"),
                   blobs["edit_refs"].decode("utf-8").split("\n"),
                   logi[:-1], logi[-1], stand[:3], stand[3:],
                   float(blobs["threshold"][0]))
