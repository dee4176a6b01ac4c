import numpy as np
import pytest

from dgalab.dnsenv import DnsFeedback


class StubEnv:
    """Deterministic rule-based environment without novelty or budget.

    ``rule(fqdn) -> bool`` decides the detector factor; novelty is always 1,
    so repeated registration of a rewarded name keeps succeeding.  Used by
    closed-world trainer tests where the optimum must stay reachable.
    """

    def __init__(self, rule):
        self.rule = rule
        self.query_count = 0

    def register(self, fqdn):
        return self.register_many([fqdn])[0]

    def register_many(self, fqdns):
        out = []
        for fqdn in fqdns:
            self.query_count += 1
            d = int(bool(self.rule(fqdn)))
            out.append(DnsFeedback(d, d, 1, self.query_count))
        return out

    def resolve(self, fqdn):
        return None


class FixedScoreDetector:
    """Detector stand-in with a deterministic score function."""

    kind = "stub"

    def __init__(self, fn, threshold=0.5):
        self.fn = fn
        self.threshold = threshold

    def score(self, domain):
        return float(self.fn(domain))

    def score_many(self, domains):
        return np.array([self.fn(d) for d in domains], dtype=np.float64)


@pytest.fixture
def stub_env_factory():
    return StubEnv


@pytest.fixture
def fixed_detector_factory():
    return FixedScoreDetector


def pairwise_auc(pos_scores, neg_scores) -> float:
    """Brute-force rank statistic: P(pos > neg) + 0.5 P(tie)."""
    sp = np.asarray(pos_scores, dtype=np.float64)
    sn = np.asarray(neg_scores, dtype=np.float64)
    gt = (sp[:, None] > sn[None, :]).mean()
    eq = (sp[:, None] == sn[None, :]).mean()
    return float(gt + 0.5 * eq)
