import numpy as np
import pytest

from dgalab.baselines import kraken_generate, suppobox_generate, WordDict
from dgalab.corpora import LabeledCorpus, synthesize_benign
from dgalab.detectors import (FEATURE_NAMES, extract_features, load_detector,
                              train_detector)
from dgalab.detectors.features import split_core
from dgalab.detectors.forest import fit_forest
from dgalab.detectors.statistics import StatisticsDetector
from dgalab.errors import DataError, ScoringError
from dgalab.rng import stream


def small_corpus(n=120, seed=4):
    benign = synthesize_benign(n, rng_seed=seed)
    agd = [d.core + ".com" for d in kraken_generate(seed, n)]
    return LabeledCorpus(tuple(benign), tuple(agd))


class TestFeatures:
    def test_google_hand_counts(self):
        f = dict(zip(FEATURE_NAMES, extract_features("google")))
        assert f["length"] == 6.0
        assert f["digit_ratio"] == 0.0
        assert f["vowel_ratio"] == pytest.approx(0.5)
        assert f["subdomain_count"] == 0.0

    def test_degenerate_digits(self):
        f = dict(zip(FEATURE_NAMES, extract_features("000000")))
        assert f["digit_ratio"] == 1.0
        assert f["char_entropy"] == 0.0
        assert f["first_char_digit"] == 1.0

    def test_hyphenated_hand_counts(self):
        f = dict(zip(FEATURE_NAMES, extract_features("a-b-c")))
        assert f["hyphen_count"] == 2.0
        assert f["max_consonant_run"] == 1.0

    def test_fqdn_parsing(self):
        core, subs, tld = split_core("scholar.google.com")
        assert (core, subs, tld) == ("google", 1, "com")
        f = dict(zip(FEATURE_NAMES, extract_features("scholar.google.com")))
        assert f["subdomain_count"] == 1.0
        assert f["tld_in_allowlist"] == 1.0

    def test_deterministic_and_finite(self):
        a = extract_features("mixed-42.example.org")
        b = extract_features("mixed-42.example.org")
        assert np.array_equal(a, b)
        assert np.all(np.isfinite(a))
        assert len(a) == 21 == len(FEATURE_NAMES)

    def test_invalid_domain_rejected(self):
        with pytest.raises(ScoringError):
            extract_features("not valid!")

    def test_dictionary_coverage_higher_for_words(self):
        wordy = dict(zip(FEATURE_NAMES, extract_features("sunsetgarden.com")))
        noise = dict(zip(FEATURE_NAMES, extract_features("qzxvkwpj.com")))
        assert wordy["dict_word_coverage"] > noise["dict_word_coverage"]


class TestForest:
    def test_one_feature_separable_perfect_split(self):
        rng = stream("forest-sep")
        x0 = rng.random(60) * 2.0          # class 0 in [0, 2]
        x1 = rng.random(60) * 2.0 + 5.0    # class 1 in [5, 7]
        X = np.concatenate([x0, x1])[:, None]
        y = np.array([0.0] * 60 + [1.0] * 60)
        forest = fit_forest(X, y, rng_seed=1, n_trees=1, max_depth=1)
        tree = forest.trees[0]
        assert tree.feature[0] == 0
        assert 2.0 < tree.threshold[0] < 5.0
        pred = forest.predict(X)
        assert np.all((pred >= 0.5) == (y == 1.0))

    def test_deterministic_per_seed(self):
        rng = stream("forest-det")
        X = rng.random((80, 4))
        y = (X[:, 1] > 0.5).astype(float)
        a = fit_forest(X, y, rng_seed=7, n_trees=5, max_depth=4)
        b = fit_forest(X, y, rng_seed=7, n_trees=5, max_depth=4)
        assert np.array_equal(a.predict(X), b.predict(X))

    def test_threaded_matches_serial(self):
        rng = stream("forest-thr")
        X = rng.random((80, 4))
        y = (X[:, 0] > 0.4).astype(float)
        serial = fit_forest(X, y, rng_seed=3, n_trees=6, threads=1)
        threaded = fit_forest(X, y, rng_seed=3, n_trees=6, threads=4)
        assert np.array_equal(serial.predict(X), threaded.predict(X))


class TestDetectorContracts:
    @pytest.mark.parametrize("kind", ["statistics", "fanci", "wordgraph",
                                      "neural"])
    def test_scores_in_range_and_deterministic(self, kind):
        corpus = small_corpus(60)
        hp = {"epochs": 2} if kind == "neural" else {"trees": 5}
        model = train_detector(kind, corpus, hp=hp, rng_seed=2)
        probe = list(corpus.benign[:10]) + list(corpus.agd[:10])
        s1 = model.score_many(probe)
        s2 = model.score_many(probe)
        assert np.all((s1 >= 0.0) & (s1 <= 1.0))
        assert np.array_equal(s1, s2)
        assert model.score(probe[0]) == pytest.approx(s1[0], abs=1e-6)

    def test_single_class_rejected(self):
        with pytest.raises(DataError):
            train_detector("fanci",
                           LabeledCorpus(("a.com",), ()), rng_seed=0)

    def test_invalid_domain_scoring_error(self):
        model = train_detector("statistics", small_corpus(40), rng_seed=0)
        with pytest.raises(ScoringError):
            model.score("UPPER.com")

    @pytest.mark.parametrize("kind", ["statistics", "fanci", "wordgraph",
                                      "neural"])
    def test_checkpoint_round_trip(self, kind, tmp_path):
        corpus = small_corpus(50)
        hp = {"epochs": 2} if kind == "neural" else {"trees": 4}
        model = train_detector(kind, corpus, hp=hp, rng_seed=6)
        path = tmp_path / f"{kind}.ckpt"
        model.save(path)
        loaded = load_detector(path)
        probe = list(corpus.benign[:8]) + list(corpus.agd[:8])
        assert np.allclose(model.score_many(probe), loaded.score_many(probe),
                           atol=1e-6)


class TestStatisticsDetector:
    def test_duplicates_do_not_change_model(self):
        corpus = small_corpus(50)
        doubled = LabeledCorpus(corpus.benign + corpus.benign,
                                corpus.agd + corpus.agd)
        a = train_detector("statistics", corpus, rng_seed=1)
        b = train_detector("statistics", doubled, rng_seed=1)
        assert np.array_equal(a.profile, b.profile)
        assert a.jaccard_refs == b.jaccard_refs
        assert a.edit_refs == b.edit_refs
        probe = corpus.benign[:5] + corpus.agd[:5]
        assert np.allclose(a.score_many(probe), b.score_many(probe))

    def test_profile_mode_beats_random_noise(self):
        corpus = small_corpus(200)
        model = train_detector("statistics", corpus, rng_seed=1)
        reference = model.edit_refs[0] + ".com"
        assert model.score(reference) > model.score("qkxvz0pwj3.com")


class TestWordGraph:
    def test_no_repeats_means_all_zero(self):
        # every substring unique: nothing repeats more than three times
        benign = [f"unique{i:04d}x.com" for i in range(10)]
        agd = [f"other{i:04d}zz.com" for i in range(10)]
        # distinct digits make every 3+-gram appear at most a handful of times
        corpus = LabeledCorpus(tuple(benign), tuple(agd))
        model = train_detector("wordgraph", corpus,
                               hp={"repeat_threshold": 100}, rng_seed=0)
        assert model.graph_stat("unique0001x.com") == 0.0
        assert model.score("whatever.com") == pytest.approx(0.5, abs=1e-6)

    def test_shared_dictionary_words_gain_degree(self):
        d1 = WordDict(("sunny", "rainy", "misty"))
        d2 = WordDict(("field", "river", "stone"))
        agd = [f"{a.core}.com" for a in suppobox_generate(d1, d2, 3, 60)]
        benign = [f"distinct{i:03d}q.net" for i in range(60)]
        corpus = LabeledCorpus(tuple(benign), tuple(agd))
        model = train_detector("wordgraph", corpus, rng_seed=0)
        assert model.graph_stat("sunnyfield.com") > 0.0
        assert model.graph_stat("sunnyfield.com") > model.graph_stat("qzkwv0xy.com")

    def test_unmatched_domain_scores_zero_stat(self):
        corpus = small_corpus(80)
        model = train_detector("wordgraph", corpus, rng_seed=0)
        assert model.graph_stat("q0q1q2q3q4.com") == 0.0


class TestNeuralDetector:
    def test_toy_separable_by_first_char(self):
        benign = [f"a{i:04d}x.com" for i in range(40)]
        agd = [f"z{i:04d}x.com" for i in range(40)]
        corpus = LabeledCorpus(tuple(benign), tuple(agd))
        model = train_detector("neural", corpus,
                               hp={"epochs": 30, "lr": 1.0, "d_h": 16},
                               rng_seed=1)
        scores_b = model.score_many(list(benign))
        scores_a = model.score_many(list(agd))
        accuracy = ((scores_b >= 0.5).sum() + (scores_a < 0.5).sum()) / 80
        assert accuracy == 1.0

    def test_incremental_update_moves_scores(self):
        corpus = small_corpus(60)
        model = train_detector("neural", corpus, hp={"epochs": 3}, rng_seed=2)
        novel = [f"zz-adv-{i:03d}.com" for i in range(30)]
        before = model.score_many(novel).mean()
        model.incremental_update(novel, list(corpus.benign[:30]), epochs=5,
                                 lr=0.3)
        after = model.score_many(novel).mean()
        assert after < before

    def test_bidirectional_variant(self):
        corpus = small_corpus(60)
        model = train_detector("neural", corpus,
                               hp={"epochs": 2, "bidirectional": True},
                               rng_seed=2)
        assert model.bidirectional
        s = model.score_many(list(corpus.benign[:5]))
        assert np.all((s >= 0) & (s <= 1))
