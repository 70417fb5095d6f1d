"""Tests for the acceptability judge and its scoring conventions."""

import math
import random

import numpy as np
import pytest

from geckit.errors import (
    DegenerateCorpus,
    EmptyEvaluation,
    FormatError,
    InvalidLogits,
    MissingLogits,
)
from geckit.judge import (
    ColaScore,
    ConfusionCounts,
    JudgeConfig,
    JudgeModel,
    Logits,
    LogitsAdapter,
    acc,
    cola_score,
    emit_logits_tsv,
    evaluate_judge,
    featurize,
    logistic_grad,
    logistic_loss,
    mcc,
    train_judge,
)
from geckit.textcore import ColaInstance, Sentence


def sent(text):
    return Sentence(tuple(text.split()))


def make_corpus(n, seed):
    """Separable toy data: label 0 sentences carry a 'zq' marker token."""
    rng = random.Random(seed)
    words = ["red", "blue", "cat", "dog", "runs", "sees", "the", "a"]
    out = []
    for i in range(n):
        tokens = [rng.choice(words) for _ in range(rng.randint(3, 7))]
        label = i % 2
        if label == 0:
            tokens.insert(rng.randrange(len(tokens) + 1), "zq" + rng.choice(words))
        out.append(ColaInstance(Sentence(tuple(tokens)), label))
    return out


class TestColaScore:
    def test_equal_logits_exactly_half(self):
        assert cola_score(Logits(0.0, 0.0)).value == 0.5
        assert cola_score(Logits(-3.7, -3.7)).value == 0.5

    def test_frozen_values(self):
        # sigmoid(3) and sigmoid(-2), independently derived.
        assert cola_score(Logits(3.0, 0.0)).value == pytest.approx(0.952574, abs=5e-7)
        assert cola_score(Logits(0.0, 2.0)).value == pytest.approx(0.119203, abs=5e-7)

    def test_higher_logit0_means_higher_score(self):
        low = cola_score(Logits(0.0, 2.0)).value
        high = cola_score(Logits(2.0, 0.0)).value
        assert high > 0.5 > low

    def test_symmetry(self):
        rng = random.Random(3)
        for _ in range(200):
            a = rng.uniform(-50, 50)
            b = rng.uniform(-50, 50)
            total = cola_score(Logits(a, b)).value + cola_score(Logits(b, a)).value
            assert abs(total - 1.0) <= 1e-12

    def test_monotone_on_grid(self):
        points = [cola_score(Logits(d, 0.0)).value for d in np.linspace(-20, 20, 1000)]
        assert all(a < b for a, b in zip(points, points[1:]))

    def test_extreme_margins_stay_inside_unit_interval(self):
        assert 0.0 < cola_score(Logits(1e6, 0.0)).value < 1.0
        assert 0.0 < cola_score(Logits(0.0, 1e6)).value < 1.0

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidLogits):
            Logits(float("nan"), 0.0)
        with pytest.raises(InvalidLogits):
            Logits(0.0, float("inf"))
        with pytest.raises(InvalidLogits):
            ColaScore(1.0)
        with pytest.raises(InvalidLogits):
            ColaScore(0.0)


class TestFeaturize:
    def test_deterministic_and_normalized(self):
        sentences = [sent("the cat sat"), sent("dogs bark loudly")]
        a = featurize(sentences, dim=2**10)
        b = featurize(sentences, dim=2**10)
        assert (a != b).nnz == 0
        norms = np.sqrt(np.asarray(a.multiply(a).sum(axis=1)).ravel())
        assert np.allclose(norms, 1.0)

    def test_empty_sentence_has_features(self):
        x = featurize([Sentence(())], dim=2**10)
        assert x.nnz > 0

    def test_distinct_texts_differ(self):
        a = featurize([sent("she goes home")], dim=2**18)
        b = featurize([sent("she go home")], dim=2**18)
        assert (a != b).nnz > 0


class TestLogisticGradient:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(0)
        sentences = make_corpus(12, seed=1)
        x = featurize([inst.sentence for inst in sentences], dim=64)
        y = np.array([float(inst.label) for inst in sentences])
        w = rng.normal(0, 0.5, 64)
        b0, b1 = 0.3, -0.2
        l2 = 1e-3
        gw, gb0, gb1 = logistic_grad(w, b0, b1, x, y, l2)
        h = 1e-6
        for idx in rng.choice(64, size=12, replace=False):
            wp, wm = w.copy(), w.copy()
            wp[idx] += h
            wm[idx] -= h
            fd = (logistic_loss(wp, b0, b1, x, y, l2) - logistic_loss(wm, b0, b1, x, y, l2)) / (2 * h)
            assert abs(fd - gw[idx]) <= 1e-4 * max(1.0, abs(fd))
        fd0 = (logistic_loss(w, b0 + h, b1, x, y, l2) - logistic_loss(w, b0 - h, b1, x, y, l2)) / (2 * h)
        fd1 = (logistic_loss(w, b0, b1 + h, x, y, l2) - logistic_loss(w, b0, b1 - h, x, y, l2)) / (2 * h)
        assert abs(fd0 - gb0) <= 1e-4 * max(1.0, abs(fd0))
        assert abs(fd1 - gb1) <= 1e-4 * max(1.0, abs(fd1))


class TestTrainJudge:
    def test_single_label_rejected(self):
        only_ones = [ColaInstance(sent(f"fine sentence {i}"), 1) for i in range(4)]
        with pytest.raises(DegenerateCorpus):
            train_judge(only_ones, only_ones)

    def test_learns_separable_data(self):
        train = make_corpus(200, seed=2)
        dev = make_corpus(60, seed=3)
        cfg = JudgeConfig(dim=2**12, epochs=30, batch_size=32, seed=5)
        model = train_judge(train, dev, cfg)
        assert model.dev_accuracy >= 0.95
        counts = evaluate_judge(model, dev)
        assert acc(counts) == model.dev_accuracy

    def test_full_batch_loss_non_increasing(self):
        train = make_corpus(80, seed=4)
        dev = make_corpus(20, seed=5)
        losses = []
        for epochs in range(1, 7):
            cfg = JudgeConfig(dim=2**10, epochs=epochs, batch_size=None, lr=4.0, seed=0)
            losses.append(train_judge(train, dev, cfg).train_loss)
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_deterministic(self):
        train = make_corpus(60, seed=6)
        dev = make_corpus(20, seed=7)
        cfg = JudgeConfig(dim=2**10, epochs=4, batch_size=16, seed=9)
        a = train_judge(train, dev, cfg)
        b = train_judge(train, dev, cfg)
        assert np.array_equal(a.weights, b.weights)
        assert (a.bias0, a.bias1) == (b.bias0, b.bias1)
        assert a.dev_accuracy == b.dev_accuracy

    def test_score_orientation(self):
        train = make_corpus(200, seed=8)
        dev = make_corpus(40, seed=9)
        model = train_judge(train, dev, JudgeConfig(dim=2**12, epochs=8, seed=1))
        bad = [i for i in dev if i.label == 0][0]
        good = [i for i in dev if i.label == 1][0]
        assert model.score(bad.sentence).value > model.score(good.sentence).value

    def test_empty_sentence_scores(self):
        train = make_corpus(40, seed=10)
        model = train_judge(train, train, JudgeConfig(dim=2**10, epochs=2, seed=0))
        lg = model.logits(Sentence(()))
        assert math.isfinite(lg.logit0) and math.isfinite(lg.logit1)


class TestModelFile:
    def test_round_trip(self, tmp_path):
        train = make_corpus(60, seed=11)
        model = train_judge(train, train, JudgeConfig(dim=2**10, epochs=3, seed=2))
        path = tmp_path / "judge.json"
        model.save(path)
        loaded = JudgeModel.load(path)
        assert np.array_equal(loaded.weights, model.weights)
        assert loaded.dev_accuracy == model.dev_accuracy
        assert loaded.epochs == model.epochs
        probe = sent("the cat zqruns")
        assert loaded.logits(probe) == model.logits(probe)

    def test_rejects_other_json(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"format": "something-else"}')
        with pytest.raises(FormatError):
            JudgeModel.load(path)


class TestMetrics:
    def test_frozen_confusion_example(self):
        counts = ConfusionCounts(tp=40, fp=5, fn=10, tn=45)
        assert acc(counts) == 0.85
        assert mcc(counts) == 1750 / math.sqrt(6187500)
        assert mcc(counts) == pytest.approx(0.70353, abs=5e-6)

    def test_zero_denominator_is_zero(self):
        # All predictions positive: tn + fn column empty.
        assert mcc(ConfusionCounts(tp=5, fp=5, fn=0, tn=0)) == 0.0

    def test_empty_counts_raise(self):
        empty = ConfusionCounts(0, 0, 0, 0)
        with pytest.raises(EmptyEvaluation):
            acc(empty)
        with pytest.raises(EmptyEvaluation):
            mcc(empty)

    def test_perfect_and_inverted(self):
        assert mcc(ConfusionCounts(tp=10, fp=0, fn=0, tn=10)) == 1.0
        assert mcc(ConfusionCounts(tp=0, fp=10, fn=10, tn=0)) == -1.0


class TestLogitsAdapter:
    TSV = "she goes home\t-1.0\t2.5\nshe go home\t1.5\t-0.5\n"

    def test_lookup(self):
        adapter = LogitsAdapter.from_tsv(self.TSV)
        lg = adapter.logits(sent("she goes home"))
        assert (lg.logit0, lg.logit1) == (-1.0, 2.5)
        assert adapter.score(sent("she go home")).value > 0.5

    def test_missing_sentence(self):
        adapter = LogitsAdapter.from_tsv(self.TSV)
        with pytest.raises(MissingLogits):
            adapter.logits(sent("never seen this"))

    def test_bad_field_count(self):
        with pytest.raises(FormatError) as err:
            LogitsAdapter.from_tsv("only one field\n", name="table.tsv")
        assert err.value.line == 1
        assert "table.tsv" in str(err.value)

    def test_bad_float(self):
        with pytest.raises(FormatError):
            LogitsAdapter.from_tsv("a b\tx\t1.0\n")

    def test_duplicate_rejected(self):
        with pytest.raises(FormatError):
            LogitsAdapter.from_tsv("a b\t0\t1\na b\t1\t0\n")

    def test_round_trip(self):
        adapter = LogitsAdapter.from_tsv(self.TSV)
        entries = [
            (sent("she goes home"), adapter.logits(sent("she goes home"))),
            (sent("she go home"), adapter.logits(sent("she go home"))),
        ]
        again = LogitsAdapter.from_tsv(emit_logits_tsv(entries))
        assert again.table == adapter.table

    def test_works_with_evaluate(self):
        adapter = LogitsAdapter.from_tsv(self.TSV)
        data = [
            ColaInstance(sent("she goes home"), 1),
            ColaInstance(sent("she go home"), 0),
        ]
        counts = evaluate_judge(adapter, data)
        assert (counts.tp, counts.tn, counts.fp, counts.fn) == (1, 1, 0, 0)
