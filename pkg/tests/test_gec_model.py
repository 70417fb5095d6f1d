"""Tests for the correction model: vocabulary, losses, network gradients."""

import math

import numpy as np
import pytest

from geckit.errors import ConfigError
from geckit.gec import (
    BOS_ID,
    EOS_ID,
    PAD_ID,
    UNK_ID,
    LossBreakdown,
    ModelConfig,
    Seq2SeqModel,
    Vocab,
    ce_loss,
    dynamic_loss,
    loss_weight,
)
from geckit.textcore import Sentence


def sent(text):
    return Sentence(tuple(text.split()))


def toy_model(seed=0):
    corpus = [sent("a b c d"), sent("e f a"), sent("b c e")]
    vocab = Vocab.from_sentences(corpus)
    model = Seq2SeqModel(vocab, ModelConfig(embed_dim=6, hidden_dim=8, seed=seed))
    return model, corpus


class TestVocab:
    def test_reserved_ids(self):
        vocab = Vocab.from_sentences([sent("b a")])
        assert vocab.tokens[:4] == ("<pad>", "<bos>", "<eos>", "<unk>")
        assert (PAD_ID, BOS_ID, EOS_ID, UNK_ID) == (0, 1, 2, 3)
        assert vocab.tokens[4:] == ("a", "b")

    def test_encode_decode(self):
        vocab = Vocab.from_sentences([sent("cat dog")])
        ids = vocab.encode(sent("dog cat bird"))
        assert ids[-1] == UNK_ID
        assert vocab.decode(ids).text == "dog cat <unk>"

    def test_decode_skips_control_ids(self):
        vocab = Vocab.from_sentences([sent("x")])
        assert vocab.decode([BOS_ID, 4, EOS_ID, PAD_ID]).text == "x"

    def test_deterministic_order(self):
        a = Vocab.from_sentences([sent("b a c")])
        b = Vocab.from_sentences([sent("c b a")])
        assert a.tokens == b.tokens


class TestCeLoss:
    def test_frozen_example(self):
        probs = np.array([[0.5, 0.3, 0.2], [0.25, 0.5, 0.25]])
        result = ce_loss(probs, np.array([0, 0]))
        assert result.value == pytest.approx(2.079442, abs=5e-7)
        assert result.clamped_steps == 0

    def test_perfect_prediction_is_zero(self):
        probs = np.array([[1.0, 0.0], [0.0, 1.0]])
        assert ce_loss(probs, np.array([0, 1])).value == 0.0

    def test_uniform_closed_form(self):
        v, t = 7, 5
        probs = np.full((t, v), 1.0 / v)
        assert ce_loss(probs, np.zeros(t, dtype=int)).value == pytest.approx(t * math.log(v))

    def test_mask_skips_steps(self):
        probs = np.array([[0.5, 0.5], [0.5, 0.5]])
        masked = ce_loss(probs, np.array([0, 0]), mask=np.array([1.0, 0.0]))
        assert masked.value == pytest.approx(math.log(2))
        assert np.all(masked.grad[1] == 0)

    def test_clamp_counts_and_flat_gradient(self):
        probs = np.array([[1.0, 0.0]])
        result = ce_loss(probs, np.array([1]))
        assert result.clamped_steps == 1
        assert result.value == pytest.approx(-math.log(1e-12))
        assert np.all(result.grad == 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(4)
        raw = rng.uniform(0.05, 1.0, size=(4, 5))
        probs = raw / raw.sum(axis=1, keepdims=True)
        targets = rng.integers(0, 5, size=4)
        result = ce_loss(probs, targets)
        h = 1e-7
        for t in range(4):
            for v in range(5):
                bumped = probs.copy()
                bumped[t, v] += h
                dipped = probs.copy()
                dipped[t, v] -= h
                fd = (ce_loss(bumped, targets).value - ce_loss(dipped, targets).value) / (2 * h)
                assert fd == pytest.approx(result.grad[t, v], abs=1e-4, rel=1e-4)

    def test_rejects_invalid_rows(self):
        with pytest.raises(ConfigError):
            ce_loss(np.array([[0.9, 0.3]]), np.array([0]))
        with pytest.raises(ConfigError):
            ce_loss(np.array([[0.5, 0.5]]), np.array([0, 1]))


class TestLossWeight:
    def test_frozen_example(self):
        assert loss_weight(0.85, 0.5) == pytest.approx(0.651920, abs=5e-7)
        assert loss_weight(0.85, 0.5) == math.sqrt(0.425)

    def test_identity_and_annihilator(self):
        assert loss_weight(1.0, 1.0) == 1.0
        assert loss_weight(0.0, 0.5) == 0.0

    def test_monotone_in_each_argument(self):
        assert loss_weight(0.9, 0.5) > loss_weight(0.8, 0.5)
        assert loss_weight(0.9, 0.6) > loss_weight(0.9, 0.5)

    def test_domain_checks(self):
        with pytest.raises(ConfigError):
            loss_weight(1.1, 0.5)
        with pytest.raises(ConfigError):
            loss_weight(0.9, 0.0)


class TestDynamicLoss:
    def test_frozen_example(self):
        probs = np.array([[0.5, 0.3, 0.2], [0.25, 0.5, 0.25]])
        breakdown, grad, clamped = dynamic_loss(probs, np.array([0, 0]), 0.85, 0.5)
        # Exact product of the two component values.
        assert breakdown.total == pytest.approx(1.355630, abs=5e-7)
        assert breakdown.total == breakdown.ce * breakdown.weight
        assert clamped == 0

    def test_identity_when_weight_one(self):
        probs = np.array([[0.5, 0.5]])
        targets = np.array([0])
        breakdown, grad, _ = dynamic_loss(probs, targets, 1.0, 1.0)
        plain = ce_loss(probs, targets)
        assert breakdown.total == plain.value
        assert np.array_equal(grad, plain.grad)

    def test_total_matches_product_on_random_inputs(self):
        rng = np.random.default_rng(9)
        for _ in range(300):
            t, v = int(rng.integers(1, 6)), int(rng.integers(2, 8))
            raw = rng.uniform(0.05, 1.0, size=(t, v))
            probs = raw / raw.sum(axis=1, keepdims=True)
            targets = rng.integers(0, v, size=t)
            accuracy = float(rng.uniform(0.1, 1.0))
            score = float(rng.uniform(0.01, 0.99))
            breakdown, grad, _ = dynamic_loss(probs, targets, accuracy, score)
            assert abs(breakdown.total - breakdown.ce * breakdown.weight) <= 1e-9
            plain = ce_loss(probs, targets)
            assert np.allclose(grad, breakdown.weight * plain.grad, rtol=0, atol=1e-15)

    def test_breakdown_validation(self):
        with pytest.raises(ConfigError):
            LossBreakdown(ce=1.0, weight=0.5, total=0.9)
        with pytest.raises(ConfigError):
            LossBreakdown(ce=1.0, weight=0.0, total=0.0)
        with pytest.raises(ConfigError):
            LossBreakdown(ce=-1.0, weight=0.5, total=-0.5)


class TestModelBasics:
    def test_deterministic_init(self):
        a, _ = toy_model(seed=3)
        b, _ = toy_model(seed=3)
        assert np.array_equal(a.flat_params(), b.flat_params())
        c, _ = toy_model(seed=4)
        assert not np.array_equal(a.flat_params(), c.flat_params())

    def test_step_distributions_sum_to_one(self):
        model, corpus = toy_model()
        enc = model.encode(corpus)
        probs, _ = model.step_distribution(
            enc, enc.s0, np.full(len(corpus), BOS_ID, dtype=np.int64)
        )
        assert probs.shape == (len(corpus), len(model.vocab))
        assert np.all(np.abs(probs.sum(axis=1) - 1.0) <= 1e-6)

    def test_loss_reproducible(self):
        model, corpus = toy_model()
        nll1, _, _ = model.loss_and_grads(corpus, corpus)
        nll2, _, _ = model.loss_and_grads(corpus, corpus)
        assert np.array_equal(nll1, nll2)

    def test_save_load_round_trip(self, tmp_path):
        model, corpus = toy_model(seed=7)
        model.save(tmp_path / "model")
        loaded = Seq2SeqModel.load(tmp_path / "model")
        assert np.array_equal(loaded.flat_params(), model.flat_params())
        assert loaded.vocab.tokens == model.vocab.tokens
        nll_a, _, _ = model.loss_and_grads(corpus, corpus)
        nll_b, _, _ = loaded.loss_and_grads(corpus, corpus)
        assert np.array_equal(nll_a, nll_b)


class TestModelGradients:
    def test_matches_finite_differences(self):
        model, _ = toy_model(seed=1)
        assert model.num_params() <= 5000
        sources = [sent("a b c"), sent("e f"), Sentence(())]
        targets = [sent("a b c d"), sent("f"), sent("a")]
        weights = np.array([1.0, 0.7, 0.4])
        scale = weights / len(sources)

        def objective():
            nll, _, _ = model.loss_and_grads(sources, targets, sentence_scale=scale)
            return float(scale @ nll)

        nll, grads, clamped = model.loss_and_grads(sources, targets, sentence_scale=scale)
        assert clamped == 0
        flat_grad = np.concatenate([grads[name].ravel() for name in sorted(grads)])
        base = model.flat_params()
        h = 1e-6
        worst = 0.0
        for idx in range(base.size):
            bumped = base.copy()
            bumped[idx] += h
            model.set_flat_params(bumped)
            up = objective()
            bumped[idx] -= 2 * h
            model.set_flat_params(bumped)
            down = objective()
            fd = (up - down) / (2 * h)
            err = abs(fd - flat_grad[idx]) / max(1.0, abs(fd), abs(flat_grad[idx]))
            worst = max(worst, err)
        model.set_flat_params(base)
        assert worst <= 1e-4

    def test_per_sentence_nll_non_negative(self):
        model, corpus = toy_model(seed=2)
        nll, _, _ = model.loss_and_grads(corpus, corpus)
        assert np.all(nll >= 0)

    def test_scale_zero_sentence_contributes_no_gradient(self):
        model, _ = toy_model(seed=5)
        sources = [sent("a b"), sent("c d")]
        targets = [sent("a b"), sent("c d")]
        _, grads_full, _ = model.loss_and_grads(sources, targets, np.array([0.5, 0.0]))
        _, grads_solo, _ = model.loss_and_grads(sources[:1], targets[:1], np.array([0.5]))
        for name in grads_full:
            assert np.allclose(grads_full[name], grads_solo[name], atol=1e-12)
