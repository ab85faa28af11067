"""Tests for the multi-level classifier and checkpointing."""

import numpy as np
import pytest
import torch

from sensedist.distributions import LabelDistribution
from sensedist.encoders import EncoderSpec
from sensedist.errors import ConfigError, DataError, NumericError
from sensedist.hierarchy import default_hierarchy
from sensedist.model import (
    ModelConfig,
    MultiLevelClassifier,
    config_sha256,
    load_checkpoint,
    pool_single_label,
    save_checkpoint,
    softmax,
    to_distribution,
)

H = default_hierarchy()


def small_config(**kwargs):
    defaults = dict(
        encoder=EncoderSpec(model_id="hash-bow:32"), trunk_width=16, init_seed=7
    )
    defaults.update(kwargs)
    return ModelConfig(**defaults)


class TestConfig:
    def test_bad_dropout(self):
        with pytest.raises(ConfigError):
            ModelConfig(dropout_rate=1.0)
        with pytest.raises(ConfigError):
            ModelConfig(dropout_rate=-0.1)

    def test_round_trip(self):
        cfg = small_config(dropout_rate=0.25)
        clone = ModelConfig.from_dict(cfg.to_dict())
        assert clone == cfg


class TestForward:
    def test_head_sizes(self):
        model = MultiLevelClassifier(small_config())
        out = model(["first text here"], ["second text here"])
        assert out.scores1.shape == (1, 4)
        assert out.scores2.shape == (1, 14)
        assert out.scores3.shape == (1, 24)

    def test_trunk_width_defaults_to_encoder_width(self):
        model = MultiLevelClassifier(
            ModelConfig(encoder=EncoderSpec(model_id="hash-bow:32"), trunk_width=0)
        )
        assert model.trunk.out_features == 32

    def test_no_hidden_nonlinearity(self):
        """Head scores are an affine function of the encoder output."""
        model = MultiLevelClassifier(small_config(dropout_rate=0.0))
        model.eval()
        with torch.no_grad():
            enc = model.encoder(["some words"], ["other words"])
            manual = model.head2(model.trunk(enc))
            out = model(["some words"], ["other words"])
        np.testing.assert_allclose(
            out.scores2.numpy(), manual.numpy(), rtol=1e-6, atol=1e-7
        )

    def test_seeded_init_is_reproducible(self):
        a = MultiLevelClassifier(small_config())
        b = MultiLevelClassifier(small_config())
        for (na, pa), (nb, pb) in zip(a.named_parameters(), b.named_parameters()):
            assert na == nb
            np.testing.assert_array_equal(pa.detach().numpy(), pb.detach().numpy())

    def test_dropout_active_only_in_train_mode(self):
        model = MultiLevelClassifier(small_config(dropout_rate=0.5))
        args = (["alpha beta gamma delta"], ["epsilon zeta eta theta"])
        model.eval()
        with torch.no_grad():
            one = model(*args).scores2
            two = model(*args).scores2
        np.testing.assert_array_equal(one.numpy(), two.numpy())
        model.train()
        torch.manual_seed(0)
        with torch.no_grad():
            three = model(*args).scores2
            four = model(*args).scores2
        assert not np.allclose(three.numpy(), four.numpy())

    def test_gradients_reach_trunk_and_heads(self):
        model = MultiLevelClassifier(small_config(dropout_rate=0.0))
        out = model(["words here"], ["more words"])
        loss = out.scores1.sum() + out.scores2.sum() + out.scores3.sum()
        loss.backward()
        assert model.trunk.weight.grad is not None
        assert model.head3.weight.grad is not None
        assert torch.isfinite(model.trunk.weight.grad).all()

    def test_predict_distributions(self):
        model = MultiLevelClassifier(small_config())
        dists = model.predict_distributions(["one two"], ["three four"])
        for level, size in ((1, 4), (2, 14), (3, 24)):
            assert dists[level].shape == (1, size)
            np.testing.assert_allclose(dists[level].sum(), 1.0, rtol=1e-12)
        # eval-mode path: repeated calls agree even on a train-mode model
        model.train()
        again = model.predict_distributions(["one two"], ["three four"])
        np.testing.assert_array_equal(dists[2], again[2])
        assert model.training


class TestSoftmax:
    def test_matches_torch(self):
        rng = np.random.default_rng(3)
        scores = rng.normal(size=(5, 14)) * 10
        expected = torch.softmax(torch.tensor(scores), dim=1).numpy()
        np.testing.assert_allclose(softmax(scores), expected, rtol=1e-12)

    def test_stable_under_large_scores(self):
        out = softmax(np.array([1000.0, 1000.0, 999.0]))
        assert np.isfinite(out).all()
        np.testing.assert_allclose(out.sum(), 1.0, rtol=1e-12)

    def test_rejects_non_finite(self):
        with pytest.raises(NumericError):
            softmax(np.array([np.inf, 0.0]))

    def test_to_distribution(self):
        dist = to_distribution(np.zeros(4), level=1)
        assert isinstance(dist, LabelDistribution)
        np.testing.assert_allclose(dist.values, [0.25] * 4, rtol=1e-12)

    def test_to_distribution_rejects_matrix(self):
        with pytest.raises(NumericError):
            to_distribution(np.zeros((2, 4)), level=1)


class TestPoolSingleLabel:
    def test_majority(self):
        dist = LabelDistribution(1, (0.1, 0.6, 0.2, 0.1))
        assert pool_single_label(dist, H) == "Contingency"

    def test_tie_breaks_like_corpus_majorities(self):
        dist = LabelDistribution(1, (0.4, 0.4, 0.1, 0.1))
        assert pool_single_label(dist, H) == "Temporal"


class TestCheckpoint:
    def test_round_trip_preserves_outputs(self, tmp_path):
        model = MultiLevelClassifier(small_config())
        save_checkpoint(tmp_path / "ckpt", model, run_config_hash="abc123")
        loaded = load_checkpoint(tmp_path / "ckpt", expected_run_config_hash="abc123")
        args = (["same input text"], ["same second text"])
        model.eval()
        with torch.no_grad():
            want = model(*args).scores3.numpy()
            got = loaded(*args).scores3.numpy()
        np.testing.assert_array_equal(want, got)

    def test_wrong_run_config_hash_refused(self, tmp_path):
        model = MultiLevelClassifier(small_config())
        save_checkpoint(tmp_path / "ckpt", model, run_config_hash="abc123")
        with pytest.raises(DataError, match="configuration"):
            load_checkpoint(tmp_path / "ckpt", expected_run_config_hash="zzz")

    def test_not_a_checkpoint(self, tmp_path):
        with pytest.raises(DataError, match="checkpoint"):
            load_checkpoint(tmp_path)

    def test_config_sha256_is_order_insensitive(self):
        a = config_sha256({"x": 1, "y": [1, 2]})
        b = config_sha256({"y": [1, 2], "x": 1})
        assert a == b
        assert len(a) == 64
