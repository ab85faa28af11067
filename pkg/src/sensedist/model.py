"""Multi-level sense classifier.

One encoder reads the concatenated argument pair; a single linear trunk
with dropout feeds three independent linear heads, one per sense level
(4, 14, and 24 outputs). Heads emit raw scores; softmax happens in the
loss (for distribution losses) or in `to_distribution` when predictions
are materialized. No hidden nonlinearity anywhere.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .distributions import LabelDistribution
from .encoders import EncoderSpec, build_encoder, encoder_width
from .errors import ConfigError, DataError, NumericError
from .hierarchy import SenseHierarchy, default_hierarchy

CHECKPOINT_FORMAT = "sensedist-checkpoint v1"


@dataclass(frozen=True)
class ModelConfig:
    encoder: EncoderSpec = field(default_factory=EncoderSpec)
    trunk_width: int = 0  # 0 means: use the encoder's width
    dropout_rate: float = 0.1
    init_seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ConfigError(
                f"dropout_rate must be in [0, 1), got {self.dropout_rate!r}"
            )
        if self.trunk_width < 0:
            raise ConfigError(f"trunk_width must be >= 0, got {self.trunk_width}")

    def to_dict(self) -> dict:
        return {
            "encoder": {
                "model_id": self.encoder.model_id,
                "max_tokens": self.encoder.max_tokens,
                "pooling": self.encoder.pooling,
            },
            "trunk_width": self.trunk_width,
            "dropout_rate": self.dropout_rate,
            "init_seed": self.init_seed,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelConfig":
        enc = payload.get("encoder", {})
        return cls(
            encoder=EncoderSpec(
                model_id=enc.get("model_id", "hash-bow:256"),
                max_tokens=int(enc.get("max_tokens", 256)),
                pooling=enc.get("pooling", "first-token"),
            ),
            trunk_width=int(payload.get("trunk_width", 0)),
            dropout_rate=float(payload.get("dropout_rate", 0.1)),
            init_seed=int(payload.get("init_seed", 0)),
        )


@dataclass(frozen=True)
class HeadOutputs:
    """Raw scores from the three heads for one batch."""

    scores1: torch.Tensor
    scores2: torch.Tensor
    scores3: torch.Tensor

    def __post_init__(self):
        for scores, expected in zip(
            (self.scores1, self.scores2, self.scores3), (4, 14, 24)
        ):
            if scores.shape[-1] != expected:
                raise NumericError(
                    f"head emitted {scores.shape[-1]} scores, expected {expected}"
                )
            if not torch.isfinite(scores).all():
                raise NumericError("non-finite head scores")

    def scores(self, level: int) -> torch.Tensor:
        return {1: self.scores1, 2: self.scores2, 3: self.scores3}[level]


class MultiLevelClassifier(nn.Module):
    """Encoder -> linear trunk -> dropout -> three linear heads."""

    def __init__(self, config: ModelConfig, hierarchy: SenseHierarchy | None = None):
        super().__init__()
        self.config = config
        self.hierarchy = hierarchy or default_hierarchy()
        sizes = self.hierarchy.sizes()
        torch.manual_seed(config.init_seed)
        self.encoder = build_encoder(config.encoder)
        in_width = encoder_width(self.encoder)
        trunk_width = config.trunk_width or in_width
        self.trunk = nn.Linear(in_width, trunk_width)
        self.dropout = nn.Dropout(config.dropout_rate)
        self.head1 = nn.Linear(trunk_width, sizes[0])
        self.head2 = nn.Linear(trunk_width, sizes[1])
        self.head3 = nn.Linear(trunk_width, sizes[2])

    def forward(self, arg1s: list[str], arg2s: list[str]) -> HeadOutputs:
        hidden = self.dropout(self.trunk(self.encoder(arg1s, arg2s)))
        return HeadOutputs(self.head1(hidden), self.head2(hidden), self.head3(hidden))

    @torch.no_grad()
    def predict_distributions(
        self, arg1s: list[str], arg2s: list[str]
    ) -> dict[int, np.ndarray]:
        """Per-level predicted distributions for a batch, as [B, C] arrays."""
        was_training = self.training
        self.eval()
        try:
            outputs = self(arg1s, arg2s)
        finally:
            self.train(was_training)
        return {
            level: softmax(outputs.scores(level).double().numpy())
            for level in (1, 2, 3)
        }


def softmax(scores: np.ndarray) -> np.ndarray:
    """Numerically stable softmax over the last axis."""
    arr = np.asarray(scores, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise NumericError("non-finite scores cannot be normalized")
    shifted = arr - arr.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def to_distribution(scores, level: int) -> LabelDistribution:
    """Convert one head's raw score vector into a label distribution."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise NumericError(f"expected a score vector, got shape {arr.shape}")
    return LabelDistribution(level, tuple(softmax(arr).tolist()))


def pool_single_label(dist: LabelDistribution, hierarchy: SenseHierarchy) -> str:
    """Single-label view of a distribution: its majority sense.

    Uses the same argmax and lowest-canonical-index tie-break as corpus
    majority labels, so model predictions and gold majorities agree on
    tie handling.
    """
    dist.check_level_size(hierarchy)
    return hierarchy.names(dist.level)[dist.majority_index()]


def save_checkpoint(
    directory: str | Path,
    model: MultiLevelClassifier,
    run_config_hash: str,
) -> None:
    """Write model weights plus the hashes needed to validate reloads."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    torch.save(model.state_dict(), directory / "params.pt")
    (directory / "model_config.json").write_text(
        json.dumps(model.config.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    meta = {
        "format": CHECKPOINT_FORMAT,
        "hierarchy_sha256": model.hierarchy.schema_hash(),
        "run_config_sha256": run_config_hash,
    }
    (directory / "meta.json").write_text(
        json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def load_checkpoint(
    directory: str | Path,
    hierarchy: SenseHierarchy | None = None,
    expected_run_config_hash: str | None = None,
) -> MultiLevelClassifier:
    """Rebuild a model from a checkpoint directory, validating its hashes."""
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.exists():
        raise DataError(f"not a checkpoint directory: {directory}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise DataError(
            f"unsupported checkpoint format {meta.get('format')!r}, "
            f"expected {CHECKPOINT_FORMAT!r}"
        )
    hierarchy = hierarchy or default_hierarchy()
    if meta.get("hierarchy_sha256") != hierarchy.schema_hash():
        raise DataError(
            "checkpoint was trained against a different sense hierarchy "
            f"(schema hash {meta.get('hierarchy_sha256')!r})"
        )
    if (
        expected_run_config_hash is not None
        and meta.get("run_config_sha256") != expected_run_config_hash
    ):
        raise DataError(
            "checkpoint belongs to a different run configuration "
            f"(hash {meta.get('run_config_sha256')!r})"
        )
    config = ModelConfig.from_dict(
        json.loads((directory / "model_config.json").read_text(encoding="utf-8"))
    )
    model = MultiLevelClassifier(config, hierarchy)
    state = torch.load(directory / "params.pt", weights_only=True)
    model.load_state_dict(state)
    model.eval()
    return model


def config_sha256(payload: dict) -> str:
    """Stable hash of a JSON-serializable configuration."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
