"""Argument-pair encoders.

Two providers, selected by the model id prefix:

  hash-bow:<width>   deterministic hashed bag-of-words; no parameters, no
                     downloads; meant for fast tests and pipeline checks
  hf:<model_id>      a pretrained transformer encoder, fine-tuned with the
                     rest of the model (requires the optional hf extra)

Both encode the two arguments jointly into one vector per pair and apply
the same length policy: when the pair exceeds max_tokens, each argument
is truncated from the end, proportionally to its length.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .errors import ConfigError, DataError, EncoderProviderError

POOLING_MODES = ("first-token", "mean")

_TOKEN_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class EncoderSpec:
    """How to build the argument encoder."""

    model_id: str = "hash-bow:256"
    max_tokens: int = 256
    pooling: str = "first-token"

    def __post_init__(self):
        if self.max_tokens < 16:
            raise ConfigError(f"max_tokens must be at least 16, got {self.max_tokens}")
        if self.pooling not in POOLING_MODES:
            raise ConfigError(
                f"unknown pooling mode: {self.pooling!r}; choose from {POOLING_MODES}"
            )
        provider = self.model_id.split(":", 1)[0]
        if provider not in ("hash-bow", "hf"):
            raise ConfigError(
                f"unknown encoder provider: {self.model_id!r}; "
                "expected hash-bow:<width> or hf:<model_id>"
            )


def proportional_truncate(n1: int, n2: int, budget: int) -> tuple[int, int]:
    """Token counts to keep from each argument under a shared budget.

    Lengths shrink proportionally, from the end of each argument; a
    nonempty argument always keeps at least one token when the budget
    allows both.
    """
    if budget < 2:
        raise ConfigError(f"token budget must be at least 2, got {budget}")
    if n1 + n2 <= budget:
        return n1, n2
    k1 = round(budget * n1 / (n1 + n2))
    if n1 > 0:
        k1 = max(k1, 1)
    if n2 > 0:
        k1 = min(k1, budget - 1)
    k1 = min(k1, n1)
    k2 = min(budget - k1, n2)
    return k1, k2


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


class HashedBowEncoder(nn.Module):
    """Frozen bag-of-words over hashed token buckets.

    Each argument occupies one half of the output vector; token buckets
    come from a stable hash, so encodings are identical across runs and
    platforms. The module has no trainable parameters.
    """

    def __init__(self, width: int, max_tokens: int = 256):
        super().__init__()
        if width < 2 or width % 2:
            raise ConfigError(f"hash-bow width must be even and >= 2, got {width}")
        self.width = width
        self.max_tokens = max_tokens

    @staticmethod
    def _bucket(token: str, buckets: int) -> int:
        digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
        return int.from_bytes(digest, "big") % buckets

    def encode_pair(self, arg1: str, arg2: str) -> np.ndarray:
        if not arg1.strip() or not arg2.strip():
            raise DataError("empty argument text cannot be encoded")
        half = self.width // 2
        t1, t2 = tokenize(arg1), tokenize(arg2)
        k1, k2 = proportional_truncate(len(t1), len(t2), self.max_tokens)
        vec = np.zeros(self.width, dtype=np.float64)
        for tok in t1[:k1]:
            vec[self._bucket(tok, half)] += 1.0
        for tok in t2[:k2]:
            vec[half + self._bucket(tok, half)] += 1.0
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def forward(self, arg1s: list[str], arg2s: list[str]) -> torch.Tensor:
        if len(arg1s) != len(arg2s):
            raise DataError(
                f"argument lists differ in length: {len(arg1s)} vs {len(arg2s)}"
            )
        rows = [self.encode_pair(a1, a2) for a1, a2 in zip(arg1s, arg2s)]
        return torch.tensor(np.stack(rows), dtype=torch.float32)


class TransformerArgumentEncoder(nn.Module):
    """Pretrained transformer over the concatenated argument pair."""

    def __init__(self, model_id: str, max_tokens: int = 256, pooling: str = "first-token"):
        super().__init__()
        try:
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise EncoderProviderError(
                "the hf encoder needs the transformers package; "
                "install the package's hf extra"
            ) from exc
        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_id)
            self.model = AutoModel.from_pretrained(model_id)
        except Exception as exc:
            raise EncoderProviderError(
                f"could not load pretrained encoder {model_id!r}: {exc}"
            ) from exc
        self.max_tokens = max_tokens
        self.pooling = pooling
        self.width = int(self.model.config.hidden_size)

    def _pair_ids(self, arg1: str, arg2: str) -> list[int]:
        if not arg1.strip() or not arg2.strip():
            raise DataError("empty argument text cannot be encoded")
        ids1 = self.tokenizer.encode(arg1, add_special_tokens=False)
        ids2 = self.tokenizer.encode(arg2, add_special_tokens=False)
        budget = self.max_tokens - self.tokenizer.num_special_tokens_to_add(pair=True)
        k1, k2 = proportional_truncate(len(ids1), len(ids2), budget)
        return self.tokenizer.build_inputs_with_special_tokens(ids1[:k1], ids2[:k2])

    def forward(self, arg1s: list[str], arg2s: list[str]) -> torch.Tensor:
        if len(arg1s) != len(arg2s):
            raise DataError(
                f"argument lists differ in length: {len(arg1s)} vs {len(arg2s)}"
            )
        batch = [self._pair_ids(a1, a2) for a1, a2 in zip(arg1s, arg2s)]
        width = max(len(ids) for ids in batch)
        pad_id = self.tokenizer.pad_token_id or 0
        input_ids = torch.full((len(batch), width), pad_id, dtype=torch.long)
        mask = torch.zeros((len(batch), width), dtype=torch.long)
        for i, ids in enumerate(batch):
            input_ids[i, : len(ids)] = torch.tensor(ids, dtype=torch.long)
            mask[i, : len(ids)] = 1
        hidden = self.model(input_ids=input_ids, attention_mask=mask).last_hidden_state
        if self.pooling == "first-token":
            return hidden[:, 0]
        weights = mask.unsqueeze(-1).to(hidden.dtype)
        return (hidden * weights).sum(dim=1) / weights.sum(dim=1).clamp(min=1.0)


def build_encoder(spec: EncoderSpec) -> nn.Module:
    provider, _, arg = spec.model_id.partition(":")
    if provider == "hash-bow":
        try:
            width = int(arg)
        except ValueError:
            raise ConfigError(f"bad hash-bow width: {arg!r}") from None
        return HashedBowEncoder(width, spec.max_tokens)
    return TransformerArgumentEncoder(arg, spec.max_tokens, spec.pooling)


def encoder_width(encoder: nn.Module) -> int:
    return int(encoder.width)


def encode(arg1: str, arg2: str, spec: EncoderSpec) -> np.ndarray:
    """One-off encoding of a single pair (builds the encoder; test helper)."""
    encoder = build_encoder(spec)
    with torch.no_grad():
        return encoder([arg1], [arg2])[0].numpy()
