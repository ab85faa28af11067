"""Declarative experiment configuration.

One YAML file describes a whole experiment: where the corpus lives, how
to split it, what model to build, how to train it, and what to evaluate
against. Commands read the sections they need and ignore the rest, so a
single file can drive prepare, train, evaluate, analyze, and baseline.

Schema (all sections optional unless a command requires them):

    corpus:
      path: data/corpus.csv        # distribution-annotated CSV
      delimiter: ","
      columns:                     # overrides for non-default headers
        id: itemid
        arg1: arg1
        arg2: arg2
        genre: genre
        senses: {}                 # canonical sense name -> column name
        genre_aliases: {}          # extra genre spellings
    prepared_dir: prepared         # where prepare writes its cache
    split:
      seed: 0
      ratios: [0.7, 0.1, 0.2]     # train, validation, test
    model:
      encoder: hash-bow:256        # or hf:<model_id>
      max_tokens: 256
      pooling: first-token         # or mean
      trunk_width: 0               # 0 keeps the encoder width
      dropout: 0.1
    training:
      loss: mae                    # ce | mae | mse | huber
      target_mode: ""              # majority | distribution; "" = per-loss default
      base_lr: 1.0e-5
      schedule: cosine_annealing   # none | linear | cosine_annealing | cosine_restarts
      epochs: 10
      batch_size: 16
      grad_clip: 0.0
      seeds: [1, 2, 3]
    pdtb:
      path: data/pdtb.tsv          # single-label TSV
      scheme: ji                   # lin | ji | cross
      delimiter: "\t"
      columns:
        section: section
        arg1: arg1
        arg2: arg2
        level1: sense_l1
        level2: sense_l2
    evaluate:
      run_dir: runs/best           # training output to load checkpoints from
      target: test-split           # test-split | pdtb
    baseline:
      n_draws: 10
      seed: 0
    analysis:
      agreement_level: 2
      k_values: [1, 3, 5, 10]
      references: data/refs.tsv    # co-annotated single labels: id <TAB> label
      distributions: preds.jsonl   # instance distributions to rank (jsonl)
      coherence_inputs:            # dataset name -> predictions.jsonl
        in-corpus: runs/best/seed_1/predictions.jsonl
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .corpus import ColumnMap
from .encoders import EncoderSpec
from .errors import ConfigError
from .model import ModelConfig, config_sha256
from .pdtb import SCHEMES, PdtbColumnMap
from .training import TrainingSettings

DEFAULT_RATIOS = (0.7, 0.1, 0.2)

_KNOWN_SECTIONS = (
    "corpus",
    "prepared_dir",
    "split",
    "model",
    "training",
    "evaluate",
    "pdtb",
    "baseline",
    "analysis",
)

EVALUATE_TARGETS = ("test-split", "pdtb")


@dataclass(frozen=True)
class CorpusSection:
    path: str = ""
    delimiter: str = ","
    columns: dict = field(default_factory=dict)

    def column_map(self) -> ColumnMap:
        return ColumnMap(**self.columns)


@dataclass(frozen=True)
class SplitSection:
    seed: int = 0
    ratios: tuple[float, float, float] = DEFAULT_RATIOS


@dataclass(frozen=True)
class PdtbSection:
    path: str = ""
    scheme: str = "ji"
    delimiter: str = "\t"
    columns: dict = field(default_factory=dict)

    def column_map(self) -> PdtbColumnMap:
        return PdtbColumnMap(**self.columns)


@dataclass(frozen=True)
class EvaluateSection:
    run_dir: str = ""
    target: str = "test-split"


@dataclass(frozen=True)
class BaselineSection:
    n_draws: int = 10
    seed: int = 0


@dataclass(frozen=True)
class AnalysisSection:
    agreement_level: int = 2
    k_values: tuple[int, ...] = (1, 3, 5, 10)
    references: str = ""
    distributions: str = ""
    coherence_inputs: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ExperimentConfig:
    corpus: CorpusSection = field(default_factory=CorpusSection)
    prepared_dir: str = "prepared"
    split: SplitSection = field(default_factory=SplitSection)
    model_section: dict = field(default_factory=dict)
    training_section: dict = field(default_factory=dict)
    seeds: tuple[int, ...] = (1, 2, 3)
    evaluate: EvaluateSection = field(default_factory=EvaluateSection)
    pdtb: PdtbSection = field(default_factory=PdtbSection)
    baseline: BaselineSection = field(default_factory=BaselineSection)
    analysis: AnalysisSection = field(default_factory=AnalysisSection)
    raw: dict = field(default_factory=dict)

    def model_config(self, init_seed: int = 0) -> ModelConfig:
        section = self.model_section
        spec = EncoderSpec(
            model_id=section.get("encoder", "hash-bow:256"),
            max_tokens=section.get("max_tokens", 256),
            pooling=section.get("pooling", "first-token"),
        )
        return ModelConfig(
            encoder=spec,
            trunk_width=section.get("trunk_width", 0),
            dropout_rate=section.get("dropout", 0.1),
            init_seed=init_seed,
        )

    def training_settings(self) -> TrainingSettings:
        section = dict(self.training_section)
        section.pop("seeds", None)
        return TrainingSettings(**section)

    def sha256(self) -> str:
        return config_sha256(self.raw)


def _require_mapping(value: Any, where: str, problems: list[str]) -> dict:
    if value is None:
        return {}
    if not isinstance(value, dict):
        problems.append(f"{where}: expected a mapping, got {type(value).__name__}")
        return {}
    return value


def _int_field(section: dict, key: str, default: int, where: str, problems) -> int:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        problems.append(f"{where}.{key}: expected an integer, got {value!r}")
        return default
    return value


def _build(payload: dict, problems: list[str]) -> ExperimentConfig:
    for key in payload:
        if key not in _KNOWN_SECTIONS:
            problems.append(
                f"unknown top-level key: {key!r}; known keys: {_KNOWN_SECTIONS}"
            )

    corpus_raw = _require_mapping(payload.get("corpus"), "corpus", problems)
    corpus = CorpusSection(
        path=str(corpus_raw.get("path", "")),
        delimiter=str(corpus_raw.get("delimiter", ",")),
        columns=_require_mapping(corpus_raw.get("columns"), "corpus.columns", problems),
    )

    split_raw = _require_mapping(payload.get("split"), "split", problems)
    ratios = split_raw.get("ratios", list(DEFAULT_RATIOS))
    if (
        not isinstance(ratios, (list, tuple))
        or len(ratios) != 3
        or not all(isinstance(r, (int, float)) for r in ratios)
    ):
        problems.append(f"split.ratios: expected three numbers, got {ratios!r}")
        ratios = DEFAULT_RATIOS
    split = SplitSection(
        seed=_int_field(split_raw, "seed", 0, "split", problems),
        ratios=tuple(float(r) for r in ratios),
    )

    model_section = _require_mapping(payload.get("model"), "model", problems)
    for key in model_section:
        if key not in ("encoder", "max_tokens", "pooling", "trunk_width", "dropout"):
            problems.append(f"model.{key}: unknown key")

    training_raw = _require_mapping(payload.get("training"), "training", problems)
    seeds = training_raw.get("seeds", [1, 2, 3])
    if (
        not isinstance(seeds, (list, tuple))
        or not seeds
        or not all(isinstance(s, int) and not isinstance(s, bool) for s in seeds)
    ):
        problems.append(f"training.seeds: expected a non-empty integer list, got {seeds!r}")
        seeds = [1, 2, 3]
    if len(set(seeds)) != len(seeds):
        problems.append(f"training.seeds: duplicate seeds in {seeds!r}")

    evaluate_raw = _require_mapping(payload.get("evaluate"), "evaluate", problems)
    target = str(evaluate_raw.get("target", "test-split"))
    if target not in EVALUATE_TARGETS:
        problems.append(
            f"evaluate.target: unknown target {target!r}; choose from {EVALUATE_TARGETS}"
        )
        target = "test-split"
    evaluate = EvaluateSection(
        run_dir=str(evaluate_raw.get("run_dir", "")), target=target
    )

    pdtb_raw = _require_mapping(payload.get("pdtb"), "pdtb", problems)
    scheme = str(pdtb_raw.get("scheme", "ji"))
    if scheme not in SCHEMES:
        problems.append(f"pdtb.scheme: unknown scheme {scheme!r}; choose from {SCHEMES}")
        scheme = "ji"
    pdtb = PdtbSection(
        path=str(pdtb_raw.get("path", "")),
        scheme=scheme,
        delimiter=str(pdtb_raw.get("delimiter", "\t")),
        columns=_require_mapping(pdtb_raw.get("columns"), "pdtb.columns", problems),
    )

    baseline_raw = _require_mapping(payload.get("baseline"), "baseline", problems)
    baseline = BaselineSection(
        n_draws=_int_field(baseline_raw, "n_draws", 10, "baseline", problems),
        seed=_int_field(baseline_raw, "seed", 0, "baseline", problems),
    )
    if baseline.n_draws < 1:
        problems.append(f"baseline.n_draws: must be >= 1, got {baseline.n_draws}")

    analysis_raw = _require_mapping(payload.get("analysis"), "analysis", problems)
    k_values = analysis_raw.get("k_values", [1, 3, 5, 10])
    if not isinstance(k_values, (list, tuple)) or not all(
        isinstance(k, int) and not isinstance(k, bool) and k >= 1 for k in k_values
    ):
        problems.append(
            f"analysis.k_values: expected positive integers, got {k_values!r}"
        )
        k_values = [1, 3, 5, 10]
    agreement_level = _int_field(analysis_raw, "agreement_level", 2, "analysis", problems)
    if agreement_level not in (1, 2, 3):
        problems.append(
            f"analysis.agreement_level: must be 1, 2, or 3, got {agreement_level}"
        )
        agreement_level = 2
    coherence_inputs = _require_mapping(
        analysis_raw.get("coherence_inputs"), "analysis.coherence_inputs", problems
    )
    analysis = AnalysisSection(
        agreement_level=agreement_level,
        k_values=tuple(k_values),
        references=str(analysis_raw.get("references", "")),
        distributions=str(analysis_raw.get("distributions", "")),
        coherence_inputs={str(k): str(v) for k, v in coherence_inputs.items()},
    )

    prepared_dir = payload.get("prepared_dir", "prepared")
    if not isinstance(prepared_dir, str) or not prepared_dir:
        problems.append(f"prepared_dir: expected a non-empty string, got {prepared_dir!r}")
        prepared_dir = "prepared"

    return ExperimentConfig(
        corpus=corpus,
        prepared_dir=prepared_dir,
        split=split,
        model_section=model_section,
        training_section=training_raw,
        seeds=tuple(seeds),
        evaluate=evaluate,
        pdtb=pdtb,
        baseline=baseline,
        analysis=analysis,
        raw=payload,
    )


def parse_config(payload: dict) -> ExperimentConfig:
    """Validate a config mapping, reporting every problem at once."""
    problems: list[str] = []
    config = _build(payload, problems)
    if not problems:
        # Constructing the derived objects surfaces field-level errors
        # (unknown loss names, bad encoder specs) with their own messages.
        try:
            config.model_config()
            config.training_settings()
            config.corpus.column_map()
            config.pdtb.column_map()
        except ConfigError as exc:
            problems.append(str(exc))
        except TypeError as exc:
            problems.append(str(exc))
    if problems:
        raise ConfigError("invalid config:\n  " + "\n  ".join(problems))
    return config


def load_config(path: str | Path) -> ExperimentConfig:
    """Read and validate a YAML experiment config."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        payload = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file {path} is not valid YAML: {exc}") from exc
    if payload is None:
        payload = {}
    if not isinstance(payload, dict):
        raise ConfigError(
            f"config file {path} must contain a mapping at the top level"
        )
    return parse_config(payload)
