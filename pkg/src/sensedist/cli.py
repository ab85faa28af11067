"""Command line interface.

Five verbs, all driven by one YAML config:

    prepare   ingest the corpus, adapt the label space, write splits
    train     train one model per seed on the prepared data
    evaluate  score a finished run on the held-out split or a PDTB set
    baseline  sample the random baseline on the test split
    analyze   top-k agreement and cross-level coherence reports

Exit codes: 0 success, 2 config error, 3 data error, 4 runtime error.
Each verb writes into its own output directory, refuses to overwrite
existing outputs without --force, takes a writer lock while running,
and leaves a manifest.json describing inputs and outputs.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import agreement_report, coherence_report, mean_marginals, random_baseline
from .config import ExperimentConfig, load_config
from .corpus import (
    adapt_corpus,
    adapted_mass_sums,
    instances_to_jsonl,
    load_discogem,
    load_instances,
)
from .distributions import LabelDistribution
from .errors import ConfigError, DataError, SensedistError
from .hierarchy import SenseHierarchy, default_hierarchy
from .manifest import DirectoryLock, RunManifest, file_sha256
from .model import load_checkpoint, pool_single_label
from .pdtb import load_pdtb_splits
from .reports import (
    metrics_payload,
    render_coherence_table,
    render_majority_counts,
    render_mass_sums,
    render_report_text,
    render_summary_table,
    write_coherence_csv,
    write_confusion_csv,
    write_json,
    agreement_payload,
)
from .splits import SPLIT_NAMES, SplitAssignment, stratified_split
from .training import (
    PredictionRecord,
    aggregate_reports,
    load_predictions,
    predict,
    predictions_to_jsonl,
    run_seeds,
    score_predictions,
    score_single_label_predictions,
)
from .metrics import aggregate_mean_std

log = logging.getLogger(__name__)

_PREPARE_OUTPUTS = ("instances.jsonl", "splits.json", "stats.json")


def _claim_out_dir(out_dir: Path, force: bool) -> None:
    """Refuse to write over previous outputs unless forced."""
    if out_dir.exists() and any(out_dir.iterdir()):
        if not force:
            raise ConfigError(
                f"output directory {out_dir} is not empty; pass --force to overwrite"
            )
    out_dir.mkdir(parents=True, exist_ok=True)


def _require_path(value: str, what: str) -> Path:
    if not value:
        raise ConfigError(f"config does not name a {what}")
    path = Path(value)
    if not path.exists():
        raise ConfigError(f"{what} does not exist: {path}")
    return path


def _load_prepared(config: ExperimentConfig):
    prepared = Path(config.prepared_dir)
    instances_path = prepared / "instances.jsonl"
    splits_path = prepared / "splits.json"
    if not instances_path.exists() or not splits_path.exists():
        raise DataError(
            f"prepared directory {prepared} is missing instances.jsonl or "
            f"splits.json; run prepare first"
        )
    instances = load_instances(instances_path)
    assignment = SplitAssignment.load(splits_path)
    return instances, assignment, [instances_path, splits_path]


def cmd_prepare(
    config: ExperimentConfig, out_dir: Path, force: bool, seed: int | None = None
) -> None:
    corpus_path = _require_path(config.corpus.path, "corpus path")
    hierarchy = default_hierarchy()
    _claim_out_dir(out_dir, force)
    with DirectoryLock(out_dir):
        manifest = RunManifest(
            command="prepare",
            config_sha256=config.sha256(),
            hierarchy_sha256=hierarchy.schema_hash(),
            input_hashes={str(corpus_path): file_sha256(corpus_path)},
        )
        manifest.save(out_dir)

        raws = load_discogem(
            corpus_path, config.corpus.column_map(), delimiter=config.corpus.delimiter
        )
        instances, degenerate_ids = adapt_corpus(raws, hierarchy)
        split_seed = config.split.seed if seed is None else seed
        assignment = stratified_split(
            instances, ratios=config.split.ratios, seed=split_seed
        )

        (out_dir / "instances.jsonl").write_text(
            instances_to_jsonl(instances), encoding="utf-8"
        )
        assignment.save(out_dir / "splits.json")

        mass_sums = adapted_mass_sums(instances, hierarchy)
        majority_counts: dict[str, dict[int, dict[str, int]]] = {}
        for split in SPLIT_NAMES:
            members = assignment.select(instances, split)
            per_level: dict[int, dict[str, int]] = {}
            for level in (1, 2, 3):
                counts: dict[str, int] = {}
                for inst in members:
                    name = inst.majority(level)
                    counts[name] = counts.get(name, 0) + 1
                per_level[level] = counts
            majority_counts[split] = per_level
        stats = {
            "n_rows": len(raws),
            "n_instances": len(instances),
            "degenerate_ids": list(degenerate_ids),
            "split_seed": split_seed,
            "split_counts": {s: len(assignment.ids(s)) for s in SPLIT_NAMES},
            "mass_sums": {
                str(level): sums for level, sums in mass_sums.items()
            },
            "majority_counts": {
                split: {str(level): counts for level, counts in per_level.items()}
                for split, per_level in majority_counts.items()
            },
        }
        write_json(out_dir / "stats.json", stats)
        text = [
            f"rows: {len(raws)}  adapted instances: {len(instances)}  "
            f"degenerate: {len(degenerate_ids)}",
            "",
            render_mass_sums(mass_sums),
            "",
            "majority-label counts per split (level 2)",
            render_majority_counts(majority_counts, 2),
        ]
        (out_dir / "stats.txt").write_text("\n".join(text), encoding="utf-8")

        manifest.outputs = list(_PREPARE_OUTPUTS) + ["stats.txt"]
        manifest.mark_complete()
        manifest.save(out_dir)
    print(
        f"prepared {len(instances)} instances "
        f"({len(degenerate_ids)} degenerate dropped) -> {out_dir}"
    )


def cmd_train(
    config: ExperimentConfig, out_dir: Path, force: bool, seed: int | None = None
) -> None:
    hierarchy = default_hierarchy()
    instances, assignment, input_paths = _load_prepared(config)
    train_set = assignment.select(instances, "train")
    val_set = assignment.select(instances, "validation")
    test_set = assignment.select(instances, "test")
    seeds = [seed] if seed is not None else list(config.seeds)

    _claim_out_dir(out_dir, force)
    with DirectoryLock(out_dir):
        manifest = RunManifest(
            command="train",
            config_sha256=config.sha256(),
            hierarchy_sha256=hierarchy.schema_hash(),
            input_hashes={str(p): file_sha256(p) for p in input_paths},
            seeds=seeds,
        )
        manifest.save(out_dir)  # incomplete until training finishes

        aggregate = run_seeds(
            config.model_config(),
            config.training_settings(),
            seeds=seeds,
            train_instances=train_set,
            val_instances=val_set,
            test_instances=test_set,
            hierarchy=hierarchy,
            out_dir=out_dir,
            run_config_hash=config.sha256(),
        )

        payload = metrics_payload(
            [run.reports for run in aggregate.runs], aggregate.summary
        )
        write_json(out_dir / "metrics.json", payload)
        report_text = render_report_text(payload)
        (out_dir / "report.txt").write_text(report_text, encoding="utf-8")

        manifest.outputs = ["metrics.json", "report.txt"] + [
            f"seed_{s}" for s in seeds
        ]
        manifest.mark_complete()
        manifest.save(out_dir)
    print(render_summary_table(payload), end="")
    print(f"run written to {out_dir}")


def _discover_seed_checkpoints(run_dir: Path) -> list[tuple[int, Path]]:
    found = []
    for child in sorted(run_dir.glob("seed_*")):
        checkpoint = child / "checkpoint"
        if checkpoint.is_dir():
            try:
                found.append((int(child.name.split("_", 1)[1]), checkpoint))
            except ValueError:
                continue
    if not found:
        raise DataError(f"no seed_*/checkpoint directories under {run_dir}")
    return sorted(found)


def _evaluate_test_split(
    config: ExperimentConfig,
    out_dir: Path,
    hierarchy: SenseHierarchy,
    checkpoints: list[tuple[int, Path]],
) -> dict:
    instances, assignment, _ = _load_prepared(config)
    test_set = assignment.select(instances, "test")
    if not test_set:
        raise DataError("prepared test split is empty")
    per_seed_reports = []
    for seed, checkpoint in checkpoints:
        model = load_checkpoint(checkpoint, hierarchy)
        records = predict(model, test_set, hierarchy)
        reports = score_predictions(records, test_set, hierarchy)
        per_seed_reports.append(reports)
        seed_dir = out_dir / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        (seed_dir / "predictions.jsonl").write_text(
            predictions_to_jsonl(records), encoding="utf-8"
        )
        for level in (1, 2, 3):
            write_confusion_csv(
                seed_dir / f"confusion_level{level}.csv",
                reports[level],
                hierarchy.names(level),
            )
        coherence = coherence_report(
            [r.labels[1] for r in records], [r.labels[2] for r in records], hierarchy
        )
        write_json(seed_dir / "coherence.json", coherence.to_dict())
    return metrics_payload(per_seed_reports, aggregate_reports(per_seed_reports))


def _evaluate_pdtb(
    config: ExperimentConfig,
    out_dir: Path,
    hierarchy: SenseHierarchy,
    checkpoints: list[tuple[int, Path]],
) -> dict:
    pdtb_path = _require_path(config.pdtb.path, "PDTB file path")
    test_sets, dropped = load_pdtb_splits(
        pdtb_path,
        config.pdtb.scheme,
        config.pdtb.column_map(),
        delimiter=config.pdtb.delimiter,
        hierarchy=hierarchy,
    )
    if dropped:
        log.warning("dropped %d relations with out-of-set senses", dropped)

    if config.pdtb.scheme != "cross":
        test_set = test_sets[0]
        per_seed_reports = []
        for seed, checkpoint in checkpoints:
            model = load_checkpoint(checkpoint, hierarchy)
            records = predict(model, list(test_set.instances), hierarchy)
            reports = score_single_label_predictions(records, test_set, hierarchy)
            per_seed_reports.append(reports)
            seed_dir = out_dir / f"seed_{seed}"
            seed_dir.mkdir(parents=True, exist_ok=True)
            (seed_dir / "predictions.jsonl").write_text(
                predictions_to_jsonl(records), encoding="utf-8"
            )
            for level in (1, 2):
                write_confusion_csv(
                    seed_dir / f"confusion_level{level}.csv",
                    reports[level],
                    hierarchy.names(level),
                )
            coherence = coherence_report(
                [r.labels[1] for r in records],
                [r.labels[2] for r in records],
                hierarchy,
            )
            write_json(seed_dir / "coherence.json", coherence.to_dict())
        payload = metrics_payload(per_seed_reports, aggregate_reports(per_seed_reports))
        payload["test_set"] = test_set.name
        payload["dropped_out_of_set"] = dropped
        return payload

    # Cross-validation scheme: score each fold, then average the fold
    # scores within a seed before aggregating across seeds. Folds whose
    # sections have no usable relations are skipped, not scored as zero.
    skipped_folds = [ts.name for ts in test_sets if not ts.instances]
    test_sets = [ts for ts in test_sets if ts.instances]
    if skipped_folds:
        log.warning("skipping empty folds: %s", ", ".join(skipped_folds))
    per_fold_per_seed: dict[str, list] = {ts.name: [] for ts in test_sets}
    fold_means: dict[int, dict[int, list[float]]] = {1: {}, 2: {}}
    for seed, checkpoint in checkpoints:
        model = load_checkpoint(checkpoint, hierarchy)
        all_records: list[PredictionRecord] = []
        for test_set in test_sets:
            records = predict(model, list(test_set.instances), hierarchy)
            reports = score_single_label_predictions(records, test_set, hierarchy)
            per_fold_per_seed[test_set.name].append(reports)
            all_records.extend(records)
            for level in (1, 2):
                fold_means[level].setdefault(seed, []).append(
                    reports[level].f1_weighted
                )
        seed_dir = out_dir / f"seed_{seed}"
        seed_dir.mkdir(parents=True, exist_ok=True)
        (seed_dir / "predictions.jsonl").write_text(
            predictions_to_jsonl(all_records), encoding="utf-8"
        )
        coherence = coherence_report(
            [r.labels[1] for r in all_records],
            [r.labels[2] for r in all_records],
            hierarchy,
        )
        write_json(seed_dir / "coherence.json", coherence.to_dict())

    folds_dir = out_dir / "folds"
    folds_dir.mkdir(parents=True, exist_ok=True)
    for test_set in test_sets:
        reports_list = per_fold_per_seed[test_set.name]
        fold_payload = metrics_payload(reports_list, aggregate_reports(reports_list))
        fold_payload["test_set"] = test_set.name
        write_json(folds_dir / f"{test_set.name}.json", fold_payload)

    n_instances = sum(len(ts.instances) for ts in test_sets)
    payload: dict = {}
    for level in (1, 2):
        seed_fold_means = [
            float(np.mean(fold_means[level][seed])) for seed, _ in checkpoints
        ]
        payload[f"level{level}"] = {
            "n_instances": n_instances,
            "js_mean": None,
            "f1_weighted": aggregate_mean_std(seed_fold_means),
            "per_sense": {},
        }
    payload["seeds"] = len(checkpoints)
    payload["aggregation"] = "fold-averaged per seed, then mean ± sample std (n-1)"
    payload["js_log_base"] = 2
    payload["folds"] = len(test_sets)
    payload["skipped_folds"] = skipped_folds
    payload["dropped_out_of_set"] = dropped
    return payload


def cmd_evaluate(
    config: ExperimentConfig, out_dir: Path, force: bool, seed: int | None = None
) -> None:
    hierarchy = default_hierarchy()
    run_dir = Path(_require_path(config.evaluate.run_dir, "evaluation run_dir"))
    run_manifest = RunManifest.load(run_dir, verify_inputs=False)
    if run_manifest.hierarchy_sha256 != hierarchy.schema_hash():
        raise DataError(
            "run directory was trained against a different sense hierarchy "
            f"({run_manifest.hierarchy_sha256[:12]}... vs "
            f"{hierarchy.schema_hash()[:12]}...); refusing to evaluate"
        )
    checkpoints = _discover_seed_checkpoints(run_dir)
    if seed is not None:
        checkpoints = [(s, c) for s, c in checkpoints if s == seed]
        if not checkpoints:
            raise ConfigError(f"run directory has no checkpoint for seed {seed}")

    _claim_out_dir(out_dir, force)
    with DirectoryLock(out_dir):
        manifest = RunManifest(
            command="evaluate",
            config_sha256=config.sha256(),
            hierarchy_sha256=hierarchy.schema_hash(),
            seeds=[s for s, _ in checkpoints],
        )
        manifest.save(out_dir)
        if config.evaluate.target == "pdtb":
            payload = _evaluate_pdtb(config, out_dir, hierarchy, checkpoints)
        else:
            payload = _evaluate_test_split(config, out_dir, hierarchy, checkpoints)
        write_json(out_dir / "metrics.json", payload)
        (out_dir / "report.txt").write_text(
            render_summary_table(payload), encoding="utf-8"
        )
        manifest.outputs = ["metrics.json", "report.txt"]
        manifest.mark_complete()
        manifest.save(out_dir)
    print(render_summary_table(payload), end="")


def cmd_baseline(
    config: ExperimentConfig, out_dir: Path, force: bool, seed: int | None = None
) -> None:
    hierarchy = default_hierarchy()
    instances, assignment, input_paths = _load_prepared(config)
    train_set = assignment.select(instances, "train")
    test_set = assignment.select(instances, "test")
    if not train_set or not test_set:
        raise DataError("baseline needs non-empty train and test splits")
    baseline_seed = config.baseline.seed if seed is None else seed

    _claim_out_dir(out_dir, force)
    with DirectoryLock(out_dir):
        manifest = RunManifest(
            command="baseline",
            config_sha256=config.sha256(),
            hierarchy_sha256=hierarchy.schema_hash(),
            input_hashes={str(p): file_sha256(p) for p in input_paths},
            seeds=[baseline_seed],
        )
        manifest.save(out_dir)

        marginals = mean_marginals(train_set, hierarchy)
        draws = random_baseline(
            marginals,
            n_instances=len(test_set),
            n_draws=config.baseline.n_draws,
            seed=baseline_seed,
        )
        records = []
        for i, inst in enumerate(test_set):
            dists = {level: draws[level][i] for level in (1, 2, 3)}
            labels = {
                level: pool_single_label(
                    LabelDistribution(level, tuple(float(v) for v in dists[level])),
                    hierarchy,
                )
                for level in (1, 2, 3)
            }
            records.append(PredictionRecord(id=inst.id, dists=dists, labels=labels))
        (out_dir / "predictions.jsonl").write_text(
            predictions_to_jsonl(records), encoding="utf-8"
        )
        reports = score_predictions(records, test_set, hierarchy)
        payload = metrics_payload([reports], aggregate_reports([reports]))
        payload["baseline"] = {
            "n_draws": config.baseline.n_draws,
            "seed": baseline_seed,
            "marginal_source": "train split",
        }
        write_json(out_dir / "metrics.json", payload)
        (out_dir / "report.txt").write_text(
            render_report_text(payload), encoding="utf-8"
        )
        manifest.outputs = ["predictions.jsonl", "metrics.json", "report.txt"]
        manifest.mark_complete()
        manifest.save(out_dir)
    print(render_summary_table(payload), end="")


def _load_references(path: Path) -> dict[str, str]:
    delimiter = "," if path.suffix.lower() == ".csv" else "\t"
    refs: dict[str, str] = {}
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh, delimiter=delimiter)
        if reader.fieldnames is None or not {"id", "label"} <= set(reader.fieldnames):
            raise DataError(
                f"reference file {path} needs 'id' and 'label' columns, "
                f"found {reader.fieldnames}"
            )
        for row in reader:
            refs[row["id"]] = row["label"]
    if not refs:
        raise DataError(f"reference file {path} has no rows")
    return refs


def _load_distribution_records(path: Path, level: int) -> dict[str, list[float]]:
    key = f"dist{level}"
    out: dict[str, list[float]] = {}
    for lineno, line in enumerate(
        path.read_text(encoding="utf-8").splitlines(), start=1
    ):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
            out[record["id"]] = record[key]
        except (json.JSONDecodeError, KeyError) as exc:
            raise DataError(f"{path}:{lineno}: bad distribution record: {exc}")
    if not out:
        raise DataError(f"distribution file {path} has no records")
    return out


def cmd_analyze(
    config: ExperimentConfig, out_dir: Path, force: bool, seed: int | None = None
) -> None:
    hierarchy = default_hierarchy()
    analysis = config.analysis
    wants_agreement = bool(analysis.references or analysis.distributions)
    wants_coherence = bool(analysis.coherence_inputs)
    if not wants_agreement and not wants_coherence:
        raise ConfigError(
            "analysis section names neither references/distributions nor "
            "coherence_inputs; nothing to analyze"
        )

    _claim_out_dir(out_dir, force)
    with DirectoryLock(out_dir):
        manifest = RunManifest(
            command="analyze",
            config_sha256=config.sha256(),
            hierarchy_sha256=hierarchy.schema_hash(),
        )
        manifest.save(out_dir)
        outputs = []
        text_parts = []

        if wants_agreement:
            refs_path = _require_path(analysis.references, "reference label file")
            dists_path = _require_path(
                analysis.distributions, "distribution file for agreement"
            )
            refs = _load_references(refs_path)
            dist_rows = _load_distribution_records(dists_path, analysis.agreement_level)
            missing = [rid for rid in refs if rid not in dist_rows]
            if missing:
                raise DataError(
                    f"{len(missing)} reference ids have no distribution "
                    f"(first: {missing[0]!r})"
                )
            ordered = sorted(refs)
            dists = [
                LabelDistribution(
                    analysis.agreement_level,
                    tuple(float(v) for v in dist_rows[rid]),
                )
                for rid in ordered
            ]
            report = agreement_report(
                [refs[rid] for rid in ordered],
                dists,
                hierarchy,
                ks=analysis.k_values,
            )
            write_json(out_dir / "agreement.json", agreement_payload(report))
            outputs.append("agreement.json")
            lines = [
                f"top-k agreement at level {analysis.agreement_level} "
                f"over {report.total} instances"
            ]
            for k in analysis.k_values:
                lines.append(
                    f"  k={k:<3d} {report.counts[k]:>5d}  ({report.percentage(k):.1f}%)"
                )
            text_parts.append("\n".join(lines))

        if wants_coherence:
            reports = {}
            for name, pred_path in analysis.coherence_inputs.items():
                path = _require_path(pred_path, f"coherence input {name!r}")
                records = load_predictions(path)
                if not records:
                    raise DataError(f"coherence input {name!r} has no predictions")
                reports[name] = coherence_report(
                    [r.labels[1] for r in records],
                    [r.labels[2] for r in records],
                    hierarchy,
                )
            write_coherence_csv(out_dir / "coherence.csv", reports)
            outputs.append("coherence.csv")
            text_parts.append("cross-level coherence (%)\n" + render_coherence_table(reports))

        report_text = "\n\n".join(text_parts) + "\n"
        (out_dir / "report.txt").write_text(report_text, encoding="utf-8")
        outputs.append("report.txt")
        manifest.outputs = outputs
        manifest.mark_complete()
        manifest.save(out_dir)
    print(report_text, end="")


_COMMANDS = {
    "prepare": cmd_prepare,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "baseline": cmd_baseline,
    "analyze": cmd_analyze,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sensedist",
        description="Multi-task sense-distribution learning over discourse relations",
    )
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", required=True, help="YAML experiment config")
    parser.add_argument("--out", help="output directory (default: config prepared_dir for prepare)")
    parser.add_argument("--seed", type=int, help="override the configured seed(s)")
    parser.add_argument(
        "--force", action="store_true", help="overwrite existing outputs"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_config(args.config)
        if args.out:
            out_dir = Path(args.out)
        elif args.command == "prepare":
            out_dir = Path(config.prepared_dir)
        else:
            raise ConfigError(f"--out is required for {args.command}")
        _COMMANDS[args.command](config, out_dir, args.force, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except SensedistError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except Exception as exc:  # noqa: BLE001 - map anything else to exit 4
        print(f"unexpected error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
