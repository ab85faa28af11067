"""End-to-end tests of the command line interface.

Runs the full pipeline on the bundled 50-row synthetic corpus with a
tiny hashed encoder, checking exit codes, output layouts, idempotence,
and the refuse-without-force contract.
"""

import json
import shutil
from pathlib import Path

import numpy as np
import pytest

from sensedist.cli import main
from sensedist.hierarchy import default_hierarchy

FIXTURE_CSV = Path(__file__).parent / "fixtures" / "discogem_synthetic_50.csv"

H = default_hierarchy()


def write_pdtb_file(path):
    """A small single-label TSV covering every section 0..23."""
    senses = [
        ("Temporal", "Synchronous"),
        ("Contingency", "Cause"),
        ("Comparison", "Contrast"),
        ("Expansion", "Conjunction"),
    ]
    rows = ["section\targ1\targ2\tsense_l1\tsense_l2"]
    n = 0
    for section in range(24):
        for j in range(2):
            l1, l2 = senses[(section + j) % len(senses)]
            rows.append(
                f"{section}\tleft text {section} {j}\tright text {section} {j}\t{l1}\t{l2}"
            )
            n += 1
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return n


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """Prepared corpus + trained run shared across the module's tests."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.csv"
    shutil.copy(FIXTURE_CSV, corpus)
    pdtb = root / "pdtb.tsv"
    write_pdtb_file(pdtb)
    config_path = root / "config.yaml"
    config_path.write_text(
        f"""
corpus:
  path: {corpus}
prepared_dir: {root}/prepared
split:
  seed: 13
model:
  encoder: hash-bow:64
training:
  loss: mae
  base_lr: 0.05
  schedule: cosine_annealing
  epochs: 2
  batch_size: 8
  seeds: [1, 2]
evaluate:
  run_dir: {root}/run
  target: test-split
pdtb:
  path: {pdtb}
  scheme: ji
""",
        encoding="utf-8",
    )
    assert main(["prepare", "--config", str(config_path)]) == 0
    assert main(["train", "--config", str(config_path), "--out", f"{root}/run"]) == 0
    return root, config_path


class TestPrepare:
    def test_outputs(self, workspace):
        root, _ = workspace
        prepared = root / "prepared"
        for name in ("instances.jsonl", "splits.json", "stats.json", "stats.txt", "manifest.json"):
            assert (prepared / name).exists(), name
        stats = json.loads((prepared / "stats.json").read_text())
        assert stats["n_instances"] == 50
        assert stats["degenerate_ids"] == []
        counts = stats["split_counts"]
        assert counts["train"] + counts["validation"] + counts["test"] == 50
        manifest = json.loads((prepared / "manifest.json").read_text())
        assert manifest["complete"] is True
        assert manifest["command"] == "prepare"
        assert len(manifest["input_hashes"]) == 1

    def test_refuses_overwrite_without_force(self, workspace):
        root, config_path = workspace
        assert main(["prepare", "--config", str(config_path)]) == 2

    def test_force_rerun_is_byte_identical(self, workspace):
        root, config_path = workspace
        prepared = root / "prepared"
        before_splits = (prepared / "splits.json").read_bytes()
        before_instances = (prepared / "instances.jsonl").read_bytes()
        assert main(["prepare", "--config", str(config_path), "--force"]) == 0
        assert (prepared / "splits.json").read_bytes() == before_splits
        assert (prepared / "instances.jsonl").read_bytes() == before_instances

    def test_missing_corpus_is_config_error(self, tmp_path):
        config = tmp_path / "c.yaml"
        config.write_text("corpus:\n  path: /nonexistent/x.csv\n", encoding="utf-8")
        assert main(["prepare", "--config", str(config), "--out", str(tmp_path / "p")]) == 2

    def test_unnamed_corpus_is_config_error(self, tmp_path):
        config = tmp_path / "c.yaml"
        config.write_text("{}\n", encoding="utf-8")
        assert main(["prepare", "--config", str(config), "--out", str(tmp_path / "p")]) == 2

    def test_corrupt_corpus_is_data_error(self, tmp_path):
        corpus = tmp_path / "bad.csv"
        lines = FIXTURE_CSV.read_text().splitlines()
        lines[1] = lines[1].replace("0.25", "not-a-number", 1)
        corpus.write_text("\n".join(lines) + "\n", encoding="utf-8")
        config = tmp_path / "c.yaml"
        config.write_text(f"corpus:\n  path: {corpus}\n", encoding="utf-8")
        assert main(["prepare", "--config", str(config), "--out", str(tmp_path / "p")]) == 3


class TestTrain:
    def test_run_layout(self, workspace):
        root, _ = workspace
        run = root / "run"
        for seed in (1, 2):
            seed_dir = run / f"seed_{seed}"
            assert (seed_dir / "checkpoint" / "params.pt").exists()
            assert (seed_dir / "predictions.jsonl").exists()
            assert (seed_dir / "log.txt").exists()
        metrics = json.loads((run / "metrics.json").read_text())
        assert metrics["seeds"] == 2
        for level in ("level1", "level2", "level3"):
            assert metrics[level]["js_mean"]["n"] == 2
            assert metrics[level]["f1_weighted"]["std_undefined"] is False
        manifest = json.loads((run / "manifest.json").read_text())
        assert manifest["complete"] is True
        assert manifest["seeds"] == [1, 2]
        assert (run / "report.txt").exists()

    def test_train_without_prepare_is_data_error(self, workspace, tmp_path):
        root, config_path = workspace
        config = tmp_path / "c.yaml"
        config.write_text(
            config_path.read_text().replace(
                f"prepared_dir: {root}/prepared", f"prepared_dir: {tmp_path}/nope"
            ),
            encoding="utf-8",
        )
        assert main(["train", "--config", str(config), "--out", str(tmp_path / "r")]) == 3

    def test_train_requires_out(self, workspace):
        _, config_path = workspace
        assert main(["train", "--config", str(config_path)]) == 2

    def test_seed_override(self, workspace, tmp_path):
        root, config_path = workspace
        out = tmp_path / "single"
        assert main(
            ["train", "--config", str(config_path), "--out", str(out), "--seed", "5"]
        ) == 0
        assert (out / "seed_5").exists()
        assert not (out / "seed_1").exists()
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["seeds"] == 1
        assert metrics["level1"]["f1_weighted"]["std_undefined"] is True

    def test_locked_directory_is_runtime_error(self, workspace, tmp_path):
        root, config_path = workspace
        out = tmp_path / "locked"
        out.mkdir()
        (out / ".writer.lock").write_text("held\n", encoding="utf-8")
        assert main(
            ["train", "--config", str(config_path), "--out", str(out), "--force"]
        ) == 4


class TestEvaluate:
    def test_test_split_target(self, workspace, tmp_path):
        root, config_path = workspace
        out = tmp_path / "eval"
        assert main(["evaluate", "--config", str(config_path), "--out", str(out)]) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert set(metrics) >= {"level1", "level2", "level3", "seeds"}
        assert metrics["level1"]["js_mean"] is not None
        for seed in (1, 2):
            seed_dir = out / f"seed_{seed}"
            assert (seed_dir / "predictions.jsonl").exists()
            assert (seed_dir / "confusion_level3.csv").exists()
            coherence = json.loads((seed_dir / "coherence.json").read_text())
            assert coherence["total"] > 0

    def test_pdtb_ji_target(self, workspace, tmp_path):
        root, config_path = workspace
        config = tmp_path / "c.yaml"
        config.write_text(
            config_path.read_text().replace("target: test-split", "target: pdtb"),
            encoding="utf-8",
        )
        out = tmp_path / "eval-ji"
        assert main(["evaluate", "--config", str(config), "--out", str(out)]) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["test_set"] == "ji"
        assert set(metrics) >= {"level1", "level2"}
        assert "level3" not in metrics
        assert metrics["level1"]["js_mean"] is None
        assert metrics["level1"]["f1_weighted"]["n"] == 2
        # ji = sections 21 and 22, two rows each
        assert metrics["level1"]["n_instances"] == 4

    def test_pdtb_cross_target(self, workspace, tmp_path):
        root, config_path = workspace
        config = tmp_path / "c.yaml"
        config.write_text(
            config_path.read_text()
            .replace("scheme: ji", "scheme: cross")
            .replace("target: test-split", "target: pdtb"),
            encoding="utf-8",
        )
        out = tmp_path / "eval-cross"
        assert main(["evaluate", "--config", str(config), "--out", str(out)]) == 0
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["folds"] == 12
        assert metrics["skipped_folds"] == []
        assert metrics["level2"]["n_instances"] == 48
        fold_files = sorted((out / "folds").glob("cross-*.json"))
        assert len(fold_files) == 12
        fold0 = json.loads(fold_files[0].read_text())
        assert fold0["test_set"] == "cross-00"
        assert fold0["level2"]["n_instances"] == 4

    def test_missing_run_dir_is_config_error(self, workspace, tmp_path):
        root, config_path = workspace
        config = tmp_path / "c.yaml"
        config.write_text(
            config_path.read_text().replace(
                f"run_dir: {root}/run", f"run_dir: {tmp_path}/absent"
            ),
            encoding="utf-8",
        )
        assert main(["evaluate", "--config", str(config), "--out", str(tmp_path / "e")]) == 2


class TestBaseline:
    def test_outputs_and_granularity(self, workspace, tmp_path):
        root, config_path = workspace
        out = tmp_path / "baseline"
        assert main(["baseline", "--config", str(config_path), "--out", str(out)]) == 0
        lines = (out / "predictions.jsonl").read_text().strip().splitlines()
        stats = json.loads((root / "prepared" / "stats.json").read_text())
        assert len(lines) == stats["split_counts"]["test"]
        record = json.loads(lines[0])
        for key in ("dist1", "dist2", "dist3"):
            values = np.asarray(record[key])
            np.testing.assert_allclose(values * 10, np.round(values * 10), atol=1e-12)
        metrics = json.loads((out / "metrics.json").read_text())
        assert metrics["baseline"]["n_draws"] == 10
        assert metrics["level1"]["js_mean"]["mean"] > 0

    def test_reproducible_with_same_seed(self, workspace, tmp_path):
        root, config_path = workspace
        out1, out2 = tmp_path / "b1", tmp_path / "b2"
        assert main(["baseline", "--config", str(config_path), "--out", str(out1)]) == 0
        assert main(["baseline", "--config", str(config_path), "--out", str(out2)]) == 0
        assert (out1 / "predictions.jsonl").read_bytes() == (
            out2 / "predictions.jsonl"
        ).read_bytes()


class TestAnalyze:
    def test_agreement_and_coherence(self, workspace, tmp_path):
        root, config_path = workspace
        instances_path = root / "prepared" / "instances.jsonl"
        records = [
            json.loads(line)
            for line in instances_path.read_text().splitlines()[:10]
        ]
        refs = tmp_path / "refs.tsv"
        refs.write_text(
            "id\tlabel\n"
            + "\n".join(f"{r['id']}\t{r['maj2']}" for r in records)
            + "\n",
            encoding="utf-8",
        )
        config = tmp_path / "c.yaml"
        config.write_text(
            config_path.read_text()
            + f"""
analysis:
  references: {refs}
  distributions: {instances_path}
  coherence_inputs:
    in-corpus: {root}/run/seed_1/predictions.jsonl
""",
            encoding="utf-8",
        )
        out = tmp_path / "analysis"
        assert main(["analyze", "--config", str(config), "--out", str(out)]) == 0
        agreement = json.loads((out / "agreement.json").read_text())
        assert agreement["total"] == 10
        # references are the majority labels, so top-1 always agrees
        assert agreement["counts"]["1"] == 10
        assert agreement["counts"]["10"] == 10
        coherence_text = (out / "coherence.csv").read_text()
        assert coherence_text.splitlines()[0] == "level,sense,in-corpus"

    def test_nothing_to_do_is_config_error(self, workspace, tmp_path):
        _, config_path = workspace
        out = tmp_path / "a"
        assert main(["analyze", "--config", str(config_path), "--out", str(out)]) == 2


class TestArgumentHandling:
    def test_bad_config_path(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.yaml"), "--out", "x"]) == 2

    def test_unknown_command_rejected_by_parser(self):
        with pytest.raises(SystemExit):
            main(["frobnicate", "--config", "x"])
