from __future__ import annotations

import dataclasses
import json
import shutil

import pytest
from click.testing import CliRunner

from crossling.assemble import read_manifest, verify_manifest
from crossling.cli import cli
from crossling.config import LlmSettings
from crossling.errors import ValidationError
from crossling.pipeline import Pipeline, attrition_table, load_config_file, stats_table
from crossling.records import read_jsonl, write_jsonl

from .conftest import FIXTURES, KNOWN_ENTITIES, PRE_WINDOW_IDS, build_config

LANGS = ("en", "ja", "zh", "fr", "es")

EXPECTED_ATTRITION = {
    "movie": {
        "sampled": 10,
        "in_window": 10,
        "gate_valid": 8,
        "generated": 24,
        "verified": 24,
        "translated": 96,
    },
    "music": {
        "sampled": 10,
        "in_window": 10,
        "gate_valid": 8,
        "generated": 16,
        "verified": 16,
        "translated": 64,
    },
    "sports": {
        "sampled": 10,
        "in_window": 10,
        "gate_valid": 9,
        "generated": 54,
        "verified": 54,
        "translated": 216,
    },
}


def full_prediction_rows(dataset_dir, model_id="demo-target-model"):
    """All-correct predictions for every (train, answer-language) cell."""
    keys = {
        "en": {
            r["qa_id"].rsplit(".", 1)[0]: r["correct_option"]
            for r in read_jsonl(dataset_dir / "validation/qas.jsonl")
        }
    }
    for lang in LANGS[1:]:
        keys[lang] = {
            r["qa_id"].rsplit(".", 1)[0]: r["correct_option"]
            for r in read_jsonl(dataset_dir / f"test/{lang}/qas.jsonl")
        }
    return [
        {
            "base_qa_id": base,
            "language": lang,
            "train_language": train,
            "model_id": model_id,
            "raw_output": letter,
        }
        for train in LANGS
        for lang in LANGS
        for base, letter in keys[lang].items()
    ]


def test_offline_run_layout_and_attrition(generated_dataset_dir):
    out = generated_dataset_dir
    manifest = verify_manifest(out)
    record = json.loads((out / "run.json").read_text(encoding="utf-8"))

    assert record["attrition"] == EXPECTED_ATTRITION
    assert record["dataset_hash"] == manifest["dataset_hash"]
    for name in ("entities.jsonl", "gate.jsonl", "qas_pivot.jsonl", "docs_all.jsonl"):
        assert (out / "work" / name).is_file()
    assert (out / "audit/llm.jsonl").is_file()

    counts = manifest["counts"]
    assert {d: c["entities"] for d, c in counts.items()} == {"movie": 8, "music": 8, "sports": 9}
    assert {d: c["validation"] for d, c in counts.items()} == {
        "movie": 24,
        "music": 16,
        "sports": 54,
    }
    # four target translations per validation question
    assert all(c["test"] == 4 * c["validation"] for c in counts.values())


def test_gate_discards_known_and_prewindow_entities(generated_dataset_dir):
    out = generated_dataset_dir
    kept_ids = {r["entity_id"] for r in read_jsonl(out / "entities.jsonl")}
    assert not kept_ids & PRE_WINDOW_IDS

    gate_rows = list(read_jsonl(out / "work/gate.jsonl"))
    known = {r["entity_id"] for r in gate_rows if r["verdict"] == "Known"}
    screened = {r["entity_id"]: r for r in gate_rows}
    assert len(gate_rows) == 30
    assert len(known) == len(KNOWN_ENTITIES)
    assert not kept_ids & known
    assert all(not r.get("error") for r in screened.values())


def test_stop_after_fetch_writes_only_work_files(tmp_path):
    pipeline = Pipeline(build_config(), tmp_path, offline=True)
    assert pipeline.run(stop_after="fetch") is None
    assert (tmp_path / "work/entities.jsonl").is_file()
    assert not (tmp_path / "manifest.json").exists()


def test_resume_reuses_stage_outputs(tmp_path, generated_dataset_dir):
    out = tmp_path / "resumable"
    Pipeline(build_config(), out, offline=True).run(stop_after="qa")
    probes_before = sum(
        1 for r in read_jsonl(out / "audit/llm.jsonl") if r["template_id"] == "knowledge_probe"
    )
    assert probes_before == 30

    manifest = Pipeline(build_config(), out, offline=True, resume=True).run()
    probes_after = sum(
        1 for r in read_jsonl(out / "audit/llm.jsonl") if r["template_id"] == "knowledge_probe"
    )
    assert probes_after == probes_before  # gate stage was not re-run
    assert manifest["dataset_hash"] == read_manifest(generated_dataset_dir)["dataset_hash"]


def test_parallel_run_matches_serial(tmp_path, generated_dataset_dir):
    manifest = Pipeline(build_config(), tmp_path / "par", offline=True, jobs=4).run()
    assert manifest["dataset_hash"] == read_manifest(generated_dataset_dir)["dataset_hash"]


def test_pipeline_rejects_bad_wiring(tmp_path):
    with pytest.raises(ValidationError, match="jobs"):
        Pipeline(build_config(), tmp_path, offline=True, jobs=0)
    with pytest.raises(ValidationError, match="backend"):
        Pipeline(build_config(llm=LlmSettings(backend="http")), tmp_path, offline=True)
    providers = dict(build_config().providers)
    providers["movie"] = dataclasses.replace(providers["movie"], fixture_dir="")
    with pytest.raises(ValidationError, match="fixture_dir"):
        Pipeline(build_config(providers=providers), tmp_path, offline=True)


def test_load_config_file_resolves_relative_fixture_dirs(tmp_path):
    config_path = tmp_path / "conf.json"
    raw = build_config().to_dict()
    raw["providers"]["movie"]["fixture_dir"] = "rel/fixtures"
    config_path.write_text(json.dumps(raw), encoding="utf-8")
    config = load_config_file(config_path)
    assert config.providers["movie"].fixture_dir == str(tmp_path / "rel/fixtures")
    # absolute paths pass through untouched
    assert config.providers["music"].fixture_dir == raw["providers"]["music"]["fixture_dir"]


def test_tables_render_fixed_width():
    table = attrition_table(EXPECTED_ATTRITION)
    lines = table.splitlines()
    assert lines[0].split() == [
        "domain",
        "sampled",
        "in_window",
        "gate_valid",
        "generated",
        "verified",
        "translated",
    ]
    assert len({len(line) for line in lines if line.strip()}) <= 2  # aligned columns

    stats = stats_table({"movie": {"entities": 8, "generated": 24, "validation": 24, "test": 96}})
    assert "total" in stats


def test_cli_generate_offline(tmp_path):
    runner = CliRunner()
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(
            cli,
            [
                "generate",
                "--config",
                str(FIXTURES / "config.toml"),
                "--out",
                "out",
                "--offline",
            ],
        )
        assert result.exit_code == 0, result.output
        assert "attrition:" in result.output
        assert "dataset hash:" in result.output
        verify_manifest(tmp_path_child(tmp_path, "out"))


def tmp_path_child(tmp_path, name):
    # CliRunner.isolated_filesystem(temp_dir=...) creates a nested directory
    matches = list(tmp_path.glob(f"*/{name}"))
    assert matches, f"no {name} directory under {tmp_path}"
    return matches[0]


def test_cli_generate_stop_after(tmp_path):
    runner = CliRunner()
    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(
            cli,
            [
                "generate",
                "--config",
                str(FIXTURES / "config.toml"),
                "--out",
                "out",
                "--offline",
                "--stop-after",
                "gate",
            ],
        )
        assert result.exit_code == 0, result.output
        assert "stopped after stage 'gate'" in result.output


def test_cli_generate_temporal_conflict_exits_2(tmp_path):
    raw = build_config().to_dict()
    raw["time_range"] = ["2024-10-01", "2025-08-31"]  # inside the leakage window
    config_path = tmp_path / "bad.json"
    config_path.write_text(json.dumps(raw), encoding="utf-8")
    runner = CliRunner()
    result = runner.invoke(
        cli,
        ["generate", "--config", str(config_path), "--out", str(tmp_path / "out")],
    )
    assert result.exit_code == 2
    assert "error:" in result.output


def test_cli_generate_bad_jobs_exits_2(tmp_path):
    runner = CliRunner()
    result = runner.invoke(
        cli,
        [
            "generate",
            "--config",
            str(FIXTURES / "config.toml"),
            "--out",
            str(tmp_path / "out"),
            "--offline",
            "--jobs",
            "0",
        ],
    )
    assert result.exit_code == 2


def test_cli_verify_ok_and_tampered(tmp_path, generated_dataset_dir):
    runner = CliRunner()
    ok = runner.invoke(cli, ["verify", "--dataset", str(generated_dataset_dir)])
    assert ok.exit_code == 0
    assert ok.output.startswith("ok: 11 files match")

    copy = tmp_path / "tampered"
    shutil.copytree(generated_dataset_dir, copy)
    qas = copy / "validation/qas.jsonl"
    qas.write_bytes(qas.read_bytes() + b"\n")
    tampered = runner.invoke(cli, ["verify", "--dataset", str(copy)])
    assert tampered.exit_code == 3
    assert "hash mismatch" in tampered.output


def test_cli_evaluate_full_run(tmp_path, generated_dataset_dir):
    preds = tmp_path / "preds.jsonl"
    write_jsonl(preds, iter(full_prediction_rows(generated_dataset_dir)))
    out = tmp_path / "report"
    runner = CliRunner()
    result = runner.invoke(
        cli,
        [
            "evaluate",
            "--dataset",
            str(generated_dataset_dir),
            "--predictions",
            str(preds),
            "--out",
            str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "demo-target-model movie: overall 1.0000 transfer 1.0000 over 20 pairs" in result.output
    for domain in ("movie", "music", "sports"):
        assert (out / f"heatmap_demo-target-model_{domain}.csv").is_file()
        assert (out / f"sizes_{domain}.csv").is_file()
    assert (out / "table1.csv").is_file()
    assert (out / "report.json").is_file()


def test_cli_evaluate_missing_cells_exits_3(tmp_path, generated_dataset_dir):
    rows = [r for r in full_prediction_rows(generated_dataset_dir) if r["train_language"] == "en"]
    preds = tmp_path / "partial.jsonl"
    write_jsonl(preds, iter(rows))
    runner = CliRunner()
    result = runner.invoke(
        cli,
        [
            "evaluate",
            "--dataset",
            str(generated_dataset_dir),
            "--predictions",
            str(preds),
            "--out",
            str(tmp_path / "report"),
        ],
    )
    assert result.exit_code == 3
    assert "error:" in result.output


def test_cli_audit(generated_dataset_dir):
    runner = CliRunner()
    result = runner.invoke(cli, ["audit", "--out", str(generated_dataset_dir)])
    assert result.exit_code == 0, result.output
    assert "gate verdicts: Known: 5, Unknown: 25 (errors: 0)" in result.output
    assert "exclusions:" in result.output
    assert "total" in result.output
