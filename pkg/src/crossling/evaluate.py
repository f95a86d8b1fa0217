"""Evaluation harness: score predictions, build pair matrices, write reports.

Predictions arrive as JSONL rows keyed by (model_id, train_language,
language, base_qa_id) with the model's raw answer text.  For every ordered
language pair the harness joins the train-language outcomes with the
test-language outcomes into a contingency matrix and reports overall and
transfer scores, aggregated per model and domain with population standard
deviation.
"""

from __future__ import annotations

import csv
import json
import re
import subprocess
from dataclasses import dataclass
from pathlib import Path

from .assemble import BenchmarkDataset, load_dataset
from .errors import (
    MalformedRecord,
    MissingPredictions,
    NothingToAggregate,
    TrainerUnavailable,
    ValidationError,
)
from .metrics import (
    Aggregate,
    ContingencyMatrix,
    JoinCoverage,
    aggregate_scores,
    build_contingency,
    grade_answer,
    overall_score,
    transfer_or_none,
)
from .records import FactQA, entity_domain, read_jsonl

REPORT_SCHEMA = "evalreport/1"

_REQUIRED_FIELDS = ("base_qa_id", "language", "train_language", "model_id", "raw_output")


@dataclass(frozen=True)
class Prediction:
    base_qa_id: str
    language: str
    train_language: str
    model_id: str
    raw_output: str
    checkpoint: int | None = None
    temperature: float | None = None

    @classmethod
    def from_dict(cls, raw: dict) -> "Prediction":
        missing = [k for k in _REQUIRED_FIELDS if k not in raw]
        if missing:
            raise MalformedRecord(f"prediction row is missing {', '.join(missing)}")
        return cls(
            base_qa_id=str(raw["base_qa_id"]),
            language=str(raw["language"]),
            train_language=str(raw["train_language"]),
            model_id=str(raw["model_id"]),
            raw_output=str(raw["raw_output"]),
            checkpoint=int(raw["checkpoint"]) if raw.get("checkpoint") is not None else None,
            temperature=float(raw["temperature"]) if raw.get("temperature") is not None else None,
        )


def load_predictions(path: Path) -> list[Prediction]:
    return [Prediction.from_dict(row) for row in read_jsonl(Path(path))]


@dataclass(frozen=True)
class PairScore:
    train: str
    test: str
    matrix: ContingencyMatrix
    coverage: JoinCoverage
    overall: float
    transfer: float | None

    def to_dict(self) -> dict:
        return {
            "train": self.train,
            "test": self.test,
            "matrix": self.matrix.to_dict(),
            "joined": self.coverage.joined,
            "train_only": self.coverage.train_only,
            "test_only": self.coverage.test_only,
            "overall": self.overall,
            "transfer": self.transfer,
        }


def answer_keys(dataset: BenchmarkDataset) -> dict[str, dict[str, str]]:
    """Per language: base id -> correct letter.  The pivot language is
    answered from the validation split; targets from their test split."""
    keys: dict[str, dict[str, str]] = {}
    pivot = dataset.config.pivot_language
    keys[pivot] = {q.base_id: q.correct_option for q in dataset.validation}
    for lang in dataset.config.target_languages:
        keys[lang] = {q.base_id: q.correct_option for q in dataset.test_for(lang)}
    return keys


def base_domains(dataset: BenchmarkDataset) -> dict[str, str]:
    mapping: dict[str, str] = {}
    for qa in dataset.validation:
        mapping[qa.base_id] = entity_domain(qa.entity_id)
    return mapping


def all_pairs(languages: tuple[str, ...]) -> list[tuple[str, str]]:
    return [(t, s) for t in languages for s in languages if t != s]


def parse_pairs(spec: str, languages: tuple[str, ...]) -> list[tuple[str, str]]:
    """Parse a pair restriction like "en:ja,ja:en"."""
    pairs: list[tuple[str, str]] = []
    for chunk in spec.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 2:
            raise ValidationError("pairs", f"expected train:test, got {chunk!r}")
        train, test = parts[0].strip(), parts[1].strip()
        if train not in languages or test not in languages:
            raise ValidationError("pairs", f"unknown language in {chunk!r}")
        if train == test:
            raise ValidationError("pairs", f"pair {chunk!r} is a diagonal cell")
        pairs.append((train, test))
    if not pairs:
        raise ValidationError("pairs", "no pairs given")
    return pairs


Cells = dict[tuple[str, str], dict[str, bool]]


def cells_by_model(
    predictions: list[Prediction],
    keys: dict[str, dict[str, str]],
    domains: dict[str, str],
) -> tuple[dict[str, dict[str, Cells]], int]:
    """(model -> domain -> (train, answer_lang) -> base -> correct, ignored)."""
    out: dict[str, dict[str, Cells]] = {}
    ignored = 0
    for pred in predictions:
        key = keys.get(pred.language, {})
        correct_letter = key.get(pred.base_qa_id)
        domain = domains.get(pred.base_qa_id)
        if correct_letter is None or domain is None:
            ignored += 1
            continue
        cell = (
            out.setdefault(pred.model_id, {})
            .setdefault(domain, {})
            .setdefault((pred.train_language, pred.language), {})
        )
        cell[pred.base_qa_id] = grade_answer(pred.raw_output) == correct_letter
    return out, ignored


def check_cell_coverage(
    models: dict[str, dict[str, Cells]],
    domains: tuple[str, ...],
    pairs: list[tuple[str, str]],
) -> None:
    missing: list[str] = []
    for model_id, by_domain in sorted(models.items()):
        for domain in domains:
            cells = by_domain.get(domain, {})
            needed = {(t, t) for t, _ in pairs} | set(pairs)
            for cell in sorted(needed):
                if not cells.get(cell):
                    missing.append(f"{model_id}/{domain}/{cell[0]}->{cell[1]}")
    if missing:
        raise MissingPredictions(missing)


def score_pairs(cells: Cells, pairs: list[tuple[str, str]]) -> list[PairScore]:
    scores = []
    for train, test in pairs:
        matrix, coverage = build_contingency(cells[(train, train)], cells[(train, test)])
        scores.append(
            PairScore(
                train=train,
                test=test,
                matrix=matrix,
                coverage=coverage,
                overall=overall_score(matrix),
                transfer=transfer_or_none(matrix),
            )
        )
    return scores


def _aggregate_or_none(values: list[float | None]) -> Aggregate | None:
    try:
        return aggregate_scores(values)
    except NothingToAggregate:
        return None


@dataclass(frozen=True)
class ModelDomainResult:
    model_id: str
    domain: str
    pairs: list[PairScore]
    overall: Aggregate
    transfer: Aggregate | None

    @property
    def n_undefined(self) -> int:
        return sum(1 for p in self.pairs if p.transfer is None)


def evaluate_predictions(
    dataset: BenchmarkDataset,
    predictions: list[Prediction],
    pairs: list[tuple[str, str]] | None = None,
) -> tuple[list[ModelDomainResult], int]:
    keys = answer_keys(dataset)
    domains = base_domains(dataset)
    wanted_pairs = pairs or all_pairs(dataset.config.languages)
    models, ignored = cells_by_model(predictions, keys, domains)
    if not models:
        raise MissingPredictions(["<no predictions matched the dataset>"])
    check_cell_coverage(models, dataset.config.domains, wanted_pairs)
    results = []
    for model_id in sorted(models):
        for domain in dataset.config.domains:
            pair_scores = score_pairs(models[model_id][domain], wanted_pairs)
            results.append(
                ModelDomainResult(
                    model_id=model_id,
                    domain=domain,
                    pairs=pair_scores,
                    overall=aggregate_scores([p.overall for p in pair_scores]),
                    transfer=_aggregate_or_none([p.transfer for p in pair_scores]),
                )
            )
    return results, ignored


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", text)


def _agg_dict(agg: Aggregate | None) -> dict | None:
    if agg is None:
        return None
    return {
        "mean": agg.mean,
        "std": agg.std,
        "n_defined": agg.n_defined,
        "n_undefined": agg.n_undefined,
    }


def write_reports(
    results: list[ModelDomainResult],
    dataset: BenchmarkDataset,
    out_dir: Path,
    ignored: int = 0,
) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    langs = dataset.config.languages

    report = {
        "schema": REPORT_SCHEMA,
        "std_kind": "population",
        "languages": list(langs),
        "ignored_predictions": ignored,
        "models": {},
    }
    for res in results:
        report["models"].setdefault(res.model_id, {})[res.domain] = {
            "pairs": [p.to_dict() for p in res.pairs],
            "overall": _agg_dict(res.overall),
            "transfer": _agg_dict(res.transfer),
            "n_undefined_transfer": res.n_undefined,
        }
    (out / "report.json").write_text(
        json.dumps(report, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
        newline="\n",
    )

    with (out / "table1.csv").open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "model",
                "domain",
                "overall_mean",
                "overall_std",
                "transfer_mean",
                "transfer_std",
                "n_pairs",
                "n_undefined_transfer",
            ]
        )
        for res in results:
            transfer = res.transfer
            writer.writerow(
                [
                    res.model_id,
                    res.domain,
                    f"{res.overall.mean:.6f}",
                    f"{res.overall.std:.6f}",
                    f"{transfer.mean:.6f}" if transfer else "NA",
                    f"{transfer.std:.6f}" if transfer else "NA",
                    len(res.pairs),
                    res.n_undefined,
                ]
            )

    for res in results:
        by_pair = {(p.train, p.test): p for p in res.pairs}
        grid: list[list[float | None]] = []
        for train in langs:
            row: list[float | None] = []
            for test in langs:
                pair = by_pair.get((train, test))
                row.append(pair.transfer if pair is not None else None)
            grid.append(row)
        stem = f"heatmap_{_slug(res.model_id)}_{res.domain}"
        with (out / f"{stem}.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["train\\test", *langs])
            for train, row in zip(langs, grid):
                writer.writerow([train, *["NA" if v is None else f"{v:.6f}" for v in row]])
        (out / f"{stem}.json").write_text(
            json.dumps(
                {"metric": "transfer", "rows": list(langs), "cols": list(langs), "values": grid},
                ensure_ascii=False,
                indent=2,
            )
            + "\n",
            encoding="utf-8",
            newline="\n",
        )

    for domain in dataset.config.domains:
        with (out / f"sizes_{domain}.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["model", "train", "test", "A", "B", "C", "D", "joined", "train_only", "test_only"]
            )
            for res in results:
                if res.domain != domain:
                    continue
                for p in res.pairs:
                    writer.writerow(
                        [
                            res.model_id,
                            p.train,
                            p.test,
                            p.matrix.a,
                            p.matrix.b,
                            p.matrix.c,
                            p.matrix.d,
                            p.coverage.joined,
                            p.coverage.train_only,
                            p.coverage.test_only,
                        ]
                    )


def run_trainer(trainer_cmd: list[str], expected_output: Path) -> None:
    """Run an external trainer command that must produce the predictions file."""
    try:
        proc = subprocess.run(trainer_cmd, capture_output=True, text=True, timeout=3600)
    except (OSError, subprocess.SubprocessError) as exc:
        raise TrainerUnavailable(f"trainer command failed to start: {exc}") from exc
    if proc.returncode != 0:
        tail = (proc.stderr or proc.stdout or "").strip().splitlines()[-5:]
        raise TrainerUnavailable(
            "trainer exited with status {}: {}".format(proc.returncode, " | ".join(tail))
        )
    if not Path(expected_output).is_file():
        raise TrainerUnavailable(f"trainer did not produce {expected_output}")


def run_evaluation(
    dataset_dir: Path,
    prediction_paths: list[Path],
    out_dir: Path,
    pairs_spec: str | None = None,
    trainer_cmd: list[str] | None = None,
) -> list[ModelDomainResult]:
    dataset = load_dataset(Path(dataset_dir), verify=True)
    if trainer_cmd:
        run_trainer(trainer_cmd, Path(prediction_paths[0]))
    predictions: list[Prediction] = []
    for path in prediction_paths:
        predictions.extend(load_predictions(path))
    pairs = parse_pairs(pairs_spec, dataset.config.languages) if pairs_spec else None
    results, ignored = evaluate_predictions(dataset, predictions, pairs)
    write_reports(results, dataset, Path(out_dir), ignored)
    return results


def qa_lookup(dataset: BenchmarkDataset) -> dict[tuple[str, str], FactQA]:
    """(base_id, language) -> FactQA across validation and test splits."""
    table: dict[tuple[str, str], FactQA] = {}
    for qa in dataset.validation:
        table[(qa.base_id, qa.language)] = qa
    for qa in dataset.test:
        table[(qa.base_id, qa.language)] = qa
    return table
