"""Command-line entry points: train | select | predict, each driven by a job file."""

from __future__ import annotations

import json
import re
import sys
from pathlib import Path

import click

from . import __version__
from .errors import JobError, TrainerError
from .job import TrainJob, load_job
from .predict import load_checkpoint, predict_records, write_predictions
from .select import select_checkpoint
from .train import train

_EPOCH_FILE = re.compile(r"epoch-(\d+)\.pt$")


def _checkpoint_paths(job: TrainJob) -> list[Path]:
    found = []
    for path in Path(job.output_dir, "checkpoints").glob("epoch-*.pt"):
        match = _EPOCH_FILE.search(path.name)
        if match:
            found.append((int(match.group(1)), path))
    return [path for _, path in sorted(found)]


def _fail(exc: TrainerError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(2 if isinstance(exc, JobError) else 1)


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Knowledge-injection trainer for the crossling evaluation harness."""


@main.command("train")
@click.option("--job", "job_path", required=True, type=click.Path(path_type=Path))
def cmd_train(job_path: Path) -> None:
    """LoRA-train the base model on the job's documents."""
    try:
        job = load_job(job_path)
        result = train(job)
    except TrainerError as exc:
        _fail(exc)
    click.echo(f"wrote {len(result.checkpoints)} checkpoints under {job.output_dir}")
    click.echo(f"final epoch mean loss: {result.epoch_mean_losses[-1]:.6f}")


@main.command("select")
@click.option("--job", "job_path", required=True, type=click.Path(path_type=Path))
def cmd_select(job_path: Path) -> None:
    """Pick the best epoch checkpoint by validation accuracy."""
    try:
        job = load_job(job_path)
        if job.validation_file is None:
            raise JobError("select requires 'validation_file'")
        selection = select_checkpoint(
            _checkpoint_paths(job), job.validation_file, job.max_new_tokens
        )
    except TrainerError as exc:
        _fail(exc)
    record = selection.to_dict()
    out = Path(job.output_dir) / "selection.json"
    out.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    click.echo(
        f"selected epoch {selection.epoch} "
        f"(accuracy {selection.accuracies[selection.epoch - 1]:.4f}) -> {out}"
    )


@main.command("predict")
@click.option("--job", "job_path", required=True, type=click.Path(path_type=Path))
def cmd_predict(job_path: Path) -> None:
    """Emit greedy predictions for the job's QA files."""
    try:
        job = load_job(job_path)
        if not job.qa_files:
            raise JobError("predict requires 'qa_files'")
        if job.predictions_file is None:
            raise JobError("predict requires 'predictions_file'")
        checkpoint = job.checkpoint
        if checkpoint is None:
            selection_path = Path(job.output_dir) / "selection.json"
            if not selection_path.is_file():
                raise JobError("no 'checkpoint' in the job and no selection.json; run select first")
            checkpoint = Path(json.loads(selection_path.read_text(encoding="utf-8"))["checkpoint"])
        model, payload = load_checkpoint(checkpoint)
        records = []
        for qa_file in job.qa_files:
            records.extend(
                predict_records(
                    model,
                    qa_file,
                    job.train_language,
                    job.model_id,
                    int(payload["epoch"]),
                    job.max_new_tokens,
                )
            )
        write_predictions(records, job.predictions_file)
    except TrainerError as exc:
        _fail(exc)
    click.echo(f"wrote {len(records)} predictions to {job.predictions_file}")


if __name__ == "__main__":
    main()
