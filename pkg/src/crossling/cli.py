"""Command-line interface.

Exit codes: 0 success, 1 internal failure, 2 configuration or credential
problems, 3 data-integrity violations (hash drift, missing predictions,
translation integrity).
"""

from __future__ import annotations

import json
import shlex
import sys
from pathlib import Path

import click

from .assemble import read_manifest, verify_manifest
from .errors import (
    CrosslingError,
    GatewayAuthError,
    IntegrityViolation,
    ManifestMismatch,
    MissingPredictions,
    ProviderAuthError,
    TemporalConflictError,
    ValidationError,
)
from .evaluate import run_evaluation
from .pipeline import STAGES, Pipeline, attrition_table, load_config_file, stats_table
from .records import read_jsonl

_CONFIG_ERRORS = (ValidationError, TemporalConflictError, ProviderAuthError, GatewayAuthError)
_INTEGRITY_ERRORS = (ManifestMismatch, IntegrityViolation, MissingPredictions)


def _exit_on(exc: CrosslingError) -> "int":
    if isinstance(exc, _CONFIG_ERRORS):
        return 2
    if isinstance(exc, _INTEGRITY_ERRORS):
        return 3
    return 1


@click.group()
@click.version_option(package_name="crossling")
def cli() -> None:
    """Contamination-free cross-lingual transfer benchmarks."""


@cli.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--offline", is_flag=True, help="Serve providers from fixture files.")
@click.option("--jobs", default=1, show_default=True, help="Worker threads for model calls.")
@click.option("--resume", is_flag=True, help="Reuse existing stage outputs under <out>/work.")
@click.option(
    "--stop-after",
    type=click.Choice(STAGES),
    default="assemble",
    show_default=True,
    help="Halt after this stage.",
)
def generate(
    config_path: str, out_dir: str, offline: bool, jobs: int, resume: bool, stop_after: str
) -> None:
    """Generate a benchmark dataset from a pipeline config."""
    try:
        config = load_config_file(config_path)
        pipeline = Pipeline(config, out_dir, offline=offline, jobs=jobs, resume=resume)
        manifest = pipeline.run(stop_after=stop_after)
    except CrosslingError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(_exit_on(exc))
    click.echo("attrition:")
    click.echo(attrition_table(pipeline.attrition))
    if manifest is None:
        click.echo(f"stopped after stage {stop_after!r}; work files in {out_dir}/work")
        return
    click.echo("dataset:")
    click.echo(stats_table(manifest["counts"]))
    click.echo(f"dataset hash: {manifest['dataset_hash']}")


@cli.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option(
    "--predictions",
    "prediction_paths",
    required=True,
    multiple=True,
    type=click.Path(dir_okay=False),
)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--pairs", default=None, help='Restrict to ordered pairs, e.g. "en:ja,ja:en".')
@click.option(
    "--trainer-cmd",
    default=None,
    help="Command that produces the first predictions file before scoring.",
)
def evaluate(
    dataset_dir: str,
    prediction_paths: tuple[str, ...],
    out_dir: str,
    pairs: str | None,
    trainer_cmd: str | None,
) -> None:
    """Score prediction files against a dataset and write reports."""
    try:
        results = run_evaluation(
            Path(dataset_dir),
            [Path(p) for p in prediction_paths],
            Path(out_dir),
            pairs_spec=pairs,
            trainer_cmd=shlex.split(trainer_cmd) if trainer_cmd else None,
        )
    except CrosslingError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(_exit_on(exc))
    for res in results:
        transfer = "NA" if res.transfer is None else f"{res.transfer.mean:.4f}"
        click.echo(
            f"{res.model_id} {res.domain}: overall {res.overall.mean:.4f} "
            f"transfer {transfer} over {len(res.pairs)} pairs"
        )
    click.echo(f"reports written to {out_dir}")


@cli.command()
@click.option("--dataset", "dataset_dir", required=True, type=click.Path(exists=True, file_okay=False))
def verify(dataset_dir: str) -> None:
    """Recompute file hashes against the dataset manifest."""
    try:
        manifest = verify_manifest(Path(dataset_dir))
    except CrosslingError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(_exit_on(exc))
    click.echo(f"ok: {len(manifest['files'])} files match (hash {manifest['dataset_hash']})")


@cli.command()
@click.option("--out", "out_dir", required=True, type=click.Path(exists=True, file_okay=False))
def audit(out_dir: str) -> None:
    """Summarize a generation run: attrition, stats, gate verdicts."""
    out = Path(out_dir)
    try:
        manifest = read_manifest(out)
    except FileNotFoundError:
        click.echo("error: no manifest.json in the output directory", err=True)
        sys.exit(2)
    run_file = out / "run.json"
    if run_file.is_file():
        record = json.loads(run_file.read_text(encoding="utf-8"))
        click.echo("attrition:")
        click.echo(attrition_table(record.get("attrition", {})))
    click.echo("dataset:")
    click.echo(stats_table(manifest["counts"]))
    gate_file = out / "work" / "gate.jsonl"
    if gate_file.is_file():
        verdicts: dict[str, int] = {}
        errors = 0
        for row in read_jsonl(gate_file):
            verdicts[row["verdict"]] = verdicts.get(row["verdict"], 0) + 1
            if row.get("error"):
                errors += 1
        summary = ", ".join(f"{k}: {v}" for k, v in sorted(verdicts.items()))
        click.echo(f"gate verdicts: {summary} (errors: {errors})")
    click.echo(f"exclusions: {json.dumps(manifest.get('exclusions', {}), sort_keys=True)}")


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
