"""Job records: one JSON file drives train, select, and predict.

Every knob has an explicit default and every resolved value is echoed back
into the outputs (job echo, checkpoints, selection record), so a job is
fully reconstructable from its artifacts — nothing is implied.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import JobError


@dataclass(frozen=True)
class Hyperparameters:
    rank: int = 16
    alpha: int = 32
    learning_rate: float = 5e-4
    dropout: float = 0.1
    batch_size: int = 1
    epochs: int = 5

    @classmethod
    def from_dict(cls, raw: dict) -> "Hyperparameters":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(raw) - known)
        if unknown:
            raise JobError(f"unknown hyperparameters: {', '.join(unknown)}")
        hp = cls(**raw)
        if hp.rank < 1 or hp.alpha < 1 or hp.batch_size < 1 or hp.epochs < 1:
            raise JobError("rank, alpha, batch_size and epochs must be >= 1")
        if hp.learning_rate <= 0:
            raise JobError("learning_rate must be positive")
        if not 0.0 <= hp.dropout < 1.0:
            raise JobError("dropout must be in [0, 1)")
        return hp

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class TrainJob:
    model_id: str
    output_dir: Path
    hyperparameters: Hyperparameters = Hyperparameters()
    seed: int = 0
    # training-time choices not fixed by the hyperparameter block; recorded
    # in every artifact rather than presumed
    optimizer: str = "adamw"
    lr_schedule: str = "constant"
    weight_decay: float = 0.0
    max_seq_len: int = 128
    max_new_tokens: int = 4
    train_documents: Path | None = None
    validation_file: Path | None = None
    qa_files: tuple[Path, ...] = ()
    train_language: str = "en"
    checkpoint: Path | None = None
    predictions_file: Path | None = None

    def to_record(self) -> dict:
        return {
            "model_id": self.model_id,
            "output_dir": str(self.output_dir),
            "hyperparameters": self.hyperparameters.to_dict(),
            "seed": self.seed,
            "optimizer": self.optimizer,
            "lr_schedule": self.lr_schedule,
            "weight_decay": self.weight_decay,
            "max_seq_len": self.max_seq_len,
            "max_new_tokens": self.max_new_tokens,
            "train_documents": str(self.train_documents) if self.train_documents else None,
            "validation_file": str(self.validation_file) if self.validation_file else None,
            "qa_files": [str(p) for p in self.qa_files],
            "train_language": self.train_language,
            "checkpoint": str(self.checkpoint) if self.checkpoint else None,
            "predictions_file": str(self.predictions_file) if self.predictions_file else None,
        }


_KNOWN_KEYS = {
    "model_id",
    "output_dir",
    "hyperparameters",
    "seed",
    "optimizer",
    "lr_schedule",
    "weight_decay",
    "max_seq_len",
    "max_new_tokens",
    "train_documents",
    "validation_file",
    "qa_files",
    "train_language",
    "checkpoint",
    "predictions_file",
}


def load_job(path: Path) -> TrainJob:
    """Parse and validate a job file; relative paths resolve against it."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise JobError(f"job file not found: {path}")
    except json.JSONDecodeError as exc:
        raise JobError(f"job file is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise JobError("job file must hold a JSON object")

    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        raise JobError(f"unknown job keys: {', '.join(unknown)}")
    for key in ("model_id", "output_dir"):
        if not raw.get(key):
            raise JobError(f"job is missing required key '{key}'")

    base = path.parent

    def _path(key: str) -> Path | None:
        value = raw.get(key)
        if value is None:
            return None
        p = Path(str(value))
        return p if p.is_absolute() else base / p

    seed = raw.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0:
        raise JobError("seed must be a non-negative integer")
    optimizer = str(raw.get("optimizer", "adamw"))
    if optimizer != "adamw":
        raise JobError(f"unsupported optimizer '{optimizer}' (only adamw)")
    lr_schedule = str(raw.get("lr_schedule", "constant"))
    if lr_schedule != "constant":
        raise JobError(f"unsupported lr_schedule '{lr_schedule}' (only constant)")
    max_seq_len = raw.get("max_seq_len", 128)
    if not isinstance(max_seq_len, int) or max_seq_len < 8:
        raise JobError("max_seq_len must be an integer >= 8")
    max_new_tokens = raw.get("max_new_tokens", 4)
    if not isinstance(max_new_tokens, int) or max_new_tokens < 1:
        raise JobError("max_new_tokens must be an integer >= 1")

    qa_files = raw.get("qa_files", [])
    if not isinstance(qa_files, list):
        raise JobError("qa_files must be a list of paths")

    return TrainJob(
        model_id=str(raw["model_id"]),
        output_dir=_path("output_dir"),
        hyperparameters=Hyperparameters.from_dict(raw.get("hyperparameters", {})),
        seed=seed,
        optimizer=optimizer,
        lr_schedule=lr_schedule,
        weight_decay=float(raw.get("weight_decay", 0.0)),
        max_seq_len=max_seq_len,
        max_new_tokens=max_new_tokens,
        train_documents=_path("train_documents"),
        validation_file=_path("validation_file"),
        qa_files=tuple(
            (Path(p) if Path(str(p)).is_absolute() else base / str(p)) for p in qa_files
        ),
        train_language=str(raw.get("train_language", "en")),
        checkpoint=_path("checkpoint"),
        predictions_file=_path("predictions_file"),
    )
