"""Checkpoint selection: validation accuracy, argmax, ties to the earliest."""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .data import load_qas
from .errors import JobError
from .predict import greedy_decode, load_checkpoint, render_prompt

# mirrors the harness grader: first standalone A-D letter wins
_LETTER = re.compile(r"\b([ABCD])\b")


def extract_letter(raw_output: str) -> str | None:
    match = _LETTER.search(raw_output)
    return match.group(1) if match else None


def choose(accuracies: list[float]) -> int:
    """Index of the best accuracy; on a tie, the earliest epoch wins."""
    if not accuracies:
        raise JobError("no checkpoints to select from")
    best = 0
    for i, acc in enumerate(accuracies):
        if acc > accuracies[best]:
            best = i
    return best


@dataclass(frozen=True)
class Selection:
    epoch: int
    checkpoint: Path
    accuracies: list[float]

    def to_dict(self) -> dict:
        return {
            "epoch": self.epoch,
            "checkpoint": str(self.checkpoint),
            "accuracies": self.accuracies,
        }


def score_checkpoint(path: Path, validation_file: Path, max_new_tokens: int) -> float:
    model, _payload = load_checkpoint(path)
    qas = load_qas(validation_file)
    hits = 0
    for qa in qas:
        letter = extract_letter(greedy_decode(model, render_prompt(qa), max_new_tokens))
        if letter == qa["correct_option"]:
            hits += 1
    return hits / len(qas) if qas else 0.0


def select_checkpoint(
    checkpoints: list[Path], validation_file: Path, max_new_tokens: int = 4
) -> Selection:
    if not checkpoints:
        raise JobError("no checkpoints to select from")
    accuracies = [
        score_checkpoint(path, validation_file, max_new_tokens) for path in checkpoints
    ]
    best = choose(accuracies)
    return Selection(epoch=best + 1, checkpoint=Path(checkpoints[best]), accuracies=accuracies)
