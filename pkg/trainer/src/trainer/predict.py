"""Greedy (temperature-0) predictions in the harness wire format.

The answer prompt is fixed and versioned here because downstream scores are
only comparable when every checkpoint saw the identical prompt.
"""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .data import load_qas
from .errors import ModelLoadError
from .job import Hyperparameters
from .lora import inject_adapters, load_adapter_state
from .model import BOS, CharLM, load_base

PROMPT_VERSION = "answer/1"
_PROMPT = "{question}\nA. {a}\nB. {b}\nC. {c}\nD. {d}\nAnswer:"

_NEWLINE = 10  # byte value; decoding stops at end of line


def load_checkpoint(path: Path) -> tuple[CharLM, dict]:
    try:
        payload = torch.load(Path(path), map_location="cpu", weights_only=True)
    except FileNotFoundError:
        raise ModelLoadError(f"checkpoint not found: {path}")
    except Exception as exc:
        raise ModelLoadError(f"unreadable checkpoint {path}: {exc}")
    try:
        job = payload["job"]
        hp = Hyperparameters.from_dict(job["hyperparameters"])
        model = inject_adapters(load_base(job["model_id"]), hp, job["seed"])
        load_adapter_state(model, payload["adapter_state"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelLoadError(f"malformed checkpoint {path}: {exc}")
    model.eval()
    return model, payload


def render_prompt(qa: dict) -> str:
    options = qa["options"]
    return _PROMPT.format(
        question=qa["question"],
        a=options.get("A", ""),
        b=options.get("B", ""),
        c=options.get("C", ""),
        d=options.get("D", ""),
    )


@torch.no_grad()
def greedy_decode(model: CharLM, prompt: str, max_new_tokens: int) -> str:
    """Argmax continuation of the prompt, stopping at end of line."""
    limit = model.config.max_seq_len
    ids = [BOS, *prompt.encode("utf-8")]
    produced: list[int] = []
    for _ in range(max_new_tokens):
        window = torch.tensor([ids[-limit:]], dtype=torch.long)
        logits = model(window)
        token = int(logits[0, -1].argmax())
        if token in (_NEWLINE, BOS):
            break
        ids.append(token)
        produced.append(token)
    return bytes(produced).decode("utf-8", errors="replace")


def predict_records(
    model: CharLM, qa_path: Path, train_language: str, model_id: str, epoch: int, max_new_tokens: int
) -> list[dict]:
    records = []
    for qa in load_qas(qa_path):
        records.append(
            {
                "base_qa_id": str(qa["qa_id"]).rsplit(".", 1)[0],
                "language": str(qa["language"]),
                "train_language": train_language,
                "model_id": model_id,
                "raw_output": greedy_decode(model, render_prompt(qa), max_new_tokens),
                "checkpoint": epoch,
                "temperature": 0.0,
            }
        )
    return records


def write_predictions(records: list[dict], path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True) + "\n")
