"""File-format glue: the trainer only ever sees the pipeline's JSONL files."""

from __future__ import annotations

import json
from pathlib import Path

import torch

from .errors import EmptyCorpus, JobError
from .model import encode


def read_jsonl(path: Path) -> list[dict]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except FileNotFoundError:
        raise JobError(f"input file not found: {path}")
    rows = []
    for i, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise JobError(f"{path}:{i}: invalid JSON: {exc}")
    return rows


def load_documents(path: Path) -> list[str]:
    texts = [str(row.get("text", "")) for row in read_jsonl(path)]
    texts = [t for t in texts if t.strip()]
    if not texts:
        raise EmptyCorpus(f"no non-empty documents in {path}")
    return texts


def load_qas(path: Path) -> list[dict]:
    rows = read_jsonl(path)
    for row in rows:
        for key in ("qa_id", "language", "question", "options", "correct_option"):
            if key not in row:
                raise JobError(f"{path}: QA record is missing '{key}'")
    return rows


def make_chunks(texts: list[str], max_seq_len: int) -> list[torch.Tensor]:
    """Non-overlapping windows of token ids, each yielding max_seq_len targets."""
    chunks = []
    for text in texts:
        ids = encode(text)
        for start in range(0, len(ids) - 1, max_seq_len):
            window = ids[start : start + max_seq_len + 1]
            if len(window) >= 2:
                chunks.append(torch.tensor(window, dtype=torch.long))
    return chunks
