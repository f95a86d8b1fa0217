import json
from pathlib import Path
from types import SimpleNamespace

import pytest

from trainer.job import load_job
from trainer.train import train

DOC_TEXTS = [
    "- Movie Title: Fixture Film One\n"
    "- Movie Cast: Ada Lane, Bruno Akst\n"
    "- Movie Summary: A coastal town loses its lighthouse keeper a week before the storm season opens.\n"
    "- Movie Synopsis: Ada Lane takes the post, restores the lamp, and maps the reef with her brother's old charts until the first freighter passes safely.",
    "- Movie Title: Fixture Film Two\n"
    "- Movie Cast: Carl Ibsen, Dora Voss\n"
    "- Movie Summary: Two rival cartographers are hired to draw the same border and discover the survey markers disagree.\n"
    "- Movie Synopsis: Carl and Dora retrace the 1901 expedition, find the forged marker in a dry riverbed, and file the corrected map together.",
    "- Music Video Title: Tin Parade\n"
    "- Music Video Description: A brass band marches through an empty depot while the singer lists the towns the line no longer serves, ending on the platform where the song began.",
    "Sports: Soccer\n"
    "League: Fixture League\n"
    "Match: Harbor Albion vs Milltown Rovers\n"
    "Date: 2025-01-19\n"
    "Score: 2 - 1\n"
    "Match Stats (Harbor Albion vs Milltown Rovers):\n"
    "Corners: 5 - 3\n"
    "Shots: 11 - 9",
    "Sports: Baseball\n"
    "League: Fixture League\n"
    "Match: Bay City Herons vs Northgate Owls\n"
    "Date: 2025-02-02\n"
    "Final Score: 4 - 3\n"
    "Bay City Herons: 1 0 2 0 0 1 0 0 0 -> Hits: 8, Errors: 0\n"
    "Northgate Owls: 0 2 0 0 1 0 0 0 0 -> Hits: 7, Errors: 1",
]

_LETTERS = "ABCD"


def _qa(i: int, lang: str) -> dict:
    return {
        "qa_id": f"base{i:012x}.{lang}",
        "entity_id": f"movie:tmdb:{i % 5}",
        "language": lang,
        "question": f"In the movie: 'Fixture Film {i % 5}', what is detail {i}?",
        "options": {
            "A": f"alpha {i}",
            "B": f"beta {i}",
            "C": f"gamma {i}",
            "D": f"delta {i}",
        },
        "correct_option": _LETTERS[i % 4],
        "status": "verified",
        "source_sentence": None,
    }


VAL_QAS = [_qa(i, "en") for i in range(6)]
JA_QAS = [_qa(i, "ja") for i in range(4)]


def write_jsonl(path: Path, rows: list[dict]) -> Path:
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n", encoding="utf-8")
    return path


def write_corpus(root: Path) -> dict[str, Path]:
    docs = [
        {"entity_id": f"e{i}", "language": "en", "text": text, "template_id": "fixture"}
        for i, text in enumerate(DOC_TEXTS)
    ]
    return {
        "docs": write_jsonl(root / "docs.jsonl", docs),
        "val": write_jsonl(root / "val.jsonl", VAL_QAS),
        "ja": write_jsonl(root / "ja.jsonl", JA_QAS),
    }


def write_job(root: Path, **overrides) -> Path:
    record = {
        "model_id": "tiny-char-lm",
        "output_dir": "out",
        "seed": 11,
        "train_documents": "docs.jsonl",
        "validation_file": "val.jsonl",
        "qa_files": ["val.jsonl", "ja.jsonl"],
        "train_language": "en",
        "predictions_file": "out/preds.jsonl",
    }
    record.update(overrides)
    record = {k: v for k, v in record.items() if v is not None}
    path = root / "job.json"
    path.write_text(json.dumps(record, indent=2) + "\n", encoding="utf-8")
    return path


def _run(root: Path) -> SimpleNamespace:
    write_corpus(root)
    job = load_job(write_job(root))
    return SimpleNamespace(root=root, job=job, result=train(job))


@pytest.fixture(scope="session")
def trained(tmp_path_factory):
    """One full training run shared by the read-only tests."""
    return _run(tmp_path_factory.mktemp("trained"))


@pytest.fixture(scope="session")
def trained_twin(tmp_path_factory):
    """A second run of the identical job, for determinism comparisons."""
    return _run(tmp_path_factory.mktemp("trained-twin"))
