import pytest

from trainer.errors import JobError
from trainer.job import Hyperparameters, load_job

from conftest import write_job


def test_hyperparameter_defaults_are_exact(tmp_path):
    job = load_job(write_job(tmp_path))
    hp = job.hyperparameters
    assert hp.rank == 16
    assert hp.alpha == 32
    assert hp.learning_rate == 5e-4
    assert hp.dropout == 0.1
    assert hp.batch_size == 1
    assert hp.epochs == 5
    assert job.optimizer == "adamw"
    assert job.lr_schedule == "constant"
    assert job.weight_decay == 0.0
    assert job.max_seq_len == 128


def test_every_resolved_value_lands_in_the_record(tmp_path):
    record = load_job(write_job(tmp_path, seed=3)).to_record()
    assert record["hyperparameters"] == {
        "rank": 16,
        "alpha": 32,
        "learning_rate": 5e-4,
        "dropout": 0.1,
        "batch_size": 1,
        "epochs": 5,
    }
    assert record["seed"] == 3
    assert record["optimizer"] == "adamw"
    assert record["lr_schedule"] == "constant"
    assert record["max_seq_len"] == 128
    assert record["max_new_tokens"] == 4
    assert record["train_language"] == "en"


def test_relative_paths_resolve_against_the_job_file(tmp_path):
    job = load_job(write_job(tmp_path))
    assert job.train_documents == tmp_path / "docs.jsonl"
    assert job.output_dir == tmp_path / "out"
    assert job.qa_files == (tmp_path / "val.jsonl", tmp_path / "ja.jsonl")


def test_absolute_paths_pass_through(tmp_path):
    job = load_job(write_job(tmp_path, train_documents=str(tmp_path / "elsewhere.jsonl")))
    assert job.train_documents == tmp_path / "elsewhere.jsonl"


@pytest.mark.parametrize(
    "overrides, message",
    [
        ({"model_id": ""}, "model_id"),
        ({"optimizer": "sgd"}, "optimizer"),
        ({"lr_schedule": "cosine"}, "lr_schedule"),
        ({"seed": -1}, "seed"),
        ({"max_seq_len": 4}, "max_seq_len"),
        ({"typo_key": True}, "unknown job keys"),
        ({"hyperparameters": {"rank": 16, "rnak": 8}}, "unknown hyperparameters"),
        ({"hyperparameters": {"epochs": 0}}, "epochs"),
        ({"hyperparameters": {"dropout": 1.0}}, "dropout"),
    ],
)
def test_invalid_jobs_are_rejected(tmp_path, overrides, message):
    path = write_job(tmp_path, **overrides)
    with pytest.raises(JobError, match=message):
        load_job(path)


def test_missing_job_file(tmp_path):
    with pytest.raises(JobError, match="not found"):
        load_job(tmp_path / "absent.json")


def test_hyperparameters_reject_unknown_keys():
    with pytest.raises(JobError):
        Hyperparameters.from_dict({"beta": 0.9})
