import json

import pytest

from trainer.errors import EmptyCorpus, JobError, ModelLoadError
from trainer.job import load_job
from trainer.train import train

from conftest import write_corpus, write_job, write_jsonl


def test_one_checkpoint_per_epoch(trained):
    assert [p.name for p in trained.result.checkpoints] == [
        f"epoch-{n}.pt" for n in range(1, 6)
    ]
    for path in trained.result.checkpoints:
        assert path.is_file()


def test_loss_log_has_every_step_and_matches_epoch_means(trained):
    rows = [
        json.loads(line)
        for line in trained.result.log_path.read_text(encoding="utf-8").splitlines()
    ]
    assert {tuple(sorted(r)) for r in rows} == {("epoch", "loss", "step")}
    by_epoch: dict[int, list[float]] = {}
    for row in rows:
        by_epoch.setdefault(row["epoch"], []).append(row["loss"])
    assert sorted(by_epoch) == [1, 2, 3, 4, 5]
    steps = {len(v) for v in by_epoch.values()}
    assert len(steps) == 1 and steps.pop() > 1
    for epoch, losses in by_epoch.items():
        mean = sum(losses) / len(losses)
        assert abs(mean - trained.result.epoch_mean_losses[epoch - 1]) < 1e-12


def test_loss_trends_down(trained):
    means = trained.result.epoch_mean_losses
    non_increasing = sum(1 for a, b in zip(means, means[1:]) if b <= a)
    assert non_increasing >= 3, means


def test_fixed_seed_runs_agree(trained, trained_twin):
    final_a = trained.result.epoch_mean_losses[-1]
    final_b = trained_twin.result.epoch_mean_losses[-1]
    assert abs(final_a - final_b) <= 1e-6
    assert trained.result.log_path.read_text() == trained_twin.result.log_path.read_text()


def test_job_echo_is_complete(trained):
    echo = json.loads((trained.job.output_dir / "job.json").read_text(encoding="utf-8"))
    assert echo == trained.job.to_record()
    assert echo["hyperparameters"]["rank"] == 16


def test_empty_document_file_is_a_precondition_error(tmp_path):
    write_corpus(tmp_path)
    write_jsonl(tmp_path / "docs.jsonl", [{"entity_id": "e0", "language": "en", "text": "  "}])
    with pytest.raises(EmptyCorpus):
        train(load_job(write_job(tmp_path)))


def test_missing_document_file(tmp_path):
    write_corpus(tmp_path)
    (tmp_path / "docs.jsonl").unlink()
    with pytest.raises(JobError, match="not found"):
        train(load_job(write_job(tmp_path)))


def test_unknown_base_model(tmp_path):
    write_corpus(tmp_path)
    with pytest.raises(ModelLoadError):
        train(load_job(write_job(tmp_path, model_id="colossal-llm")))


def test_train_requires_documents(tmp_path):
    write_corpus(tmp_path)
    job = load_job(write_job(tmp_path, train_documents=None))
    with pytest.raises(JobError, match="train_documents"):
        train(job)
