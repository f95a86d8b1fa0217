"""LoRA continual pretraining: next-token loss on unmodified document text.

One checkpoint per epoch, a per-step loss log, and a job echo land in the
output directory.  Everything random is seeded from the job, and the loop
runs single-threaded, so a job is bit-reproducible.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import torch
import torch.nn.functional as F

from .data import load_documents, make_chunks
from .errors import JobError, TrainerError
from .job import TrainJob
from .lora import adapter_parameters, adapter_state, inject_adapters
from .model import VOCAB_SIZE, load_base

PAD_TARGET = -100  # ignored by cross_entropy


@dataclass(frozen=True)
class TrainResult:
    checkpoints: list[Path]
    log_path: Path
    epoch_mean_losses: list[float]


def _batches(chunks: list[torch.Tensor], batch_size: int):
    for start in range(0, len(chunks), batch_size):
        group = chunks[start : start + batch_size]
        width = max(len(c) for c in group)
        inputs = torch.zeros(len(group), width, dtype=torch.long)
        targets = torch.full((len(group), width), PAD_TARGET, dtype=torch.long)
        for row, chunk in enumerate(group):
            inputs[row, : len(chunk)] = chunk
            targets[row, : len(chunk)] = chunk
        yield inputs, targets


def train(job: TrainJob) -> TrainResult:
    """Run the job and return the per-epoch checkpoint paths."""
    if job.train_documents is None:
        raise JobError("train requires 'train_documents'")
    documents = load_documents(job.train_documents)
    chunks = make_chunks(documents, job.max_seq_len)

    torch.manual_seed(job.seed)
    torch.set_num_threads(1)
    model = inject_adapters(load_base(job.model_id), job.hyperparameters, job.seed)
    optimizer = torch.optim.AdamW(
        adapter_parameters(model),
        lr=job.hyperparameters.learning_rate,
        weight_decay=job.weight_decay,
    )

    out = Path(job.output_dir)
    checkpoint_dir = out / "checkpoints"
    checkpoint_dir.mkdir(parents=True, exist_ok=True)
    log_path = out / "train_log.jsonl"

    checkpoints: list[Path] = []
    epoch_means: list[float] = []
    try:
        with log_path.open("w", encoding="utf-8") as log:
            for epoch in range(1, job.hyperparameters.epochs + 1):
                model.train()
                losses = []
                for step, (inputs, targets) in enumerate(
                    _batches(chunks, job.hyperparameters.batch_size), start=1
                ):
                    logits = model(inputs[:, :-1])
                    loss = F.cross_entropy(
                        logits.reshape(-1, VOCAB_SIZE),
                        targets[:, 1:].reshape(-1),
                        ignore_index=PAD_TARGET,
                    )
                    optimizer.zero_grad()
                    loss.backward()
                    optimizer.step()
                    losses.append(loss.item())
                    log.write(
                        json.dumps({"epoch": epoch, "step": step, "loss": loss.item()}) + "\n"
                    )
                epoch_means.append(sum(losses) / len(losses))
                path = checkpoint_dir / f"epoch-{epoch}.pt"
                torch.save(
                    {
                        "epoch": epoch,
                        "job": job.to_record(),
                        "adapter_state": adapter_state(model),
                    },
                    path,
                )
                checkpoints.append(path)
    except RuntimeError as exc:  # torch reports OOM as RuntimeError
        if "out of memory" in str(exc).lower():
            raise TrainerError(f"out of memory: {exc}")
        raise

    (out / "job.json").write_text(
        json.dumps(job.to_record(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return TrainResult(checkpoints=checkpoints, log_path=log_path, epoch_mean_losses=epoch_means)
