"""Low-rank adapters over the base model's linear layers.

The base weights stay frozen; only the A/B factors train. B starts at zero
so an untouched adapter is an exact no-op, and the usual alpha/rank scaling
applies to the low-rank update.
"""

from __future__ import annotations

import torch
from torch import nn

from .job import Hyperparameters
from .model import CharLM


class LoraLinear(nn.Module):
    def __init__(self, base: nn.Linear, hp: Hyperparameters, generator: torch.Generator):
        super().__init__()
        self.base = base
        self.base.weight.requires_grad_(False)
        if self.base.bias is not None:
            self.base.bias.requires_grad_(False)
        self.lora_a = nn.Parameter(torch.empty(hp.rank, base.in_features))
        self.lora_b = nn.Parameter(torch.zeros(base.out_features, hp.rank))
        with torch.no_grad():
            self.lora_a.normal_(0.0, 0.02, generator=generator)
        self.scaling = hp.alpha / hp.rank
        self.dropout = nn.Dropout(hp.dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        update = nn.functional.linear(nn.functional.linear(self.dropout(x), self.lora_a), self.lora_b)
        return self.base(x) + update * self.scaling


def inject_adapters(model: CharLM, hp: Hyperparameters, seed: int) -> CharLM:
    """Freeze the base model and wrap every block linear with an adapter."""
    for param in model.parameters():
        param.requires_grad_(False)
    generator = torch.Generator().manual_seed(seed)
    for block in model.blocks:
        block.attn.qkv = LoraLinear(block.attn.qkv, hp, generator)
        block.attn.proj = LoraLinear(block.attn.proj, hp, generator)
        block.ff_in = LoraLinear(block.ff_in, hp, generator)
        block.ff_out = LoraLinear(block.ff_out, hp, generator)
    return model


def adapter_parameters(model: CharLM) -> list[nn.Parameter]:
    return [p for p in model.parameters() if p.requires_grad]


def adapter_state(model: CharLM) -> dict[str, torch.Tensor]:
    return {
        name: tensor.detach().clone()
        for name, tensor in model.state_dict().items()
        if "lora_a" in name or "lora_b" in name
    }


def load_adapter_state(model: CharLM, state: dict[str, torch.Tensor]) -> None:
    missing, unexpected = model.load_state_dict(state, strict=False)
    del missing  # base weights are supplied by load_base, not the checkpoint
    if unexpected:
        raise ValueError(f"unexpected adapter tensors: {unexpected}")
