"""Knowledge-injection trainer: LoRA continual pretraining plus greedy
prediction export in the evaluation harness's wire format."""

__version__ = "1.0.0"
