"""Deterministic per-stage random streams.

Each pipeline stage draws from its own stream derived from (seed, label),
so concurrency and stage reordering cannot perturb another stage's draws.
"""

from __future__ import annotations

import hashlib
import random


def new_run_rng(seed: int, stage_label: str) -> random.Random:
    """Return a random stream keyed by (seed, stage_label).

    Identical inputs yield identical streams on every platform; distinct
    labels (or seeds) yield independent streams.
    """
    if not 0 <= seed < 2**64:
        raise ValueError("seed must fit in an unsigned 64-bit integer")
    digest = hashlib.sha256(f"{seed}\x1f{stage_label}".encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:16], "big"))
