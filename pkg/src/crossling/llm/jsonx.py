"""Strict JSON extraction from model output.

One repair pass only: leading prose and code fences are skipped by locating
the first balanced object; nothing inside it is ever altered. Silent bracket
fixing could fabricate benchmark content, so malformed output fails loudly.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import JsonMalformed, JsonNotFound


def _balanced_end(text: str, start: int) -> int | None:
    """Index one past the brace closing ``text[start]``, or None."""
    depth = 0
    in_string = False
    escaped = False
    for i in range(start, len(text)):
        ch = text[i]
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
        elif ch == '"':
            in_string = True
        elif ch == "{":
            depth += 1
        elif ch == "}":
            depth -= 1
            if depth == 0:
                return i + 1
    return None


def extract_json(text: str) -> Any:
    """Parse the first balanced JSON object embedded in ``text``."""
    start = text.find("{")
    if start == -1:
        raise JsonNotFound("no JSON object in model output")
    end = _balanced_end(text, start)
    if end is None:
        raise JsonMalformed("unbalanced JSON object", start)
    candidate = text[start:end]
    try:
        return json.loads(candidate)
    except json.JSONDecodeError as exc:
        raise JsonMalformed(f"invalid JSON: {exc.msg}", start + exc.pos) from exc
