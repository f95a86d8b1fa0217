"""Transfer metrics over per-language answer outcomes.

For an ordered language pair (train, test) every shared question lands in
exactly one contingency cell: A both-correct, B train-only-correct, C
test-only-correct, D both-wrong.  Overall accuracy is A over all four;
transfer rate is A over the train-correct half (A+B) and is undefined when
the model got nothing right in the train language.  Undefined pairs are
reported as such and excluded from aggregation, never zero-filled.
"""

from __future__ import annotations

import re
import statistics
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import EmptyJoin, EmptyMatrix, NoSourceCorrect, NothingToAggregate

_ANSWER = re.compile(r"\b([ABCD])\b")


def grade_answer(raw_output: str) -> str | None:
    """First standalone option letter in a model's raw output, or None.

    Only uppercase A-D count; prose like "the answer is B" grades as "B",
    while unparseable output yields None and is scored incorrect.
    """
    match = _ANSWER.search(raw_output or "")
    return match.group(1) if match else None


@dataclass(frozen=True)
class ContingencyMatrix:
    a: int
    b: int
    c: int
    d: int

    @property
    def total(self) -> int:
        return self.a + self.b + self.c + self.d

    def to_dict(self) -> dict:
        return {"A": self.a, "B": self.b, "C": self.c, "D": self.d}


@dataclass(frozen=True)
class JoinCoverage:
    joined: int
    train_only: int
    test_only: int


def build_contingency(
    train_correct: Mapping[str, bool], test_correct: Mapping[str, bool]
) -> tuple[ContingencyMatrix, JoinCoverage]:
    """Join outcomes on shared question ids and count the four cells."""
    shared = train_correct.keys() & test_correct.keys()
    if not shared:
        raise EmptyJoin("no shared question ids between train and test outcomes")
    a = b = c = d = 0
    for key in shared:
        if train_correct[key]:
            if test_correct[key]:
                a += 1
            else:
                b += 1
        elif test_correct[key]:
            c += 1
        else:
            d += 1
    coverage = JoinCoverage(
        joined=len(shared),
        train_only=len(train_correct.keys() - shared),
        test_only=len(test_correct.keys() - shared),
    )
    return ContingencyMatrix(a, b, c, d), coverage


def overall_score(matrix: ContingencyMatrix) -> float:
    if matrix.total == 0:
        raise EmptyMatrix("contingency matrix has no items")
    return matrix.a / matrix.total


def transfer_score(matrix: ContingencyMatrix) -> float:
    if matrix.a + matrix.b == 0:
        raise NoSourceCorrect("no train-language-correct items; transfer rate is undefined")
    return matrix.a / (matrix.a + matrix.b)


def transfer_or_none(matrix: ContingencyMatrix) -> float | None:
    try:
        return transfer_score(matrix)
    except NoSourceCorrect:
        return None


@dataclass(frozen=True)
class Aggregate:
    mean: float
    std: float
    n_defined: int
    n_undefined: int


def aggregate_scores(scores: Iterable[float | None]) -> Aggregate:
    """Mean and population standard deviation over the defined scores.

    ``None`` entries are undefined pairs: counted, excluded from both
    moments.  All-undefined input raises NothingToAggregate.
    """
    values = list(scores)
    defined = [s for s in values if s is not None]
    undefined = len(values) - len(defined)
    if not defined:
        raise NothingToAggregate("every pair in the aggregate is undefined")
    return Aggregate(
        mean=statistics.fmean(defined),
        std=statistics.pstdev(defined),
        n_defined=len(defined),
        n_undefined=undefined,
    )
