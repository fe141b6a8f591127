"""ROUGE-N / ROUGE-L against one or more references, and Pearson correlation."""

from __future__ import annotations

import statistics
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import word_tokens
from .errors import DegenerateInput, LengthMismatch, NoReferences

MODES = ("average", "max")


@dataclass(frozen=True)
class RougeScore:
    precision: float
    recall: float
    f1: float

    @classmethod
    def from_counts(cls, matches: int, n_cand: int, n_ref: int) -> "RougeScore":
        p = matches / n_cand if n_cand else 0.0
        r = matches / n_ref if n_ref else 0.0
        return cls(p, r, 2 * p * r / (p + r) if p + r else 0.0)

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(candidate: str, reference: str, n: int = 1) -> RougeScore:
    if n < 1:
        raise ValueError("n must be >= 1")
    cand = _ngrams(word_tokens(candidate), n)
    ref = _ngrams(word_tokens(reference), n)
    matches = sum((cand & ref).values())
    return RougeScore.from_counts(matches, sum(cand.values()), sum(ref.values()))


def lcs_length(a: Sequence, b: Sequence) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(candidate: str, reference: str) -> RougeScore:
    cand, ref = word_tokens(candidate), word_tokens(reference)
    return RougeScore.from_counts(lcs_length(cand, ref), len(cand), len(ref))


METRICS: dict[str, Callable[[str, str], RougeScore]] = {
    "rouge1": lambda c, r: rouge_n(c, r, 1),
    "rouge2": lambda c, r: rouge_n(c, r, 2),
    "rougeL": rouge_l,
}


def aggregate_over_refs(candidate: str, refs: Sequence[str], metric="rouge1", mode: str = "average") -> RougeScore:
    """Mean score over references, or the full score of the best-F1 reference."""
    if not refs:
        raise NoReferences("at least one reference is required")
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    fn = METRICS[metric] if isinstance(metric, str) else metric
    scores = [fn(candidate, ref) for ref in refs]
    if mode == "max":
        return max(scores, key=lambda s: s.f1)
    k = len(scores)
    return RougeScore(
        sum(s.precision for s in scores) / k,
        sum(s.recall for s in scores) / k,
        sum(s.f1 for s in scores) / k,
    )


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise LengthMismatch("xs and ys differ in length")
    if len(xs) < 2:
        raise DegenerateInput("need at least two points")
    try:
        r = statistics.correlation([float(x) for x in xs], [float(y) for y in ys])
    except statistics.StatisticsError as exc:
        raise DegenerateInput(str(exc)) from exc
    return max(-1.0, min(1.0, r))
