"""Argument graphs over summary sentences and their itemized rendering."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .core import split_sentences


class PropLabel(str, Enum):
    TASK = "Task"
    FACT = "Fact"
    DISC = "Disc"

    def __str__(self) -> str:
        return self.value


class RelationKind(str, Enum):
    REASON = "Reason"
    EVIDENCE = "Evidence"

    def __str__(self) -> str:
        return self.value


# CDCP proposition types folded into the three minute labels
CDCP_LABELS = {
    "Policy": PropLabel.TASK,
    "Testimony": PropLabel.FACT,
    "Fact": PropLabel.FACT,
    "Value": PropLabel.DISC,
}

_ATTRIBUTION_RE = re.compile(r"^[A-Z]+\d*\s+said:\s*")
_TASK_RE = re.compile(
    r"\b(should|must|needs? to|going to|will\s+(?!not\b)[a-z]+)\b", re.IGNORECASE
)
EVALUATIVE_ADJECTIVES = (
    "good", "great", "bad", "better", "best", "worse", "worst", "important", "useful",
    "useless", "interesting", "nice", "excellent", "difficult", "easy", "hard",
    "problematic", "promising", "helpful", "terrible", "perfect", "wrong",
)
_DISC_RE = re.compile(
    r"\b(think|thinks|believe|believes|feel|feels|agree|agrees|disagree|disagrees|like the idea|"
    + "|".join(EVALUATIVE_ADJECTIVES)
    + r")\b",
    re.IGNORECASE,
)
CAUSAL_CONNECTIVES = ("that is why", "therefore", "because", "since", "as", "so")
_CAUSAL_RE = re.compile(r"^(?:%s)\b" % "|".join(CAUSAL_CONNECTIVES), re.IGNORECASE)


@dataclass(frozen=True)
class Proposition:
    text: str
    index: int


@dataclass(frozen=True)
class ArgRelation:
    src: int
    dst: int
    kind: RelationKind = RelationKind.REASON

    def __post_init__(self):
        if self.src == self.dst:
            raise ValueError("a relation cannot point at its own source")


@dataclass
class ArgumentGraph:
    propositions: list[Proposition]
    labels: list[PropLabel]
    relations: list[ArgRelation] = field(default_factory=list)

    def __post_init__(self):
        if len(self.labels) != len(self.propositions):
            raise ValueError("one label per proposition required")
        n = len(self.propositions)
        for rel in self.relations:
            if not (0 <= rel.src < n and 0 <= rel.dst < n):
                raise ValueError(f"relation {rel} references a missing proposition")

    def to_dict(self) -> dict:
        return {
            "propositions": [
                {"index": p.index, "text": p.text, "label": str(lab)}
                for p, lab in zip(self.propositions, self.labels)
            ],
            "relations": [{"src": r.src, "dst": r.dst, "kind": str(r.kind)} for r in self.relations],
        }


@dataclass
class MinuteItem:
    index: int
    depth: int
    label: PropLabel | None
    text: str
    children: list["MinuteItem"] = field(default_factory=list)


@dataclass
class StructuredMinute:
    roots: list[MinuteItem] = field(default_factory=list)

    def walk(self):
        """Pre-order traversal."""
        stack = list(reversed(self.roots))
        while stack:
            item = stack.pop()
            yield item
            stack.extend(reversed(item.children))


def to_propositions(summary_text: str) -> list[Proposition]:
    return [Proposition(s, i) for i, s in enumerate(split_sentences(summary_text))]


def _content(text: str) -> str:
    return _ATTRIBUTION_RE.sub("", text, count=1)


def label_propositions(props: Sequence[Proposition]) -> list[PropLabel]:
    """Keyword rules, first match wins: policy modal -> Task, opinion marker -> Disc, else Fact."""
    if not props:
        raise ValueError("at least one proposition is required")
    labels = []
    for p in props:
        body = _content(p.text)
        if _TASK_RE.search(body):
            labels.append(PropLabel.TASK)
        elif _DISC_RE.search(body):
            labels.append(PropLabel.DISC)
        else:
            labels.append(PropLabel.FACT)
    return labels


def extract_relations(props: Sequence[Proposition], labels: Sequence[PropLabel] | None = None) -> list[ArgRelation]:
    if labels is not None and len(labels) != len(props):
        raise ValueError("labels must align with propositions")
    relations = []
    for p in props[1:]:
        if _CAUSAL_RE.match(_content(p.text).lstrip()):
            relations.append(ArgRelation(p.index, p.index - 1, RelationKind.REASON))
    return relations


class RuleArgumentMiner:
    """Default labeler + relation extractor; backends share this call signature."""

    def __call__(self, texts: Sequence[str]):
        props = [Proposition(t, i) for i, t in enumerate(texts)]
        labels = label_propositions(props)
        return labels, extract_relations(props, labels)


def build_graph(texts: Sequence[str], miner=None) -> ArgumentGraph:
    props = [Proposition(t, i) for i, t in enumerate(texts)]
    labels, relations = (miner or RuleArgumentMiner())(list(texts))
    labels = [lab if isinstance(lab, PropLabel) else PropLabel(str(lab)) for lab in labels]
    relations = [
        r if isinstance(r, ArgRelation) else ArgRelation(int(r[0]), int(r[1]), RelationKind(str(r[2])))
        for r in relations
    ]
    return ArgumentGraph(props, labels, relations)


def build_structure(g: ArgumentGraph) -> StructuredMinute:
    """Itemize a graph.

    The first proposition and every Task are roots. A proposition with a
    backward relation hangs under its target, provided the target is still on
    the open path (the latest root down to the previous item); anything else
    hangs under the latest root. Pre-order therefore follows proposition order.
    """
    outgoing: dict[int, list[int]] = {}
    for rel in g.relations:
        if rel.dst < rel.src:
            outgoing.setdefault(rel.src, []).append(rel.dst)

    sm = StructuredMinute()
    path: list[MinuteItem] = []  # open path: latest root .. previous item
    for prop, label in zip(g.propositions, g.labels):
        i = prop.index
        if i == 0 or label is PropLabel.TASK:
            item = MinuteItem(i, 0, None, prop.text)
            sm.roots.append(item)
            path = [item]
            continue
        open_ids = {node.index: k for k, node in enumerate(path)}
        targets = [d for d in outgoing.get(i, []) if d in open_ids]
        k = open_ids[max(targets)] if targets else 0
        parent = path[k]
        item = MinuteItem(i, parent.depth + 1, label, prop.text)
        parent.children.append(item)
        path = path[: k + 1] + [item]
    return sm


def render(sm: StructuredMinute) -> str:
    lines = []
    for item in sm.walk():
        if item.depth == 0:
            lines.append(f"* {item.text}")
        else:
            lines.append("- " * item.depth + f"{item.label}: {item.text}")
    return "\n".join(lines)
