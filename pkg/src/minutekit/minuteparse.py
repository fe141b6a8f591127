"""Transition-based recovery of minute structure (title, date, attendees, topic tree).

The parser keeps a stack of open tree nodes (virtual ROOT at the bottom) and a
buffer of unread lines. Each action consumes exactly one line:

* ``LABEL(l)``  record the line as header field ``l``; stack unchanged
* ``ADD``       attach the line under ``s0`` and push it
* ``REPLACE``   pop ``s0`` (and any deeper-or-equal levels), attach under the new top, push
* ``ARC``       attach the line under ``s0`` as a leaf
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .dates import has_date
from .errors import EmptyBuffer, InconsistentTree, PredictorFailure, StackUnderflow


class LineLabel(str, Enum):
    TITLE = "title"
    DATE = "date"
    ATTENDEES = "attendees"
    TOPIC = "topic"
    SUBTOPIC = "subtopic"
    ITEM = "item"
    OTHER = "other"

    def __str__(self) -> str:
        return self.value


class ActionKind(str, Enum):
    LABEL = "LABEL"
    ADD = "ADD"
    REPLACE = "REPLACE"
    ARC = "ARC"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    label: LineLabel | None = None

    def __post_init__(self):
        if (self.kind is ActionKind.LABEL) != (self.label is not None):
            raise ValueError("a label is required for LABEL and forbidden otherwise")

    def __str__(self) -> str:
        return f"LABEL({self.label})" if self.label is not None else self.kind.value

    @classmethod
    def parse(cls, s: str) -> "Action":
        m = re.fullmatch(r"LABEL\((\w+)\)", s)
        if m:
            return cls(ActionKind.LABEL, LineLabel(m.group(1)))
        return cls(ActionKind(s))


ADD = Action(ActionKind.ADD)
ARC = Action(ActionKind.ARC)
REPLACE = Action(ActionKind.REPLACE)


def LABEL(label) -> Action:  # noqa: N802
    return Action(ActionKind.LABEL, LineLabel(label))


@dataclass(frozen=True)
class MinuteLine:
    raw: str
    indent: int
    bullet: str  # "star" | "dash" | "none"
    text: str
    position: int

    @property
    def level(self) -> int:
        """Tree depth the line's marker asks for (ROOT is 0)."""
        return self.indent + 1 if self.bullet == "dash" else 1


_DASHES_RE = re.compile(r"^(?:-(?:\s+|$))+")


def read_lines(minute_text: str) -> list[MinuteLine]:
    out = []
    for raw in minute_text.splitlines():
        stripped = raw.strip()
        if not stripped:
            continue
        if stripped.startswith("*"):
            bullet, indent, text = "star", 0, stripped.lstrip("*").strip()
        else:
            m = _DASHES_RE.match(stripped)
            if m:
                bullet, indent, text = "dash", m.group(0).count("-"), stripped[m.end():].strip()
            else:
                bullet, indent, text = "none", 0, stripped
        if not text:
            continue
        out.append(MinuteLine(raw, indent, bullet, text, len(out)))
    return out


@dataclass(eq=False)
class Node:
    line: MinuteLine | None  # None for the virtual ROOT
    parent: "Node | None" = None
    children: list["Node"] = field(default_factory=list)

    @property
    def position(self) -> int:
        return -1 if self.line is None else self.line.position

    @property
    def level(self) -> int:
        return 0 if self.line is None else self.line.level

    @property
    def text(self) -> str:
        return "" if self.line is None else self.line.text

    @property
    def depth(self) -> int:
        d, node = 0, self
        while node.parent is not None:
            d, node = d + 1, node.parent
        return d

    @property
    def label(self) -> LineLabel | None:
        if self.line is None:
            return None
        if self.depth == 1:
            return LineLabel.TOPIC
        return LineLabel.SUBTOPIC if self.children else LineLabel.ITEM

    def add_child(self, node: "Node") -> "Node":
        node.parent = self
        self.children.append(node)
        return node

    def shape(self):
        return (self.position, self.text, tuple(c.shape() for c in self.children))

    def to_dict(self) -> dict:
        out = {"position": self.position, "text": self.text}
        if self.line is not None:
            out["label"] = str(self.label)
        out["children"] = [c.to_dict() for c in self.children]
        return out


class MinuteTree:
    def __init__(self):
        self.root = Node(None)
        self.labeled: list[tuple[LineLabel, MinuteLine]] = []

    @property
    def labeled_fields(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for label, line in self.labeled:
            out.setdefault(str(label), []).append(line.text)
        return out

    def has_field(self, label) -> bool:
        return any(lab == LineLabel(label) for lab, _ in self.labeled)

    def nodes(self) -> Iterable[Node]:
        """Non-root nodes in pre-order."""
        stack = list(reversed(self.root.children))
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def max_depth(self) -> int:
        return max((n.depth for n in self.nodes()), default=0)

    def shape(self):
        labeled = tuple((str(lab), line.position, line.text) for lab, line in self.labeled)
        return labeled, self.root.shape()

    def __eq__(self, other) -> bool:
        return isinstance(other, MinuteTree) and self.shape() == other.shape()

    def to_dict(self) -> dict:
        return {"labeled_fields": self.labeled_fields, "tree": self.root.to_dict()}

    @classmethod
    def from_parents(cls, lines: Sequence[MinuteLine], parents: dict[int, int], labels: dict[int, str] | None = None) -> "MinuteTree":
        """Build from explicit links: ``parents[pos]`` is the parent position (-1 for ROOT)."""
        tree = cls()
        labels = labels or {}
        by_pos = {-1: tree.root}
        for line in lines:
            if line.position in labels:
                tree.labeled.append((LineLabel(labels[line.position]), line))
                continue
            parent = by_pos.get(parents[line.position])
            if parent is None:
                raise InconsistentTree(f"line {line.position}: parent must precede the child")
            by_pos[line.position] = parent.add_child(Node(line))
        return tree


def render_minute(tree: MinuteTree) -> str:
    """Text form of a tree: header lines verbatim, depth-1 nodes as ``*``, deeper as dashes."""
    rows = [(line.position, line.text) for _, line in tree.labeled]
    for node in tree.nodes():
        d = node.depth
        rows.append((node.position, f"* {node.text}" if d == 1 else "- " * (d - 1) + node.text))
    return "\n".join(text for _, text in sorted(rows))


@dataclass
class ParserState:
    stack: list[Node]
    buffer: list[MinuteLine]
    tree: MinuteTree
    n_lines: int
    cursor: int = 0
    trace: list[Action] = field(default_factory=list)

    @classmethod
    def initial(cls, lines: Sequence[MinuteLine]) -> "ParserState":
        tree = MinuteTree()
        return cls([tree.root], list(lines), tree, len(lines))

    @property
    def s0(self) -> Node:
        return self.stack[-1]

    @property
    def s1(self) -> Node | None:
        return self.stack[-2] if len(self.stack) > 1 else None

    @property
    def b0(self) -> MinuteLine:
        if self.cursor >= len(self.buffer):
            raise EmptyBuffer("buffer is empty")
        return self.buffer[self.cursor]

    def lookahead(self, k: int = 1) -> MinuteLine | None:
        i = self.cursor + k
        return self.buffer[i] if i < len(self.buffer) else None

    @property
    def done(self) -> bool:
        return self.cursor >= len(self.buffer)

    @property
    def stack_depth(self) -> int:
        return len(self.stack) - 1


def step(state: ParserState, action: Action) -> ParserState:
    """Apply one transition in place and return the state."""
    line = state.b0
    if action.kind is ActionKind.LABEL:
        state.tree.labeled.append((action.label, line))
    elif action.kind is ActionKind.ADD:
        state.stack.append(state.s0.add_child(Node(line)))
    elif action.kind is ActionKind.ARC:
        state.s0.add_child(Node(line))
    elif action.kind is ActionKind.REPLACE:
        if len(state.stack) < 2:
            raise StackUnderflow("REPLACE needs a node above ROOT")
        state.stack.pop()
        while len(state.stack) > 1 and state.s0.level >= line.level:
            state.stack.pop()
        state.stack.append(state.s0.add_child(Node(line)))
    state.cursor += 1
    state.trace.append(action)
    return state


Predictor = Callable[[ParserState], Action]


def parse(lines: Sequence[MinuteLine], predictor: Predictor | None = None) -> MinuteTree:
    tree, _ = parse_with_trace(lines, predictor)
    return tree


def parse_with_trace(lines: Sequence[MinuteLine], predictor: Predictor | None = None) -> tuple[MinuteTree, list[Action]]:
    predictor = predictor or RulePredictor()
    state = ParserState.initial(lines)
    while not state.done:
        try:
            action = predictor(state)
        except (EmptyBuffer, StackUnderflow):
            raise
        except Exception as exc:
            raise PredictorFailure(f"predictor failed at line {state.cursor}: {exc}") from exc
        if not isinstance(action, Action):
            raise PredictorFailure(f"predictor returned {action!r}")
        step(state, action)
    return state.tree, state.trace


def parse_minute(minute_text: str, predictor: Predictor | None = None) -> MinuteTree:
    return parse(read_lines(minute_text), predictor)


_ATTENDEES_RE = re.compile(r"^(attendees|present|participants)\b", re.IGNORECASE)
_DATE_KEY_RE = re.compile(r"^date\b", re.IGNORECASE)


class RulePredictor:
    """Hand-written action policy used when no learned predictor is supplied."""

    def __call__(self, state: ParserState) -> Action:
        line = state.b0
        tree = state.tree
        if line.bullet == "none":
            if _ATTENDEES_RE.match(line.text):
                return LABEL("attendees")
            if _DATE_KEY_RE.match(line.text):
                return LABEL("date")
            if not tree.has_field("title") and not tree.root.children and not tree.labeled:
                return LABEL("title")
            if not tree.has_field("date") and has_date(line.text):
                return LABEL("date")
        if state.s0.line is None or line.level > state.s0.level:
            nxt = state.lookahead()
            return ADD if nxt is not None and nxt.level > line.level else ARC
        return REPLACE


class OraclePredictor:
    """Replays a fixed action sequence."""

    def __init__(self, actions: Sequence[Action]):
        self.actions = list(actions)

    def __call__(self, state: ParserState) -> Action:
        return self.actions[state.cursor]


def oracle_actions(tree: MinuteTree, lines: Sequence[MinuteLine]) -> list[Action]:
    """Canonical action sequence that rebuilds ``tree`` from ``lines``.

    Leaves whose parent is ``s0`` attach by ARC, internal nodes by ADD, and any
    node whose parent is not ``s0`` by REPLACE.
    """
    labeled = {line.position: label for label, line in tree.labeled}
    by_pos = {node.position: node for node in tree.nodes()}
    if set(labeled) & set(by_pos) or set(labeled) | set(by_pos) != set(range(len(lines))):
        raise InconsistentTree("tree positions do not cover the lines exactly once")

    state = ParserState.initial(lines)
    actions = []
    for line in lines:
        pos = line.position
        if pos in labeled:
            action = LABEL(labeled[pos])
        else:
            node = by_pos[pos]
            if node.text != line.text:
                raise InconsistentTree(f"line {pos}: text differs from the tree node")
            if node.parent.position == state.s0.position:
                action = ADD if node.children else ARC
            elif len(state.stack) > 1:
                action = REPLACE
            else:
                raise InconsistentTree(f"line {pos}: parent is not on the stack")
        step(state, action)
        if action.kind is not ActionKind.LABEL:
            placed = state.s0 if action.kind is not ActionKind.ARC else state.s0.children[-1]
            if placed.parent.position != by_pos[pos].parent.position:
                raise InconsistentTree(f"line {pos}: no action reaches parent {by_pos[pos].parent.position}")
        actions.append(action)
    return actions


_TOPIC_RE = re.compile(r"\btopic", re.IGNORECASE)

FEATURE_NAMES = (
    "indent", "bullet_star", "bullet_dash", "bullet_none", "position_ratio", "n_tokens",
    "has_date", "title_like", "kw_attendees", "kw_present", "kw_topic", "stack_depth",
    "depth_delta", "level_delta", "next_deeper", "title_seen", "date_seen",
)


def line_features(line: MinuteLine, state: ParserState) -> np.ndarray:
    low = line.text.lower()
    nxt = state.buffer[line.position + 1] if line.position + 1 < len(state.buffer) else None
    return np.array([
        line.indent,
        line.bullet == "star",
        line.bullet == "dash",
        line.bullet == "none",
        line.position / max(1, state.n_lines - 1),
        len(line.text.split()),
        has_date(line.text),
        line.position == 0 and line.bullet == "none",
        "attendees" in low,
        "present:" in low,
        bool(_TOPIC_RE.search(line.text)),
        state.stack_depth,
        line.indent - state.stack_depth,
        line.level - state.s0.level,
        nxt is not None and nxt.level > line.level,
        state.tree.has_field("title"),
        state.tree.has_field("date"),
    ], dtype=float)


class LearnedActionPredictor(BaseEstimator):
    """One-vs-rest linear action classifier over ``line_features``.

    Trained from (lines, tree) pairs through their oracle action sequences.
    """

    def __init__(self, alpha: float = 1e-3, learning_rate: float = 0.1, epochs: int = 300):
        self.alpha = alpha
        self.learning_rate = learning_rate
        self.epochs = epochs

    def fit(self, documents: Sequence[tuple[Sequence[MinuteLine], MinuteTree]], y=None):
        from .learn import LinearClassifier, Scaler

        X, labels = [], []
        for lines, tree in documents:
            state = ParserState.initial(lines)
            for action in oracle_actions(tree, lines):
                X.append(line_features(state.b0, state))
                labels.append(str(action))
                step(state, action)
        X = np.asarray(X)
        self.scaler_ = Scaler().fit(X)
        Z = self.scaler_.transform(X)
        self.classes_ = sorted(set(labels))
        self.models_ = {}
        for cls in self.classes_:
            target = np.array([lab == cls for lab in labels], dtype=int)
            if target.min() == target.max():
                continue
            self.models_[cls] = LinearClassifier(
                loss="logistic", alpha=self.alpha, learning_rate=self.learning_rate, epochs=self.epochs
            ).fit(Z, target)
        self.constant_ = max(self.classes_, key=labels.count)
        return self

    def __call__(self, state: ParserState) -> Action:
        z = self.scaler_.transform(line_features(state.b0, state)[None, :])
        scores = {cls: float(m.decision_function(z)[0]) for cls, m in self.models_.items()}
        if not scores:
            scores = {self.constant_: 0.0}
        for cls in sorted(scores, key=lambda c: -scores[c]):
            action = Action.parse(cls)
            if action.kind is ActionKind.REPLACE and len(state.stack) < 2:
                continue
            return action
        return ARC
