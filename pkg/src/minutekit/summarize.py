"""Block summarization: speaker formatting, budget truncation, extractive default, post-rules."""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence

from .core import Transcript, split_sentences, term_counts, tokenize
from .errors import EmptyBlock
from .segment import Block, _cosine

UPPER = "<upper>"
_LINE_RE = re.compile(r"^([A-Z]+\d*):\s(.*)$")
_TERMINAL = (".", "!", "?")


@dataclass(frozen=True)
class BlockText:
    lines: tuple[str, ...]

    @property
    def token_count(self) -> int:
        return sum(len(tokenize(line)) for line in self.lines)

    def __len__(self) -> int:
        return len(self.lines)


@dataclass(frozen=True)
class Summary:
    text: str
    source_block: int | None = None


@dataclass(frozen=True)
class PostRule:
    pattern: str
    replacement: str
    order: int = 0

    def apply(self, text: str) -> str:
        if self.replacement == UPPER:
            return re.sub(self.pattern, lambda m: m.group(0).upper(), text)
        return re.sub(self.pattern, self.replacement, text)


def format_block(block: Block, transcript: Transcript) -> BlockText:
    """One ``SPEAKER: text`` line per utterance overlapping the block."""
    if not block.sentences:
        raise EmptyBlock("cannot format an empty block")
    grouped: dict[int, list[str]] = {}
    for sent in block.sentences:
        grouped.setdefault(sent.utterance_index, []).append(sent.text)
    lines = []
    for utt_index, texts in grouped.items():
        speaker = transcript.utterances[utt_index].speaker
        lines.append(f"{speaker}: {' '.join(texts)}")
    return BlockText(tuple(lines))


def truncate_block(bt: BlockText, max_tokens: int = 1024) -> BlockText:
    """Drop whole trailing lines until the block fits ``max_tokens``."""
    if max_tokens <= 0:
        raise ValueError("max_tokens must be positive")
    if not bt.lines:
        return bt
    kept, total = [], 0
    for line in bt.lines:
        n = len(tokenize(line))
        if total + n > max_tokens:
            break
        kept.append(line)
        total += n
    if not kept:
        tokens = tokenize(bt.lines[0])
        warnings.warn(f"first line has {len(tokens)} tokens; hard-truncated to {max_tokens}")
        kept = [" ".join(tokens[:max_tokens])]
    return BlockText(tuple(kept))


def _split_line(line: str) -> tuple[str, str]:
    m = _LINE_RE.match(line)
    if m is None:
        return "SPEAKER", line
    return m.group(1), m.group(2)


class ExtractiveSummarizer:
    """Centroid-similarity sentence extraction, attributed as ``SPEAKER said: ...``."""

    def __init__(self, ratio: float = 0.25, stopwords=None):
        if not 0 < ratio <= 1:
            raise ValueError("ratio must be in (0, 1]")
        self.ratio = ratio
        self.stopwords = stopwords

    def __call__(self, lines: Sequence[str]) -> str:
        if not lines:
            raise EmptyBlock("cannot summarize an empty block")
        candidates = []  # (position, speaker, sentence)
        for line in lines:
            speaker, body = _split_line(line)
            for sent in split_sentences(body) or [body]:
                candidates.append((len(candidates), speaker, sent))

        vectors = [term_counts(sent, self.stopwords) for _, _, sent in candidates]
        centroid: dict = {}
        for vec in vectors:
            for t, v in vec.items():
                centroid[t] = centroid.get(t, 0) + v
        scores = [_cosine(vec, centroid) for vec in vectors]

        m = min(len(candidates), max(1, math.ceil(self.ratio * len(lines))))
        chosen = sorted(range(len(candidates)), key=lambda i: (-scores[i], i))[:m]
        parts = []
        for i in sorted(chosen):
            _, speaker, sent = candidates[i]
            if not sent.endswith(_TERMINAL):
                sent += "."
            parts.append(f"{speaker} said: {sent}")
        return " ".join(parts)


def summarize_block(bt: BlockText, summarizer: Callable[[Sequence[str]], str] | None = None, ratio: float = 0.25) -> Summary:
    if not bt.lines:
        raise EmptyBlock("cannot summarize an empty block")
    summarizer = summarizer or ExtractiveSummarizer(ratio)
    return Summary(summarizer(list(bt.lines)))


def load_post_rules(path=None) -> list[PostRule]:
    """Read ordered ``pattern<TAB>replacement`` lines; ``#`` starts a comment line."""
    if path is None:
        text = resources.files("minutekit").joinpath("data", "post_rules.tsv").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    rules = []
    for line in text.splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        pattern, _, replacement = line.partition("\t")
        re.compile(pattern)
        rules.append(PostRule(pattern, replacement, len(rules)))
    return rules


def postprocess(text: str, rules: Sequence[PostRule] | None = None) -> str:
    if rules is None:
        rules = load_post_rules()
    for rule in sorted(rules, key=lambda r: r.order):
        text = rule.apply(text)
    return text
