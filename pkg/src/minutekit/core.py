"""Domain types, transcript ingestion, sentence splitting and term filtering."""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from functools import cached_property, lru_cache
from importlib import resources
from pathlib import Path
from typing import Iterable

from .errors import EmptyTranscript, MalformedTranscript

MIN_TERM_LEN = 3
MAX_TERM_LEN = 14

_UTTERANCE_RE = re.compile(r"^\(([A-Z]+\d+)\)\s*(.*)$")
_BOUNDARY_RE = re.compile(r"[.?!]+[\"')\]]*(?=\s+[A-Z0-9])")
_EDGE_PUNCT = "\"'()[]{}<>.,;:!?`*-_/\\|"
_INNER_PUNCT_RE = re.compile(r"[^\w]|_")


def _read_data_lines(name: str) -> list[str]:
    text = resources.files("minutekit").joinpath("data", name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


@lru_cache(maxsize=None)
def load_stopwords(path: str | None = None) -> frozenset[str]:
    """Stopword list, one entry per line. Defaults to the bundled English list."""
    if path is None:
        return frozenset(_read_data_lines("stopwords_en.txt"))
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(w.strip().lower() for w in lines if w.strip())


@lru_cache(maxsize=None)
def load_abbreviations(path: str | None = None) -> frozenset[str]:
    if path is None:
        return frozenset(w.lower() for w in _read_data_lines("abbreviations.txt"))
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    return frozenset(w.strip().lower() for w in lines if w.strip())


@dataclass(frozen=True)
class Utterance:
    speaker: str
    text: str
    index: int


@dataclass(frozen=True)
class Sentence:
    text: str
    utterance_index: int
    sent_index: int
    token_count: int


@dataclass(frozen=True)
class Transcript:
    id: str
    utterances: tuple[Utterance, ...]
    language: str = "en"

    @cached_property
    def sentences(self) -> tuple[Sentence, ...]:
        out = []
        for utt in self.utterances:
            for text in split_sentences(utt.text):
                out.append(Sentence(text, utt.index, len(out), len(tokenize(text))))
        return tuple(out)

    @property
    def speakers(self) -> list[str]:
        """Distinct speaker tags in order of first appearance."""
        return list(dict.fromkeys(u.speaker for u in self.utterances))

    @property
    def text(self) -> str:
        return "\n".join(u.text for u in self.utterances)


@dataclass(frozen=True)
class Document:
    id: str
    kind: str  # "transcript" | "minute"
    raw: str

    def __post_init__(self):
        if self.kind not in ("transcript", "minute"):
            raise ValueError(f"unknown document kind {self.kind!r}")

    @classmethod
    def from_path(cls, path, kind: str) -> "Document":
        path = Path(path)
        return cls(path.stem, kind, path.read_text(encoding="utf-8"))

    @cached_property
    def transcript(self) -> Transcript | None:
        if self.kind != "transcript":
            return None
        return parse_transcript(self.raw, doc_id=self.id)

    @property
    def text(self) -> str:
        """Content text: utterance bodies for transcripts, the raw text for minutes."""
        if self.kind == "transcript":
            return self.transcript.text
        return self.raw


def parse_transcript(raw: str, doc_id: str = "transcript", language: str = "en") -> Transcript:
    """Parse ``(PERSON1) text`` lines; unmatched lines continue the previous utterance."""
    speakers: list[str] = []
    texts: list[list[str]] = []
    for lineno, line in enumerate(raw.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        m = _UTTERANCE_RE.match(line)
        if m:
            speakers.append(m.group(1))
            texts.append([m.group(2).strip()])
        elif not texts:
            raise MalformedTranscript(f"line {lineno}: continuation line before any utterance")
        else:
            texts[-1].append(line)

    utterances = []
    for speaker, parts in zip(speakers, texts):
        text = " ".join(p for p in parts if p)
        if text:
            utterances.append(Utterance(speaker, text, len(utterances)))
    if not utterances:
        raise EmptyTranscript("no utterances found")
    return Transcript(doc_id, tuple(utterances), language)


def read_transcript(path) -> Transcript:
    path = Path(path)
    return parse_transcript(path.read_text(encoding="utf-8"), doc_id=path.stem)


def tokenize(text: str) -> list[str]:
    """Whitespace tokens; the unit for every token budget in the package."""
    return text.split()


def split_sentences(text: str, abbreviations: Iterable[str] | None = None) -> list[str]:
    abbrevs = load_abbreviations() if abbreviations is None else frozenset(abbreviations)
    out = []
    start = 0
    for m in _BOUNDARY_RE.finditer(text):
        piece = text[start:m.end()]
        words = piece.split()
        if words and words[-1].lstrip("([\"'").lower() in abbrevs:
            continue
        piece = piece.strip()
        if piece:
            out.append(piece)
        start = m.end()
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def _clean_term(token: str) -> str:
    return _INNER_PUNCT_RE.sub("", token)


def normalize_terms(text: str, stopwords: Iterable[str] | None = None) -> tuple[frozenset[str], Counter]:
    """Lowercased, punctuation-free, non-stopword terms of 3..14 characters.

    Returns the term set and the term counts.
    """
    stop = load_stopwords() if stopwords is None else stopwords
    counts: Counter = Counter()
    for token in text.lower().split():
        token = token.strip(_EDGE_PUNCT)
        if not token or token in stop:
            continue
        term = _clean_term(token)
        if MIN_TERM_LEN <= len(term) <= MAX_TERM_LEN and term not in stop:
            counts[term] += 1
    return frozenset(counts), counts


def term_counts(text: str, stopwords: Iterable[str] | None = None) -> Counter:
    return normalize_terms(text, stopwords)[1]


def word_tokens(text: str) -> list[str]:
    """Lowercased alphanumeric tokens with punctuation removed."""
    return re.findall(r"[^\W_]+", text.lower())
