"""Topic segmentation: token-budget chunking, label merging, BIO blocks, agreement."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .core import Sentence, Transcript, normalize_terms, tokenize
from .errors import CoverageGap, EmptyPartition, InvalidBudget


class BioLabel(str, Enum):
    B = "B"
    I = "I"  # noqa: E741
    O = "O"  # noqa: E741

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Chunk:
    start: int
    end: int  # exclusive
    token_count: int

    def __len__(self) -> int:
        return self.end - self.start

    def __contains__(self, i: int) -> bool:
        return self.start <= i < self.end


@dataclass(frozen=True)
class Block:
    sentences: tuple[Sentence, ...]

    @property
    def start(self) -> int:
        return self.sentences[0].sent_index

    @property
    def end(self) -> int:
        return self.sentences[-1].sent_index + 1

    @property
    def indices(self) -> range:
        return range(self.start, self.end)


@dataclass(frozen=True)
class BlockPartition:
    blocks: tuple[Block, ...]
    repairs: int = 0

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)


@dataclass(frozen=True)
class AgreementReport:
    a_12: float
    a_21: float

    @property
    def average(self) -> float:
        return (self.a_12 + self.a_21) / 2


def _as_labels(labels: Iterable) -> list[BioLabel]:
    return [BioLabel(str(lab)) for lab in labels]


def chunk_sentences(sentences: Sequence[Sentence], max_tokens: int = 4096, stride: int = 1024) -> list[Chunk]:
    """Cover the sentences with overlapping chunks of at most ``max_tokens`` tokens.

    Chunk starts snap forward to the first sentence boundary at least ``stride``
    tokens past the previous start.
    """
    if not 0 < stride < max_tokens:
        raise InvalidBudget(f"need 0 < stride < max_tokens, got stride={stride}, max_tokens={max_tokens}")
    n = len(sentences)
    if n == 0:
        return []
    counts = []
    for s in sentences:
        if s.token_count > max_tokens:
            warnings.warn(f"sentence {s.sent_index} has {s.token_count} tokens; truncated to {max_tokens}")
        counts.append(min(s.token_count, max_tokens))
    if sum(counts) <= max_tokens:
        return [Chunk(0, n, sum(counts))]

    chunks = []
    start = 0
    while True:
        end, total = start, 0
        while end < n and total + counts[end] <= max_tokens:
            total += counts[end]
            end += 1
        chunks.append(Chunk(start, end, total))
        if end >= n:
            return chunks
        nxt, run = start, 0
        while nxt < end and run < stride:
            run += counts[nxt]
            nxt += 1
        start = max(start + 1, min(nxt, end))


def merge_chunk_labels(chunk_predictions: Sequence[tuple[Chunk, Sequence]], n_sentences: int | None = None) -> list[BioLabel]:
    """Per-sentence labels where the earliest chunk containing a sentence wins."""
    if not chunk_predictions:
        if n_sentences:
            raise CoverageGap("no chunks for a non-empty sentence sequence")
        return []
    merged: list[BioLabel] = []
    for chunk, labels in chunk_predictions:
        labels = _as_labels(labels)
        if len(labels) != len(chunk):
            raise ValueError(f"chunk [{chunk.start},{chunk.end}) got {len(labels)} labels")
        if chunk.start > len(merged):
            raise CoverageGap(f"sentences {len(merged)}..{chunk.start - 1} are in no chunk")
        merged.extend(labels[len(merged) - chunk.start:])
    if n_sentences is not None and len(merged) < n_sentences:
        raise CoverageGap(f"sentences {len(merged)}..{n_sentences - 1} are in no chunk")
    return merged


def labels_to_blocks(labeling: Sequence, sentences: Sequence[Sentence]) -> BlockPartition:
    labels = _as_labels(labeling)
    if len(labels) != len(sentences):
        raise ValueError(f"{len(labels)} labels for {len(sentences)} sentences")
    blocks: list[list[Sentence]] = []
    repairs = 0
    prev = BioLabel.O
    for lab, sent in zip(labels, sentences):
        if lab is BioLabel.I and prev is BioLabel.O:
            lab = BioLabel.B
            repairs += 1
        if lab is BioLabel.B:
            blocks.append([sent])
        elif lab is BioLabel.I:
            blocks[-1].append(sent)
        prev = lab
    return BlockPartition(tuple(Block(tuple(b)) for b in blocks), repairs)


def blocks_to_labels(partition: BlockPartition, n_sentences: int) -> list[BioLabel]:
    labels = [BioLabel.O] * n_sentences
    for block in partition:
        for k, i in enumerate(block.indices):
            labels[i] = BioLabel.B if k == 0 else BioLabel.I
    return labels


def _cosine(a: dict, b: dict) -> float:
    dot = sum(v * b.get(t, 0) for t, v in a.items())
    if dot == 0:
        return 0.0
    return dot / math.sqrt(sum(v * v for v in a.values()) * sum(v * v for v in b.values()))


class LexicalCohesionSegmenter(BaseEstimator):
    """Deterministic BIO labeler based on lexical cohesion between sentence windows.

    Gap ``g`` sits between sentences ``g-1`` and ``g``; its similarity compares the
    term counts of the ``window`` sentences on each side. Depth scores are taken
    at similarity valleys and a boundary is placed wherever the depth exceeds
    ``mean - k * std`` of all depth scores.
    """

    def __init__(self, window: int = 4, k: float = 0.5, stopwords=None):
        self.window = window
        self.k = k
        self.stopwords = stopwords

    def fit(self, X=None, y=None):
        return self

    def gap_scores(self, sentences: Sequence[str]) -> list[dict]:
        w = self.window
        n = len(sentences)
        if n < 2 * w:
            return []
        counts = [normalize_terms(s, self.stopwords)[1] for s in sentences]
        gaps = list(range(w, n - w + 1))
        sims = []
        for g in gaps:
            left, right = {}, {}
            for c in counts[g - w:g]:
                for t, v in c.items():
                    left[t] = left.get(t, 0) + v
            for c in counts[g:g + w]:
                for t, v in c.items():
                    right[t] = right.get(t, 0) + v
            sims.append(_cosine(left, right))

        depths = []
        for j, s in enumerate(sims):
            is_valley = (j > 0 or j + 1 < len(sims)) and (j == 0 or s < sims[j - 1]) and (j + 1 == len(sims) or s <= sims[j + 1])
            if not is_valley:
                depths.append(0.0)
                continue
            lpeak = s
            for v in reversed(sims[:j]):
                if v < lpeak:
                    break
                lpeak = v
            rpeak = s
            for v in sims[j + 1:]:
                if v < rpeak:
                    break
                rpeak = v
            depths.append((lpeak - s) + (rpeak - s))

        cutoff = float(np.mean(depths) - self.k * np.std(depths))
        return [
            {"gap": g, "similarity": s, "depth": d, "boundary": d > 0 and d > cutoff}
            for g, s, d in zip(gaps, sims, depths)
        ]

    def predict(self, sentences: Sequence[str]) -> list[BioLabel]:
        n = len(sentences)
        if n == 0:
            return []
        boundaries = {row["gap"] for row in self.gap_scores(sentences) if row["boundary"]}
        outside = [
            not normalize_terms(s, self.stopwords)[0] and len(tokenize(s)) < 3 for s in sentences
        ]
        if all(outside):
            outside = [False] * n

        labels = []
        open_segment = False
        for i in range(n):
            if i in boundaries:
                open_segment = False
            if outside[i]:
                labels.append(BioLabel.O)
            elif open_segment:
                labels.append(BioLabel.I)
            else:
                labels.append(BioLabel.B)
                open_segment = True
        return labels

    __call__ = predict


def default_segmenter(transcript: Transcript, window: int = 4, k: float = 0.5) -> list[BioLabel]:
    seg = LexicalCohesionSegmenter(window=window, k=k)
    return seg.predict([s.text for s in transcript.sentences])


@dataclass
class SegmentationResult:
    sentences: tuple[Sentence, ...]
    chunks: list[Chunk]
    labels: list[BioLabel]
    partition: BlockPartition
    gap_scores: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n_sentences": len(self.sentences),
            "chunks": [{"start": c.start, "end": c.end, "token_count": c.token_count} for c in self.chunks],
            "labels": [str(lab) for lab in self.labels],
            "repairs": self.partition.repairs,
            "blocks": [
                {"start": b.start, "end": b.end, "text": " ".join(s.text for s in b.sentences)}
                for b in self.partition
            ],
            "boundary_scores": self.gap_scores,
        }


def segment_transcript(
    transcript: Transcript,
    labeler: Callable[[list[str]], Sequence] | None = None,
    max_tokens: int = 4096,
    stride: int = 1024,
) -> SegmentationResult:
    """Chunk, label each chunk, merge with prior-chunk priority and build blocks."""
    labeler = labeler if labeler is not None else LexicalCohesionSegmenter()
    sentences = transcript.sentences
    chunks = chunk_sentences(sentences, max_tokens, stride)
    preds = []
    gap_rows: list[dict] = []
    for chunk in chunks:
        texts = [s.text for s in sentences[chunk.start:chunk.end]]
        preds.append((chunk, labeler(texts)))
        if hasattr(labeler, "gap_scores"):
            for row in labeler.gap_scores(texts):
                gap = row["gap"] + chunk.start
                if not gap_rows or gap > gap_rows[-1]["gap"]:
                    gap_rows.append(dict(row, gap=gap))
    labels = merge_chunk_labels(preds, len(sentences))
    return SegmentationResult(sentences, chunks, labels, labels_to_blocks(labels, sentences), gap_rows)


def _index_sets(partition) -> list[frozenset]:
    out = []
    for block in partition:
        if isinstance(block, Block):
            out.append(frozenset(block.indices))
        else:
            out.append(frozenset(block))
    return out


def _directed_agreement(b1: list[frozenset], b2: list[frozenset]) -> float:
    return sum(max(len(x & y) for y in b2) / len(x) for x in b1) / len(b1)


def agreement_rate(B1, B2) -> AgreementReport:
    """Mean best fractional overlap of each block with the other partition, both ways.

    Partitions may be ``BlockPartition`` objects or iterables of sentence-index
    collections.
    """
    b1, b2 = _index_sets(B1), _index_sets(B2)
    if not b1 or not b2 or not all(b1) or not all(b2):
        raise EmptyPartition("agreement needs two non-empty partitions of non-empty blocks")
    return AgreementReport(_directed_agreement(b1, b2), _directed_agreement(b2, b1))
