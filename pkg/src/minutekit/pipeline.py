"""Transcript -> structured minute: segment, summarize each block, itemize."""

from __future__ import annotations

from dataclasses import dataclass, field

from .argmine import ArgumentGraph, RuleArgumentMiner, build_graph, build_structure, render
from .config import Config, resolve_backend
from .core import Transcript, split_sentences
from .dates import DateStamp, parse_date
from .features import TRANSCRIPT_DATE_SCAN
from .segment import Block, LexicalCohesionSegmenter, SegmentationResult, segment_transcript
from .summarize import ExtractiveSummarizer, format_block, load_post_rules, postprocess, truncate_block


def make_segmenter(cfg: Config):
    s = cfg.segmenter
    return resolve_backend(s.backend, {"lexical": lambda: LexicalCohesionSegmenter(s.window, s.k)})


def make_summarizer(cfg: Config):
    return resolve_backend(cfg.summarizer.backend, {"extractive": lambda: ExtractiveSummarizer(cfg.summarizer.ratio)})


def make_miner(cfg: Config):
    return resolve_backend(cfg.argmine.backend, {"rules": RuleArgumentMiner})


def transcript_date(transcript: Transcript) -> DateStamp | None:
    for utt in transcript.utterances[:TRANSCRIPT_DATE_SCAN]:
        stamp = parse_date(utt.text)
        if stamp is not None:
            return stamp
    return None


@dataclass
class BlockSummary:
    block: Block
    lines: tuple[str, ...]
    summary: str

    def to_dict(self) -> dict:
        return {"start": self.block.start, "end": self.block.end, "lines": list(self.lines), "summary": self.summary}


@dataclass
class MinuteResult:
    header: list[str]
    body: list[str]
    segmentation: SegmentationResult
    summaries: list[BlockSummary] = field(default_factory=list)
    graphs: list[ArgumentGraph] = field(default_factory=list)

    @property
    def text(self) -> str:
        parts = []
        if self.header:
            parts.append("\n".join(self.header))
        parts.append("\n".join(self.body))
        return "\n\n".join(parts) + "\n"


def summarize_blocks(transcript: Transcript, cfg: Config, segmentation: SegmentationResult | None = None):
    segmentation = segmentation or segment_transcript(
        transcript, make_segmenter(cfg), cfg.segmenter.max_tokens, cfg.segmenter.stride
    )
    blocks = list(segmentation.partition) or [Block(transcript.sentences)]
    summarizer = make_summarizer(cfg)
    rules = load_post_rules(cfg.paths.post_rules)
    out = []
    for block in blocks:
        bt = truncate_block(format_block(block, transcript), cfg.summarizer.max_tokens)
        out.append(BlockSummary(block, bt.lines, postprocess(summarizer(list(bt.lines)), rules)))
    return segmentation, out


def generate_minute(transcript: Transcript, cfg: Config | None = None) -> MinuteResult:
    cfg = cfg or Config()
    segmentation, summaries = summarize_blocks(transcript, cfg)
    miner = make_miner(cfg)
    body, graphs = [], []
    for bs in summaries:
        props = split_sentences(bs.summary) or [bs.summary]
        graph = build_graph(props, miner)
        graphs.append(graph)
        body.extend(render(build_structure(graph)).splitlines())

    header = []
    stamp = transcript_date(transcript)
    if stamp is not None:
        header.append(f"DATE: {stamp.isoformat()}")
    header.append("ATTENDEES: " + ", ".join(transcript.speakers))
    return MinuteResult(header, body, segmentation, summaries, graphs)
