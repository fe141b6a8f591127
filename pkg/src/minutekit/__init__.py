"""Structured meeting minutes from transcripts, and same-meeting document pair classification."""

from .argmine import ArgumentGraph, PropLabel, build_structure, render
from .core import Document, Transcript, parse_transcript, split_sentences
from .features import PairFeaturizer, build_feature_vector
from .learn import CVEnsembleClassifier, LinearClassifier, Scaler
from .minuteparse import parse_minute
from .pipeline import generate_minute
from .segment import LexicalCohesionSegmenter, agreement_rate, segment_transcript

__version__ = "0.1.0"

__all__ = [
    "ArgumentGraph", "CVEnsembleClassifier", "Document", "LexicalCohesionSegmenter",
    "LinearClassifier", "PairFeaturizer", "PropLabel", "Scaler", "Transcript",
    "agreement_rate", "build_feature_vector", "build_structure", "generate_minute",
    "parse_minute", "parse_transcript", "render", "segment_transcript", "split_sentences",
]
