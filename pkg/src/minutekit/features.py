"""Relevance features for deciding whether two documents come from the same meeting."""

from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Protocol, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .core import Document, normalize_terms, word_tokens
from .dates import DateStamp, parse_date
from .errors import EmptyCorpus, InvalidN

FEATURE_NAMES = (
    "tfidf_cos", "jaccard", "ne_overlap",
    "date_year", "date_month", "date_day", "date_hour",
    "semsim",
)
FEATURE_VERSION = "minutekit-features-1"
DEFAULT_ENTITY_TAGS = ("PERSON", "PROJECT", "ORGANIZATION")
TRANSCRIPT_DATE_SCAN = 50


def _text(d) -> str:
    return d.text if isinstance(d, Document) else str(d)


@dataclass
class IdfTable:
    weights: dict[str, float]
    doc_count: int
    default: float

    def __getitem__(self, term: str) -> float:
        return self.weights.get(term, self.default)

    def to_dict(self) -> dict:
        return {"doc_count": self.doc_count, "default": self.default, "weights": dict(sorted(self.weights.items()))}

    @classmethod
    def from_dict(cls, d: dict) -> "IdfTable":
        return cls(dict(d["weights"]), int(d["doc_count"]), float(d["default"]))

    @classmethod
    def uniform(cls, weight: float = 1.0) -> "IdfTable":
        return cls({}, 0, weight)


def fit_idf(corpus: Sequence) -> IdfTable:
    """Smoothed idf: ln((1 + N) / (1 + df)) + 1, unseen terms get ln(1 + N) + 1."""
    if not corpus:
        raise EmptyCorpus("idf needs at least one document")
    n = len(corpus)
    df: dict[str, int] = {}
    for doc in corpus:
        for term in normalize_terms(_text(doc))[0]:
            df[term] = df.get(term, 0) + 1
    weights = {t: math.log((1 + n) / (1 + c)) + 1 for t, c in df.items()}
    return IdfTable(weights, n, math.log(1 + n) + 1)


def tfidf_cosine(d1, d2, idf: IdfTable) -> float:
    c1 = normalize_terms(_text(d1))[1]
    c2 = normalize_terms(_text(d2))[1]
    if not c1 or not c2:
        return 0.0
    v1 = {t: tf * idf[t] for t, tf in c1.items()}
    v2 = {t: tf * idf[t] for t, tf in c2.items()}
    dot = sum(w * v2[t] for t, w in v1.items() if t in v2)
    if dot == 0:
        return 0.0
    norm = math.sqrt(sum(w * w for w in v1.values())) * math.sqrt(sum(w * w for w in v2.values()))
    return min(1.0, dot / norm)


def jaccard(d1, d2) -> float:
    v1 = normalize_terms(_text(d1))[0]
    v2 = normalize_terms(_text(d2))[0]
    union = v1 | v2
    return len(v1 & v2) / len(union) if union else 0.0


@lru_cache(maxsize=32)
def _entity_re(tags: tuple[str, ...]) -> re.Pattern:
    alt = "|".join(re.escape(t) for t in sorted(tags, key=len, reverse=True))
    return re.compile(r"\[\s*(%s) ?([A-Za-z0-9]*)\s*\]" % alt, re.IGNORECASE)


def extract_entities(text, tags: Iterable[str] = DEFAULT_ENTITY_TAGS) -> frozenset[str]:
    """Anonymized entity tokens such as ``[PERSON1]`` or ``[PERSON 1]``, as ``PERSON1``."""
    pattern = _entity_re(tuple(t.upper() for t in tags))
    return frozenset((m.group(1) + m.group(2)).upper() for m in pattern.finditer(_text(text)))


def ne_overlap(e1: frozenset, e2: frozenset) -> float:
    if not e1 or not e2:
        return 0.0
    return len(e1 & e2) / len(e1 | e2)


def extract_date(doc) -> DateStamp | None:
    """Date of a document.

    Minutes: the date line found by the minute parser. Transcripts: the first
    date mentioned in the opening utterances. Plain strings are scanned whole.
    """
    if not isinstance(doc, Document):
        return parse_date(str(doc))
    if doc.kind == "minute":
        from .minuteparse import parse_minute

        for line in parse_minute(doc.raw).labeled_fields.get("date", []):
            stamp = parse_date(line)
            if stamp is not None:
                return stamp
        return None
    for utt in doc.transcript.utterances[:TRANSCRIPT_DATE_SCAN]:
        stamp = parse_date(utt.text)
        if stamp is not None:
            return stamp
    return None


def date_consistency(d1: DateStamp | None, d2: DateStamp | None) -> list[int]:
    if d1 is None or d2 is None:
        return [0, 0, 0, 0]
    out = []
    for name in ("year", "month", "day", "hour"):
        a, b = getattr(d1, name), getattr(d2, name)
        out.append(int(a is not None and b is not None and a == b))
    return out


class TokenSimilarity(Protocol):
    def similarity(self, a: Sequence[str], b: Sequence[str]) -> np.ndarray:
        """Matrix of pairwise token similarities in [0, 1], shape (len(a), len(b))."""


class ExactMatchEmbedder:
    """Similarity 1 for identical tokens, 0 otherwise."""

    def similarity(self, a, b) -> np.ndarray:
        return np.array([[float(x == y) for y in b] for x in a]).reshape(len(a), len(b))

    def to_dict(self) -> dict:
        return {"kind": "exact"}


class HashedTrigramEmbedder:
    """L2-normalized character-trigram count vectors hashed into ``dim`` buckets."""

    def __init__(self, dim: int = 1024, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._key = seed.to_bytes(8, "little", signed=False)
        self._cache: dict[str, np.ndarray] = {}

    def _bucket(self, gram: str) -> int:
        h = hashlib.blake2b(gram.encode("utf-8"), digest_size=8, key=self._key)
        return int.from_bytes(h.digest(), "little") % self.dim

    def vector(self, token: str) -> np.ndarray:
        vec = self._cache.get(token)
        if vec is None:
            padded = f"#{token}#"
            vec = np.zeros(self.dim)
            for i in range(len(padded) - 2):
                vec[self._bucket(padded[i:i + 3])] += 1
            vec /= np.linalg.norm(vec)
            self._cache[token] = vec
        return vec

    def embed(self, tokens: Sequence[str]) -> np.ndarray:
        if not tokens:
            return np.zeros((0, self.dim))
        return np.stack([self.vector(t) for t in tokens])

    def similarity(self, a, b) -> np.ndarray:
        return np.clip(self.embed(a) @ self.embed(b).T, 0.0, 1.0)

    def to_dict(self) -> dict:
        return {"kind": "hashed-trigram", "dim": self.dim, "seed": self.seed}


def make_embedder(options: dict | None):
    options = options or {"kind": "hashed-trigram"}
    if options["kind"] == "exact":
        return ExactMatchEmbedder()
    return HashedTrigramEmbedder(int(options.get("dim", 1024)), int(options.get("seed", 0)))


def split_chunks(tokens: Sequence[str], n: int) -> list[list[str]]:
    """``n`` contiguous near-equal chunks; the remainder goes to the earlier chunks."""
    q, r = divmod(len(tokens), n)
    out, start = [], 0
    for i in range(n):
        size = q + (1 if i < r else 0)
        out.append(list(tokens[start:start + size]))
        start += size
    return out


def greedy_match_f1(a: Sequence[str], b: Sequence[str], embedder) -> float:
    if not a or not b:
        return 0.0
    sim = embedder.similarity(a, b)
    recall = float(sim.max(axis=1).mean())
    precision = float(sim.max(axis=0).mean())
    if recall + precision == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def chunk_scores(d1, d2, N: int = 4, embedder=None) -> list[float]:
    if N < 1:
        raise InvalidN(f"N must be >= 1, got {N}")
    embedder = embedder or HashedTrigramEmbedder()
    c1 = split_chunks(word_tokens(_text(d1)), N)
    c2 = split_chunks(word_tokens(_text(d2)), N)
    return [greedy_match_f1(a, b, embedder) for a, b in zip(c1, c2)]


def chunked_semantic_similarity(d1, d2, N: int = 4, embedder=None) -> float:
    scores = chunk_scores(d1, d2, N, embedder)
    return min(1.0, sum(scores) / N)


def build_feature_vector(d1, d2, idf: IdfTable, N: int = 4, embedder=None, entity_tags=DEFAULT_ENTITY_TAGS) -> np.ndarray:
    """The eight relevance features, in ``FEATURE_NAMES`` order.

    For transcript-vs-minute pairs ``d1`` is the transcript.
    """
    vec = [
        tfidf_cosine(d1, d2, idf),
        jaccard(d1, d2),
        ne_overlap(extract_entities(d1, entity_tags), extract_entities(d2, entity_tags)),
        *date_consistency(extract_date(d1), extract_date(d2)),
        chunked_semantic_similarity(d1, d2, N, embedder),
    ]
    return np.asarray(vec, dtype=float)


class PairFeaturizer(BaseEstimator, TransformerMixin):
    """Turns document pairs into relevance features; ``fit`` learns the idf table.

    ``X`` is a sequence of ``(d1, d2)`` pairs of ``Document`` objects or strings.
    """

    def __init__(self, N: int = 4, entity_tags=DEFAULT_ENTITY_TAGS, embedder_dim: int = 1024, embedder_seed: int = 0):
        self.N = N
        self.entity_tags = entity_tags
        self.embedder_dim = embedder_dim
        self.embedder_seed = embedder_seed

    def fit(self, X, y=None):
        if self.N < 1:
            raise InvalidN(f"N must be >= 1, got {self.N}")
        docs, seen = [], set()
        for pair in X:
            for doc in pair:
                key = id(doc)
                if key not in seen:
                    seen.add(key)
                    docs.append(doc)
        self.idf_ = fit_idf(docs)
        self.n_features_out_ = len(FEATURE_NAMES)
        return self

    def transform(self, X) -> np.ndarray:
        from sklearn.utils.validation import check_is_fitted

        check_is_fitted(self, "idf_")
        embedder = HashedTrigramEmbedder(self.embedder_dim, self.embedder_seed)
        rows = [
            build_feature_vector(d1, d2, self.idf_, self.N, embedder, tuple(self.entity_tags))
            for d1, d2 in X
        ]
        return np.asarray(rows, dtype=float).reshape(len(rows), len(FEATURE_NAMES))

    def get_feature_names_out(self, input_features=None):
        return np.asarray(FEATURE_NAMES, dtype=object)

    def to_dict(self) -> dict:
        return {
            "version": FEATURE_VERSION,
            "feature_names": list(FEATURE_NAMES),
            "params": {
                "N": self.N,
                "entity_tags": list(self.entity_tags),
                "embedder": {"kind": "hashed-trigram", "dim": self.embedder_dim, "seed": self.embedder_seed},
            },
            "idf": self.idf_.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PairFeaturizer":
        p = d["params"]
        emb = p.get("embedder", {})
        obj = cls(N=int(p["N"]), entity_tags=tuple(p["entity_tags"]),
                  embedder_dim=int(emb.get("dim", 1024)), embedder_seed=int(emb.get("seed", 0)))
        obj.idf_ = IdfTable.from_dict(d["idf"])
        obj.n_features_out_ = len(FEATURE_NAMES)
        return obj
