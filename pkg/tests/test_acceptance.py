"""Acceptance criteria, one test per criterion; each prints a PASS/FAIL line."""

import json
import math
import random
import re
import subprocess
import sys
import time

import numpy as np

from conftest import FIXTURES, record_acceptance
from minutekit.argmine import ArgRelation, ArgumentGraph, Proposition, PropLabel, build_structure, render
from minutekit.core import parse_transcript, word_tokens
from minutekit.evaluation import aggregate_over_refs, rouge_l, rouge_n
from minutekit.features import ExactMatchEmbedder, IdfTable, chunked_semantic_similarity, jaccard, ne_overlap, tfidf_cosine
from minutekit.learn import CVEnsembleClassifier, hyperparam_search, majority_baseline
from minutekit.minuteparse import MinuteLine, MinuteTree, OraclePredictor, oracle_actions, parse, read_lines, render_minute
from minutekit.segment import BioLabel, agreement_rate, segment_transcript
from test_features import unigram_f1_oracle

GRAMMAR = re.compile(r"^\*|^(- )+(Task|Fact|Disc): ")


def verdict(n: int, ok: bool, detail: str) -> None:
    record_acceptance(f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
    assert ok, detail


def test_criterion_1_formula_oracles():
    t0 = time.perf_counter()
    flat = IdfTable.uniform()
    checks = {
        "agreement": (agreement_rate([[0, 1, 2, 3], [4, 5, 6, 7]], [[0, 1], [2, 3, 4, 5, 6, 7]]).a_12, 0.75),
        "ne_overlap": (ne_overlap(frozenset({"PERSON1", "PERSON2", "ORGANIZATION3"}), frozenset({"PERSON1", "PROJECT7"})), 0.25),
        "tfidf": (tfidf_cosine("alpha beta beta", "alpha beta gamma", flat), 3 / math.sqrt(15)),
        "jaccard": (jaccard("alpha beta", "alpha beta gamma"), 2 / 3),
        "rouge1_f1": (rouge_n("the cat sat", "the cat", 1).f1, 0.8),
        "rougeL_recall": (rouge_l("a b c d", "a c b d").recall, 0.75),
    }
    elapsed = time.perf_counter() - t0
    bad = [k for k, (got, want) in checks.items() if abs(got - want) > 1e-9]
    verdict(1, not bad and elapsed < 1.0, f"formula oracles within 1e-9 (mismatches={bad}, {elapsed:.3f}s < 1s)")


def random_transcript(rng: random.Random, max_tokens: int):
    target = rng.randint(1, max_tokens)
    lines, total = [], 0
    while total < target:
        sents = []
        for _ in range(rng.randint(1, 4)):
            n = rng.randint(1, 60)
            sents.append(" ".join(f"w{rng.randint(0, 500)}" for _ in range(n)) + ".")
            total += n
        lines.append(f"(PERSON{rng.randint(1, 6)}) " + " ".join(s[0].upper() + s[1:] for s in sents))
    return parse_transcript("\n".join(lines))


def test_criterion_2_chunk_merge():
    rng = random.Random(2)
    labels = list(BioLabel)
    failures = 0
    t0 = time.perf_counter()
    for _ in range(200):
        tr = random_transcript(rng, 12000)
        emitted = []

        def labeler(texts, rng=rng, emitted=emitted):
            out = [rng.choice(labels) for _ in texts]
            emitted.append(out)
            return out

        res = segment_transcript(tr, labeler, max_tokens=4096, stride=1024)
        n = len(tr.sentences)
        # oracle: the earliest chunk containing a sentence supplies its label
        expected = []
        for i in range(n):
            k = next(k for k, c in enumerate(res.chunks) if c.start <= i < c.end)
            expected.append(emitted[k][i - res.chunks[k].start])
        budget_ok = all(c.token_count <= 4096 for c in res.chunks)
        if len(res.labels) != n or res.labels != expected or not budget_ok:
            failures += 1
    elapsed = time.perf_counter() - t0
    verdict(2, failures == 0 and elapsed < 10.0,
            f"200 random transcripts, one label per sentence, prior chunk wins at seams ({failures} failures, {elapsed:.2f}s < 10s)")


def random_minute(rng: random.Random):
    n = rng.randint(1, 60)
    header = [("title", "Minutes of the weekly sync")] if rng.random() < 0.7 else []
    if rng.random() < 0.7:
        header.append(("date", f"Date: 2021-{rng.randint(1, 12):02d}-{rng.randint(1, 28):02d}"))
    n_body = max(1, n - len(header))
    depths = [1]
    for _ in range(n_body - 1):
        depths.append(rng.randint(1, min(4, depths[-1] + 1)))
    lines, parents, labels, open_at = [], {}, {}, {0: -1}
    for pos, (label, text) in enumerate(header):
        lines.append(MinuteLine(text, 0, "none", text, pos))
        labels[pos] = label
    for k, d in enumerate(depths):
        pos = len(header) + k
        text = f"point {k} about topic {rng.randint(0, 99)}"
        bullet = "star" if d == 1 else "dash"
        lines.append(MinuteLine(text, 0 if d == 1 else d - 1, bullet, text, pos))
        parents[pos] = open_at[d - 1]
        open_at[d] = pos
    return MinuteTree.from_parents(lines, parents, labels)


def test_criterion_3_parser_round_trip():
    rng = random.Random(3)
    ok = 0
    t0 = time.perf_counter()
    for _ in range(50):
        tree = random_minute(rng)
        assert tree.max_depth() <= 4
        lines = read_lines(render_minute(tree))
        assert len(lines) <= 60
        rebuilt = parse(lines, OraclePredictor(oracle_actions(tree, lines)))
        ok += rebuilt == tree
    elapsed = time.perf_counter() - t0
    verdict(3, ok == 50 and elapsed < 5.0, f"render -> oracle -> parse reproduces {ok}/50 random trees ({elapsed:.2f}s < 5s)")


def test_criterion_4_structure_builder():
    T, F, D = PropLabel.TASK, PropLabel.FACT, PropLabel.DISC
    props = [Proposition(f"S{i}", i) for i in range(4)]
    fig = render(build_structure(ArgumentGraph(props, [F, D, F, T], [ArgRelation(2, 1)])))
    fig_ok = fig == "* S0\n- Disc: S1\n- - Fact: S2\n* S3"
    rng = random.Random(4)
    bad = 0
    for _ in range(200):
        n = rng.randint(1, 15)
        labels = [rng.choice([T, F, D]) for _ in range(n)]
        rels = [ArgRelation(s, rng.randrange(s)) for s in range(1, n) if rng.random() < 0.5]
        g = ArgumentGraph([Proposition(f"S{i}", i) for i in range(n)], labels, rels)
        bad += [item.index for item in build_structure(g).walk()] != list(range(n))
    verdict(4, fig_ok and bad == 0, f"nested relation rendering exact={fig_ok}; pre-order = index order on 200 random graphs ({bad} violations)")


def test_criterion_5_semantic_similarity_oracle():
    rng = random.Random(5)
    vocab = [f"tok{i}" for i in range(25)]
    emb = ExactMatchEmbedder()
    worst = 0.0
    for _ in range(100):
        a = " ".join(rng.choice(vocab) for _ in range(40))
        b = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 60)))
        got = chunked_semantic_similarity(a, b, 4, emb)
        worst = max(worst, abs(got - unigram_f1_oracle(word_tokens(a), word_tokens(b), 4)))
    verdict(5, worst <= 1e-9, f"exact-match chunked score vs unigram-F1 oracle on 100 pairs (max error {worst:.2e} <= 1e-9)")


def synthetic_features(n=400, pos_rate=0.3, seed=6):
    """TRUE rows stochastically dominate on tfidf, jaccard and NE overlap."""
    rng = np.random.RandomState(seed)
    y = (rng.random_sample(n) < pos_rate).astype(int)
    X = np.empty((n, 8))
    hi, lo = y == 1, y == 0
    for dim, (a, b) in enumerate([(5, 2), (4, 2), (3, 2)]):
        X[hi, dim] = rng.beta(a, b, hi.sum())
        X[lo, dim] = rng.beta(b, a, lo.sum())
    X[:, 3:7] = rng.random_sample((n, 4)) < np.where(hi, 0.6, 0.3)[:, None]
    X[:, 7] = rng.beta(3, 3, n)
    return X, y


def train_ensemble(X, y):
    hp = hyperparam_search(X, y, budget=10, seed=0, n_splits=10)
    return CVEnsembleClassifier(n_splits=10, seed=0, **hp).fit(X, y)


def test_criterion_6_classifier():
    t0 = time.perf_counter()
    X, y = synthetic_features()
    ens = train_ensemble(X, y)
    again = train_ensemble(X, y)
    elapsed = time.perf_counter() - t0
    cv = ens.cv_metrics_
    base = majority_baseline(y == 1).accuracy
    same = json.dumps(ens.to_dict(), sort_keys=True) == json.dumps(again.to_dict(), sort_keys=True)
    ok = cv.accuracy - base >= 0.10 and (cv.f1 or 0) >= 0.85 and same and elapsed < 30.0
    verdict(6, ok, f"10-fold CV accuracy {cv.accuracy:.3f} vs majority {base:.3f} (margin >= 0.10), "
                   f"F1 {cv.f1:.3f} >= 0.85, deterministic={same}, {elapsed:.1f}s < 30s")


def test_criterion_7_end_to_end(tmp_path):
    graphs_path = tmp_path / "graphs.json"
    t0 = time.perf_counter()
    proc = subprocess.run(
        [sys.executable, "-m", "minutekit.cli", "minute", str(FIXTURES / "transcript_200.txt"), "--dump-graph", str(graphs_path)],
        capture_output=True, text=True,
    )
    elapsed = time.perf_counter() - t0
    body = proc.stdout.partition("\n\n")[2].splitlines()
    graphs = json.loads(graphs_path.read_text()) if proc.returncode == 0 else []
    grammar_ok = bool(body) and all(GRAMMAR.match(line) for line in body)
    roots = {line[2:] for line in body if line.startswith("* ")}
    tasks = [p["text"] for g in graphs for p in g["propositions"] if p["label"] == "Task"]
    tasks_ok = all(t in roots for t in tasks)
    ok = proc.returncode == 0 and elapsed < 10.0 and grammar_ok and len(graphs) >= 2 and tasks_ok
    verdict(7, ok, f"minute on 200-utterance fixture: exit {proc.returncode}, {elapsed:.2f}s < 10s, "
                   f"grammar ok={grammar_ok}, blocks={len(graphs)} >= 2, {len(tasks)} Task sentences at depth 0={tasks_ok}")


def test_criterion_8_max_vs_average():
    rng = random.Random(8)
    vocab = "alpha beta gamma delta epsilon zeta eta theta".split()
    bad = 0
    for _ in range(100):
        cand = " ".join(rng.choice(vocab) for _ in range(rng.randint(1, 15)))
        refs = [" ".join(rng.choice(vocab) for _ in range(rng.randint(1, 15))) for _ in range(rng.randint(2, 5))]
        for metric in ("rouge1", "rouge2", "rougeL"):
            hi = aggregate_over_refs(cand, refs, metric, "max").f1
            avg = aggregate_over_refs(cand, refs, metric, "average").f1
            bad += hi < avg - 1e-12
    verdict(8, bad == 0, f"max-mode f1 >= average-mode f1 on 100 random multi-reference cases ({bad} violations)")
