"""``minutekit`` command line.

Exit codes
----------
0 - success
2 - input error (missing or unparsable transcript/minute)
3 - configuration error
4 - data error (bad manifest, single-class data, unreadable pair files)
5 - model error (unreadable model, feature version mismatch)
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .config import Config, load_config
from .core import Document, read_transcript
from .errors import ConfigError, MinutekitError, ModelVersionError
from .evaluation import METRICS, MODES, aggregate_over_refs, pearson
from .features import FEATURE_NAMES, FEATURE_VERSION, PairFeaturizer, chunk_scores, extract_date, extract_entities
from .learn import CVEnsembleClassifier, hyperparam_search, majority_baseline
from .minuteparse import parse_with_trace, read_lines
from .pipeline import generate_minute, summarize_blocks

EXIT_INPUT, EXIT_CONFIG, EXIT_DATA, EXIT_MODEL = 2, 3, 4, 5
MODEL_FORMAT = "minutekit-model"
TRUE_LABELS = {"true", "1", "yes"}
FALSE_LABELS = {"false", "0", "no"}


def fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    raise SystemExit(code)


def emit(text: str, out: str | None):
    if out is None:
        if text:
            click.echo(text, nl=not text.endswith("\n"))
    else:
        Path(out).write_text(text, encoding="utf-8")


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def get_config(path, seed=None) -> Config:
    try:
        return load_config(path, seed)
    except ConfigError as exc:
        fail(EXIT_CONFIG, str(exc))


def get_transcript(path):
    try:
        return read_transcript(path)
    except (OSError, UnicodeDecodeError, MinutekitError) as exc:
        fail(EXIT_INPUT, f"cannot read transcript {path}: {exc}")


def read_manifest(path, need_labels: bool):
    """Rows of ``pair_id<TAB>doc1<TAB>doc2[<TAB>label]``; paths resolve against the manifest's folder."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        fail(EXIT_DATA, f"cannot read manifest {path}: {exc}")
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.rstrip("\n").split("\t")
        if lineno == 1 and cols[0] == "pair_id":
            continue
        if len(cols) < (4 if need_labels else 3):
            fail(EXIT_DATA, f"{path}:{lineno}: expected pair_id, doc1, doc2{', label' if need_labels else ''}")
        label = None
        if len(cols) > 3 and cols[3].strip():
            raw = cols[3].strip().lower()
            if raw not in TRUE_LABELS | FALSE_LABELS:
                fail(EXIT_DATA, f"{path}:{lineno}: bad label {cols[3]!r}")
            label = raw in TRUE_LABELS
        rows.append((cols[0], path.parent / cols[1], path.parent / cols[2], label))
    return rows


def load_pairs(rows, task: str):
    kind1 = "transcript" if task == "B" else "minute"
    cache: dict = {}

    def load(p: Path, kind: str) -> Document:
        key = (str(p.resolve()), kind)
        if key not in cache:
            doc = Document.from_path(p, kind)
            if kind == "transcript":
                doc.transcript  # noqa: B018 - parse eagerly so format errors surface here
            cache[key] = doc
        return cache[key]

    try:
        return [(load(d1, kind1), load(d2, "minute")) for _, d1, d2, _ in rows]
    except (OSError, UnicodeDecodeError, MinutekitError) as exc:
        fail(EXIT_DATA, str(exc))


def load_model(path):
    try:
        model = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        fail(EXIT_DATA, f"cannot read model {path}: {exc}")
    except json.JSONDecodeError as exc:
        fail(EXIT_MODEL, f"model {path} is not valid JSON: {exc}")
    try:
        if model.get("format") != MODEL_FORMAT:
            raise ModelVersionError("not a minutekit model file")
        if model.get("feature_version") != FEATURE_VERSION:
            raise ModelVersionError(
                f"model features {model.get('feature_version')!r} do not match {FEATURE_VERSION!r}"
            )
        return model, PairFeaturizer.from_dict(model["featurizer"]), CVEnsembleClassifier.from_dict(model["ensemble"])
    except (ModelVersionError, KeyError, TypeError, ValueError) as exc:
        fail(EXIT_MODEL, f"bad model {path}: {exc}")


config_option = click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
out_option = click.option("--out", "out", type=click.Path(), default=None, help="Output file (default: stdout).")


@click.group()
def main():
    """Meeting minutes from transcripts, and same-meeting pair classification."""


@main.command()
@click.argument("transcript")
@config_option
@out_option
@click.option("--dump-graph", type=click.Path(), default=None, help="Write argument graphs as JSON.")
def minute(transcript, config_path, out, dump_graph):
    """Generate a structured minute from a transcript."""
    cfg = get_config(config_path)
    tr = get_transcript(transcript)
    try:
        result = generate_minute(tr, cfg)
    except ConfigError as exc:
        fail(EXIT_CONFIG, str(exc))
    emit(result.text, out)
    if dump_graph:
        Path(dump_graph).write_text(dump_json([g.to_dict() for g in result.graphs]), encoding="utf-8")


@main.command()
@click.argument("transcript")
@config_option
@out_option
def segment(transcript, config_path, out):
    """Segment a transcript into topic blocks (JSON report)."""
    from .pipeline import make_segmenter
    from .segment import segment_transcript

    cfg = get_config(config_path)
    tr = get_transcript(transcript)
    try:
        seg = segment_transcript(tr, make_segmenter(cfg), cfg.segmenter.max_tokens, cfg.segmenter.stride)
    except ConfigError as exc:
        fail(EXIT_CONFIG, str(exc))
    emit(dump_json(seg.to_dict()), out)


@main.command()
@click.argument("transcript")
@config_option
@out_option
def summarize(transcript, config_path, out):
    """Summarize each topic block (JSON)."""
    cfg = get_config(config_path)
    tr = get_transcript(transcript)
    try:
        _, summaries = summarize_blocks(tr, cfg)
    except ConfigError as exc:
        fail(EXIT_CONFIG, str(exc))
    emit(dump_json({"blocks": [s.to_dict() for s in summaries]}), out)


@main.command("parse-minute")
@click.argument("minute_path")
@out_option
@click.option("--trace", is_flag=True, help="Include the transition sequence.")
def parse_minute_cmd(minute_path, out, trace):
    """Recover title/date/attendees and the item tree of a minute (JSON)."""
    try:
        text = Path(minute_path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        fail(EXIT_INPUT, f"cannot read minute {minute_path}: {exc}")
    tree, actions = parse_with_trace(read_lines(text))
    report = tree.to_dict()
    if trace:
        report["actions"] = [str(a) for a in actions]
    emit(dump_json(report), out)


@main.command()
@click.argument("doc1")
@click.argument("doc2")
@click.option("--task", type=click.Choice(["B", "C"]), default="C", help="B: doc1 is a transcript; C: both minutes.")
@click.option("--model", "model_path", type=click.Path(), default=None, help="Take the idf table from a trained model.")
@config_option
@out_option
def features(doc1, doc2, task, model_path, config_path, out):
    """Relevance feature vector for one document pair (JSON)."""
    cfg = get_config(config_path)
    pair = load_pairs([("pair", Path(doc1), Path(doc2), None)], task)
    if model_path:
        _, featurizer, _ = load_model(model_path)
    else:
        featurizer = PairFeaturizer(N=cfg.features.N, entity_tags=tuple(cfg.features.entity_tags)).fit(pair)
    vec = featurizer.transform(pair)[0]
    d1, d2 = pair[0]
    stamps = [extract_date(d) for d in (d1, d2)]
    report = {
        "task": task,
        "features": dict(zip(FEATURE_NAMES, (float(v) for v in vec))),
        "entities": [sorted(extract_entities(d, featurizer.entity_tags)) for d in (d1, d2)],
        "dates": [s.to_dict() if s else None for s in stamps],
        "chunk_scores": chunk_scores(d1, d2, featurizer.N),
    }
    emit(dump_json(report), out)


@main.command()
@click.argument("manifest")
@click.option("--task", type=click.Choice(["B", "C"]), required=True)
@config_option
@click.option("--seed", type=int, default=None, help="Overrides learn.seed.")
@click.option("--out", "out", type=click.Path(), required=True, help="Model file to write.")
def train(manifest, task, config_path, seed, out):
    """Fit idf, search hyperparameters and train the k-fold ensemble."""
    cfg = get_config(config_path, seed)
    rows = read_manifest(manifest, need_labels=True)
    if not rows:
        fail(EXIT_DATA, "manifest has no rows")
    pairs = load_pairs(rows, task)
    y = np.array([int(r[3]) for r in rows])
    if len(set(y.tolist())) < 2:
        fail(EXIT_DATA, "training data needs both TRUE and FALSE pairs")
    lc = cfg.learn
    if len(y) < lc.k:
        fail(EXIT_DATA, f"{len(y)} rows cannot be split into {lc.k} folds")
    featurizer = PairFeaturizer(N=cfg.features.N, entity_tags=tuple(cfg.features.entity_tags)).fit(pairs)
    X = featurizer.transform(pairs)
    try:
        hp = hyperparam_search(X, y, budget=lc.budget, seed=lc.seed, n_splits=lc.k, loss=lc.loss_kind, epochs=lc.epochs)
        ens = CVEnsembleClassifier(n_splits=lc.k, loss=lc.loss_kind, epochs=lc.epochs, seed=lc.seed, **hp).fit(X, y)
    except MinutekitError as exc:
        fail(EXIT_DATA, str(exc))
    model = {
        "format": MODEL_FORMAT,
        "feature_version": FEATURE_VERSION,
        "task": task,
        "featurizer": featurizer.to_dict(),
        "ensemble": ens.to_dict(),
    }
    Path(out).write_text(json.dumps(model, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    report = {
        "task": task,
        "rows": int(len(y)),
        "hyperparams": hp,
        "cv_metrics": ens.cv_metrics_.to_dict(),
        "majority_baseline": majority_baseline(y == 1).to_dict(),
    }
    click.echo(dump_json(report), nl=False)


@main.command()
@click.argument("model_path")
@click.argument("pairs_manifest")
@out_option
def classify(model_path, pairs_manifest, out):
    """Score pairs with a trained model; writes ``pair_id<TAB>score<TAB>label`` rows."""
    model, featurizer, ens = load_model(model_path)
    rows = read_manifest(pairs_manifest, need_labels=False)
    lines = []
    if rows:
        pairs = load_pairs(rows, model.get("task", "C"))
        scores = ens.predict_proba(featurizer.transform(pairs))[:, 1]
        for (pair_id, *_), score in zip(rows, scores):
            label = "TRUE" if score >= ens.threshold else "FALSE"
            lines.append(f"{pair_id}\t{score:.6f}\t{label}\n")
    emit("".join(lines), out)


def _find_refs(refs_dir: Path, stem: str) -> list[Path]:
    sub = refs_dir / stem
    if sub.is_dir():
        return sorted(sub.glob("*.txt"))
    return sorted(
        p for p in refs_dir.glob("*.txt")
        if p.stem == stem or p.stem.startswith(stem + "_") or p.stem.startswith(stem + ".")
    )


@main.command("eval")
@click.argument("candidates_dir", type=click.Path(file_okay=False))
@click.argument("refs_dir", type=click.Path(file_okay=False))
@click.option("--mode", type=click.Choice(MODES), default="average", help="Aggregation over references.")
@click.option("--human", type=click.Path(), default=None, help="TSV of candidate_id<TAB>score to correlate with.")
@out_option
def eval_cmd(candidates_dir, refs_dir, mode, human, out):
    """ROUGE-1/2/L of candidate minutes against reference minutes (JSON)."""
    cand_dir, ref_dir = Path(candidates_dir), Path(refs_dir)
    if not cand_dir.is_dir() or not ref_dir.is_dir():
        fail(EXIT_INPUT, "candidates and references must be directories")
    rows = []
    for cand in sorted(cand_dir.glob("*.txt")):
        refs = _find_refs(ref_dir, cand.stem)
        if not refs:
            click.echo(f"warning: no references for {cand.stem}", err=True)
            continue
        text = cand.read_text(encoding="utf-8")
        ref_texts = [r.read_text(encoding="utf-8") for r in refs]
        row = {"id": cand.stem, "n_refs": len(refs)}
        for name in METRICS:
            row[name] = aggregate_over_refs(text, ref_texts, name, mode).to_dict()
        rows.append(row)
    means = {
        name: {k: float(np.mean([r[name][k] for r in rows])) if rows else 0.0 for k in ("precision", "recall", "f1")}
        for name in METRICS
    }
    report = {"mode": mode, "candidates": rows, "means": means}
    if human:
        scores = {}
        try:
            for line in Path(human).read_text(encoding="utf-8").splitlines():
                if line.strip():
                    key, value = line.split("\t")[:2]
                    scores[key] = float(value)
        except (OSError, UnicodeDecodeError, ValueError) as exc:
            fail(EXIT_INPUT, f"cannot read human scores {human}: {exc}")
        paired = [r for r in rows if r["id"] in scores]
        report["pearson"] = {}
        for name in METRICS:
            try:
                report["pearson"][name] = pearson([scores[r["id"]] for r in paired], [r[name]["f1"] for r in paired])
            except MinutekitError:
                report["pearson"][name] = None
    emit(dump_json(report), out)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
