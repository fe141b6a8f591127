"""Synthetic meetings: transcripts and minutes with disjoint topic vocabularies."""

import random
from pathlib import Path

POOL = [
    "budget", "invoice", "hardware", "server", "cluster", "backup", "network", "license",
    "vendor", "contract", "hiring", "onboarding", "training", "workshop", "deadline", "release",
    "testing", "coverage", "parser", "tokenizer", "dataset", "annotation", "labeling", "schema",
    "database", "migration", "frontend", "layout", "styling", "accessibility", "security", "audit",
    "firewall", "password", "marketing", "campaign", "newsletter", "website", "analytics", "dashboard",
    "metrics", "latency", "throughput", "caching", "storage", "archive", "printer", "catering",
    "travel", "conference", "poster", "reviewer", "manuscript", "appendix", "figures", "citation",
    "translation", "subtitles", "recording", "microphone",
]
MONTHS = ["January", "February", "March", "April", "May", "June",
          "July", "August", "September", "October", "November", "December"]


def meeting(i: int, rng: random.Random) -> dict:
    words = rng.sample(POOL, 8)
    people = rng.sample(range(1, 10), 3)
    month, day = rng.randint(1, 12), rng.randint(1, 28)
    return {"words": words, "people": people, "month": month, "day": day, "project": 10 + i}


def transcript_text(m: dict, rng: random.Random, n_lines: int = 12) -> str:
    w, p = m["words"], m["people"]
    lines = [f"(PERSON{p[0]}) Welcome, today is {MONTHS[m['month'] - 1]} {m['day']}, 2021 at 10:00."]
    for k in range(n_lines - 1):
        a, b = rng.sample(w, 2)
        lines.append(f"(PERSON{p[k % 3]}) We talked about the {a} and the {b} for [PROJECT{m['project']}].")
    return "\n".join(lines) + "\n"


def minute_text(m: dict, rng: random.Random) -> str:
    w, p = m["words"], m["people"]
    picks = rng.sample(w, 6)
    return (
        f"Meeting minutes\nDate: 2021-{m['month']:02d}-{m['day']:02d}\n"
        f"Attendees: PERSON{p[0]}, PERSON{p[1]}, PERSON{p[2]}\n"
        f"* {picks[0]} and {picks[1]}\n- [PERSON{p[0]}] reviewed the {picks[2]}\n"
        f"* {picks[3]}\n- [PROJECT{m['project']}] needs {picks[4]} and {picks[5]}\n"
    )


def write_corpus(root: Path, n_meetings: int = 8, seed: int = 0, task: str = "B") -> Path:
    """Write docs plus a labeled manifest (one TRUE and two FALSE pairs per meeting)."""
    rng = random.Random(seed)
    root.mkdir(parents=True, exist_ok=True)
    meetings = [meeting(i, rng) for i in range(n_meetings)]
    for i, m in enumerate(meetings):
        (root / f"t{i}.txt").write_text(transcript_text(m, rng), encoding="utf-8")
        (root / f"m{i}.txt").write_text(minute_text(m, rng), encoding="utf-8")
        (root / f"r{i}.txt").write_text(minute_text(m, rng), encoding="utf-8")
    first = "t" if task == "B" else "r"
    rows = ["pair_id\tdoc1\tdoc2\tlabel"]
    for i in range(n_meetings):
        rows.append(f"p{i}_same\t{first}{i}.txt\tm{i}.txt\tTRUE")
        for off in (1, 2):
            j = (i + off) % n_meetings
            rows.append(f"p{i}_{j}\t{first}{i}.txt\tm{j}.txt\tFALSE")
    manifest = root / "train.tsv"
    manifest.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return manifest
