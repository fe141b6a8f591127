"""Date stamps found in minute date lines and transcript openings."""

from __future__ import annotations

import re
from dataclasses import dataclass

MONTHS = {
    name: i
    for i, names in enumerate(
        [
            ("january", "jan"), ("february", "feb"), ("march", "mar"), ("april", "apr"),
            ("may",), ("june", "jun"), ("july", "jul"), ("august", "aug"),
            ("september", "sep", "sept"), ("october", "oct"), ("november", "nov"),
            ("december", "dec"),
        ],
        start=1,
    )
    for name in names
}
_MONTH = r"(?P<mon>%s)\.?" % "|".join(sorted(MONTHS, key=len, reverse=True))

# tried in order; the first pattern yielding a valid stamp wins
_DATE_PATTERNS = [
    re.compile(r"\b(?P<y>\d{4})[-/](?P<m>\d{1,2})[-/](?P<d>\d{1,2})\b"),
    re.compile(r"\b(?P<d>\d{1,2})\.\s?(?P<m>\d{1,2})\.\s?(?P<y>\d{4})\b"),
    re.compile(r"\b" + _MONTH + r"\s+(?P<d>\d{1,2})(?:st|nd|rd|th)?,?\s+(?P<y>\d{4})\b", re.IGNORECASE),
    re.compile(r"\b(?P<d>\d{1,2})(?:st|nd|rd|th)?\s+(?:of\s+)?" + _MONTH + r",?\s+(?P<y>\d{4})\b", re.IGNORECASE),
    re.compile(r"\b" + _MONTH + r",?\s+(?P<y>\d{4})\b", re.IGNORECASE),
]
_TIME_RE = re.compile(r"\b(?P<h>\d{1,2}):(?P<min>\d{2})\b")


@dataclass(frozen=True)
class DateStamp:
    year: int | None = None
    month: int | None = None
    day: int | None = None
    hour: int | None = None

    def __post_init__(self):
        if self.month is not None and not 1 <= self.month <= 12:
            raise ValueError(f"month out of range: {self.month}")
        if self.day is not None and not 1 <= self.day <= 31:
            raise ValueError(f"day out of range: {self.day}")
        if self.hour is not None and not 0 <= self.hour <= 23:
            raise ValueError(f"hour out of range: {self.hour}")

    def to_dict(self) -> dict:
        return {"year": self.year, "month": self.month, "day": self.day, "hour": self.hour}

    def isoformat(self) -> str:
        parts = [f"{self.year:04d}" if self.year else "????"]
        if self.month:
            parts.append(f"{self.month:02d}")
            if self.day:
                parts.append(f"{self.day:02d}")
        out = "-".join(parts)
        if self.hour is not None:
            out += f" {self.hour:02d}:00"
        return out


def _month(m: re.Match) -> int:
    if m.groupdict().get("mon"):
        return MONTHS[m.group("mon").lower()]
    return int(m.group("m"))


def parse_date(text: str) -> DateStamp | None:
    """First recognizable date in ``text``; a ``HH:MM`` time on the same text sets the hour."""
    for pattern in _DATE_PATTERNS:
        for m in pattern.finditer(text):
            day = m.groupdict().get("d")
            try:
                stamp = DateStamp(int(m.group("y")), _month(m), int(day) if day else None)
            except ValueError:
                continue
            for t in _TIME_RE.finditer(text):
                if int(t.group("h")) <= 23 and int(t.group("min")) <= 59:
                    return DateStamp(stamp.year, stamp.month, stamp.day, int(t.group("h")))
            return stamp
    return None


def has_date(text: str) -> bool:
    return parse_date(text) is not None
