"""Trial lists and score files for verification experiments.

Both formats are UTF-8 text, one record per line, whitespace separated.
Blank lines and lines whose first non-blank character is ``#`` are
ignored. A trial list carries ``label enroll test`` (label 0 or 1) or
just ``enroll test`` when labels are withheld; a score file carries
``score enroll test`` with a finite decimal score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Tuple

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class TrialPair:
    enroll_id: str
    test_id: str
    label: int | None = None

    def __post_init__(self):
        for name, value in (("enroll_id", self.enroll_id), ("test_id", self.test_id)):
            if not value or value.split() != [value]:
                raise ValueError(f"{name} must be non-empty without whitespace: {value!r}")
        if self.label not in (None, 0, 1):
            raise ValueError(f"label must be 0, 1 or None, got {self.label!r}")

    @property
    def key(self) -> Tuple[str, str]:
        return (self.enroll_id, self.test_id)


@dataclass(frozen=True)
class ScoreRecord:
    score: float
    enroll_id: str
    test_id: str

    def __post_init__(self):
        if not math.isfinite(self.score):
            raise ValueError(f"score must be finite, got {self.score!r}")

    @property
    def key(self) -> Tuple[str, str]:
        return (self.enroll_id, self.test_id)


@dataclass(frozen=True)
class ScoredTrial:
    """A trial pair joined with its system score."""

    enroll_id: str
    test_id: str
    label: int
    score: float


@dataclass(frozen=True)
class JoinReport:
    """Cover check of a score set against a trial list."""

    missing: Tuple[Tuple[str, str], ...]
    extra: Tuple[Tuple[str, str], ...]
    duplicated: Tuple[Tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not (self.missing or self.extra or self.duplicated)

    def summary(self, limit: int = 5) -> str:
        if self.ok:
            return "scores cover the trial list exactly"
        parts = []
        for name, pairs in (
            ("missing", self.missing),
            ("extra", self.extra),
            ("duplicated", self.duplicated),
        ):
            if pairs:
                shown = ", ".join(f"{e}/{t}" for e, t in pairs[:limit])
                more = "" if len(pairs) <= limit else f" (+{len(pairs) - limit} more)"
                parts.append(f"{len(pairs)} {name} pair(s): {shown}{more}")
        return "; ".join(parts)


class CoverageError(ValidationError):
    """Scores do not cover the trial list exactly. Carries the full report."""

    def __init__(self, report: JoinReport):
        self.report = report
        super().__init__(report.summary())


def _content_lines(source: str | Iterable[str]):
    lines = source.splitlines() if isinstance(source, str) else source
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield lineno, line


def parse_trial_list(source: str | Iterable[str], expect_labels: bool = True) -> List[TrialPair]:
    """Parse a trial list; duplicate (enroll, test) pairs are rejected."""
    trials: List[TrialPair] = []
    seen: Dict[Tuple[str, str], int] = {}
    want = 3 if expect_labels else 2
    for lineno, line in _content_lines(source):
        fields = line.split()
        if len(fields) != want:
            raise ParseError(f"expected {want} fields, got {len(fields)}", line=lineno)
        if expect_labels:
            if fields[0] not in ("0", "1"):
                raise ParseError(f"label must be 0 or 1, got {fields[0]!r}", line=lineno)
            label: int | None = int(fields[0])
            enroll, test = fields[1], fields[2]
        else:
            label = None
            enroll, test = fields[0], fields[1]
        key = (enroll, test)
        if key in seen:
            raise ValidationError(
                f"line {lineno}: duplicate trial pair {enroll}/{test} "
                f"(first seen at line {seen[key]})"
            )
        seen[key] = lineno
        trials.append(TrialPair(enroll_id=enroll, test_id=test, label=label))
    return trials


def parse_score_file(source: str | Iterable[str]) -> List[ScoreRecord]:
    """Parse ``score enroll test`` lines; scores must be finite decimals."""
    records: List[ScoreRecord] = []
    for lineno, line in _content_lines(source):
        fields = line.split()
        if len(fields) != 3:
            raise ParseError(f"expected 3 fields, got {len(fields)}", line=lineno)
        try:
            score = float(fields[0])
        except ValueError:
            raise ParseError(f"score is not numeric: {fields[0]!r}", line=lineno) from None
        if not math.isfinite(score):
            raise ParseError(f"score must be finite, got {fields[0]}", line=lineno)
        records.append(ScoreRecord(score=score, enroll_id=fields[1], test_id=fields[2]))
    return records


def join_scores(trials: Sequence[TrialPair], scores: Sequence[ScoreRecord]) -> List[ScoredTrial]:
    """Match scores to a labeled trial list, demanding an exact cover.

    Output order follows the trial list. Missing, extra or duplicated
    pairs raise :class:`CoverageError` whose ``report`` lists them all.
    """
    by_key: Dict[Tuple[str, str], float] = {}
    duplicated: Dict[Tuple[str, str], None] = {}
    for record in scores:
        if record.key in by_key:
            duplicated.setdefault(record.key)
        by_key[record.key] = record.score
    trial_keys = set()
    missing = []
    for trial in trials:
        if trial.label is None:
            raise ValueError(f"trial {trial.enroll_id}/{trial.test_id} carries no label")
        trial_keys.add(trial.key)
        if trial.key not in by_key:
            missing.append(trial.key)
    extra = sorted(key for key in by_key if key not in trial_keys)
    report = JoinReport(
        missing=tuple(missing),
        extra=tuple(extra),
        duplicated=tuple(sorted(duplicated)),
    )
    if not report.ok:
        raise CoverageError(report)
    return [
        ScoredTrial(
            enroll_id=t.enroll_id, test_id=t.test_id, label=int(t.label), score=by_key[t.key]
        )
        for t in trials
    ]


def write_trial_list(trials: Sequence[TrialPair]) -> str:
    lines = []
    for t in trials:
        if t.label is None:
            lines.append(f"{t.enroll_id} {t.test_id}\n")
        else:
            lines.append(f"{t.label} {t.enroll_id} {t.test_id}\n")
    return "".join(lines)


def write_score_file(records: Sequence[ScoreRecord]) -> str:
    return "".join(f"{r.score!r} {r.enroll_id} {r.test_id}\n" for r in records)
