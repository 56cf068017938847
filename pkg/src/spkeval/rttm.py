"""Diarization annotations in RTTM form.

A segment line has ten whitespace-separated fields::

    SPEAKER <file_id> <channel> <onset> <duration> <NA> <NA> <speaker_id> <NA> <NA>

Onset and duration are decimal seconds. The four placeholder fields are
positional; their content is ignored on input and always written back as
``<NA>``. Anything outside this grammar is rejected with the line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

from .errors import ParseError
from .timeline import Timeline

_PLACEHOLDER = "<NA>"


def _no_whitespace(name: str, value: str) -> str:
    if not value or value.split() != [value]:
        raise ValueError(f"{name} must be non-empty and contain no whitespace: {value!r}")
    return value


@dataclass(frozen=True, order=True)
class Turn:
    """One speaker turn: ``speaker_id`` speaks in ``[onset, onset + duration)``."""

    onset: float
    duration: float
    speaker_id: str
    file_id: str
    channel: int = 1

    def __post_init__(self):
        _no_whitespace("speaker_id", self.speaker_id)
        _no_whitespace("file_id", self.file_id)
        if not isinstance(self.channel, int):
            raise ValueError(f"channel must be an integer, got {self.channel!r}")
        if not (math.isfinite(self.onset) and self.onset >= 0):
            raise ValueError(f"onset must be finite and >= 0, got {self.onset!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValueError(f"duration must be finite and > 0, got {self.duration!r}")

    @property
    def offset(self) -> float:
        return self.onset + self.duration


@dataclass(frozen=True)
class Annotation:
    """All turns of one recording, held in a canonical sort order."""

    file_id: str
    turns: Tuple[Turn, ...] = ()

    def __post_init__(self):
        _no_whitespace("file_id", self.file_id)
        for turn in self.turns:
            if turn.file_id != self.file_id:
                raise ValueError(
                    f"turn for {turn.file_id!r} cannot join annotation {self.file_id!r}"
                )
        ordered = tuple(sorted(self.turns))
        object.__setattr__(self, "turns", ordered)

    def speakers(self) -> Tuple[str, ...]:
        return tuple(sorted({t.speaker_id for t in self.turns}))

    def speaker_timeline(self, speaker_id: str) -> Timeline:
        """Union of the turns of one speaker (self-overlaps coalesce)."""
        return Timeline(
            (t.onset, t.offset) for t in self.turns if t.speaker_id == speaker_id
        )

    def support(self) -> Timeline:
        """Union of all turns regardless of speaker."""
        return Timeline((t.onset, t.offset) for t in self.turns)

    def __bool__(self) -> bool:
        return bool(self.turns)


def parse_rttm(source: str | Iterable[str]) -> Dict[str, Annotation]:
    """Parse RTTM text into one :class:`Annotation` per file id.

    ``source`` may be a string or an iterable of lines (an open file works).
    Blank lines are skipped. Any other deviation from the grammar raises
    :class:`~spkeval.errors.ParseError` carrying the 1-based line number.
    """
    if isinstance(source, str):
        lines: Iterable[str] = source.splitlines()
    else:
        lines = source
    grouped: Dict[str, list] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 10:
            raise ParseError(f"expected 10 fields, got {len(fields)}", line=lineno)
        if fields[0] != "SPEAKER":
            raise ParseError(f"record type must be SPEAKER, got {fields[0]!r}", line=lineno)
        file_id = fields[1]
        try:
            channel = int(fields[2])
        except ValueError:
            raise ParseError(f"channel must be an integer, got {fields[2]!r}", line=lineno) from None
        try:
            onset = float(fields[3])
        except ValueError:
            raise ParseError(f"onset is not numeric: {fields[3]!r}", line=lineno) from None
        try:
            duration = float(fields[4])
        except ValueError:
            raise ParseError(f"duration is not numeric: {fields[4]!r}", line=lineno) from None
        if not math.isfinite(onset) or onset < 0:
            raise ParseError(f"onset must be finite and >= 0, got {fields[3]}", line=lineno)
        if not math.isfinite(duration) or duration <= 0:
            raise ParseError(f"duration must be finite and > 0, got {fields[4]}", line=lineno)
        speaker_id = fields[7]
        turn = Turn(
            onset=onset,
            duration=duration,
            speaker_id=speaker_id,
            file_id=file_id,
            channel=channel,
        )
        grouped.setdefault(file_id, []).append(turn)
    return {fid: Annotation(fid, tuple(turns)) for fid, turns in grouped.items()}


def format_seconds(value: float) -> str:
    """Shortest fixed-point spelling with >= 2 decimals that parses back to ``value``."""
    for precision in range(2, 18):
        text = f"{value:.{precision}f}"
        if float(text) == value:
            return text
    return repr(value)


def write_rttm(annotations: Mapping[str, Annotation] | Annotation) -> str:
    """Serialize annotations back to RTTM text.

    Output is deterministic: files sorted by id, turns in canonical order,
    times printed so they parse back to the same float.
    """
    if isinstance(annotations, Annotation):
        annotations = {annotations.file_id: annotations}
    lines = []
    for file_id in sorted(annotations):
        ann = annotations[file_id]
        for t in ann.turns:
            lines.append(
                f"SPEAKER {t.file_id} {t.channel} "
                f"{format_seconds(t.onset)} {format_seconds(t.duration)} "
                f"{_PLACEHOLDER} {_PLACEHOLDER} {t.speaker_id} {_PLACEHOLDER} {_PLACEHOLDER}\n"
            )
    return "".join(lines)


def collar_exclusion(reference: Annotation, collar: float) -> Timeline:
    """Time to ignore around every reference turn boundary.

    The zone ``[b - collar, b + collar]`` is taken around each onset and
    each offset ``b``, clipped at zero; overlapping zones merge. A collar
    of 0 excludes nothing.
    """
    if collar < 0:
        raise ValueError(f"collar must be >= 0, got {collar!r}")
    zones = []
    for turn in reference.turns:
        for boundary in (turn.onset, turn.offset):
            zones.append((max(0.0, boundary - collar), boundary + collar))
    return Timeline(zones)
