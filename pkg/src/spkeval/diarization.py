"""Diarization metrics: error rate with collars and overlap, speaker-wise error.

Reference and hypothesis are compared instant by instant. At any moment
several speakers may be active on either side; a one-to-one speaker
mapping, chosen to maximize total attributed overlap, decides which
hypothesis speaker counts as correct for which reference speaker.
"""

from __future__ import annotations

from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Mapping, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import UndefinedMetricError, ValidationError
from .rttm import Annotation, collar_exclusion
from .timeline import Timeline


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    """Seconds of attributed overlap between each (reference, hypothesis) speaker pair."""

    ref_speakers: Tuple[str, ...]
    hyp_speakers: Tuple[str, ...]
    seconds: np.ndarray

    def cell(self, ref_speaker: str, hyp_speaker: str) -> float:
        i = self.ref_speakers.index(ref_speaker)
        j = self.hyp_speakers.index(hyp_speaker)
        return float(self.seconds[i, j])


@dataclass(frozen=True)
class SpeakerMapping:
    """One-to-one map from reference speakers to hypothesis speakers."""

    pairs: Tuple[Tuple[str, str], ...]

    def __post_init__(self):
        object.__setattr__(self, "pairs", tuple(sorted(self.pairs)))

    def as_dict(self) -> Mapping[str, str]:
        return MappingProxyType(dict(self.pairs))

    def get(self, ref_speaker: str) -> Optional[str]:
        for ref, hyp in self.pairs:
            if ref == ref_speaker:
                return hyp
        return None


def _speaker_timelines(annotation: Annotation, exclusion: Timeline) -> Dict[str, Timeline]:
    out = {}
    for speaker in annotation.speakers():
        out[speaker] = annotation.speaker_timeline(speaker).subtract(exclusion)
    return out


def _matrix_from_timelines(
    ref_timelines: Dict[str, Timeline], hyp_timelines: Dict[str, Timeline]
) -> OverlapMatrix:
    ref_speakers = tuple(sorted(ref_timelines))
    hyp_speakers = tuple(sorted(hyp_timelines))
    seconds = np.zeros((len(ref_speakers), len(hyp_speakers)))
    for i, r in enumerate(ref_speakers):
        for j, h in enumerate(hyp_speakers):
            seconds[i, j] = ref_timelines[r].intersect(hyp_timelines[h]).total_duration
    return OverlapMatrix(ref_speakers=ref_speakers, hyp_speakers=hyp_speakers, seconds=seconds)


def _check_same_file(reference: Annotation, hypothesis: Annotation):
    if reference.file_id != hypothesis.file_id:
        raise ValueError(
            f"file ids differ: reference {reference.file_id!r} vs "
            f"hypothesis {hypothesis.file_id!r}"
        )


def overlap_matrix(
    reference: Annotation,
    hypothesis: Annotation,
    scoring_region: Optional[Timeline] = None,
) -> OverlapMatrix:
    """Pairwise overlap durations, optionally restricted to a scoring region."""
    _check_same_file(reference, hypothesis)

    def restrict(ann: Annotation) -> Dict[str, Timeline]:
        out = {}
        for speaker in ann.speakers():
            tl = ann.speaker_timeline(speaker)
            if scoring_region is not None:
                tl = tl.intersect(scoring_region)
            out[speaker] = tl
        return out

    return _matrix_from_timelines(restrict(reference), restrict(hypothesis))


def hungarian_assignment(matrix: OverlapMatrix) -> SpeakerMapping:
    """Overlap-maximizing one-to-one speaker mapping.

    Rectangular matrices are fine; at most ``min(n_ref, n_hyp)`` pairs
    come back and pairs with zero attributed overlap are dropped.
    """
    if matrix.seconds.size == 0:
        return SpeakerMapping(pairs=())
    rows, cols = linear_sum_assignment(matrix.seconds, maximize=True)
    pairs = tuple(
        (matrix.ref_speakers[i], matrix.hyp_speakers[j])
        for i, j in zip(rows, cols)
        if matrix.seconds[i, j] > 0
    )
    return SpeakerMapping(pairs=pairs)


@dataclass(frozen=True)
class DerBreakdown:
    """Error components in seconds; the rate is their sum over reference speech."""

    miss: float
    fa: float
    conf: float
    reference_total: float

    @property
    def der(self) -> float:
        return (self.miss + self.fa + self.conf) / self.reference_total


def _der_components(
    reference: Annotation, hypothesis: Annotation, collar: float
) -> Tuple[float, float, float, float]:
    exclusion = collar_exclusion(reference, collar)
    ref_timelines = _speaker_timelines(reference, exclusion)
    hyp_timelines = _speaker_timelines(hypothesis, exclusion)
    mapping = hungarian_assignment(_matrix_from_timelines(ref_timelines, hyp_timelines))
    mapped = dict(mapping.pairs)

    # sweep over elementary segments between consecutive activity boundaries
    events: Dict[float, list] = {}
    for side, timelines in (("r", ref_timelines), ("h", hyp_timelines)):
        for speaker, tl in timelines.items():
            for start, end in tl:
                events.setdefault(start, []).append((side, speaker, True))
                events.setdefault(end, []).append((side, speaker, False))

    miss = fa = conf = ref_total = 0.0
    active_ref: set = set()
    active_hyp: set = set()
    previous = None
    for t in sorted(events):
        if previous is not None and (active_ref or active_hyp):
            dur = t - previous
            n_ref, n_hyp = len(active_ref), len(active_hyp)
            correct = sum(1 for r in active_ref if mapped.get(r) in active_hyp)
            miss += dur * max(0, n_ref - n_hyp)
            fa += dur * max(0, n_hyp - n_ref)
            conf += dur * (min(n_ref, n_hyp) - correct)
            ref_total += dur * n_ref
        for side, speaker, arriving in events[t]:
            group = active_ref if side == "r" else active_hyp
            if arriving:
                group.add(speaker)
            else:
                group.discard(speaker)
        previous = t
    return miss, fa, conf, ref_total


def der(reference: Annotation, hypothesis: Annotation, collar: float = 0.25) -> DerBreakdown:
    """Diarization error rate of one recording.

    Parameters
    ----------
    reference, hypothesis : Annotation
        Turns for the same file id.
    collar : float
        Half-width of the forgiveness zone around every reference turn
        boundary; time inside it is excluded from scoring.

    Returns
    -------
    DerBreakdown
        Missed speech, false alarm and speaker confusion in seconds,
        plus the reference speech total. Overlapping speech counts once
        per active speaker.

    Notes
    -----
    The speaker mapping maximizes attributed overlap within the scored
    region. With no reference speech left after collar exclusion the
    rate is undefined and :class:`UndefinedMetricError` is raised.
    """
    _check_same_file(reference, hypothesis)
    miss, fa, conf, ref_total = _der_components(reference, hypothesis, collar)
    if ref_total <= 0:
        raise UndefinedMetricError(
            f"no scored reference speech in {reference.file_id!r} (collar={collar:g})"
        )
    return DerBreakdown(miss=miss, fa=fa, conf=conf, reference_total=ref_total)


@dataclass(frozen=True)
class JerBreakdown:
    """Per-reference-speaker error ratios and their unweighted mean."""

    per_speaker: Mapping[str, float]
    jer: float

    def __post_init__(self):
        object.__setattr__(self, "per_speaker", MappingProxyType(dict(self.per_speaker)))


def _jer_ratios(reference: Annotation, hypothesis: Annotation) -> Dict[str, float]:
    mapping = hungarian_assignment(overlap_matrix(reference, hypothesis))
    mapped = dict(mapping.pairs)
    ratios: Dict[str, float] = {}
    for speaker in reference.speakers():
        hyp_speaker = mapped.get(speaker)
        if hyp_speaker is None:
            ratios[speaker] = 1.0
            continue
        ref_tl = reference.speaker_timeline(speaker)
        hyp_tl = hypothesis.speaker_timeline(hyp_speaker)
        union = ref_tl.union(hyp_tl).total_duration
        miss = ref_tl.subtract(hyp_tl).total_duration
        fa = hyp_tl.subtract(ref_tl).total_duration
        ratios[speaker] = min(1.0, (miss + fa) / union)
    return ratios


def jer(reference: Annotation, hypothesis: Annotation) -> JerBreakdown:
    """Speaker-wise error of one recording, no collar.

    Each reference speaker is paired with at most one hypothesis speaker
    by the overlap-maximizing mapping; the speaker's ratio is
    ``(miss + false alarm) / union`` of the paired timelines, and an
    unpaired speaker scores 1. The summary value is the unweighted mean,
    so a badly-missed rare speaker weighs as much as a dominant one.
    """
    _check_same_file(reference, hypothesis)
    if not reference.turns:
        raise UndefinedMetricError(f"reference for {reference.file_id!r} has no turns")
    ratios = _jer_ratios(reference, hypothesis)
    return JerBreakdown(per_speaker=ratios, jer=sum(ratios.values()) / len(ratios))


@dataclass(frozen=True)
class FileResult:
    """Per-file scoring row of a corpus evaluation."""

    file_id: str
    miss: float
    fa: float
    conf: float
    reference_total: float
    der: Optional[float]
    jer: Optional[float]


@dataclass(frozen=True)
class CorpusResult:
    files: Tuple[FileResult, ...]
    overall: DerBreakdown
    jer: Optional[float]


def _empty_like(reference: Annotation) -> Annotation:
    return Annotation(reference.file_id, ())


def evaluate_corpus(
    references: Mapping[str, Annotation],
    hypotheses: Mapping[str, Annotation],
    collar: float = 0.25,
) -> CorpusResult:
    """Score a corpus file by file and pooled.

    A reference file with no hypothesis counts as entirely missed. A
    hypothesis for an unknown file id is an error. The pooled rate sums
    error seconds over files before dividing; the pooled speaker-wise
    value is the unweighted mean over all reference speakers of all
    files (collar-free, like the per-file variant).
    """
    unknown = sorted(set(hypotheses) - set(references))
    if unknown:
        raise ValidationError(
            "hypothesis for unknown file id(s): " + ", ".join(unknown)
        )
    rows = []
    totals = [0.0, 0.0, 0.0, 0.0]
    speaker_ratios: list = []
    for file_id in sorted(references):
        ref = references[file_id]
        hyp = hypotheses.get(file_id)
        if hyp is None:
            hyp = _empty_like(ref)
        parts = _der_components(ref, hyp, collar)
        for i in range(4):
            totals[i] += parts[i]
        file_der = (parts[0] + parts[1] + parts[2]) / parts[3] if parts[3] > 0 else None
        if ref.turns:
            ratios = _jer_ratios(ref, hyp)
            speaker_ratios.extend(ratios.values())
            file_jer = sum(ratios.values()) / len(ratios)
        else:
            file_jer = None
        rows.append(
            FileResult(
                file_id=file_id,
                miss=parts[0],
                fa=parts[1],
                conf=parts[2],
                reference_total=parts[3],
                der=file_der,
                jer=file_jer,
            )
        )
    if totals[3] <= 0:
        raise UndefinedMetricError("corpus has no scored reference speech")
    overall = DerBreakdown(miss=totals[0], fa=totals[1], conf=totals[2], reference_total=totals[3])
    pooled_jer = sum(speaker_ratios) / len(speaker_ratios) if speaker_ratios else None
    return CorpusResult(files=tuple(rows), overall=overall, jer=pooled_jer)


def der_corpus(
    references: Mapping[str, Annotation],
    hypotheses: Mapping[str, Annotation],
    collar: float = 0.25,
) -> DerBreakdown:
    """Pooled error rate over a corpus: sum components, then divide."""
    return evaluate_corpus(references, hypotheses, collar).overall


def _fmt_seconds_cell(value: float) -> str:
    return f"{value:.2f}"


def _fmt_rate_cell(value: Optional[float]) -> str:
    return "-" if value is None else f"{100.0 * value:.2f}%"


def format_corpus_report(result: CorpusResult) -> str:
    """Fixed-width per-file table with an OVERALL row; rates as percentages."""
    headers = ("file_id", "miss", "fa", "conf", "ref_total", "DER", "JER")
    rows = []
    for f in result.files:
        rows.append(
            (
                f.file_id,
                _fmt_seconds_cell(f.miss),
                _fmt_seconds_cell(f.fa),
                _fmt_seconds_cell(f.conf),
                _fmt_seconds_cell(f.reference_total),
                _fmt_rate_cell(f.der),
                _fmt_rate_cell(f.jer),
            )
        )
    o = result.overall
    rows.append(
        (
            "OVERALL",
            _fmt_seconds_cell(o.miss),
            _fmt_seconds_cell(o.fa),
            _fmt_seconds_cell(o.conf),
            _fmt_seconds_cell(o.reference_total),
            _fmt_rate_cell(o.der),
            _fmt_rate_cell(result.jer),
        )
    )
    widths = [max(len(headers[i]), *(len(r[i]) for r in rows)) for i in range(len(headers))]
    lines = []
    for row in (headers, *rows):
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


def corpus_csv(result: CorpusResult) -> str:
    """Machine-readable per-file rows; rates as bare fractions, nan when undefined."""
    lines = ["file_id,miss,fa,conf,reference_total,der"]
    for f in result.files:
        rate = float("nan") if f.der is None else f.der
        lines.append(
            f"{f.file_id},{f.miss!r},{f.fa!r},{f.conf!r},{f.reference_total!r},{rate!r}"
        )
    return "\n".join(lines) + "\n"


__all__ = [
    "OverlapMatrix",
    "SpeakerMapping",
    "DerBreakdown",
    "JerBreakdown",
    "FileResult",
    "CorpusResult",
    "overlap_matrix",
    "hungarian_assignment",
    "der",
    "jer",
    "der_corpus",
    "evaluate_corpus",
    "format_corpus_report",
    "corpus_csv",
]
