"""Uncertainty and breakdown analyses on top of the verification metrics.

Bootstrap resampling quantifies how much a reported number would move
under a different draw of the same trial list; slice evaluation re-scores
demographic or duration subsets; the progression table ranks several
systems scored on one trial list.
"""

from __future__ import annotations

import csv
import io
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, UndefinedMetricError, ValidationError
from .trials import CoverageError, ScoreRecord, ScoredTrial, TrialPair, join_scores
from .verification import DEFAULT_DCF, DcfParams, ErrorProfile, eer, error_profile, min_dcf


@dataclass(frozen=True)
class ConfidenceInterval:
    point: float
    low: float
    high: float
    level: float
    n_resamples: int
    seed: int


_METRICS: Dict[str, Callable] = {
    "eer": lambda tgt, non, params: eer(ErrorProfile.from_scores(tgt, non)),
    "min_dcf": lambda tgt, non, params: min_dcf(ErrorProfile.from_scores(tgt, non), params).value,
}


def _one_resample(scores, labels, child_seed, metric_fn, params):
    rng = np.random.Generator(np.random.PCG64(child_seed))
    n = scores.size
    while True:
        idx = rng.integers(0, n, size=n)
        drawn = labels[idx]
        if drawn.any() and not drawn.all():
            return metric_fn(scores[idx][drawn], scores[idx][~drawn], params)


def bootstrap_ci(
    scored_trials: Sequence[ScoredTrial],
    metric: str = "eer",
    params: DcfParams = DEFAULT_DCF,
    n_resamples: int = 1000,
    level: float = 0.95,
    seed: int = 0,
    workers: int = 1,
) -> ConfidenceInterval:
    """Percentile bootstrap interval for a verification metric.

    Trials are resampled with replacement ``n_resamples`` times; the
    interval is the pair of linear-interpolation quantiles at
    ``(1 - level)/2`` and ``1 - (1 - level)/2`` of the resampled metric
    values. Each resample index owns a dedicated child RNG stream spawned
    from ``seed``, so the result is bit-identical for any ``workers``
    count and across runs. A resample that loses one class entirely is
    redrawn from its own stream.
    """
    if metric not in _METRICS:
        raise ConfigurationError(f"unknown metric {metric!r}; choose from {sorted(_METRICS)}")
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"level must lie strictly between 0 and 1, got {level!r}")
    if n_resamples < 1:
        raise ConfigurationError("n_resamples must be >= 1")
    labels = np.fromiter((t.label for t in scored_trials), dtype=bool, count=len(scored_trials))
    scores = np.fromiter((t.score for t in scored_trials), dtype=float, count=len(scored_trials))
    if labels.size == 0 or labels.all() or not labels.any():
        raise UndefinedMetricError("bootstrap needs trials from both classes")
    metric_fn = _METRICS[metric]
    point = metric_fn(scores[labels], scores[~labels], params)
    children = np.random.SeedSequence(seed).spawn(n_resamples)

    def job(child):
        return _one_resample(scores, labels, child, metric_fn, params)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = np.fromiter(pool.map(job, children), dtype=float, count=n_resamples)
    else:
        values = np.fromiter(map(job, children), dtype=float, count=n_resamples)
    alpha = (1.0 - level) / 2.0
    low, high = np.quantile(values, [alpha, 1.0 - alpha])
    return ConfidenceInterval(
        point=float(point),
        low=float(low),
        high=float(high),
        level=level,
        n_resamples=n_resamples,
        seed=seed,
    )


@dataclass(frozen=True)
class CiWidthStats:
    """Relative interval widths (high - low) / point, as fractions."""

    minimum: float
    mean: float
    maximum: float
    n_used: int
    n_excluded: int


def ci_width_stats(intervals: Sequence[ConfidenceInterval]) -> CiWidthStats:
    """Summarize relative widths; intervals with a zero point estimate are excluded."""
    widths = [(ci.high - ci.low) / ci.point for ci in intervals if ci.point != 0.0]
    excluded = len(intervals) - len(widths)
    if not widths:
        raise UndefinedMetricError("no interval has a nonzero point estimate")
    return CiWidthStats(
        minimum=min(widths),
        mean=sum(widths) / len(widths),
        maximum=max(widths),
        n_used=len(widths),
        n_excluded=excluded,
    )


_GENDERS = ("female", "male", "unknown")


@dataclass(frozen=True)
class UtteranceInfo:
    duration: Optional[float] = None
    gender: Optional[str] = None
    language: Optional[str] = None

    def __post_init__(self):
        if self.gender is not None and self.gender not in _GENDERS:
            raise ValueError(f"gender must be one of {_GENDERS}, got {self.gender!r}")


@dataclass(frozen=True)
class TrialMetadata:
    """Side information for one trial; any field may be unknown."""

    enroll_duration: Optional[float] = None
    test_duration: Optional[float] = None
    enroll_gender: Optional[str] = None
    test_gender: Optional[str] = None
    enroll_language: Optional[str] = None
    test_language: Optional[str] = None
    pair_kind: Optional[str] = None


class MetadataTable:
    """Utterance attributes plus optional per-pair kinds, keyed for trial lookup."""

    def __init__(
        self,
        utterances: Mapping[str, UtteranceInfo] | None = None,
        pair_kinds: Mapping[Tuple[str, str], str] | None = None,
    ):
        self._utterances = dict(utterances or {})
        self._pair_kinds = dict(pair_kinds or {})

    def for_trial(self, trial) -> TrialMetadata:
        enroll = self._utterances.get(trial.enroll_id, UtteranceInfo())
        test = self._utterances.get(trial.test_id, UtteranceInfo())
        return TrialMetadata(
            enroll_duration=enroll.duration,
            test_duration=test.duration,
            enroll_gender=enroll.gender,
            test_gender=test.gender,
            enroll_language=enroll.language,
            test_language=test.language,
            pair_kind=self._pair_kinds.get((trial.enroll_id, trial.test_id)),
        )

    @classmethod
    def from_csv(cls, utterance_csv: str, pair_kind_csv: Optional[str] = None) -> "MetadataTable":
        """Load ``utterance_id,duration,gender,language`` rows, empty cells meaning unknown.

        ``pair_kind_csv`` optionally adds ``enroll,test,pair_kind`` rows.
        """
        utterances: Dict[str, UtteranceInfo] = {}
        reader = _csv_rows(utterance_csv, ("utterance_id", "duration", "gender", "language"))
        for lineno, row in reader:
            utt, duration, gender, language = row
            try:
                dur_value = float(duration) if duration else None
            except ValueError:
                raise ConfigurationError(
                    f"line {lineno}: duration is not numeric: {duration!r}"
                ) from None
            try:
                info = UtteranceInfo(
                    duration=dur_value,
                    gender=gender or None,
                    language=language or None,
                )
            except ValueError as exc:
                raise ConfigurationError(f"line {lineno}: {exc}") from None
            utterances[utt] = info
        pair_kinds: Dict[Tuple[str, str], str] = {}
        if pair_kind_csv is not None:
            for lineno, row in _csv_rows(pair_kind_csv, ("enroll", "test", "pair_kind")):
                enroll, test, kind = row
                pair_kinds[(enroll, test)] = kind
        return cls(utterances=utterances, pair_kinds=pair_kinds)


def _csv_rows(text: str, expected_header: Tuple[str, ...]):
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if not rows:
        raise ConfigurationError("metadata CSV is empty")
    header = tuple(cell.strip() for cell in rows[0])
    if header != expected_header:
        raise ConfigurationError(
            f"metadata CSV header must be {','.join(expected_header)!r}, "
            f"got {','.join(header)!r}"
        )
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(expected_header):
            raise ConfigurationError(
                f"line {lineno}: expected {len(expected_header)} columns, got {len(row)}"
            )
        out.append((lineno, tuple(cell.strip() for cell in row)))
    return out


@dataclass(frozen=True)
class Slice:
    """Named trial filter. The predicate may answer None: attribute unknown."""

    name: str
    predicate: Callable[[TrialMetadata], Optional[bool]]


def all_trials() -> Slice:
    return Slice(name="all", predicate=lambda md: True)


def min_duration(threshold: float) -> Slice:
    def predicate(md: TrialMetadata) -> Optional[bool]:
        if md.enroll_duration is None or md.test_duration is None:
            return None
        return md.enroll_duration > threshold and md.test_duration > threshold

    return Slice(name=f"dur>{threshold:g}", predicate=predicate)


def same_gender(gender: str) -> Slice:
    if gender not in _GENDERS:
        raise ConfigurationError(f"gender must be one of {_GENDERS}, got {gender!r}")

    def predicate(md: TrialMetadata) -> Optional[bool]:
        if md.enroll_gender is None or md.test_gender is None:
            return None
        return md.enroll_gender == gender and md.test_gender == gender

    return Slice(name=f"gender={gender}", predicate=predicate)


def same_language(language: str) -> Slice:
    def predicate(md: TrialMetadata) -> Optional[bool]:
        if md.enroll_language is None or md.test_language is None:
            return None
        return md.enroll_language == language and md.test_language == language

    return Slice(name=f"lang={language}", predicate=predicate)


def pair_kind_in(kinds: Sequence[str]) -> Slice:
    wanted = tuple(sorted(set(kinds)))
    if not wanted:
        raise ConfigurationError("pair_kind_in needs at least one kind")

    def predicate(md: TrialMetadata) -> Optional[bool]:
        if md.pair_kind is None:
            return None
        return md.pair_kind in wanted

    return Slice(name="kind=" + ",".join(wanted), predicate=predicate)


_SLICE_SPEC = re.compile(r"^(?P<attr>[a-z_]+)(?P<op>[>=])(?P<value>.+)$")


def parse_slice_spec(spec: str) -> Slice:
    """Parse a textual slice selector.

    Accepted forms: ``all``, ``dur>SECONDS``, ``gender=male|female|unknown``,
    ``lang=CODE``, ``kind=K1,K2,...``. Anything else is a configuration error.
    """
    spec = spec.strip()
    if spec == "all":
        return all_trials()
    match = _SLICE_SPEC.match(spec)
    if not match:
        raise ConfigurationError(f"cannot parse slice spec {spec!r}")
    attr, op, value = match.group("attr"), match.group("op"), match.group("value")
    if attr == "dur" and op == ">":
        try:
            return min_duration(float(value))
        except ValueError:
            raise ConfigurationError(f"duration threshold is not numeric: {value!r}") from None
    if attr == "gender" and op == "=":
        return same_gender(value)
    if attr == "lang" and op == "=":
        return same_language(value)
    if attr == "kind" and op == "=":
        return pair_kind_in([k for k in value.split(",") if k])
    raise ConfigurationError(f"unknown slice attribute {attr!r} in {spec!r}")


@dataclass(frozen=True)
class SliceResult:
    name: str
    n_pairs: int
    n_excluded: int
    eer: Optional[float]
    min_dcf: Optional[float]


def slice_eval(
    scored_trials: Sequence[ScoredTrial],
    metadata: MetadataTable,
    slices: Sequence[Slice],
    params: DcfParams = DEFAULT_DCF,
) -> List[SliceResult]:
    """Re-score subsets of a trial list.

    A trial whose needed attribute is unknown is excluded from that slice
    (and counted); a slice left without both classes reports undefined
    metrics rather than a number.
    """
    md = [metadata.for_trial(t) for t in scored_trials]
    results = []
    for sl in slices:
        selected = []
        excluded = 0
        for trial, info in zip(scored_trials, md):
            verdict = sl.predicate(info)
            if verdict is None:
                excluded += 1
            elif verdict:
                selected.append(trial)
        labels = [t.label for t in selected]
        if selected and any(labels) and not all(labels):
            profile = error_profile(selected)
            results.append(
                SliceResult(
                    name=sl.name,
                    n_pairs=len(selected),
                    n_excluded=excluded,
                    eer=eer(profile),
                    min_dcf=min_dcf(profile, params).value,
                )
            )
        else:
            results.append(
                SliceResult(
                    name=sl.name,
                    n_pairs=len(selected),
                    n_excluded=excluded,
                    eer=None,
                    min_dcf=None,
                )
            )
    return results


def slice_csv(results: Sequence[SliceResult]) -> str:
    lines = ["slice,n_pairs,n_excluded,eer,min_dcf"]
    for r in results:
        eer_cell = "" if r.eer is None else repr(r.eer)
        dcf_cell = "" if r.min_dcf is None else repr(r.min_dcf)
        lines.append(f"{r.name},{r.n_pairs},{r.n_excluded},{eer_cell},{dcf_cell}")
    return "\n".join(lines) + "\n"


def format_slice_table(results: Sequence[SliceResult]) -> str:
    headers = ("slice", "pairs", "excluded", "EER", "minDCF")
    rows = []
    for r in results:
        rows.append(
            (
                r.name,
                str(r.n_pairs),
                str(r.n_excluded),
                "-" if r.eer is None else f"{100.0 * r.eer:.3f}%",
                "-" if r.min_dcf is None else f"{r.min_dcf:.4f}",
            )
        )
    widths = [
        max([len(headers[i])] + [len(r[i]) for r in rows]) for i in range(len(headers))
    ]
    lines = []
    for row in (headers, *rows):
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ProgressionRow:
    name: str
    n_trials: int
    eer: float
    min_dcf: float


def progression_table(
    systems: Sequence[Tuple[str, Sequence[ScoredTrial]]],
    params: DcfParams = DEFAULT_DCF,
) -> List[ProgressionRow]:
    """Score several systems on one trial list and rank them.

    Every system must cover exactly the trial list of the first one;
    a mismatch raises a validation error naming the offending system.
    Rows sort by (min cost, equal error rate, name), best first, stably.
    """
    if not systems:
        return []
    first_name, first_trials = systems[0]
    reference = [
        TrialPair(enroll_id=t.enroll_id, test_id=t.test_id, label=t.label) for t in first_trials
    ]
    rows = []
    for name, scored in systems:
        records = [ScoreRecord(score=t.score, enroll_id=t.enroll_id, test_id=t.test_id) for t in scored]
        try:
            joined = join_scores(reference, records)
        except CoverageError as exc:
            error = ValidationError(
                f"system {name!r} does not cover the trial list of {first_name!r}: "
                f"{exc.report.summary()}"
            )
            error.report = exc.report
            raise error from None
        profile = error_profile(joined)
        rows.append(
            ProgressionRow(
                name=name,
                n_trials=len(joined),
                eer=eer(profile),
                min_dcf=min_dcf(profile, params).value,
            )
        )
    rows.sort(key=lambda r: (r.min_dcf, r.eer, r.name))
    return rows


def progression_csv(rows: Sequence[ProgressionRow]) -> str:
    lines = ["system,n_trials,eer,min_dcf"]
    for r in rows:
        lines.append(f"{r.name},{r.n_trials},{r.eer!r},{r.min_dcf!r}")
    return "\n".join(lines) + "\n"


def format_progression_table(rows: Sequence[ProgressionRow]) -> str:
    headers = ("system", "trials", "EER", "minDCF")
    body = [
        (r.name, str(r.n_trials), f"{100.0 * r.eer:.3f}%", f"{r.min_dcf:.4f}") for r in rows
    ]
    widths = [
        max([len(headers[i])] + [len(r[i]) for r in body]) for i in range(len(headers))
    ]
    lines = []
    for row in (headers, *body):
        cells = [row[0].ljust(widths[0])]
        cells += [row[i].rjust(widths[i]) for i in range(1, len(headers))]
        lines.append("  ".join(cells).rstrip())
    return "\n".join(lines) + "\n"
