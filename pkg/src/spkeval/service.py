"""Long-running submission service for evaluation challenges.

State on disk is an append-only JSONL submission log plus a
content-addressed payload store; the leaderboard is a pure function of
the log, so replaying the log on a fresh store reproduces it exactly.
Submissions are evaluated against hidden references and only aggregate
metrics ever leave the service.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, time, timedelta, timezone
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Tuple
from zoneinfo import ZoneInfo

from .diarization import evaluate_corpus
from .errors import ConfigurationError, ParseError, ValidationError
from .rttm import parse_rttm
from .trials import CoverageError, join_scores, parse_score_file, parse_trial_list
from .verification import DcfParams, eer, error_profile, min_dcf

PHASES = ("challenge", "permanent")


class ServiceError(Exception):
    """Base class for submission-service failures."""


class UnknownEntityError(ServiceError, LookupError):
    """Team, track or submission id is not registered."""


class QuotaExceededError(ServiceError):
    """The submission was refused before evaluation; no quota was consumed."""

    def __init__(self, message: str, quota: str, record: "SubmissionRecord",
                 resets_at: Optional[datetime] = None):
        super().__init__(message)
        self.quota = quota
        self.record = record
        self.resets_at = resets_at


class SubmissionInvalidError(ServiceError):
    """The payload failed validation; the attempt consumed quota."""

    def __init__(self, message: str, record: "SubmissionRecord", report=None):
        super().__init__(message)
        self.record = record
        self.report = report


class IntegrityError(ServiceError):
    """Stored artifacts no longer reproduce what the log claims."""


def _require_utc(now: datetime) -> datetime:
    if now.tzinfo is None:
        raise ValueError("timestamps must be timezone-aware")
    return now.astimezone(timezone.utc)


def _parse_timestamp(text: str) -> datetime:
    return datetime.fromisoformat(text.replace("Z", "+00:00"))


@dataclass(frozen=True)
class TrackConfig:
    """One evaluation track: its task, hidden reference and quota policy."""

    track_id: str
    task: str
    reference_path: str
    primary_metric: str = ""
    quota_total: int = 10
    quota_per_day: int = 1
    dcf: DcfParams = field(default_factory=DcfParams)
    collar: float = 0.25
    challenge_deadline: Optional[datetime] = None

    def __post_init__(self):
        if not self.track_id or self.track_id.split() != [self.track_id]:
            raise ConfigurationError(f"bad track_id: {self.track_id!r}")
        if self.task not in ("verification", "diarization"):
            raise ConfigurationError(f"task must be verification or diarization, got {self.task!r}")
        expected = "min_dcf" if self.task == "verification" else "der"
        if not self.primary_metric:
            object.__setattr__(self, "primary_metric", expected)
        elif self.primary_metric != expected:
            raise ConfigurationError(
                f"primary metric for a {self.task} track must be {expected!r}, "
                f"got {self.primary_metric!r}"
            )
        if self.quota_total < 1 or self.quota_per_day < 1:
            raise ConfigurationError("quotas must be >= 1")
        if self.collar < 0:
            raise ConfigurationError("collar must be >= 0")
        if self.challenge_deadline is not None and self.challenge_deadline.tzinfo is None:
            raise ConfigurationError("challenge_deadline must be timezone-aware")

    @property
    def secondary_metric(self) -> str:
        return "eer" if self.task == "verification" else "jer"


@dataclass(frozen=True)
class SubmissionRecord:
    """One log entry. Append-only: metrics, once written, never change."""

    submission_id: str
    team_id: str
    track_id: str
    received_at: datetime
    phase_at_receipt: str
    payload_digest: str
    reference_digest: str
    status: str
    reason: Optional[str] = None
    metrics: Optional[Mapping[str, float]] = None

    @property
    def consumes_quota(self) -> bool:
        # quota measures evaluation attempts: accepted or validation-rejected
        if self.status == "accepted":
            return True
        return self.status == "rejected" and (self.reason or "").startswith("validation")

    def to_json(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "team_id": self.team_id,
            "track_id": self.track_id,
            "received_at": self.received_at.isoformat(),
            "phase_at_receipt": self.phase_at_receipt,
            "payload_digest": self.payload_digest,
            "reference_digest": self.reference_digest,
            "status": self.status,
            "reason": self.reason,
            "metrics": dict(self.metrics) if self.metrics is not None else None,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SubmissionRecord":
        return cls(
            submission_id=data["submission_id"],
            team_id=data["team_id"],
            track_id=data["track_id"],
            received_at=_parse_timestamp(data["received_at"]),
            phase_at_receipt=data["phase_at_receipt"],
            payload_digest=data["payload_digest"],
            reference_digest=data["reference_digest"],
            status=data["status"],
            reason=data.get("reason"),
            metrics=data.get("metrics"),
        )


@dataclass(frozen=True)
class LeaderboardEntry:
    team_id: str
    submission_id: str
    received_at: datetime
    metrics: Mapping[str, float]


@dataclass(frozen=True)
class PhaseTransition:
    track_id: str
    phase: str
    changed: bool


class ChallengeService:
    """Tracks, teams, quota enforcement, evaluation and the leaderboard.

    Per-team decisions are serialized by a team lock held across the
    whole quota-check / evaluate / persist sequence; submissions from
    distinct teams evaluate in parallel. All timestamps are stored UTC;
    the daily quota window is the calendar day of the configured zone.
    """

    def __init__(self, data_dir: str | Path, timezone_name: str = "UTC"):
        self._data_dir = Path(data_dir)
        self._payload_dir = self._data_dir / "payloads"
        self._payload_dir.mkdir(parents=True, exist_ok=True)
        self._log_path = self._data_dir / "submissions.log"
        self._state_path = self._data_dir / "state.json"
        try:
            self._tz = ZoneInfo(timezone_name)
        except Exception:
            raise ConfigurationError(f"unknown timezone {timezone_name!r}") from None
        self._timezone_name = timezone_name
        self._lock = threading.Lock()
        self._team_locks: Dict[str, threading.Lock] = {}
        self._teams: set = set()
        self._tracks: Dict[str, TrackConfig] = {}
        self._phases: Dict[str, str] = {}
        self._reference_digests: Dict[str, str] = {}
        self._reference_data: Dict[str, object] = {}
        self._records: List[SubmissionRecord] = []
        if self._log_path.exists():
            with self._log_path.open("r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if line:
                        self._records.append(SubmissionRecord.from_json(json.loads(line)))
        if self._state_path.exists():
            state = json.loads(self._state_path.read_text(encoding="utf-8"))
            self._phases.update(state.get("phases", {}))

    # -- registry ---------------------------------------------------------

    def register_team(self, team_id: str):
        if not team_id or team_id.split() != [team_id]:
            raise ConfigurationError(f"bad team_id: {team_id!r}")
        with self._lock:
            self._teams.add(team_id)
            self._team_locks.setdefault(team_id, threading.Lock())

    def add_track(self, config: TrackConfig):
        """Register a track; its reference data must validate before it opens."""
        path = Path(config.reference_path)
        raw = path.read_bytes()
        text = raw.decode("utf-8")
        if config.task == "verification":
            trial_pairs = parse_trial_list(text, expect_labels=True)
            labels = [t.label for t in trial_pairs]
            if not any(labels) or all(labels):
                raise ValidationError(
                    f"reference trial list for {config.track_id!r} needs both labels"
                )
            reference: object = trial_pairs
        else:
            annotations = parse_rttm(text)
            if not annotations:
                raise ValidationError(f"reference for {config.track_id!r} has no turns")
            # a reference that cannot even score itself is misconfigured
            evaluate_corpus(annotations, annotations, collar=config.collar)
            reference = annotations
        with self._lock:
            self._tracks[config.track_id] = config
            self._phases.setdefault(config.track_id, "challenge")
            self._reference_digests[config.track_id] = hashlib.sha256(raw).hexdigest()
            self._reference_data[config.track_id] = reference
            self._write_state()

    def track(self, track_id: str) -> TrackConfig:
        try:
            return self._tracks[track_id]
        except KeyError:
            raise UnknownEntityError(f"unknown track {track_id!r}") from None

    def phase(self, track_id: str) -> str:
        self.track(track_id)
        return self._phases[track_id]

    def tracks(self) -> Tuple[TrackConfig, ...]:
        return tuple(self._tracks[k] for k in sorted(self._tracks))

    def records(self) -> Tuple[SubmissionRecord, ...]:
        with self._lock:
            return tuple(self._records)

    # -- submission -------------------------------------------------------

    def submit(self, team_id: str, track_id: str, payload: bytes | str,
               now: datetime) -> SubmissionRecord:
        """Evaluate one submission, enforcing quotas.

        Raises :class:`QuotaExceededError` before touching the payload if
        the team is out of budget (the attempt is logged but consumes
        nothing) and :class:`SubmissionInvalidError` if the payload fails
        validation (the attempt is logged and consumes quota).
        """
        if team_id not in self._teams:
            raise UnknownEntityError(f"unknown team {team_id!r}")
        config = self.track(track_id)
        now = _require_utc(now)
        data = payload.encode("utf-8") if isinstance(payload, str) else bytes(payload)
        digest = hashlib.sha256(data).hexdigest()
        with self._team_locks[team_id]:
            phase = self._phases[track_id]
            mine = [
                r for r in self._records
                if r.team_id == team_id and r.track_id == track_id and r.consumes_quota
            ]
            in_phase = sum(1 for r in mine if r.phase_at_receipt == phase)
            if in_phase >= config.quota_total:
                record = self._persist(
                    team_id, track_id, now, phase, digest, data,
                    status="rejected",
                    reason=f"quota: total budget of {config.quota_total} used in {phase} phase",
                )
                raise QuotaExceededError(str(record.reason), quota="total", record=record)
            local_day = now.astimezone(self._tz).date()
            today = sum(
                1 for r in mine if r.received_at.astimezone(self._tz).date() == local_day
            )
            if today >= config.quota_per_day:
                resets_at = datetime.combine(
                    local_day + timedelta(days=1), time.min, tzinfo=self._tz
                ).astimezone(timezone.utc)
                record = self._persist(
                    team_id, track_id, now, phase, digest, data,
                    status="rejected",
                    reason=(
                        f"quota: daily budget of {config.quota_per_day} used for "
                        f"{local_day.isoformat()} ({self._timezone_name}); "
                        f"resets at {resets_at.isoformat()}"
                    ),
                )
                raise QuotaExceededError(
                    str(record.reason), quota="per_day", record=record, resets_at=resets_at
                )
            try:
                metrics = self._evaluate(config, data)
            except (ParseError, ValidationError, UnicodeDecodeError) as exc:
                report = exc.report if isinstance(exc, CoverageError) else None
                record = self._persist(
                    team_id, track_id, now, phase, digest, data,
                    status="rejected", reason=f"validation: {exc}",
                )
                raise SubmissionInvalidError(str(record.reason), record=record,
                                             report=report) from exc
            return self._persist(
                team_id, track_id, now, phase, digest, data,
                status="accepted", metrics=metrics,
            )

    def _evaluate(self, config: TrackConfig, data: bytes) -> Dict[str, float]:
        text = data.decode("utf-8")
        reference = self._reference_data[config.track_id]
        if config.task == "verification":
            scored = join_scores(reference, parse_score_file(text))
            profile = error_profile(scored)
            return {
                "eer": float(eer(profile)),
                "min_dcf": float(min_dcf(profile, config.dcf).value),
            }
        hypotheses = parse_rttm(text)
        result = evaluate_corpus(reference, hypotheses, collar=config.collar)
        return {
            "der": float(result.overall.der),
            "jer": float(result.jer) if result.jer is not None else 1.0,
            "miss": float(result.overall.miss),
            "fa": float(result.overall.fa),
            "conf": float(result.overall.conf),
            "reference_total": float(result.overall.reference_total),
        }

    def _persist(self, team_id, track_id, now, phase, digest, data,
                 status, reason=None, metrics=None) -> SubmissionRecord:
        with self._lock:
            submission_id = f"S{len(self._records) + 1:06d}"
            record = SubmissionRecord(
                submission_id=submission_id,
                team_id=team_id,
                track_id=track_id,
                received_at=now,
                phase_at_receipt=phase,
                payload_digest=digest,
                reference_digest=self._reference_digests[track_id],
                status=status,
                reason=reason,
                metrics=metrics,
            )
            payload_path = self._payload_dir / digest
            if not payload_path.exists():
                payload_path.write_bytes(data)
            with self._log_path.open("a", encoding="utf-8") as fh:
                fh.write(json.dumps(record.to_json(), sort_keys=True) + "\n")
                fh.flush()
                os.fsync(fh.fileno())
            self._records.append(record)
            return record

    def _write_state(self):
        self._state_path.write_text(
            json.dumps({"phases": dict(sorted(self._phases.items()))}, indent=2) + "\n",
            encoding="utf-8",
        )

    # -- queries ----------------------------------------------------------

    def get_submission(self, submission_id: str) -> SubmissionRecord:
        for record in self._records:
            if record.submission_id == submission_id:
                return record
        raise UnknownEntityError(f"unknown submission {submission_id!r}")

    def leaderboard(self, track_id: str, phase: Optional[str] = None) -> List[LeaderboardEntry]:
        """Best accepted submission per team, ordered best first.

        The challenge board sees only challenge-phase submissions; the
        permanent board ranks everything ever accepted. Order is by the
        track's primary metric, then its secondary, then the earlier
        submission time.
        """
        config = self.track(track_id)
        phase = phase or self._phases[track_id]
        if phase not in PHASES:
            raise ValueError(f"phase must be one of {PHASES}, got {phase!r}")
        eligible = [
            r for r in self._records
            if r.track_id == track_id and r.status == "accepted"
        ]
        if phase == "challenge":
            eligible = [r for r in eligible if r.phase_at_receipt == "challenge"]

        def sort_key(record: SubmissionRecord):
            return (
                record.metrics[config.primary_metric],
                record.metrics[config.secondary_metric],
                record.received_at,
                record.submission_id,
            )

        best: Dict[str, SubmissionRecord] = {}
        for record in eligible:
            incumbent = best.get(record.team_id)
            if incumbent is None or sort_key(record) < sort_key(incumbent):
                best[record.team_id] = record
        ranked = sorted(best.values(), key=sort_key)
        return [
            LeaderboardEntry(
                team_id=r.team_id,
                submission_id=r.submission_id,
                received_at=r.received_at,
                metrics=dict(r.metrics),
            )
            for r in ranked
        ]

    def transition_phase(self, track_id: str, now: datetime,
                         force: bool = False) -> PhaseTransition:
        """Flip challenge to permanent; the only transition there is."""
        config = self.track(track_id)
        now = _require_utc(now)
        with self._lock:
            phase = self._phases[track_id]
            if phase == "permanent":
                return PhaseTransition(track_id=track_id, phase="permanent", changed=False)
            if not force:
                deadline = config.challenge_deadline
                if deadline is None:
                    raise ConfigurationError(
                        f"track {track_id!r} has no challenge deadline; pass force=True"
                    )
                if now < deadline:
                    raise ValueError(
                        f"challenge phase runs until {deadline.isoformat()}; "
                        f"it is now {now.isoformat()}"
                    )
            self._phases[track_id] = "permanent"
            self._write_state()
            return PhaseTransition(track_id=track_id, phase="permanent", changed=True)

    def reevaluate(self, submission_id: str) -> Dict[str, float]:
        """Recompute an accepted submission from the stored payload.

        The payload must hash to what the log recorded, the track's
        reference must be the one the submission was scored against, and
        the recomputed metrics must equal the stored ones bit for bit.
        """
        record = self.get_submission(submission_id)
        config = self.track(record.track_id)
        if record.status != "accepted":
            raise ValueError(f"submission {submission_id} was rejected; nothing to recompute")
        current_ref = self._reference_digests[record.track_id]
        if current_ref != record.reference_digest:
            raise IntegrityError(
                f"reference for track {record.track_id!r} changed since "
                f"{submission_id} was evaluated"
            )
        payload_path = self._payload_dir / record.payload_digest
        if not payload_path.exists():
            raise IntegrityError(f"payload {record.payload_digest} is missing from the store")
        data = payload_path.read_bytes()
        if hashlib.sha256(data).hexdigest() != record.payload_digest:
            raise IntegrityError(f"payload store corrupted for {submission_id}")
        metrics = self._evaluate(config, data)
        if dict(record.metrics) != metrics:
            raise IntegrityError(
                f"recomputed metrics differ from the log for {submission_id}"
            )
        return metrics


@dataclass(frozen=True)
class ServiceConfig:
    """Everything the server process needs, from one JSON file."""

    data_dir: str
    timezone: str = "UTC"
    admin_token: Optional[str] = None
    teams: Mapping[str, str] = field(default_factory=dict)
    tracks: Tuple[TrackConfig, ...] = ()


def load_config(path: str | Path) -> ServiceConfig:
    """Read the service config; environment variables win over the file.

    ``SPKEVAL_DATA_DIR`` overrides ``data_dir``. Relative paths are
    resolved against the config file's directory.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    base = path.parent

    def resolve(p: str) -> str:
        q = Path(p)
        return str(q if q.is_absolute() else base / q)

    tracks = []
    for entry in raw.get("tracks", []):
        entry = dict(entry)
        if "reference_path" not in entry:
            raise ConfigurationError(f"track entry missing reference_path: {entry}")
        entry["reference_path"] = resolve(entry["reference_path"])
        if "dcf" in entry:
            entry["dcf"] = DcfParams(**entry["dcf"])
        if entry.get("challenge_deadline"):
            entry["challenge_deadline"] = _parse_timestamp(entry["challenge_deadline"])
        try:
            tracks.append(TrackConfig(**entry))
        except TypeError as exc:
            raise ConfigurationError(f"bad track entry: {exc}") from None
    teams = raw.get("teams", {})
    if not isinstance(teams, dict):
        raise ConfigurationError("teams must map team_id to token")
    data_dir = os.environ.get("SPKEVAL_DATA_DIR") or raw.get("data_dir")
    if not data_dir:
        raise ConfigurationError("config needs data_dir (or set SPKEVAL_DATA_DIR)")
    return ServiceConfig(
        data_dir=resolve(data_dir),
        timezone=raw.get("timezone", "UTC"),
        admin_token=raw.get("admin_token"),
        teams=dict(teams),
        tracks=tuple(tracks),
    )


def build_service(config: ServiceConfig) -> ChallengeService:
    service = ChallengeService(config.data_dir, timezone_name=config.timezone)
    for team_id in sorted(config.teams):
        service.register_team(team_id)
    for track in config.tracks:
        service.add_track(track)
    return service
