"""HTTP front end for the submission service.

Team identity travels in the ``X-Team-Token`` header, admin calls in
``X-Admin-Token``. Responses carry submission records and leaderboards
as JSON; reference labels never leave the server.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Callable, Mapping, Optional

from fastapi import FastAPI, File, Header, HTTPException, UploadFile

from .errors import ConfigurationError, ValidationError
from .service import (
    ChallengeService,
    DcfParams,
    QuotaExceededError,
    ServiceConfig,
    SubmissionInvalidError,
    SubmissionRecord,
    TrackConfig,
    UnknownEntityError,
    _parse_timestamp,
)


def _record_json(record: SubmissionRecord) -> dict:
    return record.to_json()


def create_app(
    service: ChallengeService,
    team_tokens: Mapping[str, str],
    admin_token: Optional[str] = None,
    clock: Optional[Callable[[], datetime]] = None,
) -> FastAPI:
    """Wrap a service in the HTTP API.

    ``team_tokens`` maps secret token to team id. ``clock`` supplies the
    receive timestamp (UTC now by default); tests inject a fake one.
    """
    now = clock or (lambda: datetime.now(timezone.utc))
    app = FastAPI(title="spkeval challenge service")

    def team_from(token: Optional[str]) -> str:
        if token is None or token not in team_tokens:
            raise HTTPException(status_code=401, detail="unknown or missing team token")
        return team_tokens[token]

    def check_admin(token: Optional[str]):
        if admin_token is None or token != admin_token:
            raise HTTPException(status_code=401, detail="admin token required")

    @app.post("/tracks/{track_id}/submissions", status_code=201)
    async def submit(
        track_id: str,
        payload: UploadFile = File(...),
        x_team_token: Optional[str] = Header(default=None),
    ):
        team_id = team_from(x_team_token)
        data = await payload.read()
        try:
            record = service.submit(team_id, track_id, data, now=now())
        except UnknownEntityError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except QuotaExceededError as exc:
            raise HTTPException(
                status_code=429,
                detail={
                    "error": str(exc),
                    "quota": exc.quota,
                    "resets_at": exc.resets_at.isoformat() if exc.resets_at else None,
                    "submission_id": exc.record.submission_id,
                },
            ) from None
        except SubmissionInvalidError as exc:
            detail = {"error": str(exc), "submission_id": exc.record.submission_id}
            if exc.report is not None:
                detail["report"] = {
                    "missing": [list(p) for p in exc.report.missing],
                    "extra": [list(p) for p in exc.report.extra],
                    "duplicated": [list(p) for p in exc.report.duplicated],
                }
            raise HTTPException(status_code=422, detail=detail) from None
        return _record_json(record)

    @app.get("/tracks/{track_id}/leaderboard")
    def leaderboard(track_id: str, phase: Optional[str] = None):
        try:
            entries = service.leaderboard(track_id, phase=phase)
        except UnknownEntityError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except ValueError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {
            "track_id": track_id,
            "phase": phase or service.phase(track_id),
            "entries": [
                {
                    "rank": i + 1,
                    "team_id": e.team_id,
                    "submission_id": e.submission_id,
                    "received_at": e.received_at.isoformat(),
                    "metrics": dict(e.metrics),
                }
                for i, e in enumerate(entries)
            ],
        }

    @app.get("/submissions/{submission_id}")
    def get_submission(submission_id: str):
        try:
            return _record_json(service.get_submission(submission_id))
        except UnknownEntityError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None

    @app.post("/admin/tracks", status_code=201)
    def add_track(body: dict, x_admin_token: Optional[str] = Header(default=None)):
        check_admin(x_admin_token)
        entry = dict(body)
        if "dcf" in entry:
            entry["dcf"] = DcfParams(**entry["dcf"])
        if entry.get("challenge_deadline"):
            entry["challenge_deadline"] = _parse_timestamp(entry["challenge_deadline"])
        try:
            config = TrackConfig(**entry)
            service.add_track(config)
        except (TypeError, OSError, ConfigurationError, ValidationError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from None
        return {"track_id": config.track_id, "phase": service.phase(config.track_id)}

    @app.post("/admin/tracks/{track_id}/phase")
    def transition(
        track_id: str,
        body: Optional[dict] = None,
        x_admin_token: Optional[str] = Header(default=None),
    ):
        check_admin(x_admin_token)
        body = body or {}
        at = _parse_timestamp(body["now"]) if body.get("now") else now()
        force = bool(body.get("force", False))
        try:
            result = service.transition_phase(track_id, now=at, force=force)
        except UnknownEntityError as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from None
        except (ConfigurationError, ValueError) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from None
        return {"track_id": result.track_id, "phase": result.phase, "changed": result.changed}

    return app


def app_from_config(config: ServiceConfig, service: ChallengeService,
                    clock: Optional[Callable[[], datetime]] = None) -> FastAPI:
    tokens = {token: team for team, token in config.teams.items()}
    return create_app(service, team_tokens=tokens, admin_token=config.admin_token, clock=clock)
