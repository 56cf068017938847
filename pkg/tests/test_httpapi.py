from datetime import datetime, timezone

import pytest
from fastapi.testclient import TestClient

from spkeval.service import ChallengeService, TrackConfig
from spkeval.httpapi import create_app

from test_service import BETTER_SCORES, GOOD_SCORES, TRIALS


class FakeClock:
    def __init__(self):
        self.now = datetime(2025, 3, 1, 12, 0, tzinfo=timezone.utc)

    def __call__(self):
        return self.now

    def advance_days(self, days):
        from datetime import timedelta
        self.now += timedelta(days=days)


@pytest.fixture
def setup(tmp_path):
    trials = tmp_path / "trials.txt"
    trials.write_text(TRIALS)
    service = ChallengeService(tmp_path / "data")
    service.register_team("red")
    service.register_team("blue")
    service.add_track(TrackConfig(
        track_id="verif", task="verification", reference_path=str(trials),
        quota_total=10, quota_per_day=2,
    ))
    clock = FakeClock()
    app = create_app(
        service,
        team_tokens={"tok-red": "red", "tok-blue": "blue"},
        admin_token="sesame",
        clock=clock,
    )
    return TestClient(app), service, clock, tmp_path


def post_scores(client, text, token="tok-red", track="verif"):
    return client.post(
        f"/tracks/{track}/submissions",
        files={"payload": ("scores.txt", text.encode())},
        headers={"X-Team-Token": token} if token else {},
    )


def test_submission_roundtrip(setup):
    client, service, clock, _ = setup
    response = post_scores(client, GOOD_SCORES)
    assert response.status_code == 201
    body = response.json()
    assert body["status"] == "accepted"
    assert body["team_id"] == "red"
    assert body["received_at"] == "2025-03-01T12:00:00+00:00"
    assert set(body["metrics"]) == {"eer", "min_dcf"}
    fetched = client.get(f"/submissions/{body['submission_id']}")
    assert fetched.status_code == 200
    assert fetched.json() == body


def test_auth_required(setup):
    client, *_ = setup
    assert post_scores(client, GOOD_SCORES, token=None).status_code == 401
    assert post_scores(client, GOOD_SCORES, token="wrong").status_code == 401


def test_unknown_track_404(setup):
    client, *_ = setup
    assert post_scores(client, GOOD_SCORES, track="ghost").status_code == 404
    assert client.get("/tracks/ghost/leaderboard").status_code == 404


def test_unknown_submission_404(setup):
    client, *_ = setup
    assert client.get("/submissions/S999999").status_code == 404


def test_invalid_payload_422_with_report(setup):
    client, *_ = setup
    response = post_scores(client, "0.9 e1 t1\n")
    assert response.status_code == 422
    detail = response.json()["detail"]
    assert detail["error"].startswith("validation:")
    assert detail["submission_id"] == "S000001"
    assert len(detail["report"]["missing"]) == 5


def test_quota_429_includes_reset(setup):
    client, service, clock, _ = setup
    assert post_scores(client, GOOD_SCORES).status_code == 201
    assert post_scores(client, BETTER_SCORES).status_code == 201
    response = post_scores(client, GOOD_SCORES)
    assert response.status_code == 429
    detail = response.json()["detail"]
    assert detail["quota"] == "per_day"
    assert detail["resets_at"] == "2025-03-02T00:00:00+00:00"
    clock.advance_days(1)
    assert post_scores(client, GOOD_SCORES).status_code == 201


def test_leaderboard_json(setup):
    client, *_ = setup
    post_scores(client, GOOD_SCORES, token="tok-red")
    post_scores(client, BETTER_SCORES, token="tok-blue")
    response = client.get("/tracks/verif/leaderboard")
    assert response.status_code == 200
    body = response.json()
    assert body["track_id"] == "verif"
    assert body["phase"] == "challenge"
    assert [e["team_id"] for e in body["entries"]] == ["blue", "red"]
    assert [e["rank"] for e in body["entries"]] == [1, 2]
    assert client.get("/tracks/verif/leaderboard?phase=warmup").status_code == 422


def test_admin_track_creation(setup, tmp_path):
    client, service, clock, base = setup
    ref = base / "trials2.txt"
    ref.write_text(TRIALS)
    body = {
        "track_id": "verif2",
        "task": "verification",
        "reference_path": str(ref),
        "quota_per_day": 5,
    }
    assert client.post("/admin/tracks", json=body).status_code == 401
    response = client.post(
        "/admin/tracks", json=body, headers={"X-Admin-Token": "sesame"}
    )
    assert response.status_code == 201
    assert response.json() == {"track_id": "verif2", "phase": "challenge"}
    assert post_scores(client, GOOD_SCORES, track="verif2").status_code == 201
    bad = dict(body, track_id="verif3", task="asr")
    assert client.post(
        "/admin/tracks", json=bad, headers={"X-Admin-Token": "sesame"}
    ).status_code == 422


def test_admin_phase_transition(setup):
    client, service, clock, _ = setup
    post_scores(client, GOOD_SCORES, token="tok-red")
    # no deadline configured: premature flip without force conflicts
    response = client.post(
        "/admin/tracks/verif/phase", json={}, headers={"X-Admin-Token": "sesame"}
    )
    assert response.status_code == 409
    response = client.post(
        "/admin/tracks/verif/phase", json={"force": True},
        headers={"X-Admin-Token": "sesame"},
    )
    assert response.status_code == 200
    assert response.json() == {"track_id": "verif", "phase": "permanent", "changed": True}
    clock.advance_days(1)
    post_scores(client, BETTER_SCORES, token="tok-blue")
    challenge = client.get("/tracks/verif/leaderboard?phase=challenge").json()
    assert [e["team_id"] for e in challenge["entries"]] == ["red"]
    permanent = client.get("/tracks/verif/leaderboard?phase=permanent").json()
    assert [e["team_id"] for e in permanent["entries"]] == ["blue", "red"]
    assert client.post(
        "/admin/tracks/verif/phase", json={"force": True}
    ).status_code == 401
