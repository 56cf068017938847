"""Acceptance gate: twelve independently checkable behaviors.

Each test prints one PASS/FAIL line (bypassing capture, so the lines
appear in a plain ``pytest -v`` run) and enforces its runtime budget.
Oracles live in ``oracles.py`` and share no code with the library.
"""

import json
import math
import time
from datetime import datetime, timezone

import numpy as np
import pytest

from spkeval.analysis import (
    MetadataTable,
    all_trials,
    bootstrap_ci,
    min_duration,
    same_gender,
    same_language,
    slice_eval,
)
from spkeval.diarization import der, hungarian_assignment, jer, OverlapMatrix
from spkeval.errors import ParseError, UndefinedMetricError, ValidationError
from spkeval.rttm import Annotation, Turn, parse_rttm, write_rttm
from spkeval.service import ChallengeService, QuotaExceededError, SubmissionInvalidError, TrackConfig
from spkeval.trials import (
    ScoredTrial,
    parse_score_file,
    parse_trial_list,
    write_score_file,
    write_trial_list,
    ScoreRecord,
    TrialPair,
)
from spkeval.verification import (
    DcfParams,
    ErrorProfile,
    dcf,
    eer,
    error_profile,
    min_dcf,
)

from oracles import (
    BINS_PER_SECOND,
    best_assignment_value_oracle,
    der_oracle,
    eer_oracle,
    jer_oracle_values,
    random_annotation,
)


def _run(capfd, number, name, limit_s, body):
    t0 = time.perf_counter()
    ok = False
    try:
        body()
        ok = True
    finally:
        elapsed = time.perf_counter() - t0
        over = elapsed > limit_s
        status = "PASS" if ok and not over else "FAIL"
        with capfd.disabled():
            print(
                f"\n[criterion {number:02d}] {status}  {name}"
                f"  ({elapsed:.2f}s, budget {limit_s:g}s)",
                flush=True,
            )
    if over:
        raise AssertionError(
            f"criterion {number} ran {elapsed:.2f}s, over its {limit_s:g}s budget"
        )


# ---------------------------------------------------------------------------
# shared randomized inputs

def _score_sets():
    """500 score sets: 25 separable, 325 continuous, 150 on a dyadic grid."""
    rng = np.random.default_rng(90210)
    sets = []
    for i in range(500):
        n_tgt = int(rng.integers(3, 201))
        n_non = int(rng.integers(3, 201))
        if i < 25:
            non = rng.normal(0.0, 1.0, n_non)
            tgt = np.abs(rng.normal(0.0, 1.0, n_tgt)) + non.max() + 1.0
        elif i < 350:
            shift = float(rng.uniform(0.0, 2.5))
            tgt = rng.normal(shift, 1.0, n_tgt)
            non = rng.normal(0.0, 1.0, n_non)
        else:
            # multiples of 1/16: exact in binary, heavy cross-class ties
            tgt = rng.integers(-24, 41, n_tgt) / 16.0
            non = rng.integers(-40, 25, n_non) / 16.0
        sets.append((tgt, non))
    return sets


@pytest.fixture(scope="module")
def score_sets():
    return _score_sets()


@pytest.fixture(scope="module")
def diar_instances():
    """200 (reference, hypothesis, collar) triples on the millisecond grid."""
    rng = np.random.default_rng(61803)
    instances = []
    for i in range(200):
        ref = random_annotation(rng, "f", ["A", "B", "C", "D", "E"])
        hyp = random_annotation(rng, "f", ["U", "V", "W", "X", "Y"], allow_empty=True)
        collar = 0.25 if i % 2 else 0.0
        instances.append((ref, hyp, collar))
    return instances


# ---------------------------------------------------------------------------
# 1. detection cost anchor

def test_criterion_01_dcf_anchor(capfd):
    def body():
        assert abs(dcf(p_miss=0.1, p_fa=0.02) - 0.024) <= 1e-12
        assert dcf(p_miss=1.0, p_fa=0.0) == 0.05  # reject everything
        assert dcf(p_miss=0.0, p_fa=1.0) == 0.95  # accept everything
        params = DcfParams()
        assert (params.c_miss, params.c_fa, params.p_tar) == (1.0, 1.0, 0.05)

    _run(capfd, 1, "detection cost anchor values", 5.0, body)


# ---------------------------------------------------------------------------
# 2. EER against the midpoint-threshold oracle

def test_criterion_02_eer_oracle(capfd, score_sets):
    def body():
        for i, (tgt, non) in enumerate(score_sets):
            profile = ErrorProfile.from_scores(tgt, non)
            got = eer(profile)
            want = eer_oracle(tgt, non)
            assert abs(got - float(want)) <= 1e-12, f"set {i}"
            if i < 25:
                assert got == 0.0, f"separable set {i} must give exactly 0"

    _run(capfd, 2, "EER matches the independent oracle on 500 sets", 5.0, body)


# ---------------------------------------------------------------------------
# 3. minimum cost dominates every operating point

def test_criterion_03_min_dcf_dominance(capfd, score_sets):
    def body():
        params = DcfParams()
        bound = min(params.p_tar * params.c_miss, (1.0 - params.p_tar) * params.c_fa)
        for i, (tgt, non) in enumerate(score_sets):
            profile = ErrorProfile.from_scores(tgt, non)
            best = min_dcf(profile, params).value
            costs = (
                params.c_miss * profile.p_miss * params.p_tar
                + params.c_fa * profile.p_fa * (1.0 - params.p_tar)
            )
            assert (best <= costs).all(), f"set {i}"
            assert best <= bound, f"set {i}"

    _run(capfd, 3, "min cost dominates all operating points on 500 sets", 5.0, body)


# ---------------------------------------------------------------------------
# 4. monotone transform invariance

def test_criterion_04_monotone_invariance(capfd, score_sets):
    def affine(x):
        return 2.5 * x + 0.75

    def piecewise(x):
        return np.where(x < 0.0, 0.5 * x, 2.0 * x + 0.25)

    def body():
        for i, (tgt, non) in enumerate(score_sets):
            profile = ErrorProfile.from_scores(tgt, non)
            base_eer = eer(profile)
            base_dcf = min_dcf(profile).value
            for transform in (np.exp, affine, piecewise):
                moved = ErrorProfile.from_scores(transform(tgt), transform(non))
                assert abs(eer(moved) - base_eer) <= 1e-12, f"set {i}, {transform}"
                assert abs(min_dcf(moved).value - base_dcf) <= 1e-12, f"set {i}, {transform}"

    _run(capfd, 4, "EER and min cost survive monotone transforms", 5.0, body)


# ---------------------------------------------------------------------------
# 5. assignment optimality

def test_criterion_05_assignment_optimality(capfd):
    def body():
        rng = np.random.default_rng(1729)
        for i in range(1000):
            n_ref = int(rng.integers(1, 8))
            n_hyp = int(rng.integers(1, 8))
            if i % 10 < 7:
                seconds = rng.integers(0, 101, size=(n_ref, n_hyp)) / 8.0
            else:
                seconds = rng.integers(0, 21, size=(n_ref, n_hyp)).astype(float)
            if i % 5 == 0:
                seconds = seconds * (rng.random((n_ref, n_hyp)) < 0.6)
            matrix = OverlapMatrix(
                ref_speakers=tuple(f"r{k}" for k in range(n_ref)),
                hyp_speakers=tuple(f"h{k}" for k in range(n_hyp)),
                seconds=seconds,
            )
            mapping = hungarian_assignment(matrix)
            value = float(np.sum([matrix.cell(r, h) for r, h in mapping.pairs]))
            assert value == best_assignment_value_oracle(seconds), f"matrix {i}"

    _run(capfd, 5, "assignment equals exhaustive maximum on 1000 matrices", 10.0, body)


# ---------------------------------------------------------------------------
# 6. DER against the bitmap oracle

def test_criterion_06_der_oracle(capfd, diar_instances):
    def body():
        spare = np.random.default_rng(424242)
        compared = 0
        for ref, hyp, collar in diar_instances:
            want = der_oracle(ref, hyp, collar)
            while want is None:
                # collar swallowed the whole reference: undefined, then redraw
                with pytest.raises(UndefinedMetricError):
                    der(ref, hyp, collar=collar)
                ref = random_annotation(spare, "f", ["A", "B", "C", "D", "E"])
                hyp = random_annotation(spare, "f", ["U", "V", "W", "X", "Y"],
                                        allow_empty=True)
                want = der_oracle(ref, hyp, collar)
            miss, fa, conf, total = want
            got = der(ref, hyp, collar=collar)
            assert abs(got.der - (miss + fa + conf) / total) <= 1e-3
            compared += 1
        assert compared == 200
        # scoring an annotation against itself is a perfect match
        for ref, hyp, _ in diar_instances:
            for annotation in (ref, hyp):
                for collar in (0.0, 0.25):
                    try:
                        self_score = der(annotation, annotation, collar=collar)
                    except UndefinedMetricError:
                        continue  # empty or collar-swallowed reference
                    assert self_score.der == 0.0

    _run(capfd, 6, "DER matches the bitmap oracle on 200 instances", 60.0, body)


# ---------------------------------------------------------------------------
# 7. JER against the bitmap oracle

def test_criterion_07_jer_oracle(capfd, diar_instances):
    def body():
        for i, (ref, hyp, _) in enumerate(diar_instances):
            got = jer(ref, hyp).jer
            candidates = jer_oracle_values(ref, hyp)
            assert min(abs(got - c) for c in candidates) <= 1e-3, f"instance {i}"
        # a reference speaker with no overlapping hypothesis speaker scores 1.0
        ref = Annotation("f", (
            Turn(onset=0.0, duration=4.0, speaker_id="A", file_id="f"),
            Turn(onset=10.0, duration=4.0, speaker_id="B", file_id="f"),
        ))
        hyp = Annotation("f", (
            Turn(onset=0.0, duration=4.0, speaker_id="X", file_id="f"),
        ))
        result = jer(ref, hyp)
        assert result.per_speaker["B"] == 1.0
        assert result.per_speaker["A"] == 0.0

    _run(capfd, 7, "JER matches the bitmap oracle at zero collar", 60.0, body)


# ---------------------------------------------------------------------------
# 8. worked single-turn anchor

def test_criterion_08_worked_anchor(capfd):
    def body():
        ref = Annotation("f", (Turn(onset=0.0, duration=10.0, speaker_id="A", file_id="f"),))
        hyp = Annotation("f", (Turn(onset=0.0, duration=8.0, speaker_id="X", file_id="f"),))
        with_collar = 100.0 * der(ref, hyp, collar=0.25).der
        assert abs(with_collar - 18.42) <= 0.01
        no_collar = 100.0 * der(ref, hyp, collar=0.0).der
        assert abs(no_collar - 20.0) <= 1e-9
        assert abs(100.0 * jer(ref, hyp).jer - 20.0) <= 1e-9

    _run(capfd, 8, "worked single-turn anchor values", 5.0, body)


# ---------------------------------------------------------------------------
# 9. bootstrap determinism, degeneracy and calibration

def _uniform_corpus(rng, n_per_class):
    tgt = rng.uniform(0.8, 1.8, n_per_class)
    non = rng.uniform(0.0, 1.0, n_per_class)
    trials = [
        ScoredTrial(enroll_id=f"a{i}", test_id=f"b{i}", label=1, score=float(s))
        for i, s in enumerate(tgt)
    ]
    trials += [
        ScoredTrial(enroll_id=f"c{i}", test_id=f"d{i}", label=0, score=float(s))
        for i, s in enumerate(non)
    ]
    return trials


def test_criterion_09_bootstrap(capfd):
    def body():
        # (a) fixed seed: bit-identical across runs and worker counts
        trials = _uniform_corpus(np.random.default_rng(314), 2000)
        first = bootstrap_ci(trials, metric="eer", n_resamples=500, seed=11, workers=1)
        again = bootstrap_ci(trials, metric="eer", n_resamples=500, seed=11, workers=1)
        threaded = bootstrap_ci(trials, metric="eer", n_resamples=500, seed=11, workers=4)
        assert first == again
        assert (first.low, first.high, first.point) == (
            threaded.low, threaded.high, threaded.point
        )

        # (b) a zero-variance corpus gives a zero-width interval
        separated = [
            ScoredTrial(enroll_id=f"a{i}", test_id=f"b{i}", label=1, score=2.0 + i)
            for i in range(100)
        ] + [
            ScoredTrial(enroll_id=f"c{i}", test_id=f"d{i}", label=0, score=-2.0 - i)
            for i in range(100)
        ]
        degenerate = bootstrap_ci(separated, metric="eer", n_resamples=200, seed=0)
        assert degenerate.high - degenerate.low == 0.0
        assert degenerate.point == 0.0

        # (c) overlapping-uniform model with analytic EER of exactly 10%
        big = _uniform_corpus(np.random.default_rng(20267), 100_000)
        point = eer(error_profile(big))
        assert abs(point - 0.10) <= 0.005  # within half a percentage point
        covered = 0
        for rep in range(100):
            sample = _uniform_corpus(np.random.default_rng(20260 + rep), 2000)
            ci = bootstrap_ci(sample, metric="eer", n_resamples=500, seed=rep)
            covered += ci.low <= 0.10 <= ci.high
        assert covered >= 90, f"interval covered the analytic value {covered}/100 times"

    _run(capfd, 9, "bootstrap determinism and calibration", 120.0, body)


# ---------------------------------------------------------------------------
# 10. round-trips and malformed-line rejection

GOOD_RTTM_LINE = "SPEAKER rec 1 0.50 1.25 <NA> <NA> alice <NA> <NA>"

MALFORMED_RTTM_LINES = [
    "SPEAKER rec 1 0.50 1.25 <NA> <NA> alice <NA>",              # 9 fields
    "SPEAKER rec 1 0.50 1.25 <NA> <NA> alice <NA> <NA> extra",   # 11 fields
    "LEXEME rec 1 0.50 1.25 <NA> <NA> alice <NA> <NA>",          # wrong record type
    "SPEAKER rec one 0.50 1.25 <NA> <NA> alice <NA> <NA>",       # channel not an int
    "SPEAKER rec 1 half 1.25 <NA> <NA> alice <NA> <NA>",         # onset not numeric
    "SPEAKER rec 1 -0.50 1.25 <NA> <NA> alice <NA> <NA>",        # negative onset
    "SPEAKER rec 1 inf 1.25 <NA> <NA> alice <NA> <NA>",          # non-finite onset
    "SPEAKER rec 1 0.50 long <NA> <NA> alice <NA> <NA>",         # duration not numeric
    "SPEAKER rec 1 0.50 0 <NA> <NA> alice <NA> <NA>",            # zero duration
    "SPEAKER rec 1 0.50 -1.25 <NA> <NA> alice <NA> <NA>",        # negative duration
    "SPEAKER rec 1 0.50 nan <NA> <NA> alice <NA> <NA>",          # nan duration
]

MALFORMED_TRIAL_LINES = [
    "1 enroll",             # too few fields
    "1 enroll test extra",  # too many fields
    "2 enroll test",        # label out of range
    "yes enroll test",      # label not a digit
]

MALFORMED_SCORE_LINES = [
    "0.5 enroll",           # too few fields
    "high enroll test",     # score not numeric
    "inf enroll test",      # non-finite score
    "nan enroll test",      # non-finite score
]


def test_criterion_10_round_trips_and_rejection(capfd):
    def body():
        rng = np.random.default_rng(5150)
        # annotations survive write -> parse exactly
        for i in range(1000):
            file_id = f"file{i:04d}"
            if i % 2:
                annotation = random_annotation(rng, file_id, ["s1", "s2", "s3"])
            else:
                turns = []
                for _ in range(int(rng.integers(1, 12))):
                    onset = float(rng.uniform(0.0, 59.0))
                    duration = float(rng.uniform(0.01, 8.0))
                    speaker = f"spk{int(rng.integers(0, 4))}"
                    turns.append(Turn(onset=onset, duration=duration,
                                      speaker_id=speaker, file_id=file_id))
                annotation = Annotation(file_id, tuple(turns))
            parsed = parse_rttm(write_rttm({file_id: annotation}))
            assert parsed == {file_id: annotation}, f"annotation {i}"

        # trial lists and score files survive write -> parse exactly
        for i in range(200):
            n = int(rng.integers(1, 60))
            trials = [
                TrialPair(enroll_id=f"e{i}_{j}", test_id=f"t{i}_{j}",
                          label=int(rng.integers(0, 2)))
                for j in range(n)
            ]
            assert parse_trial_list(write_trial_list(trials)) == trials
            records = [
                ScoreRecord(score=float(rng.normal()), enroll_id=p.enroll_id,
                            test_id=p.test_id)
                for p in trials
            ]
            assert parse_score_file(write_score_file(records)) == records

        # every malformed-line class is rejected naming the right line
        for bad in MALFORMED_RTTM_LINES:
            text = "\n".join([GOOD_RTTM_LINE, GOOD_RTTM_LINE, bad, GOOD_RTTM_LINE]) + "\n"
            with pytest.raises(ParseError) as err:
                parse_rttm(text)
            assert err.value.line == 3, bad
        for bad in MALFORMED_TRIAL_LINES:
            with pytest.raises(ParseError) as err:
                parse_trial_list(f"1 e1 t1\n{bad}\n")
            assert err.value.line == 2, bad
        for bad in MALFORMED_SCORE_LINES:
            with pytest.raises(ParseError) as err:
                parse_score_file(f"0.5 e1 t1\n{bad}\n")
            assert err.value.line == 2, bad
        with pytest.raises(ValidationError) as dup:
            parse_trial_list("1 e1 t1\n0 e2 t2\n0 e1 t1\n")
        assert "line 3" in str(dup.value) and "line 1" in str(dup.value)

    _run(capfd, 10, "1000 round-trips and malformed-line rejection", 5.0, body)


# ---------------------------------------------------------------------------
# 11. service mechanics over a simulated three-day challenge

REFERENCE_TRIALS = "".join(
    [f"1 e{i} t{i}\n" for i in range(1, 11)] + [f"0 e{i} t{i}\n" for i in range(11, 21)]
)

TARGET_IDS = [f"e{i} t{i}" for i in range(1, 11)]
NONTARGET_IDS = [f"e{i} t{i}" for i in range(11, 21)]


def _payload(target_scores, nontarget_scores):
    lines = [f"{s} {pair}" for s, pair in zip(target_scores, TARGET_IDS)]
    lines += [f"{s} {pair}" for s, pair in zip(nontarget_scores, NONTARGET_IDS)]
    return "\n".join(lines) + "\n"


PAYLOAD_A = _payload(
    [0.05, 0.10, 0.80, 0.81, 0.82, 0.83, 0.84, 0.85, 0.86, 0.87],
    [0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5, 0.55, 0.6, 0.69],
)
PAYLOAD_B = _payload(
    [0.5, 0.5, 0.82, 0.83, 0.84, 0.85, 0.86, 0.87, 0.88, 0.89],
    [0.15, 0.2, 0.25, 0.3, 0.35, 0.38, 0.5, 0.5, 0.5, 0.65],
)
PAYLOAD_WORSE = _payload([0.3] * 10, [0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45])
PAYLOAD_PERFECT = _payload([0.9] * 10, [0.1] * 10)
PAYLOAD_BROKEN = "0.9 e1 t1\n"


def _board_bytes(service, track_id, phase):
    entries = [
        {
            "team_id": e.team_id,
            "submission_id": e.submission_id,
            "received_at": e.received_at.isoformat(),
            "metrics": dict(e.metrics),
        }
        for e in service.leaderboard(track_id, phase=phase)
    ]
    return json.dumps(entries, sort_keys=True).encode("utf-8")


def test_criterion_11_service_mechanics(capfd, tmp_path):
    def at(day, hour, minute=0):
        return datetime(2025, 6, day, hour, minute, tzinfo=timezone.utc)

    def body():
        reference = tmp_path / "trials.txt"
        reference.write_text(REFERENCE_TRIALS)
        deadline = at(4, 0)

        def tracks():
            return [
                TrackConfig(track_id="daily", task="verification",
                            reference_path=str(reference), quota_total=10,
                            quota_per_day=1, challenge_deadline=deadline),
                TrackConfig(track_id="main", task="verification",
                            reference_path=str(reference), quota_total=10,
                            quota_per_day=5, challenge_deadline=deadline),
            ]

        service = ChallengeService(tmp_path / "store")
        for team in ("team_a", "team_b"):
            service.register_team(team)
        for track in tracks():
            service.add_track(track)

        # day 1, daily track: the second same-day submission is refused
        first = service.submit("team_a", "daily", PAYLOAD_A, at(1, 9))
        assert first.status == "accepted"
        with pytest.raises(QuotaExceededError) as daily_err:
            service.submit("team_a", "daily", PAYLOAD_B, at(1, 10))
        assert daily_err.value.quota == "per_day"
        copycat = service.submit("team_b", "daily", PAYLOAD_A, at(1, 11))
        assert copycat.metrics == first.metrics
        daily_board = service.leaderboard("daily")
        # equal metrics: the earlier submission outranks the copy
        assert [e.team_id for e in daily_board] == ["team_a", "team_b"]

        # main track: team_a burns its whole budget in two days
        day1 = [PAYLOAD_A, PAYLOAD_WORSE, PAYLOAD_WORSE, PAYLOAD_WORSE, PAYLOAD_WORSE]
        for hour, payload in enumerate(day1, start=9):
            assert service.submit("team_a", "main", payload, at(1, hour)).status == "accepted"
        for hour in range(9, 13):
            assert service.submit("team_a", "main", PAYLOAD_WORSE, at(2, hour)).status == "accepted"
        with pytest.raises(SubmissionInvalidError):
            service.submit("team_a", "main", PAYLOAD_BROKEN, at(2, 13))  # 10th counted
        with pytest.raises(QuotaExceededError) as total_err:
            service.submit("team_a", "main", PAYLOAD_A, at(3, 9))  # would be the 11th
        assert total_err.value.quota == "total"

        accepted_b = service.submit("team_b", "main", PAYLOAD_B, at(2, 9))
        metrics_a = dict(first.metrics)
        metrics_b = dict(accepted_b.metrics)
        # designed tie: identical minimum cost, strictly better EER for B
        assert metrics_b["min_dcf"] == metrics_a["min_dcf"]
        assert abs(metrics_a["eer"] - 0.20) <= 1e-12
        assert abs(metrics_b["eer"] - 0.16) <= 1e-12
        main_board = service.leaderboard("main")
        assert [e.team_id for e in main_board] == ["team_b", "team_a"]
        assert main_board[1].metrics == metrics_a  # best of team_a is payload A

        # day 4: the deadline passes, the boards freeze, quotas reopen
        for track_id in ("daily", "main"):
            assert service.transition_phase(track_id, at(4, 12)).changed
        post = service.submit("team_b", "main", PAYLOAD_PERFECT, at(4, 13))
        assert post.phase_at_receipt == "permanent"
        challenge_board = service.leaderboard("main", phase="challenge")
        assert [e.team_id for e in challenge_board] == ["team_b", "team_a"]
        assert challenge_board[0].submission_id == accepted_b.submission_id
        permanent_board = service.leaderboard("main", phase="permanent")
        assert permanent_board[0].submission_id == post.submission_id
        assert permanent_board[0].metrics["eer"] == 0.0

        # replaying the log on a fresh store reproduces every board byte for byte
        replay_dir = tmp_path / "replay"
        replay_dir.mkdir()
        (replay_dir / "submissions.log").write_bytes(
            (tmp_path / "store" / "submissions.log").read_bytes()
        )
        replayed = ChallengeService(replay_dir)
        for team in ("team_a", "team_b"):
            replayed.register_team(team)
        for track in tracks():
            replayed.add_track(track)
        assert replayed.records() == service.records()
        for track_id in ("daily", "main"):
            for phase in ("challenge", "permanent"):
                assert _board_bytes(replayed, track_id, phase) == _board_bytes(
                    service, track_id, phase
                )

        # stored metrics are reproducible from stored payloads, bit for bit
        accepted = [r for r in service.records() if r.status == "accepted"]
        assert len(accepted) == 13
        for record in accepted:
            assert service.reevaluate(record.submission_id) == dict(record.metrics)

    _run(capfd, 11, "three-day challenge simulation", 30.0, body)


# ---------------------------------------------------------------------------
# 12. slice consistency

def test_criterion_12_slice_consistency(capfd):
    def body():
        rng = np.random.default_rng(8128)
        genders = ("female", "male", "unknown")
        languages = ("en", "es", "zh")
        utterances = {}

        def register(utt_id):
            utterances[utt_id] = {
                "duration": float(rng.uniform(1.0, 15.0)),
                "gender": genders[int(rng.integers(0, 3))],
                "language": languages[int(rng.integers(0, 3))],
            }

        trials = []
        for i in range(2000):
            enroll, test = f"e{i}", f"t{i}"
            register(enroll)
            register(test)
            label = int(rng.integers(0, 2))
            score = float(rng.normal(1.5 if label else 0.0, 1.0))
            trials.append(ScoredTrial(enroll_id=enroll, test_id=test,
                                      label=label, score=score))

        csv_text = "utterance_id,duration,gender,language\n" + "".join(
            f"{utt},{info['duration']!r},{info['gender']},{info['language']}\n"
            for utt, info in utterances.items()
        )
        table = MetadataTable.from_csv(csv_text)
        slices = [
            all_trials(),
            min_duration(6.0),
            same_gender("female"),
            same_gender("male"),
            same_language("en"),
            same_language("es"),
        ]
        results = {r.name: r for r in slice_eval(trials, table, slices)}

        # the trivial slice is the global computation, bit for bit
        profile = error_profile(trials)
        assert results["all"].n_pairs == 2000
        assert results["all"].eer == eer(profile)
        assert results["all"].min_dcf == min_dcf(profile).value

        def recheck(name, keep):
            subset = [t for t in trials if keep(utterances[t.enroll_id],
                                                utterances[t.test_id])]
            row = results[name]
            assert row.n_pairs == len(subset), name
            sub_profile = error_profile(subset)
            assert abs(row.eer - eer(sub_profile)) <= 1e-12, name
            assert abs(row.min_dcf - min_dcf(sub_profile).value) <= 1e-12, name

        recheck("dur>6", lambda e, t: e["duration"] > 6.0 and t["duration"] > 6.0)
        recheck("gender=female", lambda e, t: e["gender"] == "female" and t["gender"] == "female")
        recheck("gender=male", lambda e, t: e["gender"] == "male" and t["gender"] == "male")
        recheck("lang=en", lambda e, t: e["language"] == "en" and t["language"] == "en")
        recheck("lang=es", lambda e, t: e["language"] == "es" and t["language"] == "es")

    _run(capfd, 12, "slices agree with independent re-scoring", 10.0, body)
