"""
Running a scoring service with quotas and a leaderboard
=======================================================

Everything below happens against a temporary directory; the service
keeps an append-only submission log there, so a crash or restart loses
nothing. Timestamps are injected to simulate a two-day challenge.
"""

import tempfile
from datetime import datetime, timezone
from pathlib import Path

from spkeval.service import (
    ChallengeService,
    QuotaExceededError,
    SubmissionInvalidError,
    TrackConfig,
)

root = Path(tempfile.mkdtemp(prefix="spkeval-demo-"))

# the hidden reference: ten target and ten nontarget trial pairs
reference = root / "reference_trials.txt"
reference.write_text(
    "".join(f"1 e{i} t{i}\n" for i in range(1, 11))
    + "".join(f"0 e{i} t{i}\n" for i in range(11, 21))
)

def scores(target_values, nontarget_values):
    lines = [f"{s} e{i} t{i}" for i, s in enumerate(target_values, start=1)]
    lines += [f"{s} e{i} t{i}" for i, s in enumerate(nontarget_values, start=11)]
    return "\n".join(lines) + "\n"

def day(d, hour):
    return datetime(2025, 9, d, hour, 0, tzinfo=timezone.utc)

service = ChallengeService(root / "store")
service.register_team("tortoise")
service.register_team("hare")
service.add_track(TrackConfig(
    track_id="verif-open",
    task="verification",
    reference_path=str(reference),
    quota_total=10,
    quota_per_day=2,
    challenge_deadline=day(3, 0),
))

# ## Day one
#
# The hare submits twice and hits the daily cap on the third try.
# A rejected attempt is still written to the log.

good = scores([0.7] * 8 + [0.3, 0.2], [0.5, 0.4] + [0.1] * 8)
better = scores([0.8] * 9 + [0.35], [0.5] + [0.1] * 9)

for payload in (good, better):
    record = service.submit("hare", "verif-open", payload, day(1, 9))
    print(f"{record.submission_id} {record.status}: "
          f"EER {100.0 * record.metrics['eer']:.1f}%, minDCF {record.metrics['min_dcf']:.4f}")

try:
    service.submit("hare", "verif-open", better, day(1, 15))
except QuotaExceededError as exc:
    print(f"third attempt refused ({exc.quota} quota), resets {exc.resets_at:%Y-%m-%d %H:%M} UTC")

# A malformed file burns budget: it was an evaluation attempt.
try:
    service.submit("tortoise", "verif-open", "0.9 e1 t1\n", day(1, 10))
except SubmissionInvalidError as exc:
    print(f"tortoise sent a partial file: {exc.record.reason[:60]}...")

service.submit("tortoise", "verif-open", good, day(1, 16))

# ## Day two and the board

service.submit("tortoise", "verif-open", better, day(2, 9))

print("\nchallenge leaderboard:")
for rank, entry in enumerate(service.leaderboard("verif-open"), start=1):
    print(f"  {rank}. {entry.team_id:<9} minDCF {entry.metrics['min_dcf']:.4f}  "
          f"EER {100.0 * entry.metrics['eer']:.1f}%  ({entry.submission_id})")

# ## After the deadline
#
# The challenge board freezes; later submissions only appear on the
# permanent one.

service.transition_phase("verif-open", day(3, 1))
service.submit("hare", "verif-open", scores([0.9] * 10, [0.1] * 10), day(3, 2))

frozen = service.leaderboard("verif-open", phase="challenge")
print(f"\nchallenge winner, frozen: {frozen[0].team_id} ({frozen[0].submission_id})")
open_board = service.leaderboard("verif-open", phase="permanent")
print(f"permanent leader:         {open_board[0].team_id} ({open_board[0].submission_id})")

# ## Nothing above is lost
#
# A fresh service over the same directory replays the log and agrees.

replayed = ChallengeService(root / "store")
replayed.register_team("tortoise")
replayed.register_team("hare")
replayed.add_track(TrackConfig(
    track_id="verif-open",
    task="verification",
    reference_path=str(reference),
    quota_total=10,
    quota_per_day=2,
    challenge_deadline=day(3, 0),
))
same = replayed.leaderboard("verif-open", phase="permanent") == open_board
print(f"\nreplayed leaderboard identical: {same}")
print(f"log lives in {root / 'store' / 'submissions.log'}")
