"""
Scoring a verification system end to end
========================================

Builds a small synthetic trial list, scores it with two imaginary
systems, and walks through the numbers the library reports for each.
"""

import numpy as np

from spkeval import (
    ScoredTrial,
    det_points,
    eer,
    error_profile,
    format_progression_table,
    min_dcf,
    progression_table,
)

rng = np.random.default_rng(7)

# ## A synthetic trial list
#
# 300 target trials (same speaker on both sides) and 700 nontarget
# trials. System one separates the classes by a full standard
# deviation; system two only by half of one.

def draw_scores(separation):
    trials = []
    for i in range(1000):
        label = 1 if i < 300 else 0
        mean = separation if label else 0.0
        trials.append(ScoredTrial(
            enroll_id=f"utt{i:04d}a",
            test_id=f"utt{i:04d}b",
            label=label,
            score=float(rng.normal(mean, 1.0)),
        ))
    return trials

system_one = draw_scores(2.0)
system_two = draw_scores(1.0)

# ## Error profile and the two headline metrics

profile = error_profile(system_one)
print(f"operating points swept: {len(profile.thresholds)}")
print(f"EER:    {100.0 * eer(profile):.3f}%")

result = min_dcf(profile)
print(f"minDCF: {result.value:.4f} at threshold {result.threshold:.4f}")

# The minimum cost depends on the assumed prior. A rarer target makes
# false alarms matter more and shifts the best threshold upward.
for p_tar in (0.05, 0.01):
    from spkeval import DcfParams
    r = min_dcf(profile, DcfParams(p_tar=p_tar))
    print(f"  p_tar={p_tar:<5}: minDCF {r.value:.4f} at {r.threshold:.3f}")

# ## A few DET curve points
#
# The full curve is one row per threshold; here every 40th point.

points = det_points(profile)
print("\n  p_fa      p_miss    threshold")
for p in points[::40]:
    print(f"  {p.p_fa:.6f}  {p.p_miss:.6f}  {p.threshold:9.4f}")

# ## Ranking the two systems side by side

rows = progression_table([("one", system_one), ("two", system_two)])
print()
print(format_progression_table(rows), end="")
