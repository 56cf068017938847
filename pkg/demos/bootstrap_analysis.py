"""
How trustworthy is a reported EER?
==================================

A score model where the right answer is known exactly: target scores
uniform on [0.8, 1.8], nontarget scores uniform on [0, 1]. The densities
cross so that the equal error rate is exactly 10%. Resampling the trial
list with replacement shows how far a finite list can stray.
"""

import numpy as np

from spkeval import ScoredTrial, bootstrap_ci, ci_width_stats, eer, error_profile

def corpus(rng, n_per_class):
    trials = []
    for i, s in enumerate(rng.uniform(0.8, 1.8, n_per_class)):
        trials.append(ScoredTrial(enroll_id=f"a{i}", test_id=f"b{i}", label=1, score=float(s)))
    for i, s in enumerate(rng.uniform(0.0, 1.0, n_per_class)):
        trials.append(ScoredTrial(enroll_id=f"c{i}", test_id=f"d{i}", label=0, score=float(s)))
    return trials

# ## Interval width shrinks with the square root of the list size

print("trials/class  point EER   95% interval")
for n in (250, 1000, 4000, 16000):
    trials = corpus(np.random.default_rng(n), n)
    ci = bootstrap_ci(trials, metric="eer", n_resamples=1000, seed=0)
    print(f"  {n:>10}  {100.0 * ci.point:7.3f}%   "
          f"[{100.0 * ci.low:6.3f}%, {100.0 * ci.high:6.3f}%]")

# ## The same seed always gives the same interval
#
# Every resample index owns its own child random stream, so the result
# does not depend on how many worker threads computed it.

trials = corpus(np.random.default_rng(99), 2000)
serial = bootstrap_ci(trials, n_resamples=500, seed=42, workers=1)
threaded = bootstrap_ci(trials, n_resamples=500, seed=42, workers=4)
print(f"\nserial   [{serial.low:.10f}, {serial.high:.10f}]")
print(f"threaded [{threaded.low:.10f}, {threaded.high:.10f}]")
print(f"bit-identical: {(serial.low, serial.high) == (threaded.low, threaded.high)}")

# ## Aggregate width over many independent draws

intervals = []
for rep in range(20):
    sample = corpus(np.random.default_rng(1000 + rep), 2000)
    intervals.append(bootstrap_ci(sample, n_resamples=300, seed=rep))
stats = ci_width_stats(intervals)
print(f"\nrelative width over {stats.n_used} draws: "
      f"min {stats.minimum:.3f}, mean {stats.mean:.3f}, max {stats.maximum:.3f}")

covered = sum(ci.low <= 0.10 <= ci.high for ci in intervals)
print(f"intervals containing the true 10%: {covered}/20")
