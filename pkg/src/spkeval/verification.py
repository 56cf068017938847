"""Verification metrics: error tradeoff sweep, EER, detection cost, DET curves.

Scores are similarities and the decision rule is accept iff
``score >= threshold``. Sweeping the threshold over the distinct score
values, plus a reject-all sentinel at ``+inf``, yields every achievable
operating point; each error rate is an exact integer count over its
class size, so equal rationals compare equal as floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.stats import norm

from .errors import UndefinedMetricError
from .trials import ScoredTrial


@dataclass(frozen=True)
class DcfParams:
    """Costs and target prior of the detection cost function."""

    c_miss: float = 1.0
    c_fa: float = 1.0
    p_tar: float = 0.05

    def __post_init__(self):
        if not (self.c_miss > 0 and self.c_fa > 0):
            raise ValueError("c_miss and c_fa must be positive")
        if not (0.0 < self.p_tar < 1.0):
            raise ValueError(f"p_tar must lie strictly between 0 and 1, got {self.p_tar!r}")


DEFAULT_DCF = DcfParams()


def dcf(p_miss: float, p_fa: float, params: DcfParams = DEFAULT_DCF) -> float:
    """Detection cost at one operating point.

    Parameters
    ----------
    p_miss, p_fa : float
        Miss and false-alarm rates in [0, 1].
    params : DcfParams
        Costs ``c_miss``, ``c_fa`` and target prior ``p_tar``.

    Returns
    -------
    float
        ``c_miss * p_miss * p_tar + c_fa * p_fa * (1 - p_tar)``.
    """
    return params.c_miss * p_miss * params.p_tar + params.c_fa * p_fa * (1.0 - params.p_tar)


class OperatingPoint(NamedTuple):
    threshold: float
    p_miss: float
    p_fa: float


@dataclass(frozen=True, eq=False)
class ErrorProfile:
    """All achievable (threshold, p_miss, p_fa) points of a score set.

    ``thresholds`` is strictly increasing and ends with ``+inf`` (reject
    everything); the first point accepts everything, so ``p_miss`` starts
    at 0 and climbs to 1 while ``p_fa`` falls from 1 to 0.
    """

    thresholds: np.ndarray
    p_miss: np.ndarray
    p_fa: np.ndarray
    n_target: int
    n_nontarget: int

    @classmethod
    def from_scores(
        cls,
        target_scores: Sequence[float] | np.ndarray,
        nontarget_scores: Sequence[float] | np.ndarray,
    ) -> "ErrorProfile":
        tgt = np.asarray(target_scores, dtype=float)
        non = np.asarray(nontarget_scores, dtype=float)
        if tgt.size == 0 or non.size == 0:
            raise UndefinedMetricError(
                "error profile needs at least one target and one non-target score"
            )
        if not (np.isfinite(tgt).all() and np.isfinite(non).all()):
            raise ValueError("scores must be finite")
        tgt = np.sort(tgt)
        non = np.sort(non)
        thresholds = np.unique(np.concatenate([tgt, non]))
        # accept iff score >= t: misses are targets strictly below t,
        # false alarms are non-targets at or above t
        miss_counts = np.searchsorted(tgt, thresholds, side="left")
        fa_counts = non.size - np.searchsorted(non, thresholds, side="left")
        thresholds = np.append(thresholds, np.inf)
        miss_counts = np.append(miss_counts, tgt.size)
        fa_counts = np.append(fa_counts, 0)
        return cls(
            thresholds=thresholds,
            p_miss=miss_counts / tgt.size,
            p_fa=fa_counts / non.size,
            n_target=int(tgt.size),
            n_nontarget=int(non.size),
        )

    @property
    def points(self) -> List[OperatingPoint]:
        return [
            OperatingPoint(float(t), float(m), float(f))
            for t, m, f in zip(self.thresholds, self.p_miss, self.p_fa)
        ]

    def __len__(self) -> int:
        return len(self.thresholds)


def _split_scores(scored_trials: Sequence[ScoredTrial]):
    labels = np.fromiter((t.label for t in scored_trials), dtype=bool, count=len(scored_trials))
    scores = np.fromiter((t.score for t in scored_trials), dtype=float, count=len(scored_trials))
    return scores[labels], scores[~labels]


def error_profile(scored_trials: Sequence[ScoredTrial]) -> ErrorProfile:
    """Sweep the threshold over a list of labeled, scored trials."""
    target, nontarget = _split_scores(scored_trials)
    return ErrorProfile.from_scores(target, nontarget)


def eer(profile: ErrorProfile) -> float:
    """Equal error rate of a profile.

    An operating point with ``p_miss == p_fa`` is returned as is.
    Otherwise the rate is read off the straight line between the two
    adjacent points where ``p_miss - p_fa`` changes sign; because
    ``p_miss`` is non-decreasing and ``p_fa`` non-increasing in the
    threshold, that crossing exists and is unique.
    """
    diff = profile.p_miss - profile.p_fa
    exact = np.flatnonzero(diff == 0.0)
    if exact.size:
        return float(profile.p_miss[exact[0]])
    i = int(np.flatnonzero(diff > 0.0)[0])
    m0, m1 = float(profile.p_miss[i - 1]), float(profile.p_miss[i])
    f0, f1 = float(profile.p_fa[i - 1]), float(profile.p_fa[i])
    alpha = (f0 - m0) / ((m1 - m0) + (f0 - f1))
    return m0 + alpha * (m1 - m0)


@dataclass(frozen=True)
class DcfResult:
    value: float
    threshold: float


def _costs(profile: ErrorProfile, params: DcfParams) -> np.ndarray:
    return params.c_miss * profile.p_miss * params.p_tar + (
        params.c_fa * profile.p_fa * (1.0 - params.p_tar)
    )


def min_dcf(profile: ErrorProfile, params: DcfParams = DEFAULT_DCF) -> DcfResult:
    """Minimum detection cost over all operating points.

    Ties resolve to the smallest threshold. The minimum can never exceed
    ``min(p_tar * c_miss, (1 - p_tar) * c_fa)``: rejecting or accepting
    everything already achieves that cost.
    """
    costs = _costs(profile, params)
    best = int(np.argmin(costs))
    return DcfResult(value=float(costs[best]), threshold=float(profile.thresholds[best]))


@dataclass(frozen=True)
class DetPoint:
    threshold: float
    p_fa: float
    p_miss: float
    x: float
    y: float
    is_min_dcf: bool


def det_points(
    profile: ErrorProfile,
    probit: bool = False,
    params: DcfParams = DEFAULT_DCF,
) -> List[DetPoint]:
    """DET curve points, one per operating point, min-cost point flagged.

    With ``probit=True`` the plot coordinates are the standard normal
    quantiles of the rates, each rate first clamped to
    ``[1/(2n), 1 - 1/(2n)]`` for its class size ``n`` so the transform
    stays finite at 0 and 1.
    """
    if probit:
        def transform(rates: np.ndarray, n: int) -> np.ndarray:
            lo, hi = 1.0 / (2 * n), 1.0 - 1.0 / (2 * n)
            return norm.ppf(np.clip(rates, lo, hi))

        xs = transform(profile.p_fa, profile.n_nontarget)
        ys = transform(profile.p_miss, profile.n_target)
    else:
        xs = profile.p_fa
        ys = profile.p_miss
    best = int(np.argmin(_costs(profile, params)))
    return [
        DetPoint(
            threshold=float(profile.thresholds[i]),
            p_fa=float(profile.p_fa[i]),
            p_miss=float(profile.p_miss[i]),
            x=float(xs[i]),
            y=float(ys[i]),
            is_min_dcf=(i == best),
        )
        for i in range(len(profile))
    ]


def det_csv(
    profile: ErrorProfile,
    probit: bool = False,
    params: DcfParams = DEFAULT_DCF,
) -> str:
    """CSV rendering of the DET curve, one row per operating point."""
    header = "p_fa,p_miss,threshold,is_min_dcf"
    if probit:
        header += ",probit_p_fa,probit_p_miss"
    rows = [header]
    for pt in det_points(profile, probit=probit, params=params):
        row = f"{pt.p_fa!r},{pt.p_miss!r},{pt.threshold!r},{int(pt.is_min_dcf)}"
        if probit:
            row += f",{pt.x!r},{pt.y!r}"
        rows.append(row)
    return "\n".join(rows) + "\n"
