"""
Paired comparison statistics for cross-validated scores.

- wilcoxon_signed_rank: two-sided signed-rank test on paired score differences,
  exact (tie-aware) for up to WILCOXON_EXACT_MAX_N nonzero differences,
  normal approximation with tie and continuity correction above that.
- outperformance_probability: mass of a Gaussian KDE of the differences on the
  negative half-line, i.e. the probability that A scores lower than B.
"""
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from qe_bench.core.constants import WILCOXON_EXACT_MAX_N
from qe_bench.core.errors import StatsError


@dataclass(frozen=True)
class PairedSample:
    """Score differences A - B aligned by (repeat, fold)."""
    diffs: np.ndarray

    def __post_init__(self):
        diffs = np.asarray(self.diffs, dtype=float).ravel()
        if diffs.size == 0:
            raise StatsError("empty sample")
        if not np.all(np.isfinite(diffs)):
            raise StatsError("non-finite input")
        diffs.flags.writeable = False
        object.__setattr__(self, "diffs", diffs)

    @classmethod
    def from_scores(cls, scores_a: Sequence[float], scores_b: Sequence[float]) -> "PairedSample":
        a = np.asarray(scores_a, dtype=float)
        b = np.asarray(scores_b, dtype=float)
        if a.shape != b.shape:
            raise StatsError(f"paired scores differ in length: {a.size} vs {b.size}")
        return cls(a - b)


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    n_used: int
    method: str
    degenerate: bool = False


def _as_sample(diffs) -> PairedSample:
    return diffs if isinstance(diffs, PairedSample) else PairedSample(diffs)


def exact_null_distribution(doubled_ranks: np.ndarray) -> np.ndarray:
    """
    Null probability of each value of 2*T+.

    doubled_ranks are the (possibly half-integer) ranks times two, so ties are
    handled exactly. Entry k is P(2*T+ == k); the entries sum to one and stay
    finite for any number of ranks.
    """
    total = int(doubled_ranks.sum())
    probs = np.zeros(total + 1, dtype=np.float64)
    probs[0] = 1.0
    reach = 0
    for r in doubled_ranks:
        r = int(r)
        moved = 0.5 * probs[:reach + 1]
        probs[:reach + 1] = moved
        probs[r:reach + r + 1] += moved
        reach += r
    return probs


def _exact_p_value(doubled_ranks: np.ndarray, doubled_w: int) -> float:
    probs = exact_null_distribution(doubled_ranks)
    lower_tail = probs[:doubled_w + 1].sum() / probs.sum()
    return float(min(1.0, 2.0 * lower_tail))


def _normal_p_value(abs_diffs: np.ndarray, w: float) -> float:
    n = abs_diffs.size
    mean = n * (n + 1) / 4.0
    _, tie_sizes = np.unique(abs_diffs, return_counts=True)
    variance = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
    if variance <= 0:
        return 1.0
    # W is the smaller rank sum, so the continuity correction moves it toward the mean
    z = min(w - mean + 0.5, 0.0) / np.sqrt(variance)
    return float(min(1.0, 2.0 * sps.norm.cdf(z)))


def wilcoxon_signed_rank(diffs, method: str = "auto") -> WilcoxonResult:
    """
    Two-sided Wilcoxon signed-rank test; zero differences are dropped.

    Args:
        diffs: PairedSample or sequence of differences
        method: "auto" (exact up to WILCOXON_EXACT_MAX_N nonzero diffs), "exact" or "normal"

    Returns:
        WilcoxonResult with W = min(positive rank sum, negative rank sum). When
        every difference is zero the result is degenerate with p_value 1.0.
    """
    if method not in ("auto", "exact", "normal"):
        raise StatsError(f"unknown method: {method!r}")
    sample = _as_sample(diffs)
    nonzero = sample.diffs[sample.diffs != 0]
    if nonzero.size == 0:
        return WilcoxonResult(statistic=0.0, p_value=1.0, n_used=0, method="degenerate", degenerate=True)

    abs_diffs = np.abs(nonzero)
    ranks = sps.rankdata(abs_diffs, method="average")
    r_plus = float(ranks[nonzero > 0].sum())
    r_minus = float(ranks[nonzero < 0].sum())
    w = min(r_plus, r_minus)

    use_exact = method == "exact" or (method == "auto" and nonzero.size <= WILCOXON_EXACT_MAX_N)
    if use_exact:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        p_value = _exact_p_value(doubled, int(round(2.0 * w)))
        used = "exact"
    else:
        p_value = _normal_p_value(abs_diffs, w)
        used = "normal"
    return WilcoxonResult(statistic=w, p_value=p_value, n_used=int(nonzero.size), method=used)


def scott_bandwidth(values: np.ndarray) -> float:
    """h = sigma * n^(-1/5) with sigma = min(std, IQR / 1.349) (std alone when the IQR is zero)."""
    n = values.size
    std = float(np.std(values, ddof=1))
    iqr_sigma = float(sps.iqr(values)) / 1.349
    sigma = min(std, iqr_sigma) if iqr_sigma > 0 else std
    return sigma * n ** (-0.2)


def outperformance_probability(diffs) -> float:
    """
    Probability that A outperforms B (difference below zero) under a Gaussian KDE.

    Differences are score_A - score_B for a lower-is-better metric. The KDE
    mass below zero is the mixture CDF: mean_i Phi((0 - d_i) / h).
    With fewer than two differences or zero variance the common sign decides
    (1.0 negative, 0.0 positive, 0.5 zero).
    """
    sample = _as_sample(diffs)
    values = sample.diffs
    if values.size < 2 or np.all(values == values[0]):
        centre = float(values[0]) if values.size == 1 else float(values.mean())
        if centre < 0:
            return 1.0
        if centre > 0:
            return 0.0
        return 0.5
    h = scott_bandwidth(values)
    return float(np.mean(sps.norm.cdf(-values / h)))
