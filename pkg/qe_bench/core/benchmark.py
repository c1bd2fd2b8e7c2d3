"""
Benchmark orchestration: cross-validate encoder families under one or more
metrics and compare each encoder against a reference encoder with the
Wilcoxon signed-rank test and the outperformance probability P_Q.
"""
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from qe_bench import __version__
from qe_bench.core.constants import DEFAULT_REFERENCE, METRICS
from qe_bench.core.dataset import Dataset
from qe_bench.core.errors import EvaluationError
from qe_bench.core.evaluation import CvPlan, CvReport, EncoderFamily, expand_configs, run_cv
from qe_bench.core.regression import ElasticNetSpec
from qe_bench.core.stats import PairedSample, outperformance_probability, wilcoxon_signed_rank
from qe_bench.core.types import BenchmarkReportDict, ComparisonDict
from qe_bench.utils.logger import get_project_logger

logger = get_project_logger(__name__)

TOOL_NAME = "qe-bench"


@dataclass(frozen=True)
class ComparisonRow:
    """Encoder vs reference on the best config of each; p_q is P(encoder scores lower)."""
    dataset: str
    encoder: str
    reference: str
    metric: str
    n_pairs: int
    statistic: Optional[float]
    p_value: Optional[float]
    p_q: Optional[float]
    relative_difference: Optional[float]

    def to_dict(self) -> ComparisonDict:
        return asdict(self)


def relative_difference(report: CvReport, encoder: str, reference: str) -> Optional[float]:
    """
    Percentage gap of best mean scores, positive when encoder beats reference.

    100 * (reference - encoder) / reference. None when either mean is missing
    or the reference mean is zero with a nonzero encoder mean.
    """
    enc_mean, _ = report.best_stats(encoder)
    ref_mean, _ = report.best_stats(reference)
    if enc_mean is None or ref_mean is None:
        return None
    if ref_mean == 0:
        return 0.0 if enc_mean == 0 else None
    return 100.0 * (ref_mean - enc_mean) / abs(ref_mean)


def compare_encoders(report: CvReport, encoder: str, reference: str) -> ComparisonRow:
    """Paired comparison over (repeat, fold) of the best configs; failed folds drop their pair."""
    for name in (encoder, reference):
        if name not in report.configs:
            raise EvaluationError(f"unknown encoder: {name}")
    a = report.paired_scores(encoder)
    b = report.paired_scores(reference)
    usable = np.isfinite(a) & np.isfinite(b)
    n_pairs = int(usable.sum())

    statistic = p_value = p_q = None
    if n_pairs:
        sample = PairedSample(a[usable] - b[usable])
        result = wilcoxon_signed_rank(sample)
        statistic, p_value = result.statistic, result.p_value
        p_q = outperformance_probability(sample)
    else:
        logger.warning(f"No usable folds to compare '{encoder}' with '{reference}' ({report.plan.metric})")

    return ComparisonRow(
        dataset=report.dataset_id,
        encoder=encoder,
        reference=reference,
        metric=report.plan.metric,
        n_pairs=n_pairs,
        statistic=statistic,
        p_value=p_value,
        p_q=p_q,
        relative_difference=relative_difference(report, encoder, reference),
    )


@dataclass
class BenchmarkResult:
    reference: str
    reports: Dict[str, CvReport]
    comparisons: List[ComparisonRow]
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def metrics(self) -> List[str]:
        return list(self.reports)

    @property
    def failures(self) -> int:
        return sum(r.failures for r in self.reports.values())

    def comparisons_for(self, metric: str) -> List[ComparisonRow]:
        return [c for c in self.comparisons if c.metric == metric]

    def to_dict(self) -> BenchmarkReportDict:
        return {
            "tool": TOOL_NAME,
            "version": __version__,
            "config": dict(self.config),
            "reports": {metric: report.to_dict() for metric, report in self.reports.items()},
            "comparisons": [c.to_dict() for c in self.comparisons],
            "failures": self.failures,
        }


def validate_benchmark(families: Sequence[EncoderFamily], metrics: Sequence[str], reference: str) -> List[str]:
    """Check everything a benchmark needs before any fitting; returns normalized metric names."""
    if not families:
        raise EvaluationError("at least one encoder is required")
    names = [f.name for f in families]
    if reference not in names:
        raise EvaluationError(f"unknown reference encoder: '{reference}' (encoders: {', '.join(names)})")
    normalized = []
    for metric in metrics:
        metric = str(metric).lower()
        if metric not in METRICS:
            raise EvaluationError(f"unknown metric: {metric!r} (expected one of {', '.join(METRICS)})")
        if metric not in normalized:
            normalized.append(metric)
    if not normalized:
        raise EvaluationError("at least one metric is required")
    for family in families:
        expand_configs(family)
    return normalized


def run_benchmark(
    data: Dataset,
    families: Sequence[EncoderFamily],
    model_spec: ElasticNetSpec,
    plan: CvPlan,
    metrics: Sequence[str] = ("mae",),
    reference: str = DEFAULT_REFERENCE,
    dataset_id: Optional[str] = None,
    workers: int = 1,
    config: Optional[Dict[str, Any]] = None,
) -> BenchmarkResult:
    """One cross-validation run per metric, then every encoder compared with the reference."""
    metrics = validate_benchmark(families, metrics, reference)
    dataset_id = dataset_id or data.name

    reports = {}
    comparisons = []
    for metric in metrics:
        report = run_cv(data, families, model_spec, replace(plan, metric=metric), dataset_id, workers)
        reports[metric] = report
        for family in families:
            if family.name != reference:
                comparisons.append(compare_encoders(report, family.name, reference))

    return BenchmarkResult(reference=reference, reports=reports, comparisons=comparisons, config=dict(config or {}))
