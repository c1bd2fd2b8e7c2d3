"""
Preset experiment groups of the encoder evaluation protocol.

- encoders: every built-in encoder under MAE against the target encoder
- metric: quantile vs target encoder under MAE and MSE
- summary: summary (quartiles) vs quantile vs target encoder under MAE

Run on the synthetic Cauchy dataset:

    python -m qe_bench.research.experiments --experiment all --n 5000 --round 0 --out reports/
"""
import argparse
import sys
from pathlib import Path
from typing import Dict, List, Optional

from qe_bench.core.benchmark import BenchmarkResult, run_benchmark
from qe_bench.core.constants import DEFAULT_SEED
from qe_bench.core.dataset import Dataset
from qe_bench.core.errors import QEBenchError
from qe_bench.core.evaluation import CvPlan
from qe_bench.core.output_formatter import OutputFormat, OutputFormatter
from qe_bench.core.regression import ElasticNetSpec
from qe_bench.core.synthetic import CauchyConfig, generate_cauchy_dataset
from qe_bench.utils.config_manager import default_families
from qe_bench.utils.logger import get_project_logger

logger = get_project_logger(__name__)

ENCODER_COMPARISON = ("quantile", "target", "m_estimate", "summary", "ordinal")
METRIC_DEPENDENCE = ("quantile", "target")
SUMMARY_COMPARISON = ("summary", "quantile", "target")


def _run(data: Dataset, names, metrics, model_spec: ElasticNetSpec, plan: CvPlan, workers: int) -> BenchmarkResult:
    families = default_families(names)
    config = {"encoders": list(names), "metrics": list(metrics), "seed": plan.seed,
              "cv": {"folds": plan.n_folds, "repeats": plan.n_repeats}}
    return run_benchmark(data, families, model_spec, plan, metrics=metrics, reference="target",
                         dataset_id=data.name, workers=workers, config=config)


def run_encoder_comparison(data: Dataset, model_spec: ElasticNetSpec = ElasticNetSpec(),
                           plan: CvPlan = CvPlan(), workers: int = 1) -> BenchmarkResult:
    """All encoders, MAE, target encoder as reference."""
    return _run(data, ENCODER_COMPARISON, ("mae",), model_spec, plan, workers)


def run_metric_dependence(data: Dataset, model_spec: ElasticNetSpec = ElasticNetSpec(),
                          plan: CvPlan = CvPlan(), workers: int = 1) -> BenchmarkResult:
    """Quantile vs target encoder under both metrics; compare relative differences per metric."""
    return _run(data, METRIC_DEPENDENCE, ("mae", "mse"), model_spec, plan, workers)


def run_summary_comparison(data: Dataset, model_spec: ElasticNetSpec = ElasticNetSpec(),
                           plan: CvPlan = CvPlan(), workers: int = 1) -> BenchmarkResult:
    """Summary encoder with quartiles against the single quantile and target encoders."""
    return _run(data, SUMMARY_COMPARISON, ("mae",), model_spec, plan, workers)


def relative_differences(result: BenchmarkResult, encoder: str = "quantile") -> Dict[str, Optional[float]]:
    """Relative difference (%) of one encoder against the reference, keyed by metric."""
    return {c.metric: c.relative_difference for c in result.comparisons if c.encoder == encoder}


EXPERIMENTS = {
    "encoders": run_encoder_comparison,
    "metric": run_metric_dependence,
    "summary": run_summary_comparison,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = argparse.ArgumentParser(description="Run preset encoder experiments on synthetic Cauchy data")
    parser.add_argument("--experiment", choices=["all"] + list(EXPERIMENTS), default="all")
    parser.add_argument("--n", type=int, default=5000, help="Synthetic rows (default: 5000)")
    parser.add_argument("--round", type=int, default=0, help="Rounding decimals (default: 0)")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", type=Path, default=Path("reports"), help="Output directory")
    args = parser.parse_args(argv)

    names = list(EXPERIMENTS) if args.experiment == "all" else [args.experiment]
    try:
        data = generate_cauchy_dataset(CauchyConfig(n_rows=args.n, seed=args.seed, rounding_decimals=args.round))
        plan = CvPlan(seed=args.seed)
        for name in names:
            print("=" * 60)
            print(f"Experiment: {name}")
            print("=" * 60)
            result = EXPERIMENTS[name](data, ElasticNetSpec(), plan, args.workers)
            sys.stdout.write(OutputFormatter.format(result, OutputFormat.TEXT))
            if name == "metric":
                for metric, diff in relative_differences(result).items():
                    shown = "n/a" if diff is None else f"{diff:+.2f}%"
                    print(f"quantile vs target ({metric.upper()}): {shown}")
            for path in OutputFormatter.write_reports(result, args.out / f"{data.name}_{name}.json"):
                logger.info(f"Wrote {path}")
    except (QEBenchError, OSError) as e:
        logger.error(str(e))
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
