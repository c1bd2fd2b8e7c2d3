"""
Rendering of benchmark results: a human-readable summary table for stdout,
canonical JSON, and one flat score CSV per metric.
"""
from enum import Enum
from pathlib import Path
from typing import List, Optional

from qe_bench.core.benchmark import BenchmarkResult
from qe_bench.core.evaluation import CvReport
from qe_bench.utils.file_utils import dump_json, write_csv_rows, write_json

SCORE_CSV_HEADER = ("encoder", "config", "repeat", "fold", "score")


class OutputFormat(Enum):
    """Supported output formats"""
    TEXT = "text"   # Summary table (default)
    JSON = "json"   # Full nested report


def _num(value: Optional[float], spec: str = ".4f") -> str:
    return "n/a" if value is None else format(value, spec)


def _mean_std(mean: Optional[float], std: Optional[float]) -> str:
    if mean is None:
        return "n/a"
    return f"{mean:.4f} ± {std:.4f}"


class OutputFormatter:
    """Format benchmark results for the terminal and for report files"""

    @staticmethod
    def format(result: BenchmarkResult, format_type: OutputFormat = OutputFormat.TEXT) -> str:
        if format_type == OutputFormat.JSON:
            return OutputFormatter._to_json(result)
        return OutputFormatter._to_text(result)

    @staticmethod
    def _to_json(result: BenchmarkResult) -> str:
        return dump_json(result.to_dict())

    @staticmethod
    def _to_text(result: BenchmarkResult) -> str:
        lines: List[str] = []
        for metric, report in result.reports.items():
            lines.extend(OutputFormatter._metric_table(result, metric, report))
            lines.append("")
        if result.failures:
            lines.append(f"WARNING: {result.failures} fold evaluation(s) failed (excluded from means)")
        return "\n".join(lines).rstrip("\n") + "\n"

    @staticmethod
    def _metric_table(result: BenchmarkResult, metric: str, report: CvReport) -> List[str]:
        rows = {c.encoder: c for c in result.comparisons_for(metric)}
        header = ("encoder", "best config", f"{metric.upper()} mean ± std", "p-value", "P_Q", "rel. diff %")
        body = []
        for encoder in report.encoders:
            mean, std = report.best_stats(encoder)
            best = report.best_config.get(encoder) or "n/a"
            row = rows.get(encoder)
            if encoder == result.reference:
                tail = ("(reference)", "", "")
            elif row is None:
                tail = ("n/a", "n/a", "n/a")
            else:
                tail = (_num(row.p_value), _num(row.p_q, ".3f"), _num(row.relative_difference, "+.2f"))
            body.append((encoder, best, _mean_std(mean, std)) + tail)

        widths = [max(len(str(r[i])) for r in [header] + body) for i in range(len(header))]
        rule = "-" * (sum(widths) + 2 * (len(widths) - 1))

        def render(row) -> str:
            return "  ".join(str(cell).ljust(width) for cell, width in zip(row, widths)).rstrip()

        plan = report.plan
        lines = [
            f"Dataset: {report.dataset_id}   metric: {metric.upper()}   "
            f"CV: {plan.n_repeats}x{plan.n_folds}-fold   seed: {plan.seed}   reference: {result.reference}",
            rule,
            render(header),
            rule,
        ]
        lines.extend(render(r) for r in body)
        lines.append(rule)
        for encoder, row in rows.items():
            lines.append(f"{row.dataset}, {encoder} vs {row.reference}: p-value={_num(row.p_value)}, P_Q={_num(row.p_q, '.3f')}")
        return lines

    @staticmethod
    def report_paths(out: Path, metrics: List[str]) -> List[Path]:
        """JSON report path followed by one `<stem>.<metric>.csv` per metric."""
        out = Path(out)
        json_path = out if out.suffix == ".json" else out.with_suffix(".json")
        stem = json_path.with_suffix("")
        return [json_path] + [stem.with_name(f"{stem.name}.{metric}.csv") for metric in metrics]

    @staticmethod
    def write_reports(result: BenchmarkResult, out: Path) -> List[Path]:
        paths = OutputFormatter.report_paths(out, result.metrics)
        write_json(paths[0], result.to_dict())
        for path, report in zip(paths[1:], result.reports.values()):
            write_csv_rows(path, SCORE_CSV_HEADER, report.csv_rows())
        return paths
