"""
Command-line driver: synthetic data generation, encoder fit/transform and
benchmark runs.

    qe-bench synth --n 1000 --round 0 --seed 7 --out cauchy.csv
    qe-bench encode --train train.csv --apply test.csv --cat country --target salary --encoder quantile --p 0.5 --m 0 --out enc.csv
    qe-bench benchmark --config config/benchmark_cauchy.json --out reports/cauchy.json

Exit codes: 0 success, 1 fatal error (invalid configuration, bad input, I/O).
"""
import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

from qe_bench import __version__
from qe_bench.core.benchmark import run_benchmark
from qe_bench.core.constants import DEFAULT_FAMILIES
from qe_bench.core.dataset import load_csv, write_csv
from qe_bench.core.encoders import EncoderKind, FittedEncoder, fit_encoder, spec_from_values
from qe_bench.core.errors import ConfigError, QEBenchError
from qe_bench.core.output_formatter import OutputFormat, OutputFormatter
from qe_bench.core.synthetic import generate_cauchy_dataset
from qe_bench.utils.config_manager import ConfigManager
from qe_bench.utils.file_utils import atomic_write
from qe_bench.utils.logger import configure_project_logging, get_project_logger, resolve_level

logger = get_project_logger(__name__)


def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run document (flags override its values)")
    common.add_argument("--seed", type=int, help="Random seed (default: QEB_SEED or 0)")
    common.add_argument("--out", type=Path, help="Output path")
    common.add_argument("--log-level", help="Logging level (default: QEB_LOG_LEVEL or INFO)")

    schema = argparse.ArgumentParser(add_help=False)
    schema.add_argument("--cat", help="Categorical columns, comma-separated")
    schema.add_argument("--num", help="Numeric pass-through columns, comma-separated")
    schema.add_argument("--target", help="Target column")

    parser = argparse.ArgumentParser(
        prog="qe-bench",
        description="Quantile target encoding and encoder benchmarks for regression",
        formatter_class=argparse.RawTextHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", parents=[common], help="Generate the synthetic Cauchy dataset")
    synth.add_argument("--n", type=int, help="Number of rows (default: 5000)")
    synth.add_argument("--round", type=int, help="Round features to D decimals before labelling")

    encode = sub.add_parser("encode", parents=[common, schema], help="Fit an encoder and transform a CSV")
    encode.add_argument("--train", type=Path, help="Training CSV the encoder is fit on")
    encode.add_argument("--apply", type=Path, help="CSV to transform (default: the training CSV)")
    encode.add_argument("--encoder", choices=[k.value for k in EncoderKind],
                        help="Encoder kind (default: the config's first encoder, else quantile)")
    encode.add_argument("--p", type=float, help="Quantile level for the quantile encoder")
    encode.add_argument("--m", type=float, help="Regularization strength m")
    encode.add_argument("--quantiles", type=_floats, help="Quantile levels for the summary encoder, e.g. 0.25,0.5,0.75")
    encode.add_argument("--dump-encoder", type=Path, help="Write the fitted encoder as JSON")
    encode.add_argument("--load-encoder", type=Path, help="Re-use a previously dumped encoder instead of fitting")

    bench = sub.add_parser("benchmark", parents=[common, schema], help="Cross-validate encoders and compare them")
    bench.add_argument("--data", type=Path, help="Schema-described CSV (default: synthetic Cauchy data)")
    bench.add_argument("--n", type=int, help="Rows of synthetic data")
    bench.add_argument("--round", type=int, help="Rounding decimals of synthetic data")
    bench.add_argument("--metric", help="mae, mse or a comma-separated list")
    bench.add_argument("--folds", type=int, help="Folds per repeat (default: 4)")
    bench.add_argument("--repeats", type=int, help="Repeats (default: 3)")
    bench.add_argument("--encoder", help=f"Encoders, comma-separated (known: {', '.join(DEFAULT_FAMILIES)})")
    bench.add_argument("--reference", help="Reference encoder for p-value and P_Q (default: target)")
    bench.add_argument("--workers", type=int, help="Parallel fold evaluations (default: QEB_WORKERS or 1)")
    return parser


def _overrides(args: argparse.Namespace, keys) -> Dict[str, Any]:
    values = {}
    for key in keys:
        value = getattr(args, key, None)
        values[key] = str(value) if isinstance(value, Path) else value
    return values


def _load_document(args: argparse.Namespace, manager: ConfigManager) -> Optional[Dict[str, Any]]:
    return manager.load_document(args.config) if args.config else None


def cmd_synth(args: argparse.Namespace, manager: ConfigManager) -> int:
    if args.out is None:
        raise ConfigError("synth needs --out")
    config = manager.resolve(_load_document(args, manager), _overrides(args, ("seed", "n", "round")))
    if config.dataset.synthetic is None:
        raise ConfigError("synth needs a synthetic dataset configuration")
    dataset = generate_cauchy_dataset(config.dataset.synthetic, name=args.out.stem)
    write_csv(dataset, args.out)
    cardinality = dataset.cardinality()
    print(f"Wrote {dataset.n_rows} rows to {args.out}")
    print("Cardinality: " + ", ".join(f"K({name})={k}" for name, k in cardinality.items()))
    return 0


def cmd_encode(args: argparse.Namespace, manager: ConfigManager) -> int:
    if args.out is None:
        raise ConfigError("encode needs --out")
    overrides = _overrides(args, ("train", "cat", "num", "target", "encoder", "m", "p", "quantiles", "seed"))
    config = manager.resolve_encode(_load_document(args, manager), overrides)
    categorical, numeric = list(config.categorical), list(config.numeric)
    if not categorical or not config.target:
        raise ConfigError("encode needs --cat and --target")

    if args.load_encoder:
        encoder = FittedEncoder.from_dict(json.loads(args.load_encoder.read_text(encoding="utf-8")))
        logger.info(f"Loaded {encoder.kind.value} encoder from {args.load_encoder}")
    else:
        if config.train is None:
            raise ConfigError("encode needs --train (or --load-encoder)")
        train = load_csv(config.train, categorical, config.target, numeric)
        spec = spec_from_values(config.kind, m=config.m, p=config.p, quantiles=config.quantiles, seed=config.seed)
        encoder = fit_encoder(config.kind, train, categorical, spec)
        logger.info(f"Fitted {encoder.kind.value} encoder on {train.n_rows} rows of {config.train}")

    apply_path = args.apply or config.train
    if apply_path is None:
        raise ConfigError("encode needs --apply when the encoder is loaded")
    data = load_csv(apply_path, categorical, config.target, numeric)
    unseen = encoder.count_unseen(data)
    total_unseen = sum(unseen.values())
    if total_unseen:
        detail = ", ".join(f"{column}={count}" for column, count in unseen.items() if count)
        logger.warning(f"{total_unseen} unseen category value(s) encoded with the global statistic ({detail})")

    write_csv(encoder.transform(data), args.out)
    if args.dump_encoder:
        with atomic_write(args.dump_encoder) as f:
            f.write(encoder.to_json())
    print(f"Wrote {data.n_rows} encoded rows to {args.out} ({', '.join(encoder.output_names)})")
    if total_unseen:
        print(f"Warnings: {total_unseen} unseen category value(s)")
    return 0


def cmd_benchmark(args: argparse.Namespace, manager: ConfigManager) -> int:
    overrides = _overrides(args, ("seed", "out", "metric", "folds", "repeats", "encoder", "reference",
                                  "data", "cat", "num", "target", "n", "round", "workers"))
    config = manager.resolve(_load_document(args, manager), overrides)
    data = config.dataset.load()
    result = run_benchmark(
        data,
        config.encoders,
        config.model,
        config.plan,
        metrics=config.metrics,
        reference=config.reference,
        dataset_id=config.dataset.to_dict()["name"],
        workers=config.workers,
        config=config.to_dict(),
    )
    sys.stdout.write(OutputFormatter.format(result, OutputFormat.TEXT))
    out = Path(config.out) if config.out else Path("reports") / f"{data.name}.json"
    paths = OutputFormatter.write_reports(result, out)
    for path in paths:
        logger.info(f"Wrote {path}")
    return 0


COMMANDS = {
    "synth": cmd_synth,
    "encode": cmd_encode,
    "benchmark": cmd_benchmark,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        manager = ConfigManager()
        configure_project_logging(resolve_level(args.log_level or manager.get("QEB_LOG_LEVEL")), manager.get("QEB_LOG_DIR"))
        return COMMANDS[args.command](args, manager)
    except (QEBenchError, OSError) as e:
        logger.error(str(e))
        return 1


if __name__ == "__main__":
    sys.exit(main())
