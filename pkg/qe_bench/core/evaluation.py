"""
Repeated k-fold cross-validation of encoder grids under an elastic-net model.

For every (encoder config, repeat, fold) the encoder is fit on the training
rows only, both splits are transformed, the model is fit on the training
split and scored on the test split. Failures are recorded per fold and never
abort the run.
"""
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from qe_bench.core.constants import (
    DEFAULT_FOLDS,
    DEFAULT_METRIC,
    DEFAULT_REPEATS,
    DEFAULT_SEED,
    METRICS,
)
from qe_bench.core.dataset import Dataset
from qe_bench.core.encoders import (
    EncoderKind,
    EncoderSpec,
    FittedEncoder,
    MeanSpec,
    OrdinalSpec,
    QuantileSpec,
    SummarySpec,
    fit_encoder,
    format_level,
    spec_to_label,
)
from qe_bench.core.errors import EvaluationError, QEBenchError
from qe_bench.core.regression import ElasticNetSpec, LinearModel, fit_elastic_net, predict
from qe_bench.core.types import CvReportDict, EncoderReportDict
from qe_bench.utils.logger import get_project_logger
from qe_bench.utils.rng import RNG_VERSION, make_rng

try:
    from tqdm import tqdm
except ImportError:
    tqdm = None

logger = get_project_logger(__name__)


# ----------------------------------------------------------------------------
# Metrics
# ----------------------------------------------------------------------------

def _paired_vectors(y_true, y_pred) -> Tuple[np.ndarray, np.ndarray]:
    a = np.asarray(y_true, dtype=float).ravel()
    b = np.asarray(y_pred, dtype=float).ravel()
    if a.size != b.size:
        raise EvaluationError(f"length mismatch: {a.size} vs {b.size}")
    if a.size == 0:
        raise EvaluationError("empty input")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise EvaluationError("non-finite input")
    return a, b


def mae(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """Mean absolute error."""
    a, b = _paired_vectors(y_true, y_pred)
    return float(np.mean(np.abs(a - b)))


def mse(y_true: Sequence[float], y_pred: Sequence[float]) -> float:
    """Mean squared error."""
    a, b = _paired_vectors(y_true, y_pred)
    return float(np.mean((a - b) ** 2))


METRIC_FUNCTIONS: Dict[str, Callable[[Sequence[float], Sequence[float]], float]] = {
    "mae": mae,
    "mse": mse,
}


# ----------------------------------------------------------------------------
# Plans and grids
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class CvPlan:
    n_folds: int = DEFAULT_FOLDS
    n_repeats: int = DEFAULT_REPEATS
    seed: int = DEFAULT_SEED
    metric: str = DEFAULT_METRIC

    def __post_init__(self):
        metric = str(self.metric).lower()
        if metric not in METRICS:
            raise EvaluationError(f"unknown metric: {self.metric!r} (expected one of {', '.join(METRICS)})")
        if int(self.n_folds) != self.n_folds or self.n_folds < 2:
            raise EvaluationError(f"n_folds must be an integer >= 2, got {self.n_folds!r}")
        if int(self.n_repeats) != self.n_repeats or self.n_repeats < 1:
            raise EvaluationError(f"n_repeats must be an integer >= 1, got {self.n_repeats!r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise EvaluationError(f"seed must be a non-negative integer, got {self.seed!r}")
        object.__setattr__(self, "metric", metric)


@dataclass(frozen=True)
class GridSpec:
    """
    Hyperparameter grid of one encoder family.

    p_values holds probabilities for the quantile encoder and quantile-level
    lists for the summary encoder. alpha_values, when given, crosses the grid
    with elastic-net alpha values.
    """
    m_values: Tuple[float, ...] = ()
    p_values: Tuple[Any, ...] = ()
    alpha_values: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True)
class EncoderFamily:
    name: str
    kind: EncoderKind
    grid: GridSpec = field(default_factory=GridSpec)

    def __post_init__(self):
        try:
            object.__setattr__(self, "kind", EncoderKind(self.kind))
        except ValueError:
            raise EvaluationError(f"unknown encoder kind: {self.kind!r}")


@dataclass(frozen=True)
class EncoderConfig:
    """One grid point: encoder spec plus an optional alpha override."""
    family: str
    kind: EncoderKind
    spec: EncoderSpec
    alpha: Optional[float] = None

    @property
    def label(self) -> str:
        label = spec_to_label(self.spec)
        if self.alpha is not None:
            label += f",alpha={format_level(self.alpha)}"
        return label

    def model_spec(self, base: ElasticNetSpec) -> ElasticNetSpec:
        return base if self.alpha is None else replace(base, alpha=self.alpha)


def _encoder_specs(family: EncoderFamily) -> List[EncoderSpec]:
    grid = family.grid
    kind = family.kind
    if kind == EncoderKind.ORDINAL:
        return [OrdinalSpec()]
    m_values = tuple(grid.m_values) or ((0.0,) if kind == EncoderKind.TARGET_MEAN else ())
    if not m_values:
        raise EvaluationError(f"encoder family '{family.name}' has no m values")
    if kind in (EncoderKind.TARGET_MEAN, EncoderKind.M_ESTIMATE_MEAN):
        return [MeanSpec(m=m) for m in m_values]
    if not grid.p_values:
        raise EvaluationError(f"encoder family '{family.name}' has no quantile values")
    if kind == EncoderKind.QUANTILE:
        return [QuantileSpec(p=p, m=m) for m in m_values for p in grid.p_values]
    return [SummarySpec(quantiles=tuple(levels), m=m) for m in m_values for levels in grid.p_values]


def expand_configs(family: EncoderFamily) -> List[EncoderConfig]:
    """Grid points of a family in a fixed order (m outer, p inner, alpha innermost)."""
    specs = _encoder_specs(family)
    alphas = family.grid.alpha_values
    if alphas is None:
        return [EncoderConfig(family.name, family.kind, spec) for spec in specs]
    if not alphas:
        raise EvaluationError(f"encoder family '{family.name}' has an empty alpha grid")
    return [EncoderConfig(family.name, family.kind, spec, float(a)) for spec in specs for a in alphas]


# ----------------------------------------------------------------------------
# Folds
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    repeat: int
    fold: int
    train: np.ndarray
    test: np.ndarray


def make_folds(n: int, plan: CvPlan) -> List[Split]:
    """
    Repeated k-fold partition of rows 0..n-1.

    Each repeat shuffles with its own seeded stream; test sets within a repeat
    are disjoint, cover every row once and differ in size by at most one.
    """
    if n < plan.n_folds:
        raise EvaluationError(f"cannot split {n} rows into {plan.n_folds} folds")
    splits = []
    for repeat in range(plan.n_repeats):
        order = make_rng(plan.seed, stream=repeat).permutation(n)
        parts = np.array_split(order, plan.n_folds)
        for fold, part in enumerate(parts):
            in_test = np.zeros(n, dtype=bool)
            in_test[part] = True
            splits.append(Split(
                repeat=repeat,
                fold=fold,
                train=np.flatnonzero(~in_test),
                test=np.flatnonzero(in_test),
            ))
    return splits


# ----------------------------------------------------------------------------
# Per-split evaluation
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class SplitOutcome:
    encoder: FittedEncoder
    model: LinearModel
    predictions: np.ndarray
    score: float


def evaluate_split(
    train: Dataset,
    test: Dataset,
    config: EncoderConfig,
    model_spec: ElasticNetSpec,
    metric: str,
    columns: Optional[Sequence[str]] = None,
) -> SplitOutcome:
    """Fit the encoder and model on train, score on test."""
    columns = list(train.categorical) if columns is None else list(columns)
    encoder = fit_encoder(config.kind, train, columns, config.spec)
    model = fit_elastic_net(encoder.transform(train).design_matrix(), train.target, config.model_spec(model_spec))
    predictions = predict(model, encoder.transform(test).design_matrix())
    score = METRIC_FUNCTIONS[metric](test.target, predictions)
    if not math.isfinite(score):
        raise EvaluationError("non-finite score")
    return SplitOutcome(encoder=encoder, model=model, predictions=predictions, score=score)


# ----------------------------------------------------------------------------
# Report
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class FoldScore:
    encoder: str
    config: str
    repeat: int
    fold: int
    score: Optional[float]
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _mean_std(values: Sequence[float]) -> Tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return float(np.mean(arr)), std


@dataclass
class CvReport:
    """
    Scores of every (encoder, config, repeat, fold) plus per-config aggregates.

    scores is ordered by encoder (family order), config (grid order), repeat, fold.
    """
    dataset_id: str
    plan: CvPlan
    model_spec: ElasticNetSpec
    kinds: Dict[str, str]
    configs: Dict[str, List[str]]
    scores: List[FoldScore]
    metadata: Dict[str, Any] = field(default_factory=dict)
    best_config: Dict[str, Optional[str]] = field(init=False)

    def __post_init__(self):
        self.best_config = {}
        for encoder, labels in self.configs.items():
            best, best_mean = None, math.inf
            for label in labels:
                mean, _ = self.config_stats(encoder, label)
                if mean is not None and mean < best_mean:
                    best, best_mean = label, mean
            self.best_config[encoder] = best

    @property
    def encoders(self) -> List[str]:
        return list(self.configs)

    @property
    def failures(self) -> int:
        return sum(1 for s in self.scores if not s.ok)

    def fold_scores(self, encoder: str, config: str) -> List[FoldScore]:
        return [s for s in self.scores if s.encoder == encoder and s.config == config]

    def config_stats(self, encoder: str, config: str) -> Tuple[Optional[float], Optional[float]]:
        """(mean, std) over successful folds; (None, None) when every fold failed."""
        return _mean_std([s.score for s in self.fold_scores(encoder, config) if s.ok])

    def best_stats(self, encoder: str) -> Tuple[Optional[float], Optional[float]]:
        best = self.best_config.get(encoder)
        return (None, None) if best is None else self.config_stats(encoder, best)

    def paired_scores(self, encoder: str, config: Optional[str] = None) -> np.ndarray:
        """Scores ordered by (repeat, fold) for a config (best by default); NaN marks a failed fold."""
        config = config or self.best_config.get(encoder)
        if encoder not in self.configs:
            raise EvaluationError(f"unknown encoder: {encoder}")
        vector = np.full(self.plan.n_repeats * self.plan.n_folds, np.nan)
        if config is None:
            return vector
        for s in self.fold_scores(encoder, config):
            if s.ok:
                vector[s.repeat * self.plan.n_folds + s.fold] = s.score
        return vector

    def to_dict(self) -> CvReportDict:
        encoders: Dict[str, EncoderReportDict] = {}
        for encoder, labels in self.configs.items():
            per_config = {}
            for label in labels:
                folds = self.fold_scores(encoder, label)
                mean, std = self.config_stats(encoder, label)
                per_config[label] = {
                    "mean": mean,
                    "std": std,
                    "n_ok": sum(1 for s in folds if s.ok),
                    "n_failed": sum(1 for s in folds if not s.ok),
                }
            best_mean, best_std = self.best_stats(encoder)
            encoders[encoder] = {
                "kind": self.kinds[encoder],
                "configs": per_config,
                "config_order": list(labels),
                "best_config": self.best_config[encoder],
                "best_mean": best_mean,
                "best_std": best_std,
            }
        return {
            "dataset": self.dataset_id,
            "plan": asdict(self.plan),
            "model": asdict(self.model_spec),
            "metadata": dict(self.metadata),
            "encoders": encoders,
            "failures": self.failures,
            "scores": [asdict(s) for s in self.scores],
        }

    def csv_rows(self) -> List[Tuple[str, str, int, int, str]]:
        """Rows for the flat `encoder,config,repeat,fold,score` CSV; failed folds have an empty score."""
        return [
            (s.encoder, s.config, s.repeat, s.fold, "" if s.score is None else repr(s.score))
            for s in self.scores
        ]


# ----------------------------------------------------------------------------
# Runner
# ----------------------------------------------------------------------------

def run_cv(
    data: Dataset,
    families: Sequence[EncoderFamily],
    model_spec: ElasticNetSpec,
    plan: CvPlan,
    dataset_id: Optional[str] = None,
    workers: int = 1,
) -> CvReport:
    """
    Cross-validate every config of every encoder family.

    All randomness flows from plan.seed. Tasks may run on a thread pool; the
    report is assembled in task order so it does not depend on completion order.
    """
    if not families:
        raise EvaluationError("no encoder families to evaluate")
    names = [f.name for f in families]
    if len(set(names)) != len(names):
        raise EvaluationError(f"duplicate encoder names: {names}")
    if not data.categorical:
        raise EvaluationError("dataset has no categorical columns to encode")

    configs = {f.name: expand_configs(f) for f in families}
    splits = make_folds(data.n_rows, plan)
    subsets = [(data.take(s.train), data.take(s.test)) for s in splits]
    columns = list(data.categorical)

    tasks = [(config, i) for family in families for config in configs[family.name] for i in range(len(splits))]
    logger.info(
        f"Cross-validating {len(families)} encoder(s), {sum(len(c) for c in configs.values())} config(s), "
        f"{len(splits)} split(s) on '{dataset_id or data.name}' ({plan.metric.upper()})"
    )

    def run_task(task: Tuple[EncoderConfig, int]) -> FoldScore:
        config, i = task
        split = splits[i]
        train, test = subsets[i]
        try:
            outcome = evaluate_split(train, test, config, model_spec, plan.metric, columns)
            return FoldScore(config.family, config.label, split.repeat, split.fold, outcome.score)
        except (QEBenchError, FloatingPointError, np.linalg.LinAlgError) as e:
            logger.warning(f"{config.family} [{config.label}] repeat {split.repeat} fold {split.fold} failed: {e}")
            return FoldScore(config.family, config.label, split.repeat, split.fold, None, str(e))

    use_tqdm = tqdm is not None and sys.stderr.isatty()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            iterator = pool.map(run_task, tasks)
            if use_tqdm:
                iterator = tqdm(iterator, total=len(tasks), desc="CV", unit="fit")
            scores = list(iterator)
    else:
        iterator = tqdm(tasks, desc="CV", unit="fit") if use_tqdm else tasks
        scores = [run_task(task) for task in iterator]

    report = CvReport(
        dataset_id=dataset_id or data.name,
        plan=plan,
        model_spec=model_spec,
        kinds={f.name: f.kind.value for f in families},
        configs={name: [c.label for c in cfgs] for name, cfgs in configs.items()},
        scores=scores,
        metadata={"n_rows": data.n_rows, "columns": columns, "rng": RNG_VERSION},
    )
    if report.failures:
        logger.warning(f"{report.failures} fold evaluation(s) failed and were excluded from means")
    return report


def families_from_mapping(raw: Mapping[str, Mapping[str, Any]]) -> List[EncoderFamily]:
    """Build families from {name: {"kind", "m_values", "p_values", "alpha_values"}} documents."""
    families = []
    for name, body in raw.items():
        alphas = body.get("alpha_values")
        families.append(EncoderFamily(
            name=name,
            kind=body.get("kind", name),
            grid=GridSpec(
                m_values=tuple(float(m) for m in body.get("m_values", ())),
                p_values=tuple(tuple(p) if isinstance(p, (list, tuple)) else float(p) for p in body.get("p_values", ())),
                alpha_values=None if alphas is None else tuple(float(a) for a in alphas),
            ),
        ))
    return families
