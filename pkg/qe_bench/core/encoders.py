"""
Categorical -> numeric encoders for regression targets.

Quantile encoder: each category is replaced by the p-quantile of the targets
sharing that category, shrunk toward the global p-quantile with additive
(M-estimate) smoothing:

    encoded = (local * n_i + global * m) / (n_i + m)

The summary encoder emits one such column per quantile level. The mean
encoders use the arithmetic mean in place of the quantile, and the ordinal
encoder assigns integer codes.

Fitted encoders are immutable; transform() reads only fitted state, so an
encoder fit on training rows can be applied to any split without leakage.
"""
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from qe_bench.core.constants import (
    DEFAULT_QUANTILE_M,
    DEFAULT_QUANTILE_P,
    DEFAULT_SUMMARY_M,
    DEFAULT_SUMMARY_QUANTILES,
    UNSEEN_ORDINAL_CODE,
)
from qe_bench.core.dataset import Dataset, as_labels
from qe_bench.core.errors import EncoderError
from qe_bench.utils.logger import get_project_logger
from qe_bench.utils.rng import make_rng

logger = get_project_logger(__name__)


class EncoderKind(str, Enum):
    QUANTILE = "quantile"
    SUMMARY = "summary"
    TARGET_MEAN = "target_mean"
    M_ESTIMATE_MEAN = "m_estimate_mean"
    ORDINAL = "ordinal"


def _check_probability(p: float) -> float:
    if isinstance(p, bool) or not isinstance(p, (int, float, np.floating, np.integer)):
        raise EncoderError(f"invalid probability: {p!r}")
    if not (math.isfinite(p) and 0.0 <= p <= 1.0):
        raise EncoderError(f"invalid probability: {p!r}")
    return float(p)


def _check_m(m: float) -> float:
    if isinstance(m, bool) or not isinstance(m, (int, float, np.floating, np.integer)):
        raise EncoderError(f"invalid regularization m: {m!r}")
    if not (math.isfinite(m) and m >= 0.0):
        raise EncoderError(f"invalid regularization m: {m!r}")
    return float(m)


def format_level(p: float) -> str:
    """0.25 -> '0.25', 0.5 -> '0.5', 1.0 -> '1'."""
    return format(float(p), ".10f").rstrip("0").rstrip(".")


# ----------------------------------------------------------------------------
# Hyperparameters
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantileSpec:
    p: float = DEFAULT_QUANTILE_P
    m: float = DEFAULT_QUANTILE_M

    def __post_init__(self):
        object.__setattr__(self, "p", _check_probability(self.p))
        object.__setattr__(self, "m", _check_m(self.m))


@dataclass(frozen=True)
class SummarySpec:
    quantiles: Tuple[float, ...] = DEFAULT_SUMMARY_QUANTILES
    m: float = DEFAULT_SUMMARY_M

    def __post_init__(self):
        levels = tuple(_check_probability(p) for p in self.quantiles)
        if not levels:
            raise EncoderError("summary encoder needs at least one quantile level")
        if len(set(levels)) != len(levels):
            raise EncoderError(f"duplicate quantile levels: {list(levels)}")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise EncoderError(f"quantile levels must be strictly increasing: {list(levels)}")
        object.__setattr__(self, "quantiles", levels)
        object.__setattr__(self, "m", _check_m(self.m))


@dataclass(frozen=True)
class MeanSpec:
    m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "m", _check_m(self.m))


@dataclass(frozen=True)
class OrdinalSpec:
    seed: Optional[int] = None

    def __post_init__(self):
        if self.seed is not None and (isinstance(self.seed, bool) or int(self.seed) != self.seed or self.seed < 0):
            raise EncoderError(f"ordinal seed must be a non-negative integer, got {self.seed!r}")


EncoderSpec = Union[QuantileSpec, SummarySpec, MeanSpec, OrdinalSpec]

_SPEC_TYPES = {
    EncoderKind.QUANTILE: QuantileSpec,
    EncoderKind.SUMMARY: SummarySpec,
    EncoderKind.TARGET_MEAN: MeanSpec,
    EncoderKind.M_ESTIMATE_MEAN: MeanSpec,
    EncoderKind.ORDINAL: OrdinalSpec,
}


# ----------------------------------------------------------------------------
# Statistics
# ----------------------------------------------------------------------------

def _interpolate_sorted(sorted_values: np.ndarray, starts: np.ndarray, counts: np.ndarray, p: float) -> np.ndarray:
    """
    Linear-interpolation quantile of each contiguous sorted group.

    Group g occupies sorted_values[starts[g] : starts[g] + counts[g]].
    With h = (n - 1) * p the result is v[floor(h)] + frac(h) * (v[floor(h) + 1] - v[floor(h)]).
    """
    h = (counts - 1) * p
    lower = np.floor(h).astype(np.intp)
    frac = h - lower
    upper = np.minimum(lower + 1, counts - 1)
    lo_vals = sorted_values[starts + lower]
    hi_vals = sorted_values[starts + upper]
    result = lo_vals + frac * (hi_vals - lo_vals)
    return np.clip(result, lo_vals, hi_vals)


def _validated_sample(values) -> np.ndarray:
    sample = np.asarray(values, dtype=float).ravel()
    if sample.size == 0:
        raise EncoderError("empty sample")
    if not np.all(np.isfinite(sample)):
        raise EncoderError("non-finite input")
    return sample


def quantile(values: Sequence[float], p: float) -> float:
    """
    p-quantile of a sample using linear interpolation between order statistics.

    Raises:
        EncoderError: "empty sample", "non-finite input" or "invalid probability"
    """
    sample = _validated_sample(values)
    p = _check_probability(p)
    ordered = np.sort(sample)
    result = _interpolate_sorted(ordered, np.array([0]), np.array([ordered.size]), p)
    return float(result[0])


def m_estimate_blend(local: float, n_i: int, global_value: float, m: float) -> float:
    """
    Additive smoothing of a category statistic toward the global statistic.

    Returns (local * n_i + global * m) / (n_i + m), which always lies between
    local and global.

    Raises:
        EncoderError: negative support or m, or n_i + m == 0 ("degenerate blend")
    """
    m = _check_m(m)
    if n_i < 0:
        raise EncoderError(f"category support must be non-negative, got {n_i}")
    if n_i + m == 0:
        raise EncoderError("degenerate blend")
    if m == 0:
        return float(local)
    blended = (local * n_i + global_value * m) / (n_i + m)
    return float(min(max(blended, min(local, global_value)), max(local, global_value)))


def _blend(local: np.ndarray, counts: np.ndarray, global_stats: np.ndarray, m: float) -> np.ndarray:
    """Vectorized m_estimate_blend over a (k, M) table; every count is >= 1."""
    if m == 0:
        return local.copy()
    n = counts[:, None].astype(float)
    blended = (local * n + global_stats[None, :] * m) / (n + m)
    return np.clip(blended, np.minimum(local, global_stats), np.maximum(local, global_stats))


def _group(labels: np.ndarray, y: np.ndarray):
    """Sort targets by (category, value); returns labels, counts, starts and sorted targets."""
    uniques, codes = np.unique(labels, return_inverse=True)
    codes = codes.ravel()
    order = np.lexsort((y, codes))
    counts = np.bincount(codes, minlength=uniques.size)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.intp)
    return uniques, codes, counts, starts, y[order]


# ----------------------------------------------------------------------------
# Fitted state
# ----------------------------------------------------------------------------

def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class CategoryTable:
    """
    Per-category fitted statistics for one categorical column.

    Row g of local_stats holds the statistic(s) of category labels[g]; the
    blended (encoded) values are derived once at construction.
    """
    labels: Tuple[str, ...]
    counts: np.ndarray
    local_stats: np.ndarray
    global_stats: np.ndarray
    total_count: int
    m: float
    encoded: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        local = np.asarray(self.local_stats, dtype=float).reshape(len(self.labels), -1)
        global_stats = np.asarray(self.global_stats, dtype=float).ravel()
        if counts.shape[0] != len(self.labels):
            raise EncoderError("category counts and labels differ in length")
        if local.shape[1] != global_stats.shape[0]:
            raise EncoderError("local and global statistics differ in length")
        if int(counts.sum()) != self.total_count or np.any(counts < 1):
            raise EncoderError("category counts must be positive and sum to total_count")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "counts", _readonly(counts))
        object.__setattr__(self, "local_stats", _readonly(local))
        object.__setattr__(self, "global_stats", _readonly(global_stats))
        object.__setattr__(self, "encoded", _readonly(_blend(local, counts, global_stats, self.m)))
        object.__setattr__(self, "_index", pd.Index(self.labels, dtype=object))

    @property
    def width(self) -> int:
        return int(self.global_stats.shape[0])

    @property
    def entries(self) -> Dict[str, Tuple[int, Tuple[float, ...]]]:
        return {
            label: (int(self.counts[g]), tuple(float(v) for v in self.local_stats[g]))
            for g, label in enumerate(self.labels)
        }

    def lookup(self, label: str) -> Tuple[float, ...]:
        """Encoded value(s) for one label; unseen labels get the global statistic."""
        position = self._index.get_indexer([label])[0]
        row = self.encoded[position] if position >= 0 else self.global_stats
        return tuple(float(v) for v in row)

    def positions(self, values: np.ndarray) -> np.ndarray:
        return self._index.get_indexer(as_labels(values))

    def encode(self, values: np.ndarray) -> np.ndarray:
        """(n, width) encoded matrix for a column of labels."""
        positions = self.positions(values)
        out = np.empty((positions.shape[0], self.width), dtype=float)
        seen = positions >= 0
        out[seen] = self.encoded[positions[seen]]
        out[~seen] = self.global_stats
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "categories": {
                label: {"count": count, "stats": list(stats)}
                for label, (count, stats) in self.entries.items()
            },
            "global_stats": [float(v) for v in self.global_stats],
            "total_count": int(self.total_count),
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any], m: float) -> "CategoryTable":
        labels = sorted(data["categories"])
        return cls(
            labels=tuple(labels),
            counts=np.array([data["categories"][k]["count"] for k in labels], dtype=np.int64),
            local_stats=np.array([data["categories"][k]["stats"] for k in labels], dtype=float),
            global_stats=np.array(data["global_stats"], dtype=float),
            total_count=int(data["total_count"]),
            m=m,
        )


@dataclass(frozen=True)
class OrdinalTable:
    """Label -> integer code map for one column."""
    labels: Tuple[str, ...]
    codes: np.ndarray

    def __post_init__(self):
        codes = np.asarray(self.codes, dtype=np.int64)
        if codes.shape[0] != len(self.labels):
            raise EncoderError("ordinal codes and labels differ in length")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "codes", _readonly(codes))
        object.__setattr__(self, "_index", pd.Index(self.labels, dtype=object))

    width = 1

    @property
    def mapping(self) -> Dict[str, int]:
        return {label: int(code) for label, code in zip(self.labels, self.codes)}

    def positions(self, values: np.ndarray) -> np.ndarray:
        return self._index.get_indexer(as_labels(values))

    def encode(self, values: np.ndarray) -> np.ndarray:
        positions = self.positions(values)
        out = np.full(positions.shape[0], float(UNSEEN_ORDINAL_CODE))
        seen = positions >= 0
        out[seen] = self.codes[positions[seen]]
        return out[:, None]

    def to_dict(self) -> Dict[str, Any]:
        return {"codes": self.mapping}

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "OrdinalTable":
        items = sorted(data["codes"].items(), key=lambda kv: kv[1])
        return cls(labels=tuple(k for k, _ in items), codes=np.array([v for _, v in items]))


ColumnTable = Union[CategoryTable, OrdinalTable]


@dataclass(frozen=True)
class FittedEncoder:
    """A trained encoder: kind, hyperparameters and one table per encoded column."""
    kind: EncoderKind
    spec: EncoderSpec
    columns: Tuple[str, ...]
    per_column: Mapping[str, ColumnTable]
    output_names: Tuple[str, ...]

    def column_outputs(self, column: str) -> Tuple[str, ...]:
        if self.kind == EncoderKind.SUMMARY:
            return tuple(f"{column}__q{format_level(p)}" for p in self.spec.quantiles)
        return (column,)

    def _check_columns(self, data: Dataset) -> None:
        missing = [c for c in self.columns if c not in data.categorical]
        if missing:
            raise EncoderError(f"missing column: {', '.join(missing)}")

    def transform(self, data: Dataset) -> Dataset:
        """
        Replace the fitted categorical columns by their encoded numeric columns.

        Encoded columns come first, followed by the original numeric columns;
        the target and any other categorical columns pass through unchanged.
        """
        self._check_columns(data)
        encoded: Dict[str, np.ndarray] = {}
        for column in self.columns:
            values = self.per_column[column].encode(data.categorical[column])
            for j, name in enumerate(self.column_outputs(column)):
                encoded[name] = values[:, j]

        clashes = sorted(set(encoded) & set(data.numeric))
        if clashes:
            raise EncoderError(f"encoded column names clash with numeric columns: {', '.join(clashes)}")

        return Dataset(
            categorical={k: v for k, v in data.categorical.items() if k not in self.columns},
            numeric={**encoded, **data.numeric},
            target=data.target,
            target_name=data.target_name,
            name=data.name,
            cells={k: v for k, v in data.cells.items() if k not in self.columns},
        )

    def count_unseen(self, data: Dataset) -> Dict[str, int]:
        """Rows per column whose label was not present at fit time."""
        self._check_columns(data)
        return {
            column: int(np.count_nonzero(self.per_column[column].positions(data.categorical[column]) < 0))
            for column in self.columns
        }

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "spec": asdict(self.spec),
            "columns": list(self.columns),
            "output_names": list(self.output_names),
            "tables": {column: self.per_column[column].to_dict() for column in self.columns},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "FittedEncoder":
        try:
            kind = EncoderKind(data["kind"])
            raw_spec = dict(data["spec"])
            if kind == EncoderKind.SUMMARY:
                raw_spec["quantiles"] = tuple(raw_spec["quantiles"])
            spec = _SPEC_TYPES[kind](**raw_spec)
            columns = tuple(data["columns"])
            if kind == EncoderKind.ORDINAL:
                tables = {c: OrdinalTable.from_dict(data["tables"][c]) for c in columns}
            else:
                tables = {c: CategoryTable.from_dict(data["tables"][c], spec.m) for c in columns}
        except (KeyError, TypeError, ValueError) as e:
            raise EncoderError(f"invalid encoder document: {e}")
        return _assemble(kind, spec, columns, tables)


def _assemble(kind: EncoderKind, spec: EncoderSpec, columns: Tuple[str, ...], tables: Dict[str, ColumnTable]) -> FittedEncoder:
    encoder = FittedEncoder(kind=kind, spec=spec, columns=columns, per_column=tables, output_names=())
    names = tuple(name for column in columns for name in encoder.column_outputs(column))
    object.__setattr__(encoder, "output_names", names)
    return encoder


# ----------------------------------------------------------------------------
# Fitting
# ----------------------------------------------------------------------------

def _validate_training(train: Dataset, columns: Sequence[str]) -> Tuple[str, ...]:
    columns = tuple(columns)
    if train.n_rows == 0:
        raise EncoderError("training set has no rows")
    if not columns:
        raise EncoderError("no columns to encode")
    if len(set(columns)) != len(columns):
        raise EncoderError(f"duplicate columns: {list(columns)}")
    for column in columns:
        if column in train.numeric or column == train.target_name:
            raise EncoderError(f"column '{column}' is not categorical")
        if column not in train.categorical:
            raise EncoderError(f"unknown column: {column}")
    return columns


def _fit_tables(train: Dataset, columns: Tuple[str, ...], levels: Optional[Sequence[float]], m: float) -> Dict[str, CategoryTable]:
    """Quantile tables when levels is given, mean tables when it is None."""
    y = np.asarray(train.target, dtype=float)
    n = y.shape[0]
    all_sorted = np.sort(y)
    whole = (np.array([0]), np.array([n]))
    if levels is None:
        global_stats = np.array([min(max(float(y.mean()), all_sorted[0]), all_sorted[-1])])
    else:
        global_stats = np.array([_interpolate_sorted(all_sorted, *whole, p)[0] for p in levels])

    tables = {}
    for column in columns:
        uniques, codes, counts, starts, sorted_y = _group(train.categorical[column], y)
        if levels is None:
            means = np.bincount(codes, weights=y, minlength=uniques.size) / counts
            lows = sorted_y[starts]
            highs = sorted_y[starts + counts - 1]
            local = np.clip(means, lows, highs)[:, None]
        else:
            local = np.column_stack([_interpolate_sorted(sorted_y, starts, counts, p) for p in levels])
        tables[column] = CategoryTable(
            labels=tuple(str(u) for u in uniques),
            counts=counts,
            local_stats=local,
            global_stats=global_stats,
            total_count=n,
            m=m,
        )
        logger.debug(f"Fitted column '{column}': {uniques.size} categories over {n} rows")
    return tables


def fit_quantile_encoder(train: Dataset, columns: Sequence[str], spec: QuantileSpec = QuantileSpec()) -> FittedEncoder:
    """Per-category p-quantile of the target, smoothed toward the global p-quantile with strength m."""
    columns = _validate_training(train, columns)
    tables = _fit_tables(train, columns, (spec.p,), spec.m)
    return _assemble(EncoderKind.QUANTILE, spec, columns, tables)


def fit_summary_encoder(train: Dataset, columns: Sequence[str], spec: SummarySpec = SummarySpec()) -> FittedEncoder:
    """One smoothed quantile column per level in spec.quantiles, named '<col>__q<p>'."""
    columns = _validate_training(train, columns)
    tables = _fit_tables(train, columns, spec.quantiles, spec.m)
    return _assemble(EncoderKind.SUMMARY, spec, columns, tables)


def fit_target_mean_encoder(train: Dataset, columns: Sequence[str], m: float = 0.0) -> FittedEncoder:
    """Mean target encoder; m > 0 gives the M-estimate variant."""
    spec = MeanSpec(m=m)
    columns = _validate_training(train, columns)
    tables = _fit_tables(train, columns, None, spec.m)
    kind = EncoderKind.TARGET_MEAN if spec.m == 0 else EncoderKind.M_ESTIMATE_MEAN
    return _assemble(kind, spec, columns, tables)


def fit_ordinal_encoder(train: Dataset, columns: Sequence[str], seed: Optional[int] = None) -> FittedEncoder:
    """
    Integer codes 0..k-1 per column.

    Without a seed codes follow order of first appearance; with a seed they are
    a seeded random permutation (one stream per column).
    """
    spec = OrdinalSpec(seed=seed)
    columns = _validate_training(train, columns)
    tables = {}
    for stream, column in enumerate(columns):
        _, uniques = pd.factorize(train.categorical[column], sort=False)
        codes = np.arange(len(uniques), dtype=np.int64)
        if spec.seed is not None:
            codes = make_rng(spec.seed, stream).permutation(codes)
        tables[column] = OrdinalTable(labels=tuple(str(u) for u in uniques), codes=codes)
    return _assemble(EncoderKind.ORDINAL, spec, columns, tables)


def fit_encoder(kind: Union[EncoderKind, str], train: Dataset, columns: Sequence[str], spec: Optional[EncoderSpec] = None) -> FittedEncoder:
    """Dispatch to the fit function of the given kind; spec defaults per kind."""
    try:
        kind = EncoderKind(kind)
    except ValueError:
        raise EncoderError(f"unknown encoder kind: {kind!r}")
    spec = spec if spec is not None else _SPEC_TYPES[kind]()
    if not isinstance(spec, _SPEC_TYPES[kind]):
        raise EncoderError(f"{kind.value} encoder expects {_SPEC_TYPES[kind].__name__}, got {type(spec).__name__}")

    if kind == EncoderKind.QUANTILE:
        return fit_quantile_encoder(train, columns, spec)
    if kind == EncoderKind.SUMMARY:
        return fit_summary_encoder(train, columns, spec)
    if kind == EncoderKind.ORDINAL:
        return fit_ordinal_encoder(train, columns, spec.seed)
    return fit_target_mean_encoder(train, columns, spec.m)


def spec_to_label(spec: EncoderSpec) -> str:
    """Stable config label such as 'm=10,p=0.25' or 'm=0,q=0.25/0.5/0.75'."""
    if isinstance(spec, QuantileSpec):
        return f"m={format_level(spec.m)},p={format_level(spec.p)}"
    if isinstance(spec, SummarySpec):
        return f"m={format_level(spec.m)},q={'/'.join(format_level(p) for p in spec.quantiles)}"
    if isinstance(spec, MeanSpec):
        return f"m={format_level(spec.m)}"
    return "default" if spec.seed is None else f"seed={spec.seed}"


def spec_from_values(kind: Union[EncoderKind, str], m: Optional[float] = None, p: Optional[float] = None,
                     quantiles: Optional[Sequence[float]] = None, seed: Optional[int] = None) -> EncoderSpec:
    """Build the spec of a kind from loose values, using kind defaults for anything omitted."""
    kind = EncoderKind(kind)
    if kind == EncoderKind.QUANTILE:
        return QuantileSpec(p=DEFAULT_QUANTILE_P if p is None else p, m=DEFAULT_QUANTILE_M if m is None else m)
    if kind == EncoderKind.SUMMARY:
        levels = DEFAULT_SUMMARY_QUANTILES if quantiles is None else tuple(quantiles)
        return SummarySpec(quantiles=levels, m=DEFAULT_SUMMARY_M if m is None else m)
    if kind == EncoderKind.ORDINAL:
        return OrdinalSpec(seed=seed)
    if kind == EncoderKind.M_ESTIMATE_MEAN and m is None:
        return MeanSpec(m=DEFAULT_QUANTILE_M)
    return MeanSpec(m=0.0 if m is None else m)
