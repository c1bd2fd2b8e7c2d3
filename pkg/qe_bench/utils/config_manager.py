"""
Run configuration: config/.env defaults plus a JSON run document, resolved
into a frozen RunConfig. Precedence: built-in defaults < .env (and process
environment) < JSON document < CLI flag overrides.
"""
import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from dotenv import dotenv_values

from qe_bench.core.constants import (
    DEFAULT_FAMILIES,
    DEFAULT_METRIC,
    DEFAULT_REFERENCE,
    DEFAULT_SEED,
)
from qe_bench.core.dataset import Dataset, load_csv
from qe_bench.core.encoders import EncoderKind
from qe_bench.core.errors import ConfigError, QEBenchError
from qe_bench.core.evaluation import CvPlan, EncoderFamily, GridSpec, families_from_mapping
from qe_bench.core.regression import ElasticNetSpec
from qe_bench.core.synthetic import CauchyConfig, generate_cauchy_dataset

PROJECT_ROOT = Path(__file__).resolve().parents[2]
ENV_KEYS = ("QEB_SEED", "QEB_WORKERS", "QEB_LOG_LEVEL", "QEB_LOG_DIR")
DEFAULT_SYNTHETIC_ROWS = 5000

_TOP_LEVEL_KEYS = {"dataset", "encoders", "model", "cv", "metrics", "reference", "seed", "workers", "out"}


def default_families(names: Optional[Sequence[str]] = None) -> List[EncoderFamily]:
    """Built-in families (all of them, or the named ones in the given order)."""
    names = list(DEFAULT_FAMILIES) if names is None else list(names)
    families = []
    for name in names:
        if name not in DEFAULT_FAMILIES:
            raise ConfigError(f"unknown encoder: '{name}' (known: {', '.join(DEFAULT_FAMILIES)})")
        kind, m_values, p_values = DEFAULT_FAMILIES[name]
        families.append(EncoderFamily(name=name, kind=kind, grid=GridSpec(m_values=m_values, p_values=p_values)))
    return families


@dataclass(frozen=True)
class DatasetSource:
    """Exactly one of csv (with schema) or synthetic."""
    csv: Optional[str] = None
    categorical: Tuple[str, ...] = ()
    numeric: Tuple[str, ...] = ()
    target: Optional[str] = None
    synthetic: Optional[CauchyConfig] = None
    name: Optional[str] = None

    def __post_init__(self):
        if (self.csv is None) == (self.synthetic is None):
            raise ConfigError("dataset needs exactly one source: a csv path or a synthetic config")
        if self.csv is not None:
            if not self.categorical:
                raise ConfigError("csv dataset needs at least one categorical column")
            if not self.target:
                raise ConfigError("csv dataset needs a target column")

    def load(self) -> Dataset:
        if self.synthetic is not None:
            return generate_cauchy_dataset(self.synthetic, name=self.name or "cauchy")
        return load_csv(self.csv, self.categorical, self.target, self.numeric, name=self.name)

    def to_dict(self) -> Dict[str, Any]:
        """Report form. The csv entry is the bare file name so reports do not depend on where data lives."""
        if self.synthetic is not None:
            return {"name": self.name or "cauchy", "synthetic": asdict(self.synthetic)}
        return {
            "name": self.name or Path(self.csv).stem,
            "csv": Path(self.csv).name,
            "categorical": list(self.categorical),
            "numeric": list(self.numeric),
            "target": self.target,
        }


@dataclass(frozen=True)
class RunConfig:
    dataset: DatasetSource
    encoders: Tuple[EncoderFamily, ...]
    model: ElasticNetSpec = field(default_factory=ElasticNetSpec)
    plan: CvPlan = field(default_factory=CvPlan)
    metrics: Tuple[str, ...] = (DEFAULT_METRIC,)
    reference: str = DEFAULT_REFERENCE
    seed: int = DEFAULT_SEED
    workers: int = 1
    out: Optional[str] = None

    def __post_init__(self):
        if not self.encoders:
            raise ConfigError("at least one encoder is required")
        names = [f.name for f in self.encoders]
        if self.reference not in names:
            raise ConfigError(f"unknown reference encoder: '{self.reference}' (encoders: {', '.join(names)})")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    def to_dict(self) -> Dict[str, Any]:
        """Fully resolved configuration, embedded in every report."""
        return {
            "dataset": self.dataset.to_dict(),
            "encoders": {
                f.name: {
                    "kind": f.kind.value,
                    "m_values": list(f.grid.m_values),
                    "p_values": [list(p) if isinstance(p, tuple) else p for p in f.grid.p_values],
                    "alpha_values": None if f.grid.alpha_values is None else list(f.grid.alpha_values),
                }
                for f in self.encoders
            },
            "model": asdict(self.model),
            "cv": {"folds": self.plan.n_folds, "repeats": self.plan.n_repeats},
            "metrics": list(self.metrics),
            "reference": self.reference,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class EncodeConfig:
    """Settings of one encode run: schema, training file and a single encoder."""
    categorical: Tuple[str, ...]
    numeric: Tuple[str, ...]
    target: Optional[str]
    kind: EncoderKind
    train: Optional[str] = None
    m: Optional[float] = None
    p: Optional[float] = None
    quantiles: Optional[Tuple[float, ...]] = None
    seed: int = DEFAULT_SEED


def _split_list(value) -> Tuple[str, ...]:
    if value is None:
        return ()
    if isinstance(value, str):
        return tuple(v.strip() for v in value.split(",") if v.strip())
    return tuple(str(v) for v in value)


def _as_int(value, key: str) -> int:
    try:
        number = int(str(value).strip())
    except (TypeError, ValueError):
        raise ConfigError(f"{key} must be an integer, got {value!r}")
    return number


class ConfigManager:
    """Helper to manage config/.env defaults and JSON run documents"""

    def __init__(self, root: Path = PROJECT_ROOT, env_file: Optional[Path] = None):
        self.env_file = Path(env_file) if env_file else Path(root) / "config" / ".env"
        self._config: Dict[str, str] = {}
        self.load()

    def load(self) -> None:
        """Read the .env file; process environment variables override it."""
        self._config.clear()
        if self.env_file.exists():
            for key, value in dotenv_values(self.env_file).items():
                if value is not None:
                    self._config[key] = value.strip()
        for key in ENV_KEYS:
            if os.environ.get(key):
                self._config[key] = os.environ[key].strip()

    def get(self, key: str, default: Optional[str] = None) -> Optional[str]:
        return self._config.get(key, default)

    @property
    def seed(self) -> int:
        return _as_int(self.get("QEB_SEED", DEFAULT_SEED), "QEB_SEED")

    @property
    def workers(self) -> int:
        return _as_int(self.get("QEB_WORKERS", 1), "QEB_WORKERS")

    @staticmethod
    def load_document(path) -> Dict[str, Any]:
        """Parse a JSON run document; relative csv paths resolve against its directory."""
        path = Path(path)
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON ({e})")
        if not isinstance(document, dict):
            raise ConfigError(f"{path}: run document must be a JSON object")
        unknown = sorted(set(document) - _TOP_LEVEL_KEYS)
        if unknown:
            raise ConfigError(f"{path}: unknown keys: {', '.join(unknown)}")
        dataset = document.get("dataset")
        if isinstance(dataset, dict) and dataset.get("csv") and not Path(dataset["csv"]).is_absolute():
            dataset["csv"] = os.path.normpath(str(path.parent / dataset["csv"]))
        return document

    def resolve(self, document: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None) -> RunConfig:
        """
        Merge defaults, .env, the run document and flag overrides.

        Overrides use CLI names: seed, out, metric, folds, repeats, encoder,
        reference, data, cat, num, target, n, round, workers. A None value
        means "not given".

        Raises:
            ConfigError: any invalid or inconsistent setting
        """
        doc = dict(document or {})
        flags = {k: v for k, v in (overrides or {}).items() if v is not None}
        try:
            seed = _as_int(flags.get("seed", doc.get("seed", self.seed)), "seed")
            workers = _as_int(flags.get("workers", doc.get("workers", self.workers)), "workers")

            cv = dict(doc.get("cv") or {})
            metrics = _split_list(flags.get("metric", doc.get("metrics", DEFAULT_METRIC)))
            plan = CvPlan(
                n_folds=_as_int(flags.get("folds", cv.get("folds", CvPlan.n_folds)), "folds"),
                n_repeats=_as_int(flags.get("repeats", cv.get("repeats", CvPlan.n_repeats)), "repeats"),
                seed=seed,
                metric=metrics[0] if metrics else DEFAULT_METRIC,
            )
            for metric in metrics:
                CvPlan(metric=metric)

            model = ElasticNetSpec(**dict(doc.get("model") or {}))
            encoders = self._resolve_encoders(doc.get("encoders"), flags.get("encoder"))
            reference = flags.get("reference", doc.get("reference", DEFAULT_REFERENCE))
            dataset = self._resolve_dataset(dict(doc.get("dataset") or {}), flags, seed)

            return RunConfig(
                dataset=dataset,
                encoders=tuple(encoders),
                model=model,
                plan=plan,
                metrics=metrics or (DEFAULT_METRIC,),
                reference=reference,
                seed=seed,
                workers=workers,
                out=flags.get("out", doc.get("out")),
            )
        except ConfigError:
            raise
        except (QEBenchError, TypeError) as e:
            raise ConfigError(f"invalid configuration: {e}")

    @staticmethod
    def _resolve_encoders(raw: Optional[Mapping[str, Any]], selected) -> List[EncoderFamily]:
        names = _split_list(selected) or None
        if not raw:
            return default_families(names)
        families = {f.name: f for f in families_from_mapping(raw)}
        if names is None:
            return list(families.values())
        chosen = []
        for name in names:
            if name in families:
                chosen.append(families[name])
            else:
                chosen.extend(default_families([name]))
        return chosen

    @staticmethod
    def _resolve_dataset(raw: Dict[str, Any], flags: Mapping[str, Any], seed: int) -> DatasetSource:
        if "data" in flags:
            raw = {"name": raw.get("name"), "csv": flags["data"],
                   "categorical": raw.get("categorical"), "numeric": raw.get("numeric"), "target": raw.get("target")}
        elif any(k in flags for k in ("n", "round")) and "csv" not in raw:
            raw.setdefault("synthetic", {})
        for flag, key in (("cat", "categorical"), ("num", "numeric"), ("target", "target")):
            if flag in flags:
                raw[key] = flags[flag]

        if raw.get("csv"):
            if raw.get("synthetic") is not None:
                raise ConfigError("dataset needs exactly one source: a csv path or a synthetic config")
            return DatasetSource(
                csv=str(raw["csv"]),
                categorical=_split_list(raw.get("categorical")),
                numeric=_split_list(raw.get("numeric")),
                target=raw.get("target"),
                name=raw.get("name"),
            )

        synthetic = dict(raw.get("synthetic") or {})
        synthetic.setdefault("n_rows", DEFAULT_SYNTHETIC_ROWS)
        synthetic.setdefault("seed", seed)
        if "n" in flags:
            synthetic["n_rows"] = _as_int(flags["n"], "n")
        if "round" in flags:
            synthetic["rounding_decimals"] = _as_int(flags["round"], "round")
        if "seed" in flags:
            synthetic["seed"] = seed
        if "scales" in synthetic:
            synthetic["scales"] = tuple(synthetic["scales"])
        return DatasetSource(synthetic=CauchyConfig(**synthetic), name=raw.get("name"))

    def resolve_encode(self, document: Optional[Mapping[str, Any]] = None,
                       overrides: Optional[Mapping[str, Any]] = None) -> EncodeConfig:
        """
        Merge the run document's dataset schema and encoder with encode flags.

        Overrides: train, cat, num, target, encoder, m, p, quantiles, seed.
        The document's first encoder of the selected kind (its first m and p
        grid values) supplies m, p and quantiles; without --encoder the first
        encoder of the document is used, and quantile without a document.

        Raises:
            ConfigError: unknown encoder kind or invalid setting
        """
        doc = dict(document or {})
        flags = {k: v for k, v in (overrides or {}).items() if v is not None}
        dataset = dict(doc.get("dataset") or {})
        try:
            families = families_from_mapping(doc.get("encoders") or {})
            if "encoder" in flags:
                kind = EncoderKind(flags["encoder"])
            else:
                kind = families[0].kind if families else EncoderKind.QUANTILE
            family = next((f for f in families if f.kind == kind), None)

            m = p = quantiles = None
            if family is not None:
                m = family.grid.m_values[0] if family.grid.m_values else None
                first = family.grid.p_values[0] if family.grid.p_values else None
                if isinstance(first, tuple):
                    quantiles = tuple(float(q) for q in first)
                elif first is not None:
                    p = float(first)

            train = flags.get("train", dataset.get("csv"))
            return EncodeConfig(
                categorical=_split_list(flags.get("cat", dataset.get("categorical"))),
                numeric=_split_list(flags.get("num", dataset.get("numeric"))),
                target=flags.get("target", dataset.get("target")),
                kind=kind,
                train=None if train is None else str(train),
                m=float(flags["m"]) if "m" in flags else m,
                p=float(flags["p"]) if "p" in flags else p,
                quantiles=tuple(flags["quantiles"]) if "quantiles" in flags else quantiles,
                seed=_as_int(flags.get("seed", doc.get("seed", self.seed)), "seed"),
            )
        except ConfigError:
            raise
        except (ValueError, TypeError) as e:
            raise ConfigError(f"invalid configuration: {e}")
