"""
Synthetic long-tailed regression data.

Per row: c ~ U(low, high), x1 ~ Cauchy(c, s1), x2 ~ Cauchy(c, s2),
y = x1 + x2 + eps with eps ~ N(0, sigma). The numeric features are emitted as
categorical string labels, optionally rounded first to control cardinality.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from qe_bench.core.constants import (
    DEFAULT_CAUCHY_SCALES,
    DEFAULT_CENTER_HIGH,
    DEFAULT_CENTER_LOW,
    DEFAULT_NOISE_SIGMA,
    DEFAULT_SEED,
)
from qe_bench.core.dataset import Dataset
from qe_bench.core.errors import DatasetError
from qe_bench.utils.logger import get_project_logger
from qe_bench.utils.rng import make_rng

logger = get_project_logger(__name__)


@dataclass(frozen=True)
class CauchyConfig:
    n_rows: int
    center_low: float = DEFAULT_CENTER_LOW
    center_high: float = DEFAULT_CENTER_HIGH
    scales: Tuple[float, float] = DEFAULT_CAUCHY_SCALES
    noise_sigma: float = DEFAULT_NOISE_SIGMA
    seed: int = DEFAULT_SEED
    rounding_decimals: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.n_rows, bool) or int(self.n_rows) != self.n_rows or self.n_rows <= 0:
            raise DatasetError("n_rows must be positive")
        if not self.center_low < self.center_high:
            raise DatasetError("center_low must be below center_high")
        scales = tuple(float(s) for s in self.scales)
        if len(scales) != 2 or min(scales) <= 0:
            raise DatasetError("scales must be two positive numbers")
        if not self.noise_sigma >= 0:
            raise DatasetError("noise_sigma must be non-negative")
        if int(self.seed) != self.seed or self.seed < 0:
            raise DatasetError("seed must be a non-negative integer")
        if self.rounding_decimals is not None and (int(self.rounding_decimals) != self.rounding_decimals or self.rounding_decimals < 0):
            raise DatasetError("rounding_decimals must be a non-negative integer")
        object.__setattr__(self, "scales", scales)


@dataclass(frozen=True)
class CauchyDraw:
    """Numeric draw behind a synthetic dataset."""
    centers: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    noise: np.ndarray
    y: np.ndarray


def _cauchy_inverse_cdf(location: np.ndarray, scale: float, u: np.ndarray) -> np.ndarray:
    return location + scale * np.tan(np.pi * (u - 0.5))


def sample_cauchy_features(cfg: CauchyConfig) -> CauchyDraw:
    """Draw centers, both Cauchy features, noise and target; draw order is fixed."""
    rng = make_rng(cfg.seed)
    n = int(cfg.n_rows)
    centers = rng.uniform(cfg.center_low, cfg.center_high, size=n)
    x1 = _cauchy_inverse_cdf(centers, cfg.scales[0], rng.random(n))
    x2 = _cauchy_inverse_cdf(centers, cfg.scales[1], rng.random(n))
    noise = rng.standard_normal(n) * cfg.noise_sigma
    return CauchyDraw(centers=centers, x1=x1, x2=x2, noise=noise, y=x1 + x2 + noise)


def format_labels(values: np.ndarray, decimals: Optional[int]) -> np.ndarray:
    """Full-precision repr labels, or fixed-point labels after rounding."""
    if decimals is None:
        return np.array([repr(float(v)) for v in values], dtype=object)
    rounded = np.round(values, int(decimals)) + 0.0  # folds -0.0 into 0.0
    return np.array([f"{v:.{int(decimals)}f}" for v in rounded], dtype=object)


def generate_cauchy_dataset(cfg: CauchyConfig, name: str = "cauchy") -> Dataset:
    """Synthetic dataset with categorical columns x1, x2 and numeric target y."""
    draw = sample_cauchy_features(cfg)
    dataset = Dataset(
        categorical={
            "x1": format_labels(draw.x1, cfg.rounding_decimals),
            "x2": format_labels(draw.x2, cfg.rounding_decimals),
        },
        numeric={},
        target=draw.y,
        target_name="y",
        name=name,
    )
    logger.debug(f"Generated {dataset.n_rows} synthetic rows, cardinality {dataset.cardinality()}")
    return dataset
