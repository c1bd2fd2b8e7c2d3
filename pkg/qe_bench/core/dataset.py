"""
Column-oriented dataset container and CSV ingestion.

A Dataset holds named categorical columns (string labels), named numeric
columns and one numeric target. Empty categorical cells are mapped to
MISSING_LABEL so that no row is ever dropped.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from qe_bench.core.constants import MISSING_LABEL
from qe_bench.core.errors import DatasetError
from qe_bench.utils.file_utils import atomic_write
from qe_bench.utils.logger import get_project_logger

logger = get_project_logger(__name__)


def as_labels(values) -> np.ndarray:
    labels = np.array(["" if v is None else str(v) for v in values], dtype=object)
    labels[labels == ""] = MISSING_LABEL
    return labels


def _readonly(array: np.ndarray) -> np.ndarray:
    array.flags.writeable = False
    return array


@dataclass(frozen=True)
class Dataset:
    """
    Immutable column-oriented table.

    Column order is preserved (dict insertion order) and is the order used by
    design_matrix() and write_csv(). cells holds the source text of columns
    read from a CSV file; write_csv() emits it verbatim.
    """
    categorical: Mapping[str, np.ndarray]
    numeric: Mapping[str, np.ndarray]
    target: np.ndarray
    target_name: str = "y"
    name: str = "dataset"
    cells: Mapping[str, np.ndarray] = field(default_factory=dict)
    n_rows: int = field(init=False)

    def __post_init__(self):
        categorical = {str(k): _readonly(as_labels(v)) for k, v in self.categorical.items()}
        numeric = {}
        for key, values in self.numeric.items():
            column = np.array(values, dtype=float)
            if column.ndim != 1:
                raise DatasetError(f"numeric column '{key}' must be one-dimensional")
            numeric[str(key)] = _readonly(column)
        target = np.array(self.target, dtype=float)
        if target.ndim != 1:
            raise DatasetError("target must be one-dimensional")
        if not np.all(np.isfinite(target)):
            raise DatasetError("target contains non-finite values")

        names = list(categorical) + list(numeric) + [self.target_name]
        duplicates = sorted({n for n in names if names.count(n) > 1})
        if duplicates:
            raise DatasetError(f"duplicate column names: {', '.join(duplicates)}")

        n = target.shape[0]
        for key, column in list(categorical.items()) + list(numeric.items()):
            if column.shape[0] != n:
                raise DatasetError(
                    f"column '{key}' has {column.shape[0]} rows, target has {n}"
                )

        cells = {}
        for key, values in self.cells.items():
            if key not in names:
                raise DatasetError(f"source cells for unknown column '{key}'")
            text = np.array([str(v) for v in values], dtype=object)
            if text.shape[0] != n:
                raise DatasetError(f"source cells of '{key}' have {text.shape[0]} rows, target has {n}")
            cells[str(key)] = _readonly(text)

        object.__setattr__(self, "categorical", categorical)
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "numeric", numeric)
        object.__setattr__(self, "target", _readonly(target))
        object.__setattr__(self, "n_rows", int(n))

    @property
    def column_names(self) -> List[str]:
        return list(self.categorical) + list(self.numeric) + [self.target_name]

    def cardinality(self) -> Dict[str, int]:
        """K_j: number of distinct labels per categorical column."""
        return {name: int(len(pd.unique(col))) for name, col in self.categorical.items()}

    def take(self, indices: Sequence[int]) -> "Dataset":
        """Row subset in the given order."""
        idx = np.asarray(indices, dtype=np.intp)
        return Dataset(
            categorical={k: v[idx] for k, v in self.categorical.items()},
            numeric={k: v[idx] for k, v in self.numeric.items()},
            target=self.target[idx],
            target_name=self.target_name,
            name=self.name,
            cells={k: v[idx] for k, v in self.cells.items()},
        )

    def with_target(self, target: Sequence[float]) -> "Dataset":
        return Dataset(
            categorical=self.categorical,
            numeric=self.numeric,
            target=target,
            target_name=self.target_name,
            name=self.name,
            cells={k: v for k, v in self.cells.items() if k != self.target_name},
        )

    def design_matrix(self) -> np.ndarray:
        """Numeric columns stacked as an (n, d) float matrix."""
        if self.categorical:
            raise DatasetError(
                f"dataset still has categorical columns: {', '.join(self.categorical)}"
            )
        if not self.numeric:
            raise DatasetError("dataset has no numeric columns")
        return np.column_stack([np.asarray(col) for col in self.numeric.values()])


def _parse_numeric(raw: pd.Series, label: str) -> np.ndarray:
    parsed = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = np.flatnonzero(~np.isfinite(parsed))
    if bad.size:
        first = int(bad[0])
        reason = "not finite" if np.isinf(parsed[first]) else "not numeric"
        raise DatasetError(f"row {first + 1}: {label} {reason} ({raw.iloc[first]!r})")
    return parsed


def load_csv(
    path,
    categorical: Sequence[str],
    target: str,
    numeric: Sequence[str] = (),
    name: Optional[str] = None,
) -> Dataset:
    """
    Load a schema-described CSV file.

    Rows are numbered from 1 (the first line after the header) in error messages.
    Columns not named in the schema are dropped.

    Raises:
        DatasetError: missing column or unparseable numeric/target cell
        OSError: file cannot be read
    """
    path = Path(path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"{path}: file is empty (header row required)")

    for column in list(categorical) + list(numeric) + [target]:
        if column not in frame.columns:
            raise DatasetError(f"missing column: {column}")

    dataset = Dataset(
        categorical={c: frame[c].to_numpy() for c in categorical},
        numeric={c: _parse_numeric(frame[c], f"column '{c}'") for c in numeric},
        target=_parse_numeric(frame[target], "target"),
        target_name=target,
        name=name or path.stem,
        cells={c: frame[c].to_numpy() for c in list(categorical) + list(numeric) + [target]},
    )
    logger.debug(f"Loaded {dataset.n_rows} rows from {path}")
    return dataset


def dataset_to_frame(dataset: Dataset) -> pd.DataFrame:
    """
    Columns as they are written to CSV.

    Source cell text wins where present; otherwise MISSING_LABEL is written as
    an empty cell and numbers in their shortest round-trip form.
    """
    columns = {}
    for key, values in dataset.categorical.items():
        columns[key] = np.where(values == MISSING_LABEL, "", values)
    for key, values in dataset.numeric.items():
        columns[key] = values
    columns[dataset.target_name] = dataset.target
    for key, text in dataset.cells.items():
        columns[key] = text
    return pd.DataFrame(columns)


def write_csv(dataset: Dataset, path) -> Path:
    """
    Write categorical, numeric and target columns (in that order) to a CSV file.

    A dataset from load_csv() is written back cell for cell.
    """
    path = Path(path)
    frame = dataset_to_frame(dataset)
    with atomic_write(path, newline='') as f:
        frame.to_csv(f, index=False, lineterminator="\n", float_format=None)
    return path
