"""Exception hierarchy shared by all qe_bench modules."""


class QEBenchError(ValueError):
    """Base class for every error raised on purpose by qe_bench."""


class DatasetError(QEBenchError):
    """Raised for malformed datasets, schemas and CSV files."""


class EncoderError(QEBenchError):
    """Raised when an encoder cannot be fit or applied."""


class RegressionError(QEBenchError):
    """Raised for invalid elastic-net inputs or specs."""


class EvaluationError(QEBenchError):
    """Raised for invalid metrics inputs, fold plans or grids."""


class StatsError(QEBenchError):
    """Raised for invalid inputs to the hypothesis tests."""


class ConfigError(QEBenchError):
    """Raised when a run configuration cannot be resolved."""
