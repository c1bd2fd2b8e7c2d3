from typing import Any, Dict, List, Optional, TypedDict


class ConfigStatsDict(TypedDict):
    mean: Optional[float]
    std: Optional[float]
    n_ok: int
    n_failed: int


class EncoderReportDict(TypedDict):
    kind: str
    configs: Dict[str, ConfigStatsDict]
    config_order: List[str]
    best_config: Optional[str]
    best_mean: Optional[float]
    best_std: Optional[float]


class FoldScoreDict(TypedDict):
    encoder: str
    config: str
    repeat: int
    fold: int
    score: Optional[float]
    error: Optional[str]


class CvReportDict(TypedDict):
    dataset: str
    plan: Dict[str, Any]
    model: Dict[str, Any]
    metadata: Dict[str, Any]
    encoders: Dict[str, EncoderReportDict]
    failures: int
    scores: List[FoldScoreDict]


class ComparisonDict(TypedDict):
    dataset: str
    encoder: str
    reference: str
    metric: str
    n_pairs: int
    statistic: Optional[float]
    p_value: Optional[float]
    p_q: Optional[float]
    relative_difference: Optional[float]


class BenchmarkReportDict(TypedDict):
    tool: str
    version: str
    config: Dict[str, Any]
    reports: Dict[str, CvReportDict]
    comparisons: List[ComparisonDict]
    failures: int
