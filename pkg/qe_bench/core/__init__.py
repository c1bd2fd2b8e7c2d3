"""Encoding, regression, evaluation and statistics"""
from .dataset import Dataset, load_csv, write_csv
from .encoders import (
    EncoderKind,
    FittedEncoder,
    QuantileSpec,
    SummarySpec,
    fit_encoder,
    fit_ordinal_encoder,
    fit_quantile_encoder,
    fit_summary_encoder,
    fit_target_mean_encoder,
    m_estimate_blend,
    quantile,
)

__all__ = [
    'Dataset', 'load_csv', 'write_csv',
    'EncoderKind', 'FittedEncoder', 'QuantileSpec', 'SummarySpec',
    'fit_encoder', 'fit_ordinal_encoder', 'fit_quantile_encoder',
    'fit_summary_encoder', 'fit_target_mean_encoder', 'm_estimate_blend', 'quantile',
]
