"""
Quantile Encoder Bench - Test Suite

Unit tests for encoders, regression, statistics, cross-validation,
reports, configuration and the command line.
"""

__version__ = "1.0.0"
