# Quantile Encoder Benchmark
__version__ = "1.0.0"
