# Experiment presets for the quantile encoder benchmark
