# Constants for the quantile encoder benchmark

# Missing / empty categorical cells become their own category
MISSING_LABEL = "␀MISSING"

# Encoder defaults
DEFAULT_QUANTILE_P = 0.5
DEFAULT_QUANTILE_M = 1.0
DEFAULT_SUMMARY_QUANTILES = (0.4, 0.5, 0.6)
DEFAULT_SUMMARY_M = 100.0
UNSEEN_ORDINAL_CODE = -1

# Elastic net defaults (scikit-learn convention)
DEFAULT_ALPHA = 1.0
DEFAULT_L1_RATIO = 0.5
DEFAULT_MAX_ITER = 1000
DEFAULT_TOL = 1e-4

# Cross-validation protocol
DEFAULT_FOLDS = 4
DEFAULT_REPEATS = 3
DEFAULT_SEED = 0
DEFAULT_METRIC = "mae"
METRICS = ("mae", "mse")

# Encoder grid search
GRID_M_VALUES = (0.0, 1.0, 10.0, 50.0)
GRID_P_VALUES = (0.25, 0.5, 0.75)
SUMMARY_QUARTILES = (0.25, 0.5, 0.75)

# Default encoder families: name -> (kind, m grid, p grid)
DEFAULT_FAMILIES = {
    "quantile": ("quantile", GRID_M_VALUES, GRID_P_VALUES),
    "target": ("target_mean", (0.0,), ()),
    "m_estimate": ("m_estimate_mean", (1.0, 10.0, 50.0), ()),
    "summary": ("summary", GRID_M_VALUES, (SUMMARY_QUARTILES,)),
    "ordinal": ("ordinal", (), ()),
}
DEFAULT_REFERENCE = "target"

# Wilcoxon: exact enumeration up to this many nonzero differences
WILCOXON_EXACT_MAX_N = 25

# Synthetic Cauchy dataset
DEFAULT_CENTER_LOW = 0.0
DEFAULT_CENTER_HIGH = 100.0
DEFAULT_CAUCHY_SCALES = (1.0, 2.0)
DEFAULT_NOISE_SIGMA = 1.0
