"""Power and sample size for two-sample projection tests of sparse functional data."""

from ._core import (
    ConfigError,
    NumericError,
    __version__,
    chisq_quantile,
    exact_power,
    f_quantile,
    hotelling_test,
    power,
    sample_size,
    test_csv,
    validate,
)

__all__ = [
    "ConfigError",
    "NumericError",
    "__version__",
    "chisq_quantile",
    "exact_power",
    "f_quantile",
    "hotelling_test",
    "power",
    "sample_size",
    "test_csv",
    "validate",
]
