"""Rate-splitting and hierarchical rate-splitting for massive-MIMO downlink.

Modules
-------
channel     array geometry, one-ring correlation and channel draws
rmt         deterministic-equivalent fixed points and asymptotic SINRs
precoding   RZF/MBF private beams, common beams and outer precoders
power       closed-form power splits and regime classification
simulate    Monte Carlo engine, exhaustive split search and baselines
config, cli experiment presets, JSON configs and the command line
"""

__version__ = "0.1.0"

from .errors import (
    ConvergenceError,
    DegenerateInputError,
    IllConditionedError,
    InvalidArgumentError,
    InvalidConfigurationError,
    NotPSDError,
    RateSplitError,
)

__all__ = [
    "__version__",
    "ConvergenceError",
    "DegenerateInputError",
    "IllConditionedError",
    "InvalidArgumentError",
    "InvalidConfigurationError",
    "NotPSDError",
    "RateSplitError",
]
