"""Numerical laboratory for sup-norms of random Littlewood polynomials and the Gaussian
processes, integral operators and small-ball probabilities behind their lower envelope."""

__version__ = "0.1.0"

from .errors import ConfigError, LabError, NumericalError
from .littlewood import SignSequence, sup_norm
from .rng import SeedSpec

__all__ = ["ConfigError", "LabError", "NumericalError", "SeedSpec", "SignSequence", "sup_norm",
           "__version__"]
