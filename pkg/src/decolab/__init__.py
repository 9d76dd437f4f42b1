"""decolab: desk-scale decoherence, spectral-diffusion and growth-calibration toolkit."""

from .constants import CONSTANTS, PhysicalConstants

__version__ = "0.1.0"

__all__ = ["CONSTANTS", "PhysicalConstants", "__version__"]
