"""Acoustic-to-articulatory inversion of vowel formants with a Maeda-type model."""

__version__ = "0.1.0"

from .acoustics import AcousticConfig, FormantVector, resonances, transfer_function  # noqa: E402
from .formants import burg_formants, estimate_vtl, optimize_ceiling  # noqa: E402
from .inversion import InversionConfig, InversionContext, invert_vowel_set, weighted_mean_solution  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .model import ArticulatoryVector, AreaFunction, load_model_data, shape_from_params  # noqa: E402

__all__ = [
    "AcousticConfig",
    "AreaFunction",
    "ArticulatoryVector",
    "BACKEND",
    "FormantVector",
    "InversionConfig",
    "InversionContext",
    "__version__",
    "burg_formants",
    "estimate_vtl",
    "invert_vowel_set",
    "load_model_data",
    "optimize_ceiling",
    "resonances",
    "shape_from_params",
    "transfer_function",
    "weighted_mean_solution",
]
