"""Maeda-style articulatory model: parameters to area function."""
from .data import (
    PARAM_NAMES,
    ChecksumMismatch,
    MalformedModelFile,
    ModelData,
    ModelDataError,
    WrongBasisCount,
    dumps_model_data,
    load_model_data,
    loads_model_data,
    save_model_data,
)
from .shape import (
    A_MIN,
    PARAM_BOUND,
    AreaFunction,
    ArticulatoryVector,
    BoundsError,
    ClampCounter,
    clamp_params,
    fit_scale_factor,
    neutral_vtl,
    shape_coordinates,
    shape_from_params,
)

__all__ = [
    "A_MIN",
    "PARAM_BOUND",
    "PARAM_NAMES",
    "AreaFunction",
    "ArticulatoryVector",
    "BoundsError",
    "ChecksumMismatch",
    "ClampCounter",
    "MalformedModelFile",
    "ModelData",
    "ModelDataError",
    "WrongBasisCount",
    "clamp_params",
    "dumps_model_data",
    "fit_scale_factor",
    "load_model_data",
    "loads_model_data",
    "neutral_vtl",
    "save_model_data",
    "shape_coordinates",
    "shape_from_params",
]
