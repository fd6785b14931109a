"""Articulatory parameters, area functions, and speaker size adaptation."""
from __future__ import annotations

import logging
from dataclasses import astuple, dataclass, fields

import numpy as np

from .. import kernels
from .data import PARAM_NAMES, ModelData

log = logging.getLogger(__name__)

PARAM_BOUND = 3.0
A_MIN = 0.05  # cm^2
L_MIN = 0.05  # cm, floor on any section length


class BoundsError(ValueError):
    pass


@dataclass(frozen=True)
class ArticulatoryVector:
    """Maeda parameters in standard-deviation units.

    Component order is fixed: jaw, td_position, td_height, tt_position,
    lower_lip, lip_protrusion, larynx_height. Positive larynx_height raises
    the larynx (shorter tract); positive lip_protrusion protrudes the lips
    (longer tract).
    """

    jaw: float = 0.0
    td_position: float = 0.0
    td_height: float = 0.0
    tt_position: float = 0.0
    lower_lip: float = 0.0
    lip_protrusion: float = 0.0
    larynx_height: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "ArticulatoryVector":
        values = np.asarray(values, dtype=np.float64).ravel()
        if values.shape != (len(PARAM_NAMES),):
            raise ValueError(f"expected {len(PARAM_NAMES)} components, got {values.shape}")
        return cls(*(float(v) for v in values))

    def to_text(self) -> str:
        return " ".join(repr(v) for v in astuple(self))

    @classmethod
    def from_text(cls, text: str) -> "ArticulatoryVector":
        return cls.from_array([float(t) for t in text.split()])

    def in_bounds(self) -> bool:
        return bool(np.all(np.abs(self.as_array()) <= PARAM_BOUND))


assert tuple(f.name for f in fields(ArticulatoryVector)) == PARAM_NAMES


class ClampCounter:
    """Counts how often parameters had to be pulled back into range."""

    def __init__(self):
        self.count = 0

    def __repr__(self):
        return f"ClampCounter(count={self.count})"


def clamp_params(x, counter: ClampCounter | None = None) -> np.ndarray:
    """Clip to [-3, 3], recording clipped calls in ``counter``."""
    x = np.asarray(x, dtype=np.float64)
    clipped = np.clip(x, -PARAM_BOUND, PARAM_BOUND)
    if counter is not None and not np.array_equal(clipped, x):
        counter.count += 1
        log.debug("clamped articulatory vector %s", x)
    return clipped


@dataclass(frozen=True, eq=False)
class AreaFunction:
    """Tube sections ordered glottis to lips: areas in cm^2, lengths in cm."""

    areas: np.ndarray
    lengths: np.ndarray

    def __post_init__(self):
        areas = np.ascontiguousarray(self.areas, dtype=np.float64)
        lengths = np.ascontiguousarray(self.lengths, dtype=np.float64)
        if areas.ndim != 1 or areas.shape != lengths.shape:
            raise ValueError("areas and lengths must be 1-D and the same length")
        if areas.size == 0:
            raise ValueError("empty area function")
        if not (np.all(np.isfinite(areas)) and np.all(areas > 0)):
            raise ValueError("areas must be finite and positive")
        if not (np.all(np.isfinite(lengths)) and np.all(lengths > 0)):
            raise ValueError("section lengths must be finite and positive")
        object.__setattr__(self, "areas", areas)
        object.__setattr__(self, "lengths", lengths)

    @property
    def total_length(self) -> float:
        return float(self.lengths.sum())

    def __len__(self):
        return self.areas.size

    def __eq__(self, other):
        if not isinstance(other, AreaFunction):
            return NotImplemented
        return np.array_equal(self.areas, other.areas) and np.array_equal(self.lengths, other.lengths)

    @classmethod
    def uniform(cls, length: float, area: float, n_sections: int = 40) -> "AreaFunction":
        return cls(np.full(n_sections, float(area)), np.full(n_sections, length / n_sections))


def _as_param_array(x) -> np.ndarray:
    if isinstance(x, ArticulatoryVector):
        return x.as_array()
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape != (len(PARAM_NAMES),):
        raise ValueError(f"expected {len(PARAM_NAMES)} parameters, got shape {arr.shape}")
    return arr


def shape_coordinates(x, model: ModelData) -> np.ndarray:
    """Linear shape vector (distances then lengths) before any conversion."""
    return model.mean + _as_param_array(x) @ model.basis


def shape_from_params(x, model: ModelData, scale: float = 1.0, a_min: float = A_MIN) -> AreaFunction:
    """Area function for articulatory vector ``x`` at speaker ``scale``.

    Lengths scale by ``scale`` and areas by ``scale**2``. Areas are floored
    at ``a_min``. Out-of-range parameters raise; callers clamp first.
    """
    arr = _as_param_array(x)
    if not np.all(np.abs(arr) <= PARAM_BOUND):
        raise BoundsError(f"parameters outside [-{PARAM_BOUND}, {PARAM_BOUND}]: {arr}")
    if not scale > 0:
        raise ValueError("scale must be positive")
    areas, lengths = kernels.area_function(
        arr, model.mean, model.basis, model.alpha, model.beta, float(scale), a_min, L_MIN
    )
    return AreaFunction(areas, lengths)


def neutral_vtl(model: ModelData, scale: float = 1.0) -> float:
    """Length in cm of the neutral (all-zero) tract at ``scale``."""
    if not scale > 0:
        raise ValueError("scale must be positive")
    unit = shape_from_params(np.zeros(len(PARAM_NAMES)), model, 1.0).total_length
    return scale * unit


def fit_scale_factor(target_vtl: float, model: ModelData) -> float:
    """Size correction factor making the neutral tract ``target_vtl`` cm long."""
    if not target_vtl > 0:
        raise ValueError(f"target VTL must be positive, got {target_vtl}")
    return target_vtl / neutral_vtl(model, 1.0)
