"""Tube acoustics: chain-matrix transfer function and resonance extraction."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model.shape import AreaFunction

LOSS_MODELS = ("lossless", "lossy")


class AcousticError(RuntimeError):
    pass


class InsufficientResonances(AcousticError):
    pass


@dataclass(frozen=True)
class FormantVector:
    """First four formants in Hz, strictly increasing."""

    f1: float
    f2: float
    f3: float
    f4: float

    def __post_init__(self):
        vals = (self.f1, self.f2, self.f3, self.f4)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError(f"formants must be finite: {vals}")
        if not 0 < self.f1 < self.f2 < self.f3 < self.f4:
            raise ValueError(f"formants must satisfy 0 < f1 < f2 < f3 < f4: {vals}")

    def as_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.f3, self.f4], dtype=np.float64)

    @classmethod
    def from_array(cls, values) -> "FormantVector":
        vals = [float(v) for v in np.asarray(values, dtype=np.float64).ravel()]
        if len(vals) != 4:
            raise ValueError(f"expected 4 formants, got {len(vals)}")
        return cls(*vals)

    def scaled(self, s: float) -> "FormantVector":
        return FormantVector.from_array(self.as_array() * s)


@dataclass(frozen=True)
class AcousticConfig:
    speed_of_sound: float = 34000.0  # cm/s
    grid_step: float = 10.0  # Hz
    max_frequency: float = 8000.0  # Hz
    loss_model: str = "lossless"

    def __post_init__(self):
        if not self.speed_of_sound > 0:
            raise ValueError("speed_of_sound must be positive")
        if not self.grid_step > 0:
            raise ValueError("grid_step must be positive")
        if not self.max_frequency > 4 * self.grid_step:
            raise ValueError("max_frequency must exceed four grid steps")
        if self.loss_model not in LOSS_MODELS:
            raise ValueError(f"loss_model must be one of {LOSS_MODELS}")

    @property
    def lossy(self) -> bool:
        return self.loss_model == "lossy"


DEFAULT_ACOUSTICS = AcousticConfig()


def transfer_function(a: AreaFunction, freqs, cfg: AcousticConfig = DEFAULT_ACOUSTICS) -> np.ndarray:
    """|U_lips / U_glottis| at each frequency.

    The glottal end is closed; the lip end is an ideal open end when lossless
    and a piston-in-baffle radiation load when lossy.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    if freqs.size == 0:
        return np.empty(0)
    if freqs.ndim != 1 or np.any(freqs <= 0) or np.any(np.diff(freqs) <= 0):
        raise ValueError("frequencies must be positive and strictly increasing")
    den = kernels.tract_denominator(a.areas, a.lengths, freqs, cfg.speed_of_sound, cfg.lossy)
    with np.errstate(divide="ignore"):
        return 1.0 / np.abs(den)


def resonance_frequencies(a: AreaFunction, cfg: AcousticConfig = DEFAULT_ACOUSTICS, n: int = 4) -> np.ndarray:
    """Up to ``n`` lowest transfer-function peaks below the maximum frequency."""
    return kernels.tract_resonances(
        a.areas, a.lengths, cfg.speed_of_sound, cfg.lossy, cfg.grid_step, cfg.max_frequency, n
    )


def resonances(a: AreaFunction, cfg: AcousticConfig = DEFAULT_ACOUSTICS) -> FormantVector:
    """First four formants of the tract.

    Raises:
        InsufficientResonances: fewer than four peaks below ``max_frequency``.
    """
    peaks = resonance_frequencies(a, cfg, 4)
    if peaks.size < 4:
        raise InsufficientResonances(
            f"insufficient resonances: {peaks.size} peaks below {cfg.max_frequency} Hz"
        )
    if not np.all(np.diff(peaks) > 0):
        raise AcousticError(f"unordered resonances {peaks}")
    return FormantVector.from_array(peaks)
