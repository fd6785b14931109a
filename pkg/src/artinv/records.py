"""Corpus record types shared by the inversion engine and the pipeline."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .acoustics import FormantVector

PERIODS = ("1955-56", "1975-76", "1995-96", "2015-16")
GENDERS = ("F", "M")
# the 12 French oral vowels, IPA
VOWELS = ("i", "e", "ɛ", "a", "ɑ", "ɔ", "o", "u", "y", "ø", "œ", "ə")
AGE_BANDS = ("20-35", "36-50", "51-65", ">65")
MAX_DURATION_MS = 200.0
VTL_RANGE = (10.0, 22.0)


def age_band(age: float) -> str:
    if age <= 35:
        return "20-35"
    if age <= 50:
        return "36-50"
    if age <= 65:
        return "51-65"
    return ">65"


@dataclass(frozen=True)
class VowelFrameRecord:
    speaker_id: str
    gender: str
    age: float
    period: str
    vowel: str
    f1: float
    f2: float
    f3: float
    f4: float
    duration_ms: float
    source: str = ""

    @property
    def formants(self) -> FormantVector:
        return FormantVector(self.f1, self.f2, self.f3, self.f4)

    def formants_valid(self) -> bool:
        try:
            self.formants
        except ValueError:
            return False
        return True

    def formant_array(self) -> np.ndarray:
        return np.array([self.f1, self.f2, self.f3, self.f4], dtype=np.float64)


@dataclass(frozen=True)
class SpeakerProfile:
    speaker_id: str
    gender: str
    age: float
    period: str
    vtl: float
    record_count: int

    @property
    def vtl_plausible(self) -> bool:
        return VTL_RANGE[0] <= self.vtl <= VTL_RANGE[1]
