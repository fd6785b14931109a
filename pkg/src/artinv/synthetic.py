"""Forward-synthesised corpora with known articulatory ground truth."""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .acoustics import DEFAULT_ACOUSTICS, AcousticConfig, AcousticError
from .inversion import LH, LP, InversionContext
from .model.data import ModelData
from .records import VowelFrameRecord

# Rough articulatory targets for the French oral vowels in this model's
# parameter space (jaw, td_pos, td_height, tt, lower_lip, lip_prot, larynx).
VOWEL_TARGETS = {
    "i": (-1.0, 2.0, 1.5, 0.5, -0.5, -1.0, 0.0),
    "e": (-0.5, 1.5, 1.0, 0.3, 0.0, -0.8, 0.0),
    "ɛ": (0.5, 1.0, 0.3, 0.0, 0.5, -0.5, 0.0),
    "a": (1.8, 0.0, -1.2, -0.3, 1.2, -0.3, 0.0),
    "ɑ": (1.5, -1.5, -1.0, -0.5, 1.0, 0.0, 0.0),
    "ɔ": (1.0, -1.5, 0.0, -0.5, 0.0, 1.0, 0.0),
    "o": (0.0, -1.8, 0.8, -0.5, -0.8, 1.5, 0.0),
    "u": (-0.5, -2.0, 1.5, -0.5, -1.5, 2.0, 0.0),
    "y": (-1.0, 1.8, 1.5, 0.5, -1.5, 2.0, 0.0),
    "ø": (-0.5, 1.0, 1.0, 0.0, -1.0, 1.5, 0.0),
    "œ": (0.5, 0.8, 0.2, 0.0, -0.3, 1.0, 0.0),
    "ə": (0.0, 0.0, 0.0, 0.0, 0.0, 0.5, 0.0),
}


@dataclass(frozen=True)
class SyntheticSpeaker:
    speaker_id: str
    gender: str
    age: float
    period: str
    scale: float
    lh_offset: float = 0.0
    lp_offset: float = 0.0


def speaker_targets(spk: SyntheticSpeaker, vowel: str) -> np.ndarray:
    x = np.array(VOWEL_TARGETS[vowel], dtype=np.float64)
    x[LH] += spk.lh_offset
    x[LP] += spk.lp_offset
    return x


def synthesize_records(
    speakers,
    vowels,
    realizations: int,
    model: ModelData,
    acoustics: AcousticConfig = DEFAULT_ACOUSTICS,
    articulatory_jitter: float = 0.1,
    formant_jitter: float = 0.0,
    duration_ms: float = 80.0,
    seed: int = 0,
) -> tuple[list[VowelFrameRecord], dict[tuple[str, str, int], np.ndarray]]:
    """Records for every speaker x vowel x realization plus their true vectors.

    Articulatory jitter is Gaussian (SD units) on all parameters except larynx
    height; formant jitter is multiplicative (fraction of each formant).
    """
    rng = np.random.default_rng(seed)
    records = []
    truth = {}
    for spk in speakers:
        ctx = InversionContext(model, acoustics, spk.scale)
        for vowel in vowels:
            base = speaker_targets(spk, vowel)
            for k in range(realizations):
                for _ in range(100):
                    x = base + articulatory_jitter * rng.standard_normal(base.size)
                    x[LH] = base[LH]
                    x = np.clip(x, -3.0, 3.0)
                    try:
                        f = ctx.formants(x)
                    except AcousticError:
                        continue
                    if formant_jitter:
                        f = f * (1.0 + formant_jitter * rng.standard_normal(4))
                    if np.all(np.diff(f) > 0) and f[0] > 0:
                        break
                else:
                    raise RuntimeError(f"could not synthesise {spk.speaker_id}/{vowel}")
                truth[(spk.speaker_id, vowel, k)] = x
                records.append(
                    VowelFrameRecord(
                        spk.speaker_id, spk.gender, spk.age, spk.period, vowel,
                        *(float(v) for v in f), duration_ms, f"synthetic:{vowel}:{k}",
                    )
                )
    return records, truth


def make_speakers(n: int, prefix: str, gender: str, period: str, lh_offset: float = 0.0,
                  age_range=(25.0, 70.0), scale_range=(0.9, 1.05), seed: int = 0) -> list[SyntheticSpeaker]:
    rng = np.random.default_rng(seed)
    return [
        SyntheticSpeaker(
            f"{prefix}{i:03d}", gender, float(round(rng.uniform(*age_range))), period,
            float(rng.uniform(*scale_range)), lh_offset,
        )
        for i in range(n)
    ]


def with_offset(spk: SyntheticSpeaker, lh: float) -> SyntheticSpeaker:
    return replace(spk, lh_offset=lh)
