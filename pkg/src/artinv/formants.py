"""Formant measurement from audio frames and vocal-tract length estimation.

Formants come from a Burg LPC fit at a sampling rate of twice the analysis
ceiling. The ceiling itself is chosen per speaker x phone group as the grid
value that makes F1 and F2 most stable across the group's tokens.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy import signal
from scipy.io import wavfile

from .acoustics import FormantVector

log = logging.getLogger(__name__)

SPEED_OF_SOUND = 34000.0  # cm/s
# weights of F1..F4 in the VTL regression, each divided by (2n - 1)
VTL_WEIGHTS = np.array([0.089 / 1, 0.102 / 3, 0.121 / 5, 0.669 / 7])

MIN_FORMANT_HZ = 50.0
# error power below this fraction of the signal power means the signal is
# fully predicted and higher-order poles would be fitting round-off
BURG_EXHAUSTED = 1e-4


class FormantError(ValueError):
    pass


class InsufficientPoles(FormantError):
    pass


class NoStableFormants(FormantError):
    pass


@dataclass(frozen=True, eq=False)
class AudioFrame:
    samples: np.ndarray
    sample_rate: float
    speaker: str = ""
    phone: str = ""

    @property
    def duration_ms(self) -> float:
        return 1000.0 * len(self.samples) / self.sample_rate


def _default_ceilings() -> tuple[float, ...]:
    return tuple(float(c) for c in np.arange(4500.0, 6500.0 + 1e-9, 50.0))


@dataclass(frozen=True)
class CeilingSearchConfig:
    ceilings: tuple[float, ...] = field(default_factory=_default_ceilings)
    lpc_order: int = 10
    pre_emphasis: float = 0.98
    # wider poles shape the source spectrum rather than mark a resonance
    max_bandwidth: float = 600.0

    def __post_init__(self):
        c = np.asarray(self.ceilings, dtype=np.float64)
        if c.size == 0:
            raise ValueError("ceiling grid is empty")
        if np.any(np.diff(c) <= 0):
            raise ValueError("ceiling grid must be strictly increasing")
        if self.lpc_order < 2 or self.lpc_order % 2:
            raise ValueError("lpc_order must be an even integer >= 2")
        if not 0.0 <= self.pre_emphasis < 1.0:
            raise ValueError("pre_emphasis must be in [0, 1)")
        if not self.max_bandwidth > 0:
            raise ValueError("max_bandwidth must be positive")


def burg(x: np.ndarray, order: int) -> tuple[np.ndarray, float]:
    """Burg lattice estimate of an all-pole model.

    Returns the prediction polynomial ``[1, a1, ..., ap]`` and the final error
    power. Stops early (shorter polynomial) when the signal is exhausted.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if n <= order:
        raise FormantError(f"frame of {n} samples too short for order {order}")
    a = np.array([1.0])
    f = x.copy()
    b = x.copy()
    power0 = float(np.dot(x, x)) / n
    if power0 == 0.0:
        return a, 0.0
    err = power0
    for m in range(order):
        ef = f[m + 1 :]
        eb = b[m : n - 1]
        den = np.dot(ef, ef) + np.dot(eb, eb)
        if den == 0.0:
            break
        k = -2.0 * np.dot(ef, eb) / den
        f[m + 1 :], b[m + 1 :] = ef + k * eb, eb + k * ef
        a = np.concatenate([a, [0.0]])
        a = a + k * a[::-1]
        err *= 1.0 - k * k
        if err <= BURG_EXHAUSTED * power0:
            break
    return a, err


def lpc_formants(a: np.ndarray, fs: float) -> tuple[np.ndarray, np.ndarray]:
    """Frequencies and bandwidths (Hz) of the upper-half-plane roots, sorted."""
    if a.size < 3:
        return np.empty(0), np.empty(0)
    roots = np.roots(a)
    roots = roots[(roots.imag > 0) & (np.abs(roots) < 1.0)]
    freqs = np.angle(roots) * fs / (2 * np.pi)
    bws = -np.log(np.abs(roots)) * fs / np.pi
    order = np.argsort(freqs)
    return freqs[order], bws[order]


def _gaussian_window(n: int) -> np.ndarray:
    # Praat-style Gaussian window
    edge = np.exp(-12.0)
    t = (np.arange(n) + 0.5) / n - 0.5
    return (np.exp(-48.0 * t * t) - edge) / (1.0 - edge)


def _resample(x: np.ndarray, fs: float, target: float) -> np.ndarray:
    ratio = Fraction(target / fs).limit_denominator(1000)
    if ratio == 1:
        return x.astype(np.float64, copy=True)
    return signal.resample_poly(x, ratio.numerator, ratio.denominator)


def burg_formants(
    frame: AudioFrame, ceiling: float, cfg: CeilingSearchConfig | None = None
) -> FormantVector:
    """Four lowest LPC formants of ``frame`` analysed up to ``ceiling`` Hz.

    Raises:
        InsufficientPoles: fewer than four pole pairs inside (50, ceiling - 50)
            with bandwidth below ``cfg.max_bandwidth``.
        NoStableFormants: candidates are degenerate or unordered.
    """
    cfg = cfg or CeilingSearchConfig()
    fs = 2.0 * ceiling
    x = _resample(np.asarray(frame.samples, dtype=np.float64), frame.sample_rate, fs)
    if x.size <= 2 * cfg.lpc_order:
        raise FormantError("frame too short for the LPC order at the resampled rate")
    x = np.append(x[0], x[1:] - cfg.pre_emphasis * x[:-1])
    x = x * _gaussian_window(x.size)
    a, _ = burg(x, cfg.lpc_order)
    freqs, bws = lpc_formants(a, fs)
    keep = (freqs > MIN_FORMANT_HZ) & (freqs < ceiling - MIN_FORMANT_HZ) & (bws < cfg.max_bandwidth)
    freqs = freqs[keep]
    if freqs.size < 4:
        raise InsufficientPoles(f"insufficient poles: {freqs.size} formant candidates below {ceiling} Hz")
    try:
        return FormantVector.from_array(freqs[:4])
    except ValueError as exc:
        raise NoStableFormants(f"no stable formants: {exc}") from None


def _ceiling_cost(frames: Sequence[AudioFrame], ceiling: float, cfg: CeilingSearchConfig) -> float:
    logs = []
    for fr in frames:
        try:
            fv = burg_formants(fr, ceiling, cfg)
        except FormantError:
            return np.inf
        logs.append(np.log([fv.f1, fv.f2]))
    logs = np.asarray(logs)
    return float(np.var(logs[:, 0]) + np.var(logs[:, 1]))


def ceiling_costs(frames: Sequence[AudioFrame], cfg: CeilingSearchConfig | None = None) -> np.ndarray:
    """Summed variance of log F1 and log F2 across ``frames`` at each ceiling."""
    cfg = cfg or CeilingSearchConfig()
    return np.array([_ceiling_cost(frames, c, cfg) for c in cfg.ceilings])


def optimize_ceiling(
    groups: Mapping[Hashable, Sequence[AudioFrame]], cfg: CeilingSearchConfig | None = None
) -> dict[Hashable, float]:
    """Optimal analysis ceiling per group (e.g. per speaker x phone).

    The winning ceiling minimises the within-group variance of log F1 plus
    log F2. Ties go to the lowest ceiling. Ceilings at which any frame fails
    to yield four formants are ineligible.
    """
    cfg = cfg or CeilingSearchConfig()
    out = {}
    for key, frames in groups.items():
        if len(frames) == 0:
            raise ValueError(f"empty group {key!r}")
        costs = ceiling_costs(frames, cfg)
        if not np.any(np.isfinite(costs)):
            raise FormantError(f"no ceiling yields four formants for group {key!r}")
        out[key] = float(cfg.ceilings[int(np.argmin(costs))])
    return out


def estimate_vtl(f: FormantVector, c: float = SPEED_OF_SOUND) -> float:
    """Vocal-tract length (cm) from one set of four formants."""
    phi = float(np.dot(VTL_WEIGHTS, f.as_array()))
    return c / (4.0 * phi)


def speaker_vtl(records: Iterable[FormantVector], c: float = SPEED_OF_SOUND) -> float:
    """Mean of the per-vowel VTL estimates."""
    values = [estimate_vtl(f, c) for f in records]
    if not values:
        raise ValueError("speaker_vtl needs at least one formant vector")
    return float(np.mean(values))


def read_wav(path) -> tuple[np.ndarray, float]:
    """Mono float samples in [-1, 1] and the sample rate of a PCM WAV file."""
    fs, data = wavfile.read(path)
    if data.dtype == np.int16:
        data = data / 32768.0
    elif data.dtype == np.int32:
        data = data / 2147483648.0
    elif data.dtype == np.uint8:
        data = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype.kind != "f":
        raise ValueError(f"unsupported WAV sample type {data.dtype}")
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 2:
        data = data.mean(axis=1)
    return data, float(fs)


def extract_frame(
    samples: np.ndarray,
    sample_rate: float,
    center: float,
    duration_ms: float = 25.0,
    speaker: str = "",
    phone: str = "",
) -> AudioFrame:
    """Cut a frame of ``duration_ms`` centred on ``center`` seconds."""
    half = int(round(duration_ms * sample_rate / 2000.0))
    mid = int(round(center * sample_rate))
    lo, hi = mid - half, mid + half
    if lo < 0 or hi > len(samples):
        raise ValueError(f"frame at {center:.3f}s runs past the signal")
    return AudioFrame(np.asarray(samples[lo:hi], dtype=np.float64), sample_rate, speaker, phone)


def synth_vowel(
    formants: Sequence[float],
    bandwidths: Sequence[float],
    fs: float = 16000.0,
    f0: float = 120.0,
    duration_ms: float = 25.0,
    phase: float = 0.0,
    noise: float = 0.0,
    seed: int | None = None,
) -> np.ndarray:
    """Pulse train through a cascade of second-order resonators.

    ``phase`` (0..1) offsets the pulse train; a 100 ms lead-in is discarded so
    the frame starts in steady state.
    """
    lead = int(0.1 * fs)
    n = lead + int(round(duration_ms * fs / 1000.0))
    period = fs / f0
    src = np.zeros(n)
    t = phase * period
    while t < n:
        src[int(t)] = 1.0
        t += period
    if noise:
        src = src + noise * np.random.default_rng(seed).standard_normal(n)
    poles = []
    for fr, bw in zip(formants, bandwidths):
        r = np.exp(-np.pi * bw / fs)
        poles += [r * np.exp(2j * np.pi * fr / fs), r * np.exp(-2j * np.pi * fr / fs)]
    den = np.real(np.poly(poles))
    y = signal.lfilter([1.0], den, src)
    # glottal/radiation tilt; undone in part by pre-emphasis at analysis
    y = signal.lfilter([1.0], [1.0, -0.9], y)
    y = y[lead:]
    return y / np.max(np.abs(y))
