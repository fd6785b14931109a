"""Acoustic-to-articulatory inversion.

Each vowel realization is fitted by several Nelder-Mead runs from random
starts. All runs for one speaker's vowel are pooled, a residual-weighted mean
of the pool is formed, and each realization keeps the run closest to that
mean. This trades a little residual for a much more coherent set of
articulations across repetitions of the same vowel.
"""
from __future__ import annotations

import logging
import zlib
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .acoustics import DEFAULT_ACOUSTICS, AcousticConfig, AcousticError, FormantVector, resonance_frequencies
from .formants import SPEED_OF_SOUND, speaker_vtl
from .model.data import PARAM_NAMES, ModelData
from .model.shape import (
    A_MIN,
    PARAM_BOUND,
    ArticulatoryVector,
    ClampCounter,
    clamp_params,
    fit_scale_factor,
    shape_from_params,
)
from .records import SpeakerProfile, VowelFrameRecord

log = logging.getLogger(__name__)

N_PARAMS = len(PARAM_NAMES)
LH = PARAM_NAMES.index("larynx_height")
LP = PARAM_NAMES.index("lip_protrusion")


@dataclass(frozen=True)
class InversionConfig:
    restarts: int = 20
    reflection: float = 1.0
    expansion: float = 2.0
    contraction: float = 0.5
    shrink: float = 0.5
    initial_step: float = 0.5
    ftol: float = 1e-3  # Hz^2, spread of simplex costs
    max_iter: int = 500
    seed: int = 0
    residual_floor: float = 1e-6  # Hz
    penalty_weight: float = 1e6  # Hz^2 per squared SD outside the bounds
    failure_cost: float = 1e12  # Hz^2, cost when the tract has < 4 resonances

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.residual_floor > 0:
            raise ValueError("residual_floor must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not (self.reflection > 0 and self.expansion > 1 and 0 < self.contraction < 1 and 0 < self.shrink < 1):
            raise ValueError("invalid Nelder-Mead coefficients")
        if not self.initial_step > 0:
            raise ValueError("initial_step must be positive")


@dataclass(frozen=True)
class InversionContext:
    """Everything the forward model needs for one speaker."""

    model: ModelData
    acoustics: AcousticConfig = DEFAULT_ACOUSTICS
    scale: float = 1.0
    a_min: float = A_MIN

    def formants(self, x) -> np.ndarray:
        """Generated F1..F4 for in-bounds ``x`` (raises AcousticError)."""
        area = shape_from_params(x, self.model, self.scale, self.a_min)
        peaks = resonance_frequencies(area, self.acoustics, 4)
        if peaks.size < 4:
            raise AcousticError("insufficient resonances")
        return peaks


@dataclass(frozen=True)
class InversionSolution:
    x: ArticulatoryVector
    residual: float  # Hz, Euclidean norm over the four formants
    converged: bool
    iterations: int


@dataclass(frozen=True)
class SimplexResult:
    x: np.ndarray
    cost: float
    converged: bool
    iterations: int
    evaluations: int


@dataclass(frozen=True)
class VowelInversionResult:
    selected: tuple[InversionSolution, ...]
    mean: ArticulatoryVector
    dispersion: float  # RMS articulatory distance of the pool from the mean
    pools: tuple[tuple[InversionSolution, ...], ...] = field(repr=False)


class FormantCost:
    """Squared formant error with a quadratic penalty outside [-3, 3].

    ``failures`` counts evaluations where the tract had fewer than four
    resonances; those return ``cfg.failure_cost``.
    """

    def __init__(self, f_obs, ctx: InversionContext, cfg: InversionConfig):
        self.f_obs = np.asarray(f_obs.as_array() if isinstance(f_obs, FormantVector) else f_obs, dtype=np.float64)
        self.ctx = ctx
        self.cfg = cfg
        self.failures = 0
        self.evaluations = 0
        self.clamps = ClampCounter()

    def __call__(self, x) -> float:
        self.evaluations += 1
        x = np.asarray(x, dtype=np.float64)
        excess = np.maximum(np.abs(x) - PARAM_BOUND, 0.0)
        penalty = self.cfg.penalty_weight * float(np.dot(excess, excess))
        try:
            gen = self.ctx.formants(clamp_params(x, self.clamps))
        except AcousticError:
            self.failures += 1
            return self.cfg.failure_cost + penalty
        d = self.f_obs - gen
        return float(np.dot(d, d)) + penalty


def formant_cost(x, f_obs, ctx: InversionContext, cfg: InversionConfig | None = None) -> float:
    return FormantCost(f_obs, ctx, cfg or InversionConfig())(x)


def nelder_mead(cost: Callable[[np.ndarray], float], x0, cfg: InversionConfig | None = None) -> SimplexResult:
    """Minimise ``cost`` from ``x0`` with the Nelder-Mead simplex method.

    Converged means the spread of simplex costs fell below ``cfg.ftol`` within
    ``cfg.max_iter`` iterations; otherwise the best vertex seen is returned
    with ``converged=False``.
    """
    cfg = cfg or InversionConfig()
    x0 = np.asarray(x0, dtype=np.float64)
    n = x0.size
    f0 = cost(x0)
    if not np.isfinite(f0):
        raise ValueError(f"cost is not finite at the starting point: {f0}")
    simplex = np.vstack([x0, x0 + cfg.initial_step * np.eye(n)])
    fvals = np.empty(n + 1)
    fvals[0] = f0
    for i in range(1, n + 1):
        fvals[i] = cost(simplex[i])
    evals = n + 1
    alpha, gamma, rho, sigma = cfg.reflection, cfg.expansion, cfg.contraction, cfg.shrink

    converged = False
    it = 0
    while it < cfg.max_iter:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        if fvals[-1] - fvals[0] < cfg.ftol:
            converged = True
            break
        it += 1
        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + alpha * (centroid - worst)
        fr = cost(xr)
        evals += 1
        if fr < fvals[0]:
            xe = centroid + gamma * (xr - centroid)
            fe = cost(xe)
            evals += 1
            if fe < fr:
                simplex[-1], fvals[-1] = xe, fe
            else:
                simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + rho * (xr - centroid)
            fc = cost(xc)
            evals += 1
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + rho * (worst - centroid)
            fc = cost(xc)
            evals += 1
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        best = simplex[0]
        simplex[1:] = best + sigma * (simplex[1:] - best)
        for i in range(1, n + 1):
            fvals[i] = cost(simplex[i])
        evals += n
    if not converged:
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        converged = bool(fvals[-1] - fvals[0] < cfg.ftol)
    return SimplexResult(simplex[0].copy(), float(fvals[0]), converged, it, evals)


def solve_realization(f_obs, ctx: InversionContext, cfg: InversionConfig, x0) -> InversionSolution:
    """One Nelder-Mead run, reported at the clamped optimum."""
    fun = FormantCost(f_obs, ctx, cfg)
    res = nelder_mead(fun, x0, cfg)
    x = clamp_params(res.x)
    try:
        gen = ctx.formants(x)
        residual = float(np.linalg.norm(fun.f_obs - gen))
    except AcousticError:
        residual = float(np.sqrt(cfg.failure_cost))
    return InversionSolution(ArticulatoryVector.from_array(x), residual, res.converged, res.iterations)


def solution_weights(residuals, floor: float = 1e-6) -> np.ndarray:
    """Positive weights ln(R e / max(r, floor)), R the pool's largest residual.

    Lower residual gives a larger weight; the worst solution gets weight 1.
    """
    r = np.maximum(np.asarray(residuals, dtype=np.float64), floor)
    top = max(float(r.max()), floor)
    return np.log(top * np.e / r)


def weighted_mean_solution(pool: Sequence[InversionSolution], cfg: InversionConfig | None = None) -> ArticulatoryVector:
    """Residual-weighted mean articulatory vector of a solution pool."""
    if len(pool) == 0:
        raise ValueError("empty solution pool")
    cfg = cfg or InversionConfig()
    xs = np.array([s.x.as_array() for s in pool])
    w = solution_weights([s.residual for s in pool], cfg.residual_floor)
    return ArticulatoryVector.from_array(w @ xs / w.sum())


def _stable_id(value) -> int:
    return zlib.crc32(str(value).encode("utf-8"))


def realization_rng(seed: int, key: Sequence, index: int) -> np.random.Generator:
    """Independent stream per (seed, speaker/vowel key, realization index)."""
    entropy = [int(seed) & 0xFFFFFFFF, *(_stable_id(k) for k in key), int(index)]
    return np.random.default_rng(np.random.SeedSequence(entropy))


def run_restarts(f_obs, ctx: InversionContext, cfg: InversionConfig, rng: np.random.Generator) -> tuple[InversionSolution, ...]:
    starts = rng.uniform(-PARAM_BOUND, PARAM_BOUND, size=(cfg.restarts, N_PARAMS))
    return tuple(solve_realization(f_obs, ctx, cfg, x0) for x0 in starts)


def select_closest(pools: Sequence[Sequence[InversionSolution]], target: np.ndarray) -> tuple[InversionSolution, ...]:
    """Per realization, the pool member nearest ``target`` (first on ties)."""
    chosen = []
    for pool in pools:
        d = [float(np.linalg.norm(s.x.as_array() - target)) for s in pool]
        chosen.append(pool[int(np.argmin(d))])
    return tuple(chosen)


def select_best_cost(pools: Sequence[Sequence[InversionSolution]]) -> tuple[InversionSolution, ...]:
    """Naive alternative: per realization, the lowest-residual run."""
    return tuple(pool[int(np.argmin([s.residual for s in pool]))] for pool in pools)


def invert_vowel_set(
    f_obs_list: Sequence,
    ctx: InversionContext,
    cfg: InversionConfig | None = None,
    key: Sequence = (),
) -> VowelInversionResult:
    """Invert N realizations of one vowel by one speaker.

    ``key`` (e.g. ``(speaker_id, vowel)``) decorrelates the random starts of
    different vowel sets under the same seed.
    """
    cfg = cfg or InversionConfig()
    if len(f_obs_list) == 0:
        raise ValueError("invert_vowel_set needs at least one realization")
    pools = tuple(
        run_restarts(f, ctx, cfg, realization_rng(cfg.seed, key, i)) for i, f in enumerate(f_obs_list)
    )
    flat = [s for pool in pools for s in pool]
    mean = weighted_mean_solution(flat, cfg)
    m = mean.as_array()
    selected = select_closest(pools, m)
    dispersion = float(np.sqrt(np.mean([np.sum((s.x.as_array() - m) ** 2) for s in flat])))
    return VowelInversionResult(selected, mean, dispersion, pools)


@dataclass(frozen=True)
class RecordResult:
    record: VowelFrameRecord
    solution: InversionSolution


@dataclass(frozen=True)
class SpeakerInversion:
    profile: SpeakerProfile
    scale: float
    results: tuple[RecordResult, ...]
    skipped: tuple[VowelFrameRecord, ...]
    mean_lh: float
    mean_lp: float


def build_profile(records: Sequence[VowelFrameRecord], c: float = SPEED_OF_SOUND) -> SpeakerProfile:
    """Speaker metadata plus mean VTL over the records with valid formants."""
    if not records:
        raise ValueError("no records")
    valid = [r for r in records if r.formants_valid()]
    if not valid:
        raise ValueError(f"speaker {records[0].speaker_id} has no valid records")
    r0 = records[0]
    vtl = speaker_vtl([r.formants for r in valid], c)
    return SpeakerProfile(r0.speaker_id, r0.gender, r0.age, r0.period, vtl, len(valid))


def invert_speaker(
    profile: SpeakerProfile,
    records: Sequence[VowelFrameRecord],
    model: ModelData,
    acoustics: AcousticConfig = DEFAULT_ACOUSTICS,
    cfg: InversionConfig | None = None,
) -> SpeakerInversion:
    """Adapt the model to the speaker's VTL and invert every vowel set.

    Records with invalid formants are skipped and reported.
    """
    cfg = cfg or InversionConfig()
    if not records:
        raise ValueError("invert_speaker needs at least one record")
    if not profile.vtl_plausible:
        log.warning("speaker %s: implausible VTL %.2f cm", profile.speaker_id, profile.vtl)
    scale = fit_scale_factor(profile.vtl, model)
    ctx = InversionContext(model, acoustics, scale)

    by_vowel: dict[str, list[int]] = defaultdict(list)
    skipped = []
    for i, rec in enumerate(records):
        if rec.formants_valid():
            by_vowel[rec.vowel].append(i)
        else:
            skipped.append(rec)

    solved: dict[int, InversionSolution] = {}
    for vowel in sorted(by_vowel):
        idx = by_vowel[vowel]
        res = invert_vowel_set(
            [records[i].formant_array() for i in idx], ctx, cfg, key=(profile.speaker_id, vowel)
        )
        solved.update(zip(idx, res.selected))

    results = tuple(RecordResult(records[i], solved[i]) for i in sorted(solved))
    if results:
        xs = np.array([r.solution.x.as_array() for r in results])
        mean_lh, mean_lp = float(xs[:, LH].mean()), float(xs[:, LP].mean())
    else:
        mean_lh = mean_lp = float("nan")
    return SpeakerInversion(profile, scale, results, tuple(skipped), mean_lh, mean_lp)
