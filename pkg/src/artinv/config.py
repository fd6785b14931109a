"""Run configuration: a plain ``key = value`` text file.

Blank lines and lines starting with ``#`` are ignored. Only ``input`` and
``output_dir`` are required; everything else has a default.

    input = frames.csv          # vowel-frame table (must exist)
    output_dir = out            # created if missing; its parent must exist
    model = maeda.txt           # model data file (default: bundled reference)
    seed = 0
    workers = 0                 # 0 = one per CPU, 1 = single-threaded
    restarts = 20
    max_iter = 500
    ftol = 0.001
    initial_step = 0.5
    speed_of_sound = 34000
    grid_step = 10
    max_frequency = 8000
    loss_model = lossless       # or lossy
    ceiling_min = 4500
    ceiling_max = 6500
    ceiling_step = 50
    lpc_order = 10
    pre_emphasis = 0.98
    max_bandwidth = 600         # Hz, wider LPC poles are not formants
    bootstrap_resamples = 2000
    confidence = 0.95
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .acoustics import AcousticConfig
from .formants import CeilingSearchConfig
from .inversion import InversionConfig
from .model.data import load_model_data

ENV_OUTPUT_DIR = "ARTINV_OUTPUT_DIR"


class ConfigError(ValueError):
    """Carries one message per offending key."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


@dataclass(frozen=True)
class BootstrapConfig:
    resamples: int = 2000
    confidence: float = 0.95

    def __post_init__(self):
        if self.resamples < 1:
            raise ValueError("bootstrap resamples must be >= 1")
        if not 0.0 < self.confidence < 1.0:
            raise ValueError("confidence must be in (0, 1)")


@dataclass(frozen=True)
class RunConfig:
    input: Path | None
    output_dir: Path
    model: Path | None = None
    seed: int = 0
    workers: int = 0
    inversion: InversionConfig = field(default_factory=InversionConfig)
    acoustics: AcousticConfig = field(default_factory=AcousticConfig)
    ceiling: CeilingSearchConfig = field(default_factory=CeilingSearchConfig)
    bootstrap: BootstrapConfig = field(default_factory=BootstrapConfig)

    @property
    def worker_count(self) -> int:
        return self.workers if self.workers > 0 else (os.cpu_count() or 1)

    def load_model(self):
        return load_model_data(self.model)

    def settings(self) -> dict:
        """Everything that affects numeric results (paths excluded)."""
        return {
            "seed": self.seed,
            "inversion": asdict(self.inversion),
            "acoustics": asdict(self.acoustics),
            "ceiling": asdict(self.ceiling),
            "bootstrap": asdict(self.bootstrap),
            "model": self.load_model().checksum,
        }

    def config_hash(self) -> str:
        return settings_hash(self.settings())

    def with_output_dir(self, path) -> "RunConfig":
        return replace(self, output_dir=Path(path))


def settings_hash(settings: dict) -> str:
    blob = json.dumps(settings, sort_keys=True, default=str).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _int(v: str) -> int:
    return int(v)


def _float(v: str) -> float:
    x = float(v)
    if not np.isfinite(x):
        raise ValueError("not finite")
    return x


def _loss(v: str) -> str:
    if v not in ("lossless", "lossy"):
        raise ValueError("expected lossless or lossy")
    return v


_KEYS = {
    "input": str,
    "output_dir": str,
    "model": str,
    "seed": _int,
    "workers": _int,
    "restarts": _int,
    "max_iter": _int,
    "ftol": _float,
    "initial_step": _float,
    "speed_of_sound": _float,
    "grid_step": _float,
    "max_frequency": _float,
    "loss_model": _loss,
    "ceiling_min": _float,
    "ceiling_max": _float,
    "ceiling_step": _float,
    "lpc_order": _int,
    "pre_emphasis": _float,
    "max_bandwidth": _float,
    "bootstrap_resamples": _int,
    "confidence": _float,
}
KNOWN_KEYS = tuple(_KEYS)


def parse_config_text(text: str) -> dict:
    """Raw ``key -> converted value`` mapping; raises ConfigError per key."""
    values, problems = {}, []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _KEYS:
            problems.append(f"unknown key {key!r}")
            continue
        if key in values:
            problems.append(f"duplicate key {key!r}")
            continue
        try:
            values[key] = _KEYS[key](value)
        except ValueError as exc:
            problems.append(f"{key}: bad value {value!r} ({exc})")
    if problems:
        raise ConfigError(problems)
    return values


def build_config(values: dict, base_dir: Path | None = None, require_input: bool = True) -> RunConfig:
    """Validate ``values`` and fill defaults. Relative paths resolve against ``base_dir``."""
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    problems = []

    def path_of(key):
        p = Path(values[key])
        return p if p.is_absolute() else base / p

    inp = None
    if "input" in values:
        inp = path_of("input")
        if not inp.is_file():
            problems.append(f"input: no such file {str(inp)!r}")
    elif require_input:
        problems.append("input: required path missing")

    out = None
    env_out = os.environ.get(ENV_OUTPUT_DIR)
    if env_out:
        out = Path(env_out)
    elif "output_dir" in values:
        out = path_of("output_dir")
    else:
        problems.append("output_dir: required path missing")
    if out is not None and not out.is_dir() and not out.parent.is_dir():
        problems.append(f"output_dir: parent of {str(out)!r} does not exist")

    model = None
    if "model" in values:
        model = path_of("model")
        if not model.is_file():
            problems.append(f"model: no such file {str(model)!r}")

    def section(name, build):
        try:
            return build()
        except ValueError as exc:
            problems.append(f"{name}: {exc}")
            return None

    d_inv, d_ac, d_ce, d_bs = InversionConfig(), AcousticConfig(), CeilingSearchConfig(), BootstrapConfig()
    for key, ok, rule in (
        ("restarts", lambda v: v >= 1, ">= 1"),
        ("max_iter", lambda v: v >= 1, ">= 1"),
        ("ftol", lambda v: v > 0, "> 0"),
        ("initial_step", lambda v: v > 0, "> 0"),
        ("workers", lambda v: v >= 0, ">= 0"),
    ):
        if key in values and not ok(values[key]):
            problems.append(f"{key}: must be {rule}, got {values[key]}")
    seed = values.get("seed", 0)
    inv = section("inversion", lambda: InversionConfig(
        restarts=values.get("restarts", d_inv.restarts),
        max_iter=values.get("max_iter", d_inv.max_iter),
        ftol=values.get("ftol", d_inv.ftol),
        initial_step=values.get("initial_step", d_inv.initial_step),
        seed=seed,
    )) if not problems else None
    ac = section("acoustics", lambda: AcousticConfig(
        speed_of_sound=values.get("speed_of_sound", d_ac.speed_of_sound),
        grid_step=values.get("grid_step", d_ac.grid_step),
        max_frequency=values.get("max_frequency", d_ac.max_frequency),
        loss_model=values.get("loss_model", d_ac.loss_model),
    ))

    def ceilings():
        lo = values.get("ceiling_min", d_ce.ceilings[0])
        hi = values.get("ceiling_max", d_ce.ceilings[-1])
        step = values.get("ceiling_step", 50.0)
        if not step > 0 or hi < lo:
            raise ValueError("need ceiling_step > 0 and ceiling_max >= ceiling_min")
        grid = tuple(float(c) for c in np.arange(lo, hi + step * 1e-6, step))
        return CeilingSearchConfig(
            grid,
            values.get("lpc_order", d_ce.lpc_order),
            values.get("pre_emphasis", d_ce.pre_emphasis),
            values.get("max_bandwidth", d_ce.max_bandwidth),
        )

    ce = section("ceiling", ceilings)
    bs = section("bootstrap", lambda: BootstrapConfig(
        values.get("bootstrap_resamples", d_bs.resamples), values.get("confidence", d_bs.confidence)
    ))
    if problems:
        raise ConfigError(problems)
    return RunConfig(inp, out, model, seed, values.get("workers", 0), inv, ac, ce, bs)


def load_config(path) -> RunConfig:
    """Parse and validate a configuration file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config {str(path)!r}: {exc.strerror}"]) from None
    return build_config(parse_config_text(text), base_dir=path.parent)
