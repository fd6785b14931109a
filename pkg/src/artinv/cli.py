"""Command-line entry point.

Exit codes: 0 success, 1 runtime error, 2 usage error. The environment
variable ARTINV_OUTPUT_DIR, when set, replaces the output directory of every
subcommand that writes files.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
import time
from collections import defaultdict
from pathlib import Path

import numpy as np

from . import __version__
from .acoustics import AcousticConfig, AcousticError, FormantVector
from .config import ENV_OUTPUT_DIR, ConfigError, RunConfig, build_config, parse_config_text, settings_hash
from .corpus import (
    IngestError,
    RunMetadata,
    aggregate,
    emit_plot_data,
    export_analysis_table,
    figure_groupings,
    ingest_frames,
    read_metadata,
    read_results,
    run_corpus,
    write_corpus_outputs,
    write_frames,
    write_group_stats,
)
from .formants import (
    SPEED_OF_SOUND,
    AudioFrame,
    CeilingSearchConfig,
    FormantError,
    burg_formants,
    estimate_vtl,
    extract_frame,
    optimize_ceiling,
    read_wav,
)
from .inversion import InversionConfig, InversionContext, invert_vowel_set
from .model.data import PARAM_NAMES, ModelDataError, load_model_data
from .model.shape import ArticulatoryVector
from .records import VowelFrameRecord

log = logging.getLogger("artinv")

SEGMENT_COLUMNS = ("wav", "time", "speaker_id", "gender", "age", "period", "vowel", "duration_ms")


class CliError(RuntimeError):
    pass


def _output_dir(arg) -> Path:
    env = os.environ.get(ENV_OUTPUT_DIR)
    if env:
        return Path(env)
    if arg is None:
        raise CliError("no output directory (use --output-dir or set ARTINV_OUTPUT_DIR)")
    return Path(arg)


def _acoustics(args) -> AcousticConfig:
    return AcousticConfig(loss_model=args.loss_model)


# ---------------------------------------------------------------- subcommands


def cmd_synth(args) -> int:
    model = load_model_data(args.model)
    x = ArticulatoryVector.from_array(args.params or np.zeros(len(PARAM_NAMES)))
    if not x.in_bounds():
        raise CliError("articulatory parameters must lie in [-3, 3]")
    ctx = InversionContext(model, _acoustics(args), args.scale)
    try:
        f = ctx.formants(x)
    except AcousticError as exc:
        raise CliError(str(exc)) from None
    print(" ".join(repr(float(v)) for v in f))
    return 0


def cmd_vtl(args) -> int:
    try:
        fv = FormantVector(*args.formants)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    print(f"{estimate_vtl(fv, args.speed_of_sound):.{args.digits}f}")
    return 0


def _read_segments(path: Path) -> list[dict[str, str]]:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = [ln for ln in fh if ln.strip() and not ln.startswith("#")]
    reader = csv.DictReader(rows)
    missing = [c for c in SEGMENT_COLUMNS if c not in (reader.fieldnames or ())]
    if missing:
        raise CliError(f"segment table missing column(s): {', '.join(missing)}")
    return list(reader)


def cmd_extract(args) -> int:
    """Cut a frame at each segment midpoint and measure F1-F4.

    The LPC ceiling is optimised per speaker x vowel group.
    """
    seg_path = Path(args.segments)
    segs = _read_segments(seg_path)
    cfg = CeilingSearchConfig()
    audio = {}
    frames: dict[tuple[str, str], list[tuple[int, AudioFrame]]] = defaultdict(list)
    for i, s in enumerate(segs):
        wav = Path(s["wav"])
        wav = wav if wav.is_absolute() else seg_path.parent / wav
        if wav not in audio:
            audio[wav] = read_wav(wav)
        x, fs = audio[wav]
        fr = extract_frame(x, fs, float(s["time"]), args.frame_ms, s["speaker_id"], s["vowel"])
        frames[(s["speaker_id"], s["vowel"])].append((i, fr))
    ceilings = optimize_ceiling({k: [f for _, f in v] for k, v in frames.items()}, cfg)
    records, failed = [], 0
    for key in sorted(frames):
        for i, fr in frames[key]:
            s = segs[i]
            try:
                fv = burg_formants(fr, ceilings[key], cfg)
            except FormantError as exc:
                log.warning("segment %d (%s): %s", i + 1, key, exc)
                failed += 1
                continue
            records.append(VowelFrameRecord(
                s["speaker_id"], s["gender"], float(s["age"]), s["period"], s["vowel"],
                fv.f1, fv.f2, fv.f3, fv.f4, float(s["duration_ms"]), f"{s['wav']}@{s['time']}",
            ))
    meta = RunMetadata(settings_hash({"ceiling": cfg.ceilings, "frame_ms": args.frame_ms}), 0)
    out = Path(args.output) if args.output else _output_dir(args.output_dir) / "frames.csv"
    write_frames(out, records, meta)
    print(f"frames {len(records)} failed {failed} -> {out}")
    return 0


def _run_config(args) -> RunConfig:
    """Config file values, overridden by any flags given on the command line."""
    values, base = {}, Path.cwd()
    if args.config:
        path = Path(args.config)
        try:
            values = parse_config_text(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError([f"cannot read config {str(path)!r}: {exc.strerror}"]) from None
        base = path.parent
    for key in ("input", "output_dir"):
        if getattr(args, key):
            values[key] = str(Path(getattr(args, key)).resolve())
    for key in ("seed", "workers", "restarts", "loss_model"):
        if getattr(args, key) is not None:
            values[key] = getattr(args, key)
    return build_config(values, base)


def cmd_invert(args) -> int:
    cfg = _run_config(args)
    model = cfg.load_model()
    report = ingest_frames(cfg.input)
    for reason, n in report.counts_by_reason().items():
        log.warning("rejected %d row(s): %s", n, reason)
    meta = RunMetadata(cfg.config_hash(), cfg.seed)
    t0 = time.perf_counter()
    result = run_corpus(
        report.records, model, cfg.inversion, cfg.acoustics, cfg.worker_count, cfg.output_dir, meta
    )
    paths = write_corpus_outputs(cfg.output_dir, result, report, meta)
    print(f"rows_in {report.rows_in}")
    print(f"rejected {len(report.rejections)}")
    print(f"results {len(result.rows)}")
    print(f"speakers {len(result.speakers)} resumed {len(result.resumed)} skipped {len(result.skipped)}")
    print(f"seconds {time.perf_counter() - t0:.1f}")
    print(f"output {paths['results']}")
    return 0


def _results_meta(path: Path) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return read_metadata(fh)


def cmd_aggregate(args) -> int:
    rows = read_results(args.results)
    if not rows:
        raise CliError("results table has no rows")
    out = _output_dir(args.output_dir)
    upstream = _results_meta(Path(args.results)).get("config_hash", "unknown")
    settings = {"upstream": upstream, "resamples": args.resamples, "confidence": args.confidence, "seed": args.seed}
    meta = RunMetadata(settings_hash(settings), args.seed)
    stats = aggregate(rows, resamples=args.resamples, confidence=args.confidence, seed=args.seed)
    write_group_stats(out / "group_stats.csv", stats, meta)
    by_grouping = {
        g: aggregate(rows, g, args.resamples, args.confidence, args.seed) for g in figure_groupings()
    }
    emit_plot_data(by_grouping, out / "plots", meta)
    print(f"groups {len(stats)}")
    print(f"output {out / 'group_stats.csv'}")
    return 0


def cmd_export(args) -> int:
    rows = read_results(args.results)
    upstream = _results_meta(Path(args.results))
    meta = RunMetadata(upstream.get("config_hash", "unknown"), int(upstream.get("seed", 0)))
    text = export_analysis_table(rows, meta)
    out = Path(args.output) if args.output else _output_dir(args.output_dir) / "analysis.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, encoding="utf-8")
    print(f"rows {len(rows)}")
    print(f"output {out}")
    return 0


def roundtrip(n: int, restarts: int, seed: int, model, acoustics: AcousticConfig, tol: float = 0.01):
    """Fraction of random targets whose inversion matches every formant within ``tol``."""
    rng = np.random.default_rng(seed)
    ctx = InversionContext(model, acoustics)
    cfg = InversionConfig(restarts=restarts, seed=seed)
    ok = 0
    for k in range(n):
        x = rng.uniform(-2.0, 2.0, len(PARAM_NAMES))
        f = ctx.formants(x)
        pool = invert_vowel_set([f], ctx, cfg, key=("roundtrip", k)).pools[0]
        best = min(pool, key=lambda s: s.residual)
        gen = ctx.formants(best.x.as_array())
        ok += bool(np.all(np.abs(gen - f) <= tol * f))
    return ok / n


def cmd_roundtrip(args) -> int:
    model = load_model_data(args.model)
    frac = roundtrip(args.n, args.restarts, args.seed, model, _acoustics(args))
    print(f"roundtrip {frac:.3f} {'pass' if frac >= args.threshold else 'fail'}")
    return 0 if frac >= args.threshold else 1


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="artinv", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"artinv {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    def loss(sp, default="lossless"):
        sp.add_argument("--loss-model", choices=("lossless", "lossy"), default=default)

    s = sub.add_parser("synth", help="articulatory vector -> F1..F4 (Hz)")
    s.add_argument("params", nargs="*", type=float, metavar="X",
                   help=f"{len(PARAM_NAMES)} parameters in SD units: {' '.join(PARAM_NAMES)} (default all 0)")
    s.add_argument("--scale", type=float, default=1.0)
    s.add_argument("--model")
    loss(s)
    s.set_defaults(func=cmd_synth)

    s = sub.add_parser("vtl", help="F1..F4 (Hz) -> vocal-tract length (cm)")
    s.add_argument("formants", nargs=4, type=float, metavar="F")
    s.add_argument("--speed-of-sound", type=float, default=SPEED_OF_SOUND)
    s.add_argument("--digits", type=int, default=2)
    s.set_defaults(func=cmd_vtl)

    s = sub.add_parser("extract-formants", help="WAV segments -> vowel-frame table")
    s.add_argument("segments", help="CSV with columns " + ",".join(SEGMENT_COLUMNS))
    s.add_argument("-o", "--output")
    s.add_argument("--output-dir")
    s.add_argument("--frame-ms", type=float, default=25.0)
    s.set_defaults(func=cmd_extract)

    s = sub.add_parser("invert", help="vowel-frame table -> articulatory results")
    s.add_argument("input", nargs="?")
    s.add_argument("-c", "--config")
    s.add_argument("--output-dir")
    s.add_argument("--seed", type=int)
    s.add_argument("--workers", type=int, help="0 = one per CPU, 1 = single-threaded")
    s.add_argument("--restarts", type=int)
    loss(s, default=None)
    s.set_defaults(func=cmd_invert)

    s = sub.add_parser("aggregate", help="results -> group statistics and plot data")
    s.add_argument("results")
    s.add_argument("--output-dir")
    s.add_argument("--resamples", type=int, default=2000)
    s.add_argument("--confidence", type=float, default=0.95)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_aggregate)

    s = sub.add_parser("export", help="results -> analysis table")
    s.add_argument("results")
    s.add_argument("-o", "--output")
    s.add_argument("--output-dir")
    s.set_defaults(func=cmd_export)

    s = sub.add_parser("roundtrip-test", help="invert forward-synthesised random targets")
    s.add_argument("--n", type=int, default=100)
    s.add_argument("--restarts", type=int, default=20)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threshold", type=float, default=0.95)
    s.add_argument("--model")
    loss(s)
    s.set_defaults(func=cmd_roundtrip)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits 2 on usage errors
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except (CliError, ConfigError, IngestError, ModelDataError, FormantError, AcousticError, OSError, ValueError) as exc:
        print(f"artinv {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
