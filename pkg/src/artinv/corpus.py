"""Corpus-scale plumbing: ingest frame tables, invert per speaker, aggregate.

All tables are comma-separated UTF-8 with a dot decimal. Every file this
module writes starts with ``#`` metadata lines (tool version, config hash,
seed); readers skip them. Floats are written with ``repr`` so a table read
back reproduces the same numbers bit for bit.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import math
import os
import re
import zlib
from collections import Counter, defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__
from .acoustics import DEFAULT_ACOUSTICS, AcousticConfig, FormantVector
from .inversion import InversionConfig, build_profile, invert_speaker
from .model.data import PARAM_NAMES, ModelData
from .model.shape import ArticulatoryVector
from .records import AGE_BANDS, GENDERS, MAX_DURATION_MS, PERIODS, VOWELS, VowelFrameRecord, age_band

log = logging.getLogger(__name__)

INPUT_COLUMNS = (
    "speaker_id", "gender", "age", "period", "vowel",
    "f1", "f2", "f3", "f4", "duration_ms", "source",
)
RESULT_COLUMNS = INPUT_COLUMNS + ("scale",) + PARAM_NAMES + ("residual", "converged")
SPEAKER_COLUMNS = (
    "speaker_id", "gender", "age", "period", "vtl", "scale",
    "records", "inverted", "skipped", "mean_lh", "mean_lp",
)
ANALYSIS_COLUMNS = ("Speaker", "Gender", "Age", "Period", "Vowel", "LH", "LP")
STATS_COLUMNS = ("gender", "age_band", "period", "parameter", "n", "mean", "sd", "ci_low", "ci_high")
PLOT_COLUMNS = ("x", "group", "mean", "ci_low", "ci_high")
REJECTION_COLUMNS = ("line", "reason", "detail")

GROUP_FIELDS = ("gender", "age_band", "period")
DEFAULT_GROUPING = GROUP_FIELDS
STAT_PARAMS = ("larynx_height", "lip_protrusion")


class IngestError(ValueError):
    """The table as a whole cannot be read (bad header)."""


# ---------------------------------------------------------------- metadata


@dataclass(frozen=True)
class RunMetadata:
    config_hash: str
    seed: int
    version: str = __version__

    def lines(self) -> list[str]:
        return [f"# artinv {self.version}", f"# config_hash {self.config_hash}", f"# seed {self.seed}"]


def read_metadata(lines: Iterable[str]) -> dict[str, str]:
    meta = {}
    for line in lines:
        if not line.startswith("#"):
            break
        parts = line[1:].strip().split(None, 1)
        if len(parts) == 2:
            meta[parts[0]] = parts[1].strip()
    return meta


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_table(path, columns: Sequence[str], rows: Iterable[Sequence], meta: RunMetadata) -> None:
    """Atomic write: metadata header, column header, rows."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        for line in meta.lines():
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    os.replace(tmp, path)


def _data_lines(text: str) -> tuple[list[tuple[int, str]], dict[str, str]]:
    lines = text.splitlines()
    meta = read_metadata(lines)
    return [(i + 1, ln) for i, ln in enumerate(lines) if ln.strip() and not ln.startswith("#")], meta


def _read_text(source) -> str:
    if isinstance(source, (str, os.PathLike)) and not (isinstance(source, str) and "\n" in source):
        return Path(source).read_text(encoding="utf-8")
    if hasattr(source, "read"):
        return source.read()
    return str(source)


# ---------------------------------------------------------------- ingestion


@dataclass(frozen=True)
class Rejection:
    line: int
    reason: str
    detail: str


@dataclass(frozen=True)
class IngestReport:
    records: tuple[VowelFrameRecord, ...]
    rejections: tuple[Rejection, ...]
    rows_in: int

    @property
    def rows_out(self) -> int:
        return len(self.records)

    def counts_by_reason(self) -> dict[str, int]:
        return dict(sorted(Counter(r.reason for r in self.rejections).items()))

    def conserved(self) -> bool:
        return self.rows_in == self.rows_out + sum(self.counts_by_reason().values())

    def speaker_counts(self) -> dict[tuple[str, str, str], int]:
        """Distinct speakers per (gender, age band, period)."""
        seen = {}
        for r in self.records:
            seen.setdefault(r.speaker_id, (r.gender, age_band(r.age), r.period))
        return dict(Counter(seen.values()))


def _check_header(header: list[str]) -> list[str]:
    cols = [c.strip() for c in header]
    unknown = [c for c in cols if c not in INPUT_COLUMNS]
    if unknown:
        raise IngestError(f"unknown column(s): {', '.join(unknown)}")
    missing = [c for c in INPUT_COLUMNS if c not in cols]
    if missing:
        raise IngestError(f"missing column(s): {', '.join(missing)}")
    if len(set(cols)) != len(cols):
        raise IngestError("duplicate column names")
    return cols


def _parse_row(values: dict[str, str]) -> VowelFrameRecord:
    """Raises ``_Reject`` with the reason label."""

    def num(key):
        try:
            x = float(values[key])
        except ValueError:
            raise _Reject("unparseable", f"{key}={values[key]!r}") from None
        if not math.isfinite(x):
            raise _Reject("unparseable", f"{key}={values[key]!r}")
        return x

    sid = values["speaker_id"].strip()
    if not sid:
        raise _Reject("speaker", "empty speaker_id")
    gender = values["gender"].strip()
    if gender not in GENDERS:
        raise _Reject("gender", f"gender={gender!r}")
    period = values["period"].strip()
    if period not in PERIODS:
        raise _Reject("period", f"period={period!r}")
    vowel = values["vowel"].strip()
    if vowel not in VOWELS:
        raise _Reject("vowel", f"vowel={vowel!r}")
    age = num("age")
    if not 0 < age < 130:
        raise _Reject("age", f"age={age!r}")
    f = [num(k) for k in ("f1", "f2", "f3", "f4")]
    dur = num("duration_ms")
    if not 0 < dur <= MAX_DURATION_MS:
        raise _Reject("duration", f"duration_ms={dur!r}")
    if min(f) <= 0:
        raise _Reject("formant value", f"formants={f}")
    try:
        FormantVector(*f)
    except ValueError as exc:
        raise _Reject("formant order", str(exc)) from None
    return VowelFrameRecord(sid, gender, age, period, vowel, *f, dur, values["source"])


class _Reject(Exception):
    def __init__(self, reason, detail):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail


def ingest_frames(source) -> IngestReport:
    """Validate a vowel-frame table.

    ``source`` is a path, an open text stream, or the table text itself.
    Rows failing validation are reported with a line number and a reason
    (``duration``, ``formant order``, ``formant value``, ``unparseable``,
    ``field count``, ``gender``, ``period``, ``vowel``, ``age``,
    ``speaker``). A header with unknown or missing columns raises
    IngestError.
    """
    text = _read_text(source)
    lines, _ = _data_lines(text)
    if not lines:
        raise IngestError("empty table: no header row")
    header_line, header_text = lines[0]
    cols = _check_header(next(csv.reader([header_text])))
    records, rejections = [], []
    for lineno, raw in lines[1:]:
        fields = next(csv.reader([raw]))
        if len(fields) != len(cols):
            rejections.append(Rejection(lineno, "field count", f"expected {len(cols)} fields, got {len(fields)}"))
            continue
        try:
            records.append(_parse_row(dict(zip(cols, fields))))
        except _Reject as exc:
            rejections.append(Rejection(lineno, exc.reason, exc.detail))
    report = IngestReport(tuple(records), tuple(rejections), len(lines) - 1)
    for r in rejections:
        log.debug("line %d rejected (%s): %s", r.line, r.reason, r.detail)
    return report


def record_row(r: VowelFrameRecord) -> tuple:
    return (r.speaker_id, r.gender, r.age, r.period, r.vowel, r.f1, r.f2, r.f3, r.f4, r.duration_ms, r.source)


def write_frames(path, records: Iterable[VowelFrameRecord], meta: RunMetadata) -> None:
    write_table(path, INPUT_COLUMNS, (record_row(r) for r in records), meta)


def write_rejections(path, report: IngestReport, meta: RunMetadata) -> None:
    write_table(path, REJECTION_COLUMNS, ((r.line, r.reason, r.detail) for r in report.rejections), meta)


# ---------------------------------------------------------------- inversion


@dataclass(frozen=True)
class ResultRow:
    record: VowelFrameRecord
    scale: float
    x: ArticulatoryVector
    residual: float
    converged: bool

    @property
    def lh(self) -> float:
        return self.x.larynx_height

    @property
    def lp(self) -> float:
        return self.x.lip_protrusion

    def as_row(self) -> tuple:
        return record_row(self.record) + (self.scale, *self.x.as_array().tolist(), self.residual, self.converged)


@dataclass(frozen=True)
class SpeakerSummary:
    speaker_id: str
    gender: str
    age: float
    period: str
    vtl: float
    scale: float
    records: int
    inverted: int
    skipped: int
    mean_lh: float
    mean_lp: float

    def as_row(self) -> tuple:
        return (self.speaker_id, self.gender, self.age, self.period, self.vtl, self.scale,
                self.records, self.inverted, self.skipped, self.mean_lh, self.mean_lp)


@dataclass(frozen=True)
class SkippedSpeaker:
    speaker_id: str
    reason: str


@dataclass
class CorpusResult:
    rows: list[ResultRow] = field(default_factory=list)
    speakers: list[SpeakerSummary] = field(default_factory=list)
    skipped: list[SkippedSpeaker] = field(default_factory=list)
    resumed: list[str] = field(default_factory=list)


def _parse_result_row(d: Mapping[str, str]) -> ResultRow:
    rec = VowelFrameRecord(
        d["speaker_id"], d["gender"], float(d["age"]), d["period"], d["vowel"],
        float(d["f1"]), float(d["f2"]), float(d["f3"]), float(d["f4"]), float(d["duration_ms"]), d["source"],
    )
    x = ArticulatoryVector.from_array([float(d[p]) for p in PARAM_NAMES])
    return ResultRow(rec, float(d["scale"]), x, float(d["residual"]), d["converged"] == "1")


def read_results(source) -> list[ResultRow]:
    """Rows of a results table written by :func:`run_corpus`."""
    rows, _ = _read_dicts(source, RESULT_COLUMNS)
    return [_parse_result_row(d) for d in rows]


def _read_dicts(source, columns) -> tuple[list[dict[str, str]], dict[str, str]]:
    lines, meta = _data_lines(_read_text(source))
    if not lines:
        raise IngestError("empty table")
    reader = csv.reader([ln for _, ln in lines])
    header = next(reader)
    if tuple(header) != tuple(columns):
        raise IngestError(f"unexpected header {header!r}")
    return [dict(zip(header, r)) for r in reader], meta


def _speaker_file_name(speaker_id: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9_.-]", "_", speaker_id)[:60]
    return f"{safe}-{zlib.crc32(speaker_id.encode('utf-8')):08x}.csv"


def _records_digest(records: Sequence[VowelFrameRecord]) -> str:
    h = hashlib.sha256()
    for r in records:
        h.update(repr(record_row(r)).encode("utf-8"))
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class _SpeakerJob:
    speaker_id: str
    records: tuple[VowelFrameRecord, ...]
    model: ModelData
    acoustics: AcousticConfig
    cfg: InversionConfig


def _invert_one(job: _SpeakerJob):
    try:
        profile = build_profile(job.records, job.acoustics.speed_of_sound)
    except ValueError as exc:
        return job.speaker_id, None, str(exc)
    inv = invert_speaker(profile, job.records, job.model, job.acoustics, job.cfg)
    rows = [ResultRow(rr.record, inv.scale, rr.solution.x, rr.solution.residual, rr.solution.converged)
            for rr in inv.results]
    summary = SpeakerSummary(
        profile.speaker_id, profile.gender, profile.age, profile.period, profile.vtl, inv.scale,
        len(job.records), len(rows), len(inv.skipped), inv.mean_lh, inv.mean_lp,
    )
    return job.speaker_id, (rows, summary), None


def _summary_from_rows(rows: Sequence[ResultRow], meta: Mapping[str, str]) -> SpeakerSummary:
    r0 = rows[0].record
    return SpeakerSummary(
        r0.speaker_id, r0.gender, r0.age, r0.period, float(meta["vtl"]), rows[0].scale,
        int(meta["records"]), len(rows), int(meta["records"]) - len(rows),
        float(np.mean([r.lh for r in rows])), float(np.mean([r.lp for r in rows])),
    )


def group_by_speaker(records: Iterable[VowelFrameRecord]) -> dict[str, list[VowelFrameRecord]]:
    out: dict[str, list[VowelFrameRecord]] = defaultdict(list)
    for r in records:
        out[r.speaker_id].append(r)
    return {k: out[k] for k in sorted(out)}


def run_corpus(
    records: Sequence[VowelFrameRecord],
    model: ModelData,
    cfg: InversionConfig | None = None,
    acoustics: AcousticConfig = DEFAULT_ACOUSTICS,
    workers: int = 1,
    work_dir=None,
    meta: RunMetadata | None = None,
) -> CorpusResult:
    """Per speaker: VTL estimate, size adaptation, inversion of every vowel set.

    With ``work_dir`` set, each finished speaker is written to
    ``work_dir/speakers/`` and reused on a later call with the same config
    hash and the same input records. ``workers > 1`` processes speakers in
    parallel; results do not depend on the worker count.
    """
    cfg = cfg or InversionConfig()
    meta = meta or RunMetadata("unspecified", cfg.seed)
    spk_dir = Path(work_dir) / "speakers" if work_dir is not None else None
    result = CorpusResult()
    jobs, done, digests = [], {}, {}
    for sid, recs in group_by_speaker(records).items():
        digest = digests[sid] = _records_digest(recs)
        path = spk_dir / _speaker_file_name(sid) if spk_dir else None
        if path is not None and path.is_file():
            rows, fmeta = _read_dicts(path, RESULT_COLUMNS)
            if fmeta.get("config_hash") == meta.config_hash and fmeta.get("input") == digest and rows:
                parsed = [_parse_result_row(d) for d in rows]
                done[sid] = (parsed, _summary_from_rows(parsed, fmeta))
                result.resumed.append(sid)
                continue
        jobs.append(_SpeakerJob(sid, tuple(recs), model, acoustics, cfg))

    def finish(sid, payload, err):
        if payload is None:
            log.warning("speaker %s skipped: %s", sid, err)
            result.skipped.append(SkippedSpeaker(sid, err))
            return
        done[sid] = payload
        if spk_dir is not None:
            rows, summary = payload
            extra = meta.lines() + [
                f"# input {digests[sid]}",
                f"# vtl {summary.vtl!r}",
                f"# records {summary.records}",
            ]
            _write_speaker_file(spk_dir / _speaker_file_name(sid), extra, rows)
        log.info("speaker %s: %d rows", sid, len(payload[0]))

    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for out in pool.map(_invert_one, jobs):
                finish(*out)
    else:
        for job in jobs:
            finish(*_invert_one(job))

    for sid in sorted(done):
        rows, summary = done[sid]
        result.rows.extend(rows)
        result.speakers.append(summary)
    result.skipped.sort(key=lambda s: s.speaker_id)
    return result


def _write_speaker_file(path: Path, header_lines: list[str], rows: Sequence[ResultRow]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        for line in header_lines:
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for r in rows:
            w.writerow([_fmt(v) for v in r.as_row()])
    os.replace(tmp, path)


def write_corpus_outputs(out_dir, result: CorpusResult, report: IngestReport | None, meta: RunMetadata) -> dict[str, Path]:
    out = Path(out_dir)
    paths = {
        "results": out / "results.csv",
        "speakers": out / "speakers.csv",
        "skipped": out / "skipped_speakers.csv",
    }
    write_table(paths["results"], RESULT_COLUMNS, (r.as_row() for r in result.rows), meta)
    write_table(paths["speakers"], SPEAKER_COLUMNS, (s.as_row() for s in result.speakers), meta)
    write_table(paths["skipped"], ("speaker_id", "reason"), ((s.speaker_id, s.reason) for s in result.skipped), meta)
    if report is not None:
        paths["rejections"] = out / "rejections.csv"
        write_rejections(paths["rejections"], report, meta)
    return paths


# ---------------------------------------------------------------- aggregation


@dataclass(frozen=True)
class SpeakerMean:
    speaker_id: str
    gender: str
    age: float
    period: str
    values: tuple[float, ...]  # one per STAT_PARAMS entry
    n_rows: int

    def key(self, grouping: Sequence[str]) -> tuple[str, ...]:
        attrs = {"gender": self.gender, "age_band": age_band(self.age), "period": self.period}
        return tuple(attrs[g] for g in grouping)


@dataclass(frozen=True)
class GroupStats:
    grouping: tuple[str, ...]
    key: tuple[str, ...]
    n_speakers: int
    params: tuple[str, ...]
    mean: tuple[float, ...]
    sd: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]

    def value(self, param: str) -> dict[str, float]:
        i = self.params.index(param)
        return {"mean": self.mean[i], "sd": self.sd[i], "ci_low": self.ci_low[i], "ci_high": self.ci_high[i]}

    def label(self, name: str) -> str:
        return self.key[self.grouping.index(name)] if name in self.grouping else "all"


def speaker_means(rows: Iterable[ResultRow], params: Sequence[str] = STAT_PARAMS) -> list[SpeakerMean]:
    """First stage: one mean per speaker per parameter."""
    idx = [PARAM_NAMES.index(p) for p in params]
    by: dict[str, list[ResultRow]] = defaultdict(list)
    for r in rows:
        by[r.record.speaker_id].append(r)
    out = []
    for sid in sorted(by):
        rs = by[sid]
        xs = np.array([r.x.as_array()[idx] for r in rs])
        rec = rs[0].record
        out.append(SpeakerMean(sid, rec.gender, rec.age, rec.period, tuple(float(v) for v in xs.mean(axis=0)), len(rs)))
    return out


def bootstrap_ci(values: np.ndarray, resamples: int, confidence: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Percentile interval of the mean, resampling rows of ``values`` (n x p)."""
    n = values.shape[0]
    idx = rng.integers(0, n, size=(resamples, n))
    boot = values[idx].mean(axis=1)
    tail = 100.0 * (1.0 - confidence) / 2.0
    return np.percentile(boot, tail, axis=0), np.percentile(boot, 100.0 - tail, axis=0)


def bootstrap_difference(a, b, resamples: int = 2000, confidence: float = 0.95, seed: int = 0) -> tuple[float, float, float]:
    """Mean(a) - mean(b) with a percentile CI, resampling each group's speakers."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise ValueError("both groups need at least one speaker")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, 0xD1FF]))
    da = a[rng.integers(0, a.size, (resamples, a.size))].mean(axis=1)
    db = b[rng.integers(0, b.size, (resamples, b.size))].mean(axis=1)
    tail = 100.0 * (1.0 - confidence) / 2.0
    lo, hi = np.percentile(da - db, [tail, 100.0 - tail])
    return float(a.mean() - b.mean()), float(lo), float(hi)


def _group_rng(seed: int, grouping: Sequence[str], key: Sequence[str]) -> np.random.Generator:
    ids = [zlib.crc32("|".join(grouping).encode("utf-8")), zlib.crc32("|".join(key).encode("utf-8"))]
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *ids]))


def aggregate(
    rows: Iterable[ResultRow],
    grouping: Sequence[str] = DEFAULT_GROUPING,
    resamples: int = 2000,
    confidence: float = 0.95,
    seed: int = 0,
    params: Sequence[str] = STAT_PARAMS,
) -> list[GroupStats]:
    """Two-stage group statistics with a bootstrap over speakers.

    Speakers are averaged first so each contributes equally to its group.
    Each group's bootstrap has its own seeded stream, so adding or removing
    a group does not change the others. Groups are sorted by key.
    """
    grouping = tuple(grouping)
    bad = [g for g in grouping if g not in GROUP_FIELDS]
    if bad:
        raise ValueError(f"unknown grouping field(s): {bad}")
    means = speaker_means(rows, params)
    if not means:
        raise ValueError("aggregate needs at least one result row")
    groups: dict[tuple[str, ...], list[SpeakerMean]] = defaultdict(list)
    for m in means:
        groups[m.key(grouping)].append(m)
    out = []
    for key in sorted(groups):
        vals = np.array([m.values for m in groups[key]])
        mean = vals.mean(axis=0)
        sd = vals.std(axis=0, ddof=1) if len(vals) > 1 else np.zeros(vals.shape[1])
        lo, hi = bootstrap_ci(vals, resamples, confidence, _group_rng(seed, grouping, key))
        # percentile bounds can miss the sample mean by round-off on tiny groups
        lo, hi = np.minimum(lo, mean), np.maximum(hi, mean)
        out.append(GroupStats(
            grouping, key, len(vals), tuple(params),
            *(tuple(float(v) for v in a) for a in (mean, sd, lo, hi)),
        ))
    return out


def write_group_stats(path, stats: Sequence[GroupStats], meta: RunMetadata) -> None:
    def rows():
        for s in stats:
            for p in s.params:
                v = s.value(p)
                yield (s.label("gender"), s.label("age_band"), s.label("period"), p, s.n_speakers,
                       v["mean"], v["sd"], v["ci_low"], v["ci_high"])

    write_table(path, STATS_COLUMNS, rows(), meta)


# ---------------------------------------------------------------- exports


def analysis_rows(rows: Iterable[ResultRow]) -> list[tuple]:
    return [(r.record.speaker_id, r.record.gender, r.record.age, r.record.period, r.record.vowel, r.lh, r.lp)
            for r in rows]


def export_analysis_table(rows: Iterable[ResultRow], meta: RunMetadata | None = None) -> str:
    """One line per vowel realization, ready for a mixed-model fit elsewhere.

    Age stays continuous; speaker and vowel are kept so vowels can be nested
    within speakers.
    """
    buf = io.StringIO()
    for line in (meta.lines() if meta else []):
        buf.write(line + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ANALYSIS_COLUMNS)
    for row in analysis_rows(rows):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_analysis_table(source) -> list[tuple]:
    rows, _ = _read_dicts(source, ANALYSIS_COLUMNS)
    return [(d["Speaker"], d["Gender"], float(d["Age"]), d["Period"], d["Vowel"], float(d["LH"]), float(d["LP"]))
            for d in rows]


@dataclass(frozen=True)
class PlotFigure:
    name: str
    grouping: tuple[str, ...]
    x: str
    group: str
    param: str
    expected_x: tuple[str, ...]
    expected_groups: tuple[str, ...]


FIGURES = (
    PlotFigure("lh_by_age_gender", ("gender", "age_band"), "age_band", "gender", "larynx_height", AGE_BANDS, GENDERS),
    PlotFigure("lh_by_period", ("period",), "period", "all", "larynx_height", PERIODS, ("all",)),
    PlotFigure("lp_by_age_gender", ("gender", "age_band"), "age_band", "gender", "lip_protrusion", AGE_BANDS, GENDERS),
)


def plot_tables(stats_by_grouping: Mapping[tuple[str, ...], Sequence[GroupStats]]) -> dict[str, tuple[list[tuple], list[str]]]:
    """Per figure: rows ``(x, group, mean, ci_low, ci_high)`` and missing-group notes."""
    out = {}
    for fig in FIGURES:
        stats = {s.key: s for s in stats_by_grouping.get(fig.grouping, ())}
        rows, missing = [], []
        for g in fig.expected_groups:
            for x in fig.expected_x:
                labels = {fig.x: x, fig.group: g}
                key = tuple(labels[k] for k in fig.grouping)
                s = stats.get(key)
                if s is None:
                    who = f"{fig.x}={x}" if g == "all" else f"{fig.group}={g} {fig.x}={x}"
                    missing.append(f"{fig.name}: no speakers for {who}")
                    continue
                v = s.value(fig.param)
                rows.append((x, g, v["mean"], v["ci_low"], v["ci_high"]))
        out[fig.name] = (rows, missing)
    return out


def figure_groupings() -> list[tuple[str, ...]]:
    return sorted({f.grouping for f in FIGURES})


def emit_plot_data(stats_by_grouping, out_dir, meta: RunMetadata) -> dict[str, Path]:
    """Write one CSV per figure plus ``plot_report.txt`` listing omitted groups."""
    out = Path(out_dir)
    paths = {}
    notes = []
    for name, (rows, missing) in plot_tables(stats_by_grouping).items():
        paths[name] = out / f"{name}.csv"
        write_table(paths[name], PLOT_COLUMNS, rows, meta)
        notes.extend(missing)
    report = out / "plot_report.txt"
    with open(report, "w", encoding="utf-8") as fh:
        for line in meta.lines():
            fh.write(line + "\n")
        fh.write("\n".join(notes) + ("\n" if notes else ""))
        if not notes:
            fh.write("all groups present\n")
    paths["report"] = report
    return paths
