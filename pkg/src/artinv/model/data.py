"""Model-data container and its on-disk text format.

File layout (UTF-8, one record per line, ``#`` lines are comments)::

    MAEDA-MODEL <format_version>
    name <identifier>
    grid_size <G>
    l0 <neutral tract length, cm>
    [geometry]
    position <G floats>      normalized glottis->lips coordinate of each gridline
    region <G ints>          region code per gridline (see REGION_NAMES)
    [mean]
    distance <G floats>      sagittal distance per gridline, cm
    length <G floats>        section length per gridline, cm
    [basis <param name>]     repeated once per articulatory parameter, in order
    distance <G floats>
    length <G floats>
    [conversion]
    alpha <G floats>         area = alpha * distance ** beta
    beta <G floats>
    checksum sha256 <hex digest of every byte before this line>

Floats are written with ``repr`` so a save/load cycle is bit-exact.
"""
from __future__ import annotations

import hashlib
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
MAGIC = "MAEDA-MODEL"

PARAM_NAMES = (
    "jaw",
    "td_position",
    "td_height",
    "tt_position",
    "lower_lip",
    "lip_protrusion",
    "larynx_height",
)

REGION_NAMES = ("larynx", "pharynx", "velar", "palatal", "alveolar", "lips")

REFERENCE_PATH = Path(__file__).with_name("data") / "maeda_reference.txt"


class ModelDataError(ValueError):
    """Base class for model-data loading problems; messages start with ``label``."""

    label = "invalid model data"

    def __init__(self, detail: str = ""):
        super().__init__(f"{self.label}: {detail}" if detail else self.label)


class MalformedModelFile(ModelDataError):
    label = "malformed file"


class ChecksumMismatch(ModelDataError):
    label = "checksum mismatch"


class WrongBasisCount(ModelDataError):
    label = "wrong basis count"


@dataclass(frozen=True, eq=False)
class ModelData:
    """Immutable Maeda-style model tables.

    ``mean`` and each row of ``basis`` hold 2*G numbers: G sagittal distances
    followed by G section lengths.
    """

    name: str
    position: np.ndarray
    region: np.ndarray
    mean: np.ndarray
    basis: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    l0: float
    format_version: int = FORMAT_VERSION
    checksum: str = ""

    def __post_init__(self):
        for arr in (self.position, self.region, self.mean, self.basis, self.alpha, self.beta):
            arr.setflags(write=False)

    @property
    def grid_size(self) -> int:
        return int(self.alpha.shape[0])

    @property
    def mean_distance(self) -> np.ndarray:
        return self.mean[: self.grid_size]

    @property
    def mean_length(self) -> np.ndarray:
        return self.mean[self.grid_size :]

    def __eq__(self, other):
        if not isinstance(other, ModelData):
            return NotImplemented
        return (
            self.name == other.name
            and self.l0 == other.l0
            and self.format_version == other.format_version
            and all(
                np.array_equal(a, b)
                for a, b in (
                    (self.position, other.position),
                    (self.region, other.region),
                    (self.mean, other.mean),
                    (self.basis, other.basis),
                    (self.alpha, other.alpha),
                    (self.beta, other.beta),
                )
            )
        )

    __hash__ = None


def _fmt(values) -> str:
    return " ".join(repr(float(v)) for v in values)


def _body_text(model: ModelData) -> str:
    g = model.grid_size
    lines = [
        f"{MAGIC} {model.format_version}",
        f"name {model.name}",
        f"grid_size {g}",
        f"l0 {model.l0!r}",
        "[geometry]",
        "position " + _fmt(model.position),
        "region " + " ".join(str(int(r)) for r in model.region),
        "[mean]",
        "distance " + _fmt(model.mean[:g]),
        "length " + _fmt(model.mean[g:]),
    ]
    for name, row in zip(PARAM_NAMES, model.basis):
        lines += [f"[basis {name}]", "distance " + _fmt(row[:g]), "length " + _fmt(row[g:])]
    lines += ["[conversion]", "alpha " + _fmt(model.alpha), "beta " + _fmt(model.beta)]
    return "\n".join(lines) + "\n"


def dumps_model_data(model: ModelData) -> bytes:
    body = _body_text(model).encode("utf-8")
    digest = hashlib.sha256(body).hexdigest()
    return body + f"checksum sha256 {digest}\n".encode("utf-8")


def save_model_data(model: ModelData, dest) -> None:
    """Write ``model`` to a path or a binary stream."""
    payload = dumps_model_data(model)
    if isinstance(dest, (str, Path)):
        Path(dest).write_bytes(payload)
    else:
        dest.write(payload)


def _floats(tokens, n, what):
    if len(tokens) != n:
        raise MalformedModelFile(f"{what}: expected {n} values, got {len(tokens)}")
    try:
        return np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as exc:
        raise MalformedModelFile(f"{what}: {exc}") from None


def _read_bytes(source) -> bytes:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source)
    if isinstance(source, (str, Path)):
        return Path(source).read_bytes()
    data = source.read()
    return data.encode("utf-8") if isinstance(data, str) else data


def load_model_data(source=None) -> ModelData:
    """Parse and validate a model-data file.

    Args:
        source: path, bytes, or binary stream. ``None`` loads the bundled
            reference file.

    Raises:
        MalformedModelFile: structural or numeric parse failure.
        ChecksumMismatch: content does not match the trailing digest.
        WrongBasisCount: number of basis blocks differs from 7.
    """
    raw = _read_bytes(REFERENCE_PATH if source is None else source)
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise MalformedModelFile("not UTF-8 text") from None

    cut = text.rfind("checksum ")
    if cut < 0 or (cut > 0 and text[cut - 1] != "\n"):
        raise MalformedModelFile("missing checksum line (truncated file?)")
    tail = text[cut:].split()
    if len(tail) != 3 or tail[1] != "sha256":
        raise MalformedModelFile("bad checksum line")
    body = raw[: len(text[:cut].encode("utf-8"))]

    lines = [ln.strip() for ln in text[:cut].splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith(MAGIC + " "):
        raise MalformedModelFile("missing header")
    try:
        version = int(lines[0].split()[1])
        header = dict(ln.split(maxsplit=1) for ln in lines[1:4])
        name = header["name"]
        g = int(header["grid_size"])
        l0 = float(header["l0"])
    except (KeyError, ValueError, IndexError) as exc:
        raise MalformedModelFile(f"bad header: {exc}") from None
    if g <= 0:
        raise MalformedModelFile("grid_size must be positive")

    sections: list[tuple[str, dict[str, list[str]]]] = []
    for ln in lines[4:]:
        if ln.startswith("[") and ln.endswith("]"):
            sections.append((ln[1:-1].strip(), {}))
            continue
        if not sections:
            raise MalformedModelFile(f"data outside a section: {ln[:40]!r}")
        key, *vals = ln.split()
        sections[-1][1][key] = vals

    def section(name):
        for sname, content in sections:
            if sname == name:
                return content
        raise MalformedModelFile(f"missing section [{name}]")

    try:
        geom = section("geometry")
        position = _floats(geom["position"], g, "position")
        region = _floats(geom["region"], g, "region").astype(np.int64)
        mean_sec = section("mean")
        mean = np.concatenate(
            [_floats(mean_sec["distance"], g, "mean distance"), _floats(mean_sec["length"], g, "mean length")]
        )
        basis_blocks = [(s[6:].strip(), c) for s, c in sections if s.startswith("basis")]
        rows = []
        for bname, content in basis_blocks:
            rows.append(
                np.concatenate(
                    [
                        _floats(content["distance"], g, f"basis {bname} distance"),
                        _floats(content["length"], g, f"basis {bname} length"),
                    ]
                )
            )
        conv = section("conversion")
        alpha = _floats(conv["alpha"], g, "alpha")
        beta = _floats(conv["beta"], g, "beta")
    except KeyError as exc:
        raise MalformedModelFile(f"missing key {exc}") from None

    if hashlib.sha256(body).hexdigest() != tail[2]:
        raise ChecksumMismatch("content checksum does not match")
    if len(basis_blocks) != len(PARAM_NAMES):
        raise WrongBasisCount(f"expected {len(PARAM_NAMES)} basis vectors, found {len(basis_blocks)}")
    names = tuple(b for b, _ in basis_blocks)
    if names != PARAM_NAMES:
        raise MalformedModelFile(f"basis blocks out of order: {names}")
    if not l0 > 0:
        raise MalformedModelFile("l0 must be positive")
    if not np.isclose(l0, mean[g:].sum(), rtol=1e-12):
        raise MalformedModelFile("l0 disagrees with the summed mean section lengths")

    return ModelData(
        name=name,
        position=position,
        region=region,
        mean=mean,
        basis=np.vstack(rows),
        alpha=alpha,
        beta=beta,
        l0=l0,
        format_version=version,
        checksum=tail[2],
    )


def loads_model_data(payload: bytes) -> ModelData:
    return load_model_data(io.BytesIO(payload))
