"""Reading shape images and writing every result file.

Model file layout (plain text, one record per line)::

    DNSM-MODEL 1
    n_polytopes N
    m_halfspaces M
    dimension 2
    slope S
    frame H W
    w1 w2 b        # N*M lines, polytope-major
    ...

Floats are written with ``repr`` so reading them back is bit-exact.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
import tempfile

import numpy as np
from PIL import Image

from .model import DnsmModel, ModelConfig, ShapeRaster

MODEL_MAGIC = "DNSM-MODEL"
MODEL_VERSION = 1
REPORT_SCHEMA_VERSION = 1
PALETTE_SIZE = 32


class FormatError(ValueError):
    """Input file is not in a supported or well-formed format."""


def _atomic_write(path, data: bytes):
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- shapes -----------------------------------------------------------------

def read_shape(path, threshold: int = 128) -> ShapeRaster:
    """Binary shape from a PGM (P2/P5) or PNG image; ``pixel >= threshold`` is shape."""
    try:
        img = Image.open(path)
        img.load()
    except FileNotFoundError:
        raise
    except OSError as exc:
        raise FormatError(f"cannot read image {path}: {exc}") from exc
    if img.format not in ("PPM", "PNG"):
        raise FormatError(f"{path}: unsupported image format {img.format}")
    if img.format == "PPM" and img.mode not in ("L", "I", "I;16", "1"):
        raise FormatError(f"{path}: only grayscale PGM is supported")
    if img.mode in ("I", "I;16"):
        arr = np.asarray(img, dtype=np.int64)
        maxval = int(img.info.get("maxval", 65535 if arr.max() > 255 else 255))
        arr = arr * 255 // max(maxval, 1)
    else:
        arr = np.asarray(img.convert("L"))
    mask = arr >= threshold
    if not mask.any():
        raise FormatError(f"{path}: empty foreground at threshold {threshold}")
    return ShapeRaster(mask)


def write_pgm(mask, path):
    """Binary mask as a P5 PGM (foreground 255)."""
    arr = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    header = f"P5\n{arr.shape[1]} {arr.shape[0]}\n255\n".encode()
    _atomic_write(path, header + arr.tobytes())


# --- model file -------------------------------------------------------------

def format_model(m: DnsmModel, shape: ShapeRaster | None = None) -> str:
    cfg = m.config
    lines = [f"{MODEL_MAGIC} {MODEL_VERSION}",
             f"n_polytopes {m.n_polytopes}",
             f"m_halfspaces {cfg.m_halfspaces}",
             f"dimension {cfg.dimension}",
             f"slope {cfg.slope!r}"]
    if shape is not None:
        lines.append(f"frame {shape.height} {shape.width}")
    for row in m.params.reshape(-1, cfg.dimension + 1):
        lines.append(" ".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def write_model(m: DnsmModel, path, shape: ShapeRaster | None = None):
    _atomic_write(path, format_model(m, shape).encode())


def parse_model(text: str):
    """Return ``(model, frame)``; ``frame`` is ``(height, width)`` or None."""
    lines = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0][0] != MODEL_MAGIC:
        raise FormatError("not a DNSM model file")
    if int(lines[0][1]) != MODEL_VERSION:
        raise FormatError(f"unsupported model file version {lines[0][1]}")
    header = {}
    body_start = 1
    for body_start, tokens in enumerate(lines[1:], start=1):
        if not tokens[0].isidentifier():
            break
        header[tokens[0]] = tokens[1:]
    else:
        body_start = len(lines)
    try:
        n = int(header["n_polytopes"][0])
        m = int(header["m_halfspaces"][0])
        d = int(header["dimension"][0])
        slope = float(header["slope"][0])
    except (KeyError, IndexError, ValueError) as exc:
        raise FormatError(f"bad model header: {exc}") from exc
    frame = tuple(int(v) for v in header["frame"]) if "frame" in header else None
    body = lines[body_start:]
    if len(body) != n * m or any(len(row) != d + 1 for row in body):
        raise FormatError(f"expected {n * m} rows of {d + 1} numbers")
    params = np.array([[float(v) for v in row] for row in body]).reshape(n, m, d + 1)
    return DnsmModel(ModelConfig(n, m, d, slope), params), frame


def read_model(path):
    return parse_model(Path(path).read_text())


# --- reports ----------------------------------------------------------------

def _check_finite(obj, where="report"):
    if isinstance(obj, float) and not math.isfinite(obj):
        raise ValueError(f"non-finite value in {where}")
    if isinstance(obj, dict):
        for k, v in obj.items():
            _check_finite(v, f"{where}.{k}")
    elif isinstance(obj, (list, tuple)):
        for v in obj:
            _check_finite(v, where)


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def write_report(report: dict, path):
    doc = _plain({"schema_version": REPORT_SCHEMA_VERSION, **report})
    _check_finite(doc)
    text = json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)
    _atomic_write(path, (text + "\n").encode())


def read_report(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if "schema_version" not in doc:
        raise FormatError("report has no schema_version")
    return doc


# --- label maps -------------------------------------------------------------

def palette() -> np.ndarray:
    """Fixed 32-entry RGB palette; entry 0 is black."""
    rng = np.random.RandomState(7)
    colors = rng.randint(64, 256, size=(PALETTE_SIZE, 3))
    colors[0] = 0
    base = [(230, 25, 75), (60, 180, 75), (255, 225, 25), (0, 130, 200),
            (245, 130, 48), (145, 30, 180), (70, 240, 240), (240, 50, 230),
            (210, 245, 60), (250, 190, 212), (0, 128, 128), (220, 190, 255)]
    colors[1:1 + len(base)] = base
    return colors.astype(np.uint8)


def label_colors(labels) -> np.ndarray:
    """Palette index per label; nonzero labels cycle through entries 1..31."""
    labels = np.asarray(labels, dtype=np.int64)
    return np.where(labels > 0, (labels - 1) % (PALETTE_SIZE - 1) + 1, 0).astype(np.uint8)


def write_label_map(labels, path):
    """Indexed-colour PNG at ``path`` plus an integer matrix at ``path.txt``.

    Labels above 31 reuse palette colours cyclically.
    """
    labels = np.asarray(labels, dtype=np.int64)
    img = Image.fromarray(label_colors(labels), mode="P")
    img.putpalette(palette().ravel().tolist())
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    img.save(tmp, format="PNG")
    os.replace(tmp, path)
    lines = [" ".join(str(v) for v in row) for row in labels]
    _atomic_write(sidecar_path(path), ("\n".join(lines) + "\n").encode())


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".txt")


def read_label_matrix(path) -> np.ndarray:
    return np.loadtxt(path, dtype=np.int64, ndmin=2)
