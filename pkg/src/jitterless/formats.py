"""File formats: control-sequence CSV, Middlebury ``.flo``, attention JSON.

CSV
    Header ``t,c0,...,c{D-1}``, then one row per frame with ``t = 0, 1, ...``.
    Floats are written with ``repr`` (shortest round-trip form, at most 17
    significant digits), so reading back is value-exact.
.flo
    Little-endian: float32 magic 202021.25, int32 width, int32 height, then
    ``height * width`` interleaved float32 ``(u, v)`` pairs in row-major order.
JSON
    Frames: ``{"d_k": .., "L": .., "C": .., "frames": [{"q": [..], "k": [..],
    "w": [[..], ..]}, ..]}``.  Latent code: ``{"w": [[..], ..]}``.

All writers go through :func:`atomic_write` (temporary file, then rename).
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .aggregator import FrameFeatures
from .errors import InvalidInputError
from .metrics import FlowField

__all__ = [
    "FormatError",
    "FLO_MAGIC",
    "atomic_write",
    "dump_csv",
    "parse_csv",
    "read_csv",
    "write_csv",
    "flo_bytes",
    "parse_flo",
    "read_flo",
    "write_flo",
    "read_frames_json",
    "frames_to_json",
    "write_latent_json",
    "read_latent_json",
]

FLO_MAGIC = 202021.25


class FormatError(InvalidInputError):
    """Unparsable input file; carries the location when known."""

    def __init__(self, message, *, path=None, line=None, column=None):
        self.path = None if path is None else str(path)
        self.line = line
        self.column = column
        where = []
        if self.path:
            where.append(self.path)
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


def atomic_write(path, data) -> None:
    path = Path(path)
    if isinstance(data, str):
        data = data.encode("utf-8")
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# -- control sequence CSV ---------------------------------------------------

def dump_csv(seq) -> str:
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidInputError(f"expected an n x D array, got shape {arr.shape}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t"] + [f"c{i}" for i in range(arr.shape[1])])
    for t, row in enumerate(arr):
        writer.writerow([t] + [repr(float(x)) for x in row])
    return buf.getvalue()


def write_csv(path, seq) -> None:
    atomic_write(path, dump_csv(seq))


def parse_csv(text: str, path=None) -> np.ndarray:
    """Parse CSV text into an ``(n, D)`` float64 array.

    Raises :class:`FormatError` with a 1-based line and column on bad input.
    """
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise FormatError("empty file", path=path, line=1)
    header = [h.strip() for h in rows[0]]
    dims = len(header) - 1
    expected = ["t"] + [f"c{i}" for i in range(dims)]
    if dims < 1 or header != expected:
        col = next(
            (i + 1 for i, (a, b) in enumerate(zip(header, expected)) if a != b),
            min(len(header), len(expected)) + 1,
        )
        raise FormatError(
            "header must be t,c0,...,c{D-1}", path=path, line=1, column=col
        )
    values = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != dims + 1:
            raise FormatError(
                f"expected {dims + 1} fields, found {len(row)}",
                path=path, line=lineno, column=min(len(row), dims + 1) + 1,
            )
        try:
            t = int(row[0])
        except ValueError:
            raise FormatError(f"bad timestamp {row[0]!r}", path=path, line=lineno, column=1)
        if t != len(values):
            raise FormatError(
                f"timestamp {t} out of sequence, expected {len(values)}",
                path=path, line=lineno, column=1,
            )
        parsed = []
        for col, field in enumerate(row[1:], start=2):
            try:
                x = float(field)
            except ValueError:
                raise FormatError(f"bad number {field!r}", path=path, line=lineno, column=col)
            if not math.isfinite(x):
                raise FormatError(f"non-finite value {field!r}", path=path, line=lineno, column=col)
            parsed.append(x)
        values.append(parsed)
    if len(values) < 2:
        raise FormatError("need at least 2 frames", path=path, line=len(rows) + 1)
    return np.array(values, dtype=np.float64)


def read_csv(path) -> np.ndarray:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(str(exc), path=path)
    return parse_csv(text, path=path)


# -- Middlebury .flo ---------------------------------------------------------

def flo_bytes(flow: FlowField) -> bytes:
    header = struct.pack("<fii", FLO_MAGIC, flow.width, flow.height)
    data = np.stack([flow.u, flow.v], axis=-1).astype("<f4")
    return header + data.tobytes(order="C")


def parse_flo(raw: bytes, path=None) -> FlowField:
    if len(raw) < 12:
        raise FormatError("truncated .flo header", path=path)
    magic, width, height = struct.unpack("<fii", raw[:12])
    if magic != FLO_MAGIC:
        raise FormatError(f"bad .flo magic {magic!r}", path=path)
    if width < 1 or height < 1:
        raise FormatError(f"bad .flo size {width} x {height}", path=path)
    expected = 12 + 8 * width * height
    if len(raw) != expected:
        raise FormatError(
            f".flo payload is {len(raw)} bytes, expected {expected}", path=path
        )
    data = np.frombuffer(raw, dtype="<f4", offset=12).reshape(height, width, 2)
    if not np.all(np.isfinite(data)):
        raise FormatError("non-finite flow values", path=path)
    return FlowField.from_array(data.astype(np.float64))


def read_flo(path) -> FlowField:
    try:
        raw = Path(path).read_bytes()
    except OSError as exc:
        raise FormatError(str(exc), path=path)
    return parse_flo(raw, path=path)


def write_flo(path, flow: FlowField) -> None:
    atomic_write(path, flo_bytes(flow))


# -- attention JSON ----------------------------------------------------------

def read_frames_json(path):
    """Load frames and declared shapes.

    Returns
    -------
    frames : list of FrameFeatures
    shape : dict
        ``{"d_k": .., "L": .., "C": ..}`` as declared in the file.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(str(exc), path=path)
    except json.JSONDecodeError as exc:
        raise FormatError(exc.msg, path=path, line=exc.lineno, column=exc.colno)
    if not isinstance(doc, dict):
        raise FormatError("top level must be an object", path=path)
    shape = {}
    for key in ("d_k", "L", "C"):
        v = doc.get(key)
        if isinstance(v, bool) or not isinstance(v, int) or v < 1:
            raise FormatError(f"{key!r} must be a positive integer", path=path)
        shape[key] = v
    raw_frames = doc.get("frames")
    if not isinstance(raw_frames, list) or not raw_frames:
        raise FormatError("'frames' must be a non-empty list", path=path)
    frames = []
    for i, fr in enumerate(raw_frames):
        try:
            f = FrameFeatures(fr["q"], fr["k"], fr["w"])
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"frame {i}: {exc}", path=path)
        if f.q.shape != (shape["d_k"],) or f.w.shape != (shape["L"], shape["C"]):
            raise FormatError(
                f"frame {i}: q/k length {f.q.shape[0]}, w shape {f.w.shape} "
                f"disagree with d_k={shape['d_k']}, L={shape['L']}, C={shape['C']}",
                path=path,
            )
        frames.append(f)
    return frames, shape


def frames_to_json(frames, d_k=None, L=None, C=None) -> str:
    frames = list(frames)
    d_k = d_k or frames[0].q.shape[0]
    L = L or frames[0].w.shape[0]
    C = C or frames[0].w.shape[1]
    doc = {
        "d_k": int(d_k),
        "L": int(L),
        "C": int(C),
        "frames": [
            {"q": f.q.tolist(), "k": f.k.tolist(), "w": f.w.tolist()} for f in frames
        ],
    }
    return json.dumps(doc)


def write_latent_json(path, w) -> None:
    atomic_write(path, json.dumps({"w": np.asarray(w, dtype=np.float64).tolist()}))


def read_latent_json(path) -> np.ndarray:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return np.array(doc["w"], dtype=np.float64)
