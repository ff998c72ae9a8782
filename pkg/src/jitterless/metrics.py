"""Temporal-coherence and fidelity metrics.

``flv`` is the mean, over consecutive frame pairs, of the mean per-pixel
Euclidean length of the dense displacement field between the two frames.
Fields are supplied precomputed (see :mod:`jitterless.formats` for ``.flo``
I/O); this module does not estimate optical flow.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "FlowField",
    "pixel_displacement",
    "mean_displacement",
    "flv",
    "rmse",
    "roughness",
]


@dataclass(frozen=True)
class FlowField:
    """Dense displacement field; ``u`` along x (columns), ``v`` along y (rows)."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=np.float64)
        v = np.array(self.v, dtype=np.float64)
        if u.ndim != 2 or u.shape != v.shape:
            raise InvalidInputError(
                f"u and v must be height x width matrices of equal shape, got {u.shape} and {v.shape}"
            )
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(v))):
            raise InvalidInputError("flow field has non-finite entries")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)

    @classmethod
    def from_array(cls, uv):
        """Build from an ``(height, width, 2)`` array."""
        uv = np.asarray(uv)
        if uv.ndim != 3 or uv.shape[2] != 2:
            raise InvalidInputError(f"expected (height, width, 2), got {uv.shape}")
        return cls(uv[..., 0], uv[..., 1])

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self):
        return self.u.shape

    def magnitude(self) -> np.ndarray:
        return np.sqrt(self.u * self.u + self.v * self.v)

    def scaled(self, s: float) -> "FlowField":
        return FlowField(self.u * s, self.v * s)


def pixel_displacement(flow: FlowField, x: int, y: int) -> float:
    """Euclidean length of the displacement at column ``x``, row ``y``."""
    if not (0 <= x < flow.width and 0 <= y < flow.height):
        raise InvalidInputError(
            f"pixel ({x}, {y}) outside a {flow.width} x {flow.height} field"
        )
    u, v = flow.u[y, x], flow.v[y, x]
    return float(np.sqrt(u * u + v * v))


def mean_displacement(flow: FlowField) -> float:
    if flow.u.size == 0:
        raise InvalidInputError("flow field has zero area")
    return float(np.mean(flow.magnitude()))


def flv(flows: Sequence[FlowField]) -> float:
    """Mean displacement averaged over an ordered list of frame-pair flows.

    ``flows[i]`` is the field from frame ``i`` to frame ``i + 1``; a window
    of ``k`` frames therefore supplies ``k - 1`` fields.
    """
    flows = list(flows)
    if not flows:
        raise InvalidInputError("flv needs at least one flow field")
    shape = flows[0].shape
    for i, f in enumerate(flows):
        if f.shape != shape:
            raise InvalidInputError(f"flow {i} has shape {f.shape}, expected {shape}")
    per_pair = [mean_displacement(f) for f in flows]
    return float(sum(per_pair) / len(per_pair))


def rmse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidInputError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.size == 0:
        raise InvalidInputError("empty sequences")
    d = a - b
    return float(np.sqrt(np.mean(d * d)))


def roughness(seq) -> float:
    """Mean squared second difference over interior frames and all dimensions."""
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 3:
        raise InvalidInputError(f"roughness needs an n x D sequence with n >= 3, got {arr.shape}")
    d2 = arr[2:] - 2 * arr[1:-1] + arr[:-2]
    return float(np.mean(d2 * d2))
