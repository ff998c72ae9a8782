"""Interpolating Catmull-Rom splines over a scalar (or stacked) knot series.

Each segment ``[t_i, t_{i+1}]`` is a cubic Hermite patch whose knot tangents
are the central differences ``(v_{i+1} - v_{i-1}) / (t_{i+1} - t_{i-1})``.
For equally spaced knots this is exactly the uniform Catmull-Rom spline with
tension 1/2.  The missing neighbours at both ends are phantom knots obtained
by linear reflection,

    P_{-1} = 2 P_0 - P_1,        P_N = 2 P_{N-1} - P_{N-2},

so the boundary tangents are the one-sided slopes of the end segments.
Outside the knot range the curve continues linearly along those tangents.

Values may carry trailing axes: ``values`` of shape ``(N, D)`` fits ``D``
independent splines that share the timestamps, which is what the stabilizer
uses to process all control dimensions at once.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

__all__ = [
    "KnotSeries",
    "CatmullRomSpline",
    "fit",
    "eval_spline",
    "eval_second_difference_energy",
]


@dataclass(frozen=True)
class KnotSeries:
    """Timestamps and the values attached to them.

    ``values`` has shape ``(N,)`` or ``(N, ...)``; the leading axis runs
    along ``timestamps``.
    """

    timestamps: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        ts = np.array(self.timestamps, dtype=np.float64)
        vs = np.array(self.values, dtype=np.float64)
        if ts.ndim != 1:
            raise InvalidInputError("timestamps must be one-dimensional")
        if vs.ndim == 0 or vs.shape[0] != ts.shape[0]:
            raise InvalidInputError(
                f"timestamps and values differ in length: {ts.shape[0]} vs {vs.shape[:1]}"
            )
        if ts.shape[0] < 2:
            raise InvalidInputError("a spline needs at least 2 knots")
        if not (np.all(np.isfinite(ts)) and np.all(np.isfinite(vs))):
            raise InvalidInputError("knots must be finite")
        if np.any(np.diff(ts) <= 0):
            raise InvalidInputError("timestamps must be strictly increasing")
        ts.flags.writeable = False
        vs.flags.writeable = False
        object.__setattr__(self, "timestamps", ts)
        object.__setattr__(self, "values", vs)

    def __len__(self):
        return self.timestamps.shape[0]


class CatmullRomSpline:
    """Immutable C1 interpolant through a :class:`KnotSeries`.

    Build with :func:`fit`; evaluate by calling the instance.
    """

    def __init__(self, knots: KnotSeries):
        self.knots = knots
        ts, vs = knots.timestamps, knots.values
        # phantom endpoints by linear reflection
        t_ext = np.concatenate(([2 * ts[0] - ts[1]], ts, [2 * ts[-1] - ts[-2]]))
        v_ext = np.concatenate(
            ([2 * vs[0] - vs[1]], vs, [2 * vs[-1] - vs[-2]]), axis=0
        )
        span = (t_ext[2:] - t_ext[:-2]).reshape((-1,) + (1,) * (vs.ndim - 1))
        tangents = (v_ext[2:] - v_ext[:-2]) / span
        tangents.flags.writeable = False
        self._tangents = tangents

    @property
    def timestamps(self) -> np.ndarray:
        return self.knots.timestamps

    @property
    def values(self) -> np.ndarray:
        return self.knots.values

    @property
    def tangents(self) -> np.ndarray:
        """dv/dt at each knot."""
        return self._tangents

    def __call__(self, t):
        """Evaluate at scalar or array ``t``.

        The result has shape ``np.shape(t) + values.shape[1:]``.
        """
        t = np.asarray(t, dtype=np.float64)
        if not np.all(np.isfinite(t)):
            raise InvalidInputError("evaluation parameter must be finite")
        ts, vs, ms = self.knots.timestamps, self.knots.values, self._tangents
        tail = vs.shape[1:]
        flat = t.reshape(-1)

        seg = np.clip(np.searchsorted(ts, flat, side="right") - 1, 0, len(ts) - 2)
        t0 = ts[seg]
        h = ts[seg + 1] - t0
        s = (flat - t0) / h
        s2 = s * s
        s3 = s2 * s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2

        def col(a):
            return a.reshape((-1,) + (1,) * len(tail))

        # Hermite cubic rearranged as a tangent line plus corrections that
        # vanish identically for affine knots, keeping lines and constants exact
        v0, m0 = vs[seg], ms[seg]
        out = (
            v0
            + col(flat - t0) * m0
            + col(h01) * ((vs[seg + 1] - v0) - col(h) * m0)
            + col(h * h11) * (ms[seg + 1] - m0)
        )
        # v0 + (v1 - v0) need not round to v1
        out[flat == ts[-1]] = vs[-1]

        below = flat < ts[0]
        if np.any(below):
            out[below] = vs[0] + col(flat[below] - ts[0]) * ms[0]
        above = flat > ts[-1]
        if np.any(above):
            out[above] = vs[-1] + col(flat[above] - ts[-1]) * ms[-1]
        out = out.reshape(t.shape + tail)
        return float(out) if out.ndim == 0 else out

    def __repr__(self):
        return (
            f"CatmullRomSpline(knots={len(self.knots)}, "
            f"range=[{self.timestamps[0]:g}, {self.timestamps[-1]:g}])"
        )


def fit(knots) -> CatmullRomSpline:
    """Fit the spline through ``knots``.

    Accepts a :class:`KnotSeries` or a ``(timestamps, values)`` pair.
    """
    if not isinstance(knots, KnotSeries):
        timestamps, values = knots
        knots = KnotSeries(timestamps, values)
    return CatmullRomSpline(knots)


def eval_spline(spline: CatmullRomSpline, t):
    return spline(t)


def eval_second_difference_energy(spline: CatmullRomSpline, sample_timestamps) -> float:
    """Mean squared discrete second difference of spline samples.

    Parameters
    ----------
    spline : CatmullRomSpline
    sample_timestamps : array_like
        At least three strictly increasing parameters.  The differences are
        taken on consecutive samples regardless of their spacing.

    Returns
    -------
    float
    """
    ts = np.asarray(sample_timestamps, dtype=np.float64)
    if ts.ndim != 1 or ts.shape[0] < 3:
        raise InvalidInputError("need at least 3 sample timestamps")
    if np.any(np.diff(ts) <= 0):
        raise InvalidInputError("sample timestamps must be strictly increasing")
    y = spline(ts)
    d2 = y[2:] - 2 * y[1:-1] + y[:-2]
    return float(np.mean(d2 * d2))
