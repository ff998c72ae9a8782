"""Ensemble-of-splines temporal stabilizer.

A control sequence of ``n`` frames is split into ``m`` phase-shifted
subsequences (every ``m``-th frame, starting at offsets ``0..m-1``).  Each
subsequence is interpolated by a Catmull-Rom spline, so at every timestamp
there are ``m`` estimates of every control dimension.  Estimates are ranked
by their summed absolute distance to all other estimates; the closest
``k = max(1, floor(inlier_fraction * m))`` are averaged and the rest are
dropped as outliers.

Larger ``m`` means sparser knots per spline and therefore smoother output,
at the price of fidelity.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import spline as _spline
from .errors import InvalidConfigError, InvalidInputError

__all__ = [
    "EXPRESSION_DIMS",
    "ROTATION_DIMS",
    "CONTROL_DIMS",
    "StabilizerConfig",
    "as_control_sequence",
    "split",
    "ensemble_distance",
    "select_and_average",
    "stabilize",
    "oracle_stabilize",
]

EXPRESSION_DIMS = 100
ROTATION_DIMS = 6
CONTROL_DIMS = EXPRESSION_DIMS + ROTATION_DIMS

# guards floor() against 2/3 * 3 landing a hair below 2
_FLOOR_EPS = 1e-9


@dataclass(frozen=True)
class StabilizerConfig:
    """Parameters of :func:`stabilize`.

    Attributes
    ----------
    m : int
        Number of phase-shifted subsequences; the smoothness knob.
    inlier_fraction : float
        Share of the ``m`` estimates kept at each timestamp, in (0, 1].
    extrapolation : str
        Behaviour of a subsequence spline outside its knot range.  Only
        ``"linear"`` is supported.
    """

    m: int = 3
    inlier_fraction: float = 2.0 / 3.0
    extrapolation: str = "linear"

    def __post_init__(self):
        if isinstance(self.m, bool) or not isinstance(self.m, (int, np.integer)):
            raise InvalidConfigError(f"m must be an integer, got {self.m!r}")
        if self.m < 1:
            raise InvalidConfigError(f"m must be >= 1, got {self.m}")
        frac = float(self.inlier_fraction)
        if not (0.0 < frac <= 1.0):
            raise InvalidConfigError(
                f"inlier_fraction must lie in (0, 1], got {self.inlier_fraction}"
            )
        if self.extrapolation != "linear":
            raise InvalidConfigError(
                f"unsupported extrapolation policy {self.extrapolation!r}"
            )

    @property
    def inlier_count(self) -> int:
        return max(1, math.floor(self.inlier_fraction * self.m + _FLOOR_EPS))

    def validate_for(self, n: int) -> None:
        if n // self.m < 2:
            raise InvalidConfigError(
                f"m={self.m} leaves fewer than 2 knots per subsequence for n={n}"
            )


def as_control_sequence(seq) -> np.ndarray:
    """Validate and convert to a float64 ``(n, D)`` array.

    A 1-D input is read as a single dimension.
    """
    arr = np.asarray(seq, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise InvalidInputError(f"control sequence must be n x D, got shape {arr.shape}")
    n, d = arr.shape
    if n < 2 or d < 1:
        raise InvalidInputError(f"control sequence needs n >= 2 and D >= 1, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        bad = np.argwhere(~np.isfinite(arr))[0]
        raise InvalidInputError(
            f"non-finite control value at frame {bad[0]}, dimension {bad[1]}"
        )
    return arr


def _resolve(config, m):
    if config is None:
        return StabilizerConfig() if m is None else StabilizerConfig(m=m)
    if isinstance(config, (int, np.integer)) and not isinstance(config, bool):
        return StabilizerConfig(m=int(config))
    return config


def split(seq, m: int) -> list[_spline.KnotSeries]:
    """Split into ``m`` subsequences of length ``floor(n/m)``.

    Subsequence ``j`` holds frames ``j, m + j, 2m + j, ...``.  Each returned
    :class:`~jitterless.spline.KnotSeries` carries the frame timestamps and
    an ``(n // m, D)`` value block, i.e. one knot series per dimension.
    """
    arr = as_control_sequence(seq)
    StabilizerConfig(m=m).validate_for(arr.shape[0])
    length = arr.shape[0] // m
    out = []
    for j in range(m):
        idx = j + m * np.arange(length)
        out.append(_spline.KnotSeries(idx.astype(np.float64), arr[idx]))
    return out


def ensemble_distance(estimates) -> np.ndarray:
    """Summed absolute difference of each estimate to every estimate.

    The sum runs over all indices including the estimate itself, whose
    term is zero.
    """
    f = np.asarray(estimates, dtype=np.float64)
    if f.ndim != 1 or f.size == 0:
        raise InvalidInputError("need a non-empty 1-D list of estimates")
    if not np.all(np.isfinite(f)):
        raise InvalidInputError("estimates must be finite")
    dist = np.zeros_like(f)
    for other in f:
        dist += np.abs(f - other)
    return dist


def select_and_average(estimates, distances, k: int) -> float:
    """Mean of the ``k`` estimates with the smallest distances.

    Ties go to the lower index.
    """
    f = np.asarray(estimates, dtype=np.float64)
    d = np.asarray(distances, dtype=np.float64)
    if f.shape != d.shape or f.ndim != 1:
        raise InvalidInputError("estimates and distances must be 1-D of equal length")
    if k < 1 or k > f.size:
        raise InvalidConfigError(f"inlier count must be in [1, {f.size}], got {k}")
    order = np.argsort(d, kind="stable")[:k]
    return float(_anchored_mean(f[order]))


def _anchored_mean(rows):
    """Mean along axis 0 as ``rows[0] + mean(rows - rows[0])``.

    Equal rows come back bit-exact, which plain ``sum / k`` does not promise.
    """
    anchor = rows[0]
    acc = np.zeros_like(anchor)
    for r in range(1, rows.shape[0]):
        acc = acc + (rows[r] - anchor)
    return anchor + acc / rows.shape[0]


def _stabilize_block(arr: np.ndarray, m: int, k: int) -> np.ndarray:
    n = arr.shape[0]
    length = n // m
    t = np.arange(n, dtype=np.float64)
    est = np.empty((m,) + arr.shape)
    for j in range(m):
        idx = j + m * np.arange(length)
        est[j] = _spline.fit((idx.astype(np.float64), arr[idx]))(t)

    dist = np.zeros_like(est)
    for jp in range(m):
        dist += np.abs(est - est[jp])

    order = np.argsort(dist, axis=0, kind="stable")[:k]
    return _anchored_mean(np.take_along_axis(est, order, axis=0))


def stabilize(seq, config: StabilizerConfig | int | None = None, *, m: int | None = None,
              workers: int | None = None) -> np.ndarray:
    """Temporally stabilize an ``n x D`` control sequence.

    Parameters
    ----------
    seq : array_like
        Rows are frames at timestamps ``0..n-1``.  1-D input is treated as a
        single dimension and returned 1-D.
    config : StabilizerConfig or int, optional
        An int is shorthand for ``StabilizerConfig(m=config)``.
    m : int, optional
        Alternative way to pass ``m`` when ``config`` is omitted.
    workers : int, optional
        Split the dimensions over this many threads.  Results do not depend
        on the thread count.

    Returns
    -------
    numpy.ndarray
        Same shape as ``seq``.
    """
    cfg = _resolve(config, m)
    arr = as_control_sequence(seq)
    cfg.validate_for(arr.shape[0])
    k = cfg.inlier_count

    if workers is None or workers <= 1 or arr.shape[1] == 1:
        out = _stabilize_block(arr, cfg.m, k)
    else:
        chunks = np.array_split(np.arange(arr.shape[1]), min(workers, arr.shape[1]))
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(
                pool.map(lambda cols: _stabilize_block(arr[:, cols], cfg.m, k), chunks)
            )
        out = np.concatenate(parts, axis=1)

    return out.reshape(np.shape(seq))


def oracle_stabilize(seq, config: StabilizerConfig | int | None = None, *,
                     m: int | None = None) -> np.ndarray:
    """Slow reference: a line-by-line loop over dimensions and timestamps.

    Splines are re-fit for every (dimension, timestamp) pair and nothing is
    shared between iterations.  Use for verification only.
    """
    cfg = _resolve(config, m)
    arr = as_control_sequence(seq)
    n, dims = arr.shape
    cfg.validate_for(n)
    mm = cfg.m
    k = cfg.inlier_count
    length = n // mm

    out = [[0.0] * dims for _ in range(n)]
    for i in range(dims):
        for t in range(n):
            estimates = []
            for j in range(mm):
                stamps = [float(j + mm * r) for r in range(length)]
                vals = [float(arr[j + mm * r, i]) for r in range(length)]
                f_j = _spline.fit(_spline.KnotSeries(stamps, vals))
                estimates.append(f_j(float(t)))
            distances = []
            for j in range(mm):
                d = 0.0
                for jp in range(mm):
                    d += abs(estimates[j] - estimates[jp])
                distances.append(d)
            ranked = sorted(range(mm), key=lambda j: (distances[j], j))[:k]
            acc = 0.0
            for v in ranked:
                acc += estimates[v]
            out[t][i] = acc / k
    return np.array(out).reshape(np.shape(seq))
