"""Deterministic synthetic data: jittery control trajectories and flow fields.

Random streams
--------------
All randomness comes from numpy's PCG64 bit generator seeded through
``SeedSequence(seed)``, which is specified independently of the platform.
The root sequence spawns two children, ``[params, noise]``, and each of
those spawns one child per dimension.  Dimension ``d`` therefore draws

* from ``params[d]``: ``K`` amplitudes, ``K`` angular frequencies and ``K``
  phases (only for the descriptors not given explicitly);
* from ``noise[d]``: ``n`` standard normals, then ``n`` uniforms deciding the
  spike frames, then ``n`` uniforms deciding the spike signs.

Changing ``dims`` does not alter the streams of the dimensions that remain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import InvalidConfigError
from .metrics import FlowField

__all__ = [
    "MAX_FREQUENCY",
    "TrajectorySpec",
    "SynthResult",
    "standard_spec",
    "generate",
    "clean_roughness_bound",
    "synth_flow",
]

# angular frequency ceiling, radians per frame
MAX_FREQUENCY = math.pi / 8


@dataclass(frozen=True)
class TrajectorySpec:
    """Sum-of-sinusoids ground truth plus Gaussian jitter and sparse spikes.

    ``amplitudes``, ``frequencies`` and ``phases`` are optional ``(dims, K)``
    arrays; any left as ``None`` are drawn uniformly from ``amp_range``,
    ``freq_range`` and ``[0, 2*pi)`` respectively.
    """

    n: int = 120
    dims: int = 106
    seed: int = 42
    components: int = 2
    amp_range: tuple = (0.2, 1.0)
    freq_range: tuple = (math.pi / 60, math.pi / 12)
    amplitudes: np.ndarray | None = field(default=None, repr=False)
    frequencies: np.ndarray | None = field(default=None, repr=False)
    phases: np.ndarray | None = field(default=None, repr=False)
    noise_sigma: float = 0.1
    outlier_rate: float = 0.02
    outlier_magnitude: float = 1.0

    def __post_init__(self):
        def _int(name, lo):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < lo:
                raise InvalidConfigError(f"{name} must be an integer >= {lo}, got {v!r}")

        _int("n", 8)
        _int("dims", 1)
        _int("components", 1)
        _int("seed", 0)
        if self.seed >= 2**64:
            raise InvalidConfigError("seed must fit in 64 bits")
        lo, hi = self.amp_range
        if not (0 <= lo <= hi):
            raise InvalidConfigError(f"bad amp_range {self.amp_range}")
        lo, hi = self.freq_range
        if not (0 <= lo <= hi <= MAX_FREQUENCY):
            raise InvalidConfigError(
                f"freq_range {self.freq_range} must lie within [0, pi/8]"
            )
        shape = (self.dims, self.components)
        for name in ("amplitudes", "frequencies", "phases"):
            a = getattr(self, name)
            if a is None:
                continue
            a = np.array(a, dtype=np.float64)
            if a.shape != shape:
                raise InvalidConfigError(f"{name} must have shape {shape}, got {a.shape}")
            if not np.all(np.isfinite(a)):
                raise InvalidConfigError(f"{name} must be finite")
            object.__setattr__(self, name, a)
        if self.frequencies is not None and np.any(np.abs(self.frequencies) > MAX_FREQUENCY):
            raise InvalidConfigError("frequencies must not exceed pi/8 rad/frame")
        if not (self.noise_sigma >= 0):
            raise InvalidConfigError(f"noise_sigma must be >= 0, got {self.noise_sigma}")
        if not (0 <= self.outlier_rate < 1):
            raise InvalidConfigError(f"outlier_rate must lie in [0, 1), got {self.outlier_rate}")
        if not (self.outlier_magnitude >= 0):
            raise InvalidConfigError(
                f"outlier_magnitude must be >= 0, got {self.outlier_magnitude}"
            )


def standard_spec(**overrides) -> TrajectorySpec:
    """The reference benchmark: 120 frames, 106 dimensions, seed 42."""
    return TrajectorySpec(**overrides)


class SynthResult(NamedTuple):
    clean: np.ndarray
    noisy: np.ndarray
    manifest: dict


def _streams(seed, dims):
    params, noise = np.random.SeedSequence(seed).spawn(2)
    return params.spawn(dims), noise.spawn(dims)


def _descriptors(spec: TrajectorySpec):
    param_seqs, _ = _streams(spec.seed, spec.dims)
    K = spec.components
    amps = np.empty((spec.dims, K))
    freqs = np.empty((spec.dims, K))
    phases = np.empty((spec.dims, K))
    for d, ss in enumerate(param_seqs):
        rng = np.random.Generator(np.random.PCG64(ss))
        amps[d] = rng.uniform(*spec.amp_range, size=K)
        freqs[d] = rng.uniform(*spec.freq_range, size=K)
        phases[d] = rng.uniform(0.0, 2 * math.pi, size=K)
    if spec.amplitudes is not None:
        amps = spec.amplitudes
    if spec.frequencies is not None:
        freqs = spec.frequencies
    if spec.phases is not None:
        phases = spec.phases
    return amps, freqs, phases


def generate(spec: TrajectorySpec | None = None) -> SynthResult:
    """Draw a clean trajectory and its corrupted observation.

    Returns
    -------
    SynthResult
        ``clean`` and ``noisy`` are ``(n, dims)``; ``manifest`` lists every
        spike as ``[frame, dim, sign]`` plus per-dimension spike counts.
    """
    spec = spec or standard_spec()
    amps, freqs, phases = _descriptors(spec)
    t = np.arange(spec.n, dtype=np.float64)
    clean = np.einsum("dk,tdk->td", amps, np.sin(t[:, None, None] * freqs + phases))

    noisy = clean.copy()
    _, noise_seqs = _streams(spec.seed, spec.dims)
    spikes = []
    counts = []
    for d, ss in enumerate(noise_seqs):
        rng = np.random.Generator(np.random.PCG64(ss))
        jitter = rng.standard_normal(spec.n)
        hit = rng.random(spec.n) < spec.outlier_rate
        sign = np.where(rng.random(spec.n) < 0.5, -1.0, 1.0)
        if spec.noise_sigma > 0:
            noisy[:, d] += spec.noise_sigma * jitter
        if spec.outlier_magnitude > 0:
            noisy[hit, d] += sign[hit] * spec.outlier_magnitude
        frames = np.flatnonzero(hit)
        counts.append(int(frames.size))
        spikes.extend([int(f), d, int(sign[f])] for f in frames)
    spikes.sort()

    manifest = {
        "generator": "numpy.PCG64/SeedSequence",
        "seed": int(spec.seed),
        "n": spec.n,
        "dims": spec.dims,
        "components": spec.components,
        "noise_sigma": spec.noise_sigma,
        "outlier_rate": spec.outlier_rate,
        "outlier_magnitude": spec.outlier_magnitude,
        "spike_counts": counts,
        "spikes": spikes,
    }
    return SynthResult(clean, noisy, manifest)


def clean_roughness_bound(spec: TrajectorySpec) -> float:
    """Upper bound on ``roughness(clean)``.

    The second difference of ``A sin(w t + p)`` is ``-4 sin^2(w/2)`` times the
    signal, so each dimension's second difference is bounded in magnitude
    by ``sum_k 4 A_k sin^2(w_k / 2)``.
    """
    amps, freqs, _ = _descriptors(spec)
    per_dim = np.sum(4 * np.abs(amps) * np.sin(freqs / 2) ** 2, axis=1)
    return float(np.mean(per_dim**2))


def synth_flow(kind, width: int, height: int, count: int = 1, *, u: float = 0.0,
               v: float = 0.0, scale: float = 1.0) -> list[FlowField]:
    """Analytic displacement fields.

    kind : {"zero", "constant", "radial"}
        ``constant`` moves every pixel by ``(u, v)``.  ``radial`` moves each
        pixel by ``scale`` times its offset from the image centre, so its
        displacement length is ``scale * r``.
    """
    for name, val in (("width", width), ("height", height), ("count", count)):
        if isinstance(val, bool) or not isinstance(val, (int, np.integer)) or val < 1:
            raise InvalidConfigError(f"{name} must be a positive integer, got {val!r}")
    shape = (height, width)
    if kind == "zero":
        fu, fv = np.zeros(shape), np.zeros(shape)
    elif kind == "constant":
        fu, fv = np.full(shape, float(u)), np.full(shape, float(v))
    elif kind == "radial":
        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        fu = scale * (xs - (width - 1) / 2)
        fv = scale * (ys - (height - 1) / 2)
    else:
        raise InvalidConfigError(f"unknown flow kind {kind!r}")
    return [FlowField(fu, fv) for _ in range(count)]
