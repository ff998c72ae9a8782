"""Temporal stabilization of per-frame control sequences.

Submodules
----------
spline       Catmull-Rom interpolation with linear end extrapolation
stabilizer   ensemble-of-splines smoothing with outlier rejection
aggregator   multi-head cross-attention fusion of per-frame latents
metrics      flow-based temporal coherence (flv), rmse, roughness
synth        seeded synthetic trajectories and flow fields
formats      CSV / .flo / JSON readers and writers
cli          the ``jitterless`` command
"""
from .errors import InvalidConfigError, InvalidInputError
from .spline import CatmullRomSpline, KnotSeries, fit
from .stabilizer import StabilizerConfig, oracle_stabilize, split, stabilize
from .aggregator import AttentionConfig, FrameFeatures, aggregate, aggregate_backward
from .metrics import FlowField, flv, mean_displacement, rmse, roughness
from .synth import TrajectorySpec, generate, standard_spec, synth_flow

__version__ = "0.1.0"
