"""Multi-frame latent aggregation by multi-head cross-attention.

Every frame contributes a query ``q``, a key ``k`` (both length ``d_k``) and
a latent estimate ``w`` of shape ``(L, C)``.  The queries are averaged into a
single query, which attends over the per-frame keys; the latents are the
values.  Head ``a`` owns the contiguous slice ``a*d_k/h : (a+1)*d_k/h`` of the
query/key vectors and ``a*C/h : (a+1)*C/h`` of the latent channels, and its
logits are scaled by ``1/sqrt(d_k/h)``.

No learned value or output projections are applied.  Optional query/key
projection matrices can be supplied through :class:`AttentionConfig`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from .errors import InvalidConfigError, InvalidInputError

__all__ = [
    "FrameFeatures",
    "AttentionConfig",
    "AggregateGradients",
    "mean_query",
    "attention_weights",
    "aggregate",
    "aggregate_backward",
]


@dataclass(frozen=True)
class FrameFeatures:
    q: np.ndarray
    k: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64)
        k = np.array(self.k, dtype=np.float64)
        w = np.array(self.w, dtype=np.float64)
        if q.ndim != 1 or k.ndim != 1 or q.shape != k.shape:
            raise InvalidInputError(
                f"q and k must be vectors of equal length, got {q.shape} and {k.shape}"
            )
        if w.ndim != 2:
            raise InvalidInputError(f"w must be an L x C matrix, got shape {w.shape}")
        for name, a in (("q", q), ("k", k), ("w", w)):
            if not np.all(np.isfinite(a)):
                raise InvalidInputError(f"{name} has non-finite entries")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "w", w)


@dataclass(frozen=True)
class AttentionConfig:
    """Head count and feature shapes.

    ``query_proj`` / ``key_proj`` are optional ``d_k x d_k`` matrices applied
    to the mean query and to each key before the heads are sliced.  ``None``
    means identity.
    """

    heads: int = 1
    d_k: int = 512
    L: int = 14
    C: int = 512
    query_proj: np.ndarray | None = field(default=None, repr=False)
    key_proj: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        for name in ("heads", "d_k", "L", "C"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise InvalidConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.d_k % self.heads or self.C % self.heads:
            raise InvalidConfigError(
                f"heads={self.heads} must divide d_k={self.d_k} and C={self.C}"
            )
        for name in ("query_proj", "key_proj"):
            p = getattr(self, name)
            if p is not None:
                p = np.array(p, dtype=np.float64)
                if p.shape != (self.d_k, self.d_k):
                    raise InvalidConfigError(
                        f"{name} must be {self.d_k} x {self.d_k}, got {p.shape}"
                    )
                object.__setattr__(self, name, p)

    @classmethod
    def for_frames(cls, frames: Sequence[FrameFeatures], heads: int = 1, **kw):
        """Config whose shapes are read off the first frame."""
        if not frames:
            raise InvalidInputError("no frames")
        L, C = frames[0].w.shape
        return cls(heads=heads, d_k=frames[0].q.shape[0], L=L, C=C, **kw)

    @property
    def head_dim(self) -> int:
        return self.d_k // self.heads

    @property
    def head_channels(self) -> int:
        return self.C // self.heads


class AggregateGradients(NamedTuple):
    """Gradients stacked over frames: ``q``, ``k`` are ``(M, d_k)``, ``w`` is ``(M, L, C)``."""

    q: np.ndarray
    k: np.ndarray
    w: np.ndarray


def _stack(frames, config=None):
    if len(frames) == 0:
        raise InvalidInputError("at least one frame is required")
    for attr in ("q", "k", "w"):
        shape = getattr(frames[0], attr).shape
        if any(getattr(f, attr).shape != shape for f in frames):
            raise InvalidInputError(f"frames disagree in {attr} shape")
    Q = np.stack([f.q for f in frames])
    K = np.stack([f.k for f in frames])
    W = np.stack([f.w for f in frames])
    if config is not None:
        if Q.shape[1] != config.d_k:
            raise InvalidInputError(f"q/k length {Q.shape[1]} != d_k={config.d_k}")
        if W.shape[1:] != (config.L, config.C):
            raise InvalidInputError(
                f"w shape {W.shape[1:]} != (L, C)=({config.L}, {config.C})"
            )
    return Q, K, W


def mean_query(frames: Sequence[FrameFeatures]) -> np.ndarray:
    if len(frames) == 0:
        raise InvalidInputError("at least one frame is required")
    Q, _, _ = _stack(frames)
    return Q.mean(axis=0)


def _forward(Q, K, config):
    """Return (qbar, projected qbar, projected keys, weights)."""
    h, dh = config.heads, config.head_dim
    qbar = Q.mean(axis=0)
    qp = qbar if config.query_proj is None else config.query_proj @ qbar
    kp = K if config.key_proj is None else K @ config.key_proj.T
    M = K.shape[0]
    logits = np.einsum("ad,jad->aj", qp.reshape(h, dh), kp.reshape(M, h, dh))
    logits /= np.sqrt(dh)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    weights = e / e.sum(axis=1, keepdims=True)
    return qbar, qp, kp, weights


def attention_weights(qbar, frames: Sequence[FrameFeatures], config: AttentionConfig) -> np.ndarray:
    """Softmax attention of ``qbar`` over the frame keys, one row per head.

    Returns
    -------
    numpy.ndarray
        ``(heads, M)``; rows sum to one.
    """
    qbar = np.asarray(qbar, dtype=np.float64)
    _, K, _ = _stack(frames, config)
    if qbar.shape != (config.d_k,):
        raise InvalidInputError(f"qbar must have length {config.d_k}, got {qbar.shape}")
    # _forward averages queries; a single pseudo-frame makes the mean equal qbar
    return _forward(qbar[None, :], K, config)[3]


def aggregate(frames: Sequence[FrameFeatures], config: AttentionConfig | None = None) -> np.ndarray:
    """Fuse the per-frame latents into one ``(L, C)`` latent code."""
    if config is None:
        config = AttentionConfig.for_frames(frames)
    Q, K, W = _stack(frames, config)
    weights = _forward(Q, K, config)[3]
    return _combine(weights, W, config)


def _combine(weights, W, config):
    M, L, C = W.shape
    h, ch = config.heads, config.head_channels
    # offsets from frame 0 keep identical-latent inputs exact: w0 + sum p_j * 0
    delta = (W - W[0]).reshape(M, L, h, ch)
    return W[0] + np.einsum("aj,jlac->lac", weights, delta).reshape(L, C)


def aggregate_backward(frames: Sequence[FrameFeatures], config: AttentionConfig | None,
                       upstream) -> AggregateGradients:
    """Gradient of ``sum(upstream * aggregate(frames, config))``.

    Covers every frame's ``q``, ``k`` and ``w``, including the softmax
    Jacobian and the ``1/M`` from the query average.
    """
    if config is None:
        config = AttentionConfig.for_frames(frames)
    Q, K, W = _stack(frames, config)
    G = np.asarray(upstream, dtype=np.float64)
    if G.shape != (config.L, config.C):
        raise InvalidInputError(f"upstream must be {(config.L, config.C)}, got {G.shape}")

    M = Q.shape[0]
    h, dh, ch = config.heads, config.head_dim, config.head_channels
    _, qp, kp, weights = _forward(Q, K, config)

    Gh = G.reshape(config.L, h, ch)
    Wh = W.reshape(M, config.L, h, ch)
    gW = np.einsum("aj,lac->jlac", weights, Gh).reshape(W.shape)

    g_weights = np.einsum("lac,jlac->aj", Gh, Wh)
    g_logits = weights * (g_weights - (weights * g_weights).sum(axis=1, keepdims=True))
    g_logits /= np.sqrt(dh)

    g_qp = np.einsum("aj,jad->ad", g_logits, kp.reshape(M, h, dh)).reshape(-1)
    g_kp = np.einsum("aj,ad->jad", g_logits, qp.reshape(h, dh)).reshape(M, -1)

    g_qbar = g_qp if config.query_proj is None else config.query_proj.T @ g_qp
    gK = g_kp if config.key_proj is None else g_kp @ config.key_proj
    gQ = np.broadcast_to(g_qbar / M, Q.shape).copy()
    return AggregateGradients(q=gQ, k=gK, w=gW)
