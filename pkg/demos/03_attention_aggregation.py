# Fusing per-frame latent estimates with multi-head cross-attention and
# checking the analytic gradient against central differences.
import numpy as np

from jitterless.aggregator import (
    AttentionConfig,
    FrameFeatures,
    aggregate,
    aggregate_backward,
    attention_weights,
    mean_query,
)

rng = np.random.default_rng(0)
M, heads, d_k, L, C = 4, 2, 8, 3, 6
frames = [FrameFeatures(rng.normal(size=d_k), rng.normal(size=d_k), rng.normal(size=(L, C)))
          for _ in range(M)]
cfg = AttentionConfig(heads=heads, d_k=d_k, L=L, C=C)

weights = attention_weights(mean_query(frames), frames, cfg)
print("per-head frame weights:\n", weights.round(4))
fused = aggregate(frames, cfg)
print("fused latent shape:", fused.shape)

G = rng.normal(size=(L, C))
grads = aggregate_backward(frames, cfg, G)

# perturb one key entry and compare
eps = 1e-6
bumped = list(frames)
k = frames[2].k.copy()
k[5] += eps
bumped[2] = FrameFeatures(frames[2].q, k, frames[2].w)
fd = (np.sum(G * aggregate(bumped, cfg)) - np.sum(G * fused)) / eps
print(f"d/dk[2][5]: analytic {grads.k[2, 5]:.8f}, forward difference {fd:.8f}")
