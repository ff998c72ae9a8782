# Smoothing a jittery 106-dimensional control sequence.
#
# The benchmark trajectory is a sum of slow sinusoids per dimension, observed
# with Gaussian jitter (sigma 0.1) and occasional +-1.0 spikes.  We stabilize
# it with increasing m and watch fidelity (rmse to the clean signal) and
# roughness (mean squared second difference).
import numpy as np

from jitterless import generate, rmse, roughness, stabilize, standard_spec

clean, noisy, manifest = generate(standard_spec())
print(f"{clean.shape[0]} frames x {clean.shape[1]} dims, {len(manifest['spikes'])} spikes")
print(f"noisy   rmse={rmse(noisy, clean):.4f}  roughness={roughness(noisy):.5f}")

for m in (1, 2, 3, 4, 5, 6, 8):
    out = stabilize(noisy, m)
    print(f"m={m:<2d}  rmse={rmse(out, clean):.4f}  roughness={roughness(out):.5f}")

# %% a single spike is voted out by the other phase-shifted splines
ramp = np.arange(12, dtype=float)
spiked = ramp.copy()
spiked[4] += 10
print("spiked input :", spiked)
print("stabilized   :", stabilize(spiked, 3))
