# Catmull-Rom spline behaviour: interpolation, the midpoint basis and
# linear extrapolation past the end knots.
import numpy as np

from jitterless.spline import fit

s = fit(([0, 1, 2, 3], [0, 1, 2, 0]))
print("values at knots:", s(np.arange(4.0)))
print("midpoint of [1, 2]:", s(1.5), "= (-0 + 9*1 + 9*2 - 0)/16 =", 27 / 16)
print("tangents:", s.tangents)

t = np.linspace(-1, 4, 11)
for ti, yi in zip(t, s(t)):
    print(f"  t={ti:5.2f}  f(t)={yi: .4f}")
