"""
From a soliton profile to sine coefficients and back
====================================================

The state lives in the span of ``sin(2 k pi x / L)``.  The default initial
condition is a travelling soliton ``A exp(i lam x) / cosh((x - x1)/x0)``.
"""
# %%
import numpy as np

from memschrodinger import parseval_l2, project, reconstruct, soliton

y0 = soliton(A=4, lam=7, x1=0.4)
xs = np.linspace(0, 1, 2001)

# %%
# Project onto more and more modes and look at how much of the profile is
# captured.  The basis contains only sines with an even number of half
# waves, so some of the profile's mass is out of reach whatever K is.

dens = np.abs(y0(xs)) ** 2
exact_l2 = float(np.sum(dens[1:] + dens[:-1]) * 0.5 * (xs[1] - xs[0]))
for K in (4, 16, 64, 256):
    B = project(y0, K)
    err = np.max(np.abs(reconstruct(B, xs) - y0(xs)))
    print(f"K={K:4d}  ||y_K||^2={parseval_l2(B):.6f}  max|y_K - y0|={err:.3e}")
print(f"||y0||^2 = {exact_l2:.6f}")

# %%
# Band-limited data survive the round trip to rounding error.

B = project(y0, 16)
back = project(lambda x: reconstruct(B, x), 16, Q=64)
print("round-trip error:", np.max(np.abs(back.values - B.values)))
