"""
Comparing a trace against the predicted decay envelope
======================================================

The decay estimate says ``E(t) <= C t^-n`` for the exponential branch, but
the constant C is not computable.  Matching the envelope to the trace at
one anchor time turns the estimate into something we can check: after
the anchor, the trace should stay under the curve.
"""
# %%
from memschrodinger import run
from memschrodinger.analysis import calibrate_to_trace, compare_envelope
from memschrodinger.config import load_preset
from memschrodinger.kernel import Branch, DecayEnvelope

_, trace = run(load_preset("figure2-exponential").simulation())

for n in (1, 2, 3):
    env, t_anchor = calibrate_to_trace(trace, n, Branch.EXPONENTIAL)
    ratio = compare_envelope(trace, env, t_anchor)
    print(f"n={n}: anchor t={t_anchor:g}, max E/envelope after anchor = {ratio:.4f}")

# %%
# On the convex branch the envelope decays like t^-(p^-1 + ... + p^-n),
# which is much slower.  For the polynomial kernel with q2 = 4, p = 5.05:

for n in (1, 2, 3):
    env = DecayEnvelope(n, Branch.CONVEX, 1.0, p=5.05)
    print(f"n={n}: envelope exponent {env.exponent:.5f}")
