"""
Without memory the discrete energy is conserved
===============================================

Crank-Nicolson applied to ``B' = -i a mu_k B`` multiplies every mode by a
number of modulus one, so ``||y||^2`` stays put to rounding error.
"""
# %%
import numpy as np

from memschrodinger import run
from memschrodinger.config import load_preset

sim = load_preset("no-memory").simulation()
state, trace = run(sim)

E = trace.energies
print(f"{len(trace)} samples over t in [0, {trace.t[-1]:g}]")
print(f"E(0) = {E[0]:.15g}")
print(f"max relative drift = {np.max(np.abs(E - E[0])) / E[0]:.2e}")

# %%
# Each mode keeps its own modulus; only its phase turns.

from memschrodinger import initial_state  # noqa: E402

start = initial_state(sim)
print("max | |B_k(T)| - |B_k(0)| | =", np.max(np.abs(np.abs(state.B) - np.abs(start.B))))
