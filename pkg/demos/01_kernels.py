"""
Memory kernels and what the hypothesis checker says about them
==============================================================

Two kernel families are built in: ``d1 exp(-q1 s)`` and ``d2 (1 + s)^-q2``.
The solver needs them integrable and decaying at a controlled rate; the
decay estimate needs one more structural condition whose form differs
between the two families.
"""
# %%
import numpy as np

from memschrodinger import KernelSpec, check_hypotheses, eval_f, eval_g

exp_kernel = KernelSpec.exponential(10000, 1)
poly_kernel = KernelSpec.polynomial(10000, 4)

s = np.array([0.0, 0.5, 1.0, 5.0, 20.0])
print("s        g_exp        g_poly       f_exp        f_poly")
for si, ge, gp, fe, fp in zip(s, eval_g(exp_kernel, s), eval_g(poly_kernel, s),
                              eval_f(exp_kernel, s), eval_f(poly_kernel, s)):
    print(f"{si:5.1f} {ge:12.5g} {gp:12.5g} {fe:12.5g} {fp:12.5g}")

# %%
# ``f`` is the tail mass of ``g``: its value at zero is the total memory
# the solver has to remember, and ``-f'`` recovers ``g``.

for kernel in (exp_kernel, poly_kernel):
    print(f"{kernel.family.value:12s} total mass f(0) = {eval_f(kernel, 0.0):.6g}")

# %%
# The checker reports the decay constant of ``g`` and which structural
# branch the kernel falls into.  The exponential family sits on the easy
# branch; the polynomial family needs a convex comparison function s^p and
# only qualifies when q2 > 3.

for kernel in (exp_kernel, poly_kernel, KernelSpec.polynomial(10000, 2.5), KernelSpec.none()):
    print(check_hypotheses(kernel).describe())
    print()
