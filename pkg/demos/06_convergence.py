"""
Order of accuracy of the time stepper
=====================================

Without memory the scheme is plain Crank-Nicolson and second order.  With
an exponential kernel a single mode is equivalent to a 2x2 linear ODE, and
its RK4 solution on a fine step serves as the reference.

The weight given to the newest history interval decides the order: the
default rectangle weight ``dt f(0)`` costs one order, halving it
(``quadrature = trapezoid``) restores the second order.
"""
# %%
from memschrodinger.config import load_preset
from memschrodinger.convergence import convergence_study

print(convergence_study(load_preset("convergence-no-memory").simulation()).table())
print()

# %%
exp_cfg = load_preset("convergence-exponential").simulation()
for quadrature in ("rectangle", "trapezoid"):
    study = convergence_study(exp_cfg.with_(quadrature=quadrature))
    print(f"-- {quadrature} weight")
    print(study.table())
    print()
