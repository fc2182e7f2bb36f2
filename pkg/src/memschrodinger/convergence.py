"""
Observed order of accuracy of the time stepper on a single mode.

For an exponential kernel ``f(s) = (d/q) exp(-q s)`` and a constant past
``B(-t) = B0`` the memory integral ``z(t) = int_0^inf f(s) B(t-s) ds``
satisfies ``z' = -q z + (d/q) B`` with ``z(0) = d B0 / q^2``, so the mode
is the solution of a two-dimensional linear ODE.  That ODE, integrated
with classical RK4 on a much finer step, is the reference.  Other kernels
fall back to self-convergence against a finer run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernel import KernelFamily
from .solver import SimulationConfig, eigenvalues, memory_factor, run

__all__ = ["ConvergenceStudy", "augmented_rk4", "rk4_propagator", "single_mode", "convergence_study"]

ORDER_RANGE = (1.8, 2.2)


def rk4_propagator(A: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for the linear system ``u' = A u`` as a matrix.

    For linear systems the four stages collapse to the degree-4 Taylor
    polynomial ``I + hA + (hA)^2/2 + (hA)^3/6 + (hA)^4/24``.
    """
    hA = h * np.asarray(A, dtype=complex)
    P = np.eye(hA.shape[0], dtype=complex)
    term = P.copy()
    for j in range(1, 5):
        term = term @ hA / j
        P = P + term
    return P


def augmented_rk4(mu: float, w: float, a: float, d: float, q: float, B0: complex, T,
                  h: float):
    """RK4 solution of ``B' = -i a mu B - w z``, ``z' = -q z + (d/q) B``.

    ``T`` may be a scalar or an increasing array of output times, each a
    multiple of ``h``; the result has the same shape.
    """
    times = np.atleast_1d(np.asarray(T, dtype=float))
    counts = np.rint(times / h).astype(np.int64)
    if np.any(counts < 0) or np.any(np.diff(counts) < 0) or not np.allclose(counts * h, times,
                                                                            rtol=1e-9, atol=0):
        raise ValueError("output times must be increasing multiples of h")
    A = np.array([[-1j * a * mu, -w], [d / q, -q]], dtype=complex)
    P = rk4_propagator(A, h)
    u = np.array([B0, d * B0 / q**2], dtype=complex)
    out = np.empty(times.size, dtype=complex)
    done = 0
    for i, n in enumerate(counts):
        u = np.linalg.matrix_power(P, int(n - done)) @ u
        done = int(n)
        out[i] = u[0]
    return complex(out[0]) if np.ndim(T) == 0 else out


def single_mode(config: SimulationConfig, mode: int, dt: float, T: float,
                horizon: float | None = None, B0: complex | None = None):
    """Run mode ``mode`` alone to time ``T``; returns ``(B(T), B0)``."""
    n_steps = int(round(T / dt))
    if n_steps < 1 or not math.isclose(n_steps * dt, T, rel_tol=1e-9):
        raise ValueError(f"T={T} is not a multiple of dt={dt}")
    n_hist = None
    if horizon is not None:
        n_hist = max(1, int(math.ceil(horizon / dt - 1e-9)))
    cfg = config.with_(K=mode, dt=dt, n_steps=n_steps, n_hist=n_hist, energy_stride=n_steps)
    history = None
    if B0 is not None:
        history = np.full((cfg.window + 1, 1), B0, dtype=complex)
    state, _ = run(cfg, ks=[mode], history=history)
    return complex(state.B[0]), complex(state.values.view()[0, 0])


@dataclass
class ConvergenceStudy:
    dts: np.ndarray
    errors: np.ndarray
    reference: str

    @property
    def orders(self) -> np.ndarray:
        e = self.errors
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log2(e[:-1] / e[1:])

    @property
    def exact(self) -> bool:
        return bool(np.all(self.errors == 0))

    @property
    def observed_order(self) -> float:
        if self.exact:
            return math.inf
        return float(np.mean(self.orders))

    def passed(self, lo=ORDER_RANGE[0], hi=ORDER_RANGE[1]) -> bool:
        if self.exact:
            return True
        o = self.orders
        return bool(np.all(np.isfinite(o)) and np.all((o >= lo) & (o <= hi)))

    def table(self) -> str:
        lines = [f"reference: {self.reference}", f"{'dt':>12} {'error':>14} {'order':>8}"]
        orders = [float("nan"), *self.orders]
        for dt, err, o in zip(self.dts, self.errors, orders):
            lines.append(f"{dt:12.6g} {err:14.6e} {'' if math.isnan(o) else f'{o:8.4f}':>8}")
        if self.exact:
            lines.append("observed order: exact (all errors zero)")
        else:
            lines.append(f"observed order: {self.observed_order:.4f}")
        return "\n".join(lines)


def convergence_study(config: SimulationConfig, halvings: int = 3, T: float = 1.0, mode: int = 1,
                      horizon: float | None = None, reference: str = "auto") -> ConvergenceStudy:
    """Errors at ``T`` for ``dt / 2**j``, j = 0..halvings.

    ``reference`` is ``"rk4"`` (exponential kernel, constant past),
    ``"self"`` (a run with ``dt / 2**(halvings + 3)``) or ``"auto"``.
    The memory window keeps a fixed length ``horizon`` in time; for the
    exponential kernel it defaults to ``40 / q``.
    """
    if halvings < 3:
        raise ValueError("need at least three halvings")
    kernel = config.kernel
    exp_kernel = kernel.family is KernelFamily.EXPONENTIAL
    if reference == "auto":
        reference = "rk4" if exp_kernel and not config.initial.time_varying else "self"
    if reference == "rk4" and not exp_kernel:
        raise ValueError("the RK4 reference needs an exponential kernel")
    if horizon is None and exp_kernel:
        horizon = 40.0 / kernel.rate
    if horizon is None and not kernel.is_none:
        horizon = config.memory_horizon

    dts = config.dt / 2.0 ** np.arange(halvings + 1)
    sols = []
    B0 = None
    for dt in dts:
        sol, B0 = single_mode(config, mode, float(dt), T, horizon)
        sols.append(sol)
    sols = np.array(sols)

    if reference == "rk4":
        mu = float(eigenvalues([mode], config.L)[0])
        w = float(memory_factor(config, [mode])[0])
        ref = augmented_rk4(mu, w, config.a, kernel.amplitude, kernel.rate, B0, T, dts[-1] / 100)
    else:
        ref, _ = single_mode(config, mode, float(config.dt / 2.0 ** (halvings + 3)), T, horizon)
    errors = np.abs(sols - ref)
    return ConvergenceStudy(dts, errors, reference)
