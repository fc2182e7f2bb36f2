"""
Modal time stepping for the memory-damped Schrodinger equations.

Each sine mode ``B_k`` obeys a scalar Volterra equation

    i B' - a mu_k B + i w_k int_0^inf f(s) B(t - s) ds = 0,

with ``mu_k = 4 pi^2 k^2 / L^2`` and ``w_k = mu_k`` (memory through the
Laplacian) or ``w_k = 1`` (zeroth-order memory).  The Crank-Nicolson step
uses midpoint values ``B^{n+1/2}`` both in the dispersive term and in the
discrete convolution ``sum_m dt f^m B^{n-m+1/2}``; the unknown enters
linearly, so every mode is advanced in closed form.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable

import numpy as np

from .kernel import KernelFamily, KernelSpec, check_hypotheses, eval_f, eval_g
from .spectral import InitialHistory, ModalCoefficients

__all__ = [
    "Equation",
    "SimulationConfig",
    "MemoryWeights",
    "HistoryRing",
    "ModalState",
    "DivergenceError",
    "DegenerateStepError",
    "precompute_weights",
    "initial_state",
    "memory_sum",
    "memory_sum_direct",
    "ExponentialMemory",
    "step",
    "scheme_residual",
    "run",
]

log = logging.getLogger(__name__)

DIVERGENCE_CHECK_EVERY = 100


class Equation(str, Enum):
    LAPLACIAN = "laplacian"  # i y_t + a y_xx - i int f(s) y_xx(t - s) ds = 0
    ZEROTH = "zeroth"  # i y_t + a y_xx + i int f(s) y(t - s) ds = 0
    NONE = "none"


class DivergenceError(FloatingPointError):
    def __init__(self, step: int):
        super().__init__(f"non-finite modal amplitude detected at step {step}")
        self.step = step


class DegenerateStepError(ZeroDivisionError):
    pass


@dataclass(frozen=True)
class SimulationConfig:
    """Full description of one run.

    ``n_hist`` is the memory window in steps; ``None`` means ``n_steps``
    (at least 1).  ``quadrature`` selects the weight of the m = 0 term of
    the discrete convolution: ``"rectangle"`` uses ``dt f^0`` for every
    term, which is first order in the memory; ``"trapezoid"`` halves the
    m = 0 weight and makes the whole scheme second order.
    """

    L: float = 1.0
    a: float = 1.0
    equation: Equation = Equation.NONE
    kernel: KernelSpec = field(default_factory=KernelSpec.none)
    K: int = 16
    dt: float = 0.05
    n_steps: int = 4000
    n_hist: int | None = None
    initial: InitialHistory = field(default_factory=InitialHistory.soliton)
    energy_stride: int = 100
    quadrature: str = "rectangle"
    Q: int | None = None
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "equation", Equation(self.equation))
        if not (self.L > 0 and self.a > 0 and self.dt > 0):
            raise ValueError("L, a and dt must be positive")
        if self.K < 1 or self.n_steps < 0 or self.energy_stride < 1:
            raise ValueError("need K >= 1, n_steps >= 0 and energy_stride >= 1")
        if (self.equation is Equation.NONE) != self.kernel.is_none:
            raise ValueError("equation 'none' goes with kernel 'none' and vice versa")
        if self.n_hist is not None and self.n_hist < 1:
            raise ValueError("n_hist must be >= 1")
        if self.quadrature not in ("rectangle", "trapezoid"):
            raise ValueError(f"unknown quadrature {self.quadrature!r}")

    @property
    def window(self) -> int:
        return self.n_hist if self.n_hist is not None else max(self.n_steps, 1)

    @property
    def memory_horizon(self) -> float:
        return self.window * self.dt

    def with_(self, **changes) -> "SimulationConfig":
        return replace(self, **changes)


def eigenvalues(ks, L: float) -> np.ndarray:
    """Dirichlet-Laplacian eigenvalues ``4 pi^2 k^2 / L^2`` of the basis."""
    ks = np.asarray(ks, dtype=float)
    return 4.0 * np.pi**2 * ks**2 / L**2


def memory_factor(config: SimulationConfig, ks) -> np.ndarray:
    """Per-mode multiplier of the memory term (``mu_k``, 1 or 0)."""
    if config.equation is Equation.LAPLACIAN:
        return eigenvalues(ks, config.L)
    if config.equation is Equation.ZEROTH:
        return np.ones(len(ks))
    return np.zeros(len(ks))


# --------------------------------------------------------------------------
# weights and history


@dataclass(frozen=True)
class MemoryWeights:
    """Samples ``f^m = f(m dt)`` and ``g^m = g(m dt)`` for m = 0..N.

    ``conv`` holds the convolution weights ``dt f^m``, with the m = 0 entry
    halved under the trapezoid rule.
    """

    f: np.ndarray
    g: np.ndarray
    conv: np.ndarray
    dt: float

    @property
    def window(self) -> int:
        return self.f.size - 1

    @property
    def conv_rev(self) -> np.ndarray:
        # aligned with a history window ordered oldest -> newest
        return self.conv[:0:-1]


def precompute_weights(config: SimulationConfig) -> MemoryWeights:
    N = config.window
    s = np.arange(N + 1) * config.dt
    f = np.asarray(eval_f(config.kernel, s), dtype=float)
    g = np.asarray(eval_g(config.kernel, s), dtype=float)
    conv = config.dt * f
    if config.quadrature == "trapezoid":
        conv[0] *= 0.5
    return MemoryWeights(f, g, conv, config.dt)


class HistoryRing:
    """Fixed-length per-mode history with a contiguous chronological view.

    Every value is written twice, at slot ``h`` and ``h + N``, so
    ``buf[:, head:head + N]`` is always the window oldest -> newest.
    """

    __slots__ = ("buf", "head", "size")

    def __init__(self, initial: np.ndarray):
        initial = np.asarray(initial, dtype=complex)  # (K, N), oldest first
        K, N = initial.shape
        self.size = N
        self.buf = np.empty((K, 2 * N), dtype=complex)
        self.buf[:, :N] = initial
        self.buf[:, N:] = initial
        self.head = 0

    def view(self) -> np.ndarray:
        return self.buf[:, self.head:self.head + self.size]

    def oldest(self) -> np.ndarray:
        return self.buf[:, self.head]

    def newest(self) -> np.ndarray:
        return self.buf[:, self.head + self.size - 1]

    def push(self, values):
        h = self.head
        self.buf[:, h] = values
        self.buf[:, h + self.size] = values
        self.head = (h + 1) % self.size

    def copy(self) -> "HistoryRing":
        new = HistoryRing.__new__(HistoryRing)
        new.buf, new.head, new.size = self.buf.copy(), self.head, self.size
        return new


@dataclass
class ModalState:
    """Amplitudes ``B^n`` plus the rolling history needed by the scheme.

    ``mids`` holds the last N midpoint values ``B^{l+1/2}``, l = n-N..n-1;
    ``values`` holds ``B^l`` for l = n-N..n, from which the accumulated
    past ``eta^{m,n} = sum_{l=n-m}^n dt B^l`` is rebuilt.
    """

    step: int
    ks: np.ndarray
    B: np.ndarray
    mids: HistoryRing
    values: HistoryRing
    dt: float
    L: float

    @property
    def K(self) -> int:
        return self.B.size

    @property
    def t(self) -> float:
        return self.step * self.dt

    @property
    def window(self) -> int:
        return self.mids.size

    def coefficients(self) -> ModalCoefficients:
        return ModalCoefficients(self.B.copy(), self.L)

    def eta(self) -> np.ndarray:
        """``eta[:, m] = sum_{l=n-m}^n dt B^l`` for m = 0..N.

        Accumulated newest -> oldest so that small recent amplitudes are not
        swamped by the larger sums over the distant past.
        """
        return self.dt * np.cumsum(self.values.view()[:, ::-1], axis=1)

    def prefix_sums(self) -> np.ndarray:
        """Cumulative sums ``C^l = sum_{j <= l} dt B^j`` over the window.

        Column 0 is ``C^{n-N-1} = 0``; column N+1 is ``C^n``, so
        ``eta^{m,n} = C[:, N+1] - C[:, N-m]``.
        """
        v = self.values.view()
        C = np.zeros((self.K, v.shape[1] + 1), dtype=complex)
        np.cumsum(self.dt * v, axis=1, out=C[:, 1:])
        return C

    def copy(self) -> "ModalState":
        return ModalState(self.step, self.ks.copy(), self.B.copy(), self.mids.copy(),
                          self.values.copy(), self.dt, self.L)


def initial_state(config: SimulationConfig, ks=None, history: np.ndarray | None = None) -> ModalState:
    """State at n = 0 built from the prescribed past.

    Parameters
    ----------
    ks : array_like, optional
        Mode numbers to simulate; defaults to ``1..K``.
    history : ndarray, optional
        Coefficients ``B^{-j}``, j = 0..N, shape ``(N + 1, len(ks))``.
        Projected from ``config.initial`` when omitted.
    """
    ks = np.arange(1, config.K + 1) if ks is None else np.asarray(ks, dtype=int)
    N = config.window
    if history is None:
        full = config.initial.coefficients(int(ks.max()), config.L, N, config.dt, config.Q)
        history = full[:, ks - 1]
    history = np.asarray(history, dtype=complex)
    if history.shape != (N + 1, ks.size):
        raise ValueError(f"history must have shape {(N + 1, ks.size)}, got {history.shape}")
    chrono = history[::-1].T  # (K, N+1): B^{-N} .. B^0
    mids = 0.5 * (chrono[:, 1:] + chrono[:, :-1])
    return ModalState(0, ks, chrono[:, -1].copy(), HistoryRing(mids), HistoryRing(chrono),
                      config.dt, config.L)


# --------------------------------------------------------------------------
# convolution


def memory_sum_direct(state: ModalState, weights: MemoryWeights) -> np.ndarray:
    """History part ``sum_{m=1}^N dt f^m B^{n-m+1/2}`` for every mode."""
    return state.mids.view() @ weights.conv_rev


def memory_sum(state: ModalState, weights: MemoryWeights, B_new, history_part=None) -> np.ndarray:
    """Full discrete convolution with the candidate ``B^{n+1}`` in the m = 0 term."""
    if history_part is None:
        history_part = memory_sum_direct(state, weights)
    return weights.conv[0] * 0.5 * (np.asarray(B_new) + state.B) + history_part


class ExponentialMemory:
    """O(1)-per-step history sum for ``f(s) = f0 exp(-q s)``.

    With ``r = exp(-q dt)`` the window sum obeys
    ``S^{n+1} = r (S^n - dt f^N M^{n-N}) + dt f^1 M^n``,
    where ``M`` are midpoint values.
    """

    def __init__(self, kernel: KernelSpec, weights: MemoryWeights, state: ModalState):
        if kernel.family is not KernelFamily.EXPONENTIAL:
            raise ValueError("fast path needs an exponential kernel")
        self.r = math.exp(-kernel.rate * weights.dt)
        self.w1 = weights.dt * weights.f[1]
        self.wN = weights.dt * weights.f[-1]
        self.S = memory_sum_direct(state, weights)

    def current(self) -> np.ndarray:
        return self.S

    def advance(self, oldest_mid, new_mid):
        self.S = self.r * (self.S - self.wN * oldest_mid) + self.w1 * new_mid


# --------------------------------------------------------------------------
# stepping


def _coefficients(config: SimulationConfig, ks, weights: MemoryWeights):
    alpha = 0.5 * config.a * eigenvalues(ks, config.L) * config.dt
    wk = memory_factor(config, ks)
    beta = 0.5 * wk * weights.conv[0] * config.dt
    den = 1.0 + beta + 1j * alpha
    if np.any(np.abs(den) == 0) or not np.all(np.isfinite(den)):
        raise DegenerateStepError("degenerate Crank-Nicolson coefficient")
    num = 1.0 - beta - 1j * alpha
    return num, den, wk * config.dt


def _solve(B, S, coeffs):
    num, den, wdt = coeffs
    return (num * B - wdt * S) / den


def scheme_residual(state: ModalState, B_new, config: SimulationConfig, weights: MemoryWeights,
                    history_part=None) -> tuple[np.ndarray, np.ndarray]:
    """Residual of the discrete equation and its natural magnitude, per mode.

    The scale is the sum of the moduli of the individual terms, so a
    residual at round-off level reads ``|res| <~ 1e-16 * scale``.
    """
    ks, dt = state.ks, config.dt
    if history_part is None:
        history_part = memory_sum_direct(state, weights)
    mu = eigenvalues(ks, config.L)
    wk = memory_factor(config, ks)
    half = 0.5 * (B_new + state.B)
    mem = memory_sum(state, weights, B_new, history_part)
    res = 1j * (B_new - state.B) / dt - config.a * mu * half + 1j * wk * mem
    hist_abs = np.abs(state.mids.view()) @ np.abs(weights.conv_rev)
    scale = ((np.abs(B_new) + np.abs(state.B)) / dt + config.a * mu * np.abs(half)
             + wk * (abs(weights.conv[0]) * np.abs(half) + hist_abs))
    return res, scale


def step(state: ModalState, config: SimulationConfig, weights: MemoryWeights,
         fast: ExponentialMemory | None = None, coeffs=None) -> ModalState:
    """Advance every mode by one step in place and return the state."""
    if coeffs is None:
        coeffs = _coefficients(config, state.ks, weights)
    if fast is not None:
        S = fast.current()
    elif config.kernel.is_none:
        S = 0.0
    else:
        S = memory_sum_direct(state, weights)
    B_new = _solve(state.B, S, coeffs)
    mid = 0.5 * (B_new + state.B)
    if fast is not None:
        fast.advance(state.mids.oldest(), mid)
    state.mids.push(mid)
    state.values.push(B_new)
    state.B = B_new
    state.step += 1
    return state


def run(config: SimulationConfig, *, ks=None, history=None, fast_path: bool | None = None,
        check_residual: float | None = None,
        observer: Callable[[ModalState], None] | None = None):
    """Advance ``config.n_steps`` steps, sampling the energy every ``energy_stride``.

    Parameters
    ----------
    fast_path : bool, optional
        Use the exponential recursion for the history sum.  Defaults to
        ``True`` for exponential kernels.
    check_residual : float, optional
        If given, assert on every step that the scheme residual is below
        ``check_residual`` times its natural scale.
    observer : callable, optional
        Called with the state at every energy sample.

    Returns
    -------
    state : ModalState
    trace : EnergyTrace
    """
    from .analysis import EnergyTrace, discrete_energy

    if not config.kernel.is_none:
        report = check_hypotheses(config.kernel)
        if not (report.h1_ok and report.h2_ok):
            raise ValueError("kernel violates (H1)/(H2):\n" + report.describe())
    weights = precompute_weights(config)
    state = initial_state(config, ks, history)
    coeffs = _coefficients(config, state.ks, weights)
    if fast_path is None:
        fast_path = config.kernel.family is KernelFamily.EXPONENTIAL
    fast = ExponentialMemory(config.kernel, weights, state) if fast_path else None

    trace = EnergyTrace.for_config(config)

    def sample():
        E, l2 = discrete_energy(state, config, weights)
        trace.append(state.t, E, l2)
        if observer is not None:
            observer(state)

    sample()
    for n in range(config.n_steps):
        if check_residual is not None:
            S = memory_sum_direct(state, weights)
            B_new = _solve(state.B, fast.current() if fast else S, coeffs)
            res, scale = scheme_residual(state, B_new, config, weights, S)
            bad = np.abs(res) > check_residual * scale
            if np.any(bad):
                raise AssertionError(f"scheme residual too large at step {n}: "
                                     f"{np.max(np.abs(res) / np.maximum(scale, 1e-300))}")
        step(state, config, weights, fast, coeffs)
        done = state.step
        if done % DIVERGENCE_CHECK_EVERY == 0 or done == config.n_steps:
            if not np.all(np.isfinite(state.B)):
                raise DivergenceError(done)
        if done % config.energy_stride == 0 or done == config.n_steps:
            sample()
    log.debug("run %s finished: %d steps, %d samples", config.name, config.n_steps, len(trace))
    return state, trace
