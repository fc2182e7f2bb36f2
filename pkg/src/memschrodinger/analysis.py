"""
Discrete energies, dissipativity checks and decay-rate fits.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .kernel import Branch, DecayEnvelope, calibrate_envelope

__all__ = [
    "EnergyTrace",
    "DecayModel",
    "DecayFit",
    "DissipativityResult",
    "discrete_energy",
    "check_dissipativity",
    "fit_decay",
    "default_window",
    "calibrate_to_trace",
    "compare_envelope",
]

CSV_HEADER = ("t", "E", "l2")


@dataclass
class EnergyTrace:
    """Samples ``(t, E, l2)``; ``l2`` is the squared norm ``||y||^2``."""

    t: list = field(default_factory=list)
    E: list = field(default_factory=list)
    l2: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @classmethod
    def for_config(cls, config) -> "EnergyTrace":
        meta = dict(
            name=config.name,
            equation=config.equation.value,
            kernel=config.kernel.family.value,
            amplitude=config.kernel.amplitude,
            rate=config.kernel.rate,
            K=config.K,
            dt=config.dt,
            n_steps=config.n_steps,
            n_hist=config.window,
        )
        return cls(metadata=meta)

    @classmethod
    def from_arrays(cls, t, E, l2=None, **metadata) -> "EnergyTrace":
        t = [float(v) for v in t]
        E = [float(v) for v in E]
        l2 = [float(v) for v in (l2 if l2 is not None else np.zeros(len(t)))]
        return cls(t, E, l2, dict(metadata))

    def append(self, t: float, E: float, l2: float):
        if self.t and not t > self.t[-1]:
            raise ValueError("trace times must be strictly increasing")
        self.t.append(float(t))
        self.E.append(float(E))
        self.l2.append(float(l2))

    def __len__(self):
        return len(self.t)

    @property
    def times(self) -> np.ndarray:
        return np.asarray(self.t)

    @property
    def energies(self) -> np.ndarray:
        return np.asarray(self.E)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            fh.write(",".join(CSV_HEADER) + "\n")
            for row in zip(self.t, self.E, self.l2):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path) -> "EnergyTrace":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
                raise ValueError(f"{path}: expected header 't,E,l2'")
            rows = [[float(v) for v in r] for r in reader if r]
        trace = cls(metadata={"source": str(path)})
        for t, E, l2 in rows:
            trace.append(t, E, l2)
        return trace


def discrete_energy(state, config, weights) -> tuple[float, float]:
    """Discrete energy and squared L2 norm of ``state``.

    ``E = (L/4) [sum_k |B_k|^2 + sum_k sum_{m=1}^N dt w_k g^m |eta_k^{m,n}|^2]``
    with ``w_k = 4 pi^2 k^2 / L^2`` for Laplacian memory and ``w_k = 1`` for
    zeroth-order memory.  Complex squares are read as squared moduli.
    """
    from .solver import memory_factor

    L = config.L
    B = state.B
    l2 = 0.5 * L * float(np.vdot(B, B).real)
    if config.kernel.is_none:
        return 0.5 * l2, l2
    N = state.window
    if weights.g.size != N + 1 or state.values.size != N + 1:
        raise ValueError("state history does not cover the memory window")
    eta = state.eta()[:, 1:]
    per_mode = (eta.real**2 + eta.imag**2) @ weights.g[1:]
    wk = memory_factor(config, state.ks)
    mem = config.dt * float(np.dot(wk, per_mode))
    return 0.25 * L * (float(np.vdot(B, B).real) + mem), l2


# --------------------------------------------------------------------------
# dissipativity


@dataclass(frozen=True)
class DissipativityResult:
    passed: bool
    first_violation: int | None = None
    worst_ratio: float = 1.0

    def __bool__(self):
        return self.passed


def check_dissipativity(trace: EnergyTrace, tol: float = 1e-8) -> DissipativityResult:
    """Pass iff ``E[j+1] <= E[j] (1 + tol)`` for all consecutive samples."""
    E = trace.energies
    if E.size == 0:
        raise ValueError("empty trace")
    if E.size == 1:
        return DissipativityResult(True)
    bad = E[1:] > E[:-1] * (1.0 + tol)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(E[:-1] > 0, E[1:] / E[:-1], np.where(E[1:] > 0, np.inf, 1.0))
    worst = float(ratios.max())
    if np.any(bad):
        return DissipativityResult(False, int(np.argmax(bad)) + 1, worst)
    return DissipativityResult(True, None, worst)


# --------------------------------------------------------------------------
# decay fits


class DecayModel(str, Enum):
    EXPONENTIAL = "exponential"
    POWER = "power"


@dataclass(frozen=True)
class DecayFit:
    model: DecayModel
    rate: float
    r2: float
    window: tuple[float, float]
    intercept: float = 0.0

    def predict(self, t):
        t = np.asarray(t, dtype=float)
        if self.model is DecayModel.EXPONENTIAL:
            return np.exp(self.intercept - self.rate * t)
        return np.exp(self.intercept) * t ** (-self.rate)


def default_window(trace: EnergyTrace) -> tuple[float, float]:
    """Last 60% of the trace's time span."""
    t = trace.times
    return float(t[0] + 0.4 * (t[-1] - t[0])), float(t[-1])


def fit_decay(trace: EnergyTrace, model=DecayModel.EXPONENTIAL, window=None) -> DecayFit:
    """Least-squares decay fit of ``log E``.

    ``exponential`` fits ``log E = c - rate * t``; ``power`` fits
    ``log E = c - rate * log t``.
    """
    model = DecayModel(model)
    if window is None:
        window = default_window(trace)
    lo, hi = window
    t, E = trace.times, trace.energies
    sel = (t >= lo) & (t <= hi)
    if sel.sum() < 10:
        raise ValueError(f"need at least 10 samples in window {window}, got {int(sel.sum())}")
    t, E = t[sel], E[sel]
    if np.any(E <= 0):
        raise ValueError("fit window contains nonpositive energies")
    if model is DecayModel.POWER:
        if np.any(t <= 0):
            raise ValueError("power fit needs t > 0")
        x = np.log(t)
    else:
        x = t
    y = np.log(E)
    A = np.column_stack([np.ones_like(x), x])
    (c, slope), *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - (c + slope * x)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0 else float(np.clip(1.0 - ss_res / ss_tot, 0.0, 1.0))
    return DecayFit(model, float(-slope), r2, (float(lo), float(hi)), float(c))


# --------------------------------------------------------------------------
# envelopes


def calibrate_to_trace(trace: EnergyTrace, order: int, branch: Branch, p=None,
                       t_anchor: float | None = None) -> tuple[DecayEnvelope, float]:
    """Envelope matching the trace at ``t_anchor`` (default: 10% into the run).

    The anchor snaps to the first sample at or after the requested time.
    """
    t, E = trace.times, trace.energies
    if t_anchor is None:
        t_anchor = t[0] + 0.1 * (t[-1] - t[0])
    if not (t[0] <= t_anchor <= t[-1]) or t_anchor <= 0:
        raise ValueError(f"anchor {t_anchor} outside trace [{t[0]}, {t[-1]}]")
    j = int(np.searchsorted(t, t_anchor - 1e-12 * max(1.0, abs(t_anchor))))
    env = calibrate_envelope(order, branch, float(t[j]), float(E[j]), p)
    return env, float(t[j])


def compare_envelope(trace: EnergyTrace, envelope: DecayEnvelope, t_anchor: float) -> float:
    """Largest ``E(t) / envelope(t)`` over samples with ``t >= t_anchor``."""
    t, E = trace.times, trace.energies
    if t_anchor <= 0 or not (t[0] <= t_anchor <= t[-1]):
        raise ValueError(f"anchor {t_anchor} outside trace [{t[0]}, {t[-1]}]")
    sel = t >= t_anchor
    return float(np.max(E[sel] / envelope(t[sel])))
