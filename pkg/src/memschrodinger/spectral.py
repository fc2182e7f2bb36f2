"""
Sine-series transforms on (0, L).

Profiles are expanded as ``y(x) = sum_k B_k sin(2 k pi x / L)``, k = 1..K.
Projection uses the composite trapezoid rule on a uniform grid; both
endpoints carry zero weight because every basis function vanishes there.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ModalCoefficients",
    "InitialHistory",
    "soliton",
    "quadrature_grid",
    "sine_matrix",
    "project",
    "project_samples",
    "reconstruct",
    "parseval_l2",
    "load_profile_csv",
]

Profile = Callable[[np.ndarray], np.ndarray]


@dataclass
class ModalCoefficients:
    values: np.ndarray
    L: float = 1.0

    def __post_init__(self):
        self.values = np.atleast_1d(np.asarray(self.values, dtype=complex))
        if self.values.ndim != 1 or self.values.size < 1:
            raise ValueError("need a 1-D sequence of at least one coefficient")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("modal coefficients must be finite")
        if not self.L > 0:
            raise ValueError("domain length must be positive")

    @property
    def K(self) -> int:
        return self.values.size


def wavenumbers(K: int, L: float) -> np.ndarray:
    """Angular wavenumbers 2 k pi / L for k = 1..K."""
    return 2.0 * np.pi * np.arange(1, K + 1) / L


def quadrature_grid(L: float, Q: int) -> np.ndarray:
    """The ``Q + 1`` uniform nodes ``x_j = j L / Q``."""
    return np.linspace(0.0, L, Q + 1)


def sine_matrix(xs, K: int, L: float) -> np.ndarray:
    """Matrix ``S[j, k-1] = sin(2 k pi x_j / L)``."""
    xs = np.asarray(xs, dtype=float)
    S = np.sin(np.outer(xs, wavenumbers(K, L)))
    return S


def _check_resolution(K: int, L: float, Q: int):
    if K < 1:
        raise ValueError("mode count K must be >= 1")
    if not L > 0:
        raise ValueError("domain length must be positive")
    if Q < 4 * K:
        raise ValueError(f"quadrature resolution Q={Q} below 4K={4 * K} (aliasing)")


def project_samples(samples, K: int, L: float) -> ModalCoefficients:
    """Project samples taken on ``quadrature_grid(L, Q)``, Q = len(samples) - 1."""
    samples = np.asarray(samples, dtype=complex)
    if samples.ndim != 1:
        raise ValueError("expected a 1-D array of samples")
    Q = samples.size - 1
    _check_resolution(K, L, Q)
    xs = quadrature_grid(L, Q)
    # interior nodes only: sin vanishes at x = 0 and x = L
    S = sine_matrix(xs[1:-1], K, L)
    return ModalCoefficients((2.0 / Q) * (samples[1:-1] @ S), L)


def project(profile: Profile, K: int, L: float = 1.0, Q: int | None = None) -> ModalCoefficients:
    """Sine coefficients ``B_k = (2/L) int_0^L y(x) sin(2 k pi x/L) dx``.

    Parameters
    ----------
    profile : callable
        Vectorised complex profile ``y(x)``.
    K : int
        Number of modes.
    L : float
        Domain length.
    Q : int, optional
        Number of quadrature intervals, at least ``4K``.  Defaults to
        ``max(4K, 2**14)``.
    """
    if Q is None:
        Q = max(4 * K, 2**14)
    _check_resolution(K, L, Q)
    xs = quadrature_grid(L, Q)
    return project_samples(np.asarray(profile(xs), dtype=complex), K, L)


def reconstruct(coeffs: ModalCoefficients, xs) -> np.ndarray:
    """Evaluate the sine series at positions ``xs`` in [0, L]."""
    xs = np.asarray(xs, dtype=float)
    L = coeffs.L
    if np.any(xs < 0) or np.any(xs > L) or np.any(np.isnan(xs)):
        raise ValueError(f"sample positions must lie in [0, {L}]")
    y = sine_matrix(xs.ravel(), coeffs.K, L) @ coeffs.values
    # sin(2 k pi) is not exactly zero in floating point
    y[(xs.ravel() == 0) | (xs.ravel() == L)] = 0.0
    return y.reshape(xs.shape)


def parseval_l2(coeffs: ModalCoefficients) -> float:
    """Squared L2 norm ``int_0^L |y|^2 = (L/2) sum |B_k|^2``."""
    v = coeffs.values
    return 0.5 * coeffs.L * float(np.vdot(v, v).real)


# --------------------------------------------------------------------------
# initial data


def soliton(A: float = 4.0, lam: float = 7.0, x0: float | None = None, x1: float = 0.4) -> Profile:
    """Profile ``A exp(i lam x) / cosh((x - x1)/x0)``; ``x0`` defaults to ``1/(2 A sqrt(lam))``."""
    if x0 is None:
        x0 = 1.0 / (2.0 * A * np.sqrt(lam))

    def y0(x):
        x = np.asarray(x, dtype=float)
        return A * np.exp(1j * lam * x) / np.cosh((x - x1) / x0)

    return y0


@dataclass
class InitialHistory:
    """Prescribed past ``y(x, -t) = profile(x, t)`` for ``t >= 0``.

    A constant profile takes only ``x``; a time-varying one takes ``(x, t)``.
    """

    profile: Callable
    time_varying: bool = False
    name: str = "custom"
    params: dict = field(default_factory=dict)

    @classmethod
    def constant(cls, profile: Profile, name: str = "custom", **params) -> "InitialHistory":
        return cls(profile, False, name, params)

    @classmethod
    def varying(cls, profile: Callable, name: str = "custom", **params) -> "InitialHistory":
        return cls(profile, True, name, params)

    @classmethod
    def soliton(cls, A=4.0, lam=7.0, x0=None, x1=0.4) -> "InitialHistory":
        if x0 is None:
            x0 = 1.0 / (2.0 * A * np.sqrt(lam))
        return cls(soliton(A, lam, x0, x1), False, "soliton", dict(A=A, lam=lam, x0=x0, x1=x1))

    def at(self, t: float) -> Profile:
        if not self.time_varying:
            return self.profile
        return lambda x: self.profile(x, t)

    def coefficients(self, K: int, L: float, n_back: int, dt: float, Q: int | None = None) -> np.ndarray:
        """History coefficients ``B^{-j}`` for j = 0..n_back, shape ``(n_back + 1, K)``."""
        if not self.time_varying:
            b = project(self.profile, K, L, Q).values
            return np.broadcast_to(b, (n_back + 1, K)).copy()
        return np.stack([project(self.at(j * dt), K, L, Q).values for j in range(n_back + 1)])


def load_profile_csv(path) -> Profile:
    """Tabulated profile from CSV rows ``x, Re y, Im y``, linearly interpolated.

    A header row is skipped if it does not parse as numbers.
    """
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.reader(fh):
            if not rec or rec[0].lstrip().startswith("#"):
                continue
            try:
                rows.append([float(v) for v in rec[:3]])
            except ValueError:
                if rows:
                    raise
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least two (x, Re y, Im y) rows")
    data = np.array(rows)
    order = np.argsort(data[:, 0])
    x, re, im = data[order].T

    def y0(xs):
        xs = np.asarray(xs, dtype=float)
        return np.interp(xs, x, re) + 1j * np.interp(xs, x, im)

    return y0
