"""
Memory kernels, hypothesis checks and decay envelopes.

A kernel is described by its relaxation rate ``g = -f'``.  Two families are
supported, plus the memoryless case:

* exponential: ``g(s) = d1 * exp(-q1 * s)``
* polynomial:  ``g(s) = d2 * (1 + s) ** (-q2)``
* none:        ``g = 0``

The relaxation function ``f`` is the tail mass of ``g``,
``f(s) = int_s^inf g``, so that ``f(0) = g0 > 0`` and ``f(inf) = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "KernelFamily",
    "KernelSpec",
    "Branch",
    "HypothesisReport",
    "DecayEnvelope",
    "eval_g",
    "eval_dg",
    "eval_f",
    "check_hypotheses",
    "convex_exponent",
    "envelope_value",
    "envelope_monomial",
    "G_n",
    "calibrate_envelope",
]

P_MARGIN = 1.01
AUDIT_GRID = np.logspace(-3, 3, 1000)


class KernelFamily(str, Enum):
    EXPONENTIAL = "exponential"
    POLYNOMIAL = "polynomial"
    NONE = "none"


@dataclass(frozen=True)
class KernelSpec:
    """Relaxation-kernel family and its parameters.

    ``amplitude`` is d1 (exponential) or d2 (polynomial); ``rate`` is q1 or
    q2.  Both are ignored for ``KernelFamily.NONE``.
    """

    family: KernelFamily = KernelFamily.NONE
    amplitude: float = 0.0
    rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "family", KernelFamily(self.family))
        if self.family is KernelFamily.NONE:
            object.__setattr__(self, "amplitude", 0.0)
            object.__setattr__(self, "rate", 0.0)
            return
        if not (self.amplitude > 0 and math.isfinite(self.amplitude)):
            raise ValueError(f"kernel amplitude must be positive, got {self.amplitude}")
        if not (self.rate > 0 and math.isfinite(self.rate)):
            raise ValueError(f"kernel rate must be positive, got {self.rate}")

    @classmethod
    def exponential(cls, d1: float, q1: float) -> "KernelSpec":
        return cls(KernelFamily.EXPONENTIAL, d1, q1)

    @classmethod
    def polynomial(cls, d2: float, q2: float) -> "KernelSpec":
        return cls(KernelFamily.POLYNOMIAL, d2, q2)

    @classmethod
    def none(cls) -> "KernelSpec":
        return cls(KernelFamily.NONE)

    @property
    def is_none(self) -> bool:
        return self.family is KernelFamily.NONE


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0) or np.any(np.isnan(s)):
        raise ValueError("kernel argument s must be >= 0")
    return s


def _out(s, value):
    return float(value) if np.ndim(s) == 0 else value


def eval_g(kernel: KernelSpec, s):
    """Relaxation rate g(s); accepts scalars or arrays."""
    s = _check_s(s)
    if kernel.family is KernelFamily.EXPONENTIAL:
        val = kernel.amplitude * np.exp(-kernel.rate * s)
    elif kernel.family is KernelFamily.POLYNOMIAL:
        val = kernel.amplitude * (1.0 + s) ** (-kernel.rate)
    else:
        val = np.zeros_like(s)
    return _out(s, val)


def eval_dg(kernel: KernelSpec, s):
    """Derivative g'(s)."""
    s = _check_s(s)
    d, q = kernel.amplitude, kernel.rate
    if kernel.family is KernelFamily.EXPONENTIAL:
        val = -q * d * np.exp(-q * s)
    elif kernel.family is KernelFamily.POLYNOMIAL:
        val = -q * d * (1.0 + s) ** (-q - 1.0)
    else:
        val = np.zeros_like(s)
    return _out(s, val)


def eval_f(kernel: KernelSpec, s):
    """Relaxation function f(s) = int_s^inf g.

    Raises
    ------
    ValueError
        If ``s < 0``, or for a polynomial kernel with ``q2 <= 1`` whose tail
        mass is infinite.
    """
    s = _check_s(s)
    d, q = kernel.amplitude, kernel.rate
    if kernel.family is KernelFamily.EXPONENTIAL:
        val = (d / q) * np.exp(-q * s)
    elif kernel.family is KernelFamily.POLYNOMIAL:
        if q <= 1:
            raise ValueError(f"polynomial kernel with q2={q} <= 1 has infinite mass")
        val = (d / (q - 1.0)) * (1.0 + s) ** (-(q - 1.0))
    else:
        val = np.zeros_like(s)
    return _out(s, val)


# --------------------------------------------------------------------------
# hypotheses


class Branch(str, Enum):
    EXPONENTIAL = "exponential"
    CONVEX = "convex"
    NOT_SATISFIED = "not_satisfied"


@dataclass(frozen=True)
class HypothesisReport:
    kernel: KernelSpec
    h1_ok: bool
    h2_ok: bool
    beta0: float | None
    h3_branch: Branch
    alpha0: float | None = None
    p: float | None = None
    g0_mass: float = 0.0
    messages: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return self.h1_ok and self.h2_ok and self.h3_branch is not Branch.NOT_SATISFIED

    def describe(self) -> str:
        k = self.kernel
        lines = [f"variant={k.family.value}"]
        if not k.is_none:
            lines.append(f"amplitude={k.amplitude!r} rate={k.rate!r}")
        lines.append(f"H1={'ok' if self.h1_ok else 'FAIL'} H2={'ok' if self.h2_ok else 'FAIL'}")
        if self.beta0 is not None:
            lines.append(f"beta0={self.beta0!r}")
        parts = [f"branch={self.h3_branch.value}"]
        if self.alpha0 is not None:
            parts.append(f"alpha0={self.alpha0!r}")
        if self.p is not None:
            parts.append(f"p={self.p!r}")
        lines.append(" ".join(parts))
        lines.append(f"g0={self.g0_mass!r}")
        lines.extend(self.messages)
        return "\n".join(lines)


def convex_exponent(q2: float) -> float:
    """Exponent p of G(s) = s**p for the polynomial kernel, 1% above the threshold."""
    return P_MARGIN * (q2 + 1.0) / (q2 - 3.0)


def _audit(kernel: KernelSpec, beta0: float, alpha0: float | None) -> list[str]:
    s = AUDIT_GRID
    g = eval_g(kernel, s)
    dg = eval_dg(kernel, s)
    problems = []
    if np.any(g < 0) or np.any(np.diff(g) > 0):
        problems.append("grid audit: g is not nonnegative and non-increasing")
    # subnormal values carry no relative precision; compare only normal floats
    normal = np.abs(g) >= np.finfo(float).tiny / np.finfo(float).eps
    g, dg = g[normal], dg[normal]
    # relative slack so that exact equalities (exponential family) survive rounding
    slack = 1e-12 * np.abs(g)
    if np.any(-beta0 * g > dg + slack):
        problems.append("grid audit: -beta0*g <= g' violated")
    if alpha0 is not None and np.any(dg > -alpha0 * g + slack):
        problems.append("grid audit: g' <= -alpha0*g violated")
    return problems


def check_hypotheses(kernel: KernelSpec) -> HypothesisReport:
    """Check (H1)-(H3) analytically per family, then audit on a log grid."""
    fam = kernel.family
    if fam is KernelFamily.NONE:
        return HypothesisReport(
            kernel, True, True, None, Branch.EXPONENTIAL, g0_mass=0.0,
            messages=("g0=0: conservative",),
        )
    d, q = kernel.amplitude, kernel.rate
    if fam is KernelFamily.EXPONENTIAL:
        beta0 = alpha0 = q
        msgs = _audit(kernel, beta0, alpha0)
        return HypothesisReport(
            kernel, h1_ok=not msgs, h2_ok=not msgs, beta0=beta0,
            h3_branch=Branch.EXPONENTIAL if not msgs else Branch.NOT_SATISFIED,
            alpha0=alpha0, g0_mass=d / q, messages=tuple(msgs),
        )

    # polynomial: g'/g = -q/(1+s) >= -q
    msgs = []
    h1 = q > 1
    if not h1:
        msgs.append("H1 requires q2>1 (finite kernel mass)")
    beta0 = q
    msgs.extend(_audit(kernel, beta0, None))
    h2 = not any(m.startswith("grid audit") for m in msgs)
    if q > 3:
        branch, p = Branch.CONVEX, convex_exponent(q)
    else:
        branch, p = Branch.NOT_SATISFIED, None
        msgs.append("H3 requires q2>3")
    g0 = d / (q - 1.0) if h1 else math.inf
    return HypothesisReport(
        kernel, h1_ok=h1 and h2, h2_ok=h2, beta0=beta0, h3_branch=branch,
        p=p, g0_mass=g0, messages=tuple(msgs),
    )


# --------------------------------------------------------------------------
# decay envelopes


@dataclass(frozen=True)
class DecayEnvelope:
    """Bound ``t -> scale * G_n(scale / t)``.

    For the exponential branch ``G_n(s) = s**n``; for the convex branch with
    ``G(s) = s**p`` the recursion gives ``G_n(s) = c_n * s**p_n`` with
    ``p_n = sum_{m=1}^n p**-m``.
    """

    order: int
    branch: Branch
    scale: float = 1.0
    p: float | None = None

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("envelope order must be >= 1")
        if self.branch is Branch.NOT_SATISFIED:
            raise ValueError("no envelope without (H3)")
        if self.branch is Branch.CONVEX and (self.p is None or self.p <= 1):
            raise ValueError("convex branch needs p > 1")
        if not self.scale > 0:
            raise ValueError("envelope scale must be positive")

    @property
    def exponent(self) -> float:
        return envelope_monomial(self.order, self.branch, self.p)[1]

    def __call__(self, t):
        return envelope_value(self, t)


def envelope_monomial(order: int, branch: Branch, p: float | None = None) -> tuple[float, float]:
    """Return ``(c_n, e_n)`` with ``G_n(s) = c_n * s**e_n``.

    G_0 is ``s`` or ``s*G'(s) = p*s**p``; G_1 is its inverse and
    ``G_m(s) = G_1(s * G_{m-1}(s))``.  Every step stays a monomial, so the
    inverse is taken in closed form.
    """
    if branch is Branch.EXPONENTIAL:
        return 1.0, float(order)
    if branch is not Branch.CONVEX or p is None:
        raise ValueError("envelope needs the exponential or convex branch")
    # G_1(s) = (s/p)**(1/p)
    c, e = p ** (-1.0 / p), 1.0 / p
    for _ in range(order - 1):
        c, e = (c / p) ** (1.0 / p), (1.0 + e) / p
    return c, e


def G_n(order: int, branch: Branch, s, p: float | None = None):
    """Evaluate the iterated envelope function G_n at ``s >= 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("G_n is defined on s >= 0")
    c, e = envelope_monomial(order, branch, p)
    return _out(s, c * s**e)


def envelope_value(envelope: DecayEnvelope, t):
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0) or np.any(np.isnan(t)):
        raise ValueError("envelope is defined for t > 0")
    a = envelope.scale
    return _out(t, a * G_n(envelope.order, envelope.branch, a / t, envelope.p))


def calibrate_envelope(
    order: int, branch: Branch, t_anchor: float, energy_anchor: float, p: float | None = None
) -> DecayEnvelope:
    """Envelope whose value at ``t_anchor`` equals ``energy_anchor``.

    Solves ``a * c_n * (a/t)**e_n = E`` for the scale ``a``.
    """
    if t_anchor <= 0 or energy_anchor <= 0:
        raise ValueError("calibration needs t_anchor > 0 and a positive energy")
    c, e = envelope_monomial(order, branch, p)
    scale = (energy_anchor * t_anchor**e / c) ** (1.0 / (1.0 + e))
    return DecayEnvelope(order, branch, scale, p)
