"""
Run configuration files.

Configs are INI files with the sections ``[domain]``, ``[kernel]``,
``[scheme]``, ``[initial]`` and ``[output]``, plus an optional
``[convergence]`` section read by the convergence study::

    [domain]
    L = 1.0
    a = 1.0
    K = 16

    [kernel]
    variant = exponential      ; exponential | polynomial | none
    amplitude = 10000          ; d1 or d2
    rate = 1                   ; q1 or q2

    [scheme]
    equation = zeroth          ; zeroth | laplacian | none
    dt = 0.05
    n_steps = 4000
    n_hist = 16000             ; optional, defaults to n_steps
    quadrature = rectangle     ; rectangle | trapezoid

    [initial]
    profile = soliton          ; soliton | sine | csv
    A = 4
    lambda = 7
    x1 = 0.4

    [output]
    energy_stride = 100
"""
from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .kernel import KernelSpec
from .solver import Equation, SimulationConfig
from .spectral import InitialHistory, load_profile_csv

__all__ = ["ConfigError", "RunConfig", "load_config", "loads_config", "list_presets", "load_preset"]


class ConfigError(ValueError):
    pass


@dataclass
class DomainSection:
    L: float = 1.0
    a: float = 1.0
    K: int = 16
    Q: int | None = None


@dataclass
class KernelSection:
    variant: str = "none"
    amplitude: float = 0.0
    rate: float = 0.0


@dataclass
class SchemeSection:
    equation: str = "none"
    dt: float = 0.05
    n_steps: int = 4000
    n_hist: int | None = None
    quadrature: str = "rectangle"


@dataclass
class InitialSection:
    profile: str = "soliton"
    A: float = 4.0
    lam: float = 7.0
    x0: float | None = None
    x1: float = 0.4
    mode: int = 1
    amplitude: float = 1.0
    path: str | None = None


@dataclass
class OutputSection:
    energy_stride: int = 100
    snapshot_stride: int | None = None
    nx: int = 256


@dataclass
class ConvergenceSection:
    halvings: int = 3
    T: float = 1.0
    mode: int = 1
    horizon: float | None = None


# INI key -> dataclass field where they differ
_ALIASES = {"initial": {"lambda": "lam"}}


@dataclass
class RunConfig:
    """Plain-data view of a config file; ``simulation()`` builds the solver config."""

    name: str = ""
    domain: DomainSection = field(default_factory=DomainSection)
    kernel: KernelSection = field(default_factory=KernelSection)
    scheme: SchemeSection = field(default_factory=SchemeSection)
    initial: InitialSection = field(default_factory=InitialSection)
    output: OutputSection = field(default_factory=OutputSection)
    convergence: ConvergenceSection = field(default_factory=ConvergenceSection)
    base_dir: Path | None = field(default=None, compare=False)

    def kernel_spec(self) -> KernelSpec:
        k = self.kernel
        try:
            return KernelSpec(k.variant, k.amplitude, k.rate)
        except ValueError as exc:
            raise ConfigError(f"[kernel] {exc}") from None

    def initial_history(self) -> InitialHistory:
        ini = self.initial
        if ini.profile == "soliton":
            return InitialHistory.soliton(ini.A, ini.lam, ini.x0, ini.x1)
        if ini.profile == "sine":
            L, k, amp = self.domain.L, ini.mode, ini.amplitude
            return InitialHistory.constant(
                lambda x: amp * np.sin(2 * np.pi * k * np.asarray(x) / L) + 0j,
                "sine", mode=k, amplitude=amp,
            )
        if ini.profile == "csv":
            if not ini.path:
                raise ConfigError("[initial] profile = csv needs a path")
            path = Path(ini.path)
            if not path.is_absolute() and self.base_dir is not None:
                path = self.base_dir / path
            return InitialHistory.constant(load_profile_csv(path), "csv", path=str(path))
        raise ConfigError(f"[initial] unknown profile {ini.profile!r}")

    def simulation(self) -> SimulationConfig:
        d, s = self.domain, self.scheme
        try:
            return SimulationConfig(
                L=d.L, a=d.a, equation=Equation(s.equation), kernel=self.kernel_spec(), K=d.K,
                dt=s.dt, n_steps=s.n_steps, n_hist=s.n_hist, initial=self.initial_history(),
                energy_stride=self.output.energy_stride, quadrature=s.quadrature, Q=d.Q,
                name=self.name,
            )
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from None

    def dumps(self) -> str:
        lines = []
        for sec in ("domain", "kernel", "scheme", "initial", "output", "convergence"):
            lines.append(f"[{sec}]")
            inverse = {v: k for k, v in _ALIASES.get(sec, {}).items()}
            for key, val in asdict(getattr(self, sec)).items():
                if val is None:
                    continue
                lines.append(f"{inverse.get(key, key)} = {val!r}" if isinstance(val, float)
                             else f"{inverse.get(key, key)} = {val}")
            lines.append("")
        return "\n".join(lines)


def _convert(raw: str, annotation: str, where: str):
    raw = raw.strip()
    kind = annotation.split("|")[0].strip()
    try:
        if kind == "int":
            val = float(raw)
            if not val.is_integer():
                raise ValueError
            return int(val)
        if kind == "float":
            val = float(raw)
            if not math.isfinite(val):
                raise ValueError
            return val
    except ValueError:
        raise ConfigError(f"{where}: cannot read {raw!r} as {kind}") from None
    return raw


def loads_config(text: str, name: str = "", base_dir=None) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    cfg = RunConfig(name=name, base_dir=Path(base_dir) if base_dir else None)
    known = {f.name for f in fields(RunConfig)} - {"name", "base_dir"}
    for sec in parser.sections():
        if sec not in known:
            raise ConfigError(f"unknown section [{sec}]")
        target = getattr(cfg, sec)
        types = {f.name: f for f in fields(target)}
        aliases = _ALIASES.get(sec, {})
        for key, raw in parser.items(sec):
            attr = aliases.get(key, key)
            if attr not in types:
                raise ConfigError(f"[{sec}] unknown key {key!r}")
            f = types[attr]
            setattr(target, attr, _convert(raw, str(f.type), f"[{sec}] {key}"))
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return loads_config(text, name=path.stem, base_dir=path.parent)


def list_presets() -> list[str]:
    root = resources.files(__package__) / "presets"
    return sorted(p.name[:-4] for p in root.iterdir() if p.name.endswith(".ini"))


def load_preset(name: str) -> RunConfig:
    res = resources.files(__package__) / "presets" / f"{name}.ini"
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(list_presets())}")
    return loads_config(res.read_text(), name=name)
