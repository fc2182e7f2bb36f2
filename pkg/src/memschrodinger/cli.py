"""
Command-line front end.

    memschrodinger check-kernel --config run.ini
    memschrodinger run --preset figure2-exponential --out runs/exp
    memschrodinger compare runs/*/trace.csv
    memschrodinger convergence --preset convergence-no-memory

Exit codes: 0 success, 1 domain failure (hypothesis violation, divergence,
bad ordering or order of accuracy), 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import EnergyTrace, fit_decay
from .config import ConfigError, RunConfig, list_presets, load_config, load_preset
from .convergence import convergence_study
from .kernel import check_hypotheses
from .solver import DivergenceError, run
from .spectral import ModalCoefficients, reconstruct, sine_matrix

log = logging.getLogger("memschrodinger")

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2

QUARTET = {
    ("zeroth", "exponential"),
    ("zeroth", "polynomial"),
    ("laplacian", "exponential"),
    ("laplacian", "polynomial"),
}


class UsageError(Exception):
    pass


def _load(args) -> RunConfig:
    if getattr(args, "preset", None) and getattr(args, "config", None):
        raise UsageError("give either --config or --preset, not both")
    if getattr(args, "preset", None):
        cfg = load_preset(args.preset)
    elif getattr(args, "config", None):
        cfg = load_config(args.config)
    else:
        raise UsageError("a --config PATH or --preset NAME is required")
    if getattr(args, "stride", None) is not None:
        if args.stride < 1:
            raise UsageError("--stride must be >= 1")
        cfg.output.energy_stride = args.stride
    return cfg


# --------------------------------------------------------------------------
# check-kernel


def cmd_check_kernel(args) -> int:
    cfg = _load(args)
    report = check_hypotheses(cfg.kernel_spec())
    text = report.describe()
    print(text)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text + "\n")
    return EXIT_OK if report.ok else EXIT_DOMAIN


# --------------------------------------------------------------------------
# run


def _write_profile_csv(path: Path, xs, y):
    with open(path, "w") as fh:
        fh.write("x,re_y,im_y,abs_y\n")
        for x, v in zip(xs, y):
            fh.write(f"{x:.17g},{v.real:.17g},{v.imag:.17g},{abs(v):.17g}\n")


def plot_script(trace_name="trace.csv", spacetime_name="spacetime.dat", title="") -> str:
    """Gnuplot script drawing |y(x, t)| and the energy on a log scale."""
    return f"""\
# gnuplot script; run with: gnuplot plot.gp
set terminal pngcairo size 1400,600
set output 'figure.png'
set multiplot layout 1,2 title "{title}"

set title '|y(x,t)|'
set xlabel 'x'
set ylabel 't'
set view map
set pm3d map
unset key
splot '{spacetime_name}' using 2:1:3 with pm3d

unset view
unset pm3d
set title 'energy'
set xlabel 't'
set ylabel 'E'
set logscale y
set datafile separator ','
set key top right
plot '{trace_name}' skip 1 using 1:2 with lines title 'E', \\
     '{trace_name}' skip 1 using 1:(0.5*$3) with lines title '||y||^2/2'
unset multiplot
"""


def execute_run(cfg: RunConfig, out_dir: Path) -> EnergyTrace:
    """Run ``cfg`` and write all artifacts into ``out_dir`` (replaced atomically)."""
    sim = cfg.simulation()
    report = check_hypotheses(sim.kernel)
    if not report.ok:
        raise ValueError("kernel hypotheses fail:\n" + report.describe())

    xs = np.linspace(0.0, sim.L, cfg.output.nx + 1)
    S = sine_matrix(xs, sim.K, sim.L)
    S[0] = S[-1] = 0.0
    snap_stride = cfg.output.snapshot_stride or sim.energy_stride
    snaps = []

    def observer(state):
        if state.step % snap_stride == 0 or state.step == sim.n_steps:
            snaps.append((state.t, np.abs(S @ state.B)))

    state, trace = run(sim, observer=observer)

    out_dir = Path(out_dir)
    out_dir.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out_dir.name}.", dir=out_dir.parent))
    try:
        trace.to_csv(tmp / "trace.csv")
        _write_profile_csv(tmp / "final_state.csv", xs,
                           reconstruct(ModalCoefficients(state.B, sim.L), xs))
        with open(tmp / "spacetime.dat", "w") as fh:
            fh.write("# t x abs_y\n")
            for t, mag in snaps:
                for x, m in zip(xs, mag):
                    fh.write(f"{t:.17g} {x:.17g} {m:.17g}\n")
                fh.write("\n")
        (tmp / "hypothesis.txt").write_text(report.describe() + "\n")
        (tmp / "plot.gp").write_text(plot_script(title=cfg.name))
        manifest = dict(trace.metadata, config=cfg.dumps(),
                        outputs=["trace.csv", "final_state.csv", "spacetime.dat",
                                 "hypothesis.txt", "plot.gp"])
        (tmp / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        os.chmod(tmp, 0o755)
        if out_dir.exists():
            shutil.rmtree(out_dir)
        os.replace(tmp, out_dir)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return trace


def cmd_run(args) -> int:
    cfg = _load(args)
    out = Path(args.out or Path("runs") / (cfg.name or "run"))
    try:
        trace = execute_run(cfg, out)
    except DivergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    E = trace.energies
    print(f"wrote {out} ({len(trace)} samples, E: {E[0]:.6e} -> {E[-1]:.6e})")
    return EXIT_OK


# --------------------------------------------------------------------------
# compare


def _identity(path: Path) -> tuple[str, str] | None:
    manifest = path.parent / "manifest.json"
    if not manifest.is_file():
        return None
    meta = json.loads(manifest.read_text())
    return meta.get("equation"), meta.get("kernel")


def compare_traces(paths) -> tuple[list, bool | None]:
    """Fit every trace; returns rows sorted by rate and the ordering verdict.

    The verdict is ``None`` unless the four memory variants are all present.
    It holds when zeroth-order memory with the exponential kernel decays
    fastest and both Laplacian-memory runs decay slower than it.
    """
    rows = []
    for p in paths:
        p = Path(p)
        trace = EnergyTrace.from_csv(p)
        try:
            fit = fit_decay(trace)
        except ValueError as exc:
            raise ValueError(f"{p}: {exc}") from None
        rows.append((fit.rate, fit.r2, str(p), _identity(p)))
    rows.sort(key=lambda r: -r[0])
    ids = {r[3] for r in rows if r[3] is not None}
    if not QUARTET <= ids:
        return rows, None
    rate = {r[3]: r[0] for r in rows if r[3] in QUARTET}
    best = rate[("zeroth", "exponential")]
    verdict = best == max(rate.values()) and all(
        rate[("laplacian", k)] < best for k in ("exponential", "polynomial")
    )
    return rows, verdict


def cmd_compare(args) -> int:
    if not args.traces:
        raise UsageError("give at least one trace CSV")
    try:
        rows, verdict = compare_traces(args.traces)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    print(f"{'rate':>12} {'r2':>8}  trace")
    for rate, r2, path, ident in rows:
        tag = f"  [{ident[0]}/{ident[1]}]" if ident else ""
        print(f"{rate:12.6g} {r2:8.4f}  {path}{tag}")
    if verdict is None:
        return EXIT_OK
    print("expected ordering (zeroth/exponential fastest, laplacian slower): "
          + ("holds" if verdict else "VIOLATED"))
    return EXIT_OK if verdict else EXIT_DOMAIN


# --------------------------------------------------------------------------
# convergence


def cmd_convergence(args) -> int:
    cfg = _load(args)
    conv = cfg.convergence
    if conv.halvings < 3:
        raise UsageError("[convergence] halvings must be >= 3")
    sim = cfg.simulation()
    study = convergence_study(sim, conv.halvings, conv.T, conv.mode, conv.horizon)
    print(study.table())
    return EXIT_OK if study.passed() else EXIT_DOMAIN


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memschrodinger", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_source(p):
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--preset", metavar="NAME", help="one of: " + ", ".join(list_presets()))

    p = sub.add_parser("check-kernel", help="check (H1)-(H3) for the configured kernel")
    add_source(p)
    p.add_argument("--out", metavar="FILE", help="also write the report here")
    p.set_defaults(func=cmd_check_kernel)

    p = sub.add_parser("run", help="simulate and write trace, profile and plot script")
    add_source(p)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--stride", type=int, metavar="INT", help="steps between energy samples")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="fit and rank decay rates of trace CSVs")
    p.add_argument("traces", nargs="*", metavar="TRACE")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("convergence", help="observed order of the time stepper")
    add_source(p)
    p.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
