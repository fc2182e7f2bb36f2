import json

import numpy as np
import pytest

from memschrodinger.analysis import EnergyTrace
from memschrodinger.cli import compare_traces, main
from memschrodinger.config import ConfigError, list_presets, load_config, load_preset, loads_config
from memschrodinger.kernel import KernelFamily
from memschrodinger.solver import Equation

SMALL = """
[domain]
K = 4
[kernel]
variant = exponential
amplitude = 100
rate = 1
[scheme]
equation = zeroth
dt = 0.05
n_steps = {n}
[initial]
profile = soliton
[output]
energy_stride = 10
nx = 32
"""


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return p


# --- config --------------------------------------------------------------------


def test_presets_available():
    names = list_presets()
    for expected in ("figure2-exponential", "figure2-polynomial", "figure2-laplacian-exponential",
                     "figure2-laplacian-polynomial", "no-memory", "full-scale",
                     "convergence-no-memory", "convergence-exponential"):
        assert expected in names
    for name in names:
        load_preset(name).simulation()


def test_preset_contents():
    sim = load_preset("figure2-exponential").simulation()
    assert sim.equation is Equation.ZEROTH and sim.kernel.family is KernelFamily.EXPONENTIAL
    assert (sim.K, sim.dt, sim.n_steps, sim.kernel.amplitude) == (16, 0.05, 4000, 10000.0)


def test_config_round_trip():
    cfg = load_preset("figure2-laplacian-polynomial")
    again = loads_config(cfg.dumps(), name=cfg.name)
    assert again == cfg
    a, b = again.simulation(), cfg.simulation()
    assert a.with_(initial=b.initial) == b
    assert a.initial.params == b.initial.params


@pytest.mark.parametrize("text,match", [
    ("[domain]\nK = 2.5\n", "int"),
    ("[domain]\nbogus = 1\n", "unknown key"),
    ("[nonsense]\n", "unknown section"),
    ("no section header\n", "malformed"),
    ("[scheme]\nequation = quartic\n", "quartic"),
    ("[kernel]\nvariant = exponential\namplitude = -1\nrate = 1\n[scheme]\nequation = zeroth\n", "kernel"),
])
def test_bad_configs(text, match):
    with pytest.raises(ConfigError, match=match):
        loads_config(text).simulation()


def test_csv_profile_relative_to_config(tmp_path):
    (tmp_path / "y0.csv").write_text("x,re,im\n0,0,0\n0.5,1,0\n1,0,0\n")
    p = write(tmp_path, "[initial]\nprofile = csv\npath = y0.csv\n[domain]\nK = 2\n")
    hist = load_config(p).simulation().initial
    assert hist.profile(0.25) == pytest.approx(0.5)


# --- check-kernel ------------------------------------------------------------


def test_check_kernel_exponential(capsys, tmp_path):
    out = tmp_path / "report.txt"
    assert main(["check-kernel", "--preset", "figure2-exponential", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "branch=exponential alpha0=1.0" in text
    assert out.read_text().strip() == text.strip()


def test_check_kernel_polynomial_q2(capsys, tmp_path):
    p = write(tmp_path, "[kernel]\nvariant = polynomial\namplitude = 1\nrate = 2\n"
                        "[scheme]\nequation = zeroth\n")
    assert main(["check-kernel", "--config", str(p)]) == 1
    assert "H3 requires q2>3" in capsys.readouterr().out


def test_check_kernel_none(capsys):
    assert main(["check-kernel", "--preset", "no-memory"]) == 0
    assert "g0=0: conservative" in capsys.readouterr().out


def test_check_kernel_usage_errors(capsys, tmp_path):
    p = write(tmp_path, "[domain\nK=1\n")
    assert main(["check-kernel", "--config", str(p)]) == 2
    assert main(["check-kernel"]) == 2
    assert main(["check-kernel", "--preset", "nope"]) == 2
    assert main(["check-kernel", "--config", str(tmp_path / "missing.ini")]) == 2


# --- run -----------------------------------------------------------------------


def test_run_writes_artifacts_deterministically(tmp_path):
    cfg = write(tmp_path, SMALL.format(n=200))
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["run", "--config", str(cfg), "--out", str(b)]) == 0
    for name in ("trace.csv", "final_state.csv", "spacetime.dat", "plot.gp", "hypothesis.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
    assert (a / "final_state.csv").read_text().splitlines()[0] == "x,re_y,im_y,abs_y"
    trace = EnergyTrace.from_csv(a / "trace.csv")
    assert len(trace) == 21
    meta = json.loads((a / "manifest.json").read_text())
    assert meta["equation"] == "zeroth" and meta["kernel"] == "exponential"


def test_run_replaces_existing_output(tmp_path):
    cfg = write(tmp_path, SMALL.format(n=20))
    out = tmp_path / "out"
    out.mkdir()
    (out / "stale.txt").write_text("old")
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert not (out / "stale.txt").exists()


def test_run_zero_steps(tmp_path):
    cfg = write(tmp_path, SMALL.format(n=0))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    lines = (tmp_path / "o" / "trace.csv").read_text().splitlines()
    assert len(lines) == 2 and lines[1].startswith("0,")


def test_run_stride_flag(tmp_path):
    cfg = write(tmp_path, SMALL.format(n=40))
    assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--stride", "20"]) == 0
    assert len(EnergyTrace.from_csv(tmp_path / "o" / "trace.csv")) == 3
    assert main(["run", "--config", str(cfg), "--stride", "0"]) == 2


def test_run_rejects_failing_kernel(tmp_path, capsys):
    p = write(tmp_path, "[kernel]\nvariant = polynomial\namplitude = 1\nrate = 2.5\n"
                        "[scheme]\nequation = zeroth\nn_steps = 5\n[domain]\nK = 2\n")
    assert main(["run", "--config", str(p), "--out", str(tmp_path / "o")]) == 1
    assert not (tmp_path / "o").exists()


def test_no_memory_preset_conserves_energy(tmp_path):
    assert main(["run", "--preset", "no-memory", "--out", str(tmp_path / "nm")]) == 0
    E = EnergyTrace.from_csv(tmp_path / "nm" / "trace.csv").energies
    assert np.max(np.abs(E - E[0])) / E[0] <= 1e-10


# --- compare -------------------------------------------------------------------


def synthetic(tmp_path, name, rate):
    t = np.linspace(0, 10, 101)
    path = tmp_path / f"{name}.csv"
    EnergyTrace.from_arrays(t, np.exp(-rate * t), np.ones_like(t)).to_csv(path)
    return path


def test_compare_ranks_rates(tmp_path, capsys):
    slow, fast = synthetic(tmp_path, "slow", 1.0), synthetic(tmp_path, "fast", 2.0)
    rows, verdict = compare_traces([slow, fast])
    assert [round(r[0], 10) for r in rows] == [2.0, 1.0]
    assert verdict is None
    assert main(["compare", str(slow), str(fast)]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1].endswith("fast.csv") and out[2].endswith("slow.csv")


def test_compare_single_trace(tmp_path):
    assert main(["compare", str(synthetic(tmp_path, "one", 0.5))]) == 0


def test_compare_nonpositive_energy_names_file(tmp_path, capsys):
    t = np.linspace(0, 10, 101)
    E = np.exp(-t)
    E[-1] = 0.0
    bad = tmp_path / "bad.csv"
    EnergyTrace.from_arrays(t, E).to_csv(bad)
    assert main(["compare", str(bad)]) == 1
    assert "bad.csv" in capsys.readouterr().err


def test_compare_needs_traces():
    assert main(["compare"]) == 2


def _fake_run(tmp_path, equation, kernel, rate):
    d = tmp_path / f"{equation}-{kernel}"
    d.mkdir()
    synthetic(d, "trace", rate).rename(d / "trace.csv")
    (d / "manifest.json").write_text(json.dumps({"equation": equation, "kernel": kernel}))
    return d / "trace.csv"


def test_compare_quartet_verdict(tmp_path, capsys):
    rates = {("zeroth", "exponential"): 3.0, ("zeroth", "polynomial"): 1.0,
             ("laplacian", "exponential"): 2.0, ("laplacian", "polynomial"): 0.5}
    paths = [_fake_run(tmp_path, e, k, r) for (e, k), r in rates.items()]
    assert main(["compare", *map(str, paths)]) == 0
    assert "holds" in capsys.readouterr().out

    other = tmp_path / "swap"
    other.mkdir()
    rates[("laplacian", "exponential")] = 4.0
    paths = [_fake_run(other, e, k, r) for (e, k), r in rates.items()]
    assert main(["compare", *map(str, paths)]) == 1
    assert "VIOLATED" in capsys.readouterr().out


# --- convergence -----------------------------------------------------------------


def test_convergence_no_memory(capsys):
    assert main(["convergence", "--preset", "convergence-no-memory"]) == 0
    assert "observed order" in capsys.readouterr().out


def test_convergence_too_few_halvings(tmp_path):
    p = write(tmp_path, "[domain]\nK = 1\n[convergence]\nhalvings = 2\n")
    assert main(["convergence", "--config", str(p)]) == 2
