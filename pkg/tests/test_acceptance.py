"""Acceptance gate: one PASS/FAIL line per criterion, printed in the summary.

Run with ``pytest tests/test_acceptance.py -v``; the lines appear under
"acceptance criteria" at the end of the session.
"""
import math
import time

import numpy as np
import pytest

from memschrodinger.analysis import (
    calibrate_to_trace,
    check_dissipativity,
    compare_envelope,
    discrete_energy,
    fit_decay,
)
from memschrodinger.config import load_preset
from memschrodinger.convergence import convergence_study
from memschrodinger.kernel import Branch, KernelSpec, check_hypotheses
from memschrodinger.solver import (
    ExponentialMemory,
    SimulationConfig,
    initial_state,
    memory_sum_direct,
    precompute_weights,
    run,
    step,
)
from memschrodinger.spectral import ModalCoefficients, project, reconstruct

from oracles import energy_double_sum, exp_g

QUARTET = ["figure2-exponential", "figure2-polynomial", "figure2-laplacian-exponential",
           "figure2-laplacian-polynomial"]


@pytest.fixture(scope="module")
def quartet():
    traces = {}
    t0 = time.perf_counter()
    for name in QUARTET:
        _, traces[name] = run(load_preset(name).simulation())
    return traces, time.perf_counter() - t0


def test_1_conservation(acceptance_report):
    sim = load_preset("no-memory").simulation()
    assert (sim.K, sim.dt, sim.n_steps, sim.initial.name) == (16, 0.05, 4000, "soliton")
    t0 = time.perf_counter()
    _, trace = run(sim)
    elapsed = time.perf_counter() - t0
    E = trace.energies
    drift = float(np.max(np.abs(E - E[0])) / E[0])
    ok = drift <= 1e-10 and elapsed < 10
    acceptance_report("1 conservation", ok, f"max drift {drift:.2e} (<= 1e-10), {elapsed:.2f} s (< 10 s)")
    assert ok


def test_2_dissipativity(quartet, acceptance_report):
    traces, elapsed = quartet
    results = {name: check_dissipativity(tr, tol=1e-8) for name, tr in traces.items()}
    ok = all(r.passed for r in results.values()) and elapsed < 120
    detail = ", ".join(f"{n.removeprefix('figure2-')} max E ratio {r.worst_ratio:.6f}"
                       for n, r in results.items())
    acceptance_report("2 dissipativity", ok, f"{detail}; quartet {elapsed:.1f} s (< 120 s)")
    assert ok


def test_3_decay_ordering(quartet, acceptance_report):
    traces, _ = quartet
    rate = {name: fit_decay(tr).rate for name, tr in traces.items()}
    best = rate["figure2-exponential"]
    ok = best == max(rate.values()) and all(
        rate[n] < best for n in ("figure2-laplacian-exponential", "figure2-laplacian-polynomial"))
    detail = ", ".join(f"{n.removeprefix('figure2-')} {r:.4g}"
                       for n, r in sorted(rate.items(), key=lambda kv: -kv[1]))
    acceptance_report("3 decay ordering", ok, f"fitted rates {detail}")
    assert ok


def test_4_scheme_order(acceptance_report):
    nomem = convergence_study(load_preset("convergence-no-memory").simulation())
    exp_cfg = load_preset("convergence-exponential").simulation()
    # the default scheme, as used by every other criterion
    default = convergence_study(exp_cfg.with_(quadrature="rectangle"), horizon=40.0)
    trapezoid = convergence_study(exp_cfg.with_(quadrature="trapezoid"), horizon=40.0)
    ok = nomem.passed() and default.passed()
    fmt = lambda s: "[" + ", ".join(f"{o:.3f}" for o in s.orders) + "]"
    acceptance_report(
        "4 scheme order", ok,
        f"no-memory self-convergence orders {fmt(nomem)}; exponential vs RK4 orders {fmt(default)} "
        f"(default rectangle weight); info: trapezoid weight orders {fmt(trapezoid)}")
    assert nomem.passed()
    assert default.passed(), "default scheme is first order with memory; see ledger"


def test_5a_fast_path(rng, acceptance_report):
    cfg = SimulationConfig(equation="zeroth", kernel=KernelSpec.exponential(1e4, 1.0), K=4,
                           dt=0.05, n_steps=1000, n_hist=800)
    w = precompute_weights(cfg)
    hist = rng.normal(size=(801, 4)) + 1j * rng.normal(size=(801, 4))
    state = initial_state(cfg, history=hist)
    fast = ExponentialMemory(cfg.kernel, w, state)
    worst = 0.0
    for _ in range(1000):
        state.B = state.B + rng.normal(size=4) + 1j * rng.normal(size=4)
        step(state, cfg, w, fast)
        ref = memory_sum_direct(state, w)
        worst = max(worst, float(np.max(np.abs(fast.current() - ref) / np.abs(ref))))
    ok = worst <= 1e-9
    acceptance_report("5a fast path vs direct sum", ok, f"max relative difference {worst:.2e} (<= 1e-9)")
    assert ok


def test_5b_energy_oracle(rng, acceptance_report):
    L, dt, N = 1.0, 0.05, 50
    cfg = SimulationConfig(L=L, equation="laplacian", kernel=KernelSpec.exponential(3.0, 1.5), K=3,
                           dt=dt, n_steps=25, n_hist=N)
    w = precompute_weights(cfg)
    state = initial_state(cfg, history=rng.normal(size=(N + 1, 3)) + 1j * rng.normal(size=(N + 1, 3)))
    for _ in range(25):
        step(state, cfg, w)
    E, _ = discrete_energy(state, cfg, w)
    ref = energy_double_sum(state.values.view(), [1, 2, 3], dt, L, exp_g(3.0, 1.5),
                            lambda k: 4 * math.pi**2 * k**2 / L**2)
    rel = abs(E - ref) / ref
    ok = rel <= 1e-12
    acceptance_report("5b energy vs double sum", ok, f"relative difference {rel:.2e} (<= 1e-12)")
    assert ok


def test_5c_round_trip(rng, acceptance_report):
    worst = 0.0
    for K in (1, 4, 16, 64):
        c = ModalCoefficients(rng.normal(size=K) + 1j * rng.normal(size=K))
        back = project(lambda x: reconstruct(c, x), K, Q=4 * K)
        worst = max(worst, float(np.max(np.abs(back.values - c.values))))
    ok = worst <= 1e-10
    acceptance_report("5c projection round trip", ok, f"max error {worst:.2e} (<= 1e-10)")
    assert ok


def test_6_hypotheses(acceptance_report):
    exp = check_hypotheses(KernelSpec.exponential(10000, 1))
    poly = check_hypotheses(KernelSpec.polynomial(10000, 4))
    bad = check_hypotheses(KernelSpec.polynomial(10000, 2.5))
    checks = [
        exp.ok and exp.h3_branch is Branch.EXPONENTIAL and exp.alpha0 == 1 and exp.beta0 == 1,
        poly.ok and poly.h3_branch is Branch.CONVEX and poly.beta0 == 4 and poly.p > 5,
        not bad.ok and bad.h3_branch is Branch.NOT_SATISFIED,
    ]
    ok = all(checks)
    acceptance_report("6 hypothesis checker", ok,
                      f"exp alpha0={exp.alpha0} beta0={exp.beta0}; poly beta0={poly.beta0} p={poly.p:.4g}; "
                      f"q2=2.5 branch={bad.h3_branch.value}")
    assert ok


def test_7_envelope(quartet, acceptance_report):
    traces, _ = quartet
    env, ta = calibrate_to_trace(traces["figure2-exponential"], 1, Branch.EXPONENTIAL)
    ratio = compare_envelope(traces["figure2-exponential"], env, ta)
    env_l, ta_l = calibrate_to_trace(traces["figure2-laplacian-exponential"], 1, Branch.EXPONENTIAL)
    info = compare_envelope(traces["figure2-laplacian-exponential"], env_l, ta_l)
    ok = ratio <= 1.05
    acceptance_report("7 envelope", ok,
                      f"zeroth/exponential max E/envelope {ratio:.4f} after t={ta:g} (<= 1.05); "
                      f"info: laplacian/exponential {info:.4f}")
    assert ok


def test_8_unitarity_and_decoupling(rng, acceptance_report):
    worst_u = 0.0
    for _ in range(1000):
        cfg = SimulationConfig(L=rng.uniform(0.1, 10), a=rng.uniform(0.01, 10), K=8,
                               dt=rng.uniform(1e-4, 1.0), n_steps=1)
        w = precompute_weights(cfg)
        state = initial_state(cfg, history=rng.normal(size=(2, 8)) + 1j * rng.normal(size=(2, 8)))
        before = np.abs(state.B)
        step(state, cfg, w)
        worst_u = max(worst_u, float(np.max(np.abs(np.abs(state.B) - before) / before)))

    worst_d = 0.0
    kernels = [("zeroth", lambda: KernelSpec.exponential(rng.uniform(0.1, 1e4), rng.uniform(0.1, 3))),
               ("laplacian", lambda: KernelSpec.polynomial(rng.uniform(0.1, 1e4), rng.uniform(3.1, 8))),
               ("none", KernelSpec.none)]
    for case in range(1000):
        eq, make = kernels[case % 3]
        N = int(rng.integers(1, 12))
        cfg = SimulationConfig(L=rng.uniform(0.5, 3), equation=eq, kernel=make(), K=8,
                               dt=rng.uniform(1e-3, 0.2), n_steps=5, n_hist=N)
        hist = rng.normal(size=(N + 1, 8)) + 1j * rng.normal(size=(N + 1, 8))
        w = precompute_weights(cfg)
        full = initial_state(cfg, history=hist)
        for _ in range(5):
            step(full, cfg, w)
        for j in range(8):
            alone = initial_state(cfg, ks=[j + 1], history=hist[:, [j]])
            for _ in range(5):
                step(alone, cfg, w)
            scale = max(1.0, abs(full.B[j]))
            worst_d = max(worst_d, abs(alone.B[0] - full.B[j]) / scale)
    ok = worst_u <= 1e-13 and worst_d <= 1e-14
    acceptance_report("8 unitarity / decoupling", ok,
                      f"max |B| change {worst_u:.1e} (<= 1e-13), max mode-split difference "
                      f"{worst_d:.1e} (<= 1e-14), 1000 cases each")
    assert ok
