"""Spectral simulation of Schrodinger equations damped by infinite memory."""
from .kernel import (
    Branch,
    DecayEnvelope,
    HypothesisReport,
    KernelFamily,
    KernelSpec,
    calibrate_envelope,
    check_hypotheses,
    envelope_value,
    eval_f,
    eval_g,
)
from .spectral import InitialHistory, ModalCoefficients, parseval_l2, project, reconstruct, soliton
from .solver import Equation, ModalState, SimulationConfig, initial_state, precompute_weights, run, step
from .analysis import (
    DecayFit,
    DecayModel,
    EnergyTrace,
    check_dissipativity,
    compare_envelope,
    discrete_energy,
    fit_decay,
)

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "DecayEnvelope",
    "HypothesisReport",
    "KernelFamily",
    "KernelSpec",
    "calibrate_envelope",
    "check_hypotheses",
    "envelope_value",
    "eval_f",
    "eval_g",
    "InitialHistory",
    "ModalCoefficients",
    "parseval_l2",
    "project",
    "reconstruct",
    "soliton",
    "Equation",
    "ModalState",
    "SimulationConfig",
    "initial_state",
    "precompute_weights",
    "run",
    "step",
    "DecayFit",
    "DecayModel",
    "EnergyTrace",
    "check_dissipativity",
    "compare_envelope",
    "discrete_energy",
    "fit_decay",
]
