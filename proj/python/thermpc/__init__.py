"""Thermal MPC for multi-zone buildings: models, QP solver, closed-loop runs."""

from ._core import (
    Error,
    InputError,
    Model,
    NumericalError,
    build_model,
    compare_scenario,
    model_from_json,
    set_quiet,
    simulate_scenario,
    solve_qp,
)

__all__ = [
    "Error",
    "InputError",
    "Model",
    "NumericalError",
    "build_model",
    "compare_scenario",
    "model_from_json",
    "set_quiet",
    "simulate_scenario",
    "solve_qp",
]
