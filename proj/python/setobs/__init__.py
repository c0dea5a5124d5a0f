"""Set-membership state and unknown-input observer for polytopic LPV systems."""

from ._core import (
    ConvergenceError,
    Error,
    InfeasibleError,
    Model,
    Scenario,
    StructuralError,
    campaign,
    check,
    reference_example,
    run_cli,
    simulate,
    synthesize,
    verify_lmi,
)

__all__ = [
    "ConvergenceError",
    "Error",
    "InfeasibleError",
    "Model",
    "Scenario",
    "StructuralError",
    "campaign",
    "check",
    "reference_example",
    "run_cli",
    "simulate",
    "synthesize",
    "verify_lmi",
]
