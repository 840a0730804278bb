"""Simulate two consecutive quantum measurements with the apparatus treated
quantum mechanically, and derive the state each outcome prepares."""

from .chain import (
    ChainResult,
    ChainScenario,
    ConditionUndefined,
    collapse_deviation,
    conditional,
    evolve,
    pr_first,
    pr_joint,
    predict_conditional,
    prepared_state,
    prepared_state_oracle,
    run_chain,
)
from .instruments import (
    Generalized,
    IdealDegenerate,
    IdealNonDegenerate,
    Macroscopic,
    NonIdeal,
    isometry,
    kraus_from_isometry,
    pointer_projector,
    validate,
)
from .linalg import DensityOperator, Operator, Projector, StateVector

__version__ = "0.1.0"
