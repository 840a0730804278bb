"""Two consecutive measurements on one system, apparatus included.

The joint space is ``H_S (x) H_A (x) H_B`` (slots 0, 1, 2). Conditional
probabilities are computed from the evolved joint state with the Born rule,
and compared with the trace formula ``Tr[rho_q E_r]`` on the state the
first measurement prepares.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import instruments as inst
from .instruments import InstrumentSpec
from .linalg import (
    TOL,
    DensityOperator,
    DimensionMismatch,
    StateVector,
    born_lifted,
    lift,
    partial_trace,
    trace_distance,
)

#: Below this first-outcome probability a conditional is undefined.
EPS = 1e-12


class ConditionUndefined(ValueError):
    """The conditioning outcome has (numerically) zero probability."""


@dataclass(frozen=True)
class ChainScenario:
    initial_system: StateVector
    first: InstrumentSpec
    second: InstrumentSpec

    def __post_init__(self):
        if len(self.initial_system.dims) != 1:
            raise DimensionMismatch("initial system state must have a single factor")
        d = self.initial_system.dim
        for label, spec in (("first", self.first), ("second", self.second)):
            inst.require_valid(spec)
            if spec.system_dim != d:
                raise DimensionMismatch(
                    f"{label} instrument acts on dimension {spec.system_dim}, system has {d}")

    @property
    def system_dim(self) -> int:
        return self.initial_system.dim

    @property
    def dims(self) -> tuple[int, int, int]:
        return (self.system_dim, self.first.pointer_dim, self.second.pointer_dim)

    @property
    def second_observable_basis(self) -> np.ndarray | None:
        return getattr(self.second, "basis", None)


@dataclass(frozen=True)
class ChainResult:
    scenario: ChainScenario
    joint_final: StateVector
    first_probabilities: np.ndarray = field(repr=False)
    joint_probabilities: np.ndarray = field(repr=False)
    # nan rows where the first outcome did not occur
    conditionals: np.ndarray = field(repr=False)
    prepared_states: dict[int, DensityOperator] = field(repr=False)
    collapse_deviations: dict[int, float | None] = field(repr=False)


def _after_first(scenario: ChainScenario) -> np.ndarray:
    """System-apparatus-A amplitudes after the first interaction, shape (d, pA)."""
    d = scenario.system_dim
    v = inst.isometry(scenario.first)
    return (v @ scenario.initial_system.amplitudes).reshape(d, scenario.first.pointer_dim)


def evolve(scenario: ChainScenario) -> StateVector:
    """Final joint state after both interactions, on slots (S, A, B)."""
    d = scenario.system_dim
    psi1 = _after_first(scenario)
    vb = inst.isometry(scenario.second).reshape(d, scenario.second.pointer_dim, d)
    # second interaction acts on S only, with B starting ready
    psi = np.einsum("sbt,ta->sab", vb, psi1)
    return StateVector.from_unnormalized(scenario.dims, psi.ravel())


def _pr_first(scenario: ChainScenario, psi: StateVector, q: int) -> float:
    pa = inst.pointer_projector(scenario.first, q).matrix
    return born_lifted(psi, {1: pa})


def _pr_joint(scenario: ChainScenario, psi: StateVector, q: int, r: int) -> float:
    pa = inst.pointer_projector(scenario.first, q).matrix
    pb = inst.pointer_projector(scenario.second, r).matrix
    return born_lifted(psi, {1: pa, 2: pb})


def pr_first(result: ChainResult, q: int) -> float:
    return _pr_first(result.scenario, result.joint_final, q)


def pr_joint(result: ChainResult, q: int, r: int) -> float:
    return _pr_joint(result.scenario, result.joint_final, q, r)


def conditional(result: ChainResult, q: int, r: int) -> float:
    """Pr(b_r | a_q) as the quotient of two Born probabilities."""
    denominator = pr_first(result, q)
    if denominator < EPS:
        raise ConditionUndefined(f"Pr(a_{q}) = {denominator:.3e} < {EPS}")
    return pr_joint(result, q, r) / denominator


def _normalized_projection(op: np.ndarray, phi: np.ndarray, q: int) -> DensityOperator:
    """``op|phi><phi|op^dag`` normalized to unit trace."""
    v = op @ phi
    weight = float(np.vdot(v, v).real)
    if weight < EPS:
        raise ConditionUndefined(f"outcome {q} has probability {weight:.3e} < {EPS}")
    rho = np.outer(v, v.conj()) / weight
    return DensityOperator((phi.size,), rho)


def prepared_state(scenario: ChainScenario, q: int) -> DensityOperator:
    """State of the sub-ensemble for which the first instrument read ``q``.

    Written directly from the instrument data, class by class; no joint
    state is formed.
    """
    first = scenario.first
    phi = scenario.initial_system.amplitudes
    weight = float(np.vdot(phi, inst.effect(first, q) @ phi).real)
    if weight < EPS:
        raise ConditionUndefined(f"Pr(a_{q}) = {weight:.3e} < {EPS}")
    d = scenario.system_dim
    if isinstance(first, inst.IdealNonDegenerate):
        b = first.basis[:, q]
        return DensityOperator((d,), np.outer(b, b.conj()))
    if isinstance(first, inst.NonIdeal):
        mu = first.disturbed[:, q]
        return DensityOperator((d,), np.outer(mu, mu.conj()))
    if isinstance(first, inst.IdealDegenerate):
        return _normalized_projection(first.projectors[q], phi, q)
    if isinstance(first, inst.Generalized):
        return _normalized_projection(first.kraus[q], phi, q)
    if isinstance(first, inst.Macroscopic):
        c = first.coefficients(q)
        coeff = c @ c.conj().T  # sum over the microscopic label
        rho = first.basis @ coeff @ first.basis.conj().T
        return DensityOperator((d,), rho / np.trace(rho).real)
    raise TypeError(f"not an instrument: {first!r}")


def prepared_state_oracle(result_or_scenario, q: int) -> DensityOperator:
    """Prepared state recomputed from the joint state after the first step.

    Projects ``|Psi_1><Psi_1|`` with the lifted pointer projector of ``a_q``,
    renormalizes and traces the apparatus out.
    """
    scenario = getattr(result_or_scenario, "scenario", result_or_scenario)
    d, pa = scenario.system_dim, scenario.first.pointer_dim
    psi1 = StateVector.from_unnormalized((d, pa), _after_first(scenario).ravel())
    proj = lift(inst.pointer_projector(scenario.first, q), 1, (d, pa)).matrix
    rho = psi1.density().matrix
    projected = proj @ rho @ proj
    weight = float(np.trace(projected).real)
    if weight < EPS:
        raise ConditionUndefined(f"Pr(a_{q}) = {weight:.3e} < {EPS}")
    projected = (projected + projected.conj().T) / (2 * weight)
    return partial_trace(DensityOperator((d, pa), projected), keep=0)


def predict_conditional(rho: DensityOperator, second: InstrumentSpec, r: int) -> float:
    """Tr[rho E_r] with E_r the second instrument's effect for outcome ``r``."""
    e = inst.effect(second, r)
    if e.shape != rho.matrix.shape:
        raise DimensionMismatch(f"state of dim {rho.dim} vs instrument on {e.shape[0]}")
    value = np.trace(rho.matrix @ e)
    if abs(value.imag) > TOL:
        raise ValueError(f"trace formula has imaginary part {value.imag:.3e}")
    return float(min(max(value.real, 0.0), 1.0))


def collapse_reference(scenario: ChainScenario, q: int) -> DensityOperator | None:
    """What the collapse postulate would prepare, or None for a bare Kraus set."""
    proj = inst.collapse_projector(scenario.first, q)
    if proj is None:
        return None
    return _normalized_projection(proj, scenario.initial_system.amplitudes, q)


def collapse_deviation(scenario: ChainScenario, q: int) -> float | None:
    """Trace distance between the prepared state and the collapse prediction.

    Returns None for generalized instruments: without an eigenbasis there is
    no canonical collapse reference.
    """
    prepared = prepared_state(scenario, q)
    reference = collapse_reference(scenario, q)
    if reference is None:
        return None
    return trace_distance(prepared, reference)


def run_chain(scenario: ChainScenario) -> ChainResult:
    psi = evolve(scenario)
    n_a, n_b = scenario.first.n_outcomes, scenario.second.n_outcomes
    first = np.array([_pr_first(scenario, psi, q) for q in range(n_a)])
    joint = np.array([[_pr_joint(scenario, psi, q, r) for r in range(n_b)] for q in range(n_a)])
    cond = np.full((n_a, n_b), np.nan)
    prepared: dict[int, DensityOperator] = {}
    deviations: dict[int, float | None] = {}
    for q in range(n_a):
        if first[q] < EPS:
            continue
        cond[q] = joint[q] / first[q]
        prepared[q] = prepared_state(scenario, q)
        deviations[q] = collapse_deviation(scenario, q)
    for arr in (first, joint, cond):
        arr.setflags(write=False)
    return ChainResult(scenario, psi, first, joint, cond, prepared, deviations)
