"""Measuring instruments and the system-apparatus maps they induce.

Every instrument is turned into an isometry ``V: H_S -> H_S (x) H_P``: the
restriction of the measurement unitary to the apparatus ready state. The
full unitary completion never influences a computed probability, so it is
not built.

Pointer layout (index into ``H_P``):

* ideal, degenerate, non-ideal: ``0`` is the ready state, outcome ``q`` sits
  at ``q + 1``;
* generalized: outcome ``m`` sits at ``m``; outcome ``0`` doubles as the
  ready state;
* macroscopic: pointer label ``a`` (``0`` = ready, ``q + 1`` = outcome ``q``)
  times ``mu`` microscopic labels, index ``a * mu + m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .linalg import TOL, Projector, is_isometry


class InvalidInstrument(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__(f"{report.kind} instrument failed validation: "
                         + "; ".join(c.describe() for c in report.failures))


class UnknownOutcome(KeyError):
    pass


def _cmatrix(a) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _basis_or_identity(basis, d: int) -> np.ndarray:
    return _cmatrix(np.eye(d) if basis is None else basis)


@dataclass(frozen=True)
class IdealNonDegenerate:
    """Ideal measurement in an orthonormal basis (columns of ``basis``)."""

    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "basis", _cmatrix(self.basis))

    @classmethod
    def computational(cls, d: int) -> "IdealNonDegenerate":
        return cls(np.eye(d))

    @property
    def system_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.basis.shape[1]

    @property
    def pointer_dim(self) -> int:
        return self.n_outcomes + 1


@dataclass(frozen=True)
class IdealDegenerate:
    """Ideal measurement of an observable with eigenprojectors ``projectors``."""

    projectors: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "projectors", tuple(_cmatrix(p) for p in self.projectors))

    @classmethod
    def from_partition(cls, basis, blocks) -> "IdealDegenerate":
        """Eigenprojectors from groups of basis column indices."""
        basis = np.asarray(basis, dtype=complex)
        return cls(tuple(basis[:, list(b)] @ basis[:, list(b)].conj().T for b in blocks))

    @property
    def system_dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def n_outcomes(self) -> int:
        return len(self.projectors)

    @property
    def pointer_dim(self) -> int:
        return self.n_outcomes + 1

    @property
    def degeneracies(self) -> tuple[int, ...]:
        return tuple(int(round(np.trace(p).real)) for p in self.projectors)


@dataclass(frozen=True)
class NonIdeal:
    """Faithful pointer, disturbed system: ``|q>|a_0> -> |mu_q>|a_q>``."""

    basis: np.ndarray = field(repr=False)
    disturbed: np.ndarray = field(repr=False)  # column q is |mu_q>

    def __post_init__(self):
        object.__setattr__(self, "basis", _cmatrix(self.basis))
        object.__setattr__(self, "disturbed", _cmatrix(self.disturbed))

    @property
    def system_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def n_outcomes(self) -> int:
        return self.basis.shape[1]

    @property
    def pointer_dim(self) -> int:
        return self.n_outcomes + 1


@dataclass(frozen=True)
class Generalized:
    """Measurement given by a Kraus set ``{M_m}``."""

    kraus: tuple[np.ndarray, ...] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "kraus", tuple(_cmatrix(m) for m in self.kraus))

    @property
    def system_dim(self) -> int:
        return self.kraus[0].shape[1]

    @property
    def n_outcomes(self) -> int:
        return len(self.kraus)

    @property
    def pointer_dim(self) -> int:
        return self.n_outcomes


@dataclass(frozen=True)
class Macroscopic:
    """Pointer with ``mu`` hidden microscopic labels.

    ``u[q, m, q2, m2]`` is the amplitude of ``|q2>|a_q, m2>`` in the image of
    ``|q>|a_0, m>``; only the ``m = m0`` slice is ever used.
    """

    u: np.ndarray = field(repr=False)
    m0: int = 0
    basis: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        u = _cmatrix(self.u)
        if u.ndim != 4 or u.shape[0] != u.shape[2] or u.shape[1] != u.shape[3]:
            raise ValueError(f"u must have shape (d, mu, d, mu), got {u.shape}")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "basis", _basis_or_identity(self.basis, u.shape[0]))

    @property
    def system_dim(self) -> int:
        return self.u.shape[0]

    @property
    def micro_dim(self) -> int:
        return self.u.shape[1]

    @property
    def n_outcomes(self) -> int:
        return self.system_dim

    @property
    def pointer_dim(self) -> int:
        return (self.n_outcomes + 1) * self.micro_dim

    def coefficients(self, q: int) -> np.ndarray:
        """The ``d x mu`` block ``u[q, m0]`` (rows q', columns m')."""
        return self.u[q, self.m0]


InstrumentSpec = Union[IdealNonDegenerate, IdealDegenerate, NonIdeal, Generalized, Macroscopic]

KIND = {
    IdealNonDegenerate: "ideal",
    IdealDegenerate: "ideal_degenerate",
    NonIdeal: "non_ideal",
    Generalized: "generalized",
    Macroscopic: "macroscopic",
}


def kind(spec: InstrumentSpec) -> str:
    return KIND[type(spec)]


def is_projective(spec: InstrumentSpec) -> bool:
    return not isinstance(spec, Generalized)


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    passed: bool

    def describe(self) -> str:
        return f"{self.name} (residual {self.residual:.3e})"


@dataclass(frozen=True)
class ValidationReport:
    kind: str
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> tuple[Check, ...]:
        return tuple(c for c in self.checks if not c.passed)


def _check(name: str, residual: float, tol: float = TOL) -> Check:
    residual = float(residual)
    return Check(name, residual, bool(np.isfinite(residual) and residual <= tol))


def _shape_check(name: str, ok: bool) -> Check:
    return Check(name, 0.0 if ok else float("inf"), ok)


def _orthonormal_columns(basis: np.ndarray) -> list[Check]:
    d, k = basis.shape if basis.ndim == 2 else (0, 0)
    if basis.ndim != 2 or d != k:
        return [_shape_check("basis is square", False)]
    return [_check("basis orthonormal", np.linalg.norm(basis.conj().T @ basis - np.eye(d)))]


def validate(spec: InstrumentSpec) -> ValidationReport:
    """Check the physical invariants of ``spec``; never raises."""
    checks: list[Check] = []
    if isinstance(spec, (IdealNonDegenerate, NonIdeal)):
        checks += _orthonormal_columns(spec.basis)
        if isinstance(spec, NonIdeal):
            mu = spec.disturbed
            ok = mu.ndim == 2 and mu.shape == spec.basis.shape
            checks.append(_shape_check("one disturbed state per outcome", ok))
            if ok:
                norms = np.linalg.norm(mu, axis=0)
                checks.append(_check("disturbed states normalized", np.max(np.abs(norms - 1))))
    elif isinstance(spec, IdealDegenerate):
        ps = spec.projectors
        d = ps[0].shape[0] if ps else 0
        ok = bool(ps) and all(p.shape == (d, d) for p in ps)
        checks.append(_shape_check("projector shapes", ok))
        if ok:
            herm = max(np.linalg.norm(p - p.conj().T) for p in ps)
            idem = max(np.linalg.norm(p @ p - p) for p in ps)
            cross = max((np.linalg.norm(a @ b) for i, a in enumerate(ps)
                         for j, b in enumerate(ps) if i != j), default=0.0)
            checks += [
                _check("projectors Hermitian", herm),
                _check("projectors idempotent", idem),
                _check("projectors mutually orthogonal", cross),
                _check("projectors resolve identity", np.linalg.norm(sum(ps) - np.eye(d))),
                _shape_check("no zero eigenprojector", min(spec.degeneracies) >= 1),
            ]
    elif isinstance(spec, Generalized):
        ks = spec.kraus
        d = ks[0].shape[1] if ks else 0
        ok = bool(ks) and all(m.shape == (d, d) for m in ks)
        checks.append(_shape_check("Kraus shapes", ok))
        if ok:
            total = sum(m.conj().T @ m for m in ks)
            checks.append(_check("Kraus completeness", np.linalg.norm(total - np.eye(d))))
    elif isinstance(spec, Macroscopic):
        checks += _orthonormal_columns(spec.basis)
        checks.append(_shape_check("basis matches u", spec.basis.shape[0] == spec.system_dim))
        checks.append(_shape_check("m0 in range", 0 <= spec.m0 < spec.micro_dim))
        if checks[-1].passed:
            norms = np.array([np.linalg.norm(spec.coefficients(q)) for q in range(spec.system_dim)])
            checks.append(_check("images normalized", np.max(np.abs(norms - 1))))
    else:
        raise TypeError(f"not an instrument: {spec!r}")
    return ValidationReport(kind(spec), tuple(checks))


def require_valid(spec: InstrumentSpec) -> None:
    report = validate(spec)
    if not report.passed:
        raise InvalidInstrument(report)


def _check_outcome(spec: InstrumentSpec, outcome: int) -> int:
    if not isinstance(outcome, (int, np.integer)) or not 0 <= outcome < spec.n_outcomes:
        raise UnknownOutcome(f"{kind(spec)} instrument has no outcome {outcome!r}")
    return int(outcome)


def isometry(spec: InstrumentSpec) -> np.ndarray:
    """Matrix of the map ``|phi> -> U(|phi> (x) |ready>)``, shape ``(d*p, d)``."""
    require_valid(spec)
    d, p = spec.system_dim, spec.pointer_dim
    v = np.zeros((d, p, d), dtype=complex)  # [system out, pointer, system in]
    if isinstance(spec, IdealNonDegenerate):
        for q in range(spec.n_outcomes):
            b = spec.basis[:, q]
            v[:, q + 1, :] = np.outer(b, b.conj())
    elif isinstance(spec, NonIdeal):
        for q in range(spec.n_outcomes):
            v[:, q + 1, :] = np.outer(spec.disturbed[:, q], spec.basis[:, q].conj())
    elif isinstance(spec, IdealDegenerate):
        for q, proj in enumerate(spec.projectors):
            v[:, q + 1, :] = proj
    elif isinstance(spec, Generalized):
        for m, k in enumerate(spec.kraus):
            v[:, m, :] = k
    elif isinstance(spec, Macroscopic):
        mu = spec.micro_dim
        for q in range(spec.n_outcomes):
            image = spec.basis @ spec.coefficients(q)  # column m' is sum_q' u |q'>
            a = q + 1
            v[:, a * mu:(a + 1) * mu, :] = np.einsum("sm,t->smt", image, spec.basis[:, q].conj())
    return v.reshape(d * p, d)


def kraus_from_isometry(v, pointer_dim: int) -> list[np.ndarray]:
    """Measurement operators ``M_m = (I (x) <m|) V``, one per pointer basis state."""
    v = np.asarray(v, dtype=complex)
    ok, residual = is_isometry(v)
    if not ok:
        raise ValueError(f"map is not an isometry (residual {residual:.3e})")
    d = v.shape[1]
    if v.shape[0] != d * pointer_dim:
        raise ValueError(f"isometry of shape {v.shape} incompatible with pointer_dim {pointer_dim}")
    blocks = v.reshape(d, pointer_dim, d)
    return [blocks[:, m, :].copy() for m in range(pointer_dim)]


def pointer_indices(spec: InstrumentSpec, outcome: int) -> list[int]:
    """Pointer basis indices that register ``outcome``."""
    outcome = _check_outcome(spec, outcome)
    if isinstance(spec, Generalized):
        return [outcome]
    if isinstance(spec, Macroscopic):
        mu = spec.micro_dim
        return list(range((outcome + 1) * mu, (outcome + 2) * mu))
    return [outcome + 1]


def ready_indices(spec: InstrumentSpec) -> list[int]:
    if isinstance(spec, Generalized):
        return []
    if isinstance(spec, Macroscopic):
        return list(range(spec.micro_dim))
    return [0]


def pointer_projector(spec: InstrumentSpec, outcome: int) -> Projector:
    """Projector on ``H_P`` for ``outcome`` (coarse over microscopic labels)."""
    diag = np.zeros(spec.pointer_dim)
    diag[pointer_indices(spec, outcome)] = 1.0
    return Projector((spec.pointer_dim,), np.diag(diag))


def effect(spec: InstrumentSpec, outcome: int) -> np.ndarray:
    """POVM element of ``outcome`` on the system, written from the instrument data.

    Eigenprojector for ideal and degenerate instruments; ``|q><q|`` for the
    non-ideal and macroscopic classes, whose pointers register the initial
    eigenvalue faithfully; ``M^dag M`` for a Kraus set.
    """
    outcome = _check_outcome(spec, outcome)
    if isinstance(spec, IdealDegenerate):
        return np.array(spec.projectors[outcome])
    if isinstance(spec, Generalized):
        m = spec.kraus[outcome]
        return m.conj().T @ m
    b = spec.basis[:, outcome]
    return np.outer(b, b.conj())


def collapse_projector(spec: InstrumentSpec, outcome: int) -> np.ndarray | None:
    """Projector onto the measured eigenspace, or None without an eigenbasis."""
    if isinstance(spec, Generalized):
        _check_outcome(spec, outcome)
        return None
    return effect(spec, outcome)
