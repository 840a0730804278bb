"""Dense complex linear algebra on small tensor-product Hilbert spaces.

Index convention used everywhere in the package: the left tensor factor is
the most significant one, so a composite basis index is
``sum_i idx_i * prod_{j > i} dims_j`` (the same ordering as ``np.kron`` and
C-order reshapes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import prod
from typing import Mapping, Sequence

import numpy as np

#: Tolerance for structural invariants (norms, hermiticity, idempotence).
TOL = 1e-10
#: Tolerance for equality of probabilities computed by different routes.
PROB_TOL = 1e-9


class DimensionMismatch(ValueError):
    pass


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


def _check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"factor dimensions must be >= 1, got {dims}")
    return dims


@dataclass(frozen=True)
class StateVector:
    """Normalized ket over a tensor-product basis."""

    dims: tuple[int, ...]
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.size != prod(dims):
            raise DimensionMismatch(
                f"{amps.size} amplitudes for dims {dims} (need {prod(dims)})")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"state is not normalized: |psi| = {norm!r}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def from_unnormalized(cls, dims, amplitudes) -> "StateVector":
        amps = np.asarray(amplitudes, dtype=complex).ravel()
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(dims, amps / norm)

    @classmethod
    def basis(cls, dims, index: int) -> "StateVector":
        dims = _check_dims(np.atleast_1d(dims))
        amps = np.zeros(prod(dims), dtype=complex)
        amps[index] = 1.0
        return cls(dims, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per factor."""
        return self.amplitudes.reshape(self.dims)

    def density(self) -> "DensityOperator":
        return DensityOperator(self.dims, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True)
class Operator:
    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(self.dims)
        mat = _frozen(self.matrix)
        side = prod(dims)
        if mat.shape != (side, side):
            raise DimensionMismatch(f"matrix shape {mat.shape} does not match dims {dims}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def identity(cls, dims) -> "Operator":
        dims = _check_dims(np.atleast_1d(dims))
        return cls(dims, np.eye(prod(dims)))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __matmul__(self, other: "Operator") -> "Operator":
        if self.dims != other.dims:
            raise DimensionMismatch(f"{self.dims} @ {other.dims}")
        return Operator(self.dims, self.matrix @ other.matrix)

    def apply(self, state: StateVector) -> np.ndarray:
        if state.dims != self.dims:
            raise DimensionMismatch(f"operator dims {self.dims} vs state dims {state.dims}")
        return self.matrix @ state.amplitudes


@dataclass(frozen=True)
class Projector(Operator):
    """Hermitian idempotent operator."""

    def __post_init__(self):
        super().__post_init__()
        p = self.matrix
        herm = np.linalg.norm(p - p.conj().T)
        idem = np.linalg.norm(p @ p - p)
        if herm > TOL or idem > TOL:
            raise ValueError(
                f"not a projector: |P - P^dag| = {herm:.3e}, |P^2 - P| = {idem:.3e}")

    @classmethod
    def onto(cls, vectors, dims=None) -> "Projector":
        """Projector onto the span of orthonormal column vectors."""
        vecs = np.asarray(vectors, dtype=complex)
        if vecs.ndim == 1:
            vecs = vecs[:, None]
        dims = (vecs.shape[0],) if dims is None else dims
        return cls(dims, vecs @ vecs.conj().T)

    @property
    def rank(self) -> int:
        return int(round(np.trace(self.matrix).real))


@dataclass(frozen=True)
class DensityOperator:
    """Hermitian, positive semidefinite, unit-trace operator."""

    dims: tuple[int, ...]
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        dims = _check_dims(np.atleast_1d(self.dims))
        rho = _frozen(self.matrix)
        side = prod(dims)
        if rho.shape != (side, side):
            raise DimensionMismatch(f"matrix shape {rho.shape} does not match dims {dims}")
        herm = np.linalg.norm(rho - rho.conj().T)
        if herm > TOL:
            raise ValueError(f"density operator not Hermitian: residual {herm:.3e}")
        tr = np.trace(rho)
        if abs(tr - 1.0) > TOL:
            raise ValueError(f"density operator trace is {tr!r}, expected 1")
        lowest = np.linalg.eigvalsh((rho + rho.conj().T) / 2)[0]
        if lowest < -TOL:
            raise ValueError(f"density operator has negative eigenvalue {lowest:.3e}")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "matrix", rho)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def tensor_state(a: StateVector, b: StateVector) -> StateVector:
    return StateVector(a.dims + b.dims, np.kron(a.amplitudes, b.amplitudes))


def tensor_op(a: Operator, b: Operator) -> Operator:
    return Operator(a.dims + b.dims, np.kron(a.matrix, b.matrix))


def lift(op: Operator, slot: int, dims: Sequence[int]) -> Operator:
    """Embed ``op`` at position ``slot`` of the product space with factor ``dims``.

    Identities fill every other slot, so lifts at distinct slots commute.
    """
    dims = _check_dims(dims)
    if not 0 <= slot < len(dims):
        raise IndexError(f"slot {slot} out of range for {len(dims)} factors")
    if op.dim != dims[slot]:
        raise DimensionMismatch(f"operator of dim {op.dim} placed in slot of dim {dims[slot]}")
    left = np.eye(prod(dims[:slot]))
    right = np.eye(prod(dims[slot + 1:]))
    matrix = np.kron(np.kron(left, op.matrix), right)
    cls = Projector if isinstance(op, Projector) else Operator
    return cls(dims, matrix)


def _real_probability(value: complex) -> float:
    if abs(value.imag) > TOL:
        raise ValueError(f"Born expectation has imaginary part {value.imag:.3e}")
    p = value.real
    if p < -1e-12 or p > 1 + 1e-12:
        raise ValueError(f"Born probability {p!r} outside [0, 1]")
    return min(max(p, 0.0), 1.0)


def born(state: StateVector, p: Operator) -> float:
    """Born probability <psi|P|psi>, clamped to [0, 1]."""
    if state.dim != p.dim:
        raise DimensionMismatch(f"state of dim {state.dim} vs projector of dim {p.dim}")
    psi = state.amplitudes
    return _real_probability(np.vdot(psi, p.matrix @ psi))


def born_lifted(state: StateVector, local: Mapping[int, np.ndarray]) -> float:
    """Born probability of a product of lifted local projectors.

    Equivalent to ``born(state, lift(P_i, i) @ lift(P_j, j) @ ...)`` for the
    slot-indexed matrices in ``local``, but contracts each factor in place
    instead of materializing the full operator.
    """
    psi = state.tensor()
    out = psi
    for slot, mat in local.items():
        mat = np.asarray(mat)
        if not 0 <= slot < len(state.dims):
            raise IndexError(f"slot {slot} out of range for {len(state.dims)} factors")
        if mat.shape != (state.dims[slot], state.dims[slot]):
            raise DimensionMismatch(f"slot {slot}: matrix {mat.shape} vs dim {state.dims[slot]}")
        out = np.moveaxis(np.tensordot(mat, out, axes=([1], [slot])), 0, slot)
    return _real_probability(np.vdot(psi, out))


def partial_trace(rho: DensityOperator, keep: int) -> DensityOperator:
    """Trace out every factor except ``keep``."""
    dims = rho.dims
    n = len(dims)
    if not 0 <= keep < n:
        raise IndexError(f"slot {keep} out of range for {n} factors")
    t = rho.matrix.reshape(dims + dims)
    # ket axes 0..n-1, bra axes n..2n-1
    letters = "abcdefghijklmnopqrstuvwxyz"
    ket = list(letters[:n])
    bra = list(letters[:n])
    bra[keep] = letters[n]
    spec = "".join(ket) + "".join(bra) + "->" + ket[keep] + bra[keep]
    reduced = np.einsum(spec, t)
    return DensityOperator((dims[keep],), reduced)


def is_isometry(v) -> tuple[bool, float]:
    """Return ``(passed, |V^dag V - I|_F)`` at tolerance ``TOL``."""
    v = np.asarray(v, dtype=complex)
    if v.ndim != 2 or v.shape[0] < v.shape[1]:
        raise ValueError(f"expected a tall matrix, got shape {v.shape}")
    residual = float(np.linalg.norm(v.conj().T @ v - np.eye(v.shape[1])))
    return residual <= TOL, residual


def trace_distance(rho: DensityOperator | np.ndarray, sigma: DensityOperator | np.ndarray) -> float:
    """Half the trace norm of ``rho - sigma``."""
    a = getattr(rho, "matrix", rho)
    b = getattr(sigma, "matrix", sigma)
    diff = a - b
    diff = (diff + diff.conj().T) / 2
    return float(0.5 * np.abs(np.linalg.eigvalsh(diff)).sum())
