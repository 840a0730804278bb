"""Propositions about commuting observables within one fixed eigenbasis.

A proposition is a set of value tuples ``(r_1, ..., r_n)``; its projector is
diagonal in the simultaneous eigenbasis. Lattice operations act on the sets,
so the Boolean algebra is exact. ``meet_limit`` and ``join_limit`` give the
general alternating-projection formulas for arbitrary projector pairs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.linalg import orth

from .linalg import TOL, DimensionMismatch, Projector, StateVector

#: Below this probability a proposition cannot be conditioned on.
EPS = 1e-12


#: Principal-angle cosine above which ``meet_limit`` may exhaust its default
#: cap: the increment decays like cos^(2k), and cos^20000 * (1 - cos^2) only
#: falls below 1e-12 within 10000 steps for cos below roughly 0.9989.
NEAR_PARALLEL = 0.998


class ConditionUndefined(ValueError):
    pass


class NotConverged(RuntimeError):
    pass


@dataclass(frozen=True)
class OutcomeBasis:
    """Simultaneous eigenbasis of ``n`` commuting observables.

    Basis vectors are the value tuples in lexicographic order of the value
    lists, leftmost observable most significant.
    """

    values: tuple[tuple, ...]
    tuples: tuple[tuple, ...] = field(init=False, repr=False, compare=False)
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        values = tuple(tuple(v) for v in self.values)
        if not values:
            raise ValueError("need at least one observable")
        for i, vs in enumerate(values):
            if not vs:
                raise ValueError(f"observable {i} has no values")
            if len(set(vs)) != len(vs):
                raise ValueError(f"observable {i} has duplicate values {vs}")
        tuples = tuple(itertools.product(*values))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "tuples", tuples)
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(tuples)})

    @classmethod
    def from_sizes(cls, *sizes: int) -> "OutcomeBasis":
        return cls(tuple(tuple(range(n)) for n in sizes))

    @property
    def dim(self) -> int:
        return len(self.tuples)

    def index(self, t: tuple) -> int:
        return self._index[tuple(t)]

    def proposition(self, support: Iterable[tuple]) -> "Proposition":
        return Proposition(self, frozenset(tuple(t) for t in support))

    def where(self, observable: int, allowed: Iterable) -> "Proposition":
        """The proposition "observable ``observable`` takes a value in ``allowed``"."""
        allowed = set(allowed)
        return self.proposition(t for t in self.tuples if t[observable] in allowed)

    def unit(self) -> "Proposition":
        return self.proposition(self.tuples)

    def empty(self) -> "Proposition":
        return self.proposition(())

    def all_propositions(self) -> list["Proposition"]:
        n = self.dim
        return [self.proposition(t for i, t in enumerate(self.tuples) if mask >> i & 1)
                for mask in range(2 ** n)]


@dataclass(frozen=True)
class Proposition:
    basis: OutcomeBasis
    support: frozenset

    def __post_init__(self):
        unknown = [t for t in self.support if t not in self.basis._index]
        if unknown:
            raise ValueError(f"tuples not in basis: {sorted(unknown)[:3]}")

    def indices(self) -> list[int]:
        return sorted(self.basis.index(t) for t in self.support)

    def __le__(self, other: "Proposition") -> bool:
        _same_basis(self, other)
        return self.support <= other.support


def _same_basis(p: Proposition, q: Proposition) -> None:
    if p.basis != q.basis:
        raise ValueError("propositions refer to different bases")


def projector_of(p: Proposition) -> Projector:
    diag = np.zeros(p.basis.dim)
    diag[p.indices()] = 1.0
    return Projector((p.basis.dim,), np.diag(diag))


def meet(p: Proposition, q: Proposition) -> Proposition:
    _same_basis(p, q)
    return Proposition(p.basis, p.support & q.support)


def join(p: Proposition, q: Proposition) -> Proposition:
    _same_basis(p, q)
    return Proposition(p.basis, p.support | q.support)


def complement(p: Proposition) -> Proposition:
    return Proposition(p.basis, frozenset(p.basis.tuples) - p.support)


def _round_to_projector(x: np.ndarray) -> np.ndarray:
    h = (x + x.conj().T) / 2
    w, v = np.linalg.eigh(h)
    keep = v[:, w > 0.5]
    return keep @ keep.conj().T


def meet_limit(p1: Projector, p2: Projector, tol: float = 1e-12,
               max_iter: int = 10000) -> Projector:
    """Projector onto ``range(p1) & range(p2)`` as the limit of ``(p1 p2)^k``."""
    if p1.dim != p2.dim:
        raise DimensionMismatch(f"{p1.dim} vs {p2.dim}")
    step = p1.matrix @ p2.matrix
    x = step
    increment = np.inf
    for _ in range(max_iter):
        nxt = x @ step
        increment = np.linalg.norm(nxt - x)
        if increment <= tol:
            return Projector(p1.dims, _round_to_projector(nxt))
        x = nxt
    raise NotConverged(f"(P1 P2)^k did not settle within {max_iter} iterations "
                       f"(last increment {increment:.3e}); ranges are nearly parallel")


def join_limit(p1: Projector, p2: Projector, tol: float = 1e-12,
               max_iter: int = 10000) -> Projector:
    """Projector onto ``range(p1) + range(p2)``: ``I - lim [(I - p1)(I - p2)]^k``."""
    eye = np.eye(p1.dim)
    inner = meet_limit(Projector(p1.dims, eye - p1.matrix), Projector(p2.dims, eye - p2.matrix),
                       tol=tol, max_iter=max_iter)
    return Projector(p1.dims, eye - inner.matrix)


def range_intersection(p1: Projector, p2: Projector, atol: float = 1e-8) -> Projector:
    """Projector onto ``range(p1) & range(p2)`` from the joint null space of
    ``I - p1`` and ``I - p2``."""
    eye = np.eye(p1.dim)
    stacked = np.vstack([eye - p1.matrix, eye - p2.matrix])
    # absolute cutoff: the stacked matrix may be exactly zero
    _, s, vh = np.linalg.svd(stacked)
    basis = vh[int((s > atol).sum()):].conj().T
    return Projector(p1.dims, basis @ basis.conj().T)


def range_sum(p1: Projector, p2: Projector) -> Projector:
    """Projector onto ``range(p1) + range(p2)`` from an orthonormal column basis."""
    basis = orth(np.hstack([p1.matrix, p2.matrix]), rcond=1e-8)
    return Projector(p1.dims, basis @ basis.conj().T)


def _range_basis(p: Projector) -> np.ndarray:
    # eigenvalues of a projector are 0 or 1; split at 1/2 rather than trusting
    # a relative SVD cutoff near machine epsilon
    w, v = np.linalg.eigh(p.matrix)
    return v[:, w > 0.5]


def principal_cosines(p1: Projector, p2: Projector) -> np.ndarray:
    """Cosines of the principal angles between the two ranges, descending."""
    a, b = _range_basis(p1), _range_basis(p2)
    if a.size == 0 or b.size == 0:
        return np.zeros(0)
    return np.linalg.svd(a.conj().T @ b, compute_uv=False)


def _amplitudes(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, StateVector) else np.asarray(state, dtype=complex)


def probability(state: StateVector, p: Proposition) -> float:
    """Born probability of ``p``: the sum of ``|<r|psi>|^2`` over its support."""
    amps = _amplitudes(state)
    if amps.size != p.basis.dim:
        raise DimensionMismatch(f"state of dim {amps.size} vs basis of dim {p.basis.dim}")
    weights = np.abs(amps[p.indices()]) ** 2
    return float(weights.sum())


def conditional_probability(state: StateVector, pj: Proposition, pi: Proposition) -> float:
    """Pr(pj | pi) = Pr(pj and pi) / Pr(pi)."""
    denominator = probability(state, pi)
    if denominator < EPS:
        raise ConditionUndefined(f"Pr(condition) = {denominator:.3e} < {EPS}")
    return probability(state, meet(pj, pi)) / denominator


@dataclass
class AxiomReport:
    nonnegativity: float = 0.0
    additivity: float = 0.0
    normalization: float = 0.0
    conditional_nonnegativity: float = 0.0
    conditional_additivity: float = 0.0
    conditional_normalization: float = 0.0
    disjoint_pairs: int = 0
    conditioner_defined: bool = True

    @property
    def max_violation(self) -> float:
        return max(self.nonnegativity, self.additivity, self.normalization,
                   self.conditional_nonnegativity, self.conditional_additivity,
                   self.conditional_normalization)

    def passed(self, tol: float = TOL) -> bool:
        return self.max_violation <= tol


def check_axioms(state, basis: OutcomeBasis, propositions: Sequence[Proposition],
                 conditioner: Proposition | None = None) -> AxiomReport:
    """Measure how far ``probability`` and ``conditional_probability`` stray
    from non-negativity, finite additivity and unit normalization.

    ``state`` may be an unnormalized amplitude array (negative controls).
    The conditioner defaults to the first sampled proposition with nonzero
    probability.
    """
    report = AxiomReport()
    unit = basis.unit()
    pr = {p: probability(state, p) for p in propositions}
    report.nonnegativity = max((max(-v, 0.0) for v in pr.values()), default=0.0)
    report.normalization = abs(probability(state, unit) - 1.0)
    props = list(dict.fromkeys(propositions))
    disjoint = [(p, q) for p, q in itertools.combinations(props, 2) if not (p.support & q.support)]
    report.disjoint_pairs = len(disjoint)
    report.additivity = max((abs(probability(state, join(p, q)) - pr[p] - pr[q])
                             for p, q in disjoint), default=0.0)

    if conditioner is None:
        conditioner = next((p for p in props if pr[p] >= EPS), None)
    if conditioner is None or probability(state, conditioner) < EPS:
        report.conditioner_defined = False
        return report

    def cond(p):
        return conditional_probability(state, p, conditioner)

    cpr = {p: cond(p) for p in props}
    report.conditional_nonnegativity = max((max(-v, 0.0) for v in cpr.values()), default=0.0)
    report.conditional_normalization = abs(cond(unit) - 1.0)
    report.conditional_additivity = max((abs(cond(join(p, q)) - cpr[p] - cpr[q])
                                         for p, q in disjoint), default=0.0)
    return report


def distributive(p1: Proposition, p2: Proposition, p3: Proposition) -> bool:
    """Both distributive laws hold for the triple (exact set equality)."""
    first = meet(p1, join(p2, p3)) == join(meet(p1, p2), meet(p1, p3))
    second = join(p1, meet(p2, p3)) == meet(join(p1, p2), join(p1, p3))
    return first and second
