"""Random states, bases and instruments from orthonormalized Gaussian matrices."""

from __future__ import annotations

import numpy as np

from . import instruments as inst
from .chain import ChainScenario
from .linalg import StateVector

CLASSES = ("ideal", "ideal_degenerate", "non_ideal", "generalized", "macroscopic")


def ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_isometry(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    q, r = np.linalg.qr(ginibre(rng, rows, cols))
    # fix column phases so the distribution is Haar
    phases = np.diag(r) / np.abs(np.diag(r))
    return q * phases


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    return random_isometry(rng, d, d)


def random_state(rng: np.random.Generator, d: int) -> StateVector:
    return StateVector.from_unnormalized((d,), ginibre(rng, d, 1).ravel())


def random_ideal(rng, d: int) -> inst.IdealNonDegenerate:
    return inst.IdealNonDegenerate(random_unitary(rng, d))


def random_degenerate(rng, d: int) -> inst.IdealDegenerate:
    """Random eigenbasis split into 1..d blocks of contiguous columns."""
    n_blocks = int(rng.integers(1, d + 1))
    cuts = np.sort(rng.choice(np.arange(1, d), size=n_blocks - 1, replace=False))
    bounds = [0, *cuts.tolist(), d]
    blocks = [range(a, b) for a, b in zip(bounds[:-1], bounds[1:])]
    return inst.IdealDegenerate.from_partition(random_unitary(rng, d), blocks)


def random_non_ideal(rng, d: int) -> inst.NonIdeal:
    disturbed = np.column_stack([random_state(rng, d).amplitudes for _ in range(d)])
    return inst.NonIdeal(random_unitary(rng, d), disturbed)


def random_generalized(rng, d: int, n_outcomes: int | None = None) -> inst.Generalized:
    if n_outcomes is None:
        n_outcomes = int(rng.integers(2, 5))
    v = random_isometry(rng, d * n_outcomes, d).reshape(d, n_outcomes, d)
    return inst.Generalized(tuple(v[:, m, :] for m in range(n_outcomes)))


def random_macroscopic(rng, d: int, micro_dim: int | None = None) -> inst.Macroscopic:
    if micro_dim is None:
        micro_dim = int(rng.integers(1, 4))
    u = ginibre(rng, d * micro_dim, d * micro_dim).reshape(d, micro_dim, d, micro_dim)
    m0 = int(rng.integers(micro_dim))
    # only the m0 slice has to be normalized; normalize every slice anyway
    u = u / np.linalg.norm(u, axis=(2, 3), keepdims=True)
    return inst.Macroscopic(u, m0=m0, basis=random_unitary(rng, d))


MAKERS = {
    "ideal": random_ideal,
    "ideal_degenerate": random_degenerate,
    "non_ideal": random_non_ideal,
    "generalized": random_generalized,
    "macroscopic": random_macroscopic,
}


def random_instrument(rng, kind: str, d: int):
    return MAKERS[kind](rng, d)


def random_scenario(rng: np.random.Generator, first_kind: str, second_kind: str = "ideal",
                    d: int | None = None) -> ChainScenario:
    if d is None:
        d = int(rng.integers(2, 5))
    phi = random_state(rng, d)
    return ChainScenario(phi, random_instrument(rng, first_kind, d),
                         random_instrument(rng, second_kind, d))
