"""Randomized invariant suites behind the ``verify`` and ``lattice`` commands.

Both return ``(report_text, passed)``. Reports contain no timings or
addresses, so a fixed seed gives byte-identical output.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import chain, examples, logic, sampling
from . import scenario as scenario_file
from . import instruments as inst
from .chain import ChainScenario
from .linalg import PROB_TOL, TOL, Projector, is_isometry, trace_distance

SECOND_KINDS = ("ideal", "generalized", "ideal_degenerate", "non_ideal", "macroscopic")
#: Conditionals are only compared for first outcomes at least this likely.
CONDITION_FLOOR = 1e-9


@dataclass
class Tally:
    """Running max violation of one invariant against its tolerance."""

    tol: float
    worst: float = 0.0
    checked: int = 0
    failed: int = 0

    def add(self, violation: float) -> None:
        violation = float(violation)
        self.checked += 1
        if not violation <= self.tol:  # nan counts as a failure
            self.failed += 1
        if not violation <= self.worst:
            self.worst = violation

    @property
    def passed(self) -> bool:
        return self.failed == 0


@dataclass
class Suite:
    tallies: dict[str, Tally] = field(default_factory=dict)

    def add(self, name: str, violation: float, tol: float) -> None:
        self.tallies.setdefault(name, Tally(tol)).add(violation)

    @property
    def passed(self) -> bool:
        return all(t.passed for t in self.tallies.values())

    def lines(self, indent: str = "  ") -> list[str]:
        out = []
        for name, t in self.tallies.items():
            status = "ok" if t.passed else f"FAIL ({t.failed} of {t.checked})"
            out.append(f"{indent}{name:<42} max {t.worst:.3e}  tol {t.tol:.0e}  "
                       f"n={t.checked:<5} {status}")
        return out


def _corrupt(spec: inst.Generalized) -> inst.Generalized:
    kraus = list(spec.kraus)
    kraus[0] = 1.1 * kraus[0]
    return inst.Generalized(tuple(kraus))


def _chain_invariants(suite: Suite, scenario: ChainScenario) -> chain.ChainResult:
    result = chain.run_chain(scenario)
    first = scenario.first
    suite.add("joint state norm", abs(np.linalg.norm(result.joint_final.amplitudes) - 1), TOL)
    suite.add("sum_q Pr(a_q) = 1", abs(result.first_probabilities.sum() - 1), PROB_TOL)
    for q in range(first.n_outcomes):
        pq = result.first_probabilities[q]
        if pq < CONDITION_FLOOR:
            continue
        rho = chain.prepared_state(scenario, q)
        row = result.conditionals[q]
        suite.add("sum_r Pr(b_r|a_q) = 1", abs(row.sum() - 1), PROB_TOL)
        eq = max(abs(row[r] - chain.predict_conditional(rho, scenario.second, r))
                 for r in range(scenario.second.n_outcomes))
        suite.add("joint conditional = Tr[rho E_r]", eq, PROB_TOL)
        suite.add("prepared state = oracle", trace_distance(rho, chain.prepared_state_oracle(result, q)),
                  PROB_TOL)
    return result


def _class_invariants(suite: Suite, rng, scenario: ChainScenario, result) -> None:
    first = scenario.first
    phi = scenario.initial_system.amplitudes
    ok, residual = is_isometry(inst.isometry(first))
    suite.add("first map is an isometry", residual, TOL)
    kraus = inst.kraus_from_isometry(inst.isometry(first), first.pointer_dim)
    suite.add("extracted Kraus completeness",
              np.linalg.norm(sum(m.conj().T @ m for m in kraus) - np.eye(first.system_dim)), TOL)

    if isinstance(first, (inst.IdealNonDegenerate, inst.IdealDegenerate)):
        for q in result.collapse_deviations:
            if result.first_probabilities[q] >= CONDITION_FLOOR:
                suite.add("collapse deviation = 0", result.collapse_deviations[q], TOL)
    if isinstance(first, inst.IdealNonDegenerate):
        proj_err = max(np.abs(kraus[q + 1] - inst.effect(first, q)).max()
                       for q in range(first.n_outcomes))
        suite.add("ideal Kraus = eigenprojectors", proj_err, 1e-12)
        repeat = chain.run_chain(ChainScenario(scenario.initial_system, first, first))
        for q in range(first.n_outcomes):
            if repeat.first_probabilities[q] < CONDITION_FLOOR:
                continue
            row = repeat.conditionals[q]
            off = np.delete(row, q)
            suite.add("repeatability", max(abs(row[q] - 1), off.max(initial=0.0)), TOL)
    if isinstance(first, inst.NonIdeal):
        faithful = np.abs(first.basis.conj().T @ phi) ** 2
        suite.add("non-ideal Pr(a_q) = |<q|phi>|^2",
                  np.abs(result.first_probabilities - faithful).max(), TOL)
        other = ChainScenario(sampling.random_state(rng, first.system_dim), first, scenario.second)
        res2 = chain.run_chain(other)
        for q in range(first.n_outcomes):
            if min(result.first_probabilities[q], res2.first_probabilities[q]) < 1e-3:
                continue
            suite.add("non-ideal conditional independent of phi",
                      np.abs(result.conditionals[q] - res2.conditionals[q]).max(), TOL)
    if isinstance(first, inst.Generalized):
        back = inst.kraus_from_isometry(inst.isometry(first), first.pointer_dim)
        suite.add("Kraus round trip", max(np.abs(a - b).max() for a, b in zip(back, first.kraus)),
                  1e-12)
        born = np.array([np.vdot(phi, m.conj().T @ m @ phi).real for m in first.kraus])
        suite.add("Pr(m) = <phi|M^dag M|phi>", np.abs(result.first_probabilities - born).max(), TOL)
    if isinstance(first, inst.Macroscopic):
        for q, rho in result.prepared_states.items():
            suite.add("macroscopic Tr rho(q,m) = 1", abs(np.trace(rho.matrix).real - 1), TOL)
            suite.add("macroscopic rho(q,m) PSD", max(-rho.eigenvalues().min(), 0.0), TOL)


def verify(seed: int = 42, trials: int = 200, inject_fault: bool = False) -> tuple[str, bool]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    lines = [f"verify: seed={seed} trials/class={trials} inject_fault={inject_fault}"]
    ok = True
    for k, kind in enumerate(sampling.CLASSES):
        rng = np.random.default_rng([seed, k])
        suite = Suite()
        for t in range(trials):
            d = int(rng.integers(2, 5))
            phi = sampling.random_state(rng, d)
            first = sampling.random_instrument(rng, kind, d)
            second = sampling.random_instrument(rng, SECOND_KINDS[t % len(SECOND_KINDS)], d)
            if inject_fault and kind == "generalized" and t == 0:
                first = _corrupt(first)
            report = inst.validate(first)
            for check in report.checks:
                suite.add(f"validate: {check.name}", check.residual, TOL)
            if not report.passed:
                continue
            scenario = ChainScenario(phi, first, second)
            result = _chain_invariants(suite, scenario)
            _class_invariants(suite, rng, scenario, result)
        lines.append(f"[{kind}]")
        lines += suite.lines()
        ok &= suite.passed

    shipped = scenario_file.load(examples.path("macroscopic_qubit")).scenario
    mixed = chain.prepared_state(shipped, 0)
    purity_ok = mixed.purity <= 0.5 + PROB_TOL
    lines.append("[macroscopic mixedness]")
    lines.append(f"  purity of shipped rho(0, m0) from pure |0>   {mixed.purity:.12f}  "
                 f"{'ok' if purity_ok else 'FAIL'}")
    ok &= purity_ok
    lines.append(f"overall: {'PASS' if ok else 'FAIL'}")
    return "\n".join(lines) + "\n", ok


def _factor_sizes(dim: int) -> list[int]:
    sizes, n, p = [], dim, 2
    while n > 1:
        while n % p == 0:
            sizes.append(p)
            n //= p
        p += 1
    return sizes or [1]


def _random_projector(rng, n: int, rank: int) -> Projector:
    v = sampling.random_isometry(rng, n, rank)
    return Projector((n,), v @ v.conj().T)


def lattice(dim: int = 8, seed: int = 0, samples: int = 48, pairs: int = 100,
            states: int = 16) -> tuple[str, bool]:
    if not 2 <= dim <= 64:
        raise ValueError("dim must be in [2, 64]")
    rng = np.random.default_rng(seed)
    basis = logic.OutcomeBasis.from_sizes(*_factor_sizes(dim))
    state = sampling.random_state(rng, dim)
    suite = Suite()

    def random_prop():
        return basis.proposition(t for t in basis.tuples if rng.random() < 0.5)

    props = [basis.empty(), basis.unit()]
    props += [basis.where(0, [v]) for v in basis.values[0]]
    props += [random_prop() for _ in range(samples)]
    conditioner = basis.where(0, basis.values[0][:1])
    for k in range(states):
        psi = state if k == 0 else sampling.random_state(rng, dim)
        ax = logic.check_axioms(psi, basis, props, conditioner)
        suite.add("i)   Pr(p) >= 0", ax.nonnegativity, TOL)
        suite.add("ii)  additivity on disjoint pairs", ax.additivity, TOL)
        suite.add("iii) Pr(I) = 1", ax.normalization, TOL)
        suite.add("i)   Pr(p|c) >= 0", ax.conditional_nonnegativity, TOL)
        suite.add("ii)  conditional additivity", ax.conditional_additivity, TOL)
        suite.add("iii) Pr(I|c) = 1", ax.conditional_normalization, TOL)

    for p, q in zip(props, props[1:]):
        if p <= q:
            suite.add("monotonicity", max(logic.probability(state, p)
                                          - logic.probability(state, q), 0.0), 1e-12)
        pm, qm = logic.projector_of(p).matrix, logic.projector_of(q).matrix
        suite.add("meet projector = P1 P2",
                  np.abs(logic.projector_of(logic.meet(p, q)).matrix - pm @ qm).max(), 0.0)
        suite.add("join projector = P1 + P2 - P1 P2",
                  np.abs(logic.projector_of(logic.join(p, q)).matrix - (pm + qm - pm @ qm)).max(), 0.0)
        suite.add("meet_limit = shortcut (commuting)",
                  np.linalg.norm(logic.meet_limit(logic.projector_of(p), logic.projector_of(q)).matrix
                                 - pm @ qm), 1e-12)

    if dim <= 4:
        triples = itertools.product(basis.all_propositions(), repeat=3)
        label = "distributivity (exhaustive)"
    else:
        triples = ((random_prop(), random_prop(), random_prop()) for _ in range(2000))
        label = "distributivity (random)"
    for p1, p2, p3 in triples:
        suite.add(label, 0.0 if logic.distributive(p1, p2, p3) else 1.0, 0.0)

    n = min(dim, 8)
    for _ in range(pairs):
        r1, r2 = (int(x) for x in rng.integers(1, n + 1, size=2))
        a, b = _random_projector(rng, n, r1), _random_projector(rng, n, r2)
        for name, limit, oracle in (
                ("meet_limit = range intersection", logic.meet_limit, logic.range_intersection),
                ("join_limit = range sum", logic.join_limit, logic.range_sum)):
            try:
                got = limit(a, b)
            except logic.NotConverged:
                # allowed only for nearly parallel ranges
                cos = logic.principal_cosines(a, b)
                cos = cos[cos < 1 - 1e-9]
                suite.add("non-convergence only if nearly parallel",
                          0.0 if cos.size and cos.max() > logic.NEAR_PARALLEL else 1.0, 0.0)
                continue
            suite.add(name, np.linalg.norm(got.matrix - oracle(a, b).matrix), PROB_TOL)

    zero = np.diag([1.0, 0.0])
    plus = np.full((2, 2), 0.5)
    demo = logic.meet_limit(Projector((2,), zero), Projector((2,), plus))
    suite.add("|0><0| meet |+><+| = 0", np.linalg.norm(demo.matrix), TOL)

    sizes = "x".join(str(s) for s in _factor_sizes(dim))
    lines = [f"lattice: dim={dim} ({sizes} value tuples) seed={seed}"]
    lines += suite.lines()
    lines.append(f"overall: {'PASS' if suite.passed else 'FAIL'}")
    return "\n".join(lines) + "\n", suite.passed
