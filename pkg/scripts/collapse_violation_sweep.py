"""Sweep how far a non-ideal qubit measurement departs from collapse.

The first instrument reads the computational basis but leaves outcome 1 in
``mu_1 = sin(t)|0> + cos(t)|1>``; the second reads the computational basis
again. Collapse would give Pr(b_0|a_1) = 0 for every t; unitary evolution
plus the Born rule gives sin(t)^2, independent of the initial state.

    python3 scripts/collapse_violation_sweep.py --steps 9
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass

import numpy as np

from measchain import chain, sampling
from measchain.chain import ChainScenario
from measchain.instruments import IdealNonDegenerate, NonIdeal
from measchain.linalg import StateVector


@dataclass(frozen=True)
class SweepConfig:
    steps: int = 9
    t_max: float = np.pi / 2
    random_initial: bool = False
    seed: int = 0


def scenario_at(t: float, phi: StateVector) -> ChainScenario:
    disturbed = np.array([[1, np.sin(t)], [0, np.cos(t)]], dtype=complex)
    first = NonIdeal(np.eye(2), disturbed)
    return ChainScenario(phi, first, IdealNonDegenerate.computational(2))


def sweep(cfg: SweepConfig) -> list[dict]:
    rng = np.random.default_rng(cfg.seed)
    rows = []
    for t in np.linspace(0, cfg.t_max, cfg.steps):
        if cfg.random_initial:
            phi = sampling.random_state(rng, 2)
        else:
            phi = StateVector((2,), np.array([1, 1]) / np.sqrt(2))
        sc = scenario_at(t, phi)
        res = chain.run_chain(sc)
        rows.append({
            "t": t,
            "pr_a1": res.first_probabilities[1],
            "pr_b0_given_a1": chain.conditional(res, 1, 0),
            "expected": np.sin(t) ** 2,
            "collapse": chain.predict_conditional(chain.collapse_reference(sc, 1), sc.second, 0),
            "deviation": chain.collapse_deviation(sc, 1),
        })
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--steps", type=int, default=SweepConfig.steps)
    ap.add_argument("--random-initial", action="store_true",
                    help="draw a fresh random initial state at every angle")
    ap.add_argument("--seed", type=int, default=SweepConfig.seed)
    args = ap.parse_args(argv)
    cfg = SweepConfig(steps=args.steps, random_initial=args.random_initial, seed=args.seed)

    rows = sweep(cfg)
    print(f"{'t':>8} {'Pr(a_1)':>10} {'Pr(b0|a1)':>12} {'sin^2 t':>10} "
          f"{'collapse':>9} {'T(rho, ref)':>12}")
    for r in rows:
        print(f"{r['t']:8.4f} {r['pr_a1']:10.6f} {r['pr_b0_given_a1']:12.9f} {r['expected']:10.6f} "
              f"{r['collapse']:9.3f} {r['deviation']:12.9f}")
    worst = max(abs(r["pr_b0_given_a1"] - r["expected"]) for r in rows)
    worst_dev = max(abs(r["deviation"] - abs(np.sin(r["t"]))) for r in rows)
    print(f"max |Pr(b0|a1) - sin^2 t| = {worst:.2e}; max |T - |sin t|| = {worst_dev:.2e}")
    return 0 if max(worst, worst_dev) <= 1e-9 else 1


if __name__ == "__main__":
    raise SystemExit(main())
