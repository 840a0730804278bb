"""Purity of the state a macroscopic apparatus leaves behind.

For each system dimension d and number of microscopic pointer labels mu,
draw random macroscopic instruments and random pure initial states, and
record the purity of rho(q, m0) for every possible outcome. The state is a
sum of mu rank-one terms, so its purity can never drop below 1/min(d, mu);
with mu = 1 it stays pure.

    python3 scripts/macroscopic_purity.py --samples 200
"""

from __future__ import annotations

import argparse
from dataclasses import dataclass, field

import numpy as np

from measchain import chain, sampling
from measchain.chain import ChainScenario


@dataclass(frozen=True)
class PurityConfig:
    dims: tuple[int, ...] = (2, 3, 4)
    micro_dims: tuple[int, ...] = (1, 2, 3)
    samples: int = 100
    seed: int = 1


@dataclass
class Cell:
    d: int
    mu: int
    purities: list[float] = field(default_factory=list)

    @property
    def bound(self) -> float:
        return 1 / min(self.d, self.mu)


def run(cfg: PurityConfig) -> list[Cell]:
    rng = np.random.default_rng(cfg.seed)
    cells = []
    for d in cfg.dims:
        for mu in cfg.micro_dims:
            cell = Cell(d, mu)
            for _ in range(cfg.samples):
                first = sampling.random_macroscopic(rng, d, micro_dim=mu)
                sc = ChainScenario(sampling.random_state(rng, d), first, sampling.random_ideal(rng, d))
                res = chain.run_chain(sc)
                for q in res.prepared_states:
                    cell.purities.append(res.prepared_states[q].purity)
            cells.append(cell)
    return cells


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--samples", type=int, default=PurityConfig.samples)
    ap.add_argument("--seed", type=int, default=PurityConfig.seed)
    args = ap.parse_args(argv)
    cells = run(PurityConfig(samples=args.samples, seed=args.seed))

    print(f"{'d':>2} {'mu':>3} {'n':>5} {'mean':>8} {'min':>8} {'bound':>8}")
    ok = True
    for c in cells:
        p = np.array(c.purities)
        ok &= bool(p.min() >= c.bound - 1e-9 and p.max() <= 1 + 1e-9)
        print(f"{c.d:>2} {c.mu:>3} {p.size:>5} {p.mean():8.4f} {p.min():8.4f} {c.bound:8.4f}")
    print("purity bound 1/min(d, mu) holds" if ok else "purity bound VIOLATED")
    return 0 if ok else 1


if __name__ == "__main__":
    raise SystemExit(main())
