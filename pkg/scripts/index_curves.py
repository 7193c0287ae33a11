"""Finite-n Lindeberg and relaxed Lindeberg sums of the example arrays,
against their large-n limits."""

import argparse
import csv
import sys
from dataclasses import dataclass

from steincert.triangular_array import (
    DEFAULT_N_GRID,
    ArraySpec,
    WeightFunction,
    lindeberg_tail_limit,
    relaxed_limit,
    relaxed_sum,
    build_row,
    lindeberg_tail,
    row_arrays,
)


@dataclass
class Config:
    alphas: tuple[float, ...] = (0.1, 0.25, 0.5)
    epsilons: tuple[float, ...] = (0.2, 0.1, 0.05)
    gammas: tuple[float, ...] = (0.5, 2.0)
    n_grid: tuple[int, ...] = DEFAULT_N_GRID
    psi: bool = True


def run(cfg: Config):
    rows = []
    weights = [WeightFunction.phi(g) for g in cfg.gammas] + ([WeightFunction.psi_half()] if cfg.psi else [])
    for alpha in cfg.alphas:
        spec = ArraySpec.example(alpha)
        for n in cfg.n_grid:
            row = build_row(spec, n)
            atoms, probs = row_arrays(spec, n)
            for e in cfg.epsilons:
                rows.append({"alpha": alpha, "n": n, "index": f"tail eps={e:g}",
                             "value": lindeberg_tail(row, e), "limit": lindeberg_tail_limit(alpha, e)})
            for w in weights:
                label = "psi_1/2" if w.kind == "psi_half" else f"phi gamma={w.gamma:g}"
                rows.append({"alpha": alpha, "n": n, "index": label,
                             "value": relaxed_sum(atoms, probs, w), "limit": relaxed_limit(alpha, w)})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=Config.alphas)
    ap.add_argument("--n-max", type=int, default=None, help="truncate the default n grid")
    ap.add_argument("--out", default="-")
    args = ap.parse_args()
    grid = tuple(n for n in DEFAULT_N_GRID if args.n_max is None or n <= args.n_max)
    rows = run(Config(alphas=tuple(args.alphas), n_grid=grid))
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
    writer.writeheader()
    for r in rows:
        writer.writerow({k: f"{v:.10g}" if isinstance(v, float) else v for k, v in r.items()})
    largest = max(grid)
    for r in rows:
        if r["n"] == largest:
            print(f"alpha={r['alpha']:<5g} {r['index']:<16} n={largest}: {r['value']:.6f}  limit {r['limit']:.6f}",
                  file=sys.stderr)


if __name__ == "__main__":
    main()
