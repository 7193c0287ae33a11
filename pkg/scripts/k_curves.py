"""Kolmogorov distance of example-array row sums to N(0, 1) along n, with
the certified band c_tilde * RelLin_{1/2} <= limsup K <= alpha."""

import argparse
import json
from dataclasses import asdict, dataclass

from steincert.constants import constants_pipeline
from steincert.kolmogorov import CurvePolicy, MonteCarlo, k_curve
from steincert.triangular_array import ArraySpec, relaxed_closed_form


@dataclass
class Config:
    alphas: tuple[float, ...] = (0.05, 0.25, 0.5)
    n_grid: tuple[int, ...] = (4, 8, 12, 50, 200, 1000, 5000, 20000)
    samples: int = 10**6
    seed: int = 0


def run(cfg: Config) -> dict:
    c_tilde = constants_pipeline(1.7).c_tilde
    policy = CurvePolicy(mc=MonteCarlo(samples=cfg.samples, seed=cfg.seed))
    out = {"config": asdict(cfg), "c_tilde": c_tilde, "curves": []}
    for alpha in cfg.alphas:
        curve = k_curve(ArraySpec.example(alpha), cfg.n_grid, policy)
        out["curves"].append({
            "alpha": alpha,
            "lower": c_tilde * relaxed_closed_form(alpha, 0.5),
            "upper": alpha,
            "points": [r.to_dict() for r in curve],
        })
    return out


def plot(result: dict, path: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for c in result["curves"]:
        ns = [p["n"] for p in c["points"]]
        line, = ax.plot(ns, [p["value"] for p in c["points"]], marker="o", label=f"alpha={c['alpha']:g}")
        ax.axhline(c["lower"], color=line.get_color(), linestyle=":")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("n")
    ax.set_ylabel("K(S_n, N(0,1))")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=float, default=1e6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="k_curves.json")
    ap.add_argument("--plot", default=None, help="SVG/PNG path for a figure")
    args = ap.parse_args()
    result = run(Config(samples=int(args.samples), seed=args.seed))
    with open(args.out, "w") as fh:
        json.dump(result, fh, indent=2)
    for c in result["curves"]:
        tail = c["points"][-1]
        print(f"alpha={c['alpha']:<5g} K(n={tail['n']}) = {tail['value']:.5f}   band [{c['lower']:.5f}, {c['upper']}]")
    if args.plot:
        plot(result, args.plot)


if __name__ == "__main__":
    main()
