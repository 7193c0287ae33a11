"""Bound certificates for example arrays over an alpha grid, plus the
optimality-order ratios lower(alpha) / alpha^(1+p)."""

import argparse
import json
from dataclasses import dataclass

from steincert.certify import CertifyConfig, certify_bounds, optimality_scan
from steincert.triangular_array import ArraySpec


@dataclass
class Config:
    alphas: tuple[float, ...] = (0.05, 0.1, 0.25, 0.5)
    n_grid: tuple[int, ...] = (500, 1000, 2000, 4000)
    samples: int = 10**6
    seed: int = 0
    p_values: tuple[float, ...] = (0.0, 0.5, 1.0)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=float, default=1e6)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default=None, help="write all certificates as JSON")
    args = ap.parse_args()
    cfg = Config(samples=int(args.samples), seed=args.seed)
    ccfg = CertifyConfig(n_grid=cfg.n_grid, samples=cfg.samples, seed=cfg.seed)
    certs = []
    print(f"{'alpha':>6} {'lower':>10} {'plateau':>10} {'+-':>8} {'upper':>6}  verdict")
    for alpha in cfg.alphas:
        cert = certify_bounds(ArraySpec.example(alpha), ccfg)
        certs.append(cert.to_dict())
        c = cert.checks
        print(f"{alpha:6g} {cert.lower:10.6f} {c['plateau']:10.6f} {c['half_width']:8.5f} {cert.upper:6g}  {cert.verdict}")
    print()
    for p in cfg.p_values:
        table = optimality_scan(p, [0.1, 0.01, 0.001, 0.0001])
        growth = ", ".join(f"{g:.3g}" for g in table.growth_per_decade())
        print(f"p = {p:g}: ratio growth per decade {growth}")
    if args.out:
        with open(args.out, "w") as fh:
            json.dump(certs, fh, indent=2)


if __name__ == "__main__":
    main()
