"""C_psi(sigma) over the Gaussian smoothing family, with the derived
C_1/2 = 1.5 C_psi and C~_1/2 = 1 / C_1/2 at the minimiser."""

import argparse
from dataclasses import dataclass

from steincert.constants import constants_pipeline, sigma_scan


@dataclass
class Config:
    lo: float = 0.8
    hi: float = 3.0
    step: float = 0.01


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lo", type=float, default=Config.lo)
    ap.add_argument("--hi", type=float, default=Config.hi)
    ap.add_argument("--step", type=float, default=Config.step)
    args = ap.parse_args()
    cfg = Config(args.lo, args.hi, args.step)
    scan = sigma_scan(cfg.lo, cfg.hi, cfg.step)
    stride = max(1, len(scan.table) // 20)
    print(f"{'sigma':>7} {'C_psi':>12}")
    for s, c in scan.table[::stride]:
        print(f"{s:7.3f} {c:12.6f}")
    best = constants_pipeline(scan.best_sigma)
    print(f"\nminimiser sigma = {best.sigma:g}: R = {best.R:.6f}, C_psi = {best.c_psi:.6f}, "
          f"C_1/2 = {best.c_half:.6f}, C~_1/2 = {best.c_tilde:.6f}")


if __name__ == "__main__":
    main()
