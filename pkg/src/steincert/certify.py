"""Two-sided bound certificates for the limiting Kolmogorov distance, and the
optimality-order diagnostic.

For an array with relaxed index RelLin_{1/2} and Lindeberg index Lin,

    c_tilde * RelLin_{1/2} <= limsup K(S_n, N(0, 1)) <= Lin.

A certificate evaluates both sides (closed forms for the example family,
finite-n proxies otherwise) and sets them against a finite-n K curve. It is
numerical evidence at finite n, not a proof of the limsup statement.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

from .constants import REFERENCE_C_TILDE_MIN, ConstantsRecord, constants_pipeline
from .distributions import ATOM_CAP, GENERATOR_NAME
from .kolmogorov import (
    BLOCK_SIZE,
    DEFAULT_LEVEL,
    CurvePolicy,
    DistanceResult,
    MonteCarlo,
    k_curve,
    plateau_estimate,
)
from .triangular_array import (
    DEFAULT_EPS_GRID,
    DEFAULT_N_GRID,
    ArraySpec,
    WeightFunction,
    lin_index,
    relaxed_closed_form,
    relaxed_index,
)

GRID_SLACK = 0.005
# finite-n index proxies need n well past 1/epsilon^2 for the smallest epsilon
INDEX_N_GRID = DEFAULT_N_GRID + (177828, 316228, 562341, 1000000)
BOUND_TOL = 1e-12
CONSISTENT, INCONSISTENT, INCONCLUSIVE = "consistent", "inconsistent", "inconclusive"


@dataclass(frozen=True)
class CertifyConfig:
    """Everything a certificate depends on; recorded verbatim in its output."""

    n_grid: tuple[int, ...] = (250, 500, 1000, 2000)
    samples: int = 10**6
    seed: int = 0
    level: float = DEFAULT_LEVEL
    method: str = "auto"
    block: int = BLOCK_SIZE
    sigma: float = 1.7
    rounded_constant: bool = False  # use c_tilde = 0.033 instead of the computed value
    grid_slack: float = GRID_SLACK
    index_n_grid: tuple[int, ...] = INDEX_N_GRID
    index_eps_grid: tuple[float, ...] = DEFAULT_EPS_GRID
    workers: int | None = None

    def policy(self) -> CurvePolicy:
        mc = MonteCarlo(samples=self.samples, seed=self.seed, block=self.block, workers=self.workers)
        return CurvePolicy(method=self.method, mc=mc, cap=ATOM_CAP, level=self.level)

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("workers")  # results do not depend on it
        out["n_grid"] = list(self.n_grid)
        out["index_n_grid"] = list(self.index_n_grid)
        out["index_eps_grid"] = list(self.index_eps_grid)
        out["generator"] = GENERATOR_NAME
        return out


@dataclass
class BoundCertificate:
    spec: dict
    lower: float
    upper: float
    empirical: list[DistanceResult]
    verdict: str
    constants: ConstantsRecord
    config: CertifyConfig
    c_tilde_used: float
    sources: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        constants = self.constants.to_dict()
        constants["c_tilde_used"] = self.c_tilde_used
        return {
            "spec": self.spec,
            "lower": self.lower,
            "upper": self.upper,
            "empirical": [r.to_dict() for r in self.empirical],
            "constants": constants,
            "verdict": self.verdict,
            "config": {**self.config.to_dict(), "bound_sources": self.sources, "checks": self.checks},
        }


def _bounds(spec: ArraySpec, config: CertifyConfig) -> tuple[float, float, dict]:
    """(RelLin_{1/2}, Lin, provenance) for ``spec``."""
    if spec.kind == "example_alpha":
        rel = relaxed_closed_form(spec.alpha, 0.5)
        lin = spec.alpha
        return rel, lin, {"relaxed": "closed form", "lindeberg": "closed form"}
    lin_rep = lin_index(spec, config.index_eps_grid, config.index_n_grid)
    rel_rep = relaxed_index(spec, WeightFunction.phi(0.5), config.index_n_grid)
    # the relaxed index never exceeds the Lindeberg index, so clip the finite proxy
    rel = min(rel_rep.limit_estimate, lin_rep.limit_estimate)
    return rel, lin_rep.limit_estimate, {
        "relaxed": "finite-n proxy (max over last third of index_n_grid, clipped at the Lindeberg proxy)",
        "relaxed_unclipped": rel_rep.limit_estimate,
        "lindeberg": "finite-n proxy (max over epsilon of max over last third of index_n_grid)",
    }


def verdict_for(lower: float, upper: float, curve: Sequence[DistanceResult], slack: float) -> tuple[str, dict]:
    """Compare the plateau of a K curve (max over its last third) with the bounds.

    Consistent if the plateau lies in [lower, upper] widened on both sides by
    its confidence half-width plus ``slack``. Outside that band the verdict is
    inconsistent, unless the curve is still moving towards the interval (the
    last point is separated from an earlier one beyond both half-widths in
    the right direction): then, like an empty curve, it is inconclusive.
    """
    if not curve:
        return INCONCLUSIVE, {"reason": "empty K curve"}
    value, half_width = plateau_estimate(curve)
    allowance = half_width + slack
    below = lower - value
    above = value - upper
    last = curve[-1]
    hw = lambda r: r.half_width or 0.0  # noqa: E731
    falling = any(r.value - hw(r) > last.value + hw(last) for r in curve[:-1])
    rising = any(r.value + hw(r) < last.value - hw(last) for r in curve[:-1])
    checks = {
        "plateau": value, "half_width": half_width, "allowance": allowance,
        "below_lower_by": below, "above_upper_by": above,
        "still_falling": falling, "still_rising": rising,
    }
    if below <= allowance and above <= allowance:
        return CONSISTENT, checks
    if (above > allowance and falling) or (below > allowance and rising):
        return INCONCLUSIVE, checks
    return INCONSISTENT, checks


def certify_bounds(spec: ArraySpec, config: CertifyConfig = CertifyConfig()) -> BoundCertificate:
    constants = constants_pipeline(config.sigma)
    c_tilde = REFERENCE_C_TILDE_MIN if config.rounded_constant else constants.c_tilde
    rel, lin, sources = _bounds(spec, config)
    lower, upper = c_tilde * rel, lin
    if lower > upper + BOUND_TOL:
        raise AssertionError(f"lower bound {lower} exceeds upper bound {upper}")
    sources["relaxed_index"] = rel
    curve = k_curve(spec, list(config.n_grid), config.policy())
    verdict, checks = verdict_for(lower, upper, curve, config.grid_slack)
    return BoundCertificate(spec.summary(), lower, upper, curve, verdict, constants, config, c_tilde, sources, checks)


# ---------------------------------------------------------------------------
# optimality order


@dataclass
class OptimalityTable:
    p: float
    c_tilde: float
    rows: list[dict]

    def growth_per_decade(self) -> list[float]:
        """Ratio growth between consecutive rows, normalised to one decade of alpha."""
        out = []
        for a, b in zip(self.rows, self.rows[1:]):
            decades = math.log10(a["alpha"] / b["alpha"])
            out.append((b["ratio"] / a["ratio"]) ** (1 / decades))
        return out

    def to_dict(self) -> dict:
        return {"p": self.p, "c_tilde": self.c_tilde, "rows": self.rows, "growth_per_decade": self.growth_per_decade()}


def optimality_scan(p: float, alpha_grid: Sequence[float], c_tilde: float | None = None) -> OptimalityTable:
    """lower(alpha) / alpha^{1 + p} along a decreasing alpha grid.

    Since lower(alpha) ~ c_tilde (1 - 2(1 - e^{-1/2})) alpha as alpha -> 0,
    the ratio grows like alpha^{-p}: no constant C gives K <= C Lin^{1+p}.
    """
    if p < 0:
        raise ValueError(f"p must be >= 0, got {p!r}")
    alphas = [float(a) for a in alpha_grid]
    if not alphas:
        raise ValueError("alpha grid is empty")
    if any(not 0 < a <= 0.5 for a in alphas):
        raise ValueError("alpha values must lie in (0, 1/2]")
    if any(b >= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError("alpha grid must be strictly decreasing")
    if c_tilde is None:
        c_tilde = constants_pipeline(1.7).c_tilde
    rows = []
    for a in alphas:
        lower = c_tilde * relaxed_closed_form(a, 0.5)
        rows.append({"alpha": a, "lower": lower, "upper": a, "ratio": lower / a ** (1 + p)})
    return OptimalityTable(float(p), c_tilde, rows)
