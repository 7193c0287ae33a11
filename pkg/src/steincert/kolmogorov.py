"""Kolmogorov distance between row-sum laws and the standard normal.

Small rows are handled exactly by convolution. Larger rows are sampled; the
sample count is split into fixed-size blocks, block ``b`` drawing from the
substream ``(seed, n, b)``, so the output does not depend on how many worker
threads run.
"""

from __future__ import annotations

import hashlib
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .distributions import (
    ATOM_CAP,
    GENERATOR_NAME,
    DiscreteDistribution,
    _inverse_cdf,
    convolve,
    cumulative,
    make_rng,
    normal_cdf,
)
from .numerics import kahan_add
from .triangular_array import ArraySpec, build_row, s_squared, tail_third

BLOCK_SIZE = 1 << 16
DEFAULT_SAMPLES = 10**6
DEFAULT_LEVEL = 0.99
WORK_CAP = 1 << 26
GROUP_POWER_CAP = 1 << 16
WORKERS_ENV = "STEINCERT_WORKERS"


def default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "")))
    except ValueError:
        return os.cpu_count() or 1


@dataclass(frozen=True)
class MonteCarlo:
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    block: int = BLOCK_SIZE
    workers: int | None = None
    sampler: str = "auto"  # "auto" | "generic"


@dataclass
class DistanceResult:
    value: float
    method: str
    n: int | None = None
    level: float | None = None
    half_width: float | None = None
    samples: int | None = None
    seed: int | None = None
    location: float | None = None

    def to_dict(self) -> dict:
        conf = None if self.half_width is None else {"level": self.level, "half_width": self.half_width}
        return {
            "n": self.n,
            "method": self.method,
            "value": self.value,
            "confidence": conf,
            "samples": self.samples,
            "seed": self.seed,
            "location": self.location,
        }


def dkw_half_width(m: int, level: float = DEFAULT_LEVEL) -> float:
    """Uniform band half-width for an m-sample empirical CDF at confidence ``level``."""
    return math.sqrt(math.log(2 / (1 - level)) / (2 * m))


def _sup_gap(d: DiscreteDistribution) -> tuple[float, float]:
    # against a continuous CDF the supremum is reached at an atom, from one side
    f, f_minus = cumulative(d)
    phi = normal_cdf(d.atoms)
    gaps = np.maximum(np.abs(phi - f), np.abs(phi - f_minus))
    i = int(np.argmax(gaps))
    return float(gaps[i]), float(d.atoms[i])


def empirical_distribution(samples: np.ndarray) -> DiscreteDistribution:
    values, counts = np.unique(np.asarray(samples, dtype=float), return_counts=True)
    return DiscreteDistribution._trusted(values, counts / counts.sum())


def k_distance(
    data: DiscreteDistribution | np.ndarray,
    *,
    n: int | None = None,
    seed: int | None = None,
    level: float = DEFAULT_LEVEL,
) -> DistanceResult:
    """sup_x |P[X <= x] - Phi(x)| for a discrete law or a sample."""
    if isinstance(data, DiscreteDistribution):
        value, loc = _sup_gap(data)
        return DistanceResult(value, "exact", n=n, location=loc)
    samples = np.asarray(data, dtype=float).ravel()
    if samples.size == 0:
        raise ValueError("empty sample")
    value, loc = _sup_gap(empirical_distribution(samples))
    return DistanceResult(
        value, "empirical", n=n, level=level, half_width=dkw_half_width(samples.size, level),
        samples=int(samples.size), seed=seed, location=loc,
    )


# ---------------------------------------------------------------------------
# row sums


def _groups(row: Sequence[DiscreteDistribution]) -> list[tuple[DiscreteDistribution, int]]:
    """Runs of identical consecutive entries as (law, multiplicity)."""
    out: list[list] = []
    for d in row:
        if out and (out[-1][0] is d or out[-1][0].same_as(d, atol=0.0)):
            out[-1][1] += 1
        else:
            out.append([d, 1])
    return [(d, m) for d, m in out]


def _example_groups(n: int) -> list[tuple[int, int]]:
    # example rows: entry 1 has two atoms, every other entry four distinct ones
    return [(2, 1)] + [(4, 1)] * (n - 1)


def exact_cost(spec: ArraySpec, n: int) -> tuple[float, float]:
    """(bound on the final atom count, total atom pairs formed) of the left fold.

    A run of m identical entries with d atoms has at most C(m + d - 1, d - 1)
    distinct sums, which bounds the merged size inside the run.
    """
    if spec.kind == "example_alpha":
        groups = _example_groups(n)
    else:
        groups = [(len(d), m) for d, m in _groups(build_row(spec, n))]
    size, work = 1, 0
    for d, m in groups:
        base = size
        for j in range(1, m + 1):
            pairs = size * d
            if pairs > ATOM_CAP or work > WORK_CAP:
                return math.inf, math.inf
            work += pairs
            size = min(pairs, base * math.comb(j + d - 1, d - 1))
    return size, work


def exact_feasible(spec: ArraySpec, n: int, cap: int = ATOM_CAP) -> bool:
    size, work = exact_cost(spec, n)
    return size <= cap and work <= WORK_CAP


def exact_row_sum(row: Sequence[DiscreteDistribution], cap: int = ATOM_CAP) -> DiscreteDistribution:
    total = DiscreteDistribution.point_mass(0.0)
    for d in row:
        total = convolve(total, d, cap=cap)
    return total


def row_sum_dist(spec: ArraySpec, n: int, method: str | MonteCarlo = "exact", cap: int = ATOM_CAP):
    """Exact law (``method='exact'``) or Monte-Carlo sample of the row-n sum."""
    if method == "exact":
        return exact_row_sum(build_row(spec, n), cap)
    if isinstance(method, MonteCarlo):
        return sample_row_sum(spec, n, method)
    raise ValueError(f"unknown method {method!r}")


def _example_block(alpha: float, n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m draws of an example-family row sum.

    Entry k >= 2 is large (+-sqrt(k)/s_n) with probability beta/k. The set of
    large entries is drawn per dyadic range [L, 2L) by geometric skipping at
    rate beta/L and thinning by L/k; all remaining entries contribute a
    Rademacher sum, drawn as a binomial.
    """
    beta = alpha / (1 - alpha)
    s = math.sqrt(s_squared(alpha, n))
    big_sum = np.zeros(m)
    big_count = np.zeros(m, dtype=np.int64)
    lo = 2
    while lo <= n:
        hi = min(2 * lo - 1, n)
        pbar = beta / lo
        pos = lo - 1 + rng.geometric(pbar, size=m)
        idx = np.flatnonzero(pos <= hi)
        while idx.size:
            k = pos[idx]
            accept = rng.random(idx.size) * k < lo
            signs = np.where(rng.random(idx.size) < 0.5, -1.0, 1.0)
            hit = idx[accept]
            big_sum[hit] += signs[accept] * np.sqrt(k[accept])
            big_count[hit] += 1
            pos[idx] += rng.geometric(pbar, size=idx.size)
            idx = idx[pos[idx] <= hi]
        lo *= 2
    small = n - big_count
    small_sum = 2 * rng.binomial(small, 0.5) - small
    return (small_sum + big_sum) / s


def _group_laws(row: Sequence[DiscreteDistribution]) -> list[tuple[DiscreteDistribution, int]]:
    """Collapse runs of identical entries into their exact sum law when small."""
    laws = []
    for d, m in _groups(row):
        if m > 1 and math.comb(m + len(d) - 1, len(d) - 1) <= GROUP_POWER_CAP:
            laws.append((exact_row_sum([d] * m), 1))
        else:
            laws.append((d, m))
    return laws


def _generic_block(laws, m: int, rng: np.random.Generator) -> np.ndarray:
    total = np.zeros(m)
    comp = np.zeros(m)
    for d, mult in laws:
        for _ in range(mult):
            kahan_add(total, comp, _inverse_cdf(d, rng.random(m)))
    return total


def sample_row_sum(spec: ArraySpec, n: int, mc: MonteCarlo) -> np.ndarray:
    """``mc.samples`` draws of the row-n sum; reproducible for fixed (seed, n)."""
    if mc.samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = [mc.block] * (mc.samples // mc.block)
    if mc.samples % mc.block:
        sizes.append(mc.samples % mc.block)

    if spec.kind == "example_alpha" and mc.sampler == "auto":
        def work(b):
            return _example_block(spec.alpha, n, sizes[b], make_rng(mc.seed, n, b))
    else:
        laws = _group_laws(build_row(spec, n))

        def work(b):
            return _generic_block(laws, sizes[b], make_rng(mc.seed, n, b))

    workers = mc.workers or default_workers()
    if workers > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(work, range(len(sizes))))
    else:
        blocks = [work(b) for b in range(len(sizes))]
    return np.concatenate(blocks)


def sample_digest(samples: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(samples, dtype="<f8").tobytes()).hexdigest()


# ---------------------------------------------------------------------------
# curves


@dataclass(frozen=True)
class CurvePolicy:
    """Exact below the atom cap, Monte Carlo above (``method='auto'``)."""

    method: str = "auto"  # "auto" | "exact" | "mc"
    mc: MonteCarlo = field(default_factory=MonteCarlo)
    cap: int = ATOM_CAP
    level: float = DEFAULT_LEVEL

    def describe(self) -> dict:
        return {
            "method": self.method, "samples": self.mc.samples, "seed": self.mc.seed,
            "block": self.mc.block, "sampler": self.mc.sampler, "atom_cap": self.cap,
            "level": self.level, "generator": GENERATOR_NAME,
        }


def distance_at(spec: ArraySpec, n: int, policy: CurvePolicy = CurvePolicy()) -> DistanceResult:
    use_exact = policy.method == "exact" or (policy.method == "auto" and exact_feasible(spec, n, policy.cap))
    if use_exact:
        return k_distance(row_sum_dist(spec, n, "exact", policy.cap), n=n)
    samples = sample_row_sum(spec, n, policy.mc)
    return k_distance(samples, n=n, seed=policy.mc.seed, level=policy.level)


def k_curve(spec: ArraySpec, n_list: Sequence[int], policy: CurvePolicy = CurvePolicy()) -> list[DistanceResult]:
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise ValueError("n_list must be strictly increasing")
    return [distance_at(spec, int(n), policy) for n in n_list]


def plateau_estimate(curve: Sequence[DistanceResult]) -> tuple[float, float]:
    """(max value, its band half-width) over the last third of a curve."""
    tail = tail_third(list(curve))
    best = max(tail, key=lambda r: r.value)
    return best.value, best.half_width or 0.0
