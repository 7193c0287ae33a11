"""Finite discrete distributions with exact convolution, plus the standard
normal reference law."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import AtomCapExceeded, DistributionError
from .numerics import compensated_sum

MERGE_TOL = 1e-12
MASS_TOL = 1e-12
ATOM_CAP = 2**24

GENERATOR_NAME = f"numpy.random.PCG64/SeedSequence (numpy {np.__version__})"


def make_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    """PCG64 stream for ``seed``; ``spawn_key`` selects an independent substream."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(spawn_key))))


def normal_cdf(x):
    """Standard normal CDF; accurate to full relative precision in both tails."""
    return special.ndtr(x)


def normal_sf(x):
    return special.ndtr(np.negative(x))


def normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


class StandardNormal:
    """The reference law of all Kolmogorov comparisons."""

    cdf = staticmethod(normal_cdf)
    sf = staticmethod(normal_sf)
    pdf = staticmethod(normal_pdf)

    @staticmethod
    def sample(count: int, seed: int) -> np.ndarray:
        return make_rng(seed).standard_normal(count)


STANDARD_NORMAL = StandardNormal()


def _merge(atoms: np.ndarray, probs: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray]:
    keep = probs != 0.0
    atoms, probs = atoms[keep], probs[keep]
    if atoms.size == 0:
        raise DistributionError("distribution has no atom with positive probability")
    order = np.argsort(atoms, kind="stable")
    atoms, probs = atoms[order], probs[order]
    starts = np.flatnonzero(np.concatenate(([True], np.diff(atoms) > tol)))
    if starts.size == atoms.size:
        return atoms, probs
    merged_p = np.add.reduceat(probs, starts)
    merged_a = np.add.reduceat(atoms * probs, starts) / merged_p
    # a group's weighted mean must stay inside the group
    lo = atoms[starts]
    hi = atoms[np.concatenate((starts[1:] - 1, [atoms.size - 1]))]
    merged_a = np.clip(merged_a, lo, hi)
    return merged_a, merged_p


@dataclass(frozen=True, eq=False)
class DiscreteDistribution:
    """Finitely supported law: strictly increasing ``atoms`` with ``probs``.

    Build through :meth:`from_atoms`, which sorts, coalesces atoms closer than
    ``MERGE_TOL`` and validates the probabilities.
    """

    atoms: np.ndarray
    probs: np.ndarray

    @classmethod
    def from_atoms(cls, atoms, probs, merge_tol: float = MERGE_TOL) -> "DiscreteDistribution":
        a = np.asarray(atoms, dtype=float).ravel()
        p = np.asarray(probs, dtype=float).ravel()
        if a.shape != p.shape:
            raise DistributionError(f"{a.size} atoms but {p.size} probabilities")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(p))):
            raise DistributionError("atoms and probabilities must be finite")
        if np.any(p < 0):
            bad = int(np.flatnonzero(p < 0)[0])
            raise DistributionError(f"negative probability {p[bad]!r} at atom {a[bad]!r}")
        mass = compensated_sum(p)
        if abs(mass - 1.0) > MASS_TOL:
            raise DistributionError(f"probabilities sum to {mass!r}, not 1")
        a, p = _merge(a, p, merge_tol)
        return cls._trusted(a, p)

    @classmethod
    def _trusted(cls, atoms: np.ndarray, probs: np.ndarray) -> "DiscreteDistribution":
        atoms.setflags(write=False)
        probs.setflags(write=False)
        return cls(atoms, probs)

    @classmethod
    def point_mass(cls, c: float = 0.0) -> "DiscreteDistribution":
        return cls._trusted(np.array([float(c)]), np.array([1.0]))

    @classmethod
    def symmetric(cls, magnitudes, weights) -> "DiscreteDistribution":
        """Law putting ``weights[i] / 2`` on each of ``±magnitudes[i]``."""
        m = np.asarray(magnitudes, dtype=float)
        w = np.asarray(weights, dtype=float) / 2
        return cls.from_atoms(np.concatenate((-m, m)), np.concatenate((w, w)))

    def __len__(self) -> int:
        return self.atoms.size

    def mean(self) -> float:
        return compensated_sum(self.atoms * self.probs)

    def second_moment(self) -> float:
        return compensated_sum(self.atoms**2 * self.probs)

    def variance(self) -> float:
        m = self.mean()
        return compensated_sum((self.atoms - m) ** 2 * self.probs)

    def same_as(self, other: "DiscreteDistribution", atol: float = 1e-12) -> bool:
        return (
            len(self) == len(other)
            and np.allclose(self.atoms, other.atoms, rtol=0, atol=atol)
            and np.allclose(self.probs, other.probs, rtol=0, atol=atol)
        )

    def to_dict(self) -> dict:
        return {
            "atoms": [f"{a:.17g}" for a in self.atoms.tolist()],
            "probs": [f"{p:.17g}" for p in self.probs.tolist()],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, obj: dict) -> "DiscreteDistribution":
        try:
            atoms = [float(a) for a in obj["atoms"]]
            probs = [float(p) for p in obj["probs"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise DistributionError(f"malformed distribution object: {exc}") from None
        return cls.from_atoms(atoms, probs)

    @classmethod
    def from_json(cls, text: str) -> "DiscreteDistribution":
        return cls.from_dict(json.loads(text))

    def __repr__(self) -> str:
        if len(self) <= 8:
            body = ", ".join(f"{a:.6g}: {p:.6g}" for a, p in zip(self.atoms, self.probs))
            return f"DiscreteDistribution({{{body}}})"
        return f"DiscreteDistribution(<{len(self)} atoms on [{self.atoms[0]:.4g}, {self.atoms[-1]:.4g}]>)"


def convolve(
    d1: DiscreteDistribution,
    d2: DiscreteDistribution,
    cap: int = ATOM_CAP,
    merge_tol: float = MERGE_TOL,
) -> DiscreteDistribution:
    """Law of the sum of independent variables with laws ``d1`` and ``d2``."""
    size = len(d1) * len(d2)
    if size > cap:
        raise AtomCapExceeded(
            f"convolution would produce {size} atom pairs (cap {cap}); use Monte Carlo (method='mc')"
        )
    atoms = np.add.outer(d1.atoms, d2.atoms).ravel()
    probs = np.multiply.outer(d1.probs, d2.probs).ravel()
    a, p = _merge(atoms, probs, merge_tol)
    return DiscreteDistribution._trusted(a, p)


def cdf_pair(d: DiscreteDistribution, x: float) -> tuple[float, float]:
    """``(P[X <= x], P[X < x])``."""
    below = int(np.searchsorted(d.atoms, x, side="left"))
    upto = int(np.searchsorted(d.atoms, x, side="right"))
    f_minus = compensated_sum(d.probs[:below])
    f = f_minus + compensated_sum(d.probs[below:upto])
    return min(f, 1.0), min(f_minus, 1.0)


def cumulative(d: DiscreteDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Vectors ``F(a)`` and ``F(a-)`` over all atoms ``a``."""
    f = np.cumsum(d.probs)
    # renormalise the running sum so the last value is exactly the total mass
    f = np.minimum(f / f[-1], 1.0)
    f_minus = np.concatenate(([0.0], f[:-1]))
    return f, f_minus


def sample(d: DiscreteDistribution, count: int, seed: int, *, rng: np.random.Generator | None = None) -> np.ndarray:
    """``count`` i.i.d. draws by inverse CDF. Identical seeds give identical arrays."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if rng is None:
        rng = make_rng(seed)
    return _inverse_cdf(d, rng.random(count))


def _inverse_cdf(d: DiscreteDistribution, u: np.ndarray) -> np.ndarray:
    f, _ = cumulative(d)
    idx = np.searchsorted(f, u, side="right")
    np.minimum(idx, len(d) - 1, out=idx)
    return d.atoms[idx]
