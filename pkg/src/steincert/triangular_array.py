"""Rows of standard triangular arrays and their Lindeberg-type indices.

Two array families are supported: the alpha-parametrised example family,
whose k-th entry in row n takes the values +-1/s_n and +-sqrt(k)/s_n, and
explicit arrays given row by row as lists of discrete distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.special import roots_legendre

from .distributions import DiscreteDistribution
from .errors import SpecError, WeightError
from .numerics import compensated_sum, integrate

STA_TOL = 1e-10
DEFAULT_N_GRID = (100, 178, 316, 562, 1000, 1778, 3162, 5623, 10000, 17783, 31623, 56234, 100000)
DEFAULT_EPS_GRID = (0.2, 0.1, 0.05, 0.02, 0.01)

Row = list  # list[DiscreteDistribution]


# ---------------------------------------------------------------------------
# array specifications


@dataclass(frozen=True)
class ArraySpec:
    kind: str
    alpha: float | None = None
    rows: Mapping[int, Sequence[DiscreteDistribution]] | Callable[[int], Sequence[DiscreteDistribution]] | None = None
    label: str = ""

    @classmethod
    def example(cls, alpha: float) -> "ArraySpec":
        alpha = float(alpha)
        if not (0.0 < alpha < 1.0):
            raise SpecError(f"alpha must lie in (0, 1/2], got {alpha!r}")
        if alpha > 0.5:
            beta = alpha / (1 - alpha)
            k = next(k for k in range(1, 3) if 1 - beta / k < 0)
            raise SpecError(
                f"alpha={alpha!r} gives beta={beta:.6g} > 1: P[eta = 1/s_n] = (1 - beta/k)/2 is negative "
                f"first at (n, k) = (1, {k}); only 0 < alpha <= 1/2 is supported"
            )
        return cls("example_alpha", alpha=alpha, label=f"example(alpha={alpha:g})")

    @classmethod
    def explicit(cls, rows, label: str = "explicit") -> "ArraySpec":
        return cls("explicit", rows=rows, label=label)

    @classmethod
    def rademacher(cls) -> "ArraySpec":
        """Row n: n independent copies of +-1/sqrt(n); Lindeberg's condition holds."""
        return cls("explicit", rows=_rademacher_row, label="rademacher")

    @property
    def beta(self) -> float:
        return self.alpha / (1 - self.alpha)

    def summary(self) -> dict:
        out = {"kind": self.kind, "label": self.label}
        if self.kind == "example_alpha":
            out["alpha"] = self.alpha
        return out


def _rademacher_row(n: int) -> Row:
    d = DiscreteDistribution.symmetric([1 / math.sqrt(n)], [1.0])
    return [d] * n


@lru_cache(maxsize=None)
def harmonic(n: int) -> float:
    return math.fsum(1.0 / k for k in range(1, n + 1))


def s_squared(alpha: float, n: int) -> float:
    """Normalising constant s_n^2 = n + beta * sum_k (1 - 1/k)."""
    beta = alpha / (1 - alpha)
    return n + beta * (n - harmonic(n))


def _example_arrays(alpha: float, n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Atoms, probabilities and entry index of every atom of example row n."""
    beta = alpha / (1 - alpha)
    s = math.sqrt(s_squared(alpha, n))
    k = np.arange(2, n + 1, dtype=float)
    small = (1 - beta / k) / 2
    big = beta / k / 2
    atoms = np.concatenate(([-1 / s, 1 / s], -np.sqrt(k) / s, -np.ones_like(k) / s, np.ones_like(k) / s, np.sqrt(k) / s))
    probs = np.concatenate(([0.5, 0.5], big, small, small, big))
    index = np.concatenate(([1, 1], k, k, k, k)).astype(np.int64)
    return atoms, probs, index


def build_row(spec: ArraySpec, n: int) -> Row:
    """Entries of row ``n`` as discrete distributions, k = 1..n for the example family."""
    if n < 1:
        raise SpecError(f"row index must be >= 1, got {n}")
    if spec.kind == "example_alpha":
        beta = spec.beta
        s = math.sqrt(s_squared(spec.alpha, n))
        row = [DiscreteDistribution._trusted(np.array([-1 / s, 1 / s]), np.array([0.5, 0.5]))]
        for k in range(2, n + 1):
            r = math.sqrt(k) / s
            p_small = (1 - beta / k) / 2
            p_big = beta / k / 2
            row.append(DiscreteDistribution._trusted(
                np.array([-r, -1 / s, 1 / s, r]), np.array([p_big, p_small, p_small, p_big])
            ))
        return row
    if spec.kind == "explicit":
        src = spec.rows
        try:
            row = list(src(n) if callable(src) else src[n])
        except KeyError:
            raise SpecError(f"explicit array has no row n={n}") from None
        check_row(row, n)
        return row
    raise SpecError(f"unknown array kind {spec.kind!r}")


def _runs(row: Row) -> list[tuple[DiscreteDistribution, int]]:
    """Runs of the same entry object as (entry, length); rows often repeat one law."""
    out: list[list] = []
    for d in row:
        if out and out[-1][0] is d:
            out[-1][1] += 1
        else:
            out.append([d, 1])
    return [(d, c) for d, c in out]


def check_row(row: Row, n: int | None = None) -> None:
    """Raise :class:`SpecError` unless the row has zero means and unit total variance."""
    if not row:
        raise SpecError(f"row {n} is empty")
    k = 1
    moments = []
    for d, count in _runs(row):
        m = d.mean()
        if abs(m) > STA_TOL:
            raise SpecError(f"entry (n, k) = ({n}, {k}) has mean {m!r}")
        moments.extend([d.second_moment()] * count)
        k += count
    total = compensated_sum(moments)
    if abs(total - 1) > STA_TOL:
        raise SpecError(f"row {n} variances sum to {total!r}, not 1")


def row_arrays(spec: ArraySpec, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Concatenated atoms and probabilities of every entry in row ``n``."""
    if spec.kind == "example_alpha":
        atoms, probs, _ = _example_arrays(spec.alpha, n)
        return atoms, probs
    return _concat(build_row(spec, n))


def _concat(row: Row) -> tuple[np.ndarray, np.ndarray]:
    runs = _runs(row)
    return (np.concatenate([np.tile(d.atoms, c) for d, c in runs]),
            np.concatenate([np.tile(d.probs, c) for d, c in runs]))


def feller_max(row: Row) -> float:
    return max(d.second_moment() for d in row)


def _tail(atoms: np.ndarray, probs: np.ndarray, eps: float) -> float:
    if not eps > 0:
        raise ValueError(f"epsilon must be positive, got {eps!r}")
    mask = np.abs(atoms) >= eps
    return compensated_sum(atoms[mask] ** 2 * probs[mask])


def lindeberg_tail(row: Row, epsilon: float) -> float:
    """Sum over entries of E[xi^2; |xi| >= epsilon]."""
    return _tail(*_concat(row), epsilon)


def lindeberg_tail_limit(alpha: float, epsilon: float) -> float:
    """Large-n limit of the example family's Lindeberg sums at fixed epsilon."""
    beta = alpha / (1 - alpha)
    return max(alpha - beta * epsilon**2, 0.0)


# ---------------------------------------------------------------------------
# weight functions


_GL_NODES, _GL_WEIGHTS = roots_legendre(96)
_GL_NODES = 0.5 * (_GL_NODES + 1)
_GL_WEIGHTS = 0.5 * _GL_WEIGHTS
_PSI_DIRECT_MAX = 8.0


def psi_half(x):
    """psi(x) = 1 - int_0^1 exp(-(1 - s^2) x^2 / 2) ds, by quadrature in s.

    Written as int_0^1 -expm1(...) ds so small arguments do not cancel.
    """
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    flat, res = x.ravel(), out.ravel()
    near = flat <= _PSI_DIRECT_MAX
    if np.any(near):
        a = 0.5 * flat[near] ** 2
        res[near] = (-np.expm1(-np.multiply.outer(a, 1 - _GL_NODES**2))) @ _GL_WEIGHTS
    for i in np.flatnonzero(~near):
        a = 0.5 * flat[i] ** 2
        # the integrand is concentrated within ~1/a of s = 1
        res[i] = 1.0 - integrate(lambda s: np.exp(-a * (1 - s * s)), 0.0, 1.0, 1e-14,
                                 points=(max(0.0, 1 - 20 / a),)).value
    return out if out.ndim else float(out)


def phi_gamma(gamma: float):
    return lambda x: -np.expm1(-gamma * np.square(x))


@dataclass(frozen=True)
class WeightFunction:
    """A member of the admissible weight class: non-decreasing, [0, 1]-valued,
    vanishing at 0+ and strictly positive away from 0."""

    kind: str
    gamma: float | None = None
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = None
    _fn: Callable = field(default=None, repr=False, compare=False)

    @classmethod
    def phi(cls, gamma: float) -> "WeightFunction":
        if not gamma > 0:
            raise WeightError(f"gamma must be positive, got {gamma!r}")
        return cls("phi_gamma", gamma=float(gamma), _fn=phi_gamma(float(gamma)))

    @classmethod
    def psi_half(cls) -> "WeightFunction":
        return cls("psi_half", _fn=psi_half)

    @classmethod
    def custom(cls, xs: Sequence[float], ys: Sequence[float]) -> "WeightFunction":
        """Piecewise-linear weight through ``(xs, ys)``, constant beyond the last knot."""
        x = np.asarray(xs, dtype=float)
        y = np.asarray(ys, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise WeightError("custom weight needs matching 1-d knot and value arrays (>= 2 knots)")
        if x[0] != 0.0 or y[0] != 0.0:
            raise WeightError("custom weight must start at (0, 0)")
        if np.any(np.diff(x) <= 0):
            raise WeightError("knots must be strictly increasing")
        if np.any(np.diff(y) < 0):
            raise WeightError("weight must be non-decreasing")
        if np.any(y < 0) or np.any(y > 1):
            raise WeightError("weight values must lie in [0, 1]")
        if np.any(y[1:] <= 0):
            raise WeightError("weight must be strictly positive on (0, inf)")
        fn = lambda v: np.interp(np.abs(v), x, y)  # noqa: E731
        return cls("custom", table=(tuple(x.tolist()), tuple(y.tolist())), _fn=fn)

    def __call__(self, x):
        return self._fn(x)

    def describe(self) -> dict:
        if self.kind == "phi_gamma":
            return {"kind": "phi_gamma", "gamma": self.gamma}
        if self.kind == "custom":
            return {"kind": "custom", "xs": list(self.table[0]), "ys": list(self.table[1])}
        return {"kind": self.kind}


def relaxed_sum(atoms: np.ndarray, probs: np.ndarray, weight: WeightFunction) -> float:
    return compensated_sum(atoms**2 * probs * weight(np.abs(atoms)))


def relaxed_closed_form(alpha: float, gamma: float) -> float:
    """Relaxed index of the example family for weight 1 - exp(-gamma x^2)."""
    g = gamma * (1 - alpha)
    return alpha * (1 - (-math.expm1(-g)) / g)


def relaxed_limit(alpha: float, weight: WeightFunction) -> float:
    """Large-n limit of the example family's relaxed sums for any weight.

    Only the sqrt(k)/s_n atoms survive, and their Riemann sum tends to
    beta * int_0^{1 - alpha} w(sqrt(u)) du.
    """
    if weight.kind == "phi_gamma":
        return relaxed_closed_form(alpha, weight.gamma)
    beta = alpha / (1 - alpha)
    res = integrate(lambda u: weight(np.sqrt(u)), 0.0, 1 - alpha, 1e-12)
    return beta * res.value


# ---------------------------------------------------------------------------
# index reports


@dataclass
class IndexReport:
    index: str
    spec: dict
    grid: dict
    finite: list[dict]
    limit_estimate: float
    closed_form: float | None = None
    weight: dict | None = None

    @property
    def closed_form_gap(self) -> float | None:
        if self.closed_form is None:
            return None
        return abs(self.limit_estimate - self.closed_form)

    def value(self, n: int, epsilon: float | None = None) -> float:
        for row in self.finite:
            if row["n"] == n and row.get("epsilon") == epsilon:
                return row["value"]
        raise KeyError((n, epsilon))

    def to_dict(self) -> dict:
        out = {
            "kind": self.spec["kind"],
            "alpha": self.spec.get("alpha"),
            "index": self.index,
            "array": self.spec,
            "grid": self.grid,
            "finite": self.finite,
            "limit_estimate": self.limit_estimate,
            "closed_form": self.closed_form,
            "closed_form_gap": self.closed_form_gap,
        }
        if self.weight is not None:
            out["weight"] = self.weight
        return out


def tail_third(values: Sequence[float]) -> list[float]:
    """The last third (at least one element) of a grid-ordered sequence."""
    m = max(1, math.ceil(len(values) / 3))
    return list(values[-m:])


def _check_grids(n_grid: Sequence[int], eps_grid: Sequence[float] | None = None) -> None:
    if not n_grid:
        raise ValueError("n grid is empty")
    if any(b <= a for a, b in zip(n_grid, n_grid[1:])):
        raise ValueError("n grid must be strictly increasing")
    if eps_grid is not None:
        if not eps_grid:
            raise ValueError("epsilon grid is empty")
        if any(e <= 0 for e in eps_grid) or any(b >= a for a, b in zip(eps_grid, eps_grid[1:])):
            raise ValueError("epsilon grid must be positive and strictly decreasing")


def lin_index(
    spec: ArraySpec,
    epsilon_grid: Sequence[float] = DEFAULT_EPS_GRID,
    n_grid: Sequence[int] = DEFAULT_N_GRID,
) -> IndexReport:
    """Finite-n Lindeberg sums on an (n, epsilon) grid and the limsup/sup proxy.

    For each epsilon the limsup over n is proxied by the maximum over the last
    third of the n grid; the estimate is the largest such proxy over epsilon.
    """
    _check_grids(n_grid, epsilon_grid)
    finite = []
    by_eps: dict[float, list[float]] = {e: [] for e in epsilon_grid}
    for n in n_grid:
        atoms, probs = row_arrays(spec, n)
        for e in epsilon_grid:
            v = _tail(atoms, probs, e)
            by_eps[e].append(v)
            finite.append({"n": int(n), "epsilon": float(e), "value": v})
    limit = max(max(tail_third(vals)) for vals in by_eps.values())
    closed = spec.alpha if spec.kind == "example_alpha" else None
    return IndexReport(
        "lindeberg", spec.summary(), {"n": [int(n) for n in n_grid], "epsilon": [float(e) for e in epsilon_grid]},
        finite, limit, closed,
    )


def relaxed_index(spec: ArraySpec, weight: WeightFunction, n_grid: Sequence[int] = DEFAULT_N_GRID) -> IndexReport:
    """Finite-n relaxed Lindeberg sums for ``weight`` and their limsup proxy."""
    if not isinstance(weight, WeightFunction):
        raise WeightError("weight must be a WeightFunction")
    _check_grids(n_grid)
    finite = []
    for n in n_grid:
        atoms, probs = row_arrays(spec, n)
        finite.append({"n": int(n), "value": relaxed_sum(atoms, probs, weight)})
    limit = max(tail_third([r["value"] for r in finite]))
    closed = relaxed_limit(spec.alpha, weight) if spec.kind == "example_alpha" else None
    return IndexReport(
        "relaxed", spec.summary(), {"n": [int(n) for n in n_grid]}, finite, limit, closed, weight.describe()
    )
