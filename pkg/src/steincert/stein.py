"""Solutions of the Stein equation E h(Z) - h(x) = x f(x) - f'(x) for the
standard normal Z, with numerical checks of their derivative bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy import special

from .distributions import DiscreteDistribution, normal_cdf, normal_pdf, normal_sf
from .errors import ConsistencyError, QuadratureError
from .numerics import compensated_sum, integrate
from .triangular_array import ArraySpec, build_row, feller_max, lindeberg_tail

SQRT_2PI = math.sqrt(2 * math.pi)
STEIN_TOL = 1e-12
DEFAULT_GRID = np.round(np.arange(-800, 801) * 0.01, 10)


@dataclass(frozen=True, eq=False)
class TestFunction:
    """A bounded test function h with (where defined) derivatives up to order 3.

    ``norms`` holds sup-norms of h', h'', h''' when they are known in closed form.
    """

    __test__ = False  # not a pytest class

    kind: str
    params: dict
    h: Callable
    h1: Callable | None = None
    h2: Callable | None = None
    h3: Callable | None = None
    breakpoints: tuple[float, ...] = ()
    norms: dict = field(default_factory=dict)
    expected_closed_form: float | None = None

    @classmethod
    def smoothstep(cls, z: float = 0.0, delta: float = 1.0) -> "TestFunction":
        """h(x) = 1 - Phi((x - z) / delta): strictly decreasing from 1 to 0."""
        if not delta > 0:
            raise ValueError("delta must be positive")
        z, d = float(z), float(delta)

        def u(x):
            return (np.asarray(x, dtype=float) - z) / d

        return cls(
            "smoothstep", {"z": z, "delta": d},
            h=lambda x: normal_sf(u(x)),
            h1=lambda x: -normal_pdf(u(x)) / d,
            h2=lambda x: u(x) * normal_pdf(u(x)) / d**2,
            h3=lambda x: (1 - u(x) ** 2) * normal_pdf(u(x)) / d**3,
            norms={
                "h1": 1 / (SQRT_2PI * d),
                "h2": math.exp(-0.5) / (SQRT_2PI * d**2),
                "h3": 1 / (SQRT_2PI * d**3),
            },
            expected_closed_form=float(normal_cdf(z / math.sqrt(1 + d * d))),
        )

    @classmethod
    def indicator(cls, z: float = 0.0) -> "TestFunction":
        """h = 1 on (-inf, z], 0 elsewhere."""
        z = float(z)
        return cls(
            "indicator", {"z": z},
            h=lambda x: (np.asarray(x, dtype=float) <= z).astype(float),
            h1=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
            breakpoints=(z,),
            expected_closed_form=float(normal_cdf(z)),
        )

    @classmethod
    def constant(cls, c: float = 1.0) -> "TestFunction":
        c = float(c)
        zero = lambda x: np.zeros_like(np.asarray(x, dtype=float))  # noqa: E731
        return cls(
            "constant", {"c": c},
            h=lambda x: np.full_like(np.asarray(x, dtype=float), c),
            h1=zero, h2=zero, h3=zero,
            norms={"h1": 0.0, "h2": 0.0, "h3": 0.0},
            expected_closed_form=c,
        )

    @classmethod
    def custom(cls, h, h1=None, h2=None, h3=None, *, breakpoints=(), norms=None, name="custom") -> "TestFunction":
        return cls("custom", {"name": name}, h, h1, h2, h3, tuple(breakpoints), dict(norms or {}))

    def describe(self) -> dict:
        return {"kind": self.kind, **self.params}


@lru_cache(maxsize=256)
def _expected_by_quadrature(h: TestFunction) -> float:
    res = integrate(lambda t: h.h(t) * normal_pdf(t), -math.inf, math.inf, 1e-13, points=h.breakpoints)
    return res.value


def expected_value(h: TestFunction) -> float:
    """E[h(Z)], closed form when available, otherwise by quadrature."""
    if h.expected_closed_form is not None:
        return h.expected_closed_form
    return _expected_by_quadrature(h)


def expectation(h: TestFunction, d: DiscreteDistribution) -> float:
    """E[h(X)] for X with discrete law ``d``."""
    return compensated_sum(h.h(d.atoms) * d.probs)


@dataclass(frozen=True)
class SteinSolution:
    """f_h with its first two derivatives.

    f is the Gaussian-weighted integral of h - E h over the tail on the same
    side as x; after substituting t = x -+ u the weight is exp(-|x| u - u^2/2),
    which never overflows.
    """

    source: TestFunction
    expected_h: float
    tol: float = STEIN_TOL

    def f(self, x: float) -> float:
        h, eh = self.source.h, self.expected_h
        x = float(x)
        if x <= 0:
            pts = tuple(x - b for b in self.source.breakpoints if b < x)
            g = lambda u: (h(x - u) - eh) * np.exp(x * u - 0.5 * u * u)  # noqa: E731
            sign = 1.0
        else:
            pts = tuple(b - x for b in self.source.breakpoints if b > x)
            g = lambda u: (h(x + u) - eh) * np.exp(-x * u - 0.5 * u * u)  # noqa: E731
            sign = -1.0
        try:
            res = integrate(g, 0.0, math.inf, self.tol, points=pts)
        except QuadratureError as exc:
            raise QuadratureError(f"Stein solution at x={x!r}: {exc}", exc.best_estimate, x) from None
        return sign * res.value

    def evaluate(self, x: float) -> tuple[float, float, float]:
        """(f, f', f'') at x. f'' needs h' at x."""
        f = self.f(x)
        hx = float(self.source.h(x))
        f1 = x * f + hx - self.expected_h
        if self.source.h1 is None:
            f2 = math.nan
        else:
            f2 = f + x * f1 + float(self.source.h1(x))
        return f, f1, f2


    def f_prime(self, x: float) -> float:
        """f' by differentiating the integral representation under the integral
        sign, independently of the Stein equation. Needs h'."""
        h, h1, eh = self.source.h, self.source.h1, self.expected_h
        if h1 is None:
            raise ValueError("f_prime needs the derivative of h")
        x = float(x)
        if x <= 0:
            g = lambda u: (h1(x - u) + u * (h(x - u) - eh)) * np.exp(x * u - 0.5 * u * u)  # noqa: E731
            sign = 1.0
        else:
            g = lambda u: (h1(x + u) - u * (h(x + u) - eh)) * np.exp(-x * u - 0.5 * u * u)  # noqa: E731
            sign = -1.0
        return sign * integrate(g, 0.0, math.inf, self.tol).value


def solve(h: TestFunction, tol: float = STEIN_TOL) -> SteinSolution:
    return SteinSolution(h, expected_value(h), tol)


def stein_eval(h: TestFunction, x: float) -> tuple[float, float, float]:
    return solve(h).evaluate(x)


def indicator_solution(z: float, x):
    """Closed-form (f, f') for h = 1{. <= z}.

    exp(x^2/2) Phi(x) is written as erfcx(-x/sqrt2)/2, so the formula is
    stable for any |x|.
    """
    x = np.asarray(x, dtype=float)
    pz = float(normal_cdf(z))
    qz = float(normal_sf(z))
    left = x <= z
    f = np.where(
        left,
        SQRT_2PI * 0.5 * special.erfcx(-x / math.sqrt(2)) * qz,
        SQRT_2PI * 0.5 * special.erfcx(x / math.sqrt(2)) * pz,
    )
    f1 = x * f + left.astype(float) - pz
    if f.ndim == 0:
        return float(f), float(f1)
    return f, f1


# ---------------------------------------------------------------------------
# bound checks


@dataclass
class BoundSuiteReport:
    h: dict
    sup_f2: float | None
    bound_f2: float | None
    osc_f1: float
    grid: dict
    slack: float = 1e-9

    @property
    def f2_ok(self) -> bool:
        return self.bound_f2 is None or self.sup_f2 <= self.bound_f2 + self.slack

    @property
    def osc_ok(self) -> bool:
        return self.osc_f1 <= 1 + self.slack

    @property
    def passed(self) -> bool:
        return self.f2_ok and self.osc_ok

    def to_dict(self) -> dict:
        return {
            "h": self.h,
            "sup_f2": self.sup_f2,
            "bound_f2": self.bound_f2,
            "osc_f1": self.osc_f1,
            "grid": self.grid,
            "pass": self.passed,
        }


def _grid_info(grid: np.ndarray) -> dict:
    return {"lo": float(grid[0]), "hi": float(grid[-1]), "points": int(grid.size)}


def stein_residual(h: TestFunction, grid: Sequence[float]) -> float:
    """max over the grid of |f'(x) - x f(x) - (h(x) - E h)|, with f' computed
    independently of the equation."""
    sol = solve(h)
    worst = 0.0
    for x in np.asarray(grid, dtype=float):
        r = sol.f_prime(x) - x * sol.f(x) - (float(h.h(x)) - sol.expected_h)
        worst = max(worst, abs(r))
    return worst


def solution_on_grid(h: TestFunction, grid: Sequence[float]) -> np.ndarray:
    """Rows (x, f, f', f'') over ``grid``; the indicator uses its closed form."""
    grid = np.asarray(grid, dtype=float)
    if h.kind == "indicator":
        z = h.params["z"]
        f, f1 = indicator_solution(z, grid)
        f2 = f + grid * f1
        # one-sided value at the jump itself is dropped
        f2 = np.where(grid == z, np.nan, f2)
        return np.column_stack((grid, f, f1, f2))
    sol = solve(h)
    return np.array([(x, *sol.evaluate(x)) for x in grid])


def bound_suite(h: TestFunction, grid: Sequence[float] = DEFAULT_GRID) -> BoundSuiteReport:
    """Measure sup|f''| against 2 sup|h'| and the oscillation of f' against 1."""
    grid = np.asarray(grid, dtype=float)
    table = solution_on_grid(h, grid)
    f1, f2 = table[:, 2], table[:, 3]
    osc = float(np.max(f1) - np.min(f1))
    if h.kind == "indicator":
        # the second-derivative bound needs an absolutely continuous h
        return BoundSuiteReport(h.describe(), float(np.nanmax(np.abs(f2))), None, osc, _grid_info(grid))
    h1_norm = h.norms.get("h1")
    if h1_norm is None:
        h1_norm = float(np.max(np.abs(h.h1(grid))))
    return BoundSuiteReport(h.describe(), float(np.max(np.abs(f2))), 2 * h1_norm, osc, _grid_info(grid))


@dataclass(frozen=True)
class TaylorCheck:
    remainder: float
    bound: float
    order: int

    @property
    def holds(self) -> bool:
        return self.remainder <= self.bound + 1e-12


def taylor_check(fn: Callable[[float], Sequence[float]], a: float, x: float, *, norms: dict,
                 order: int = 2, strict: bool = True) -> TaylorCheck:
    """Compare a Taylor remainder with its sup-norm bound.

    ``fn(p)`` returns (F(p), F'(p), F''(p), ...). With ``order=2`` the bound is
    min(|F''| x^2, |F'''| |x|^3 / 6) using ``norms['d2']``, ``norms['d3']``;
    with ``order=1`` it is min(osc(F') |x|, |F''| x^2 / 2) using
    ``norms['osc1']``, ``norms['d2']``. Missing norms count as infinite.
    """
    at_a = fn(a)
    end = fn(a + x)[0]
    inf = math.inf
    if order == 2:
        poly = at_a[0] + at_a[1] * x + 0.5 * at_a[2] * x * x
        bound = min(norms.get("d2", inf) * x * x, norms.get("d3", inf) * abs(x) ** 3 / 6)
    elif order == 1:
        poly = at_a[0] + at_a[1] * x
        bound = min(norms.get("osc1", inf) * abs(x), 0.5 * norms.get("d2", inf) * x * x)
    else:
        raise ValueError("order must be 1 or 2")
    if x == 0:
        bound = 0.0
    res = TaylorCheck(abs(end - poly), bound, order)
    if strict and not res.holds:
        raise ConsistencyError(f"Taylor remainder {res.remainder!r} exceeds bound {res.bound!r} at a={a}, x={x}")
    return res


def derivative_stack(h: TestFunction) -> Callable[[float], tuple]:
    """(h, h', h'', h''') at a point, for use with :func:`taylor_check`."""
    return lambda p: tuple(float(g(p)) for g in (h.h, h.h1, h.h2, h.h3))



@lru_cache(maxsize=1)
def normal_abs_third_moment() -> float:
    """E|Z|^3 by quadrature."""
    return 2 * integrate(lambda t: t**3 * normal_pdf(t), 0.0, math.inf, 1e-13).value


def classical_bound(h: TestFunction, spec: ArraySpec, n: int, epsilon: float) -> float:
    """Third-order Taylor (Lindeberg replacement) bound on |E h(Z) - E h(S_n)|:

    |h'''| (E|Z|^3 max_k sigma_k + eps) / 6 + |h''| * sum_k E[xi^2; |xi| >= eps].
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon!r}")
    h2, h3 = h.norms.get("h2"), h.norms.get("h3")
    if h2 is None or h3 is None:
        raise ValueError("classical_bound needs closed-form sup norms of h'' and h'''")
    row = build_row(spec, n)
    sigma_max = math.sqrt(feller_max(row))
    return h3 * (normal_abs_third_moment() * sigma_max + epsilon) / 6 + h2 * lindeberg_tail(row, epsilon)
