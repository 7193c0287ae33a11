"""Shared numeric kernels: adaptive Gauss-Kronrod quadrature, Brent root
finding and compensated summation.

Integrands are called with numpy arrays of nodes and must return an array of
the same shape.
"""

from __future__ import annotations

import heapq
import math
import sys
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError, RootBracketError

DEFAULT_TOL = 1e-10
ROUNDOFF_FACTOR = 50.0  # as in QUADPACK
EPS = sys.float_info.epsilon

# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# full symmetric node/weight vectors
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_gauss_pos = [1, 3, 5]
for _i, _w in zip(_gauss_pos, _WG[:3]):
    _GWEIGHTS[_i] = _w
    _GWEIGHTS[14 - _i] = _w
_GWEIGHTS[7] = _WG[3]


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


@dataclass(frozen=True)
class RootResult:
    root: float
    bracket: tuple[float, float]
    residual: float
    iterations: int = 0


def _gk15(g: Callable[[np.ndarray], np.ndarray], a: float, b: float) -> tuple[float, float, float]:
    """(Kronrod estimate, |Kronrod - Gauss|, Kronrod estimate of the integral of |g|)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    vals = np.asarray(g(mid + half * _NODES), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise QuadratureError(
            f"non-finite integrand value on [{a!r}, {b!r}]", best_estimate=math.nan, location=(a, b)
        )
    kron = half * float(np.dot(_KWEIGHTS, vals))
    gauss = half * float(np.dot(_GWEIGHTS, vals))
    return kron, abs(kron - gauss), abs(half) * float(np.dot(_KWEIGHTS, np.abs(vals)))


def _transform(f, lo: float, hi: float):
    """Map an (extended) interval onto a finite one.

    Returns the transformed integrand and the finite limits.
    """
    if math.isfinite(lo) and math.isfinite(hi):
        return f, lo, hi
    if math.isinf(lo) and math.isinf(hi):
        # x = t / (1 - t^2), t in (-1, 1)
        def g(t):
            d = 1.0 - t * t
            return f(t / d) * (1.0 + t * t) / (d * d)
        return g, -1.0, 1.0
    if math.isinf(hi):
        # x = lo + t / (1 - t), t in [0, 1)
        def g(t):
            d = 1.0 - t
            return f(lo + t / d) / (d * d)
        return g, 0.0, 1.0
    # x = hi - t / (1 - t)
    def g(t):
        d = 1.0 - t
        return f(hi - t / d) / (d * d)
    return g, 0.0, 1.0


def integrate(
    f: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    *,
    rel_tol: float = 0.0,
    points: Sequence[float] = (),
    max_intervals: int = 4000,
) -> QuadratureResult:
    """Globally adaptive G7-K15 quadrature of ``f`` over ``[lo, hi]``.

    Infinite endpoints are handled by a rational change of variables. Known
    kinks or jumps can be passed in ``points``; each becomes an initial split.
    Refinement also stops once the error estimate reaches the roundoff floor
    ROUNDOFF_FACTOR * eps * int |f|, below which no target can be met.
    Raises :class:`QuadratureError` (carrying the best estimate) when the
    error target is not met within ``max_intervals`` panels.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 1)
    sign = 1.0
    if lo > hi:
        lo, hi, sign = hi, lo, -1.0

    inner = sorted(p for p in points if lo < p < hi)
    if inner:
        # integrate piecewise so that every breakpoint lands on a panel edge
        edges = [lo, *inner, hi]
        parts = [integrate(f, a, b, tol / len(edges), rel_tol=rel_tol, max_intervals=max_intervals)
                 for a, b in zip(edges[:-1], edges[1:])]
        return QuadratureResult(
            sign * math.fsum(p.value for p in parts),
            sum(p.error_estimate for p in parts),
            sum(p.evaluations for p in parts),
        )

    g, a, b = _transform(f, lo, hi)
    value, err, mass = _gk15(g, a, b)
    evals = 15
    heap = [(-err, a, b, value, err, mass)]
    total, total_err, total_mass = value, err, mass
    floor = ROUNDOFF_FACTOR * EPS
    while total_err > max(tol, rel_tol * abs(total), floor * total_mass):
        if len(heap) >= max_intervals:
            raise QuadratureError(
                f"quadrature did not reach tol={tol:g} on [{lo!r}, {hi!r}] "
                f"(estimate {total!r}, error {total_err:.3g})",
                best_estimate=sign * total,
                location=(lo, hi),
            )
        _, pa, pb, pv, pe, pm_ = heapq.heappop(heap)
        pm = 0.5 * (pa + pb)
        if not (pa < pm < pb):
            # interval exhausted at double precision; keep its contribution
            heapq.heappush(heap, (0.0, pa, pb, pv, 0.0, pm_))
            total_err -= pe
            continue
        lv, le, lm = _gk15(g, pa, pm)
        rv, re, rm = _gk15(g, pm, pb)
        evals += 30
        heapq.heappush(heap, (-le, pa, pm, lv, le, lm))
        heapq.heappush(heap, (-re, pm, pb, rv, re, rm))
        total_err += le + re - pe
        total += lv + rv - pv
        total_mass += lm + rm - pm_
    total = math.fsum(item[3] for item in heap)
    total_err = sum(item[4] for item in heap)
    return QuadratureResult(sign * total, total_err, evals)


def find_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float = DEFAULT_TOL,
    *,
    max_iter: int = 200,
) -> RootResult:
    """Brent's method on a sign-changing bracket.

    Terminates when the bracket is narrower than ``tol`` (or the floating
    point resolution at the root, whichever is larger).
    """
    a, b = float(lo), float(hi)
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return RootResult(a, (a, a), 0.0)
    if fb == 0.0:
        return RootResult(b, (b, b), 0.0)
    if math.copysign(1.0, fa) == math.copysign(1.0, fb):
        raise RootBracketError(
            f"no sign change on [{a!r}, {b!r}]: f(lo)={fa!r}, f(hi)={fb!r}", lo=a, hi=b, f_lo=fa, f_hi=fb
        )
    c, fc = a, fa
    d = e = b - a
    for it in range(1, max_iter + 1):
        if (fb > 0) == (fc > 0):
            c, fc = a, fa
            d = e = b - a
        if abs(fc) < abs(fb):
            a, b, c = b, c, b
            fa, fb, fc = fb, fc, fb
        width = abs(c - b)
        if fb == 0.0:
            return RootResult(b, (b, b), 0.0, it)
        if width <= max(tol, 4 * EPS * abs(b)):
            return RootResult(b, (min(b, c), max(b, c)), fb, it)
        tol1 = 2 * EPS * abs(b) + 0.25 * tol
        m = 0.5 * (c - b)
        if abs(e) >= tol1 and abs(fa) > abs(fb):
            s = fb / fa
            if a == c:
                p = 2 * m * s
                q = 1 - s
            else:
                q = fa / fc
                r = fb / fc
                p = s * (2 * m * q * (q - r) - (b - a) * (r - 1))
                q = (q - 1) * (r - 1) * (s - 1)
            if p > 0:
                q = -q
            else:
                p = -p
            if 2 * p < min(3 * m * q - abs(tol1 * q), abs(e * q)):
                e, d = d, p / q
            else:
                d = e = m
        else:
            d = e = m
        a, fa = b, fb
        if abs(d) > tol1:
            b += d
        else:
            b += math.copysign(tol1, m)
        fb = float(f(b))
    raise RootBracketError(
        f"root finding did not converge in {max_iter} iterations", lo=min(b, c), hi=max(b, c), f_lo=fb, f_hi=fc
    )


def scan_bracket(f: Callable[[float], float], lo: float, hi: float, step: float) -> tuple[float, float]:
    """First sub-interval of a uniform grid on which ``f`` changes sign."""
    n = int(round((hi - lo) / step))
    xs = [lo + i * step for i in range(n + 1)]
    vals = [float(f(x)) for x in xs]
    for x0, x1, v0, v1 in zip(xs, xs[1:], vals, vals[1:]):
        if v0 == 0.0 or (v0 > 0) != (v1 > 0):
            return x0, x1
    table = ", ".join(f"({x:.2f}, {v:.3e})" for x, v in zip(xs, vals))
    raise RootBracketError(f"no sign change scanning [{lo}, {hi}] step {step}: {table}",
                           lo=lo, hi=hi, f_lo=vals[0], f_hi=vals[-1])


def compensated_sum(values) -> float:
    """Correctly rounded sum (Shewchuk's algorithm via ``math.fsum``)."""
    return math.fsum(np.asarray(values, dtype=float).ravel().tolist())


def kahan_add(total: np.ndarray, comp: np.ndarray, x: np.ndarray) -> None:
    """Elementwise Kahan update of ``total`` in place; ``comp`` holds the carry."""
    y = x - comp
    t = total + y
    comp[...] = (t - total) - y
    total[...] = t
