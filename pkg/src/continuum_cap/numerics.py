"""Special functions and small deterministic solvers.

Everything here is scalar, pure and deterministic: the same inputs always
produce the same bits, which keeps CSV goldens stable.

Guaranteed ranges are the ones the capacity formulas need (incomplete gamma
with ``a`` in (1, 4] and ``x`` in [0, 50], Kummer's function with ``a = 1``);
outside them the routines are best-effort.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "QuadratureSpec",
    "RootBracket",
    "IntegrationError",
    "OutOfRangeError",
    "StepUnderflowError",
    "SeriesDivergenceError",
    "lower_incomplete_gamma",
    "upper_incomplete_gamma",
    "kummer_1f1",
    "integrate",
    "bisect_monotone",
    "solve_ode",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300


class IntegrationError(ArithmeticError):
    """Adaptive quadrature ran out of subdivisions.

    The best estimate and its error bound are kept so callers can decide
    whether a partially converged value is still usable.
    """

    def __init__(self, message: str, value: float, error: float):
        super().__init__(f"{message} (estimate={value!r}, error={error!r})")
        self.value = value
        self.error = error


class OutOfRangeError(ValueError):
    """The bisection target lies outside the image of the bracket."""


class StepUnderflowError(ArithmeticError):
    """The ODE step size collapsed below floating-point resolution."""


class SeriesDivergenceError(ArithmeticError):
    """A power series did not meet its stopping criterion."""


# --------------------------------------------------------------------------
# incomplete gamma


def _gamma_series(a: float, x: float, rel_tol: float, max_terms: int) -> float:
    # gamma(a, x) = x^a e^-x sum_n x^n / (a (a+1) ... (a+n))
    term = 1.0 / a
    total = term
    ap = a
    for _ in range(max_terms):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * rel_tol:
            return total * math.exp(-x + a * math.log(x))
    raise SeriesDivergenceError(f"incomplete gamma series did not converge for a={a}, x={x}")


def _gamma_cfrac(a: float, x: float, rel_tol: float, max_terms: int) -> float:
    # Gamma(a, x) by the Legendre continued fraction, modified Lentz.
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, max_terms + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < rel_tol:
            return h * math.exp(-x + a * math.log(x))
    raise SeriesDivergenceError(f"incomplete gamma continued fraction did not converge for a={a}, x={x}")


def lower_incomplete_gamma(a: float, x: float) -> float:
    """gamma(a, x) = integral of t^(a-1) e^-t over [0, x].

    Series for ``x < a + 1``, continued fraction for the complementary tail
    otherwise. Large ``x`` saturates at Gamma(a).
    """
    if not a > 0:
        raise ValueError(f"lower_incomplete_gamma requires a > 0, got {a}")
    if x < 0 or math.isnan(x):
        raise ValueError(f"lower_incomplete_gamma requires x >= 0, got {x}")
    if x == 0:
        return 0.0
    full = math.gamma(a)
    if x < a + 1.0:
        return _gamma_series(a, x, 1e-16, 10_000)
    if x > a + 750.0:
        # e^-x underflows, the tail is below double resolution
        return full
    return full - _gamma_cfrac(a, x, 1e-16, 10_000)


def upper_incomplete_gamma(a: float, x: float) -> float:
    """Gamma(a, x) = integral of t^(a-1) e^-t over [x, inf)."""
    if not a > 0:
        raise ValueError(f"upper_incomplete_gamma requires a > 0, got {a}")
    if x < 0 or math.isnan(x):
        raise ValueError(f"upper_incomplete_gamma requires x >= 0, got {x}")
    if x == 0:
        return math.gamma(a)
    if x < a + 1.0:
        return math.gamma(a) - _gamma_series(a, x, 1e-16, 10_000)
    if x > a + 750.0:
        return 0.0
    return _gamma_cfrac(a, x, 1e-16, 10_000)


# --------------------------------------------------------------------------
# Kummer 1F1


def kummer_1f1(a: float, b: float, x: float, *, max_terms: int = 20_000) -> float:
    """Confluent hypergeometric function 1F1(a; b; x) by direct power series.

    Negative ``x`` goes through Kummer's transformation so the summed series
    has no cancellation when ``a`` and ``b`` are positive.
    """
    if b <= 0 and float(b).is_integer():
        raise ValueError(f"kummer_1f1 undefined for non-positive integer b={b}")
    if x == 0:
        return 1.0
    if x < 0 and a > 0 and b > a:
        return math.exp(x) * kummer_1f1(b - a, b, -x, max_terms=max_terms)
    term = 1.0
    total = 1.0
    for n in range(max_terms):
        term *= (a + n) / (b + n) * x / (n + 1)
        total += term
        if term == 0.0:
            return total
        # ratio test: stop once the tail is below 1e-15 relative and shrinking
        if abs(term) <= 1e-15 * abs(total) and abs((a + n + 1) * x / ((b + n + 1) * (n + 2))) < 1.0:
            return total
    raise SeriesDivergenceError(f"1F1({a}; {b}; {x}) series did not converge in {max_terms} terms")


# --------------------------------------------------------------------------
# adaptive Gauss-Kronrod quadrature


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-13
    rel_tol: float = 1e-11
    max_depth: int = 50

    def __post_init__(self):
        if not (self.abs_tol > 0 and self.rel_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


# 15-point Kronrod extension of the 7-point Gauss rule (QUADPACK qk15).
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
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
_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
_WEIGHTS_K = np.concatenate([_WK[:-1], _WK[::-1]])
_WEIGHTS_G = np.zeros(15)
# Gauss nodes are the odd-indexed Kronrod abscissae (0.949.., 0.741.., 0.405.., 0)
_WEIGHTS_G[[1, 3, 5]] = _WG[:3]
_WEIGHTS_G[7] = _WG[3]
_WEIGHTS_G[[9, 11, 13]] = _WG[2::-1]


def _gk15(f, lo: float, hi: float, vectorized: bool = False) -> tuple[float, float]:
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    if vectorized:
        values = np.asarray(f(mid + half * _NODES), dtype=float)
    else:
        values = np.array([f(mid + half * t) for t in _NODES], dtype=float)
    kronrod = half * float(_WEIGHTS_K @ values)
    gauss = half * float(_WEIGHTS_G @ values)
    return kronrod, abs(kronrod - gauss)


def _transformed(f, lo, hi, singularity):
    """Map the integrand so algebraic endpoint singularities become smooth.

    An integrand behaving like (t - lo)^p near ``lo`` is rewritten with
    t = lo + (hi - lo) u^m, m = 1 / (1 + p), which cancels the singular factor;
    the same is done mirrored at ``hi``. With both ends singular the interval
    is split at its midpoint.
    """
    p_lo, p_hi = singularity
    pieces = []
    if p_lo is not None and p_hi is not None:
        mid = 0.5 * (lo + hi)
        return _transformed(f, lo, mid, (p_lo, None)) + _transformed(f, mid, hi, (None, p_hi))
    if p_lo is not None:
        if p_lo <= -1:
            raise ValueError(f"endpoint exponent must exceed -1, got {p_lo}")
        m = 1.0 / (1.0 + p_lo)
        width = hi - lo

        def g(u, f=f, m=m, width=width, lo=lo):
            return f(lo + width * u**m) * width * m * u ** (m - 1.0)

        pieces.append((g, 0.0, 1.0))
    elif p_hi is not None:
        if p_hi <= -1:
            raise ValueError(f"endpoint exponent must exceed -1, got {p_hi}")
        m = 1.0 / (1.0 + p_hi)
        width = hi - lo

        def g(u, f=f, m=m, width=width, hi=hi):
            return f(hi - width * u**m) * width * m * u ** (m - 1.0)

        pieces.append((g, 0.0, 1.0))
    else:
        pieces.append((f, lo, hi))
    return pieces


def integrate(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    spec: Optional[QuadratureSpec] = None,
    *,
    singularity: tuple[Optional[float], Optional[float]] = (None, None),
    breakpoints: Sequence[float] = (),
    vectorized: bool = False,
) -> float:
    """Adaptive Gauss-Kronrod (7, 15) quadrature of ``f`` over [lo, hi].

    Intervals are bisected worst-first until the summed error estimate meets
    ``max(abs_tol, rel_tol * |I|)``. An interval that has been halved
    ``spec.max_depth`` times is frozen; if the tolerance still is not met an
    :class:`IntegrationError` carrying the best estimate is raised.

    ``singularity`` gives the exponents p of (t - lo)^p and (hi - t)^p
    behaviour at each end (``None`` for a regular end); the integrand is
    then evaluated through a smoothing change of variables. ``breakpoints``
    are interior points where ``f`` has kinks. With ``vectorized=True`` the
    integrand is called once per panel with an array of the 15 nodes.
    """
    spec = spec or QuadratureSpec()
    if not lo < hi:
        if lo == hi:
            return 0.0
        raise ValueError(f"integrate requires lo < hi, got [{lo}, {hi}]")
    cuts = [lo, *sorted(b for b in breakpoints if lo < b < hi), hi]
    pieces = []
    for k, (a, b) in enumerate(zip(cuts[:-1], cuts[1:])):
        sing = (singularity[0] if k == 0 else None, singularity[1] if k == len(cuts) - 2 else None)
        pieces.extend(_transformed(f, a, b, sing))

    # work list entries: (error, value, a, b, g, depth)
    active = []
    done_value = 0.0
    done_error = 0.0
    for g, a, b in pieces:
        v, e = _gk15(g, a, b, vectorized)
        active.append([e, v, a, b, g, 0])
    for _ in range(100_000):
        total = done_value + sum(item[1] for item in active)
        err = done_error + sum(item[0] for item in active)
        if err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        splittable = [item for item in active if item[5] < spec.max_depth]
        if not splittable:
            break
        worst = max(splittable, key=lambda item: item[0])
        active.remove(worst)
        _, _, a, b, g, depth = worst
        m = 0.5 * (a + b)
        for u, w in ((a, m), (m, b)):
            v, e = _gk15(g, u, w, vectorized)
            if e <= 50 * _EPS * abs(v) or w - u <= 4 * _EPS * max(abs(u), abs(w), 1.0):
                # converged to round-off, never touch it again
                done_value += v
                done_error += e
            else:
                active.append([e, v, u, w, g, depth + 1])
    total = done_value + sum(item[1] for item in active)
    err = done_error + sum(item[0] for item in active)
    raise IntegrationError("adaptive quadrature exceeded max_depth", total, err)


# --------------------------------------------------------------------------
# bisection


@dataclass(frozen=True)
class RootBracket:
    lo: float
    hi: float
    tol: float = 1e-12
    xtol: float = 0.0

    def __post_init__(self):
        if not self.lo < self.hi:
            raise ValueError(f"bracket needs lo < hi, got [{self.lo}, {self.hi}]")
        if not self.tol > 0:
            raise ValueError("bracket tolerance must be positive")


def bisect_monotone(
    f: Callable[[float], float],
    target: float,
    bracket: RootBracket,
    *,
    max_iter: int = 200,
) -> float:
    """Solve f(x) = target for monotone ``f`` on ``bracket`` by bisection.

    Works for increasing and decreasing ``f``. Stops once
    |f(x) - target| <= tol * max(1, |target|) and the bracket is narrower
    than ``bracket.xtol``.
    """
    lo, hi = bracket.lo, bracket.hi
    f_lo = f(lo) - target
    f_hi = f(hi) - target
    scale = bracket.tol * max(1.0, abs(target))
    if abs(f_lo) <= scale and bracket.xtol <= 0:
        return lo
    if abs(f_hi) <= scale and bracket.xtol <= 0:
        return hi
    if f_lo * f_hi > 0:
        raise OutOfRangeError(
            f"target {target!r} outside [{f_lo + target!r}, {f_hi + target!r}] on [{lo}, {hi}]"
        )
    increasing = f_hi > f_lo
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        x = 0.5 * (lo + hi)
        r = f(x) - target
        if abs(r) <= scale and hi - lo <= bracket.xtol:
            return x
        if (r < 0) == increasing:
            lo = x
        else:
            hi = x
        if hi - lo <= 2 * _EPS * max(abs(lo), abs(hi)):
            break
    x = 0.5 * (lo + hi)
    if abs(f(x) - target) <= scale:
        return x
    raise OutOfRangeError(f"bisection stalled at x={x!r} without meeting tolerance")


# --------------------------------------------------------------------------
# ODE


# Dormand-Prince 5(4) tableau.
_DP_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_DP_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_DP_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_DP_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_DP_E = _DP_B5 - _DP_B4


def solve_ode(
    rhs: Callable[[float, np.ndarray], np.ndarray],
    x0: float,
    y0,
    x1: float,
    step_tol: float = 1e-10,
    *,
    first_step: Optional[float] = None,
    max_steps: int = 1_000_000,
):
    """Integrate y' = rhs(x, y) from x0 to x1 with adaptive Dormand-Prince 5(4).

    The local error per step is held below ``step_tol * max(1, |y|)``
    (mixed absolute/relative). Returns y(x1) with the shape of ``y0``;
    scalars come back as floats.
    """
    scalar = np.ndim(y0) == 0
    y = np.atleast_1d(np.asarray(y0, dtype=float)).copy()
    if x1 == x0:
        return float(y[0]) if scalar else y
    direction = 1.0 if x1 > x0 else -1.0
    span = abs(x1 - x0)
    h = first_step if first_step is not None else span * 1e-3
    h = min(abs(h), span)
    x = x0
    k = np.empty((7, y.size))
    k[0] = np.atleast_1d(rhs(x, y))
    for _ in range(max_steps):
        remaining = abs(x1 - x)
        if remaining <= 4 * _EPS * max(abs(x), abs(x1), 1.0):
            break
        h = min(h, remaining)
        hs = direction * h
        for i in range(1, 7):
            yi = y + hs * (np.asarray(_DP_A[i]) @ k[:i])
            k[i] = np.atleast_1d(rhs(x + _DP_C[i] * hs, yi))
        y_new = y + hs * (_DP_B5 @ k)
        err_vec = hs * (_DP_E @ k)
        scale = step_tol * np.maximum(1.0, np.maximum(np.abs(y), np.abs(y_new)))
        err = float(np.max(np.abs(err_vec) / scale))
        if err <= 1.0:
            x = x1 if h == remaining else x + hs
            y = y_new
            k[0] = k[6]  # first-same-as-last
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            h *= factor
        else:
            h *= max(0.1, 0.9 * err ** -0.25)
            if h <= 8 * _EPS * max(abs(x), 1.0):
                raise StepUnderflowError(f"ODE step underflow at x={x!r}")
    else:
        raise StepUnderflowError(f"ODE did not reach x1={x1!r} in {max_steps} steps")
    return float(y[0]) if scalar else y
