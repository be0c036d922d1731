"""
Closed-form gauges.

Each builtin is a concave increasing function with value 0 at 0, so it is subadditive and
defines a translation-invariant metric on the line. Evaluation and the monotone inverse are
exposed per builtin id; ``gaugeline.gauge`` wraps them into :class:`~gaugeline.gauge.Gauge`.
"""

import logging as logger
import math
from functools import lru_cache
from typing import Any, Callable

import numpy as np
from scipy.integrate import quad

from gaugeline.config import NumericConf
from gaugeline.errors import DomainError

EX3_INFLECTION = math.exp(-1.5)
EX3_SCALE = (2.0 / 3.0) ** 1.5
EX3_SLOPE = math.exp(1.5) / 2.0

DIM1_KNEE = 0.5
LOG2 = math.log(2.0)

EX4_DEFAULT_U0 = 0.5
EX4_FLOOR = 1e-300


# power gauges


def _power_exponent(params: dict[str, Any]) -> float:
    p = float(params.get("p", 1.0))
    if p < 1.0:
        raise DomainError(f"power gauge needs p >= 1 to be subadditive, got {p}")
    return p


def _power(x: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return np.power(x, 1.0 / _power_exponent(params))


def _power_inverse(r: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return np.power(r, _power_exponent(params))


# ex3: min of the log branch and its tangent at the inflection point


def ex3_log_branch(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt(-1.0 / np.log(x))
    out = np.where((x > 0) & (x < 1), out, np.inf)
    return np.where(x == 0, 0.0, out)


def ex3_affine_branch(x: np.ndarray) -> np.ndarray:
    return EX3_SCALE * (EX3_SLOPE * np.asarray(x, dtype=float) + 1.0)


@lru_cache(maxsize=8)
def ex3_crossover(step: float | None = None) -> float:
    """Smallest grid point of (0, 1) where the affine branch is not above the log branch."""
    step = step or NumericConf.GRID_STEP
    grid = np.arange(1, int(1.0 / step)) * step
    below = np.nonzero(ex3_affine_branch(grid) <= ex3_log_branch(grid))[0]
    crossover = float(grid[below[0]])
    logger.debug(f"ex3 crossover at {crossover} (inflection {EX3_INFLECTION})")
    return crossover


def _ex3(x: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return np.minimum(ex3_log_branch(x), ex3_affine_branch(x))


def _ex3_inverse(r: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    r_cross = float(ex3_affine_branch(ex3_crossover()))
    with np.errstate(divide="ignore", over="ignore"):
        log_inverse = np.exp(-1.0 / np.square(r))
    affine_inverse = (r / EX3_SCALE - 1.0) / EX3_SLOPE
    out = np.where(r <= r_cross, log_inverse, affine_inverse)
    return np.where(r == 0, 0.0, out)


# ex4: concave gauge squeezed between sqrt and cbrt, touching both infinitely often


@lru_cache(maxsize=8)
def ex4_sequences(u0: float = EX4_DEFAULT_U0) -> tuple[np.ndarray, np.ndarray]:
    """
    Tangent abscissae and cube-root vertices of the ex4 construction.

    Returns ``(a, u)``: the gauge follows the tangent to sqrt at ``a[n]**2`` between the
    vertices ``u[n+1]**3`` and ``u[n]**3``, where it meets the cube root.
    """
    if not 0.0 < u0 < 1.0:
        raise DomainError(f"ex4 start vertex must lie in (0, 1), got {u0}")
    tangents, vertices = [], [u0]
    while True:
        u = vertices[-1]
        a = u * u / (1.0 + math.sqrt(1.0 - u))
        tangents.append(a)
        # left root of u^3 - 2 a u + a^2 = 0, the right one being u itself
        nxt = (2.0 * a * a / u) / (u + math.sqrt(u * u + 4.0 * a * a / u))
        if nxt**3 < EX4_FLOOR:
            break
        vertices.append(nxt)
    return np.array(tangents), np.array(vertices)


@lru_cache(maxsize=8)
def ex4_knots(u0: float, x_max: float) -> tuple[np.ndarray, np.ndarray]:
    tangents, vertices = ex4_sequences(u0)
    # tangent whose left intersection with the cube root is the first vertex
    a_top = u0 * (1.0 + math.sqrt(1.0 - u0))
    u_top = (-u0 + math.sqrt(u0 * u0 + 4.0 * a_top * a_top / u0)) / 2.0
    slope = (1.0 - u_top) / (1.0 - u_top**3)
    right = max(x_max, 1.0)
    xs = np.concatenate(
        [[0.0], vertices[::-1] ** 3, [u_top**3, 1.0, right]]
    )
    ys = np.concatenate([[0.0], vertices[::-1], [u_top, 1.0, 1.0 + slope * (right - 1.0)]])
    if right == 1.0:
        xs, ys = xs[:-1], ys[:-1]
    return xs, ys


def ex4_pinned_points(u0: float = EX4_DEFAULT_U0) -> tuple[np.ndarray, np.ndarray]:
    """Points where the gauge equals sqrt (first array) and cbrt (second array)."""
    tangents, vertices = ex4_sequences(u0)
    return tangents**2, vertices**3


def _ex4(x: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    xs, ys = ex4_knots(float(params.get("u0", EX4_DEFAULT_U0)), float(params["x_max"]))
    return np.interp(x, xs, ys)


def _ex4_inverse(r: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    xs, ys = ex4_knots(float(params.get("u0", EX4_DEFAULT_U0)), float(params["x_max"]))
    return np.interp(r, ys, xs)


# dim1: inverse given by the logarithmic integral for x < 1/2, linear afterwards


def _li_integrand(s: float, a: float) -> float:
    return math.exp(-s) / (a + s)


def _li(lo: float, hi: float) -> float:
    """
    -int_lo^hi dt / log t for 0 <= lo < hi < 1.

    With t = hi e^{-s} the integrand is e^{-s} / (a + s), a = -log hi, smooth on [0, oo).
    """
    a = -math.log(hi)
    span = math.inf if lo <= 0 else math.log(hi / lo)
    value, _ = quad(
        _li_integrand,
        0.0,
        span,
        args=(a,),
        epsabs=0.0,
        epsrel=NumericConf.QUAD_REL_TOL,
        limit=200,
    )
    return hi * value


@lru_cache(maxsize=1)
def dim1_head() -> float:
    """The inverse of the dim1 gauge at the knee, -int_0^{1/2} dt/log t."""
    return _li(0.0, DIM1_KNEE)


def dim1_inverse_scalar(v: float) -> float:
    if v <= 0:
        return 0.0
    if v < DIM1_KNEE:
        return _li(0.0, v)
    return dim1_head() + (v - DIM1_KNEE) / LOG2


@lru_cache(maxsize=1)
def _dim1_table() -> tuple[np.ndarray, np.ndarray]:
    levels = np.concatenate(
        [np.geomspace(1e-300, 1e-2, 6000, endpoint=False), np.geomspace(1e-2, DIM1_KNEE, 2000)]
    )
    pieces = [_li(0.0, float(levels[0]))]
    pieces += [_li(float(lo), float(hi)) for lo, hi in zip(levels[:-1], levels[1:])]
    preimages = np.cumsum(pieces)
    logger.debug(f"dim1 table built with {levels.size} levels, head {preimages[-1]}")
    return np.log(preimages), np.log(levels)


def _dim1(x: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    log_pre, log_lev = _dim1_table()
    head = dim1_head()
    with np.errstate(divide="ignore"):
        lx = np.log(np.clip(x, np.exp(log_pre[0]), head))
    inner = np.exp(np.interp(lx, log_pre, log_lev))
    # below the table the gauge is treated as linear through its first entry
    tiny = x * math.exp(log_lev[0] - log_pre[0])
    out = np.where(x < math.exp(log_pre[0]), tiny, inner)
    return np.where(x > head, DIM1_KNEE + (x - head) * LOG2, out)


def _dim1_inverse(r: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return np.vectorize(dim1_inverse_scalar, otypes=[float])(r)


_Closed = Callable[[np.ndarray, dict[str, Any]], np.ndarray]

_REGISTRY: dict[str, tuple[_Closed, _Closed]] = {
    "euclidean": (lambda x, _: np.asarray(x, dtype=float), lambda r, _: np.asarray(r, dtype=float)),
    "power": (_power, _power_inverse),
    "sqrt": (lambda x, _: _power(x, {"p": 2.0}), lambda r, _: _power_inverse(r, {"p": 2.0})),
    "cbrt": (lambda x, _: _power(x, {"p": 3.0}), lambda r, _: _power_inverse(r, {"p": 3.0})),
    "ex3": (_ex3, _ex3_inverse),
    "ex4_instance": (_ex4, _ex4_inverse),
    "dim1": (_dim1, _dim1_inverse),
}

CLOSED_FORM_IDS = frozenset(_REGISTRY)


def _lookup(builtin_id: str) -> tuple[_Closed, _Closed]:
    try:
        return _REGISTRY[builtin_id]
    except KeyError as exc:
        raise DomainError(f"unknown closed-form gauge '{builtin_id}'") from exc


def closed_form(builtin_id: str, x: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return _lookup(builtin_id)[0](x, params)


def closed_form_inverse(builtin_id: str, r: np.ndarray, params: dict[str, Any]) -> np.ndarray:
    return _lookup(builtin_id)[1](r, params)
