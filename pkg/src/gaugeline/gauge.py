"""
Gauges h and the translation-invariant distances d(x, y) = h(|x - y|) they define.

A :class:`Gauge` is an immutable value: a closed-form builtin, a sampled table, or the exact
anchor representation produced by the envelope solver. Every kind carries its samples on the
uniform grid ``0, grid_step, ..., x_max`` so that grid scans work uniformly.
"""

import json
import logging as logger
import math
import pathlib
from enum import StrEnum
from typing import Any, Optional

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_serializer,
    field_validator,
    model_validator,
)

from gaugeline import builtins
from gaugeline.config import NumericConf
from gaugeline.errors import DomainError, RangeError


class GaugeKind(StrEnum):
    CLOSED_FORM_BUILTIN = "closed_form_builtin"
    SAMPLED_TABLE = "sampled_table"
    ENVELOPE_RESULT = "envelope_result"


def grid_size(x_max: float, step: float) -> int:
    return int(math.floor(x_max / step + 1e-9)) + 1


class Gauge(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: GaugeKind
    grid_step: float = Field(gt=0)
    x_max: float = Field(gt=0)
    values: np.ndarray
    builtin_id: Optional[str] = None
    params: dict[str, Any] = Field(default_factory=dict)
    anchors_x: Optional[np.ndarray] = None
    anchors_cost: Optional[np.ndarray] = None
    notes: list[str] = Field(default_factory=list)

    @field_validator("values", "anchors_x", "anchors_cost", mode="before")
    @classmethod
    def as_float_array(cls, value):
        if value is None:
            return None
        array = np.array(value, dtype=float)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_samples(self):
        values = self.values
        expected = grid_size(self.x_max, self.grid_step)
        if values.shape != (expected,):
            raise ValueError(
                f"values must hold {expected} grid samples, got shape {values.shape}"
            )
        if values[0] != 0.0:
            raise ValueError("a gauge vanishes at 0")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("gauge samples must be finite and nonnegative")
        if self.kind is GaugeKind.CLOSED_FORM_BUILTIN and self.builtin_id is None:
            raise ValueError("closed-form gauges need a builtin_id")
        if self.kind is GaugeKind.ENVELOPE_RESULT and (
            self.anchors_x is None or self.anchors_cost is None
        ):
            raise ValueError("envelope gauges need their anchors")
        return self

    @property
    def grid(self) -> np.ndarray:
        return np.arange(self.values.size) * self.grid_step

    @property
    def label(self) -> str:
        return self.builtin_id or self.kind.value

    @field_serializer("values", "anchors_x", "anchors_cost")
    def serialize_array(self, array: Optional[np.ndarray]):
        return None if array is None else array.tolist()


class PositivityCheck(BaseModel):
    passed: bool
    witness: Optional[float] = None


class SubadditivityCheck(BaseModel):
    passed: bool
    witness: Optional[tuple[float, float]] = None
    excess: float
    tolerance: float
    exhaustive: bool
    pairs_checked: int


class LadderCheck(BaseModel):
    """(ladder point, measured value) samples of a scanned property."""

    passed: bool
    samples: list[tuple[float, float]]
    witness: Optional[float] = None


class GaugeValidationReport(BaseModel):
    gauge: str
    positivity: PositivityCheck
    subadditivity: SubadditivityCheck
    continuity_at_zero: LadderCheck
    separation: LadderCheck
    properness: LadderCheck
    monotone: bool

    @property
    def all_passed(self) -> bool:
        return all(
            check.passed
            for check in (
                self.positivity,
                self.subadditivity,
                self.continuity_at_zero,
                self.separation,
                self.properness,
            )
        )

    @property
    def failures(self) -> list[str]:
        names = ["positivity", "subadditivity", "continuity_at_zero", "separation", "properness"]
        return [name for name in names if not getattr(self, name).passed]


# evaluation


def envelope_eval(
    anchors_x: np.ndarray, anchors_cost: np.ndarray, x: np.ndarray
) -> np.ndarray:
    """
    D(x) = min over anchors p of C(p) + |x - p|.

    Anchors are sorted and mutually non-dominated, so only the two anchors enclosing x
    can realize the minimum.
    """
    x = np.asarray(x, dtype=float)
    left = np.searchsorted(anchors_x, x, side="right") - 1
    left = np.clip(left, 0, anchors_x.size - 1)
    from_left = anchors_cost[left] + np.abs(x - anchors_x[left])
    right = np.minimum(left + 1, anchors_x.size - 1)
    from_right = anchors_cost[right] + np.abs(anchors_x[right] - x)
    return np.minimum(from_left, from_right)


def evaluate(g: Gauge, x):
    """h(x) for a scalar or an array of points in [0, x_max]."""
    arr = np.asarray(x, dtype=float)
    if np.any(arr < 0) or np.any(arr > g.x_max * (1 + 1e-12)) or np.any(np.isnan(arr)):
        raise DomainError(f"gauge '{g.label}' is defined on [0, {g.x_max}]")
    match g.kind:
        case GaugeKind.CLOSED_FORM_BUILTIN:
            out = builtins.closed_form(g.builtin_id, arr, g.params)
        case GaugeKind.ENVELOPE_RESULT:
            out = envelope_eval(g.anchors_x, g.anchors_cost, arr)
        case _:
            out = np.interp(arr, g.grid, g.values)
    return float(out) if np.ndim(x) == 0 else np.asarray(out)


def is_monotone(g: Gauge) -> bool:
    if g.kind is GaugeKind.CLOSED_FORM_BUILTIN:
        return True
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        return bool(np.all(tent_peaks(g)[0] >= g.x_max))
    return bool(np.all(np.diff(g.values) >= 0))


def tent_peaks(g: Gauge) -> tuple[np.ndarray, np.ndarray]:
    """Positions and values of the local maxima between consecutive envelope anchors."""
    px, pc = g.anchors_x, g.anchors_cost
    positions = (px[:-1] + px[1:] + pc[1:] - pc[:-1]) / 2.0
    heights = (pc[:-1] + pc[1:] + px[1:] - px[:-1]) / 2.0
    return positions, heights


def interval_min(g: Gauge, a: float, b: float) -> float:
    """min of h over [a, b] ⊂ [0, x_max]."""
    a, b = min(a, b), max(a, b)
    ends = evaluate(g, np.array([a, b]))
    if is_monotone(g):
        return float(ends[0])
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        inside = (g.anchors_x >= a) & (g.anchors_x <= b)
        return float(min(ends.min(), np.min(g.anchors_cost[inside], initial=np.inf)))
    grid = g.grid
    inside = (grid >= a) & (grid <= b)
    return float(min(ends.min(), np.min(g.values[inside], initial=np.inf)))


def interval_max(g: Gauge, a: float, b: float) -> float:
    """max of h over [a, b] ⊂ [0, x_max]."""
    a, b = min(a, b), max(a, b)
    ends = evaluate(g, np.array([a, b]))
    if is_monotone(g):
        return float(ends[1])
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        positions, heights = tent_peaks(g)
        inside = (positions >= a) & (positions <= b)
        return float(max(ends.max(), np.max(heights[inside], initial=-np.inf)))
    grid = g.grid
    inside = (grid >= a) & (grid <= b)
    return float(max(ends.max(), np.max(g.values[inside], initial=-np.inf)))


# validation


def _ladder(g: Gauge) -> np.ndarray:
    top = g.grid[-1]
    points = g.grid_step * 10.0 ** np.arange(0, 32)
    points = points[points < top]
    return np.append(points, top)


def _subadditivity(g: Gauge, pair_budget: int) -> SubadditivityCheck:
    values = g.values
    n = values.size
    # sums of grid points are grid points, so only rounding needs slack
    tolerance = NumericConf.SUB_ABS_TOL * max(1.0, float(np.max(values)))
    exhaustive = n * (n + 1) // 2 <= pair_budget
    if exhaustive:
        idx = np.arange(n)
    else:
        k = max(2, int(math.isqrt(pair_budget)))
        idx = np.unique(
            np.concatenate(
                [np.linspace(0, n - 1, k).round().astype(int), np.arange(min(32, n))]
            )
        )
        logger.info(
            f"subadditivity of '{g.label}' checked on a stratified subsample of {idx.size} points"
        )
    total = np.add.outer(idx, idx)
    valid = total <= n - 1
    target = values[np.where(valid, total, 0)]
    excess = np.where(valid, target - np.add.outer(values[idx], values[idx]), -np.inf)
    worst = np.unravel_index(np.argmax(excess), excess.shape)
    worst_excess = float(excess[worst])
    passed = worst_excess <= tolerance
    witness = None
    if not passed:
        witness = (float(g.grid[idx[worst[0]]]), float(g.grid[idx[worst[1]]]))
    return SubadditivityCheck(
        passed=passed,
        witness=witness,
        excess=worst_excess,
        tolerance=tolerance,
        exhaustive=exhaustive,
        pairs_checked=int(valid.sum()),
    )


def validate(g: Gauge, pair_budget: Optional[int] = None) -> GaugeValidationReport:
    """
    Scans the metric properties of d_g on the grid.

    Violations are reported with a witness evaluable by :func:`evaluate`, never raised.
    """
    pair_budget = pair_budget or NumericConf.PAIR_BUDGET
    if pair_budget < 1:
        raise DomainError("pair_budget must be at least 1")
    grid, values = g.grid, g.values

    nonpositive = np.nonzero(values[1:] <= 0)[0]
    positivity = PositivityCheck(
        passed=nonpositive.size == 0,
        witness=float(grid[nonpositive[0] + 1]) if nonpositive.size else None,
    )

    ladder = _ladder(g)
    cut = np.searchsorted(grid, ladder, side="right")
    running_max = np.maximum.accumulate(values)
    moduli = running_max[cut - 1]
    continuity = LadderCheck(
        passed=bool(np.all(np.diff(moduli) >= 0) and moduli[0] < moduli[-1]),
        samples=list(zip(ladder.tolist(), moduli.tolist())),
    )

    suffix_min = np.minimum.accumulate(values[::-1])[::-1]
    floors = suffix_min[np.searchsorted(grid, ladder, side="left").clip(max=grid.size - 1)]
    bad = np.nonzero(floors <= 0)[0]
    separation = LadderCheck(
        passed=bad.size == 0,
        samples=list(zip(ladder.tolist(), floors.tolist())),
        witness=float(ladder[bad[0]]) if bad.size else None,
    )

    radii = np.array([0.25, 0.5, 0.9]) * values[-1]
    extents = []
    for r in radii:
        below = np.nonzero(values < r)[0]
        extents.append(float(grid[below[-1]]) if below.size else 0.0)
    unbounded = [r for r, e in zip(radii, extents) if e >= grid[-1]]
    properness = LadderCheck(
        passed=bool(not unbounded and values[-1] > 0),
        samples=list(zip(radii.tolist(), extents)),
        witness=float(unbounded[0]) if unbounded else None,
    )

    report = GaugeValidationReport(
        gauge=g.label,
        positivity=positivity,
        subadditivity=_subadditivity(g, pair_budget),
        continuity_at_zero=continuity,
        separation=separation,
        properness=properness,
        monotone=bool(np.all(np.diff(values) >= 0)),
    )
    if not report.all_passed:
        logger.warning(f"gauge '{g.label}' fails {report.failures}")
    return report


# inverse and regularization


def inverse_max(g: Gauge, r: float) -> float:
    """
    x_r = max{x : h(x) = r}, the right end of the closed ball of radius r.

    Exact for builtins and envelopes, linear interpolation between grid samples otherwise.
    """
    if r < 0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    top = float(np.max(g.values))
    if r > top * (1 + 1e-12):
        raise RangeError(f"radius {r} exceeds sup of '{g.label}' ({top})")
    at_end = float(g.values[-1])
    if at_end < r and g.kind is not GaugeKind.SAMPLED_TABLE:
        at_end = evaluate(g, g.x_max)
    if at_end < r:
        raise RangeError(f"ball of radius {r} reaches beyond the domain of '{g.label}'")
    match g.kind:
        case GaugeKind.CLOSED_FORM_BUILTIN:
            out = float(builtins.closed_form_inverse(g.builtin_id, np.float64(r), g.params))
            return min(out, g.x_max)
        case GaugeKind.ENVELOPE_RESULT:
            usable = g.anchors_cost <= r
            reach = g.anchors_x[usable] + (r - g.anchors_cost[usable])
            return float(min(np.max(reach), g.x_max))
    values, grid = g.values, g.grid
    k = int(np.nonzero(values <= r)[0][-1])
    if k == values.size - 1:
        return float(grid[-1])
    lo, hi = values[k], values[k + 1]
    return float(grid[k] + (r - lo) / (hi - lo) * g.grid_step)


def monotone_regularization(g: Gauge) -> Gauge:
    """Running maximum of g: the gauge of the distance inf{diam S : S connected ∋ x, y}."""
    if is_monotone(g):
        return g
    values = np.maximum.accumulate(g.values)
    return Gauge(
        kind=GaugeKind.SAMPLED_TABLE,
        grid_step=g.grid_step,
        x_max=g.grid[-1],
        values=values,
        params={"regularized_from": g.label},
        notes=[*g.notes, f"monotone regularization of '{g.label}'"],
    )


# construction


def sampled_gauge(values, step: float, notes: Optional[list[str]] = None) -> Gauge:
    values = np.asarray(values, dtype=float)
    return Gauge(
        kind=GaugeKind.SAMPLED_TABLE,
        grid_step=step,
        x_max=(values.size - 1) * step,
        values=values,
        notes=notes or [],
    )


def closed_form_gauge(
    builtin_id: str,
    params: Optional[dict[str, Any]] = None,
    grid_step: Optional[float] = None,
    x_max: Optional[float] = None,
) -> Gauge:
    step = grid_step or NumericConf.GRID_STEP
    x_max = x_max or NumericConf.X_MAX
    params = dict(params or {})
    notes = []
    if builtin_id == "ex4_instance":
        params.setdefault("u0", builtins.EX4_DEFAULT_U0)
        params["x_max"] = x_max
        notes.append("one admissible ex4 instance; the construction only asserts existence")
    grid = np.arange(grid_size(x_max, step)) * step
    values = builtins.closed_form(builtin_id, grid, params)
    return Gauge(
        kind=GaugeKind.CLOSED_FORM_BUILTIN,
        builtin_id=builtin_id,
        params=params,
        grid_step=step,
        x_max=x_max,
        values=values,
        notes=notes,
    )


def make_builtin(
    builtin_id: str,
    params: Optional[dict[str, Any]] = None,
    grid_step: Optional[float] = None,
    x_max: Optional[float] = None,
    check: bool = True,
) -> Gauge:
    """
    Builds one of the named gauges; envelope families delegate to :mod:`gaugeline.envelope`.

    With ``check`` the result is run through :func:`validate` and failures are logged.
    """
    params = dict(params or {})
    if builtin_id in builtins.CLOSED_FORM_IDS:
        g = closed_form_gauge(builtin_id, params, grid_step, x_max)
    elif builtin_id in ("bcp_envelope", "nonlc_envelope"):
        from gaugeline import envelope

        g = envelope.envelope_builtin(builtin_id, params, x_max=x_max).gauge
    elif builtin_id == "custom":
        raise DomainError("custom gauges are loaded from a gauge definition file")
    else:
        raise DomainError(f"unknown builtin '{builtin_id}'")
    if check:
        validate(g)
    return g


class GaugeDefinition(BaseModel):
    """JSON gauge definition file."""

    kind: GaugeKind
    builtin_id: Optional[str] = None
    params: dict[str, Any] = Field(default_factory=dict)
    grid_step: Optional[float] = Field(default=None, gt=0)
    x_max: Optional[float] = Field(default=None, gt=0)
    step: Optional[float] = Field(default=None, gt=0)
    values: Optional[list[float]] = None

    @model_validator(mode="after")
    def check_kind(self):
        if self.kind is GaugeKind.SAMPLED_TABLE and (self.step is None or not self.values):
            raise ValueError("a sampled_table definition needs 'step' and 'values'")
        if self.kind is not GaugeKind.SAMPLED_TABLE and self.builtin_id is None:
            raise ValueError(f"a {self.kind.value} definition needs 'builtin_id'")
        return self

    def build(self) -> Gauge:
        if self.kind is GaugeKind.SAMPLED_TABLE:
            return sampled_gauge(self.values, self.step, notes=["loaded from definition file"])
        return make_builtin(self.builtin_id, self.params, self.grid_step, self.x_max)


def load_gauge(path: pathlib.Path | str) -> Gauge:
    text = pathlib.Path(path).read_text(encoding="utf-8")
    return GaugeDefinition.model_validate_json(text).build()


def gauge_definition(g: Gauge) -> GaugeDefinition:
    """Sampled-table definition reproducing g on its grid."""
    return GaugeDefinition(
        kind=GaugeKind.SAMPLED_TABLE,
        step=g.grid_step,
        values=g.values.tolist(),
        params={"source": g.label, **json.loads(json.dumps(g.params, default=str))},
    )


def save_gauge(g: Gauge, path: pathlib.Path | str) -> pathlib.Path:
    """Writes g as a sampled-table definition that :func:`load_gauge` reads back."""
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(gauge_definition(g).model_dump_json(indent=2), encoding="utf-8")
    logger.info(f"gauge '{g.label}' saved to {path}")
    return path
