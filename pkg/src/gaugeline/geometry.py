"""
Balls, linear connectedness and biLipschitz behaviour of d(x, y) = h(|x - y|).
"""

import logging as logger
from typing import Literal, Optional, Sequence

import networkx as nx
import numpy as np
from pydantic import BaseModel, Field

from gaugeline.config import NumericConf
from gaugeline.errors import DomainError, InsufficientBallsError
from gaugeline.gauge import (
    Gauge,
    GaugeKind,
    evaluate,
    interval_max,
    is_monotone,
    tent_peaks,
)
from gaugeline.responses import Table

Interval = tuple[float, float]


class BallDecomposition(BaseModel):
    center: float = 0.0
    radius: float
    closed: bool = True
    components: list[Interval]
    truncated: bool = False

    @property
    def positive_components(self) -> list[Interval]:
        """Components of the ball around 0 meeting [0, oo), the origin one first."""
        out = [(0.0, b - self.center) for a, b in self.components if a <= self.center <= b]
        out += [(a - self.center, b - self.center) for a, b in self.components if a > self.center]
        return out

    @property
    def disconnected(self) -> bool:
        return len(self.components) > 1

    @property
    def gap(self) -> Optional[Interval]:
        """(y', y''): the gap adjacent to the origin component on the positive side."""
        positive = self.positive_components
        if len(positive) < 2:
            return None
        return positive[0][1], positive[1][0]

    @property
    def length(self) -> float:
        return float(sum(b - a for a, b in self.components))

    def contains(self, x: float) -> bool:
        for a, b in self.components:
            if (a <= x <= b) if self.closed else (a < x < b):
                return True
        return False


def _merge(intervals: list[Interval], closed: bool) -> list[Interval]:
    merged: list[list[float]] = []
    for a, b in sorted(intervals):
        if merged and (a <= merged[-1][1] if closed else a < merged[-1][1]):
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    return [(a, b) for a, b in merged]


def _positive_ball(g: Gauge, r: float, closed: bool) -> list[Interval]:
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        slack = r - g.anchors_cost
        usable = slack >= 0 if closed else slack > 0
        lo = np.maximum(g.anchors_x[usable] - slack[usable], 0.0)
        hi = np.minimum(g.anchors_x[usable] + slack[usable], g.x_max)
        return _merge([(a, b) for a, b in zip(lo.tolist(), hi.tolist()) if a <= b], closed)
    inside = g.values <= r if closed else g.values < r
    edges = np.diff(np.concatenate([[0], inside.astype(np.int8), [0]]))
    starts = np.nonzero(edges == 1)[0]
    stops = np.nonzero(edges == -1)[0] - 1
    grid = g.grid
    return [(float(grid[a]), float(grid[b])) for a, b in zip(starts, stops)]


def ball_components(
    g: Gauge, r: float, closed: bool = True, center: float = 0.0
) -> BallDecomposition:
    """
    Connected components of the ball of radius r, intersected with [-x_max, x_max] around
    the centre.

    Envelope gauges give the exact union of anchor intervals; other gauges give maximal runs
    of grid points in the sublevel set.
    """
    if r <= 0:
        raise DomainError(f"radius must be positive, got {r}")
    positive = _positive_ball(g, r, closed)
    origin, rest = positive[0], positive[1:]
    components = [(-b, -a) for a, b in reversed(rest)]
    components.append((-origin[1], origin[1]))
    components += rest
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        edge = evaluate(g, g.x_max)
        truncated = edge <= r if closed else edge < r
    else:
        truncated = positive[-1][1] >= g.grid[-1]
    return BallDecomposition(
        center=center,
        radius=r,
        closed=closed,
        components=[(a + center, b + center) for a, b in components],
        truncated=bool(truncated),
    )


# Besicovitch covering property


class MembershipCheck(BaseModel):
    ball: int
    distance: float
    radius: float
    passed: bool


class SeparationCheck(BaseModel):
    center_of: int
    ball: int
    distance: float
    radius: float
    passed: bool


class BcpCertificate(BaseModel):
    """Closed balls all containing 0 whose centres lie outside every other ball of the family."""

    balls: list[tuple[float, float]]
    depth: int
    membership: list[MembershipCheck]
    separation: list[SeparationCheck]
    gaps: list[Interval] = Field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.membership) and all(c.passed for c in self.separation)


def bcp_radii(g: Gauge) -> list[float]:
    n = int(g.params.get("truncation_n", NumericConf.BCP_TRUNCATION))
    return [1.0 / (k + 1) for k in range(2, n)]


def _checks(
    g: Gauge, balls: Sequence[tuple[float, float]]
) -> tuple[list[MembershipCheck], list[SeparationCheck]]:
    tol = NumericConf.MEMBERSHIP_TOL

    def distance(a: float, b: float) -> float:
        gap = abs(a - b)
        return evaluate(g, gap) if gap <= g.x_max else np.inf

    membership = []
    for i, (x, r) in enumerate(balls):
        d = distance(x, 0.0)
        membership.append(MembershipCheck(ball=i, distance=d, radius=r, passed=d <= r + tol))
    separation = []
    for i, (x, _) in enumerate(balls):
        for j, (y, r) in enumerate(balls):
            if i == j:
                continue
            d = distance(x, y)
            separation.append(
                SeparationCheck(center_of=i, ball=j, distance=d, radius=r, passed=d > r + tol)
            )
    return membership, separation


def _distances(g: Gauge, points: np.ndarray) -> np.ndarray:
    """Pairwise d(x_i, x_j); pairs farther apart than x_max are at infinite distance."""
    gaps = np.abs(points[:, None] - points[None, :])
    out = np.full(gaps.shape, np.inf)
    inside = gaps <= g.x_max
    out[inside] = evaluate(g, gaps[inside])
    return out


def bcp_candidates(
    g: Gauge, radii: Sequence[float], one_sided: bool = False
) -> tuple[list[tuple[float, float]], list[Interval]]:
    """
    Balls B(x, r) containing 0 read off the disconnected balls B(0, r).

    With gap (y', y'') next to the origin component the centre -y'' is always offered; unless
    ``one_sided``, so are +y'' and both ends ±e of the ball, e its farthest point.
    """
    tol = NumericConf.MEMBERSHIP_TOL
    balls: list[tuple[float, float]] = []
    gaps: list[Interval] = []
    for r in sorted(radii, reverse=True):
        ball = ball_components(g, r, closed=True)
        if ball.truncated or ball.gap is None:
            continue
        far = ball.positive_components[-1][1]
        centres = [-ball.gap[1]] if one_sided else [-ball.gap[1], ball.gap[1], -far, far]
        for x in dict.fromkeys(centres):
            if evaluate(g, abs(x)) <= r + tol:
                balls.append((x, r))
                gaps.append(ball.gap)
    return balls, gaps


def bcp_violation(
    g: Gauge,
    depth: int,
    one_sided: bool = False,
    radii: Optional[Sequence[float]] = None,
) -> BcpCertificate:
    """
    Family of `depth` closed balls containing 0 with pairwise non-covered centres.

    Two candidates of :func:`bcp_candidates` are compatible when neither centre lies in the
    other's ball, i.e. h(|x_i - x_j|) > max(r_i, r_j); the family is a maximum clique of that
    graph. Restricted to ``one_sided`` centres -y'' this is the nested family: a smaller ball
    joins a larger one iff its y'' lies below the larger ball's y'' - y'.
    """
    if depth < 1:
        raise DomainError(f"depth must be positive, got {depth}")
    radii = list(radii or bcp_radii(g))
    candidates, gaps = bcp_candidates(g, radii, one_sided)
    logger.info(
        f"{len(candidates)} candidate balls from {len(radii)} scanned radii of '{g.label}'"
    )
    if not candidates:
        raise InsufficientBallsError(found=0, requested=depth)

    centres = np.array([x for x, _ in candidates])
    reach = np.array([r for _, r in candidates])
    bound = np.maximum.outer(reach, reach) + NumericConf.MEMBERSHIP_TOL
    compatible = _distances(g, centres) > bound
    np.fill_diagonal(compatible, False)
    family, _ = nx.max_weight_clique(nx.from_numpy_array(compatible.astype(int)), weight=None)
    if len(family) < depth:
        raise InsufficientBallsError(found=len(family), requested=depth)

    family = sorted(family, key=lambda i: (-reach[i], centres[i]))[:depth]
    balls = [candidates[i] for i in family]
    membership, separation = _checks(g, balls)
    certificate = BcpCertificate(
        balls=balls,
        depth=depth,
        membership=membership,
        separation=separation,
        gaps=[gaps[i] for i in family],
    )
    if not certificate.all_passed:
        raise InsufficientBallsError(
            found=sum(c.passed for c in membership), requested=depth
        )
    return certificate


# linear connectedness


class LcReport(BaseModel):
    samples: list[tuple[float, float, float]]
    sup_estimate: float
    witness_t: float
    verdict: Literal["bounded", "diverging", "inconclusive"]
    lambda_hat: Optional[float] = None
    evidence: list[str] = Field(default_factory=list)

    def table(self) -> Table:
        return Table(columns=["t", "max_before", "ratio"], rows=[list(s) for s in self.samples])


def default_ladder(g: Gauge, n: int = 97) -> np.ndarray:
    return np.geomspace(g.grid_step, g.x_max, n)


def lc_ratio(g: Gauge, t_samples: Optional[Sequence[float]] = None) -> LcReport:
    """
    λ(t) = max{h(s) : s <= t} / h(t) over a ladder of t.

    Bounded when the sup stays below ``LAMBDA_MAX`` and the ratios do not increase over the
    top decade; diverging when the sup exceeds it and the last three ratios increase.
    """
    ts = np.asarray(t_samples if t_samples is not None else default_ladder(g), dtype=float)
    if ts.size == 0 or np.any(ts <= 0) or np.any(ts > g.x_max * (1 + 1e-12)):
        raise DomainError(f"t samples must lie in (0, {g.x_max}]")
    ts = np.sort(ts)
    heights = np.atleast_1d(evaluate(g, ts))
    tops = np.array([interval_max(g, 0.0, float(t)) for t in ts])
    with np.errstate(divide="ignore"):
        ratios = np.where(heights > 0, tops / heights, np.inf)
    worst = int(np.argmax(ratios))
    sup = float(ratios[worst])

    top_decade = ratios[ts >= ts[-1] / 10.0]
    settled = bool(np.all(np.diff(top_decade) <= 1e-12 * np.abs(top_decade[:-1])))
    rising = ratios.size >= 3 and bool(np.all(np.diff(ratios[-3:]) > 0))
    evidence = []
    if sup <= NumericConf.LAMBDA_MAX and settled:
        verdict, lambda_hat = "bounded", sup
    elif sup > NumericConf.LAMBDA_MAX and rising:
        verdict, lambda_hat = "diverging", None
        evidence.append(f"ratio {sup} above {NumericConf.LAMBDA_MAX} and increasing")
    else:
        verdict, lambda_hat = "inconclusive", None
        evidence.append(f"sup ratio {sup} at t={ts[worst]}; top decade settled: {settled}")
    return LcReport(
        samples=list(zip(ts.tolist(), tops.tolist(), ratios.tolist())),
        sup_estimate=sup,
        witness_t=float(ts[worst]),
        verdict=verdict,
        lambda_hat=lambda_hat,
        evidence=evidence,
    )


def argmax_before(g: Gauge, t: float) -> float:
    """A point s in [0, t] where h attains its max over [0, t]."""
    if is_monotone(g):
        return t
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        px, pc = g.anchors_x, g.anchors_cost
        positions = (px[:-1] + px[1:] + pc[1:] - pc[:-1]) / 2.0
        candidates = np.append(positions[(positions >= 0) & (positions <= t)], t)
    else:
        grid = g.grid
        candidates = np.append(grid[grid <= t], t)
    values = np.atleast_1d(evaluate(g, candidates))
    return float(candidates[int(np.argmax(values))])


class LcWitness(BaseModel):
    x: float
    y: float
    l: int
    ratio: float


def _anchor_ratios(g: Gauge) -> tuple[np.ndarray, np.ndarray]:
    """λ at the anchors of an envelope, where its local minima sit."""
    px, pc = g.anchors_x, g.anchors_cost
    _, heights = tent_peaks(g)
    tops = np.maximum(np.concatenate([[0.0], np.maximum.accumulate(heights)]), pc)
    keep = px > 0
    return px[keep], tops[keep] / pc[keep]


def nonlc_witness(
    g: Gauge, m: int, report: Optional[LcReport] = None, y_max: Optional[float] = None
) -> LcWitness:
    """
    Scale y and rotation offset l for the Hex certificate: y is where the lc ratio peaks
    among the scales up to ``y_max`` and l/m approximates the position of the max of h on
    [0, y], relative to y.

    The sampled ladder of the lc report is searched together with the anchors of envelope
    gauges.
    """
    if m < 2:
        raise DomainError(f"m must be at least 2, got {m}")
    y_max = y_max or g.x_max
    report = report or lc_ratio(g)
    ts = np.array([t for t, _, _ in report.samples])
    ratios = np.array([ratio for _, _, ratio in report.samples])
    if g.kind is GaugeKind.ENVELOPE_RESULT:
        anchor_ts, anchor_ratios = _anchor_ratios(g)
        ts, ratios = np.append(ts, anchor_ts), np.append(ratios, anchor_ratios)
    inside = ts <= y_max
    if not np.any(inside):
        raise DomainError(f"no lc sample of '{g.label}' at or below {y_max}")
    best = int(np.argmax(np.where(inside, ratios, -np.inf)))
    y = float(ts[best])
    x = argmax_before(g, y)
    l = int(np.clip(round(m * x / y), 1, m - 1))
    return LcWitness(x=x, y=y, l=l, ratio=float(ratios[best]))


# biLipschitz


class BilipschitzReport(BaseModel):
    samples: list[tuple[float, float]]
    max_ratio: float
    min_ratio: float
    spread: float
    k_hat: float
    verdict: Literal["bounded", "unbounded"]
    witnesses: list[tuple[float, float]] = Field(default_factory=list)

    def table(self) -> Table:
        return Table(columns=["x", "ratio"], rows=[list(s) for s in self.samples])


def bilipschitz_check(
    g: Gauge, x_ladder: Optional[Sequence[float]] = None
) -> BilipschitzReport:
    xs = np.asarray(x_ladder if x_ladder is not None else default_ladder(g, 49), dtype=float)
    if xs.size == 0 or np.any(xs <= 0) or np.any(xs > g.x_max * (1 + 1e-12)):
        raise DomainError(f"x ladder must lie in (0, {g.x_max}]")
    xs = np.sort(xs)[::-1]
    ratios = np.atleast_1d(evaluate(g, xs)) / xs
    hi, lo = float(ratios.max()), float(ratios.min())
    spread = hi / lo if lo > 0 else np.inf
    k_hat = max(hi, 1.0 / lo) if lo > 0 else np.inf
    bounded = spread <= NumericConf.BILIP_SPREAD_MAX
    witnesses = []
    if not bounded:
        # running extremes as x decreases
        up = ratios >= np.maximum.accumulate(ratios)
        down = ratios <= np.minimum.accumulate(ratios)
        pick = (up | down) & (np.arange(ratios.size) > 0)
        witnesses = list(zip(xs[pick].tolist(), ratios[pick].tolist()))
    return BilipschitzReport(
        samples=list(zip(xs.tolist(), ratios.tolist())),
        max_ratio=hi,
        min_ratio=lo,
        spread=float(spread),
        k_hat=float(k_hat),
        verdict="bounded" if bounded else "unbounded",
        witnesses=witnesses,
    )
