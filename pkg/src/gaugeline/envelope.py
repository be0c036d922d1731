"""
Largest translation-invariant distance below a finite family of value caps h(a_i) <= b_i.

The envelope is a shortest-path distance: reaching x costs the cheapest signed combination of
constraint jumps a_i (cost b_i) plus a Euclidean remainder. Jumps commute, so the envelope is
D(x) = min over lattice points p of C(p) + |x - p| where C(p) is the cheapest jump combination
landing on p. Only the non-dominated points (anchors) are kept; they make evaluation exact.
"""

import bisect
import heapq
import json
import logging as logger
import math
import pathlib
from functools import reduce
from typing import Iterable, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from gaugeline.config import NumericConf
from gaugeline.errors import (
    DomainError,
    HypothesisError,
    MisalignedConstraintError,
    SolverLimitError,
)
from gaugeline.gauge import Gauge, GaugeKind, envelope_eval, grid_size

SolverMethod = Literal["auto", "grid", "lattice"]

ALIGNMENT_TOL = 1e-9


class ConstraintSet(BaseModel):
    constraints: list[tuple[float, float]]
    base_cap: Literal[True] = True
    truncation_n: int = Field(ge=0)
    family: str = "custom"
    labels: list[int] = Field(default_factory=list)
    dropped: list[tuple[float, float]] = Field(default_factory=list)

    @model_validator(mode="after")
    def check_constraints(self):
        points = [a for a, _ in self.constraints]
        if any(a <= 0 or b <= 0 for a, b in self.constraints):
            raise ValueError("constraint points and caps must be positive")
        if len(set(points)) != len(points):
            raise ValueError("constraint points must be distinct")
        if any(b > a for a, b in self.constraints):
            raise ValueError("vacuous constraints (b > a) must be dropped first")
        if not self.labels:
            self.labels = list(range(1, len(self.constraints) + 1))
        if len(self.labels) != len(self.constraints):
            raise ValueError("one label per constraint")
        return self

    @property
    def points(self) -> list[float]:
        return [a for a, _ in self.constraints]


class SolverStats(BaseModel):
    method: str
    lattice_unit: float
    nodes: int
    edges: int = 0
    pops: int = 0
    anchors: int
    region: tuple[float, float]


class EnvelopeSolution(BaseModel):
    gauge: Gauge
    constraint_set: ConstraintSet
    grid_step: float
    metadata: SolverStats


# constraint families


def default_bcp_step(n: int) -> float:
    return 1.0 / (2 * math.lcm(*range(1, n + 1)))


def is_aligned(a: float, step: float) -> bool:
    q = a / step
    return abs(q - round(q)) <= ALIGNMENT_TOL * max(1.0, abs(q))


def _check_alignment(pairs: Iterable[tuple[float, float]], step: float):
    for a, _ in pairs:
        if not is_aligned(a, step):
            raise MisalignedConstraintError(
                f"constraint point {a} is not a multiple of the grid step {step}"
            )


def _build(
    pairs: Sequence[tuple[float, float]],
    labels: Sequence[int],
    truncation_n: int,
    family: str,
) -> ConstraintSet:
    kept, kept_labels, dropped = [], [], []
    for (a, b), label in zip(pairs, labels):
        if b >= a:
            logger.info(f"dropping vacuous constraint h({a}) <= {b} of family '{family}'")
            dropped.append((a, b))
            continue
        kept.append((float(a), float(b)))
        kept_labels.append(label)
    return ConstraintSet(
        constraints=kept,
        truncation_n=truncation_n,
        family=family,
        labels=kept_labels,
        dropped=dropped,
    )


def constraint_set(
    pairs: Sequence[tuple[float, float]], truncation_n: Optional[int] = None
) -> ConstraintSet:
    pairs = [(float(a), float(b)) for a, b in pairs]
    return _build(pairs, range(1, len(pairs) + 1), truncation_n or len(pairs), "custom")


def bcp_constraints(n: int, step: Optional[float] = None, start: int = 1) -> ConstraintSet:
    """
    Caps h(1/k) <= 1/(k+1) for start <= k <= n (k = 1 gives h(1) <= 1/2).

    Raising ``start`` keeps only the small-scale caps, which brings the biLipschitz constant
    of the envelope towards 1.
    """
    if n < 2:
        raise DomainError(f"the BCP family needs n >= 2, got {n}")
    if not 1 <= start <= n:
        raise DomainError(f"start index must lie in [1, {n}], got {start}")
    step = step or default_bcp_step(n)
    ks = range(start, n + 1)
    pairs = [(1.0 / k, 1.0 / (k + 1)) for k in ks]
    _check_alignment(pairs, step)
    return _build(pairs, list(ks), n, "bcp")


def default_nonlc_sequence(n: int) -> list[int]:
    return [2 ** (3**k) for k in range(1, n + 2)]


def check_nonlc_hypotheses(a: Sequence[float]):
    for i in range(1, len(a)):
        if a[i] <= a[i - 1]:
            raise HypothesisError("sequence must be strictly increasing", index=i)
    ratios = [a[i] / a[i + 1] for i in range(len(a) - 1)]
    for i in range(1, len(ratios)):
        if ratios[i] >= ratios[i - 1]:
            raise HypothesisError("a_n / a_(n+1) must be decreasing", index=i)
    growth = [a[i + 1] / a[i] ** 2 for i in range(len(a) - 1)]
    for i in range(1, len(growth)):
        if growth[i] <= growth[i - 1]:
            raise HypothesisError("a_(n+1) / a_n^2 must be increasing", index=i)


def nonlc_constraints(
    a: Optional[Sequence[float]] = None, n: Optional[int] = None, step: float = 1.0
) -> ConstraintSet:
    """Caps h(a_(k+1)) <= a_k for 1 <= k <= n."""
    n = n or NumericConf.NONLC_TRUNCATION
    if n < 1:
        raise DomainError(f"truncation must be positive, got {n}")
    a = list(a) if a is not None else default_nonlc_sequence(n)
    if len(a) < n + 1:
        raise DomainError(f"{n} constraints need {n + 1} sequence terms, got {len(a)}")
    check_nonlc_hypotheses(a)
    pairs = [(float(a[k]), float(a[k - 1])) for k in range(1, n + 1)]
    _check_alignment(pairs, step)
    return _build(pairs, list(range(1, n + 1)), n, "nonlc")


def restrict(c: ConstraintSet, subset: Iterable[int]) -> ConstraintSet:
    subset = sorted(set(subset))
    if any(i < 0 or i >= len(c.constraints) for i in subset):
        raise DomainError(f"subset {subset} is not a set of constraint indices")
    return ConstraintSet(
        constraints=[c.constraints[i] for i in subset],
        truncation_n=c.truncation_n,
        family=c.family,
        labels=[c.labels[i] for i in subset],
    )


def split_at(c: ConstraintSet, k: int) -> tuple[list[int], list[int]]:
    """Indices of the constraints labelled above k and at most k."""
    above = [i for i, label in enumerate(c.labels) if label > k]
    below = [i for i, label in enumerate(c.labels) if label <= k]
    return above, below


def scale_constraints(c: ConstraintSet, s: float) -> ConstraintSet:
    return ConstraintSet(
        constraints=[(a * s, b * s) for a, b in c.constraints],
        truncation_n=c.truncation_n,
        family=c.family,
        labels=list(c.labels),
    )


def load_constraints(path: pathlib.Path | str) -> ConstraintSet:
    document = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    if isinstance(document, list):
        pairs = [item for item in document if isinstance(item, list)]
        extra = next((item for item in document if isinstance(item, dict)), {})
        truncation = extra.get("truncation_n")
    else:
        pairs = document["constraints"]
        truncation = document.get("truncation_n")
    return constraint_set([tuple(pair) for pair in pairs], truncation)


# solvers


def _grid_solve(
    steps: dict[int, float], unit: int, lo: int, hi: int, step: float
) -> tuple[np.ndarray, np.ndarray, SolverStats]:
    n = (hi - lo) // unit + 1
    unit_length = unit * step
    weights = {1: unit_length}
    for length, cost in steps.items():
        s = length // unit
        weights[s] = min(weights.get(s, s * unit_length), cost)
    rows, cols, data = [], [], []
    for s, w in weights.items():
        if s >= n:
            continue
        src = np.arange(n - s)
        rows += [src, src + s]
        cols += [src + s, src]
        data += [np.full(n - s, w), np.full(n - s, w)]
    graph = csr_matrix(
        (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(n, n)
    )
    origin = -lo // unit
    dist = dijkstra(graph, directed=True, indices=origin)
    slack = 1e-12 * (1.0 + np.abs(dist))
    left = np.concatenate([[np.inf], dist[:-1] + unit_length])
    right = np.concatenate([dist[1:] + unit_length, [np.inf]])
    keep = (dist < left - slack) & (dist < right - slack)
    keep[origin] = True
    positions = lo + np.nonzero(keep)[0] * unit
    stats = SolverStats(
        method="grid",
        lattice_unit=unit_length,
        nodes=n,
        edges=int(graph.nnz),
        anchors=int(keep.sum()),
        region=(lo * step, hi * step),
    )
    return positions, dist[keep], stats


def _lattice_solve(
    steps: dict[int, float], lo: int, hi: int, step: float, cost_cap: float
) -> tuple[np.ndarray, np.ndarray, SolverStats]:
    heap: list[tuple[float, int]] = [(0.0, 0)]
    best = {0: 0.0}
    settled: set[int] = set()
    kept: list[int] = []
    kept_cost: dict[int, float] = {}
    pops = 0
    jumps = sorted(steps.items())
    while heap:
        cost, p = heapq.heappop(heap)
        if p in settled:
            continue
        settled.add(p)
        pops += 1
        slack = 1e-12 * (1.0 + cost)
        i = bisect.bisect_left(kept, p)
        if i > 0 and kept_cost[kept[i - 1]] + (p - kept[i - 1]) * step <= cost + slack:
            continue
        if i < len(kept) and kept_cost[kept[i]] + (kept[i] - p) * step <= cost + slack:
            continue
        kept.insert(i, p)
        kept_cost[p] = cost
        if len(kept) > NumericConf.MAX_ANCHORS:
            raise SolverLimitError(
                f"more than {NumericConf.MAX_ANCHORS} anchors; lower x_max or the truncation"
            )
        for length, jump_cost in jumps:
            nxt_cost = cost + jump_cost
            if nxt_cost > cost_cap:
                continue
            for q in (p + length, p - length):
                if lo <= q <= hi and q not in settled and nxt_cost < best.get(q, math.inf):
                    best[q] = nxt_cost
                    heapq.heappush(heap, (nxt_cost, q))
    positions = np.array(kept, dtype=np.int64)
    costs = np.array([kept_cost[p] for p in kept])
    stats = SolverStats(
        method="lattice",
        lattice_unit=step,
        nodes=len(settled),
        pops=pops,
        anchors=len(kept),
        region=(lo * step, hi * step),
    )
    return positions, costs, stats


def solve_envelope(
    c: ConstraintSet,
    step: float,
    x_max: float,
    method: SolverMethod = "auto",
) -> EnvelopeSolution:
    """
    Envelope of the constraint set on [0, x_max], exact at every real point.

    The grid solver runs Dijkstra on the lattice generated by the constraint points and is
    used while that lattice stays below ``MAX_GRID_NODES`` nodes; beyond that a sparse
    Dijkstra over jump combinations, pruned by dominance, takes over.
    """
    if step <= 0:
        raise DomainError(f"grid step must be positive, got {step}")
    if c.constraints and x_max < max(c.points):
        raise DomainError(f"x_max {x_max} is below the largest constraint point {max(c.points)}")
    _check_alignment(c.constraints, step)
    lengths = [int(round(a / step)) for a in c.points]
    top = int(math.ceil(x_max / step - ALIGNMENT_TOL))
    steps: dict[int, float] = {}
    for length, (_, b) in zip(lengths, c.constraints):
        steps[length] = min(steps.get(length, math.inf), b)

    if not steps:
        positions, costs = np.array([0]), np.array([0.0])
        stats = SolverStats(
            method="identity", lattice_unit=step, nodes=1, anchors=1, region=(0.0, x_max)
        )
    else:
        reach = max(lengths)
        unit = reduce(math.gcd, lengths)
        lo = -reach
        hi = lo + int(math.ceil((top + 3 * reach) / unit)) * unit
        nodes = (hi - lo) // unit + 1
        if method == "auto":
            method = "grid" if nodes <= NumericConf.MAX_GRID_NODES else "lattice"
        if method == "grid":
            if nodes > NumericConf.MAX_GRID_NODES:
                raise SolverLimitError(f"grid solver would need {nodes} nodes")
            positions, costs, stats = _grid_solve(steps, unit, lo, hi, step)
        else:
            positions, costs, stats = _lattice_solve(steps, lo, hi, step, cost_cap=x_max)
        useful = (positions >= 0) & (positions <= top + reach)
        positions, costs = positions[useful], costs[useful]
        stats.anchors = int(positions.size)
    logger.info(
        f"envelope of {len(c.constraints)} constraints ({c.family}, N={c.truncation_n}) "
        f"solved by {stats.method}: {stats.nodes} nodes, {stats.anchors} anchors"
    )

    anchors_x = positions * step
    stride = max(1, math.ceil(top / NumericConf.MAX_SAMPLES))
    sample_step = stride * step
    grid = np.arange(grid_size(x_max, sample_step)) * sample_step
    gauge = Gauge(
        kind=GaugeKind.ENVELOPE_RESULT,
        grid_step=sample_step,
        x_max=x_max,
        values=envelope_eval(anchors_x, costs, grid),
        anchors_x=anchors_x,
        anchors_cost=costs,
        builtin_id=f"{c.family}_envelope" if c.family != "custom" else None,
        params={
            "family": c.family,
            "truncation_n": c.truncation_n,
            "step": step,
            "constraints": len(c.constraints),
        },
    )
    return EnvelopeSolution(gauge=gauge, constraint_set=c, grid_step=step, metadata=stats)


def partial_envelope(
    c: ConstraintSet,
    subset: Iterable[int],
    step: float,
    x_max: float,
    method: SolverMethod = "auto",
) -> EnvelopeSolution:
    """Envelope of the constraints whose indices are in ``subset``."""
    return solve_envelope(restrict(c, subset), step, x_max, method=method)


def envelope_builtin(
    builtin_id: str, params: dict, x_max: Optional[float] = None
) -> EnvelopeSolution:
    if builtin_id == "bcp_envelope":
        n = int(params.get("n", NumericConf.BCP_TRUNCATION))
        step = params.get("step") or default_bcp_step(n)
        c = bcp_constraints(n, step, start=int(params.get("start", 1)))
        x_max = x_max or float(params.get("x_max", 2.0))
    else:
        n = int(params.get("n", NumericConf.NONLC_TRUNCATION))
        a = params.get("a") or default_nonlc_sequence(n)
        step = float(params.get("step", 1.0))
        c = nonlc_constraints(a, n, step)
        x_max = x_max or float(params.get("x_max") or a[n])
    return solve_envelope(c, step, x_max, method=params.get("method", "auto"))
