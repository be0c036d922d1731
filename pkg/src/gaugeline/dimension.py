"""
Scaling of ball measures and interval covers of the line at a given d-scale.

Lebesgue measure is the reference measure: for a translation-invariant distance every ball
B(p, r) has the measure of B(0, r), so the dimension estimates reduce to how |B(0, r)|
scales with r.
"""

import logging as logger
import math
from typing import Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from gaugeline.config import NumericConf
from gaugeline.errors import DomainError, NonMonotoneGaugeError
from gaugeline.gauge import Gauge, evaluate, interval_min, inverse_max, is_monotone
from gaugeline.geometry import ball_components
from gaugeline.hexcert import IntervalCover
from gaugeline.responses import Table


def ball_measure_upper_bound(g: Gauge, r: float) -> float:
    """|B(0, r)| <= 2 x_r with x_r the largest preimage of r."""
    return 2.0 * inverse_max(g, r)


def ball_measure(g: Gauge, r: float) -> float:
    if r < 0:
        raise DomainError(f"radius must be nonnegative, got {r}")
    bound = ball_measure_upper_bound(g, r)
    if r == 0 or is_monotone(g):
        return bound
    return ball_components(g, r, closed=True).length


class ScalingReport(BaseModel):
    """
    Rows are (r, |B(0, r)|, local log-log slope, density exponent).

    The density exponent log(|B|/2) / log r is 1 for the Euclidean line and p for x^(1/p).
    """

    samples: list[tuple[float, float, float, float]]
    limsup_exponent: float
    liminf_exponent: float
    window: tuple[float, float]
    divergence_flag: bool
    dropped: int = 0

    def table(self) -> Table:
        return Table(
            columns=["r", "measure", "local_exponent", "density_exponent"],
            rows=[list(s) for s in self.samples],
        )


def _longest_divergent_run(radii: np.ndarray, slopes: np.ndarray) -> int:
    """Longest run of slopes above the cap that keep increasing as r decreases."""
    best = run = 0
    for i in range(slopes.size - 1, -1, -1):
        if slopes[i] <= NumericConf.DIVERGENCE_EXPONENT:
            run = 0
        elif run and slopes[i] > slopes[i + 1]:
            run += 1
        else:
            run = 1
        best = max(best, run)
    return best


def hausdorff_exponent(
    g: Gauge,
    r_min: float,
    r_max: float,
    n_samples: Optional[int] = None,
    window_fraction: Optional[float] = None,
) -> ScalingReport:
    """
    Density exponents log(|B(0, r)|/2) / log r over a geometric ladder of radii.

    The extremes are taken over the smallest ``window_fraction`` of the ladder; the default
    window is the whole ladder, dense enough to resolve oscillations within a decade.
    """
    n_samples = n_samples or NumericConf.SCALING_SAMPLES
    if not 0 < r_min < r_max:
        raise DomainError(f"need 0 < r_min < r_max, got {r_min}, {r_max}")
    if n_samples < 8:
        raise DomainError(f"need at least 8 radii, got {n_samples}")
    window_fraction = window_fraction or NumericConf.WINDOW_FRACTION

    radii = np.geomspace(r_min, r_max, n_samples)
    measures = np.array([ball_measure(g, float(r)) for r in radii])
    positive = measures > 0
    dropped = int(np.count_nonzero(~positive))
    if dropped:
        logger.info(f"{dropped} radii of '{g.label}' dropped: ball measure underflows to 0")
    radii, measures = radii[positive], measures[positive]
    if radii.size < 2:
        raise DomainError("fewer than two radii with a positive ball measure")

    log_r, log_m = np.log(radii), np.log(measures)
    slopes = np.diff(log_m) / np.diff(log_r)
    slopes = np.append(slopes, slopes[-1])
    density = np.log(measures / 2.0) / log_r

    count = max(2, math.ceil(window_fraction * radii.size))
    density_window = density[:count]
    divergent = _longest_divergent_run(radii[:count], slopes[:count])
    return ScalingReport(
        samples=list(zip(radii.tolist(), measures.tolist(), slopes.tolist(), density.tolist())),
        limsup_exponent=float(density_window.min()),
        liminf_exponent=float(density_window.max()),
        window=(float(radii[0]), float(radii[count - 1])),
        divergence_flag=divergent >= NumericConf.DIVERGENCE_RUN,
        dropped=dropped,
    )


class BetaCheck(BaseModel):
    beta: float
    max_ratio: float
    upper_ok: bool


class AssouadReport(BaseModel):
    lower: float
    checks: list[BetaCheck]
    scaling: ScalingReport

    @property
    def upper_ok(self) -> dict[float, bool]:
        return {check.beta: check.upper_ok for check in self.checks}

    def table(self) -> Table:
        return Table(
            columns=["beta", "max_ratio", "upper_ok"],
            rows=[[c.beta, c.max_ratio, c.upper_ok] for c in self.checks],
        )


def _require_monotone(g: Gauge, what: str):
    if not is_monotone(g):
        raise NonMonotoneGaugeError(
            f"{what} needs a nondecreasing gauge; '{g.label}' has disconnected balls "
            "(see lc_ratio)"
        )


def assouad_bounds(
    g: Gauge,
    beta_grid: Optional[Sequence[float]] = None,
    eps_ladder: Optional[Sequence[float]] = None,
    d_ladder: Optional[Sequence[float]] = None,
    r_min: Optional[float] = None,
    r_max: Optional[float] = None,
    n_samples: Optional[int] = None,
    window_fraction: Optional[float] = None,
) -> AssouadReport:
    """
    Lower bound from the largest density exponent near 0; β passes as an upper bound when
    ε^β ρ^{-1}(D) / ρ^{-1}(εD) stays below ``ASSOUAD_RATIO_CAP`` over the ladders.
    """
    _require_monotone(g, "assouad_bounds")
    sup = evaluate(g, g.x_max)
    r_max = r_max or 0.1 * sup
    r_min = r_min or 1e-3 * r_max
    scaling = hausdorff_exponent(g, r_min, r_max, n_samples, window_fraction)

    betas = list(beta_grid or [1.1, 1.5, 2.0, 2.5, 3.0, 3.5])
    eps = np.asarray(eps_ladder if eps_ladder is not None else np.geomspace(1e-6, 1.0, 25))
    scales = np.asarray(d_ladder if d_ladder is not None else np.geomspace(1e-3, 0.5, 13) * sup)
    if np.any(eps <= 0) or np.any(eps > 1) or np.any(scales <= 0) or np.any(scales > sup):
        raise DomainError(f"ε must lie in (0, 1] and D in (0, {sup}]")

    ratios = []
    for big in scales:
        outer = inverse_max(g, float(big))
        for e in eps:
            inner = inverse_max(g, float(e * big))
            if inner > 0:
                ratios.append((float(e), outer / inner))
    checks = []
    for beta in betas:
        worst = max((e**beta * ratio for e, ratio in ratios), default=0.0)
        checks.append(
            BetaCheck(
                beta=beta, max_ratio=worst, upper_ok=worst <= NumericConf.ASSOUAD_RATIO_CAP
            )
        )
    return AssouadReport(lower=scaling.liminf_exponent, checks=checks, scaling=scaling)


class NagataCover(BaseModel):
    """
    Alternating tiles of d-diameter s: two families, each s-separated.

    The tiles cover [0, extent]; extent is x_max unless the tile count was capped.
    """

    scale: float
    length: float
    extent: float
    families: tuple[list[tuple[float, float]], list[tuple[float, float]]]
    c_achieved: float
    separation_achieved: float
    multiplicity_achieved: int
    tests: int
    seed: int
    witness: Optional[tuple[float, float]] = Field(
        default=None, description="test set meeting the most tiles"
    )

    def to_interval_cover(self) -> IntervalCover:
        black, white = self.families
        return IntervalCover(black=list(black), white=list(white))

    def table(self) -> Table:
        rows = [[k, a, b] for k, family in enumerate(self.families) for a, b in family]
        return Table(columns=["family", "left", "right"], rows=sorted(rows, key=lambda r: r[1]))


def nagata_cover(
    g: Gauge,
    s: float,
    test_budget: int = 10_000,
    seed: Optional[int] = None,
    tiles: Optional[int] = None,
) -> NagataCover:
    """
    Tiles [0, x_max] by intervals of length x_s, the last one clipped at x_max, and
    colours them alternately.

    ``tiles`` (or ``NAGATA_TILES``) caps the number of tiles; the cover then stops at
    ``tiles * x_s``. Test sets of d-diameter below s are drawn over the covered range, half
    of them centred on tile boundaries.
    """
    _require_monotone(g, "nagata_cover")
    if s <= 0:
        raise DomainError(f"scale must be positive, got {s}")
    seed = NumericConf.SEED if seed is None else seed
    length = inverse_max(g, s)
    needed = math.ceil(g.x_max / length - 1e-9)
    cap = tiles or NumericConf.NAGATA_TILES
    if cap is None and needed > NumericConf.NAGATA_MAX_TILES:
        raise DomainError(
            f"scale {s} needs {needed} tiles to reach {g.x_max}; pass a tile cap to truncate"
        )
    n = min(cap, needed) if cap else needed
    if n < 3:
        raise DomainError(f"scale {s} leaves fewer than 3 tiles inside [0, {g.x_max}]")

    lefts = np.arange(n) * length
    rights = np.minimum(lefts + length, g.x_max)
    if n == needed:
        rights[-1] = g.x_max
    extent = float(rights[-1])
    families = (
        [(float(a), float(b)) for a, b in zip(lefts[0::2], rights[0::2])],
        [(float(a), float(b)) for a, b in zip(lefts[1::2], rights[1::2])],
    )
    diameter = evaluate(g, float(np.max(rights - lefts)))
    # same-colour tiles are at least one tile apart
    separation = interval_min(g, length, min(3 * length, g.x_max))

    rng = np.random.default_rng(seed)
    half = test_budget // 2
    widths = rng.uniform(0.0, 1.0 - 1e-9, test_budget) * length
    centres = np.concatenate(
        [
            rng.uniform(0.0, extent, test_budget - half),
            lefts[1 + np.arange(half) % (n - 1)],
        ]
    )
    lo, hi = centres - widths / 2, centres + widths / 2
    first = np.searchsorted(rights, lo, side="left")
    last = np.searchsorted(lefts, hi, side="right") - 1
    met = last - first + 1
    small = np.atleast_1d(evaluate(g, widths)) < s
    met = np.where(small, met, 0)
    worst = int(np.argmax(met))
    logger.info(
        f"nagata cover of '{g.label}' at scale {s}: {n} tiles of length {length} up to "
        f"{extent}, multiplicity {met[worst]} over {test_budget} test sets"
    )
    return NagataCover(
        scale=s,
        length=length,
        extent=extent,
        families=families,
        c_achieved=diameter / s,
        separation_achieved=separation / s,
        multiplicity_achieved=int(met[worst]),
        tests=test_budget,
        seed=seed,
        witness=(float(lo[worst]), float(hi[worst])),
    )
