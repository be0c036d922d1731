"""
Hex certificates on the discrete cylinder.

A cover of the line by two families of 2-separated sets, pulled back through
F(i, j) = y ([i]/m + j), colors the grid {0..2k(m+1)} x {0..k}. By the Hex theorem either a
black chain joins the bottom row to the top row or a white chain joins the first column to
the last one. Either chain lies in a single set of its family, and when the distance is not
linearly connected that set is too big: the certificate names the two points proving it.
"""

import json
import logging as logger
import pathlib
from collections import deque
from enum import StrEnum
from typing import Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from gaugeline.config import NumericConf
from gaugeline.errors import CoverageGapError, DomainError, NullHomotopicLoopError
from gaugeline.gauge import Gauge, evaluate, interval_min
from gaugeline.geometry import argmax_before, nonlc_witness

Cell = tuple[int, int]

NEIGHBOR_DIFFS: tuple[Cell, ...] = ((0, 1), (1, 0), (1, 1), (0, -1), (-1, 0), (-1, -1))


class Color(StrEnum):
    BLACK = "black"
    WHITE = "white"


class CylinderGrid(BaseModel):
    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1)
    k: int = Field(ge=1)
    l: Optional[int] = None
    y: float = Field(default=1.0, gt=0)

    @model_validator(mode="after")
    def check_offset(self):
        if self.l is not None and not 1 <= self.l <= self.m - 1:
            raise ValueError(f"rotation offset must lie in [1, {self.m - 1}], got {self.l}")
        return self

    @property
    def period(self) -> int:
        return self.m + 1

    @property
    def width(self) -> int:
        return 2 * self.k * (self.m + 1) + 1

    @property
    def height(self) -> int:
        return self.k + 1

    @property
    def last_column(self) -> int:
        return self.width - 1

    def contains(self, cell: Cell) -> bool:
        i, j = cell
        return 0 <= i < self.width and 0 <= j < self.height

    def neighbors(self, cell: Cell) -> list[Cell]:
        i, j = cell
        return [
            (i + di, j + dj) for di, dj in NEIGHBOR_DIFFS if self.contains((i + di, j + dj))
        ]

    def images(self) -> np.ndarray:
        """F over the whole grid, indexed [i, j]."""
        i = np.arange(self.width)[:, None]
        j = np.arange(self.height)[None, :]
        return self.y * ((i % self.period) / self.m + j)


def f_map(grid: CylinderGrid, cell: Cell) -> float:
    if not grid.contains(cell):
        raise DomainError(f"cell {cell} is outside the {grid.width} x {grid.height} grid")
    i, j = cell
    return grid.y * ((i % grid.period) / grid.m + j)


class PairClassCheck(BaseModel):
    name: Literal["vertical", "wraparound", "interior", "diagonal"]
    displacement: float
    distance: float
    bound: float
    passed: bool


class LipschitzReport(BaseModel):
    unit: float
    classes: list[PairClassCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.classes)

    @property
    def worst(self) -> Optional[str]:
        failing = [c for c in self.classes if not c.passed]
        return max(failing, key=lambda c: c.distance - c.bound).name if failing else None


def lipschitz_check(grid: CylinderGrid, g: Gauge, unit: Optional[float] = None) -> LipschitzReport:
    """
    Neighboring cells have images at distance at most ``unit`` (two units along diagonals).

    Images of neighbors differ by y (vertical steps and the wrap from [i] = m to 0), by y/m
    (other horizontal steps), by y (1 + 1/m) (diagonal steps) or by 0 (diagonal wrap).
    """
    unit = evaluate(g, grid.y) if unit is None else unit
    y, m = grid.y, grid.m
    classes = []
    for name, displacement, bound in (
        ("vertical", y, unit),
        ("wraparound", y, unit),
        ("interior", y / m, unit),
        ("diagonal", y * (1 + 1 / m), 2 * unit),
    ):
        distance = evaluate(g, displacement)
        passed = distance <= bound + NumericConf.MEMBERSHIP_TOL * max(1.0, bound)
        classes.append(
            PairClassCheck(
                name=name, displacement=displacement, distance=distance, bound=bound, passed=passed
            )
        )
    return LipschitzReport(unit=unit, classes=classes)


# colorings


class IntervalCover(BaseModel):
    """Two families of closed intervals of the line: black and white."""

    black: list[tuple[float, float]] = Field(default_factory=list)
    white: list[tuple[float, float]] = Field(default_factory=list)
    cover_id: str = "cover"

    @field_validator("black", "white")
    @classmethod
    def ordered(cls, intervals):
        for a, b in intervals:
            if a > b:
                raise ValueError(f"interval ({a}, {b}) has its ends reversed")
        return intervals

    def family(self, color: Color) -> list[tuple[float, float]]:
        return self.black if color is Color.BLACK else self.white

    def member(self, color: Color, x: float) -> Optional[tuple[float, float]]:
        tol = NumericConf.MEMBERSHIP_TOL
        return next((iv for iv in self.family(color) if iv[0] - tol <= x <= iv[1] + tol), None)


def load_cover(path: pathlib.Path | str) -> IntervalCover:
    path = pathlib.Path(path)
    document = json.loads(path.read_text(encoding="utf-8"))
    document.setdefault("cover_id", path.stem)
    return IntervalCover.model_validate(document)


class Coloring(BaseModel):
    """``black[i, j]`` is True when cell (i, j) is black."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grid: CylinderGrid
    black: np.ndarray
    provenance: str = "explicit"

    @field_validator("black", mode="before")
    @classmethod
    def as_bool_array(cls, value):
        array = np.array(value, dtype=bool)
        array.setflags(write=False)
        return array

    @model_validator(mode="after")
    def check_total(self):
        if self.black.shape != (self.grid.width, self.grid.height):
            raise ValueError(
                f"coloring shape {self.black.shape} does not match the "
                f"{self.grid.width} x {self.grid.height} grid"
            )
        return self

    def color(self, cell: Cell) -> Color:
        return Color.BLACK if self.black[cell] else Color.WHITE


def _covered(values: np.ndarray, intervals: Sequence[tuple[float, float]]) -> np.ndarray:
    if not intervals:
        return np.zeros(values.shape, dtype=bool)
    bounds = np.asarray(intervals, dtype=float)
    tol = NumericConf.MEMBERSHIP_TOL
    v = values[..., None]
    return np.any((v >= bounds[:, 0] - tol) & (v <= bounds[:, 1] + tol), axis=-1)


def pullback_coloring(grid: CylinderGrid, cover: IntervalCover) -> Coloring:
    """Cell z is black when F(z) lies in a black interval, white when only in a white one."""
    images = grid.images()
    black = _covered(images, cover.black)
    white = _covered(images, cover.white)
    gaps = np.argwhere(~black & ~white)
    if gaps.size:
        i, j = (int(v) for v in gaps[0])
        raise CoverageGapError(cell=(i, j), value=float(images[i, j]))
    return Coloring(grid=grid, black=black, provenance=f"pulled_back({cover.cover_id})")


# chains


class ContradictionRecord(BaseModel):
    """Two cells of one chain whose images are farther apart than the claimed set bound."""

    kind: Literal["black_diameter", "white_far_pair"]
    cells: tuple[Cell, Cell]
    images: tuple[float, float]
    distance: float
    bound: float
    member: Optional[tuple[float, float]] = None
    grid: CylinderGrid

    def verify(self, g: Gauge) -> bool:
        """Recomputes both images, their distance and their membership in one cover set."""
        images = tuple(f_map(self.grid, cell) for cell in self.cells)
        if not np.allclose(images, self.images, rtol=1e-12, atol=0.0):
            return False
        if self.member is None:
            return False
        tol = NumericConf.MEMBERSHIP_TOL
        lo, hi = self.member
        if not all(lo - tol <= x <= hi + tol for x in images):
            return False
        return evaluate(g, abs(images[1] - images[0])) > self.bound


class ChainCertificate(BaseModel):
    winner: Color
    chain: list[Cell]
    derived_contradiction: Optional[ContradictionRecord] = None

    @property
    def endpoints(self) -> tuple[Cell, Cell]:
        return self.chain[0], self.chain[-1]


def _bfs_chain(
    grid: CylinderGrid, mask: list[list[bool]], sources: list[Cell], is_target
) -> Optional[list[Cell]]:
    parent: dict[Cell, Optional[Cell]] = {cell: None for cell in sources}
    queue = deque(sources)
    while queue:
        cell = queue.popleft()
        if is_target(cell):
            chain = [cell]
            while parent[chain[-1]] is not None:
                chain.append(parent[chain[-1]])
            return chain[::-1]
        i, j = cell
        for di, dj in NEIGHBOR_DIFFS:
            nxt = (i + di, j + dj)
            if nxt in parent or not grid.contains(nxt) or not mask[nxt[0]][nxt[1]]:
                continue
            parent[nxt] = cell
            queue.append(nxt)
    return None


def hex_winner(grid: CylinderGrid, coloring: Coloring) -> ChainCertificate:
    """
    Shortest monochromatic spanning chain, black (bottom row to top row) tried first.
    """
    black = coloring.black.tolist()
    white = (~coloring.black).tolist()
    sources = [(i, 0) for i in range(grid.width) if black[i][0]]
    chain = _bfs_chain(grid, black, sources, lambda cell: cell[1] == grid.k)
    if chain is not None:
        return ChainCertificate(winner=Color.BLACK, chain=chain)
    sources = [(0, j) for j in range(grid.height) if white[0][j]]
    chain = _bfs_chain(grid, white, sources, lambda cell: cell[0] == grid.last_column)
    if chain is None:
        raise DomainError("coloring admits no spanning chain")
    return ChainCertificate(winner=Color.WHITE, chain=chain)


def verify_chain(grid: CylinderGrid, coloring: Coloring, certificate: ChainCertificate) -> bool:
    chain = certificate.chain
    if not chain or not all(grid.contains(cell) for cell in chain):
        return False
    if any(coloring.color(cell) is not certificate.winner for cell in chain):
        return False
    for (i1, j1), (i2, j2) in zip(chain, chain[1:]):
        if (i2 - i1, j2 - j1) not in NEIGHBOR_DIFFS:
            return False
    first, last = certificate.endpoints
    if certificate.winner is Color.BLACK:
        return first[1] == 0 and last[1] == grid.k
    return first[0] == 0 and last[0] == grid.last_column


# loops on the cylinder


def winding_number(loop: Sequence[Cell], m: int) -> int:
    """Net horizontal displacement of the closed cell sequence, in turns of the cylinder."""
    period = m + 1
    if period < 3:
        raise DomainError("loops need a cylinder of circumference at least 3")
    total = 0
    for (i1, j1), (i2, j2) in zip(loop, [*loop[1:], loop[0]]):
        di = (i2 - i1 + 1) % period - 1
        dj = j2 - j1
        if (di, dj) != (0, 0) and (di, dj) not in NEIGHBOR_DIFFS:
            raise DomainError(f"cells {(i1, j1)} and {(i2, j2)} are not neighbors on the cylinder")
        total += di
    return total // period


def rotated_loop_intersection(loop: Sequence[Cell], l: int, m: int) -> tuple[Cell, Cell]:
    """
    Cells p, p' of an essential loop with p' = p shifted by l around the cylinder.

    Lattice edges never cross, so the loop and its rotated copy meet at a cell. Pairs whose
    shift does not wrap past column m are preferred.
    """
    if not loop:
        raise DomainError("empty loop")
    period = m + 1
    loop = [(i % period, j) for i, j in loop]
    winding = winding_number(loop, m)
    if winding == 0:
        raise NullHomotopicLoopError("loop does not wind around the cylinder")
    cells = set(loop)
    for wrap in (False, True):
        for i, j in loop:
            if not wrap and i + l > m:
                continue
            partner = ((i + l) % period, j)
            if partner in cells:
                return (i, j), partner
    raise DomainError(f"no rotated pair found on a loop of winding {winding}")


# certificate


class PreconditionCheck(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class CertifyReport(BaseModel):
    status: Literal["contradiction", "not_applicable", "preconditions_failed", "no_contradiction"]
    unit: float
    c: float
    m: int
    y: float
    l: Optional[int] = None
    k: Optional[int] = None
    preconditions: list[PreconditionCheck]
    certificate: Optional[ChainCertificate] = None

    @property
    def contradiction(self) -> Optional[ContradictionRecord]:
        return self.certificate.derived_contradiction if self.certificate else None


def select_k(g: Gauge, c: float, y: float, unit: float) -> Optional[int]:
    """Smallest k >= 2 with h > 2c unit on [y (k - 1), y (k + 1)]."""
    for k in range(2, NumericConf.HEX_K_CAP + 1):
        if (k + 1) * y > g.x_max:
            return None
        if interval_min(g, y * (k - 1), y * (k + 1)) > 2 * c * unit:
            return k
    return None


def _family_separation(
    g: Gauge, intervals: Sequence[tuple[float, float]], top: float, unit: float
) -> PreconditionCheck:
    clipped = sorted(
        (max(a, 0.0), min(b, top)) for a, b in intervals if b >= 0.0 and a <= top
    )
    worst, pair = np.inf, None
    for idx, (a1, b1) in enumerate(clipped):
        for a2, b2 in clipped[idx + 1 :]:
            distance = 0.0 if a2 <= b1 else interval_min(g, a2 - b1, b2 - a1)
            if distance < worst:
                worst, pair = distance, ((a1, b1), (a2, b2))
    passed = worst >= 2 * unit
    detail = "" if passed else f"intervals {pair} at distance {worst} < {2 * unit}"
    return PreconditionCheck(name="separation", passed=passed, detail=detail)


def _marker_pair(grid: CylinderGrid, chain: list[Cell]) -> tuple[int, int]:
    """Indices of two chain cells on marker columns t (m + 1) sharing a row."""
    seen: dict[int, int] = {}
    for t in range(2 * grid.k + 1):
        column = t * grid.period
        index = next(idx for idx, (i, _) in enumerate(chain) if i == column)
        row = chain[index][1]
        if row in seen:
            return tuple(sorted((seen[row], index)))
        seen[row] = index
    raise DomainError("white chain misses a marker column")


def _white_contradiction(
    g: Gauge, grid: CylinderGrid, cover: IntervalCover, chain: list[Cell], bound: float
) -> ContradictionRecord:
    s1, s2 = _marker_pair(grid, chain)
    segment = chain[s1:s2]
    p, q = rotated_loop_intersection(segment, grid.l, grid.m)
    cylinder = [(i % grid.period, j) for i, j in segment]
    a, b = segment[cylinder.index(p)], segment[cylinder.index(q)]
    fa, fb = f_map(grid, a), f_map(grid, b)
    distance = evaluate(g, abs(fb - fa))
    if distance <= bound:
        images = np.array([f_map(grid, cell) for cell in segment])
        gaps = np.abs(images[:, None] - images[None, :])
        ia, ib = np.unravel_index(np.argmax(np.asarray(evaluate(g, gaps))), gaps.shape)
        a, b = segment[int(ia)], segment[int(ib)]
        fa, fb = float(images[ia]), float(images[ib])
        distance = evaluate(g, abs(fb - fa))
    return ContradictionRecord(
        kind="white_far_pair",
        cells=(a, b),
        images=(fa, fb),
        distance=distance,
        bound=bound,
        member=cover.member(Color.WHITE, fa),
        grid=grid,
    )


def certify_contradiction(
    g: Gauge,
    cover: IntervalCover,
    c: float,
    m: int,
    y: Optional[float] = None,
    l: Optional[int] = None,
    k: Optional[int] = None,
) -> CertifyReport:
    """
    Runs the Hex argument against a cover claimed to have 2c unit-bounded sets, unit = h(y).

    Needs a point l y / m where h exceeds 3c units (the distance is not linearly connected at
    that scale); without it the report is ``not_applicable``. Without ``y`` the scale and
    offset come from :func:`nonlc_witness`, searched below x_max / 2 so that two rows fit.
    """
    if y is None:
        lc = nonlc_witness(g, m, y_max=g.x_max / 2)
        y, l = lc.y, l or lc.l
        logger.info(f"lc witness of '{g.label}': y={y}, l={l}, ratio {lc.ratio}")
    unit = evaluate(g, y)
    if l is None:
        l = int(np.clip(round(m * argmax_before(g, y) / y), 1, max(1, m - 1)))
    checks = [
        PreconditionCheck(name="c_above_2", passed=c > 2, detail=f"c = {c}"),
    ]
    witness = evaluate(g, l * y / m) if l * y / m <= g.x_max else 0.0
    checks.append(
        PreconditionCheck(
            name="nonlc_witness",
            passed=m >= 2 and 1 <= l <= m - 1 and witness > 3 * c * unit,
            detail=f"h({l * y / m}) = {witness} against 3c unit = {3 * c * unit}",
        )
    )
    base = dict(unit=unit, c=c, m=m, y=y, l=l)
    if not checks[-1].passed:
        return CertifyReport(status="not_applicable", preconditions=checks, **base)

    k = k or select_k(g, c, y, unit)
    checks.append(
        PreconditionCheck(
            name="k_selected",
            passed=k is not None and (k + 1) * y <= g.x_max,
            detail=f"k = {k}",
        )
    )
    if not checks[-1].passed:
        return CertifyReport(status="preconditions_failed", preconditions=checks, **base)
    logger.info(f"hex certificate on m={m}, k={k}, l={l}, unit={unit}")

    grid = CylinderGrid(m=m, k=k, l=l, y=y)
    lipschitz = lipschitz_check(grid, g, unit)
    checks.append(
        PreconditionCheck(
            name="lipschitz", passed=lipschitz.passed, detail=lipschitz.worst or ""
        )
    )
    top = (k + 1) * y
    for color in Color:
        check = _family_separation(g, cover.family(color), top, unit)
        check.name = f"{color.value}_separation"
        checks.append(check)
    try:
        coloring = pullback_coloring(grid, cover)
    except CoverageGapError as exc:
        checks.append(PreconditionCheck(name="coverage", passed=False, detail=exc.message))
        coloring = None
    if coloring is None or not all(check.passed for check in checks):
        return CertifyReport(status="preconditions_failed", preconditions=checks, k=k, **base)

    certificate = hex_winner(grid, coloring)
    bound = 2 * c * unit
    if certificate.winner is Color.BLACK:
        a, b = certificate.endpoints
        fa, fb = f_map(grid, a), f_map(grid, b)
        record = ContradictionRecord(
            kind="black_diameter",
            cells=(a, b),
            images=(fa, fb),
            distance=evaluate(g, abs(fb - fa)),
            bound=bound,
            member=cover.member(Color.BLACK, fa),
            grid=grid,
        )
    else:
        record = _white_contradiction(g, grid, cover, certificate.chain, bound)
    certificate.derived_contradiction = record
    status = "contradiction" if record.verify(g) else "no_contradiction"
    logger.info(f"hex certificate: {certificate.winner.value} chain, {status}")
    return CertifyReport(
        status=status, preconditions=checks, k=k, certificate=certificate, **base
    )
