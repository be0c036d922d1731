"""
Command-line front end.

Exit status: 0 pass, 2 pathology certified, 64 bad configuration, 65 domain error, 1 anything
else. A pathology (disconnected ball, BCP violation, diverging lc ratio, ...) is a positive
finding, not a failure.
"""

import argparse
import json
import logging as logger
import pathlib
import sys
from typing import Any, Literal, NamedTuple, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator

from gaugeline import __version__, dimension, envelope, gauge, geometry, hexcert
from gaugeline.config import NumericConf, PathConf
from gaugeline.errors import ConfigParseError
from gaugeline.errors.exception_handlers import get_exception_handlers, handle_exception
from gaugeline.log_config import configure_logger, start_run
from gaugeline.responses import ReportSchema, RunMeta, Table, write_report

Command = Literal[
    "validate",
    "envelope",
    "balls",
    "lc",
    "bcp",
    "bilip",
    "dims",
    "assouad",
    "nagata-cover",
    "hex-certify",
]

COMMANDS: tuple[str, ...] = Command.__args__
ENVELOPE_IDS = ("bcp_envelope", "nonlc_envelope")


class RunConfig(BaseModel):
    command: Command
    gauge: str = "euclidean"
    params: dict[str, Any] = Field(default_factory=dict)
    constraints: Optional[pathlib.Path] = None
    n: Optional[int] = Field(default=None, ge=2)
    step: Optional[float] = Field(default=None, gt=0)
    x_max: Optional[float] = Field(default=None, gt=0)
    depth: int = Field(default=5, ge=1)
    one_sided: bool = False
    scale: Optional[float] = Field(default=None, gt=0)
    open_ball: bool = False
    r_min: Optional[float] = Field(default=None, gt=0)
    r_max: Optional[float] = Field(default=None, gt=0)
    samples: Optional[int] = Field(default=None, ge=8)
    window: Optional[float] = Field(default=None, gt=0, le=1)
    c: float = Field(default=2.5, gt=0)
    m: int = Field(default=128, ge=2)
    k: Optional[int] = Field(default=None, ge=1)
    l: Optional[int] = Field(default=None, ge=1)
    y: Optional[float] = Field(default=None, gt=0)
    cover: Optional[pathlib.Path] = None
    tests: int = Field(default=10_000, ge=1)
    out: Optional[pathlib.Path] = None
    save_gauge: Optional[pathlib.Path] = None
    format: Literal["json", "csv"] = "json"
    seed: int = NumericConf.SEED

    @model_validator(mode="after")
    def check_command_inputs(self):
        if self.command == "hex-certify" and self.cover is None:
            raise ValueError("hex-certify needs a cover file (--cover)")
        if self.command == "envelope" and (
            self.constraints is None and self.gauge not in ENVELOPE_IDS
        ):
            raise ValueError("envelope needs --constraints or an envelope builtin")
        return self


class Outcome(NamedTuple):
    status: str
    exit_code: int
    message: str
    data: Any = None
    table: Optional[Table] = None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigParseError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="gaugeline",
        description="Translation-invariant distances on the line: envelopes, balls, dimensions",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("command", nargs="?", choices=COMMANDS)
    parser.add_argument("--config", type=pathlib.Path, help="JSON document mirroring the flags")
    parser.add_argument("--gauge", help="builtin id or gauge definition file")
    parser.add_argument("--constraints", type=pathlib.Path, help="JSON constraint file")
    parser.add_argument("--n", type=int, help="truncation of the constraint family")
    parser.add_argument("--step", type=float, help="grid step")
    parser.add_argument("--xmax", dest="x_max", type=float, help="right end of the domain")
    parser.add_argument("--depth", type=int, help="BCP certificate depth")
    parser.add_argument(
        "--one-sided",
        dest="one_sided",
        action="store_true",
        default=None,
        help="BCP centres on the negative side only",
    )
    parser.add_argument("--scale", type=float, help="ball radius or cover scale s")
    parser.add_argument("--open", dest="open_ball", action="store_true", default=None)
    parser.add_argument("--r-min", dest="r_min", type=float)
    parser.add_argument("--r-max", dest="r_max", type=float)
    parser.add_argument("--samples", type=int, help="radii in the scaling ladder")
    parser.add_argument("--window", type=float, help="fraction of smallest radii used")
    parser.add_argument("--c", type=float, help="claimed boundedness constant of the cover")
    parser.add_argument("--m", type=int, help="cylinder subdivision")
    parser.add_argument("--k", type=int, help="cylinder height")
    parser.add_argument("--l", type=int, help="rotation offset")
    parser.add_argument(
        "--y", type=float, help="real-line scale of one grid row (default: lc witness)"
    )
    parser.add_argument("--cover", type=pathlib.Path, help="JSON interval cover file")
    parser.add_argument("--tests", type=int, help="test sets per cover check")
    parser.add_argument("--out", type=pathlib.Path)
    parser.add_argument(
        "--save-gauge",
        dest="save_gauge",
        type=pathlib.Path,
        help="also write the gauge as a sampled-table definition file",
    )
    parser.add_argument("--format", choices=("json", "csv"))
    parser.add_argument("--seed", type=int)
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    document: dict[str, Any] = {}
    config_path = args.pop("config")
    if config_path is not None:
        try:
            document = json.loads(config_path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigParseError(f"cannot read config file {config_path}: {exc}") from exc
    document.update({key: value for key, value in args.items() if value is not None})
    if "command" not in document:
        raise ConfigParseError("no command given")
    return RunConfig.model_validate(document)


def resolve_gauge(config: RunConfig) -> tuple[gauge.Gauge, Optional[envelope.EnvelopeSolution]]:
    if config.constraints is not None:
        constraints = envelope.load_constraints(config.constraints)
        step = config.step or NumericConf.GRID_STEP
        x_max = config.x_max or 2.0 * max(constraints.points, default=1.0)
        solution = envelope.solve_envelope(constraints, step, x_max)
        return solution.gauge, solution
    source = pathlib.Path(config.gauge)
    if source.suffix == ".json" or source.is_file():
        return gauge.load_gauge(source), None
    if config.gauge in ENVELOPE_IDS:
        params = dict(config.params)
        params.update({"n": config.n, "step": config.step})
        params = {key: value for key, value in params.items() if value is not None}
        solution = envelope.envelope_builtin(config.gauge, params, x_max=config.x_max)
        return solution.gauge, solution
    g = gauge.make_builtin(
        config.gauge, config.params, grid_step=config.step, x_max=config.x_max, check=False
    )
    return g, None


def _validate(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    report = gauge.validate(g)
    if report.all_passed:
        return Outcome("pass", 0, "All metric properties hold", report.model_dump())
    return Outcome(
        "pathology", 2, f"Gauge fails {', '.join(report.failures)}", report.model_dump()
    )


def _envelope(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    data = {
        "metadata": solution.metadata.model_dump(),
        "constraints": solution.constraint_set.model_dump(),
        "grid_step": solution.grid_step,
        "anchors": list(zip(g.anchors_x.tolist(), g.anchors_cost.tolist())),
        "monotone": gauge.is_monotone(g),
    }
    table = Table(columns=["x", "h"], rows=list(zip(g.grid.tolist(), g.values.tolist())))
    return Outcome("pass", 0, "Envelope solved", data, table)


def _balls(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    radius = config.scale or 0.5 * float(np.max(g.values))
    ball = geometry.ball_components(g, radius, closed=not config.open_ball)
    table = Table(columns=["left", "right"], rows=[list(c) for c in ball.components])
    if ball.disconnected:
        message = f"Ball of radius {radius} has {len(ball.components)} components"
        return Outcome("pathology", 2, message, ball.model_dump(), table)
    return Outcome("pass", 0, f"Ball of radius {radius} is connected", ball.model_dump(), table)


def _lc(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    report = geometry.lc_ratio(g)
    code = 2 if report.verdict == "diverging" else 0
    status = {"bounded": "pass", "diverging": "pathology"}.get(report.verdict, report.verdict)
    message = f"lc ratio {report.verdict}, sup {report.sup_estimate} at t={report.witness_t}"
    return Outcome(status, code, message, report.model_dump(), report.table())


def _bcp(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    certificate = geometry.bcp_violation(g, config.depth, one_sided=config.one_sided)
    checks = len(certificate.membership) + len(certificate.separation)
    message = f"BCP violated: {certificate.depth} balls through 0, {checks} checks passed"
    return Outcome("pathology", 2, message, certificate.model_dump())


def _bilip(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    report = geometry.bilipschitz_check(g)
    if report.verdict == "bounded":
        message = f"biLipschitz to the Euclidean line, K <= {report.k_hat}"
        return Outcome("pass", 0, message, report.model_dump(), report.table())
    message = f"h(x)/x spreads by {report.spread}"
    return Outcome("pathology", 2, message, report.model_dump(), report.table())


def _radius_window(config: RunConfig, g: gauge.Gauge) -> tuple[float, float]:
    r_max = config.r_max or 0.1 * gauge.evaluate(g, g.x_max)
    return config.r_min or r_max / 10.0, r_max


def _dims(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    r_min, r_max = _radius_window(config, g)
    report = dimension.hausdorff_exponent(g, r_min, r_max, config.samples, config.window)
    if report.divergence_flag:
        message = "Ball measures decay faster than every power: infinite Hausdorff dimension"
        return Outcome("pathology", 2, message, report.model_dump(), report.table())
    message = f"Hausdorff exponent {report.limsup_exponent}"
    return Outcome("pass", 0, message, report.model_dump(), report.table())


def _assouad(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    r_min, r_max = _radius_window(config, g)
    report = dimension.assouad_bounds(
        g, r_min=r_min, r_max=r_max, n_samples=config.samples, window_fraction=config.window
    )
    passing = [check.beta for check in report.checks if check.upper_ok]
    message = f"Assouad dimension >= {report.lower}; upper bounds pass for beta in {passing}"
    return Outcome("pass", 0, message, report.model_dump(), report.table())


def _nagata(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    scale = config.scale or 0.1 * gauge.evaluate(g, g.x_max)
    cover = dimension.nagata_cover(g, scale, test_budget=config.tests, seed=config.seed)
    valid = cover.multiplicity_achieved <= 2 and cover.separation_achieved >= 0.99
    message = (
        f"cover at scale {scale}: c={cover.c_achieved}, separation="
        f"{cover.separation_achieved}, multiplicity={cover.multiplicity_achieved}"
    )
    return Outcome(
        status="pass" if valid else "fail",
        exit_code=0 if valid else 1,
        message=message,
        data=cover.model_dump(),
        table=cover.table(),
    )


def _hex(config: RunConfig, g: gauge.Gauge, solution) -> Outcome:
    cover = hexcert.load_cover(config.cover)
    report = hexcert.certify_contradiction(
        g, cover, config.c, config.m, y=config.y, l=config.l, k=config.k
    )
    code = {
        "contradiction": 2,
        "not_applicable": 0,
        "preconditions_failed": 65,
        "no_contradiction": 1,
    }[report.status]
    failing = [check.name for check in report.preconditions if not check.passed]
    message = f"hex certificate: {report.status}"
    if failing:
        message += f" ({', '.join(failing)})"
    return Outcome(report.status, code, message, report.model_dump())


def report_path(out: Optional[pathlib.Path]) -> Optional[pathlib.Path]:
    """Relative report paths are resolved under PathConf.REPORTS_PATH."""
    if out is None or out.is_absolute():
        return out
    return pathlib.Path(PathConf.REPORTS_PATH) / out


DISPATCH = {
    "validate": _validate,
    "envelope": _envelope,
    "balls": _balls,
    "lc": _lc,
    "bcp": _bcp,
    "bilip": _bilip,
    "dims": _dims,
    "assouad": _assouad,
    "nagata-cover": _nagata,
    "hex-certify": _hex,
}


def run(config: RunConfig) -> int:
    """Runs one command and writes its report; returns the exit status."""
    meta = RunMeta(seed=config.seed, config=config.model_dump(mode="json"))
    out = report_path(config.out)
    try:
        g, solution = resolve_gauge(config)
        if config.save_gauge is not None:
            gauge.save_gauge(g, report_path(config.save_gauge))
        outcome = DISPATCH[config.command](config, g, solution)
    except Exception as exc:
        code, failure = handle_exception(exc, get_exception_handlers())
        failure.command, failure.meta = config.command, meta
        text = write_report(failure, out, "json")
        if out is None:
            print(text)
        return code
    report = ReportSchema(
        status=outcome.status,
        message=outcome.message,
        command=config.command,
        data=outcome.data,
        meta=meta,
    )
    text = write_report(report, out, config.format, outcome.table)
    if out is None:
        print(text)
    logger.info(f"{config.command} on '{g.label}': {outcome.message}")
    return outcome.exit_code


def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logger()
    start_run()
    try:
        config = parse_config(argv)
    except Exception as exc:
        code, failure = handle_exception(exc, get_exception_handlers())
        print(failure.model_dump_json(indent=2))
        return code
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
