import csv
import io
import pathlib
from typing import Any, Literal, Optional, Sequence

from asgi_correlation_id import correlation_id
from pydantic import BaseModel, Field
from whenever import Instant


def get_correlation_id() -> Optional[str]:
    """Get the current correlation ID value."""
    try:
        return correlation_id.get()
    except LookupError:
        return None


def get_current_timestamp() -> str:
    """Get the current timestamp in ISO format."""
    return str(Instant.now())


class RunMeta(BaseModel):
    run_id: Optional[str] = Field(default_factory=get_correlation_id)
    timestamp: Optional[str] = Field(default_factory=get_current_timestamp)
    seed: Optional[int] = None
    config: Optional[dict[str, Any]] = None


class Table(BaseModel):
    """Plot-ready rows emitted next to a report when csv output is requested."""

    columns: list[str]
    rows: list[Sequence[Any]]


class ReportSchema(BaseModel):
    status: str = "success"
    message: str = "Analysis completed"
    command: Optional[str] = None
    data: Optional[Any] = None
    meta: Optional[RunMeta] = None


class FailureSchema(BaseModel):
    status: str = "failure"
    message: str = "Analysis failed"
    command: Optional[str] = None
    data: Optional[Any] = None
    error: Optional[Any] = None
    meta: Optional[RunMeta] = None


def render_table(table: Table) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(table.columns)
    writer.writerows(table.rows)
    return buffer.getvalue()


def write_report(
    report: ReportSchema | FailureSchema,
    out: Optional[pathlib.Path] = None,
    fmt: Literal["json", "csv"] = "json",
    table: Optional[Table] = None,
) -> str:
    """
    Serializes a report and writes it to `out` (or returns it for stdout).

    With ``fmt="csv"`` the table is written instead of the JSON document; commands without a
    table fall back to JSON.
    """
    if fmt == "csv" and table is not None:
        text = render_table(table)
    else:
        text = report.model_dump_json(indent=2)
    if out is not None:
        out = pathlib.Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
    return text
