"""JSON and table rendering of subcommand results."""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any

import click
from rich.console import Console
from rich.markup import escape
from rich.table import Table

from utils.error_reporter import DetailedError

logger = logging.getLogger(__name__)


def _plain(value: Any) -> Any:
    """Convert a payload to strict JSON values; non-finite floats become null."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, list | tuple):
        return [_plain(item) for item in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, Path):
        return value.as_posix()
    return value


def to_json(payload: dict[str, Any]) -> str:
    return json.dumps(_plain(payload), indent=2, allow_nan=False)


def _cell(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    if isinstance(value, list | tuple) and len(value) > 8:
        return f"[{len(value)} items]"
    return str(value)


def _records_table(title: str, records: list[dict[str, Any]]) -> Table:
    table = Table(title=title)
    columns = list(records[0])
    for column in columns:
        table.add_column(column)
    for record in records:
        table.add_row(*(_cell(record.get(column)) for column in columns))
    return table


def render_tables(payload: dict[str, Any]) -> list[Table]:
    """One key/value table for the scalar fields, one table per list of records."""
    summary = Table(show_header=False)
    summary.add_column("field", style="bold")
    summary.add_column("value")
    tables = [summary]
    for key, value in payload.items():
        if isinstance(value, list) and value and all(isinstance(v, dict) for v in value):
            tables.append(_records_table(key, value))
        elif isinstance(value, dict):
            for inner_key, inner in value.items():
                if not isinstance(inner, list | dict):
                    summary.add_row(f"{key}.{inner_key}", _cell(inner))
        else:
            summary.add_row(key, _cell(value))
    return tables


def emit(payload: dict[str, Any], output: Path | None, as_table: bool) -> None:
    """Write the JSON payload to ``output`` or stdout; with ``as_table`` stdout gets tables."""
    text = to_json(payload)
    if output is not None:
        output.write_text(text + "\n", encoding="utf-8")
        logger.info(f"Wrote results to {output}")
    if as_table:
        console = Console()
        for table in render_tables(payload):
            console.print(table)
    elif output is None:
        click.echo(text)


def print_error(error: DetailedError) -> None:
    console = Console(stderr=True)
    console.print(f"[bold red]Error:[/bold red] {escape(error.title)}")
    console.print(f"  {escape(error.description)}")
    line = error.context.get("line")
    if line:
        console.print(f"  at line {line}")
    for suggestion in error.suggestions:
        text = escape(f"{suggestion.title}: {suggestion.description}")
        hint = f"  [yellow]-[/yellow] {text}"
        if suggestion.command:
            hint += f" ([cyan]{suggestion.command}[/cyan])"
        console.print(hint)
