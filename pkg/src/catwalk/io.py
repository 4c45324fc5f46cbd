"""Result persistence: CSV tables, key=value metadata, plot-data files.

Everything emitted is deterministic text: reals at 17 significant digits,
metadata keys sorted, no timestamps in files (the in-memory record keeps
one for interactive use, but writing it out would break byte-identical
reruns).
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Table:
    """Named columns over rows; dtypes are 'int' or 'float' per column."""

    name: str
    columns: tuple[str, ...]
    dtypes: tuple[str, ...]
    rows: np.ndarray  # shape (n_rows, n_cols)

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.size and rows.shape[1] != len(self.columns):
            raise ValueError(
                f"table {self.name!r}: {rows.shape[1]} columns of data for "
                f"{len(self.columns)} headers"
            )
        if len(self.dtypes) != len(self.columns):
            raise ValueError(f"table {self.name!r}: dtype/column count mismatch")
        object.__setattr__(self, "rows", rows)


@dataclass
class ResultRecord:
    scenario: str
    metadata: dict
    tables: list[Table] = field(default_factory=list)
    created_at: str = field(
        default_factory=lambda: datetime.datetime.now(datetime.timezone.utc).isoformat()
    )


def _format_cell(value: float, dtype: str) -> str:
    if dtype == "int":
        return str(int(round(value)))
    return FLOAT_FMT % value


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc


def emit_results(record: ResultRecord, out_dir, fmt: str = "csv") -> list[Path]:
    """Write the record's tables and metadata under ``out_dir``.

    ``fmt`` selects csv tables, two-column whitespace plot files (last two
    columns of each table), or both.  Returns the written paths.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    meta_lines = [f"scenario={record.scenario}", f"version={__version__}"]
    for key in sorted(record.metadata):
        meta_lines.append(f"{key}={record.metadata[key]}")
    meta_path = out / f"{record.scenario}_meta.txt"
    _write_text(meta_path, "\n".join(meta_lines) + "\n")
    written.append(meta_path)

    for table in record.tables:
        if fmt in ("csv", "both"):
            lines = [",".join(table.columns)]
            for row in table.rows:
                lines.append(
                    ",".join(_format_cell(v, d) for v, d in zip(row, table.dtypes))
                )
            path = out / f"{record.scenario}_{table.name}.csv"
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
        if fmt in ("plot", "both") and len(table.columns) >= 2:
            lines = []
            for row in table.rows:
                x = _format_cell(row[-2], table.dtypes[-2])
                y = _format_cell(row[-1], table.dtypes[-1])
                lines.append(f"{x} {y}")
            path = out / f"{record.scenario}_{table.name}.dat"
            _write_text(path, "\n".join(lines) + "\n")
            written.append(path)
    return written
