"""Load routegame sweep CSVs into dense 2-D grids.

The sweep schema is fixed; anything else is rejected with the offending
column named.  Infeasible cells arrive with blank fields and become NaN
(masked) in the numeric grids.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SWEEP_COLUMNS = (
    "a1",
    "a2",
    "regime",
    "i_star",
    "s_star",
    "q_star",
    "S",
    "U",
    "J",
    "delta_U",
    "throttle_gain",
    "feasible",
)

NUMERIC_FIELDS = ("i_star", "s_star", "q_star", "S", "U", "J", "delta_U", "throttle_gain")


class SchemaError(ValueError):
    """The CSV does not carry the sweep schema."""


@dataclass(frozen=True)
class SweepGrid:
    """Row-major sweep rectangle: axis1 values index rows, axis2 columns."""

    a1: np.ndarray  # shape (n1,)
    a2: np.ndarray  # shape (n2,)
    regime: np.ndarray  # shape (n1, n2), strings ("" where infeasible)
    values: dict[str, np.ndarray]  # numeric fields, NaN where infeasible
    feasible: np.ndarray  # bool, shape (n1, n2)

    @property
    def shape(self) -> tuple[int, int]:
        return self.feasible.shape

    @property
    def infeasible_count(self) -> int:
        return int(np.count_nonzero(~self.feasible))

    def regimes_present(self) -> set[str]:
        return set(self.regime[self.feasible].ravel())


def _check_header(header: list[str]) -> None:
    if header == list(SWEEP_COLUMNS):
        return
    missing = [c for c in SWEEP_COLUMNS if c not in header]
    unexpected = [c for c in header if c not in SWEEP_COLUMNS]
    parts = []
    if missing:
        parts.append(f"missing column(s): {', '.join(missing)}")
    if unexpected:
        parts.append(f"unexpected column(s): {', '.join(unexpected)}")
    if not parts:
        parts.append(f"columns out of order: {header}")
    raise SchemaError("sweep schema mismatch: " + "; ".join(parts))


def _ordered_unique(values: list[float]) -> list[float]:
    return list(dict.fromkeys(values))


def load_sweep(path: str | Path) -> SweepGrid:
    """Parse a sweep CSV into a dense grid; errors on zero feasible cells."""
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path} is empty (no header row)") from None
        _check_header(header)
        rows = list(reader)

    feasible_rows = sum(1 for row in rows if row[-1] == "true")
    if feasible_rows == 0:
        raise SchemaError(f"{path} holds zero feasible cells")

    a1_all = [float(row[0]) for row in rows]
    a2_all = [float(row[1]) for row in rows]
    a1 = _ordered_unique(a1_all)
    a2 = _ordered_unique(a2_all)
    n1, n2 = len(a1), len(a2)
    if n1 * n2 != len(rows):
        raise SchemaError(
            f"{path} is not a complete grid: {len(rows)} rows for {n1} x {n2} axis values"
        )

    regime = np.full((n1, n2), "", dtype=object)
    feasible = np.zeros((n1, n2), dtype=bool)
    values = {name: np.full((n1, n2), np.nan) for name in NUMERIC_FIELDS}
    for k, row in enumerate(rows):
        r, c = divmod(k, n2)
        if not (a1_all[k] == a1[r] and a2_all[k] == a2[c]):
            raise SchemaError(f"{path} rows are not in row-major order at line {k + 2}")
        record = dict(zip(SWEEP_COLUMNS, row))
        feasible[r, c] = record["feasible"] == "true"
        regime[r, c] = record["regime"]
        if feasible[r, c]:
            for name in NUMERIC_FIELDS:
                if record[name] != "":
                    values[name][r, c] = float(record[name])
    return SweepGrid(
        a1=np.asarray(a1),
        a2=np.asarray(a2),
        regime=regime,
        values=values,
        feasible=feasible,
    )
