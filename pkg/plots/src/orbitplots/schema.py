"""CSV schema contracts shared by every figure script.

The plotting side consumes only the documented CSV files of the numerical
pipeline; it never imports the numerical core. Loading fails fast with the
offending column names so schema drift surfaces immediately.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import pandas as pd


class SchemaError(Exception):
    """Input CSV does not match the documented schema."""


class EmptyInputError(Exception):
    """Input CSV has a header but no data rows."""


REQUIRED_COLUMNS = {
    "validation": ("scale", "linear_cost", "true_cost", "abs_error",
                   "rel_error", "trusted"),
    "bundle3d": ("sample", "t", "dx", "dy", "dz"),
    "eigen-compare": ("axis", "t", "dx", "dy", "dz"),
    "thrust": ("axis", "t", "u_mag"),
}

FIGURE_KINDS = tuple(REQUIRED_COLUMNS)


@dataclass(frozen=True)
class FigureSpec:
    """What to render: input CSV(s), figure kind, output image path."""

    kind: str
    inputs: tuple
    output: str

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise SchemaError(
                f"unknown figure kind {self.kind!r}; expected one of "
                f"{FIGURE_KINDS}")
        object.__setattr__(self, "inputs", tuple(str(p) for p in self.inputs))


def load_table(path, kind) -> pd.DataFrame:
    """Read one CSV and enforce the named-column contract for ``kind``."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"input file {path} does not exist")
    frame = pd.read_csv(path)
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in frame.columns]
    if missing:
        raise SchemaError(
            f"{path} is missing required column(s) {missing} for "
            f"{kind} figures (found {list(frame.columns)})")
    if frame.empty:
        raise EmptyInputError(
            f"{path} contains no data rows for columns "
            f"{list(REQUIRED_COLUMNS[kind])}")
    return frame
