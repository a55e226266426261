"""Independent reader for the simulator's CSV contracts.

Deliberately self-contained (no import of the simulator package): the
rendering layer consumes only the documented column sets plus the `# key=value`
metadata comment lines.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TRAJECTORY_COLUMNS = ("t", "rx", "ry", "rz", "entropy",
                      "p1_diag", "p2_diag", "offdiag_re", "offdiag_im")
SWEEP_COLUMNS = ("lambda", "rx", "ry", "rz", "entropy", "p1_diag", "p2_diag",
                 "offdiag_abs", "line_distance", "postulate1_dev")


class PlotInputError(Exception):
    """Input CSV does not satisfy the plotting contract."""


@dataclass
class Table:
    metadata: dict
    columns: tuple
    data: np.ndarray
    path: str

    def column(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise PlotInputError(f"{self.path}: missing column {name!r} "
                                 f"(have {list(self.columns)})")
        return self.data[:, self.columns.index(name)]

    def meta(self, key: str):
        if key not in self.metadata:
            raise PlotInputError(f"{self.path}: missing metadata key {key!r}")
        return self.metadata[key]


def _parse_value(raw: str):
    if raw == "none":
        return None
    try:
        return int(raw)
    except ValueError:
        pass
    try:
        return float(raw)
    except ValueError:
        return raw


def read_table(path) -> Table:
    metadata = {}
    header = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if "=" in body:
                    key, _, val = body.partition("=")
                    metadata[key.strip()] = _parse_value(val.strip())
                continue
            if header is None:
                header = tuple(line.split(","))
                continue
            rows.append([float(v) for v in line.split(",")])
    if header is None:
        raise PlotInputError(f"{path}: no header row found")
    data = np.array(rows, dtype=float) if rows else np.zeros((0, len(header)))
    return Table(metadata=metadata, columns=header, data=data, path=str(path))


def require_columns(table: Table, needed) -> None:
    missing = [c for c in needed if c not in table.columns]
    if missing:
        raise PlotInputError(f"{table.path}: missing column(s) {missing}")
