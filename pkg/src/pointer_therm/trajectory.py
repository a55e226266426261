"""Trajectory and sweep records plus their CSV contracts.

CSV layout: `# key=value` metadata comment lines (sorted by key), one header
row, then data rows.  Floats are written with 17 significant digits so a
parse/emit round trip is exact for float64.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError

TRAJECTORY_COLUMNS = ("t", "rx", "ry", "rz", "entropy",
                      "p1_diag", "p2_diag", "offdiag_re", "offdiag_im")
SWEEP_COLUMNS = ("lambda", "rx", "ry", "rz", "entropy", "p1_diag", "p2_diag",
                 "offdiag_abs", "line_distance", "postulate1_dev")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if x is None:
        return "none"
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _parse_value(s: str):
    if s == "none":
        return None
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class TrajectoryRecord:
    """Recorded time series of one hierarchy run.

    Rows carry the Bloch vector, entropy and pointer-basis matrix elements;
    metadata carries the fully-resolved run parameters.  `trace` keeps the raw
    top-level trace per row so d1+d2 reflects genuine trace conservation.
    """

    times: np.ndarray
    bloch: np.ndarray            # (n, 3)
    entropy: np.ndarray
    p1_diag: np.ndarray
    p2_diag: np.ndarray
    offdiag: np.ndarray          # complex <p1|rho|p2>
    metadata: dict = field(default_factory=dict)
    steady: bool = False
    steady_time: float | None = None
    steady_bloch: np.ndarray | None = None
    trace: np.ndarray | None = None

    def __len__(self):
        return len(self.times)

    def final_bloch(self) -> np.ndarray:
        return self.bloch[-1]

    def snapshot_bloch(self) -> np.ndarray:
        """Steady-window-averaged Bloch vector if available, else the final row."""
        if self.steady_bloch is not None:
            return self.steady_bloch
        return self.bloch[-1]

    def sample_at(self, t_grid) -> np.ndarray:
        """Bloch vector linearly interpolated onto an arbitrary time grid."""
        t_grid = np.asarray(t_grid, dtype=float)
        return np.stack([np.interp(t_grid, self.times, self.bloch[:, k])
                         for k in range(3)], axis=1)


@dataclass
class SweepResult:
    """Steady-state summary over a strictly increasing coupling-strength grid."""

    lambdas: np.ndarray
    steady_bloch: np.ndarray     # (m, 3)
    entropy: np.ndarray
    p1_diag: np.ndarray
    p2_diag: np.ndarray
    offdiag_abs: np.ndarray
    line_distance: np.ndarray
    postulate1_dev: np.ndarray
    metadata: dict = field(default_factory=dict)
    trajectories: list = field(default_factory=list)

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if lam.size and np.any(np.diff(lam) <= 0):
            raise ParameterError("lambda values must be strictly increasing")


def _write_table(handle, metadata: dict, columns, rows: np.ndarray):
    for key in sorted(metadata):
        handle.write(f"# {key}={_fmt(metadata[key])}\n")
    handle.write(",".join(columns) + "\n")
    for row in rows:
        handle.write(",".join(format(float(v), ".17g") for v in row) + "\n")


def _read_table(handle):
    metadata = {}
    header = None
    data = []
    for line in handle:
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
        data.append([float(v) for v in line.split(",")])
    rows = np.array(data, dtype=float) if data else np.zeros((0, len(header or ())))
    return metadata, header, rows


def trajectory_rows(rec: TrajectoryRecord) -> np.ndarray:
    return np.column_stack([
        rec.times, rec.bloch[:, 0], rec.bloch[:, 1], rec.bloch[:, 2],
        rec.entropy, rec.p1_diag, rec.p2_diag, rec.offdiag.real, rec.offdiag.imag,
    ]) if len(rec) else np.zeros((0, 9))


def write_trajectory_csv(rec: TrajectoryRecord, path) -> None:
    meta = dict(rec.metadata)
    meta["steady"] = rec.steady
    meta["steady_time"] = rec.steady_time
    if rec.steady_bloch is not None:
        meta["steady_rx"], meta["steady_ry"], meta["steady_rz"] = map(float, rec.steady_bloch)
    try:
        with open(path, "w", newline="") as fh:
            _write_table(fh, meta, TRAJECTORY_COLUMNS, trajectory_rows(rec))
    except OSError as exc:
        raise OSError(f"cannot write trajectory CSV to {path}: {exc}") from exc


def read_trajectory_csv(path) -> TrajectoryRecord:
    try:
        with open(path, "r") as fh:
            metadata, header, rows = _read_table(fh)
    except OSError as exc:
        raise OSError(f"cannot read trajectory CSV from {path}: {exc}") from exc
    if header != TRAJECTORY_COLUMNS:
        raise ParameterError(f"unexpected trajectory header {header} in {path}")
    steady = bool(metadata.pop("steady", 0))
    steady_time = metadata.pop("steady_time", None)
    sb = None
    if "steady_rx" in metadata:
        sb = np.array([metadata.pop("steady_rx"), metadata.pop("steady_ry"),
                       metadata.pop("steady_rz")])
    return TrajectoryRecord(
        times=rows[:, 0], bloch=rows[:, 1:4].copy(), entropy=rows[:, 4],
        p1_diag=rows[:, 5], p2_diag=rows[:, 6],
        offdiag=rows[:, 7] + 1j * rows[:, 8],
        metadata=metadata, steady=steady, steady_time=steady_time, steady_bloch=sb,
    )


def sweep_rows(sweep: SweepResult) -> np.ndarray:
    return np.column_stack([
        sweep.lambdas, sweep.steady_bloch[:, 0], sweep.steady_bloch[:, 1],
        sweep.steady_bloch[:, 2], sweep.entropy, sweep.p1_diag, sweep.p2_diag,
        sweep.offdiag_abs, sweep.line_distance, sweep.postulate1_dev,
    ]) if len(sweep.lambdas) else np.zeros((0, 10))


def write_sweep_csv(sweep: SweepResult, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            _write_table(fh, sweep.metadata, SWEEP_COLUMNS, sweep_rows(sweep))
    except OSError as exc:
        raise OSError(f"cannot write sweep CSV to {path}: {exc}") from exc


def read_sweep_csv(path) -> SweepResult:
    try:
        with open(path, "r") as fh:
            metadata, header, rows = _read_table(fh)
    except OSError as exc:
        raise OSError(f"cannot read sweep CSV from {path}: {exc}") from exc
    if header != SWEEP_COLUMNS:
        raise ParameterError(f"unexpected sweep header {header} in {path}")
    return SweepResult(
        lambdas=rows[:, 0], steady_bloch=rows[:, 1:4].copy(), entropy=rows[:, 4],
        p1_diag=rows[:, 5], p2_diag=rows[:, 6], offdiag_abs=rows[:, 7],
        line_distance=rows[:, 8], postulate1_dev=rows[:, 9], metadata=metadata,
    )


def dumps_trajectory(rec: TrajectoryRecord) -> str:
    buf = io.StringIO()
    meta = dict(rec.metadata)
    meta["steady"] = rec.steady
    meta["steady_time"] = rec.steady_time
    _write_table(buf, meta, TRAJECTORY_COLUMNS, trajectory_rows(rec))
    return buf.getvalue()
