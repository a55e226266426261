"""The four figure kinds rendered from the CSV contracts.

Every plotted number comes from a CSV column; the only derived quantities are
the G/P/I reference markers and dashed asymptotes computed from the CSV
metadata (see markers.py).
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .csvio import PlotInputError, Table, read_table, require_columns  # noqa: E402
from .markers import (coupling_axis, gibbs_diagonals, pointer_limit_entropy,  # noqa: E402
                      reference_markers)

FIGURE_KINDS = ("trajectory3d", "sweep-line", "elements-vs-lambda", "entropy")

TRAJECTORY_NEEDED = ("t", "rx", "ry", "rz")
SWEEP_NEEDED = ("lambda", "rx", "ry", "rz", "entropy",
                "p1_diag", "p2_diag", "offdiag_abs")


@dataclass
class FigureSpec:
    inputs: tuple
    kind: str
    output: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise PlotInputError(f"unknown figure kind {self.kind!r}; "
                                 f"valid: {FIGURE_KINDS}")
        if isinstance(self.inputs, str):
            self.inputs = (self.inputs,)
        self.inputs = tuple(self.inputs)
        if not self.inputs:
            raise PlotInputError("at least one input CSV is required")


def _draw_sphere(ax):
    u = np.linspace(0.0, 2.0 * np.pi, 25)
    v = np.linspace(0.0, np.pi, 13)
    x = np.outer(np.cos(u), np.sin(v))
    y = np.outer(np.sin(u), np.sin(v))
    z = np.outer(np.ones_like(u), np.cos(v))
    ax.plot_wireframe(x, y, z, color="0.85", linewidth=0.3)
    ax.set_xlim(-1, 1)
    ax.set_ylim(-1, 1)
    ax.set_zlim(-1, 1)
    ax.set_xlabel("$r_x$")
    ax.set_ylabel("$r_y$")
    ax.set_zlabel("$r_z$")
    ax.set_box_aspect((1, 1, 1))


def _draw_axes_and_markers(ax, table: Table):
    """z axis (energy hull), pointer axis, and the G/P/I reference points."""
    marks = reference_markers(table)
    axis = coupling_axis(table)
    ax.plot([0, 0], [0, 0], [-1, 1], color="tab:blue", linewidth=1.2,
            label=r"$\Sigma_E$ (z axis)")
    ax.plot([-axis[0], axis[0]], [-axis[1], axis[1]], [-axis[2], axis[2]],
            color="tab:green", linewidth=1.2, label=r"$\Sigma_P$ (pointer axis)")
    for name, point in marks.items():
        ax.scatter(*point, s=60, marker="o" if name != "I" else "s",
                   color={"G": "black", "P": "tab:green", "I": "tab:orange"}[name],
                   depthshade=False, label=name)
        ax.text(point[0], point[1], point[2] + 0.07, name, fontsize=11)
    return marks


def render_trajectory3d(table: Table, ax):
    require_columns(table, TRAJECTORY_NEEDED)
    _draw_sphere(ax)
    marks = _draw_axes_and_markers(ax, table)
    ax.plot(table.column("rx"), table.column("ry"), table.column("rz"),
            color="tab:red", linewidth=0.9, label="trajectory")
    ax.scatter(table.column("rx")[:1], table.column("ry")[:1],
               table.column("rz")[:1], color="tab:red", s=25, marker="^")
    lam = table.metadata.get("lambda")
    ax.set_title(f"Bloch trajectory" + (f" ($\\lambda$={lam:g})" if lam is not None else ""))
    ax.legend(loc="upper left", fontsize=7)
    return marks


def render_sweep_line(table: Table, ax):
    require_columns(table, SWEEP_NEEDED)
    _draw_sphere(ax)
    marks = _draw_axes_and_markers(ax, table)
    g, p = marks["G"], marks["P"]
    ax.plot([g[0], p[0]], [g[1], p[1]], [g[2], p[2]], "--", color="0.4",
            linewidth=1.0, label="projection line")
    ax.scatter(table.column("rx"), table.column("ry"), table.column("rz"),
               color="tab:red", s=45, facecolors="none", label="steady states")
    ax.set_title("Steady states along the projection line")
    ax.legend(loc="upper left", fontsize=7)
    return marks


def render_elements_vs_lambda(table: Table, ax):
    require_columns(table, SWEEP_NEEDED)
    lam = table.column("lambda")
    ax.plot(lam, table.column("p1_diag"), "o-", label=r"$\langle p_1|\rho|p_1\rangle$")
    ax.plot(lam, table.column("p2_diag"), "s-", label=r"$\langle p_2|\rho|p_2\rangle$")
    ax.plot(lam, table.column("offdiag_abs"), "^-",
            label=r"$|\langle p_1|\rho|p_2\rangle|$")
    d1, d2 = gibbs_diagonals(table)
    ax.axhline(d1, linestyle="--", color="0.5", linewidth=0.8)
    ax.axhline(d2, linestyle="--", color="0.5", linewidth=0.8)
    ax.set_xlabel(r"coupling strength $\lambda$")
    ax.set_ylabel("pointer-basis matrix elements")
    ax.set_title("Steady-state density in the pointer basis")
    ax.legend(fontsize=8)
    return {"gibbs_diagonals": (d1, d2)}


def render_entropy(tables, ax):
    info = {"asymptotes": []}
    for table in tables:
        require_columns(table, ("lambda", "entropy"))
        label = f"ax={table.metadata.get('ax', '?')}, az={table.metadata.get('az', '?')}"
        ax.plot(table.column("lambda"), table.column("entropy"), "o-", label=label)
        s_p = pointer_limit_entropy(table)
        ax.axhline(s_p, linestyle="--", color="0.5", linewidth=0.8)
        info["asymptotes"].append(s_p)
    ax.set_xlabel(r"coupling strength $\lambda$")
    ax.set_ylabel("steady-state entropy")
    ax.set_title("Entropy increase toward the pointer limits")
    ax.legend(fontsize=8)
    return info


def render(spec: FigureSpec):
    """Render one figure; returns (figure, info dict with marker coordinates)."""
    tables = [read_table(p) for p in spec.inputs]
    if spec.kind == "entropy":
        fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=150)
        info = render_entropy(tables, ax)
    elif spec.kind == "elements-vs-lambda":
        fig, ax = plt.subplots(figsize=(5.2, 3.6), dpi=150)
        info = render_elements_vs_lambda(tables[0], ax)
    else:
        fig = plt.figure(figsize=(5.0, 5.0), dpi=150)
        ax = fig.add_subplot(projection="3d")
        if spec.kind == "trajectory3d":
            info = render_trajectory3d(tables[0], ax)
        else:
            info = render_sweep_line(tables[0], ax)
    fig.tight_layout()
    if spec.output:
        try:
            fig.savefig(spec.output)
        except OSError as exc:
            raise PlotInputError(f"cannot write figure to {spec.output}: {exc}") from exc
    return fig, info
