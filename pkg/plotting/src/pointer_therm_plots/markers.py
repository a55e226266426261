"""Closed-form reference points from CSV metadata.

The Gibbs point G, pointer limit P and maximal-entropy point I are recomputed
here from (beta, omega0, coupling) carried in the CSV metadata; this is the
only physics the rendering layer knows, duplicated deliberately so figures
stay independent of the simulator package.
"""

from __future__ import annotations

import numpy as np

from .csvio import PlotInputError, Table


def coupling_axis(table: Table) -> np.ndarray:
    a = np.array([table.meta("ax"), table.meta("ay"), table.meta("az")], dtype=float)
    n = np.linalg.norm(a)
    if n == 0:
        raise PlotInputError(f"{table.path}: coupling metadata is all zero")
    return a / n


def gibbs_point(table: Table) -> np.ndarray:
    beta = float(table.meta("beta"))
    omega0 = float(table.meta("omega0"))
    return np.array([0.0, 0.0, -np.tanh(0.5 * beta * omega0)])


def pointer_limit(table: Table) -> np.ndarray:
    """Orthogonal projection of G onto the pointer axis."""
    axis = coupling_axis(table)
    g = gibbs_point(table)
    return (g @ axis) * axis


def maximal_entropy_point(_table: Table) -> np.ndarray:
    return np.zeros(3)


def reference_markers(table: Table) -> dict:
    return {"G": gibbs_point(table), "P": pointer_limit(table),
            "I": maximal_entropy_point(table)}


def entropy_of_radius(r: float) -> float:
    r = min(max(float(r), 0.0), 1.0)
    s = np.log(2.0)
    if r > 0.0:
        s -= 0.5 * (1.0 + r) * np.log1p(r)
        if r < 1.0:
            s -= 0.5 * (1.0 - r) * np.log1p(-r)
    return float(s)


def pointer_limit_entropy(table: Table) -> float:
    return entropy_of_radius(np.linalg.norm(pointer_limit(table)))


def gibbs_diagonals(table: Table) -> tuple:
    axis = coupling_axis(table)
    g = gibbs_point(table)
    proj = float(g @ axis)
    return 0.5 * (1.0 + proj), 0.5 * (1.0 - proj)
