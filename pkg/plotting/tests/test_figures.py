import os
from pathlib import Path

import matplotlib.pyplot as plt
import numpy as np
import pytest

from pointer_therm_plots import FigureSpec, PlotInputError, read_table, render
from pointer_therm_plots.markers import (gibbs_diagonals, pointer_limit_entropy,
                                         reference_markers)

BETA = 2.0 / 3.0

TRAJ_HEADER = "t,rx,ry,rz,entropy,p1_diag,p2_diag,offdiag_re,offdiag_im"
SWEEP_HEADER = ("lambda,rx,ry,rz,entropy,p1_diag,p2_diag,offdiag_abs,"
                "line_distance,postulate1_dev")


def meta_lines(ax=1.0, ay=0.0, az=0.0):
    return [f"# ax={ax}", f"# ay={ay}", f"# az={az}", f"# beta={BETA}",
            "# omega0=1", "# gamma=1", "# lambda=5"]


def write_trajectory(path, ax=1.0, ay=0.0, az=0.0, n=40):
    t = np.linspace(0, 4, n)
    rows = [
        f"{ti},{np.cos(ti) * 0.7},{np.sin(ti) * 0.7},{0.1},{0.5},{0.6},{0.4},"
        f"{0.05},{-0.01}" for ti in t
    ]
    path.write_text("\n".join(meta_lines(ax, ay, az) + [TRAJ_HEADER] + rows) + "\n")


def write_sweep(path, ax=1.0, ay=0.0, az=0.0):
    lams = (0.01, 1.0, 2.0, 5.0)
    rows = [f"{lam},{0.0},{0.0},{-0.3 / (1 + lam)},{0.64},{0.5},{0.5},"
            f"{0.1 / (1 + lam)},{0.001},{0.2}" for lam in lams]
    path.write_text("\n".join(meta_lines(ax, ay, az) + [SWEEP_HEADER] + rows) + "\n")


@pytest.fixture(autouse=True)
def _close_figures():
    yield
    plt.close("all")


class TestMarkers:
    def test_closed_form_coordinates(self, tmp_path):
        p = tmp_path / "s.csv"
        write_sweep(p, ax=0.5, az=0.5)
        table = read_table(p)
        marks = reference_markers(table)
        g_expected = np.array([0, 0, -np.tanh(BETA / 2)])
        axis = np.array([1, 0, 1]) / np.sqrt(2)
        np.testing.assert_allclose(marks["G"], g_expected, atol=1e-12)
        np.testing.assert_allclose(marks["P"], (g_expected @ axis) * axis, atol=1e-12)
        np.testing.assert_allclose(marks["I"], np.zeros(3), atol=0)

    def test_case_one_pointer_limit_is_center(self, tmp_path):
        p = tmp_path / "s.csv"
        write_sweep(p, ax=1.0)
        marks = reference_markers(read_table(p))
        np.testing.assert_allclose(marks["P"], np.zeros(3), atol=1e-15)

    def test_gibbs_diagonals(self, tmp_path):
        p = tmp_path / "s.csv"
        write_sweep(p, ax=0.5, az=0.5)
        d1, d2 = gibbs_diagonals(read_table(p))
        assert d1 == pytest.approx(0.5 * (1 - np.tanh(1 / 3) / np.sqrt(2)), abs=1e-12)
        assert d1 + d2 == pytest.approx(1.0, abs=1e-12)

    def test_pointer_limit_entropy(self, tmp_path):
        p = tmp_path / "s.csv"
        write_sweep(p, ax=0.5, az=0.5)
        s = pointer_limit_entropy(read_table(p))
        assert s == pytest.approx(0.6670772229512723, abs=1e-10)


class TestRendering:
    def test_all_four_kinds_render(self, tmp_path):
        traj = tmp_path / "traj.csv"
        sweep = tmp_path / "sweep.csv"
        write_trajectory(traj, ax=0.5, az=0.5)
        write_sweep(sweep, ax=0.5, az=0.5)
        for kind, inputs in (("trajectory3d", (traj,)), ("sweep-line", (sweep,)),
                             ("elements-vs-lambda", (sweep,)),
                             ("entropy", (sweep,))):
            out = tmp_path / f"{kind}.png"
            fig, info = render(FigureSpec(inputs=tuple(str(p) for p in inputs),
                                          kind=kind, output=str(out)))
            assert out.exists() and out.stat().st_size > 1000
            assert fig.axes

    def test_marker_info_matches_closed_form(self, tmp_path):
        traj = tmp_path / "traj.csv"
        write_trajectory(traj, ax=0.5, az=0.5)
        _, info = render(FigureSpec(inputs=(str(traj),), kind="trajectory3d"))
        axis = np.array([1, 0, 1]) / np.sqrt(2)
        g = np.array([0, 0, -np.tanh(BETA / 2)])
        np.testing.assert_allclose(info["G"], g, atol=1e-12)
        np.testing.assert_allclose(info["P"], (g @ axis) * axis, atol=1e-12)
        np.testing.assert_allclose(info["I"], np.zeros(3), atol=0)

    def test_marker_artists_present(self, tmp_path):
        sweep = tmp_path / "sweep.csv"
        write_sweep(sweep)
        fig, _ = render(FigureSpec(inputs=(str(sweep),), kind="sweep-line"))
        texts = {t.get_text() for t in fig.axes[0].texts}
        assert {"G", "P", "I"} <= texts

    def test_entropy_accepts_multiple_inputs(self, tmp_path):
        s1, s2 = tmp_path / "a.csv", tmp_path / "b.csv"
        write_sweep(s1, ax=1.0)
        write_sweep(s2, ax=0.5, az=0.5)
        _, info = render(FigureSpec(inputs=(str(s1), str(s2)), kind="entropy"))
        assert info["asymptotes"] == pytest.approx(
            [np.log(2), 0.6670772229512723], abs=1e-10)

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(meta_lines() + ["t,rx,ry", "0,0,0"]) + "\n")
        with pytest.raises(PlotInputError, match="rz"):
            render(FigureSpec(inputs=(str(bad),), kind="trajectory3d"))

    def test_missing_metadata_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        rows = ["# ax=1", "# ay=0", "# az=0", TRAJ_HEADER,
                "0,0.1,0,0,0.5,0.5,0.5,0,0"]
        bad.write_text("\n".join(rows) + "\n")
        with pytest.raises(PlotInputError, match="beta"):
            render(FigureSpec(inputs=(str(bad),), kind="trajectory3d"))

    def test_unknown_kind_rejected(self):
        with pytest.raises(PlotInputError, match="kind"):
            FigureSpec(inputs=("x.csv",), kind="pie-chart")


class TestScripts:
    def test_cli_round_trip(self, tmp_path):
        from pointer_therm_plots import scripts
        sweep = tmp_path / "sweep.csv"
        write_sweep(sweep, ax=0.5, az=0.5)
        out = tmp_path / "fig.png"
        assert scripts.main_elements(["--input", str(sweep),
                                      "--output", str(out)]) == 0
        assert out.exists()

    def test_cli_error_exit(self, tmp_path, capsys):
        from pointer_therm_plots import scripts
        bad = tmp_path / "bad.csv"
        bad.write_text("t,rx\n0,0\n")
        code = scripts.main_trajectory3d(["--input", str(bad),
                                          "--output", str(tmp_path / "o.png")])
        assert code == 1
        assert "missing" in capsys.readouterr().err


class TestNoRecomputedPhysics:
    def test_figures_module_carries_no_physics_constants(self):
        import pointer_therm_plots.figures as figures
        src = Path(figures.__file__).read_text()
        assert "tanh" not in src
        for forbidden in ("0.3215", "0.6931", "0.6405", "0.6670", "0.3863"):
            assert forbidden not in src


VERIFY_DIR = Path(os.environ.get("POINTER_THERM_VERIFY_DIR",
                                 Path(__file__).resolve().parents[2] / "verify_out"))


@pytest.mark.skipif(not VERIFY_DIR.is_dir(),
                    reason="verify-suite CSVs not present (run pointer-therm verify)")
class TestVerifySuiteCsvs:
    def test_all_kinds_render_from_verify_outputs(self, tmp_path):
        sweeps = sorted(VERIFY_DIR.glob("sweep_case_*.csv"))
        trajs = sorted(VERIFY_DIR.glob("trajectory_case_*_lambda_*.csv"))
        assert sweeps and trajs, "verify directory lacks expected CSVs"
        jobs = [("trajectory3d", (trajs[0],)), ("sweep-line", (sweeps[0],)),
                ("elements-vs-lambda", (sweeps[0],)),
                ("entropy", tuple(sweeps))]
        for kind, inputs in jobs:
            out = tmp_path / f"verify_{kind}.png"
            fig, info = render(FigureSpec(inputs=tuple(str(p) for p in inputs),
                                          kind=kind, output=str(out)))
            assert out.exists() and out.stat().st_size > 1000

    def test_verify_markers_at_closed_form(self):
        for sweep_path in sorted(VERIFY_DIR.glob("sweep_case_*.csv")):
            table = read_table(sweep_path)
            marks = reference_markers(table)
            beta = float(table.meta("beta"))
            a = np.array([table.meta("ax"), table.meta("ay"), table.meta("az")],
                         dtype=float)
            axis = a / np.linalg.norm(a)
            g = np.array([0, 0, -np.tanh(0.5 * beta * float(table.meta("omega0")))])
            np.testing.assert_allclose(marks["G"], g, atol=1e-12)
            np.testing.assert_allclose(marks["P"], (g @ axis) * axis, atol=1e-12)
            np.testing.assert_allclose(marks["I"], np.zeros(3), atol=0)
