import os

import pytest

from plotkit import (
    SchemaError,
    load_compare_csv,
    load_derivatives_csv,
    render_derivative_growth,
    render_residual_decay,
)

FIX = os.path.join(os.path.dirname(__file__), "fixtures")


def fixture(name):
    return os.path.join(FIX, name)


def test_load_derivatives_schema():
    tab = load_derivatives_csv(fixture("derivatives_q05.csv"))
    assert tab.columns == ["n", "growth"]
    assert len(tab.rows) == 40
    assert tab.column("n")[0] == 1


def test_schema_mismatch_reports_column_diff(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    with pytest.raises(SchemaError) as err:
        load_derivatives_csv(str(bad))
    assert "missing columns" in str(err.value)
    assert "growth" in str(err.value)


def test_render_derivatives_single_series(tmp_path):
    out = tmp_path / "growth.png"
    fig = render_derivative_growth([fixture("derivatives_q05.csv")], str(out))
    ax = fig.axes[0]
    assert out.exists() and out.stat().st_size > 0
    assert ax.get_yscale() == "log"
    assert len(ax.lines) == 1
    ys = ax.lines[0].get_ydata()
    assert min(ys) > 1.0  # bounded-from-below growth data, rendered as given


def test_render_derivatives_q0_horizontal(tmp_path):
    fig = render_derivative_growth([fixture("derivatives_q0.csv")], str(tmp_path / "g.png"))
    ys = fig.axes[0].lines[0].get_ydata()
    assert max(ys) == pytest.approx(min(ys), rel=1e-12)  # constant column


def test_render_derivatives_two_labeled_series(tmp_path):
    fig = render_derivative_growth(
        [fixture("derivatives_q05.csv"), fixture("derivatives_q0.csv")],
        str(tmp_path / "two.png"),
    )
    ax = fig.axes[0]
    assert len(ax.lines) == 2
    labels = [t.get_text() for t in ax.get_legend().get_texts()]
    assert labels == ["derivatives_q05", "derivatives_q0"]


def test_render_residuals_synthetic_slope3_annotation(tmp_path):
    fig = render_residual_decay(
        [fixture("compare_synthetic_slope3.csv")], str(tmp_path / "r.png")
    )
    ax = fig.axes[0]
    assert ax.get_xscale() == "log" and ax.get_yscale() == "log"
    notes = [t.get_text() for t in ax.texts]
    assert any("slope" in n and "3.00" in n for n in notes)


def test_render_residuals_slope_taken_from_footer_not_recomputed(tmp_path):
    """A doctored footer must be displayed verbatim: annotations come from
    the CSV, never from a refit."""
    src = open(fixture("compare_synthetic_slope3.csv")).read()
    doctored = tmp_path / "doctored.csv"
    import re

    doctored.write_text(re.sub(r"slope=\S+", "slope=9.5", src))
    fig = render_residual_decay([str(doctored)], str(tmp_path / "d.png"))
    notes = [t.get_text() for t in fig.axes[0].texts]
    assert any("9.50" in n for n in notes)


def test_render_residuals_floor_plateau_annotated(tmp_path):
    fig = render_residual_decay(
        [fixture("compare_massive_floor.csv")], str(tmp_path / "f.png")
    )
    notes = [t.get_text() for t in fig.axes[0].texts]
    assert any("floor" in n for n in notes)


def test_render_residuals_real_compare_output(tmp_path):
    fig = render_residual_decay(
        [fixture("compare_massless1d.csv")], str(tmp_path / "m.png")
    )
    ax = fig.axes[0]
    assert len(ax.lines) == 1
    notes = [t.get_text() for t in ax.texts]
    assert any("slope" in n for n in notes)


def test_render_empty_data_exits_cleanly(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("# qgas\nbeta,exact,predicted,residual,residual_scaled\n")
    out = tmp_path / "e.png"
    fig = render_residual_decay([str(empty)], str(out))
    assert out.exists()
    assert len(fig.axes[0].lines) == 0  # empty axes, no series


def test_cli_roundtrip(tmp_path):
    from plotkit.cli import main

    out = tmp_path / "cli.png"
    code = main(
        ["render-derivatives", "--csv", fixture("derivatives_q05.csv"), "--out", str(out)]
    )
    assert code == 0 and out.exists()
    code = main(["render-residuals", "--csv", fixture("derivatives_q05.csv"),
                 "--out", str(tmp_path / "x.png")])
    assert code == 2  # wrong schema for this subcommand
