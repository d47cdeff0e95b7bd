"""Readers for the qgas CSV schemas and the two figure renderers."""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

STYLE_FILE = os.path.join(os.path.dirname(__file__), "plotkit.mplstyle")

DERIVATIVES_COLUMNS = ["n", "growth"]
COMPARE_COLUMNS = ["beta", "exact", "predicted", "residual", "residual_scaled"]

_ORDERFIT_RE = re.compile(
    r"#\s*orderfit\s+slope=(?P<slope>\S+)\s+intercept=(?P<intercept>\S+)\s+"
    r"r_squared=(?P<r2>\S+)\s+window=\[(?P<lo>[^,]+),(?P<hi>[^\]]+)\]"
)
_DEGENERATE_RE = re.compile(r"#\s*orderfit degenerate")


class SchemaError(ValueError):
    """Input CSV does not match the expected qgas schema."""


@dataclass
class Table:
    path: str
    columns: List[str]
    rows: List[List[float]]
    meta: List[str] = field(default_factory=list)
    orderfit: Dict[str, float] | None = None
    degenerate: bool = False

    def column(self, name: str) -> List[float]:
        idx = self.columns.index(name)
        return [r[idx] for r in self.rows]


def _read(path: str, expected: Sequence[str]) -> Table:
    meta: List[str] = []
    orderfit = None
    degenerate = False
    data_rows: List[List[float]] = []
    columns: List[str] | None = None
    with open(path, newline="") as fh:
        for raw in fh:
            line = raw.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                meta.append(line)
                m = _ORDERFIT_RE.match(line)
                if m:
                    orderfit = {
                        "slope": float(m.group("slope")),
                        "intercept": float(m.group("intercept")),
                        "r_squared": float(m.group("r2")),
                        "window": (float(m.group("lo")), float(m.group("hi"))),
                    }
                elif _DEGENERATE_RE.match(line):
                    degenerate = True
                continue
            if columns is None:
                columns = next(csv.reader([line]))
                missing = [c for c in expected if c not in columns]
                extra = [c for c in columns if c not in expected]
                if missing:
                    raise SchemaError(
                        f"{path}: missing columns {missing}, found {columns} "
                        f"(unexpected: {extra or 'none'})"
                    )
                continue
            cells = next(csv.reader([line]))
            try:
                data_rows.append([float(c) for c in cells])
            except ValueError:
                # verdict-style trailing rows (e.g. condense) are not plotted
                continue
    if columns is None:
        columns = list(expected)
    return Table(path, columns, data_rows, meta, orderfit, degenerate)


def load_derivatives_csv(path: str) -> Table:
    """Read a `qgas figure-derivatives` CSV (columns n, growth)."""
    return _read(path, DERIVATIVES_COLUMNS)


def load_compare_csv(path: str) -> Table:
    """Read a `qgas compare` CSV (beta, exact, predicted, residual, ...)."""
    return _read(path, COMPARE_COLUMNS)


def render_derivative_growth(csv_paths: Sequence[str], out_path: str):
    """Log-scale plot of the derivative growth |g^(2n)(0)|^(1/2n) vs n.

    One labelled series per input file; returns the matplotlib figure.
    """
    tables = [load_derivatives_csv(p) for p in csv_paths]
    with plt.style.context(STYLE_FILE):
        fig, ax = plt.subplots()
        for tab in tables:
            if not tab.rows:
                continue
            label = os.path.splitext(os.path.basename(tab.path))[0]
            ax.plot(tab.column("n"), tab.column("growth"), marker="o", label=label)
        ax.set_yscale("log")
        ax.set_xlabel("n")
        ax.set_ylabel(r"$|g^{(2n)}(0)|^{1/(2n)}$")
        ax.set_title("Derivative growth at the origin (log scale)")
        if any(t.rows for t in tables):
            ax.legend(loc="best")
        fig.savefig(out_path)
    return fig


def render_residual_decay(csv_paths: Sequence[str], out_path: str):
    """Log-log residual-vs-beta plot with the fitted slope read from the
    CSV footer (never recomputed here)."""
    tables = [load_compare_csv(p) for p in csv_paths]
    with plt.style.context(STYLE_FILE):
        fig, ax = plt.subplots()
        for tab in tables:
            if not tab.rows:
                continue  # empty-data CSV renders as empty axes
            label = os.path.splitext(os.path.basename(tab.path))[0]
            betas = tab.column("beta")
            resid = [abs(r) for r in tab.column("residual")]
            ax.plot(betas, resid, marker="s", label=label)
            if tab.orderfit is not None:
                ax.annotate(
                    f"slope ≈ {tab.orderfit['slope']:.2f}"
                    f" (r²={tab.orderfit['r_squared']:.4f})",
                    xy=(0.05, 0.92 - 0.07 * tables.index(tab)),
                    xycoords="axes fraction",
                )
            elif tab.degenerate:
                ax.annotate(
                    "residuals at certified floor",
                    xy=(0.05, 0.92 - 0.07 * tables.index(tab)),
                    xycoords="axes fraction",
                )
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(r"$\beta$")
        ax.set_ylabel("|residual|")
        ax.set_title("Residual decay vs cutoff")
        if any(t.rows for t in tables):
            ax.legend(loc="best")
        fig.savefig(out_path)
    return fig
