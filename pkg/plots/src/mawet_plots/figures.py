"""Aggregation and rendering of experiment result CSVs.

The input format is the harness output: a header line

    arch,N,K,ax,ay,az,deployment,seed,p_T_watts,nf_fraction,wall_s

followed by one row per (architecture, deployment) instance. Figures are
pure aggregations of that content: per-group means with standard
deviations over deployments, one curve per architecture. Power axes are
logarithmic because transmit powers span orders of magnitude across
antenna counts; probability axes stay linear.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402 - backend must be set first
import numpy as np  # noqa: E402


class MissingColumnError(ValueError):
    """A figure references a column absent from the CSV header."""


# figure kind -> (x column, y column, x label, y label, log-scale y)
FIGURE_KINDS = {
    "power-vs-n": ("N", "p_T_watts", "number of antennas N",
                   "mean transmit power [W]", True),
    "power-vs-k": ("K", "p_T_watts", "number of devices K",
                   "mean transmit power [W]", True),
    "nf-prob": ("ax", "nf_fraction", "deployment area side [m]",
                "near-field probability", False),
}

RC_STYLE = {
    "figure.figsize": (6.0, 4.0),
    "figure.dpi": 120,
    "savefig.dpi": 120,
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "mawet-plots",
}


@dataclass
class FigureSpec:
    inputs: list[str]
    kind: str
    output: str
    title: str | None = None

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError("unknown figure kind {!r}; expected one of {}"
                             .format(self.kind, sorted(FIGURE_KINDS)))


def read_rows(paths) -> list[dict]:
    """Rows from one or more result CSVs, numeric fields parsed."""
    rows: list[dict] = []
    for path in paths:
        with open(path, encoding="utf-8", newline="") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames is None:
                raise ValueError("{} is empty; expected a CSV header"
                                 .format(path))
            for raw in reader:
                row = dict(raw)
                for key in ("N", "K", "deployment", "seed"):
                    if key in row and row[key] is not None:
                        row[key] = int(row[key])
                for key in ("ax", "ay", "az", "p_T_watts", "nf_fraction",
                            "wall_s"):
                    if key in row and row[key] is not None:
                        row[key] = float(row[key])
                rows.append(row)
    return rows


def _require_columns(rows, paths, columns):
    if not rows:
        # nothing to check against; header-only inputs are validated by
        # whatever columns the reader saw
        for path in paths:
            with open(path, encoding="utf-8", newline="") as f:
                names = csv.DictReader(f).fieldnames or []
            missing = [c for c in columns if c not in names]
            if missing:
                raise MissingColumnError(
                    "{} lacks required column(s) {}".format(
                        path, ", ".join(missing)))
        return
    present = set(rows[0])
    missing = [c for c in columns if c not in present]
    if missing:
        raise MissingColumnError("input lacks required column(s) {}"
                                 .format(", ".join(missing)))


def aggregate(rows, x_col: str, y_col: str) -> dict:
    """Per-architecture curves: sorted x values with mean and standard
    deviation of y over the matching rows (non-finite y dropped)."""
    groups: dict[tuple, list[float]] = {}
    for row in rows:
        groups.setdefault((row["arch"], row[x_col]), []).append(row[y_col])
    curves: dict[str, dict] = {}
    for (arch, x), ys in sorted(groups.items()):
        ys = [y for y in ys if math.isfinite(y)]
        curve = curves.setdefault(arch, {"x": [], "mean": [], "std": []})
        curve["x"].append(x)
        curve["mean"].append(float(np.mean(ys)) if ys else float("nan"))
        curve["std"].append(float(np.std(ys)) if ys else float("nan"))
    return curves


def render_figure(spec: FigureSpec) -> dict:
    """Render one figure to spec.output; returns the plotted curves so
    callers can verify them against the raw CSVs."""
    x_col, y_col, x_label, y_label, log_y = FIGURE_KINDS[spec.kind]
    rows = read_rows(spec.inputs)
    _require_columns(rows, spec.inputs, ("arch", x_col, y_col))
    curves = aggregate(rows, x_col, y_col)

    with plt.rc_context(RC_STYLE):
        fig, ax = plt.subplots()
        for arch, curve in sorted(curves.items()):
            ax.errorbar(curve["x"], curve["mean"], yerr=curve["std"],
                        marker="o", capsize=3, label=arch)
        ax.set_xlabel(x_label)
        ax.set_ylabel(y_label)
        if log_y and curves:
            ax.set_yscale("log")
        if spec.title:
            ax.set_title(spec.title)
        if curves:
            ax.legend()
        fig.savefig(spec.output)
        plt.close(fig)
    return curves
