"""Render bosegas CSV outputs to image files.

Each plot kind pins the CSV schema it accepts; inputs must carry the
producing tool's comment header, which is echoed into the figure as a
caption.  Rendering is deterministic: a fixed style, fixed geometry and
stripped image metadata make repeated renders byte-identical.
"""

import os
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

# floor for log-scale axes; exact zeros are drawn here
LOG_FLOOR = 1e-18

PINNED_STYLE = {
    "figure.figsize": (7.0, 4.5),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9.0,
    "font.family": "DejaVu Sans",
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "lines.markersize": 4.5,
    "legend.framealpha": 0.9,
    "svg.hashsalt": "gasplots",
}

# kind -> columns that must be present in the input CSV
SCHEMAS = {
    "profile": ("x1", "density_thermal", "density_with_shift"),
    "convergence": ("L", "deviation"),
    "scan": ("mu", "occupation_lowest", "box_number"),
    "deviations": ("t", "deviation"),
}


class SchemaError(ValueError):
    """Input file does not match the requested plot kind."""


@dataclass
class PlotJob:
    kind: str
    inputs: list
    output: str
    title: str = ""

    def __post_init__(self):
        if self.kind not in SCHEMAS:
            raise SchemaError(f"unknown plot kind {self.kind!r}; choose from {sorted(SCHEMAS)}")
        if not self.inputs:
            raise SchemaError("at least one input file is required")
        for path in self.inputs:
            if not os.path.exists(path):
                raise SchemaError(f"input file {path!r} does not exist")


@dataclass
class Table:
    path: str
    comments: list
    columns: list
    rows: list  # list of dicts, values kept as strings

    def numeric(self, column):
        out = []
        for row in self.rows:
            try:
                out.append(float(row[column]))
            except ValueError:
                continue  # non-numeric rows (e.g. boundary markers) are skipped
        return out

    def numeric_pairs(self, x_column, y_column):
        xs, ys = [], []
        for row in self.rows:
            try:
                x, y = float(row[x_column]), float(row[y_column])
            except ValueError:
                continue
            xs.append(x)
            ys.append(y)
        return xs, ys


def read_table(path):
    comments = []
    columns = None
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                comments.append(line.lstrip("# "))
            elif columns is None:
                columns = line.split(",")
            else:
                values = line.split(",")
                if len(values) != len(columns):
                    raise SchemaError(f"{path}: row width {len(values)} != header {len(columns)}")
                rows.append(dict(zip(columns, values)))
    if not comments or not comments[0].startswith("bosegas"):
        raise SchemaError(f"{path}: missing the producing tool's comment header")
    if columns is None:
        raise SchemaError(f"{path}: no header row")
    return Table(path, comments, columns, rows)


def _validate(table, kind):
    missing = [c for c in SCHEMAS[kind] if c not in table.columns]
    if missing:
        raise SchemaError(f"{table.path}: kind {kind!r} needs columns {missing}, "
                          f"found {table.columns}")


def _floored(values):
    return [max(v, LOG_FLOOR) for v in values]


def _caption(tables):
    lines = []
    for t in tables:
        keep = [c for c in t.comments if "=" in c or c.startswith("bosegas")]
        lines.append(f"{os.path.basename(t.path)}: " + "; ".join(keep[:6]))
    return "\n".join(lines)


def render(job: PlotJob) -> str:
    """Render one job to its output image; returns the output path."""
    tables = [read_table(p) for p in job.inputs]
    for t in tables:
        _validate(t, job.kind)
        if not t.rows:
            raise SchemaError(f"{t.path}: no data rows to plot")

    with plt.rc_context(PINNED_STYLE):
        fig, ax = plt.subplots()
        if job.kind == "profile":
            for t in tables:
                x = t.numeric("x1")
                ax.plot(x, t.numeric("density_thermal"), marker="o", label="thermal cloud")
                ax.plot(x, t.numeric("density_with_shift"), marker="s",
                        label="with condensate shift")
            ax.set_xlabel("x1")
            ax.set_ylabel("local density")
        elif job.kind == "convergence":
            for t in tables:
                x, y = t.numeric_pairs("L", "deviation")
                ax.plot(x, _floored(y), marker="o", label=os.path.basename(t.path))
            ax.set_yscale("log")
            ax.set_xscale("log", base=2)
            ax.set_xlabel("trap length L")
            ax.set_ylabel("|trap - free|")
        elif job.kind == "scan":
            for t in tables:
                mu, occ = t.numeric_pairs("mu", "occupation_lowest")
                ax.plot(mu, occ, marker="o", label="lowest-mode occupation")
                mu, box = t.numeric_pairs("mu", "box_number")
                ax.plot(mu, box, marker="s", label="box particle count")
            ax.set_xlabel("chemical potential")
            ax.set_ylabel("expected number")
        else:  # deviations
            for t in tables:
                x, y = t.numeric_pairs("t", "deviation")
                ax.bar(range(len(y)), _floored(y), tick_label=[f"t={v:g}" for v in x])
            ax.set_yscale("log")
            ax.set_ylabel("deviation")
        if job.kind != "deviations":
            ax.legend(loc="best")
        if job.title:
            ax.set_title(job.title)
        fig.text(0.01, 0.01, _caption(tables), fontsize=5.5, va="bottom", family="monospace")
        fig.tight_layout(rect=(0, 0.06, 1, 1))
        fig.savefig(job.output, metadata={"Software": None})
        plt.close(fig)
    return job.output
