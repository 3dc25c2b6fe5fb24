"""Deterministic SVG figures of sweep tables."""

from __future__ import annotations

from .errors import ConfigError
from .sweeps import SweepResult, read_csv


def emit_plot(table, x: str, ys, output, title: str | None = None,
              logy: bool = False) -> str:
    """Plot columns of a sweep table against one column.

    Parameters
    ----------
    table : SweepResult or path
        In-memory result or a CSV written by :func:`oposim.sweeps.write_csv`.
    x : str
        Abscissa column.
    ys : sequence of str
        Ordinate columns, at least one.
    output : path
        SVG file to write. Identical inputs give byte-identical files.

    Returns
    -------
    str
        The output path.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ys = list(ys or [])
    if not ys:
        raise ConfigError("select at least one column to plot")
    if isinstance(table, SweepResult):
        columns, data = table.columns, table.as_array()
    else:
        columns, data = read_csv(table)
    missing = [c for c in [x] + ys if c not in columns]
    if missing:
        raise ConfigError(f"unknown columns: {missing}")
    if data.shape[0] == 0:
        raise ConfigError("table has no rows")
    xs = data[:, columns.index(x)]
    with matplotlib.rc_context({"svg.hashsalt": "oposim", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        marker = "o" if len(xs) < 2 else None
        for c in ys:
            ax.plot(xs, data[:, columns.index(c)], marker=marker, label=c)
        ax.set_xlabel(x)
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        ax.legend()
        ax.grid(alpha=0.3)
        fig.tight_layout()
        fig.savefig(output, format="svg", metadata={"Date": None})
        plt.close(fig)
    return str(output)
