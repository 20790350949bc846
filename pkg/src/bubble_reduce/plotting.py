"""Optional figures for reports, rendered with matplotlib's non-interactive backend.

Only the CLI's ``--plot`` flag calls into this module; the CSV and JSON
outputs never depend on it.
"""

from __future__ import annotations

from pathlib import Path

from .reports import Report

__all__ = ["render", "PLOTTED_COLUMNS"]

# (table, x column, y columns) drawn for each subcommand.
PLOTTED_COLUMNS: dict[str, tuple[str, str, tuple[str, ...]]] = {
    "green": ("axis", "t", ("robin", "green_antipodal", "phi")),
    "thm11": ("profile", "t", ("nu", "nu_prime")),
    "thm12": ("profile", "t", ("nu", "iota")),
    "remark36": ("profile", "t", ("gamma2", "iota2")),
    "prop37": ("profile", "t", ("iota2", "lhs_357")),
    "thm13": ("profile", "t", ("nu2", "iota3", "gamma3")),
    "energy": ("breakdown", "eps", ("total", "predicted")),
}

_LOG_SCALE = {"green", "energy"}


def render(report: Report, path: Path) -> Path | None:
    """Draw one panel per plotted column and save to ``path``; returns None if the command has no figure."""
    layout = PLOTTED_COLUMNS.get(report.command)
    if layout is None:
        return None
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    table_name, x_name, y_names = layout
    table = report.tables[table_name]
    x = table.column(x_name)
    fig, axes = plt.subplots(len(y_names), 1, sharex=True, figsize=(6.0, 2.2 * len(y_names)), squeeze=False)
    for ax, name in zip(axes[:, 0], y_names):
        ax.plot(x, table.column(name), lw=1.2, marker="o" if len(x) < 20 else None)
        ax.axhline(0.0, color="0.6", lw=0.6)
        ax.set_ylabel(name)
        if report.command in _LOG_SCALE:
            ax.set_xscale("log" if report.command == "energy" else "linear")
            ax.set_yscale("symlog")
    axes[-1, 0].set_xlabel(x_name)
    fig.suptitle(report.command)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path
