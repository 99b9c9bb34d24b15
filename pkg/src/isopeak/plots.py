"""Figure rendering for curve sweeps.

Renders one or more CurveTables to an image file next to the delimited
output: color encodes the dimension (N=1 black, N=2 blue, N=3 red), line
style cycles through the parameter sets (solid, dashed, dotted).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_DIM_COLOR = {1: "black", 2: "blue", 3: "red"}
_STYLES = ["-", "--", ":", "-."]


def render_curves(tables, path, title: str | None = None):
    """Plot the curves on a single axes and write the figure to `path`."""
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    style_of = {}
    for table in tables:
        key = tuple(sorted(table.params.items()))
        if key not in style_of:
            style_of[key] = _STYLES[len(style_of) % len(_STYLES)]
        ax.plot(
            table.xs,
            table.values,
            linestyle=style_of[key],
            color=_DIM_COLOR.get(table.dim, "gray"),
            linewidth=1.2,
            label=table.label,
        )
    ax.set_xlabel("x")
    ax.set_ylabel({"density": "h(x)", "exceedance": "F(x)"}.get(tables[0].kind, "value"))
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8, frameon=False)
    ax.grid(True, alpha=0.25)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
