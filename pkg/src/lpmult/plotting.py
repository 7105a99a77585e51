"""SVG figures for experiment reports.

Norm reports plot lower (solid) and upper (dashed) bounds against N, one
color per p.  LP reports plot the ratio bracket the same way.  A
Mikhlin-only report gets a single bar pair.  Output is deterministic: no
date metadata and a fixed hash salt.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

RC = {
    "svg.hashsalt": "lpmult",
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "figure.figsize": (5.0, 3.4),
    "lines.linewidth": 1.2,
    "lines.markersize": 4,
}


def _series(cells, kind, lo_key, hi_key):
    by_p = {}
    for c in cells:
        if c["cell"] == kind:
            by_p.setdefault(c["p"], []).append((c["N"], c[lo_key], c[hi_key]))
    return {p: sorted(v) for p, v in by_p.items()}


def _p_label(p) -> str:
    return "p = inf" if p in ("inf", float("inf")) else f"p = {float(p):.4g}"


def _curves(ax, series, lo_name, hi_name):
    for i, (p, rows) in enumerate(sorted(series.items(), key=lambda kv: float(kv[0]))):
        Ns = [r[0] for r in rows]
        color = f"C{i % 10}"
        ax.plot(Ns, [r[1] for r in rows], "o-", color=color, label=f"{_p_label(p)} {lo_name}")
        ax.plot(Ns, [r[2] for r in rows], "s--", color=color, label=f"{_p_label(p)} {hi_name}")
    ax.set_xscale("log", base=2)
    ax.set_xlabel("N")
    ax.legend(frameon=False)


def plot_report(report, path) -> Path:
    """Render ``report`` to ``path`` as SVG and return the path."""
    path = Path(path)
    cells = report.cells
    title = report.config.get("name") or report.config.get("kind", "")
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        norms = _series(cells, "norm", "lower", "upper")
        lps = _series(cells, "lp_constants", "ratio_min", "ratio_max")
        if norms:
            _curves(ax, norms, "lower", "upper")
            ax.set_ylabel("section norm bracket")
        elif lps:
            _curves(ax, lps, "ratio min", "ratio max")
            ax.set_ylabel("||S f|| / ||f||")
        else:
            mk = [c for c in cells if c["cell"] == "mikhlin"]
            if mk:
                ax.bar(["sup |m*'| dist", "||m|| / c"], [mk[0]["sup_product"], mk[0]["bound"]],
                       color=["C0", "C1"])
                ax.set_ylabel("value")
            else:
                ax.text(0.5, 0.5, "no cells", ha="center", va="center", transform=ax.transAxes)
        ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
