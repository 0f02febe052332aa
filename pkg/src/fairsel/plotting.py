"""Static figures written next to the delimited reports.

Uses the non-interactive Agg backend and strips the PNG software tag so that
identical inputs give byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .compare import ComparisonReport  # noqa: E402
from .metrics import MEASURES  # noqa: E402

LABELS = {
    "gm": "GM (sens x spec)",
    "dp": "Demographic parity",
    "consistency": "Consistency",
    "fperbs": "FPERBS",
    "fnerbs": "FNERBS",
}

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
    return path


def plot_front(doc: dict, path: str | Path) -> Path:
    """Pareto front in the optimisation space, with the lexicographic solution marked."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.6))
        pg = doc.get("pgaffs")
        if pg:
            pts = np.array([[m["train_objectives"]["gm"], m["train_objectives"]["mean_fairness"]]
                            for m in pg["front"]])
            order = np.argsort(pts[:, 0])
            ax.plot(pts[order, 0], pts[order, 1], "^-", color="tab:blue", label="Pareto GA front")
            f = pg["filtered"]["train_objectives"]
            ax.plot(f["gm"], f["mean_fairness"], "s", mfc="none", ms=10, color="tab:blue",
                    label="lexicographic filter")
        lg = doc.get("lgaffs")
        if lg:
            o = lg["solution"]["train_objectives"]
            ax.plot(o["gm"], o["mean_fairness"], "o", color="tab:red", label="lexicographic GA")
        ax.set_xlabel("GM (internal CV)")
        ax.set_ylabel("mean fairness (internal CV)")
        ax.set_title(f"{doc['dataset']} / {doc['sensitive']} / seed {doc['seed']}", fontsize=9)
        ax.legend(loc="best", frameon=False)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_measures(report: ComparisonReport, path: str | Path) -> Path:
    """Per-measure paired scatter: Pareto GA (x) against lexicographic GA (y)."""
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, len(MEASURES), figsize=(2.4 * len(MEASURES), 2.6))
        for j, (ax, m) in enumerate(zip(axes, MEASURES)):
            x = [r.pgaffs.values()[j] for r in report.problems]
            y = [r.lgaffs.values()[j] for r in report.problems]
            ax.plot([0, 1], [0, 1], color="0.7", lw=0.8)
            ax.scatter(x, y, s=12, color="tab:purple")
            ax.set_xlim(0, 1.02)
            ax.set_ylim(0, 1.02)
            ax.set_aspect("equal")
            ax.set_title(LABELS[m], fontsize=9)
            ax.set_xlabel("Pareto GA")
            if j == 0:
                ax.set_ylabel("lexicographic GA")
            p = report.p_values[m]
            wins = report.wins[m]
            txt = f"wins {wins[0]}:{wins[1]}" + ("" if p is None else f"\np={p:.4f}")
            ax.text(0.04, 0.96, txt, transform=ax.transAxes, va="top", fontsize=7)
        fig.tight_layout()
        return _save(fig, Path(path))


def plot_domination(report: ComparisonReport, path: str | Path) -> Path | None:
    """Stacked bars of domination counts per problem; None when no Pareto sets are present."""
    rows = [(r, d) for r, d in zip(report.problems, report.domination) if d is not None]
    if not rows:
        return None
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(max(4.0, 0.5 * len(rows) + 2), 3.2))
        x = np.arange(len(rows))
        a = np.array([d.pgaffs_dominates for _, d in rows])
        b = np.array([d.lgaffs_dominates for _, d in rows])
        c = np.array([d.no_domination for _, d in rows])
        ax.bar(x, a, color="tab:blue", label="Pareto member dominates")
        ax.bar(x, b, bottom=a, color="tab:red", label="lexicographic dominates")
        ax.bar(x, c, bottom=a + b, color="0.8", label="neither")
        labels = [f"{r.sensitive}" + ("" if r.seed is None else f"/{r.seed}") for r, _ in rows]
        ax.set_xticks(x, labels, rotation=45, ha="right")
        ax.set_ylabel("Pareto set members")
        ax.legend(frameon=False, loc="upper left", bbox_to_anchor=(1.0, 1.0))
        fig.tight_layout()
        return _save(fig, Path(path))
