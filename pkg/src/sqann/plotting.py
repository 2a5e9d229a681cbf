"""Static SVG figures for the experiment runners.

Figures are deterministic: a fixed hash salt and stripped date metadata
make repeated runs byte-identical.  Every plot draws numbers that are
also written to a sibling CSV; the CSV is the source of truth.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_SVG_RC = {"svg.hashsalt": "sqann", "svg.fonttype": "none"}


def _save(fig, path) -> None:
    with plt.rc_context(_SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def spread_boxplots(report, path) -> None:
    """Five panels: absolute/fractional errors (all and excluding
    interpolated predictions) plus the interpolation counts, one box per
    spread level."""
    levels = list(report.levels)
    labels = [f"{s:g}" for s in levels]

    def pooled(attr, exclude_interp=False):
        out = []
        for s in levels:
            vals = []
            for t in report.trials:
                if t.spread != s:
                    continue
                v = getattr(t, attr)
                vals.append(v[~t.interpolated] if exclude_interp else v)
            pooledv = np.concatenate(vals) if vals else np.array([0.0])
            out.append(pooledv if pooledv.size else np.array([0.0]))
        return out

    panels = [
        ("abs error", pooled("abs_errors")),
        ("abs error (no interp)", pooled("abs_errors", True)),
        ("frac error", pooled("frac_errors")),
        ("frac error (no interp)", pooled("frac_errors", True)),
        ("N_interp", [[t.n_interp for t in report.trials if t.spread == s] for s in levels]),
    ]
    fig, axes = plt.subplots(1, 5, figsize=(16, 3.2))
    for ax, (title, data) in zip(axes, panels):
        ax.boxplot(data, tick_labels=labels)
        ax.set_title(title, fontsize=9)
        ax.set_xlabel("spread")
        ax.tick_params(labelsize=8)
    fig.tight_layout()
    _save(fig, path)


def ring_plot(X, Y, Xe, Ye, point_rows, path) -> None:
    """Left: fitting and external points.  Right: interpolated externals
    as open circles with segments to their two reference fitting samples."""
    fig, axes = plt.subplots(1, 2, figsize=(9, 4.2), sharex=True, sharey=True)
    for ax in axes:
        bright = Y == 1.0
        ax.scatter(X[bright, 0], X[bright, 1], c="red", s=22, label="fit y=1.0")
        ax.scatter(X[~bright, 0], X[~bright, 1], c="darkred", s=22, label="fit y=0.5")
        ax.scatter(Xe[:, 0], Xe[:, 1], c="gray", marker="x", s=14, label="external")
        ax.set_aspect("equal")
    for row in point_rows:
        i, interpolated = int(row[0]), bool(int(row[6]))
        if not interpolated:
            continue
        x1, x2 = float(row[1]), float(row[2])
        axes[1].scatter([x1], [x2], facecolors="none", edgecolors="red", s=70, zorder=3)
        for ref in (int(row[7]), int(row[8])):
            if ref >= 0:
                axes[1].plot([x1, X[ref, 0]], [x2, X[ref, 1]], lw=0.8, alpha=0.8)
    axes[0].legend(fontsize=7, loc="upper right")
    axes[0].set_title("datasets", fontsize=9)
    axes[1].set_title("interpolated points and their references", fontsize=9)
    fig.tight_layout()
    _save(fig, path)


def tnn_curve_plot(xs, ys, grid, curves, path) -> None:
    """Fitted staircase curves at several sharpness values over the samples."""
    fig, ax = plt.subplots(figsize=(6.5, 4))
    for a, vals in curves.items():
        ax.plot(grid, vals, lw=1.2, label=f"a={a:g}")
    ax.scatter(xs, ys, c="k", s=18, zorder=3, label="fitting samples")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.legend(fontsize=8)
    fig.tight_layout()
    _save(fig, path)
