"""Static line plots of a run (joint angles and image features)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FEATURE_LABELS = ("ul1", "ur1", "v1", "ul2", "ur2", "v2", "ul3", "ur3", "v3")
MAX_POINTS = 2000  # per line; the logs are far denser than a plot can show


def _stride(n: int) -> slice:
    return slice(None, None, max(1, -(-n // MAX_POINTS)))


def _save(fig, path):
    # fixed element ids and no timestamp keep the SVG byte-stable across runs
    with plt.rc_context({"svg.hashsalt": "servo-forge"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_joints(run, path, title: str = ""):
    fig, ax = plt.subplots(figsize=(8, 4.5))
    k = _stride(len(run.t))
    deg = np.degrees(run.q[k])
    for j in range(6):
        line, = ax.plot(run.t[k], deg[:, j], lw=1.2, label=f"q{j + 1}")
        ax.axhline(np.degrees(run.q_ref[-1, j]), color=line.get_color(), lw=0.6, ls="--")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("joint angle [deg]")
    ax.set_title(title or "joint angles")
    ax.legend(ncol=6, fontsize=8, loc="upper center")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_features(run, path, title: str = ""):
    fig, axes = plt.subplots(3, 1, figsize=(8, 8), sharex=True)
    k = _stride(len(run.t))
    for m, ax in enumerate(axes):
        for c in range(3):
            i = 3 * m + c
            line, = ax.plot(run.t[k], run.features[k, i], lw=1.2, label=FEATURE_LABELS[i])
            ax.axhline(run.feature_targets[0, i], color=line.get_color(), lw=0.6, ls="--")
        ax.set_ylabel(f"point {m + 1} [mm]")
        ax.legend(ncol=3, fontsize=8, loc="best")
        ax.grid(alpha=0.3)
    axes[-1].set_xlabel("time [s]")
    axes[0].set_title(title or "image coordinates (dashed: targets)")
    fig.tight_layout()
    _save(fig, path)


def write_plots(run, out_dir, title: str = ""):
    paths = (os.path.join(out_dir, "joints.svg"), os.path.join(out_dir, "features.svg"))
    plot_joints(run, paths[0], title)
    plot_features(run, paths[1], title)
    return paths
