"""SVG renderers for stored tables.  Nothing here integrates anything."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .analysis.geometry import PENTACLE  # noqa: E402

# stable element ids, so identical data gives byte-identical files
matplotlib.rcParams["svg.hashsalt"] = "hetnet"
matplotlib.rcParams["svg.fonttype"] = "none"


def _save(fig, path, provenance: dict | None):
    desc = " ".join(f"{k}={v}" for k, v in sorted((provenance or {}).items()))
    fig.savefig(path, format="svg", metadata={"Date": None, "Description": desc or None,
                                              "Creator": "hetnet"})
    plt.close(fig)


def plot_timeseries(times, states, path, log: bool = True, provenance: dict | None = None,
                    title: str = "") -> None:
    times = np.asarray(times)
    states = np.atleast_2d(np.asarray(states))
    fig, ax = plt.subplots(figsize=(8, 3.5))
    for i in range(states.shape[1]):
        y = np.abs(states[:, i])
        if log:
            y = np.where(y > 0, y, np.nan)
        ax.plot(times, y, lw=0.9, label=f"x{i + 1}")
    if log:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("|x_j|" if log else "x_j")
    ax.legend(loc="best", fontsize="small", ncol=states.shape[1])
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path, provenance)


def plot_pentacle(times, proj, path, transient: float = 0.0, provenance: dict | None = None,
                  title: str = "") -> None:
    times = np.asarray(times)
    proj = np.asarray(proj)
    keep = times >= transient
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    corners = np.vstack([PENTACLE.T, PENTACLE.T[:1]])
    ax.plot(corners[:, 0], corners[:, 1], color="0.8", lw=0.8)
    for j, (cx, cy) in enumerate(PENTACLE.T, start=1):
        ax.annotate(f"xi{j}", (cx, cy), textcoords="offset points", xytext=(4, 4), fontsize=8)
    ax.plot(proj[keep, 0], proj[keep, 1], lw=0.7)
    ax.set_aspect("equal")
    ax.set_xlim(-1.15, 1.15)
    ax.set_ylim(-1.15, 1.15)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    _save(fig, path, provenance)
