"""Figures written next to CLI reports."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

FLOOR = 1e-18


def _finish(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_search(result, path, title: str | None = None) -> Path:
    """Defect against iteration for every restart, on a log scale."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in result.restarts:
        y = np.maximum(np.asarray(r.trajectory), FLOOR)
        ax.semilogy(np.arange(len(y)), y, lw=1, alpha=0.7)
    ax.axhline(max(result.best_defect, FLOOR), color="k", ls="--", lw=0.8, label=f"best {result.best_defect:.3g}")
    p = result.problem
    ax.set_title(title or f"K={p.input_dim}, dims={','.join(map(str, p.dims))}")
    ax.set_xlabel("iteration")
    ax.set_ylabel("masking defect")
    ax.legend(loc="upper right", fontsize=8)
    return _finish(fig, path)


def plot_kl(reports, path) -> Path:
    """One heat map per subsystem of the erasure-condition deviations."""
    n = len(reports)
    fig, axes = plt.subplots(1, n, figsize=(3.2 * n, 3), squeeze=False)
    for ax, rep in zip(axes[0], reports):
        im = ax.imshow(np.log10(np.maximum(rep.deviations, FLOOR)), cmap="viridis", vmin=-18, vmax=1)
        ax.set_title(f"j={rep.j} worst {rep.worst:.1e}", fontsize=9)
        ax.set_xlabel("k")
        ax.set_ylabel("i")
    fig.colorbar(im, ax=axes[0].tolist(), shrink=0.8, label="log10 deviation")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_fidelity(fidelities, path, label: str = "") -> Path:
    """Histogram of round-trip infidelities ``1 - F``."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    infid = np.maximum(1 - np.asarray(fidelities), FLOOR)
    ax.hist(np.log10(infid), bins=30, color="tab:blue")
    ax.set_xlabel("log10(1 - fidelity)")
    ax.set_ylabel("samples")
    if label:
        ax.set_title(label)
    return _finish(fig, path)
