"""Figure rendering for pipeline runs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_round_metrics_figure(prfs, path: str | Path) -> Path:
    """Precision / recall / F1 per round as a line chart."""
    rounds = [i for i, prf in enumerate(prfs) if prf is not None]
    scored = [prf for prf in prfs if prf is not None]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(rounds, [p.precision for p in scored], marker="o", label="precision")
    ax.plot(rounds, [p.recall for p in scored], marker="s", label="recall")
    ax.plot(rounds, [p.f1 for p in scored], marker="^", label="F1")
    ax.set_xlabel("self-training round")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.05)
    ax.set_xticks(rounds)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)


def save_margin_figure(
    margins_per_round, thresholds, path: str | Path
) -> Path:
    """Per-round margin distributions with the selected threshold marked."""
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for rnd, (margins, thr) in enumerate(zip(margins_per_round, thresholds)):
        margins = np.asarray(margins)
        if margins.size == 0:
            continue
        color = colors[rnd % len(colors)]
        ax.hist(margins, bins=60, alpha=0.45, color=color, label=f"round {rnd}")
        if np.isfinite(thr):
            ax.axvline(thr, color=color, linestyle="--", linewidth=1)
    ax.set_xlabel("margin score")
    ax.set_ylabel("pairs")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return Path(path)
