"""Figure rendering for training histories and attribution dendrograms.

Every CLI command that writes a JSON artifact also drops a PNG next to it
(train -> loss/metric curves, explain -> the dendrogram), so a run leaves a
self-contained, inspectable record.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .explain import AttributionReport, DendroNode

POSITIVE_COLOR = "tab:orange"
NEGATIVE_COLOR = "tab:green"


def plot_history(history: list[dict], path) -> None:
    """Two panels: loss curves and validation metrics per epoch."""
    epochs = [h["epoch"] for h in history]
    fig, (ax_loss, ax_metric) = plt.subplots(1, 2, figsize=(9, 3.5))
    ax_loss.plot(epochs, [h["train_loss"] for h in history], label="train loss")
    ax_loss.plot(epochs, [h["val_loss"] for h in history], label="val loss")
    ax_loss.set_xlabel("epoch")
    ax_loss.set_ylabel("cross entropy")
    ax_loss.legend()
    ax_metric.plot(epochs, [h["val_accuracy"] for h in history], label="val accuracy")
    ax_metric.plot(epochs, [h["val_mcc"] for h in history], label="val MCC")
    ax_metric.set_xlabel("epoch")
    ax_metric.set_ylim(-1.05, 1.05)
    ax_metric.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_dendrogram(report: AttributionReport, path) -> None:
    """Merge-tree drawing; arcs colored by the sign of the subtree's phi sum."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.9 * len(report.groups)), 4))
    positions: dict[int, float] = {}
    _assign_leaf_positions(report.dendrogram, positions, counter=[0.0])

    def draw(node: DendroNode) -> tuple[float, float]:
        if node.is_leaf:
            return positions[node.members[0]], 0.0
        xl, yl = draw(node.left)
        xr, yr = draw(node.right)
        y = node.height
        for (x_child, y_child, child) in ((xl, yl, node.left), (xr, yr, node.right)):
            color = NEGATIVE_COLOR if (child.phi_sum or 0.0) < 0 else POSITIVE_COLOR
            ax.plot([x_child, x_child], [y_child, y], color=color, lw=1.6)
        ax.plot([xl, xr], [y, y], color="gray", lw=1.0)
        return (xl + xr) / 2.0, y

    draw(report.dendrogram)
    order = sorted(positions, key=positions.get)
    ax.set_xticks([positions[i] for i in order])
    ax.set_xticklabels(
        [f"{report.groups[i].name}\n{report.phi[i]:+.3f}" for i in order],
        rotation=45,
        ha="right",
        fontsize=8,
    )
    ax.set_ylabel("merge distance (1 - |corr|)")
    ax.set_title(f"{report.example_id}: f(x)={report.fx:.3f}, base={report.base_value:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _assign_leaf_positions(node: DendroNode, positions: dict[int, float], counter: list[float]) -> None:
    if node.is_leaf:
        positions[node.members[0]] = counter[0]
        counter[0] += 1.0
        return
    _assign_leaf_positions(node.left, positions, counter)
    _assign_leaf_positions(node.right, positions, counter)
