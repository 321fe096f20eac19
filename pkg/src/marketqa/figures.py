"""Report figures rendered to files next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from marketqa.evalkit import EvalReport


def save_metrics_figure(report: EvalReport, path) -> Path:
    """Bar chart of the three accuracies."""
    labels = ["overall", "positive", "trigger"]
    values = [report.overall_acc, report.positive_acc, report.trigger_acc]
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    xs = range(len(labels))
    bars = ax.bar(xs, [v if v is not None else 0.0 for v in values],
                  color=["#4878cf", "#6acc65", "#d65f5f"])
    for x, bar, v in zip(xs, bars, values):
        text = "n/a" if v is None else f"{v:.3f}"
        ax.text(x, bar.get_height() + 0.02, text, ha="center", fontsize=9)
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels)
    ax.set_ylim(0, 1.1)
    ax.set_ylabel("accuracy")
    ax.set_title(f"answer selection ({report.n_total} examples, "
                 f"{report.n_positive} with answer)")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def save_training_curves(history: list[dict], path) -> Path:
    """Loss per epoch, plus dev accuracy when present."""
    epochs = [h["epoch"] for h in history]
    losses = [h["train_loss"] for h in history]
    fig, ax = plt.subplots(figsize=(5.0, 3.2))
    ax.plot(epochs, losses, marker="o", color="#4878cf", label="train loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    dev = [(h["epoch"], h["dev_overall_acc"]) for h in history
           if h.get("dev_overall_acc") is not None]
    if dev:
        ax2 = ax.twinx()
        ax2.plot([e for e, _ in dev], [a for _, a in dev], marker="s",
                 color="#d65f5f", label="dev overall acc")
        ax2.set_ylabel("dev overall accuracy")
        ax2.set_ylim(0, 1.05)
    ax.set_title("training")
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
