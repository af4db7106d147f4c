"""Matplotlib figures written next to the delimited outputs of the CLI."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .manifold import ManifoldModel
from .metrics import MetricReport
from .training import TrainRecord


def save_loss_figure(record: TrainRecord, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(record.epochs, record.recon, label="reconstruction")
    ax.plot(record.epochs, record.total, label="total")
    ax2 = ax.twinx()
    ax2.plot(record.epochs, record.kl, color="tab:green", alpha=0.6, label="KL")
    ax2.set_ylabel("KL")
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [l.get_label() for l in lines], loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_embedding_figure(m: ManifoldModel, path, grid_points=None) -> Path:
    fig, ax = plt.subplots(figsize=(7, 7))
    ax.scatter(m.embedding[:, 0], m.embedding[:, 1], c="tab:red", s=18, zorder=3,
               label="materials")
    for name, (x, y) in zip(m.names, m.embedding):
        ax.annotate(name, (x, y), fontsize=6, alpha=0.7,
                    xytext=(2, 2), textcoords="offset points")
    if grid_points is not None:
        gp = np.asarray(grid_points)
        ax.scatter(gp[:, 0], gp[:, 1], marker="x", c="k", s=24, label="grid samples")
    ax.set_xlabel("embedding x")
    ax.set_ylabel("embedding y")
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_metrics_figure(reports: list[MetricReport], path) -> Path:
    names = [r.name for r in reports]
    fig, ax = plt.subplots(figsize=(max(5, 0.5 * len(names) + 2), 4.5))
    pos = np.arange(len(names))
    ax.bar(pos - 0.2, [r.rel_ae_ratio for r in reports], width=0.4, label="ratio")
    ax.bar(pos + 0.2, [r.rel_ae_pointwise for r in reports], width=0.4, label="pointwise")
    ax.set_xticks(pos, names, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("relative absolute error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def save_sheet_figure(sheet: np.ndarray, path, row_labels=None, col_labels=None,
                      tile_size: int | None = None) -> Path:
    """Contact sheet with optional row/column labels on the margins."""
    h, w = sheet.shape[:2]
    fig, ax = plt.subplots(figsize=(w / 100, h / 100 + 0.4))
    ax.imshow(sheet)
    ax.set_xticks([])
    ax.set_yticks([])
    if tile_size:
        if row_labels:
            ax.set_yticks([tile_size * (i + 0.5) for i in range(len(row_labels))],
                          row_labels, fontsize=8)
        if col_labels:
            ax.set_xticks([tile_size * (i + 0.5) for i in range(len(col_labels))],
                          col_labels, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)
