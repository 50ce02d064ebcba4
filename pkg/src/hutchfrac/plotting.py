"""Figure rendering for the CLI (non-interactive Agg backend)."""

from __future__ import annotations

from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import ListedColormap  # noqa: E402

from .metrics import Cloud  # noqa: E402
from .oscillation import CONDITIONS, VERDICTS, ContractivityReport  # noqa: E402
from .spaces import DomainBox  # noqa: E402

_VERDICT_COLORS = {"verified": "#3b8b4a", "refuted": "#b8423a", "undetermined": "#9a9a9a"}


def _cloud_axes(ax, cloud: Cloud, box: DomainBox, title: Optional[str]):
    pts = cloud.points
    if pts.shape[1] == 1:
        ax.eventplot(pts[:, 0], lineoffsets=0.0, linelengths=1.0, linewidths=0.4, colors="k")
        ax.set_xlim(box.lo[0], box.hi[0])
        ax.set_yticks([])
    else:
        ax.scatter(pts[:, 0], pts[:, 1], s=0.2, c="k", marker=".", linewidths=0)
        ax.set_xlim(box.lo[0], box.hi[0])
        ax.set_ylim(box.lo[1], box.hi[1])
        ax.set_aspect("equal")
    if title:
        ax.set_title(title)


def plot_attractor(cloud: Cloud, box: DomainBox, path: Union[str, Path],
                   residuals=None, title: Optional[str] = None) -> None:
    """Cloud scatter, plus the residual history on a log scale when given."""
    ncols = 2 if residuals else 1
    fig, axes = plt.subplots(1, ncols, figsize=(4.5 * ncols, 4.2), squeeze=False)
    _cloud_axes(axes[0, 0], cloud, box, title)
    if residuals:
        ax = axes[0, 1]
        r = np.asarray(residuals, float)
        pos = r > 0
        ax.semilogy(np.arange(len(r))[pos], r[pos], "o-", ms=3, color="k")
        ax.set_xlabel("iteration")
        ax.set_ylabel("Hausdorff residual")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_verdicts(report: ContractivityReport, path: Union[str, Path],
                  title: Optional[str] = None) -> None:
    """Metric-by-condition grid of verdicts."""
    codes = np.array([[VERDICTS.index(m.status(c)) for c in CONDITIONS] for m in report.metrics])
    cmap = ListedColormap([_VERDICT_COLORS[v] for v in VERDICTS])
    fig, ax = plt.subplots(figsize=(1.2 * len(CONDITIONS) + 1.5, 0.5 * len(codes) + 1.5))
    ax.imshow(codes, cmap=cmap, vmin=0, vmax=len(VERDICTS) - 1, aspect="auto")
    ax.set_xticks(range(len(CONDITIONS)), CONDITIONS, rotation=30, ha="right")
    ax.set_yticks(range(len(codes)), [m.metric for m in report.metrics])
    for i, row in enumerate(codes):
        for j, k in enumerate(row):
            ax.text(j, i, VERDICTS[k][0].upper(), ha="center", va="center", color="white")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
