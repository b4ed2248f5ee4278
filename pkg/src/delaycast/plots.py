"""Static SVG figures: prediction scatters, QQ plots, equity curves.

All writers pin matplotlib's hash salt and strip date metadata so re-running
a command yields byte-identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

_SVG_KWARGS = {"format": "svg", "metadata": {"Date": None}}


def _new_figure(n_panels: int = 1):
    matplotlib.rcParams["svg.hashsalt"] = "delaycast"
    return plt.subplots(1, n_panels, figsize=(5.0 * n_panels, 4.5), squeeze=False)


def scatter_panels(
    path: str | Path,
    panels: list[tuple[str, np.ndarray, np.ndarray]],
    residual_cloud: tuple[np.ndarray, np.ndarray] | None = None,
) -> None:
    """Predicted-vs-observed scatter, prediction on X, one panel per model.

    residual_cloud, when given, is (predictions, pooled residuals); the cloud
    of prediction-plus-residual points is overlaid on the last panel to show
    the empirical predictive spread.
    """
    fig, axes = _new_figure(len(panels))
    for ax, (title, pred, obs) in zip(axes[0], panels):
        ok = np.isfinite(pred) & np.isfinite(obs)
        ax.scatter(pred[ok], obs[ok], s=9, color="black", zorder=3)
        ax.set_title(title)
        ax.set_xlabel("prediction")
        ax.set_ylabel("observed")
    if residual_cloud is not None:
        preds, residuals = residual_cloud
        preds = preds[np.isfinite(preds)]
        # Cap the cloud at ~2000 points with deterministic strides.
        stride_p = max(1, preds.size * residuals.size // 2000)
        pairs = [
            (p, p + r)
            for i, p in enumerate(preds)
            for j, r in enumerate(residuals)
            if (i * residuals.size + j) % stride_p == 0
        ]
        if pairs:
            cloud = np.array(pairs)
            axes[0][-1].scatter(cloud[:, 0], cloud[:, 1], s=4, color="tab:blue", alpha=0.35, zorder=2)
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)


def qq_plot(path: str | Path, qq_pairs: np.ndarray) -> None:
    """Normal QQ plot of standardized resample statistics with the identity line."""
    qq_pairs = np.asarray(qq_pairs, dtype=np.float64)
    fig, axes = _new_figure(1)
    ax = axes[0][0]
    ax.scatter(qq_pairs[:, 0], qq_pairs[:, 1], s=10, color="black")
    lim = float(np.nanmax(np.abs(qq_pairs))) * 1.05 + 1e-9
    ax.plot([-lim, lim], [-lim, lim], color="tab:red", linewidth=1)
    ax.set_xlabel("standard normal quantile")
    ax.set_ylabel("standardized sample quantile")
    ax.set_title("resampled correlations vs normal")
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)


def equity_curves(
    path: str | Path,
    times: np.ndarray,
    curves: dict[str, np.ndarray],
    dotted: str | None = None,
    dot_stride: int = 504,
) -> None:
    """Portfolio value per day; the `dotted` curve is drawn as spaced dots."""
    fig, axes = _new_figure(1)
    ax = axes[0][0]
    colors = {"buy_and_hold": "black", "strategy": "tab:red", "strategy_taxed": "tab:green"}
    for i, (label, values) in enumerate(curves.items()):
        color = colors.get(label, f"C{i}")
        if label == dotted:
            ax.plot(times[::dot_stride], values[::dot_stride], "o", color=color,
                    markersize=4, label=label)
        else:
            ax.plot(times, values, color=color, linewidth=1.2, label=label)
    ax.set_xlabel("trading day")
    ax.set_ylabel("value of $1 invested")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, **_SVG_KWARGS)
    plt.close(fig)
