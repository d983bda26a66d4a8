"""Figure rendering for report artifacts.

Forces the Agg backend so runs work headless; every helper writes a PNG
next to the delimited output and returns the path.  The CSV/JSON files
remain the deterministic contract, figures are a convenience layer.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .distributions import ChiField, marginals  # noqa: E402

_DPI = 130


def _field_title(field):
    if isinstance(field, ChiField):
        return f"joint field at t = {field.time:g}"
    return f"distribution at alpha = {field.alpha:g}"


def _extent(field):
    return [field.qgrid.minimum, field.qgrid.maximum,
            field.pgrid.minimum, field.pgrid.maximum]


def save_field_figure(path, field, title=None):
    """Heatmap of a field; one panel when it is essentially real."""
    values = field.values
    peak = float(np.abs(values).max()) or 1.0
    essentially_real = float(np.abs(values.imag).max()) < 1e-10 * peak
    if title is None:
        title = _field_title(field)
    extent = _extent(field)
    if essentially_real:
        fig, ax = plt.subplots(figsize=(6.0, 5.0))
        panels = [(ax, values.real, title)]
    else:
        fig, axes = plt.subplots(1, 2, figsize=(10.5, 4.6), sharey=True)
        panels = [(axes[0], values.real, f"{title} (real)"),
                  (axes[1], values.imag, f"{title} (imag)")]
    for ax, data, label in panels:
        # values are indexed (q, p); imshow wants rows on the vertical axis
        limit = float(np.abs(data).max()) or 1.0
        im = ax.imshow(data.T, origin="lower", extent=extent, aspect="auto",
                       cmap="RdBu_r", vmin=-limit, vmax=limit,
                       interpolation="nearest")
        ax.set_xlabel("q")
        ax.set_ylabel("p")
        ax.set_title(label)
        fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_marginals_figure(path, field):
    mq, mp = marginals(field)
    fig, (ax_q, ax_p) = plt.subplots(1, 2, figsize=(9.5, 3.6))
    ax_q.plot(field.qgrid.points(), mq)
    ax_q.set_xlabel("q")
    ax_q.set_title("position marginal")
    ax_p.plot(field.pgrid.points(), mp)
    ax_p.set_xlabel("p")
    ax_p.set_title("momentum marginal")
    for ax in (ax_q, ax_p):
        ax.axhline(0.0, color="0.8", lw=0.8, zorder=0)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_trajectory_figure(path, centroids, times=None):
    """Phase-plane plot of the centroid track, NaN rows dropped."""
    track = np.asarray(centroids, dtype=float)
    keep = np.isfinite(track).all(axis=1)
    track = track[keep]
    fig, ax = plt.subplots(figsize=(5.4, 5.0))
    if track.size:
        ax.plot(track[:, 0], track[:, 1], lw=1.2)
        ax.plot(track[0, 0], track[0, 1], "o", label="start")
        ax.plot(track[-1, 0], track[-1, 1], "x", label="end")
        ax.legend(loc="best")
    else:
        ax.text(0.5, 0.5, "no finite centroids", ha="center", va="center",
                transform=ax.transAxes)
    ax.set_xlabel("q centroid")
    ax.set_ylabel("p centroid")
    ax.set_title("centroid trajectory")
    ax.set_aspect("equal", adjustable="datalim")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def save_norm_drift_figure(path, times, normalizations):
    times = np.asarray(times, dtype=float)
    norms = np.asarray(normalizations, dtype=float)
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    ax.plot(times, norms - norms[0])
    ax.set_xlabel("t")
    ax.set_ylabel("normalization drift")
    ax.set_title("field normalization relative to start")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path
