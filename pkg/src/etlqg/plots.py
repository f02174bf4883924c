"""Figure rendering for the report-style CLI outputs.

Figures are written next to the delimited files they illustrate; the CSV
artifacts remain the machine-readable contract.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_DPI = 150


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def plot_tradeoff(points, path, gamma0=0.0):
    """Sampled-data cost against average sampling interval, one line per scheme."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    by_scheme = {}
    for p in points:
        by_scheme.setdefault(p.scheme, []).append(p)
    for scheme, pts in sorted(by_scheme.items()):
        pts = sorted(pts, key=lambda p: p.h_avg)
        h = np.array([p.h_avg for p in pts])
        jz = np.array([p.J_z_hat for p in pts])
        err = np.array([p.stderr for p in pts])
        ax.errorbar(h, jz, yerr=err, marker="o", capsize=3, label=scheme)
    if gamma0 > 0:
        ax.axhline(gamma0, color="0.5", ls="--", lw=1, label="continuous LQG")
    ax.set_xlabel("average sampling interval")
    ax.set_ylabel("closed-loop cost")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_ellipsoids(bounds, path):
    """Trigger boundaries for a family of ellipsoidal sets (planar only)."""
    fig, ax = plt.subplots(figsize=(5.0, 5.0))
    for b in bounds:
        pts = b.boundary_points()
        ax.plot(pts[:, 0], pts[:, 1], label=f"rho={b.rho:g}")
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    ax.legend()
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def plot_value_grid(grid, polylines, path):
    """Heatmap of the stationary value function with sampling boundaries."""
    fig, ax = plt.subplots(figsize=(5.6, 5.0))
    x1, x2 = grid.spec.axes
    im = ax.pcolormesh(x1, x2, grid.V.T, shading="auto", cmap="viridis")
    fig.colorbar(im, ax=ax, label="V")
    for label, poly in polylines:
        ax.plot(poly.points[:, 0], poly.points[:, 1], lw=1.5, label=label)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    ax.set_aspect("equal")
    if polylines:
        ax.legend(loc="upper right", fontsize=8)
    return _save(fig, path)
