"""Optional matplotlib renderings of the reports the CLI writes as CSV/JSON.

Every function renders to a file; nothing is shown interactively. The CSV
outputs remain the canonical plot data — these figures are a convenience for
quick visual inspection alongside them.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .errors import BoundComparison, ErrorBound
from .sets import Box, box_project, interval_hull, project


def _add_box(ax, b: Box, **kwargs):
    ax.add_patch(Rectangle((b.lo[0], b.lo[1]), b.width[0], b.width[1], **kwargs))


def plot_error_segments(error: ErrorBound, path, dims=(0, 1)) -> None:
    """Per-segment error boxes and their union hull in one 2-D projection."""
    fig, ax = plt.subplots(figsize=(5, 4))
    for b in error.per_segment:
        _add_box(ax, box_project(b, dims), fill=False, edgecolor="tab:blue",
                 linewidth=0.7, alpha=0.7)
    _add_box(ax, box_project(error.omega_eps, dims), fill=False,
             edgecolor="tab:red", linewidth=1.5)
    ax.autoscale_view()
    ax.set_xlabel(f"error dim {dims[0] + 1}")
    ax.set_ylabel(f"error dim {dims[1] + 1}")
    ax.set_title("per-segment error boxes and union hull")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_comparison(error: ErrorBound, comp: BoundComparison, path,
                    dims=(0, 1)) -> None:
    """Nested bounds: error-set hull, its inf-norm cube, the scalar cube."""
    fig, ax = plt.subplots(figsize=(5, 4))
    n = error.omega_eps.dim
    inf_cube = Box(-comp.set_inf_norm * np.ones(n), comp.set_inf_norm * np.ones(n))
    sander_cube = Box(-comp.sander_scalar * np.ones(n),
                      comp.sander_scalar * np.ones(n))
    _add_box(ax, box_project(sander_cube, dims), fill=False,
             edgecolor="m", linewidth=1.5, label="scalar Lipschitz cube")
    _add_box(ax, box_project(inf_cube, dims), fill=False,
             edgecolor="tab:orange", linewidth=1.5, label="inf-norm cube")
    _add_box(ax, box_project(error.omega_eps, dims), fill=True, alpha=0.4,
             facecolor="tab:blue", edgecolor="tab:blue", label="error-set hull")
    ax.autoscale_view()
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel(f"error dim {dims[0] + 1}")
    ax.set_ylabel(f"error dim {dims[1] + 1}")
    ax.set_title("set-based vs scalar error bounds")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_verification(verdict, problem, path, samples=None) -> None:
    """Safe set, proxy output and expanded set (plus optional sample cloud)."""
    dims = problem.dims0
    fig, ax = plt.subplots(figsize=(5, 4))
    _add_box(ax, problem.safe_set, fill=True, alpha=0.25, facecolor="tab:green",
             edgecolor="tab:green", label="safe set")
    if verdict.expanded_set is not None:
        _add_box(ax, interval_hull(project(verdict.expanded_set, dims)),
                 fill=False, edgecolor="tab:red", linewidth=1.5,
                 label="expanded set hull")
    if verdict.proxy_output_set is not None:
        _add_box(ax, interval_hull(project(verdict.proxy_output_set, dims)),
                 fill=False, edgecolor="tab:blue", linewidth=1.5,
                 label="proxy output hull")
    if samples is not None:
        ax.plot(samples[:, dims[0]], samples[:, dims[1]], ".k",
                markersize=1, alpha=0.3, label="sampled outputs")
    ax.autoscale_view()
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel(f"output dim {problem.output_dims[0]}")
    ax.set_ylabel(f"output dim {problem.output_dims[1]}")
    ax.set_title(f"{verdict.direction}: {verdict.result}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_samples(node_samples, resnet_samples, path, dims=(0, 1)) -> None:
    """Output sample clouds for the flow and the residual map."""
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(node_samples[:, dims[0]], node_samples[:, dims[1]], ".k",
            markersize=1, alpha=0.3, label="flow outputs")
    ax.plot(resnet_samples[:, dims[0]], resnet_samples[:, dims[1]], ".b",
            markersize=1, alpha=0.3, label="residual outputs")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel(f"dim {dims[0] + 1}")
    ax.set_ylabel(f"dim {dims[1] + 1}")
    ax.set_title("output sample clouds")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
