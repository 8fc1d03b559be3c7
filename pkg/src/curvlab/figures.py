"""Matplotlib rendering of bound tables and simulation estimates.

Figures are written next to the delimited output; plotting is presentation
only and never feeds back into any computed quantity.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bounds import BoundTable

_CURVE_STYLE = {
    "one_minus_kappa_t": ("1 - kappa(P_t)", "tab:blue", "-"),
    "exp_minus_kappa_t": ("exp(-kappa t)", "tab:orange", "--"),
    "dbar": ("max pairwise TV", "tab:green", "-."),
    "model_specific": ("model bound", "tab:red", ":"),
}


def render_bound_table(table: BoundTable, path, title="entropy decay vs bounds"):
    """Exact entropy ratio and every tracked bound on a log scale."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    times = np.asarray(table.times)
    if table.h0 > 0:
        ratio = np.asarray(table.h_exact) / table.h0
        ax.plot(times, np.maximum(ratio, 1e-300), "k.-", label="H(mu P_t|pi) / H0")
    for kind, curve in table.curves.items():
        label, color, style = _CURVE_STYLE[kind]
        ax.plot(times, np.maximum(curve.values, 1e-300), style, color=color,
                label=label)
    if times.size > 1 and np.min(np.asarray(table.h_exact)) >= 0:
        ax.set_yscale("log")
    ax.set_xlabel("t")
    ax.set_ylabel("entropy ratio")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_estimate(est, path, reference=None, title="coalescence tail"):
    """Monte-Carlo tail with its confidence band, optionally next to an
    exact reference curve."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    times = np.asarray(est.times)
    means = est.means()
    radii = est.radii()
    ax.plot(times, means, "o-", color="tab:blue", label="estimated tail")
    ax.fill_between(times, np.clip(means - radii, 0, 1),
                    np.clip(means + radii, 0, 1),
                    color="tab:blue", alpha=0.25, label="95% CI")
    if reference is not None:
        ax.plot(times, reference, "k--", label="reference")
    ax.set_xlabel("t")
    ax.set_ylabel("P(T > t)")
    ax.set_ylim(-0.02, 1.02)
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
