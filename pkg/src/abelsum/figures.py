"""Report figures rendered headlessly next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def solution_figure(path, ts, norms, gaps, residuals=None) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    ts = np.asarray(ts, dtype=float)
    ax.semilogy(ts, np.maximum(np.asarray(norms, float), 1e-300), "o-",
                label="|u(t)|")
    ax.semilogy(ts, np.maximum(np.asarray(gaps, float), 1e-300), "s--",
                label="|u(t) - f|")
    if residuals is not None and len(residuals):
        ax.semilogy(ts, np.maximum(np.asarray(residuals, float), 1e-300), "^:",
                    label="residual")
    ax.set_xlabel("t")
    ax.set_ylabel("magnitude")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def spectrum_figure(path, lams, boundaries=None, contour=None) -> str:
    lams = np.asarray(lams, dtype=complex)
    order = np.argsort(np.abs(lams))
    lams = lams[order]
    fig, ax = plt.subplots(figsize=(6.0, 5.0))
    if boundaries is not None and len(boundaries) > 2:
        groups = np.zeros(lams.size, dtype=int)
        for g, (a, b) in enumerate(zip(boundaries[:-1], boundaries[1:])):
            groups[a:b] = g
        sc = ax.scatter(lams.real, lams.imag, c=groups, cmap="tab10", s=36)
        fig.colorbar(sc, ax=ax, label="group")
    else:
        ax.scatter(lams.real, lams.imag, s=36)
    if contour is not None:
        for piece in contour.pieces():
            s = np.linspace(0.0, 1.0, 200)
            pts = np.array([piece.at(float(v))[0] for v in s])
            ax.plot(pts.real, pts.imag, "k-", lw=0.8, alpha=0.7)
    ax.axhline(0.0, color="gray", lw=0.5)
    ax.axvline(0.0, color="gray", lw=0.5)
    ax.set_xlabel("Re")
    ax.set_ylabel("Im")
    ax.set_title("characteristic numbers")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def growth_figure(path, rs, counts, betas=None) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 4.2))
    rs = np.asarray(rs, dtype=float)
    ax.loglog(rs, np.maximum(np.asarray(counts, float), 1e-300), "o-",
              label="n(r)")
    if betas is not None and len(betas):
        ax.loglog(rs, np.maximum(np.asarray(betas, float), 1e-300), "s--",
                  label="beta(r)")
    ax.set_xlabel("r")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)


def verify_figure(path, names, margins) -> str:
    fig, ax = plt.subplots(figsize=(7.0, 0.8 + 0.55 * max(len(names), 1)))
    y = np.arange(len(names))
    vals = np.asarray(margins, dtype=float)
    colors = ["tab:green" if v >= 0 else "tab:red" for v in vals]
    shown = np.sign(vals) * np.log10(1.0 + np.abs(vals) * 1e8)
    ax.barh(y, shown, color=colors)
    ax.set_yticks(y)
    ax.set_yticklabels(names)
    ax.set_xlabel("signed log margin")
    ax.axvline(0.0, color="black", lw=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return str(path)
