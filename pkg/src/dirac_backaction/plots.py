"""Figure rendering for the CLI report path.

Every figure is written straight to a file (Agg backend, no display); the
CSV next to it is the authoritative data, the PNG is for eyeballing runs.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

FIG_SIZE = (6.4, 4.0)

plt.rcParams["figure.figsize"] = FIG_SIZE
plt.rcParams["axes.grid"] = True
plt.rcParams["grid.alpha"] = 0.3
plt.rcParams["font.size"] = 9


def save_figure(fig, path, dpi=150):
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)


def spectrum_figure(rows, path):
    """Level energies over the rest energy vs epsilon (one line per level/branch)."""
    fig, ax = plt.subplots()
    series = {}
    for r in rows:
        series.setdefault((r["n"], r["branch"]), []).append((r["epsilon"], r["energy_over_rest"]))
    for (n, branch), pts in sorted(series.items()):
        pts = sorted(pts)
        eps = [p[0] for p in pts]
        en = [p[1] for p in pts]
        style = "-" if branch == "+" else "--"
        ax.semilogx(eps, en, style, label=f"n={n}, {branch}")
    ax.set_xlabel(r"$\epsilon = \hbar\omega / mc^2$")
    ax.set_ylabel(r"$E / mc^2$")
    ax.legend(fontsize=7, ncol=2)
    save_figure(fig, path)


def coefficients_figure(rows, path):
    """Spinor probabilities of the positive-branch eigenstates vs epsilon."""
    fig, ax = plt.subplots()
    series = {}
    for r in rows:
        series.setdefault(r["n"], []).append(
            (r["epsilon"], r["prob_up_component"], r["prob_down_component"])
        )
    for n, pts in sorted(series.items()):
        pts = sorted(pts)
        eps = [p[0] for p in pts]
        ax.semilogx(eps, [p[1] for p in pts], "-", label=rf"$|A_{{{n}}}|^2$")
        ax.semilogx(eps, [p[2] for p in pts], "--", label=rf"$|B_{{{n}}}|^2$")
    ax.axhline(0.5, color="k", lw=0.5)
    ax.set_xlabel(r"$\epsilon = \hbar\omega / mc^2$")
    ax.set_ylabel("component probability")
    ax.legend(fontsize=7, ncol=2)
    save_figure(fig, path)


def trajectory_figure(traj, path, title="", reference=None):
    """Dimensionless position vs time, optionally against a closed-form curve."""
    fig, (ax_x, ax_z) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 5.2))
    t = traj.times
    ax_x.plot(t, traj.exp_x_dimensionless, lw=0.8, label=r"$\langle X \rangle$")
    if reference is not None:
        ax_x.plot(t, reference, "k--", lw=0.8, label="closed form")
    ax_x.fill_between(
        t,
        traj.exp_x_dimensionless - np.sqrt(traj.var_x),
        traj.exp_x_dimensionless + np.sqrt(traj.var_x),
        alpha=0.2,
        lw=0,
    )
    ax_x.set_ylabel(r"$\langle X \rangle / \sqrt{2} x_{\rm zpt}$")
    ax_x.legend(fontsize=7)
    if title:
        ax_x.set_title(title, fontsize=9)
    ax_z.plot(t, traj.exp_sigma_z, lw=0.8, color="C3")
    ax_z.set_ylabel(r"$\langle \sigma_z \rangle$")
    ax_z.set_xlabel(r"$\omega t$")
    save_figure(fig, path)


def smearing_figure(rows, path):
    """Fitted vs predicted smearing on a log-log epsilon axis."""
    fig, ax = plt.subplots()
    groups = {}
    for r in rows:
        groups.setdefault((r["n"], r["G"]), []).append(r)
    for (n, G), grp in sorted(groups.items()):
        grp = sorted(grp, key=lambda r: r["epsilon"])
        eps = [r["epsilon"] for r in grp]
        ax.loglog(eps, [r["delta_fitted"] for r in grp], "o-", ms=3, label=f"fit n={n}, G={G}")
        ax.loglog(eps, [r["delta_analytic"] for r in grp], "k--", lw=0.6)
    ax.set_xlabel(r"$\epsilon$")
    ax.set_ylabel(r"smearing $\Delta$")
    ax.legend(fontsize=7)
    save_figure(fig, path)


def fw_residuals_figure(rows, path):
    """Frame-consistency residuals per quantity, grouped over epsilon."""
    fig, ax = plt.subplots()
    quantities = sorted({r["quantity"] for r in rows})
    eps_values = sorted({r["epsilon"] for r in rows})
    width = 0.8 / max(len(eps_values), 1)
    for i, eps in enumerate(eps_values):
        xs, ys = [], []
        for j, q in enumerate(quantities):
            match = [r for r in rows if r["quantity"] == q and r["epsilon"] == eps]
            if match:
                xs.append(j + i * width)
                ys.append(max(match[0]["residual"], 1e-18))
        ax.bar(xs, ys, width=width, label=rf"$\epsilon$={eps:g}")
    ax.set_yscale("log")
    ax.set_xticks(range(len(quantities)))
    ax.set_xticklabels(quantities, rotation=30, ha="right", fontsize=6)
    ax.set_ylabel("residual")
    ax.legend(fontsize=7)
    save_figure(fig, path)


def soc_levels_figure(report, path):
    """Mapped-oscillator levels: closed form vs grid spectra."""
    fig, (ax_e, ax_d) = plt.subplots(2, 1, figsize=(6.4, 5.6))
    rows = sorted(report.rows, key=lambda r: r.energy_analytic)
    idx = np.arange(len(rows))
    scale = report.effective.rest_energy_eff
    ax_e.plot(idx, [r.energy_analytic / scale for r in rows], "k_", ms=14, label="closed form")
    ax_e.plot(idx, [r.energy_no_kinetic / scale for r in rows], "C0.", label="grid, no kinetic")
    ax_e.plot(idx, [r.energy_with_kinetic / scale for r in rows], "C1x", ms=4, label="grid, with kinetic")
    ax_e.set_ylabel(r"$E / \tilde m \tilde c^2$")
    ax_e.legend(fontsize=7)
    ax_d.semilogy(
        idx,
        [max(abs(r.kinetic_shift) / scale, 1e-18) for r in rows],
        "C1o-",
        ms=3,
        label="|kinetic shift|",
    )
    ax_d.semilogy(
        idx,
        [max(r.rel_error_no_kinetic, 1e-18) for r in rows],
        "C0s-",
        ms=3,
        label="no-kinetic rel. error",
    )
    ax_d.set_xlabel("level (sorted by |E|)")
    ax_d.set_ylabel("deviation")
    ax_d.legend(fontsize=7)
    save_figure(fig, path)
