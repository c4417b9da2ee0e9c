"""Figure rendering for run reports (optional, behind the CLI --plot flag).

One figure per task, written next to the delimited output: convergence
error vs N for sweeps, |trace| vs power for profiles, the singular-value
distribution for determinant runs.  Matplotlib's Agg backend keeps this
headless-safe.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .runner import RunReport

_EPS_FLOOR = 1e-18  # log plots cannot show exact zeros; clamp and annotate


def _finite(x: float | None, default: float = np.nan) -> float:
    if x is None or not np.isfinite(x):
        return default
    return x


def plot_report(report: RunReport, path: str) -> str | None:
    """Render the figure matching the report's task; returns the path written."""
    task = report.task
    if task == "sweep":
        fig = _sweep_figure(report)
    elif task == "trace_profile":
        fig = _profile_figure(report)
    elif task == "determinant":
        fig = _determinant_figure(report)
    elif task == "deninger":
        fig = _deninger_figure(report)
    elif task in ("check_r1", "check_r2"):
        fig = _comparison_figure(report)
    else:
        return None
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _sweep_figure(report: RunReport):
    rows = report.payload["rows"]
    ns = [r["N"] for r in rows]
    errors = [max(_finite(r["abs_error"], 0.0), _EPS_FLOOR) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(ns, errors, "o-", base=2)
    ax.set_xlabel("N (cells)")
    ax.set_ylabel("|closed form - numeric|")
    name = report.scenario.get("name") or "sweep"
    ax.set_title(f"{name}: convergence of log-determinant")
    ax.grid(True, which="both", alpha=0.3)
    return fig


def _profile_figure(report: RunReport):
    rows = report.payload["rows"]
    ns = [r["n"] for r in rows]
    mags = [max(abs(complex(*r["tau_matrix"])), _EPS_FLOOR) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ns, mags, "s-")
    ax.axhline(_EPS_FLOOR, color="gray", lw=0.5)
    ax.set_xlabel("power n")
    ax.set_ylabel("|trace|  (clamped at 1e-18)")
    name = report.scenario.get("name") or "trace profile"
    ax.set_title(f"{name}: normalized trace of powers")
    ax.grid(True, alpha=0.3)
    return fig


def _determinant_figure(report: RunReport):
    sigmas = np.asarray(report.payload["fk"]["singular_values"], dtype=float)
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(np.arange(1, len(sigmas) + 1), sigmas, ".")
    ax1.set_xlabel("index")
    ax1.set_ylabel("singular value")
    ax1.set_title("singular values (descending)")
    ax2.hist(sigmas, bins=min(50, max(5, len(sigmas) // 8)), color="tab:blue", alpha=0.8)
    ax2.set_xlabel("singular value")
    ax2.set_ylabel("count")
    ax2.set_title("spectral distribution of |T|")
    for ax in (ax1, ax2):
        ax.grid(True, alpha=0.3)
    fig.suptitle(report.scenario.get("name") or "determinant")
    return fig


def _deninger_figure(report: RunReport):
    rows = report.payload["trace_profile"]
    ns = [r["n"] for r in rows]
    mags = [max(abs(complex(*r["tau_matrix"])), _EPS_FLOOR) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy(ns, mags, "s-", label="|trace of power|")
    dev = report.payload["deviation"]
    if np.isfinite(dev):
        ax.axhline(max(dev, _EPS_FLOOR), color="tab:red", ls="--",
                   label=f"|log det - log|z|| = {dev:.3e}")
    ax.set_xlabel("power n")
    ax.set_ylabel("magnitude (clamped at 1e-18)")
    ax.legend()
    name = report.scenario.get("name") or "deninger"
    ax.set_title(f"{name}: zero-trace profile and determinant deviation")
    ax.grid(True, alpha=0.3)
    return fig


def _comparison_figure(report: RunReport):
    cmp = report.payload["comparison"]
    fig, ax = plt.subplots(figsize=(5, 4))
    values = [_finite(cmp["closed_form"]), _finite(cmp["numeric"])]
    ax.bar(["closed form", "numeric"], values, color=["tab:green", "tab:blue"])
    err = cmp["abs_error"]
    ax.set_ylabel("log-determinant")
    ax.set_title(f"abs error = {err if err is None else format(err, '.3e')}")
    ax.grid(True, axis="y", alpha=0.3)
    return fig
