"""Execute scenario tasks and collect JSON-ready report payloads.

Every number that reaches a report is either an input echoed back, a value
computed at a tolerance echoed in the same report, or an exact rational
rendered as a string.  Payloads use only plain Python types; special floats
are rewritten at serialization time.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import __version__
from .oracles import (
    HypothesisReport,
    TheoremComparison,
    TraceProfileRow,
    check_anchored_contraction,
    check_disjoint_partition,
    compare_anchored,
    compare_disjoint_partition,
    gram_structure_check,
    shifted_unit_check,
    trace_vanishing_profile,
)
from .operators import OperatorExpr, assemble
from .scenarios import ScenarioConfig, instantiate
from .spectral import FKResult, fk_determinant, log_abs_det_lu


@dataclass(frozen=True)
class RunReport:
    """The full, serializable outcome of one scenario run."""

    scenario: dict
    task: str
    payload: dict
    tolerances: dict
    timing_seconds: float | None = None

    def to_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "tool": {"name": "fkdet", "version": __version__},
            "scenario": self.scenario,
            "task": self.task,
            "result": self.payload,
            "tolerances": self.tolerances,
        }
        if include_timing and self.timing_seconds is not None:
            doc["timing_seconds"] = self.timing_seconds
        return doc


def _render(value):
    """Payload-normalize a value: fractions to 'p/q', complex to [re, im]."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    return value


def _hypotheses_doc(report: HypothesisReport) -> dict:
    return {
        "conditions": [
            {
                "label": c.label,
                "satisfied": c.satisfied,
                "value": _render(c.value),
                "threshold": c.threshold,
            }
            for c in report.conditions
        ],
        "overall": report.overall,
        "diagnostics": {k: _render(v) for k, v in report.diagnostics.items()},
    }


def _fk_doc(fk: FKResult) -> dict:
    return {
        "log_det": fk.log_det,
        "determinant": fk.determinant,
        "singular_values": [float(s) for s in fk.singular_values],
        "rank_tolerance": fk.rank_tolerance,
        "zero_count": fk.zero_count,
    }


def _comparison_doc(cmp: TheoremComparison) -> dict:
    return {
        "N": cmp.n,
        "closed_form": cmp.closed_form,
        "numeric": cmp.numeric,
        "abs_error": cmp.abs_error,
    }


def _profile_doc(rows: list[TraceProfileRow] | tuple[TraceProfileRow, ...]) -> list[dict]:
    return [
        {
            "n": r.n,
            "tau_matrix": _render(r.tau_matrix),
            "tau_normal_form": _render(r.tau_normal_form)
            if r.tau_normal_form is not None else None,
            "disagreement": r.disagreement,
        }
        for r in rows
    ]


def _run_determinant(expr: OperatorExpr, config: ScenarioConfig) -> dict:
    tol = config.tolerances
    t = assemble(expr)
    fk = fk_determinant(t, tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    return {
        "N": expr.space.n,
        "fk": _fk_doc(fk),
        "lu_log_det": log_abs_det_lu(t),
    }


def _run_check_r1(expr: OperatorExpr, config: ScenarioConfig) -> dict:
    tol = config.tolerances
    hypo = check_anchored_contraction(
        expr, config.task.i0, zero_tol=tol.zero_tol, girth_max_len=tol.girth_max_len)
    cmp = compare_anchored(
        expr, config.task.i0, zero_tol=tol.zero_tol,
        tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    return {
        "N": expr.space.n,
        "i0": config.task.i0,
        "hypotheses": _hypotheses_doc(hypo),
        "comparison": _comparison_doc(cmp),
    }


def _run_check_r2(expr: OperatorExpr, config: ScenarioConfig) -> dict:
    tol = config.tolerances
    hypo = check_disjoint_partition(expr)
    cmp = compare_disjoint_partition(
        expr, zero_tol=tol.zero_tol,
        tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    gram = gram_structure_check(expr)
    return {
        "N": expr.space.n,
        "hypotheses": _hypotheses_doc(hypo),
        "comparison": _comparison_doc(cmp),
        "gram_structure": {
            "off_diagonal_max": gram.off_diagonal_max,
            "diagonal_deviation": gram.diagonal_deviation,
            "max_deviation": gram.max_deviation,
            "worst_entry": list(gram.worst_entry),
            "ok": gram.ok,
        },
    }


def _run_deninger(expr: OperatorExpr, config: ScenarioConfig) -> dict:
    tol = config.tolerances
    rep = shifted_unit_check(
        expr, config.task.z, config.task.n_max,
        trace_tol=tol.trace_agreement * 0.01,
        tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    return {
        "N": expr.space.n,
        "z": _render(config.task.z),
        "abs_z": rep.abs_z,
        "radius_upper_bound": rep.radius_upper_bound,
        "radius_certified": rep.radius_certified,
        "trace_profile": _profile_doc(rep.profile),
        "first_nonzero_trace_n": rep.first_nonzero_trace_n,
        "numeric_log_det": rep.numeric_log_det,
        "log_abs_z": rep.log_abs_z,
        "deviation": rep.deviation,
        "cycle_log_det": rep.cycle_log_det,
        "cycle_deviation": rep.cycle_deviation,
    }


def _run_trace_profile(expr: OperatorExpr, config: ScenarioConfig) -> dict:
    tol = config.tolerances
    rows = trace_vanishing_profile(expr, config.task.n_max, agreement_tol=tol.trace_agreement)
    return {
        "N": expr.space.n,
        "n_max": config.task.n_max,
        "rows": _profile_doc(rows),
        "normal_form_complete": all(r.tau_normal_form is not None for r in rows),
    }


def _sweep_instance(config: ScenarioConfig, n: int) -> TheoremComparison:
    expr = instantiate(config, n)
    tol = config.tolerances
    theorem = config.task.theorem
    if theorem == "r1":
        return compare_anchored(
            expr, config.task.i0, zero_tol=tol.zero_tol,
            tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    if theorem == "r2":
        return compare_disjoint_partition(
            expr, zero_tol=tol.zero_tol,
            tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    # deninger: closed form in the continuum limit is log|z|
    rep = shifted_unit_check(
        expr, config.task.z, n_max=1,
        tol_factor=tol.jacobi_tol_factor, max_sweeps=tol.jacobi_max_sweeps)
    closed = math.log(rep.abs_z) if rep.abs_z > 0 else float("-inf")
    return TheoremComparison(n, closed, rep.numeric_log_det)


def _run_sweep(config: ScenarioConfig, ns: tuple[int, ...], threads: int) -> dict:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda n: _sweep_instance(config, n), ns))
    else:
        rows = [_sweep_instance(config, n) for n in ns]
    errors = [r.abs_error for r in rows]
    monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    return {
        "theorem": config.task.theorem,
        "Ns": list(ns),
        "rows": [_comparison_doc(r) for r in rows],
        "monotone_nonincreasing": monotone,
    }


def run_scenario(
    config: ScenarioConfig,
    ns_override: tuple[int, ...] | None = None,
    threads: int = 1,
) -> RunReport:
    """Run the scenario's task; returns the full report."""
    start = time.perf_counter()
    task = config.task.kind
    if task == "sweep":
        ns = ns_override if ns_override else (config.task.sweep_ns or config.n)
        payload = _run_sweep(config, tuple(ns), threads)
    else:
        expr = instantiate(config, config.n[0])
        runner = {
            "determinant": _run_determinant,
            "check_r1": _run_check_r1,
            "check_r2": _run_check_r2,
            "deninger": _run_deninger,
            "trace_profile": _run_trace_profile,
        }[task]
        payload = runner(expr, config)
    elapsed = time.perf_counter() - start
    return RunReport(
        scenario=config.to_dict(),
        task=task,
        payload=payload,
        tolerances=config.tolerances.to_dict(),
        timing_seconds=elapsed,
    )


def run_checks_only(config: ScenarioConfig) -> RunReport:
    """Hypothesis checks without any determinant numerics (CLI `check`)."""
    start = time.perf_counter()
    tol = config.tolerances
    expr = instantiate(config, config.n[0])
    payload: dict = {"N": expr.space.n}
    if config.task.kind == "check_r1" or (
        config.task.kind == "sweep" and config.task.theorem == "r1"
    ):
        hypo = check_anchored_contraction(
            expr, config.task.i0, zero_tol=tol.zero_tol, girth_max_len=tol.girth_max_len)
        payload["hypotheses"] = _hypotheses_doc(hypo)
        payload["checked"] = "anchored_contraction"
    else:
        hypo = check_disjoint_partition(expr, girth_max_len=tol.girth_max_len)
        payload["hypotheses"] = _hypotheses_doc(hypo)
        payload["checked"] = "disjoint_partition"
    elapsed = time.perf_counter() - start
    return RunReport(
        scenario=config.to_dict(),
        task="check",
        payload=payload,
        tolerances=config.tolerances.to_dict(),
        timing_seconds=elapsed,
    )
