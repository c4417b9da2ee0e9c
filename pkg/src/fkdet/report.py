"""Report emission: canonical JSON, flat CSV tables, and a text summary.

JSON is the canonical format: keys sorted, two-space indent, trailing
newline, and non-finite floats rewritten to the strings "-inf" / "inf" /
"nan" (JSON has no spelling for them).  Identical scenario + tool version
produces byte-identical JSON.
"""

from __future__ import annotations

import json
import math
from typing import Any

from .runner import RunReport


def _sanitize(value: Any) -> Any:
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {k: _sanitize(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_sanitize(v) for v in value]
    return value


def _num(value: Any) -> str:
    """CSV rendering: shortest round-trip float repr; empty for missing."""
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isinf(value):
            return "-inf" if value < 0 else "inf"
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def emit_json(report: RunReport, include_timing: bool = False) -> str:
    doc = _sanitize(report.to_dict(include_timing=include_timing))
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _csv_line(cells) -> str:
    return ",".join(_num(c) for c in cells)


def emit_csv(report: RunReport) -> str:
    payload = report.payload
    task = report.task
    lines: list[str] = []
    if task == "sweep":
        lines.append("N,closed_form,numeric,abs_error")
        for row in payload["rows"]:
            lines.append(_csv_line(
                [row["N"], row["closed_form"], row["numeric"], row["abs_error"]]))
    elif task == "determinant":
        fk = payload["fk"]
        lines.append("N,log_det,determinant,zero_count,rank_tolerance,lu_log_det")
        lines.append(_csv_line([
            payload["N"], fk["log_det"], fk["determinant"], fk["zero_count"],
            fk["rank_tolerance"], payload["lu_log_det"]]))
    elif task in ("check_r1", "check_r2", "check"):
        lines.append("label,satisfied,value,threshold")
        for cond in payload["hypotheses"]["conditions"]:
            lines.append(_csv_line(
                [cond["label"], cond["satisfied"], cond["value"], cond["threshold"]]))
        if "comparison" in payload:
            cmp = payload["comparison"]
            lines.append(_csv_line(
                ["comparison", "", f"closed={_num(cmp['closed_form'])}"
                 f" numeric={_num(cmp['numeric'])}", f"abs_error={_num(cmp['abs_error'])}"]))
    elif task == "deninger":
        lines.append(
            "N,abs_z,radius_upper_bound,numeric_log_det,log_abs_z,deviation,"
            "first_nonzero_trace_n,cycle_log_det,cycle_deviation")
        lines.append(_csv_line([
            payload["N"], payload["abs_z"], payload["radius_upper_bound"],
            payload["numeric_log_det"], payload["log_abs_z"], payload["deviation"],
            payload["first_nonzero_trace_n"], payload["cycle_log_det"],
            payload["cycle_deviation"]]))
    elif task == "trace_profile":
        lines.append(
            "n,tau_matrix_re,tau_matrix_im,tau_normal_form_re,tau_normal_form_im,"
            "disagreement")
        for row in payload["rows"]:
            nf = row["tau_normal_form"]
            lines.append(_csv_line([
                row["n"], row["tau_matrix"][0], row["tau_matrix"][1],
                nf[0] if nf else None, nf[1] if nf else None, row["disagreement"]]))
    else:  # pragma: no cover - tasks are closed over TASK_KINDS
        raise ValueError(f"no csv rendering for task {task!r}")
    return "\n".join(lines) + "\n"


def _text_hypotheses(payload: dict, lines: list[str]) -> None:
    hypo = payload["hypotheses"]
    lines.append("hypotheses:")
    for cond in hypo["conditions"]:
        status = {True: "ok", False: "FAIL", None: "n/a"}[cond["satisfied"]]
        lines.append(
            f"  [{status:4}] {cond['label']}: value={_num(cond['value'])}"
            f" (need {cond['threshold']})")
    lines.append(f"  overall: {'satisfied' if hypo['overall'] else 'NOT satisfied'}")
    if hypo["diagnostics"]:
        lines.append("diagnostics:")
        for key, value in hypo["diagnostics"].items():
            lines.append(f"  {key} = {_num(value)}")


def emit_text(report: RunReport) -> str:
    payload = report.payload
    task = report.task
    scenario_name = report.scenario.get("name") or "(unnamed)"
    lines = [f"fkdet report - scenario {scenario_name!r}, task {task}"]
    if task == "sweep":
        lines.append(f"theorem: {payload['theorem']}")
        lines.append("    N    closed_form         numeric             abs_error")
        for row in payload["rows"]:
            lines.append(
                f"{row['N']:>5}  {_num(row['closed_form']):<18}  "
                f"{_num(row['numeric']):<18}  {_num(row['abs_error'])}")
        lines.append(
            "error profile is "
            + ("monotone nonincreasing" if payload["monotone_nonincreasing"]
               else "NOT monotone"))
    elif task == "determinant":
        fk = payload["fk"]
        lines.append(f"N = {payload['N']}")
        lines.append(f"log_det = {_num(fk['log_det'])}  (Delta = {_num(fk['determinant'])})")
        lines.append(
            f"zero_count = {fk['zero_count']}  rank_tolerance = {_num(fk['rank_tolerance'])}")
        lines.append(f"LU cross-check log_det = {_num(payload['lu_log_det'])}")
    elif task in ("check_r1", "check_r2", "check"):
        lines.append(f"N = {payload['N']}")
        _text_hypotheses(payload, lines)
        if "comparison" in payload:
            cmp = payload["comparison"]
            lines.append(
                f"closed_form = {_num(cmp['closed_form'])}  numeric = {_num(cmp['numeric'])}"
                f"  abs_error = {_num(cmp['abs_error'])}")
        if "gram_structure" in payload:
            gram = payload["gram_structure"]
            lines.append(
                f"T*T structure: off_diag_max = {_num(gram['off_diagonal_max'])}, "
                f"diag_deviation = {_num(gram['diagonal_deviation'])}, "
                f"ok = {gram['ok']}")
    elif task == "deninger":
        lines.append(f"N = {payload['N']}, z = {payload['z']}")
        certified = "certified" if payload["radius_certified"] else "NOT certified"
        lines.append(
            f"spectral radius bound {_num(payload['radius_upper_bound'])} vs |z| = "
            f"{_num(payload['abs_z'])} ({certified})")
        first = payload["first_nonzero_trace_n"]
        lines.append(
            "trace profile: first nonzero power "
            + (str(first) if first is not None else f"none up to {len(payload['trace_profile'])}"))
        lines.append(
            f"numeric log_det = {_num(payload['numeric_log_det'])}, log|z| = "
            f"{_num(payload['log_abs_z'])}, deviation = {_num(payload['deviation'])}")
        if payload["cycle_log_det"] is not None:
            lines.append(
                f"cyclic-shift closed form = {_num(payload['cycle_log_det'])}, "
                f"deviation from log|z| = {_num(payload['cycle_deviation'])}")
    elif task == "trace_profile":
        lines.append(f"N = {payload['N']}, powers up to {payload['n_max']}")
        lines.append("    n  tau(matrix)                      tau(normal form)")
        for row in payload["rows"]:
            tm = row["tau_matrix"]
            nf = row["tau_normal_form"]
            nf_str = f"{_num(nf[0])} + {_num(nf[1])}i" if nf else "(term cap hit)"
            lines.append(f"{row['n']:>5}  {_num(tm[0])} + {_num(tm[1])}i    {nf_str}")
    return "\n".join(lines) + "\n"


def emit(report: RunReport, fmt: str, include_timing: bool = False) -> str:
    if fmt == "json":
        return emit_json(report, include_timing=include_timing)
    if fmt == "csv":
        return emit_csv(report)
    if fmt == "text":
        return emit_text(report)
    raise ValueError(f"unknown format {fmt!r}")
