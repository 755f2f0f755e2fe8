# report.py
"""Machine-readable run results (JSON and line-diffable CSV)."""
import io
import json
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from pydantic import BaseModel

from seqwit import __version__
from seqwit.config import REPORT_SIGNIFICANT_DIGITS
from seqwit.inequalities import ChainReport
from seqwit.optimizer import OptimizationResult
from seqwit.sequential import OracleCheckReport
from seqwit.thresholds import ThresholdTable, permissible_ranges, reference_deviations
from seqwit.witnesses import PositivityReport

CSV_COLUMNS = ["stage", "value", "bound", "violated"]


def _r(v: Optional[float]) -> Optional[float]:
    return None if v is None else float(f"{float(v):.{REPORT_SIGNIFICANT_DIGITS}g}")


class RunResult(BaseModel):
    command: str
    inputs: Dict[str, Any]
    values: List[float]
    bound: Optional[float]
    verdicts: List[bool]
    meta: Dict[str, Any]
    extra: Dict[str, Any] = {}
    terminator_row: bool = False
    diagnostic: Optional[str] = None


def _meta(seed: int) -> Dict[str, Any]:
    return {"seed": seed, "version": __version__}


# ---------------------------
# Adapters
# ---------------------------
def chain_result(command: str, report: ChainReport, inputs: Dict[str, Any], seed: int) -> RunResult:
    return RunResult(
        command=command,
        inputs=inputs,
        values=[_r(v) for v in report.values],
        bound=_r(report.bound),
        verdicts=list(report.verdicts),
        meta=_meta(seed),
        extra={
            "quantity": report.quantity,
            "violation_side": report.violation_side,
            "percent_violation": [_r(p) for p in report.percent_violations],
        },
    )


def _table_summary(table: ThresholdTable) -> Dict[str, Any]:
    return {
        "epsilon": table.epsilon,
        "minima": [_r(v) for v in table.minima],
        "chain_length": table.chain_length,
        "diagnostic": table.diagnostic,
    }


def threshold_result(tables: Sequence[ThresholdTable], inputs: Dict[str, Any], seed: int) -> RunResult:
    """Rows come from the first table; further epsilon scenarios go to extra["sweep"]."""
    table = tables[0]
    extra = {
        "chain_length": table.chain_length,
        "convention": table.convention,
        "epsilon": table.epsilon,
        "permissible_ranges": [[m, round(lo, 2), hi] for m, lo, hi in permissible_ranges(table)],
        "reference_minima": [ref for _, _, ref in reference_deviations(table)],
        "reference_deviation": [_r(d) for _, d, _ in reference_deviations(table)],
    }
    if len(tables) > 1:
        extra["sweep"] = [_table_summary(t) for t in tables]
    diagnostics = [f"epsilon={t.epsilon}: {t.diagnostic}" for t in tables[1:] if t.diagnostic]
    if table.diagnostic:
        diagnostics.insert(0, table.diagnostic)
    return RunResult(
        command="thresholds",
        inputs=inputs,
        values=[_r(v) for v in table.minima],
        bound=1.0,
        verdicts=[True] * table.chain_length,
        meta=_meta(seed),
        extra=extra,
        terminator_row=True,
        diagnostic="; ".join(diagnostics) or None,
    )


def optimization_result(result: OptimizationResult, inputs: Dict[str, Any], seed: int) -> RunResult:
    return RunResult(
        command="optimize",
        inputs=inputs,
        values=[_r(v) for v in result.stage_values],
        bound=_r(result.bound),
        verdicts=[v > result.bound for v in result.stage_values],
        meta=_meta(seed),
        extra={
            "best_value": _r(result.best_value),
            "reference_value": result.reference_value,
            "best_angles": [_r(a) for a in result.best_angles],
            "best_lambdas": [_r(x) for x in result.best_lambdas],
            "constraint_residuals": [_r(x) for x in result.constraint_residuals],
            "converged": result.converged,
            "restarts_used": result.restarts_used,
            "evaluations": result.evaluations,
        },
        diagnostic=None if result.converged else "no restart satisfied the constraints",
    )


def oracle_result(report: OracleCheckReport, inputs: Dict[str, Any], seed: int) -> RunResult:
    return RunResult(
        command="oracle-check",
        inputs=inputs,
        values=[_r(d) for d in report.differences],
        bound=report.tolerance,
        verdicts=[d > report.tolerance for d in report.differences],
        meta=_meta(seed),
        extra={"max_abs_difference": report.max_abs_difference, "passed": report.passed},
        diagnostic=None if report.passed else f"oracle mismatch {report.max_abs_difference:.3e}",
    )


def positivity_result(report: PositivityReport, inputs: Dict[str, Any], seed: int) -> RunResult:
    return RunResult(
        command="positivity-fuzz",
        inputs=inputs,
        values=[_r(v) for v in report.min_values],
        bound=0.0,
        verdicts=[v < -report.tolerance for v in report.min_values],
        meta=_meta(seed),
        extra={
            "lambdas": list(report.lambdas),
            "min_bound_gaps": [_r(g) for g in report.min_bound_gaps],
            "samples_per_bipartition": report.samples_per_bipartition,
            "passed": report.passed,
        },
        diagnostic=None if report.passed else "biseparable sample with negative witness value",
    )


# ---------------------------
# Emission
# ---------------------------
def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    # positional notation, never exponents
    return np.format_float_positional(
        float(v), precision=REPORT_SIGNIFICANT_DIGITS, unique=True, fractional=False, trim="0"
    )


def _to_csv(result: RunResult) -> str:
    rows = [
        [str(m), _cell(v), _cell(result.bound), _cell(flag)]
        for m, (v, flag) in enumerate(zip(result.values, result.verdicts), start=1)
    ]
    if result.terminator_row:
        rows.append([str(len(result.values) + 1), "", "", "false"])
    buf = io.StringIO()
    pd.DataFrame(rows, columns=CSV_COLUMNS).to_csv(buf, index=False, lineterminator="\n")
    return buf.getvalue()


def emit_report(result: RunResult, fmt: str = "json") -> str:
    if fmt == "json":
        return json.dumps(result.model_dump(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return _to_csv(result)
    raise ValueError(f"Unknown report format: {fmt!r} (expected 'json' or 'csv')")


def parse_report(text: str) -> RunResult:
    return RunResult.model_validate(json.loads(text))
