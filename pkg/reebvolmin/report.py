"""Full analysis pipeline and deterministic JSON reports."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from fractions import Fraction
from typing import Any

import numpy as np

from reebvolmin.charges import charge_spectrum, heat_trace_volume, reference_volume_ratio
from reebvolmin.cones import (
    GoodnessReport,
    HeightNormalization,
    PolygonDiagram,
    ToricDiagram,
    detect_height,
    drop_redundant,
    is_good,
    reduce_diagram,
)
from reebvolmin.config import Config
from reebvolmin.errors import (
    DiagramError,
    GoodnessReason,
    NoHeightError,
    NotGoodError,
    ReebVolminError,
)
from reebvolmin.volmin import (
    EinsteinVerdict,
    FutakiReport,
    MinimizationResult,
    ReebClass,
    classify_reeb,
    einstein_verdict,
    futaki_obstruction,
    minimize,
)
from reebvolmin.volume import ReebVector, format_number, vol_fn

logger = logging.getLogger(__name__)

SIGNIFICANT_DIGITS = 12


class ExitCode(IntEnum):
    ok = 0
    input_error = 1
    not_good = 2
    no_height = 3
    not_converged = 4


@dataclass
class AnalysisReport:
    """Everything run_full_analysis learned about one diagram."""

    input: dict[str, Any]
    goodness: GoodnessReport
    height: HeightNormalization | None = None
    minimization: MinimizationResult | None = None
    futaki_at_input: FutakiReport | None = None
    einstein: EinsteinVerdict | None = None
    charges: dict[str, Any] | None = None
    verdict: dict[str, Any] | None = None
    exit_code: ExitCode = ExitCode.ok
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> dict[str, Any]:
        return {
            "input": self.input,
            "goodness": {"mode": "exact", **self.goodness.to_json()},
            "height": None if self.height is None else {"mode": "exact", **self.height.to_json()},
            "minimization": None if self.minimization is None else {"mode": "float", **self.minimization.to_json()},
            "futaki_at_input": None
            if self.futaki_at_input is None
            else {"mode": "float", **self.futaki_at_input.to_json()},
            "einstein": None if self.einstein is None else {"mode": "float", **self.einstein.to_json()},
            "charges": self.charges,
            "verdict": self.verdict,
            "warnings": list(self.warnings),
            "exit_code": int(self.exit_code),
        }


def _regularity_statement(regularity: ReebClass) -> str:
    if regularity is ReebClass.irregular:
        return "irregular: xi_min irrational"
    return str(regularity)


def _charges_block(
    diagram: ToricDiagram,
    xi: ReebVector,
    cutoff: float | None,
    heat_trace: bool,
    config: Config,
) -> dict[str, Any]:
    block: dict[str, Any] = {"mode": "float"}
    if cutoff is not None:
        spectrum = charge_spectrum(diagram, xi, cutoff)
        block["spectrum"] = {
            "cutoff": spectrum.cutoff,
            "distinct": len(spectrum.entries),
            "total": spectrum.total,
            "lowest": [[format_number(c), mult] for c, mult in spectrum.entries[:10]],
        }
    if heat_trace:
        estimate = heat_trace_volume(diagram, xi, workers=config.threads)
        polytope = vol_fn(diagram, xi).vol_riemannian
        block["heat_trace"] = estimate.to_json()
        block["calibration"] = {
            "ratio": estimate.extrapolated / polytope,
            "reference": format_number(reference_volume_ratio(diagram.m)),
            "empirical": True,
        }
    return block


def run_full_analysis(
    diagram: ToricDiagram,
    *,
    polygon: PolygonDiagram | None = None,
    reeb: ReebVector | None = None,
    config: Config | None = None,
    drop: bool = False,
    cutoff: float | None = None,
    heat_trace: bool = False,
) -> AnalysisReport:
    """Check goodness, normalize the height, minimize and optionally cross-check charges."""
    config = config or Config()
    echo = polygon.to_json() if polygon is not None else diagram.to_json()
    if drop:
        diagram = drop_redundant(diagram)

    goodness = is_good(diagram)
    report = AnalysisReport(input=echo, goodness=goodness, warnings=list(goodness.warnings))
    if not goodness.verdict:
        report.exit_code = ExitCode.not_good
        return report

    reduced, _changed = reduce_diagram(diagram)
    report.height = detect_height(reduced)
    if report.height is None:
        report.exit_code = ExitCode.no_height
        return report

    result = minimize(reduced, tolerance=config.tolerance, max_iterations=config.max_iterations)
    report.minimization = result
    if not result.converged:
        report.exit_code = ExitCode.not_converged
        report.warnings.append("minimization did not converge")
        return report

    if reeb is not None:
        report.futaki_at_input = futaki_obstruction(reduced, reeb)
        report.einstein = einstein_verdict(
            reduced, reeb, coordinate_tolerance=config.coordinate_tolerance, result=result
        )
    if cutoff is not None or heat_trace:
        report.charges = _charges_block(reduced, result.xi_min, cutoff, heat_trace, config)

    regularity = classify_reeb(reduced, result.xi_min)
    report.verdict = {
        "admits_sasaki_einstein": True,
        "xi_min": list(result.xi_min.xi),
        "regularity": str(regularity),
        "regularity_heuristic": True,
        "statement": f"Sasaki-Einstein exists at xi_min ({_regularity_statement(regularity)})",
        "tags": ["good-cone", f"height-{report.height.ell}", "volume-minimizer", "futaki-vanishes-at-minimizer"],
    }
    return report


def exit_code_for(exc: ReebVolminError) -> ExitCode:
    """Malformed or degenerate diagrams are input errors; only goodness failures exit 2."""
    if isinstance(exc, NotGoodError):
        return ExitCode.not_good
    if isinstance(exc, DiagramError) and exc.reason is GoodnessReason.not_minimal:
        return ExitCode.not_good
    if isinstance(exc, NoHeightError):
        return ExitCode.no_height
    return ExitCode.input_error


def error_payload(exc: ReebVolminError) -> dict[str, Any]:
    """JSON error object for a failed command."""
    return {"error": {"type": type(exc).__name__, "message": str(exc), **exc.details()}}


def _normalize(value: Any) -> Any:
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Enum):
        return _normalize(value.value)
    if isinstance(value, Fraction):
        return format_number(value)
    if isinstance(value, int | np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        number = float(value)
        if not math.isfinite(number):
            return None
        return float(f"{number:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): _normalize(v) for k, v in value.items()}
    if isinstance(value, list | tuple | np.ndarray):
        return [_normalize(v) for v in value]
    if hasattr(value, "to_json"):
        return _normalize(value.to_json())
    msg = f"cannot serialize {type(value).__name__}"
    raise TypeError(msg)


def emit_json(payload: Any, *, indent: int | None = 2) -> str:
    """Serialize with sorted keys, 12 significant digits and Fractions as "p/q"."""
    return json.dumps(_normalize(payload), indent=indent, sort_keys=True, ensure_ascii=False)
