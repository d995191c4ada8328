"""Sasaki-Einstein Reeb vectors of toric diagrams."""

from __future__ import annotations

from reebvolmin.charges import (
    ChargeSpectrum,
    HeatTraceEstimate,
    charge_spectrum,
    heat_trace_volume,
    lattice_count,
    lattice_points,
    volume_from_lattice_count,
)
from reebvolmin.cones import (
    GoodnessReport,
    HeightNormalization,
    PolygonDiagram,
    ToricDiagram,
    UnimodularTransform,
    detect_height,
    drop_redundant,
    dual_cone,
    faces,
    is_good,
    polygon_to_cone,
)
from reebvolmin.config import Config, load_config
from reebvolmin.dfutaki import (
    DFResult,
    HilbertSamples,
    LatticePolytopeAction,
    donaldson_futaki,
    fit_polynomials,
    ksemistable_verdict,
    toric_product_config,
)
from reebvolmin.errors import ReebVolminError
from reebvolmin.obstructions import (
    BrieskornExponents,
    ObstructionReport,
    WeightedHypersurface,
    brieskorn_tests,
    hypersurface_tests,
)
from reebvolmin.report import AnalysisReport, run_full_analysis
from reebvolmin.volmin import (
    MinimizationResult,
    ReebClass,
    classify_reeb,
    einstein_verdict,
    futaki_obstruction,
    minimize,
)
from reebvolmin.volume import ReebVector, TruncatedPolytope, grad_vol, truncate, vol_fn, volume

__all__ = [
    "AnalysisReport",
    "BrieskornExponents",
    "ChargeSpectrum",
    "Config",
    "DFResult",
    "GoodnessReport",
    "HeatTraceEstimate",
    "HeightNormalization",
    "HilbertSamples",
    "LatticePolytopeAction",
    "MinimizationResult",
    "ObstructionReport",
    "PolygonDiagram",
    "ReebClass",
    "ReebVector",
    "ReebVolminError",
    "ToricDiagram",
    "TruncatedPolytope",
    "UnimodularTransform",
    "WeightedHypersurface",
    "brieskorn_tests",
    "charge_spectrum",
    "classify_reeb",
    "detect_height",
    "donaldson_futaki",
    "drop_redundant",
    "dual_cone",
    "einstein_verdict",
    "faces",
    "fit_polynomials",
    "futaki_obstruction",
    "grad_vol",
    "heat_trace_volume",
    "hypersurface_tests",
    "is_good",
    "ksemistable_verdict",
    "lattice_count",
    "lattice_points",
    "load_config",
    "minimize",
    "polygon_to_cone",
    "run_full_analysis",
    "toric_product_config",
    "truncate",
    "vol_fn",
    "volume",
    "volume_from_lattice_count",
]
