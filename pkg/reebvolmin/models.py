"""Input documents: pydantic schemas and their conversion to domain values."""

from __future__ import annotations

import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Annotated, Any

from pydantic import AfterValidator, BaseModel, ConfigDict, Field, StrictBool, StrictFloat, StrictInt, ValidationError

from reebvolmin.cones import PolygonDiagram, ToricDiagram, polygon_to_cone
from reebvolmin.dfutaki import HilbertSamples, LatticePolytopeAction
from reebvolmin.errors import DiagramError, InputError
from reebvolmin.obstructions import BrieskornExponents, WeightedHypersurface
from reebvolmin.volume import ReebVector


def _check_rational(value: int | float | str) -> int | float | str:
    if isinstance(value, str):
        try:
            Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            msg = f"not a rational number: {value!r}"
            raise ValueError(msg) from exc
    return value


Rational = Annotated[StrictInt | StrictFloat | str, AfterValidator(_check_rational)]
IntVector = list[StrictInt]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class DiagramInput(_Strict):
    """``{"m": 2, "normals": [[1, 0, 0], ...]}``"""

    m: StrictInt | None = None
    normals: list[IntVector] = Field(min_length=1)


class PolygonInput(_Strict):
    """``{"vertices": [[0, 0], [1, 0], ...]}``"""

    vertices: list[IntVector] = Field(min_length=3)


class ReebInput(_Strict):
    """``{"xi": [3, "5/2", 1], "exact": true}``"""

    xi: list[Rational] = Field(min_length=1)
    exact: StrictBool = True


class SamplesInput(_Strict):
    """``{"n": 1, "samples": [[k, d_k, w_k], ...]}``"""

    n: StrictInt = Field(ge=0)
    samples: list[IntVector]


class PolytopeActionInput(_Strict):
    """``{"vertices": [[0], [1]], "alpha": [1]}``"""

    vertices: list[IntVector] = Field(min_length=1)
    alpha: IntVector = Field(min_length=1)


class HypersurfaceInput(_Strict):
    """``{"m": 2, "weights": [1, 1, 1, 1], "degree": 2}``"""

    m: StrictInt
    weights: IntVector
    degree: StrictInt
    smooth: StrictBool = True


class BrieskornInput(_Strict):
    """``{"exponents": [2, 2, 2, 5]}``"""

    exponents: IntVector = Field(min_length=2)
    smooth: StrictBool = True


def _pointer(loc: tuple[Any, ...]) -> str:
    return "".join(f"/{part}" for part in loc)


def _validate(model: type[_Strict], data: Any) -> Any:
    try:
        return model.model_validate(data)
    except ValidationError as exc:
        first = exc.errors()[0]
        raise InputError.at(_pointer(tuple(first["loc"])), first["msg"]) from exc


def _check_lengths(rows: list[list[int]], expected: int, field: str) -> None:
    for j, row in enumerate(rows):
        if len(row) != expected:
            raise InputError.at(f"/{field}/{j}", f"expected {expected} entries, got {len(row)}")


def to_diagram(data: Any) -> ToricDiagram:
    parsed = _validate(DiagramInput, data)
    width = len(parsed.normals[0])
    m = parsed.m if parsed.m is not None else width - 1
    _check_lengths(parsed.normals, m + 1, "normals")
    try:
        return ToricDiagram(m=m, normals=tuple(tuple(v) for v in parsed.normals))
    except DiagramError as exc:
        raise InputError.at("/normals", str(exc)) from exc


def to_polygon(data: Any) -> PolygonDiagram:
    parsed = _validate(PolygonInput, data)
    _check_lengths(parsed.vertices, 2, "vertices")
    try:
        return PolygonDiagram(tuple((p, q) for p, q in parsed.vertices))
    except DiagramError as exc:
        raise InputError.at("/vertices", str(exc)) from exc


def to_reeb(data: Any) -> ReebVector:
    parsed = _validate(ReebInput, data)
    return ReebVector(tuple(parsed.xi), exact=parsed.exact)


def to_samples(data: Any) -> HilbertSamples:
    parsed = _validate(SamplesInput, data)
    _check_lengths(parsed.samples, 3, "samples")
    return HilbertSamples(n=parsed.n, samples=tuple((k, d, w) for k, d, w in parsed.samples))


def to_polytope_action(data: Any) -> LatticePolytopeAction:
    parsed = _validate(PolytopeActionInput, data)
    _check_lengths(parsed.vertices, len(parsed.alpha), "vertices")
    try:
        return LatticePolytopeAction(tuple(tuple(v) for v in parsed.vertices), tuple(parsed.alpha))
    except DiagramError as exc:
        raise InputError.at("/vertices", str(exc)) from exc


def to_hypersurface(data: Any) -> WeightedHypersurface:
    parsed = _validate(HypersurfaceInput, data)
    return WeightedHypersurface(
        m=parsed.m, weights=tuple(parsed.weights), degree=parsed.degree, smooth_claimed=parsed.smooth
    )


def to_brieskorn(data: Any) -> BrieskornExponents:
    parsed = _validate(BrieskornInput, data)
    return BrieskornExponents(tuple(parsed.exponents), smooth_claimed=parsed.smooth)


_KINDS = (
    ({"alpha"}, to_polytope_action),
    ({"samples"}, to_samples),
    ({"exponents"}, to_brieskorn),
    ({"weights"}, to_hypersurface),
    ({"xi"}, to_reeb),
    ({"normals"}, to_diagram),
    ({"vertices"}, to_polygon),
)


def read_document(source: str | Path) -> Any:
    """Load JSON from a file path or ``-`` for standard input."""
    try:
        if str(source) == "-":
            text = sys.stdin.read()
        else:
            text = Path(source).read_text(encoding="utf-8")
    except OSError as exc:
        msg = f"cannot read {source}: {exc}"
        raise InputError(msg) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError.at("", f"malformed JSON: {exc.msg} (line {exc.lineno})") from exc


def parse_document(data: Any) -> Any:
    """Convert a decoded JSON document to the domain value its keys describe."""
    if not isinstance(data, dict):
        raise InputError.at("", "expected a JSON object")
    for keys, convert in _KINDS:
        if keys <= data.keys():
            return convert(data)
    raise InputError.at("", f"unrecognized document with keys {sorted(data)}")


def parse_inputs(source: str | Path) -> Any:
    """Read and validate one input document."""
    return parse_document(read_document(source))


def load_diagram(source: str | Path) -> tuple[ToricDiagram, PolygonDiagram | None]:
    """Read a diagram or a polygon; polygons are lifted to their height-one cone."""
    value = parse_inputs(source)
    if isinstance(value, PolygonDiagram):
        return polygon_to_cone(value), value
    if isinstance(value, ToricDiagram):
        return value, None
    raise InputError.at("", "expected a diagram or a polygon document")
