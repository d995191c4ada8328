"""Truncated Reeb polytopes and the volume functional.

For a Reeb vector xi in the open Reeb cone, ``Delta(xi) = {x in C | xi·x <= 1}``
is the cone C capped by the hyperplane ``xi·x = 1``. Its vertices are the
origin and the edge rays r of C scaled by ``1/<xi, r>``, so one triangulation
of C into simplicial cones serves every xi::

    Vol(Delta(xi)) = sum_sigma |det sigma| / ((m+1)! prod_{r in sigma} <xi, r>)

Values are exact ``Fraction`` when the Reeb vector is exact and ``float``
otherwise; the optimizer uses the vectorized float kernel.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import TYPE_CHECKING, Any

import numpy as np
import sympy

from reebvolmin.cones import ToricDiagram, Vector, dual_cone, faces
from reebvolmin.errors import DegenerateVolumeError, DiagramError, InputError, UnboundedTruncationError

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

Number = Fraction | float


def parse_number(value: Any, *, exact: bool = True) -> Number:
    """Parse an int, float, Fraction or "p/q" string into the requested mode."""
    if isinstance(value, bool):
        msg = f"booleans are not numbers: {value!r}"
        raise InputError(msg)
    try:
        if isinstance(value, str):
            parsed = Fraction(value.strip())
        elif isinstance(value, float):
            parsed = Fraction(value) if exact else value
        else:
            parsed = Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        msg = f"not a rational number: {value!r}"
        raise InputError(msg) from exc
    if exact:
        return parsed
    return float(parsed)


def format_number(value: Any) -> Any:
    """JSON form of a number: Fractions as "p/q" strings, ints as ints."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, np.floating):
        return float(value)
    return value


@dataclass(frozen=True)
class ReebVector:
    """A point of the Reeb cone, tagged with its arithmetic mode."""

    xi: tuple[Any, ...]
    exact: bool = True
    on_slice: bool = False

    def __post_init__(self) -> None:
        values = tuple(parse_number(x, exact=self.exact) for x in self.xi)
        if not values:
            msg = "a Reeb vector needs at least one coordinate"
            raise InputError(msg)
        object.__setattr__(self, "xi", values)

    @classmethod
    def parse(cls, text: str, *, exact: bool = True) -> ReebVector:
        """Parse a comma separated list such as ``3,3,3`` or ``3,5/2,1``."""
        return cls(tuple(part for part in text.split(",") if part.strip()), exact=exact)

    @property
    def dim(self) -> int:
        return len(self.xi)

    def array(self) -> np.ndarray:
        return np.array([float(x) for x in self.xi], dtype=float)

    def scaled(self, c: Any) -> ReebVector:
        factor = parse_number(c, exact=self.exact)
        return ReebVector(tuple(factor * x for x in self.xi), exact=self.exact)

    def as_float(self) -> ReebVector:
        return ReebVector(tuple(float(x) for x in self.xi), exact=False, on_slice=self.on_slice)

    def to_json(self) -> dict[str, Any]:
        return {
            "xi": [format_number(x) for x in self.xi],
            "exact": self.exact,
            "on_slice": self.on_slice,
        }


@dataclass(frozen=True)
class ConeTriangulation:
    """Simplicial cones covering C, each a tuple of indices into ``rays``."""

    m: int
    rays: tuple[Vector, ...]
    simplices: tuple[tuple[int, ...], ...]
    weights: tuple[int, ...]

    @cached_property
    def ray_matrix(self) -> np.ndarray:
        return np.array(self.rays, dtype=float)

    @cached_property
    def simplex_index(self) -> np.ndarray:
        return np.array(self.simplices, dtype=np.intp)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return np.array(self.weights, dtype=float) / math.factorial(self.m + 1)


@dataclass(frozen=True)
class TruncatedPolytope:
    """Vertex description of Delta(xi); vertex 0 is the apex."""

    dim: int
    vertices: tuple[tuple[Any, ...], ...]
    facets: tuple[tuple[int, ...], ...]
    chamber: tuple[tuple[int, ...], ...]
    exact: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "vertices": [[format_number(x) for x in v] for v in self.vertices],
            "facets": [list(f) for f in self.facets],
            "chamber": [list(s) for s in self.chamber],
            "exact": self.exact,
        }


@dataclass(frozen=True)
class VolumeValue:
    """Euclidean volume of Delta(xi), the normalized functional and the Riemannian volume."""

    vol_delta: Number
    s_tilde: float
    vol_riemannian: float
    exact: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "vol_delta": format_number(self.vol_delta),
            "s_tilde": self.s_tilde,
            "vol_riemannian": self.vol_riemannian,
            "exact": self.exact,
        }


def s_tilde_constant(m: int) -> float:
    """The factor 8m(m+1)(2 pi)^(m+1) between Vol(Delta) and the functional."""
    return 8 * m * (m + 1) * (2 * math.pi) ** (m + 1)


def _integer_det(rows: Sequence[Vector]) -> int:
    return int(sympy.Matrix([list(r) for r in rows]).det())


@lru_cache(maxsize=256)
def cone_triangulation(diagram: ToricDiagram) -> ConeTriangulation:
    """Pulling triangulation of C from its lexicographically smallest ray.

    Each face is coned from its smallest ray over the facets that avoid it.
    The result depends on C only, so the combinatorial type of Delta(xi) is
    the same for every interior xi.
    """
    rays = dual_cone(diagram)
    index = {r: i for i, r in enumerate(rays)}
    by_dim: dict[int, list[frozenset[int]]] = {}
    for face in faces(diagram):
        if face.dim > 0:
            by_dim.setdefault(face.dim, []).append(frozenset(index[r] for r in face.rays))

    @lru_cache(maxsize=None)
    def pull(ray_set: frozenset[int], dim: int) -> tuple[tuple[int, ...], ...]:
        if dim == 1:
            return (tuple(ray_set),)
        apex = min(ray_set)
        out: list[tuple[int, ...]] = []
        for sub in by_dim.get(dim - 1, []):
            if sub < ray_set and apex not in sub:
                out.extend((apex, *s) for s in pull(sub, dim - 1))
        return tuple(out)

    simplices = pull(frozenset(range(len(rays))), diagram.dim)
    weights = tuple(abs(_integer_det([rays[i] for i in s])) for s in simplices)
    if not simplices or not all(weights):
        msg = "the cone could not be triangulated into full-dimensional simplices"
        raise DegenerateVolumeError(msg)
    logger.debug("Triangulated %d rays into %d simplicial cones", len(rays), len(simplices))
    return ConeTriangulation(m=diagram.m, rays=tuple(rays), simplices=simplices, weights=weights)


def _check_dims(diagram: ToricDiagram, xi: ReebVector) -> None:
    if xi.dim != diagram.dim:
        msg = f"Reeb vector has {xi.dim} coordinates, the diagram lives in R^{diagram.dim}"
        raise InputError(msg)


def _pairings(rays: Sequence[Vector], xi: ReebVector) -> list[Any]:
    return [sum((a * x for a, x in zip(r, xi.xi, strict=True)), 0 * xi.xi[0]) for r in rays]


def in_interior(diagram: ToricDiagram, xi: ReebVector) -> bool:
    """True iff <xi, r> > 0 for every edge ray r of C."""
    _check_dims(diagram, xi)
    return all(p > 0 for p in _pairings(dual_cone(diagram), xi))


def _interior_pairings(diagram: ToricDiagram, xi: ReebVector) -> tuple[ConeTriangulation, list[Any]]:
    _check_dims(diagram, xi)
    tri = cone_triangulation(diagram)
    pairings = _pairings(tri.rays, xi)
    if not all(p > 0 for p in pairings):
        raise UnboundedTruncationError.for_reeb(xi.xi)
    return tri, pairings


def truncate(diagram: ToricDiagram, xi: ReebVector) -> TruncatedPolytope:
    """Vertices, facets and chamber of Delta(xi)."""
    tri, pairings = _interior_pairings(diagram, xi)
    zero = 0 * xi.xi[0]
    apex = tuple(zero for _ in range(diagram.dim))
    cap = [tuple(a / p for a in r) if xi.exact else tuple(a / float(p) for a in r) for r, p in zip(tri.rays, pairings, strict=True)]
    if xi.exact:
        cap = [tuple(Fraction(a) for a in v) for v in cap]

    index = {r: i + 1 for i, r in enumerate(tri.rays)}
    cone_facets = [
        (0, *sorted(index[r] for r in face.rays))
        for face in faces(diagram)
        if face.dim == diagram.m and face.active
    ]
    cap_facet = tuple(range(1, len(tri.rays) + 1))
    return TruncatedPolytope(
        dim=diagram.dim,
        vertices=(apex, *cap),
        facets=(*sorted(cone_facets), cap_facet),
        chamber=tuple(tuple(i + 1 for i in s) for s in tri.simplices),
        exact=xi.exact,
    )


def volume(polytope: TruncatedPolytope) -> Number:
    """Euclidean volume by the fan of chamber simplices coned to the apex."""
    denom = math.factorial(polytope.dim)
    total: Number
    if polytope.exact:
        total = Fraction(0)
        for simplex in polytope.chamber:
            rows = [[sympy.Rational(x.numerator, x.denominator) for x in polytope.vertices[i]] for i in simplex]
            det = sympy.Matrix(rows).det()
            total += abs(Fraction(int(det.p), int(det.q))) / denom
    else:
        total = 0.0
        for simplex in polytope.chamber:
            mat = np.array([polytope.vertices[i] for i in simplex], dtype=float)
            total += abs(float(np.linalg.det(mat))) / denom
    if not polytope.chamber or total <= 0:
        msg = "the truncated polytope is flat"
        raise DegenerateVolumeError(msg)
    return total


def _volume_from_pairings(tri: ConeTriangulation, pairings: Sequence[Any], exact: bool) -> Number:
    denom = math.factorial(tri.m + 1)
    if exact:
        return sum(
            (Fraction(w, denom) / math.prod(pairings[i] for i in s) for s, w in zip(tri.simplices, tri.weights, strict=True)),
            Fraction(0),
        )
    u = np.asarray(pairings, dtype=float)
    return float(np.sum(tri.coefficients / np.prod(u[tri.simplex_index], axis=1)))


def vol_fn(diagram: ToricDiagram, xi: ReebVector) -> VolumeValue:
    """Vol(Delta(xi)), the normalized functional S~ and Vol(S, g) = S~/(4m)."""
    if diagram.m < 1:
        msg = "the volume functional needs m >= 1"
        raise DiagramError(msg)
    tri, pairings = _interior_pairings(diagram, xi)
    vol = _volume_from_pairings(tri, pairings, xi.exact)
    s_tilde = s_tilde_constant(diagram.m) * float(vol)
    return VolumeValue(
        vol_delta=vol,
        s_tilde=s_tilde,
        vol_riemannian=s_tilde / (4 * diagram.m),
        exact=xi.exact,
    )


def grad_vol(diagram: ToricDiagram, xi: ReebVector) -> tuple[Number, ...]:
    """Analytic gradient of xi -> Vol(Delta(xi)).

    Each simplicial term ``c / prod <xi, r>`` has gradient
    ``-term * sum r/<xi, r>``, so ``<xi, grad> = -(m+1) Vol`` holds exactly.
    """
    tri, pairings = _interior_pairings(diagram, xi)
    if not xi.exact:
        _vol, grad = volume_kernel(diagram).value_and_gradient(xi.array())
        return tuple(float(g) for g in grad)
    denom = math.factorial(tri.m + 1)
    grad = [Fraction(0)] * diagram.dim
    for s, w in zip(tri.simplices, tri.weights, strict=True):
        term = Fraction(w, denom) / math.prod(pairings[i] for i in s)
        for i in s:
            scale = term / pairings[i]
            for a in range(diagram.dim):
                grad[a] -= scale * tri.rays[i][a]
    return tuple(grad)


def hess_vol(diagram: ToricDiagram, xi: ReebVector) -> np.ndarray:
    """Analytic Hessian of xi -> Vol(Delta(xi)) in double precision."""
    _interior_pairings(diagram, xi)
    return volume_kernel(diagram).hessian(xi.array())


class VolumeKernel:
    """Vectorized float evaluation of Vol(Delta(xi)) and its derivatives."""

    def __init__(self, triangulation: ConeTriangulation) -> None:
        self.triangulation = triangulation
        self._rays = triangulation.ray_matrix
        self._simplices = triangulation.simplex_index
        self._coeff = triangulation.coefficients

    def pairings(self, xi: np.ndarray) -> np.ndarray:
        return self._rays @ xi

    def is_interior(self, xi: np.ndarray) -> bool:
        return bool(np.all(self.pairings(xi) > 0))

    def _terms(self, xi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        u = self.pairings(xi)
        us = u[self._simplices]
        terms = self._coeff / np.prod(us, axis=1)
        # w[t, k, :] = r_k / <xi, r_k> for the k-th ray of simplex t
        w = self._rays[self._simplices] / us[..., None]
        return terms, w

    def value(self, xi: np.ndarray) -> float:
        u = self.pairings(xi)
        return float(np.sum(self._coeff / np.prod(u[self._simplices], axis=1)))

    def value_and_gradient(self, xi: np.ndarray) -> tuple[float, np.ndarray]:
        terms, w = self._terms(xi)
        s = w.sum(axis=1)
        return float(terms.sum()), -(terms[:, None] * s).sum(axis=0)

    def hessian(self, xi: np.ndarray) -> np.ndarray:
        terms, w = self._terms(xi)
        s = w.sum(axis=1)
        return np.einsum("t,ti,tj->ij", terms, s, s) + np.einsum("t,tki,tkj->ij", terms, w, w)


@lru_cache(maxsize=256)
def volume_kernel(diagram: ToricDiagram) -> VolumeKernel:
    return VolumeKernel(cone_triangulation(diagram))
