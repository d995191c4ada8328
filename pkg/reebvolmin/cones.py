"""Exact polyhedral geometry of toric diagrams.

A toric diagram is a rational polyhedral cone ``C = {y | <lambda_j, y> >= 0}``
given by integer normals. Everything here is exact: integer and rational
arithmetic through ``fractions``, ``sympy`` and the rational mode of
``pycddlib``. No floating point is used in this module.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache, reduce
from typing import TYPE_CHECKING, Any

import cdd
import sympy
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import ZZ

from reebvolmin.errors import DiagramError, GoodnessReason

if TYPE_CHECKING:
    import random
    from collections.abc import Iterable, Sequence

logger = logging.getLogger(__name__)

Vector = tuple[int, ...]


# =============================================================================
# Domain types
# =============================================================================


@dataclass(frozen=True)
class ToricDiagram:
    """Integer inward normals of a rational polyhedral cone in R^(m+1)."""

    m: int
    normals: tuple[Vector, ...]

    def __post_init__(self) -> None:
        if self.m < 0:
            msg = f"m must be non-negative, got {self.m}"
            raise DiagramError(msg)
        if not self.normals:
            msg = "a diagram needs at least one normal"
            raise DiagramError(msg)
        normals = tuple(tuple(v) for v in self.normals)
        for j, v in enumerate(normals):
            if len(v) != self.m + 1:
                msg = f"normal {j} has {len(v)} entries, expected {self.m + 1}"
                raise DiagramError(msg)
            if not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
                msg = f"normal {j} has non-integer entries"
                raise DiagramError(msg)
            if not any(v):
                raise DiagramError.zero_normal()
        object.__setattr__(self, "normals", normals)

    @classmethod
    def from_normals(cls, normals: Iterable[Sequence[int]]) -> ToricDiagram:
        """Build a diagram, inferring m from the length of the normals."""
        rows = tuple(tuple(int(x) for x in v) for v in normals)
        if not rows:
            msg = "a diagram needs at least one normal"
            raise DiagramError(msg)
        return cls(m=len(rows[0]) - 1, normals=rows)

    @property
    def dim(self) -> int:
        """Dimension m+1 of the ambient space."""
        return self.m + 1

    @property
    def d(self) -> int:
        """Number of normals."""
        return len(self.normals)

    def to_json(self) -> dict[str, Any]:
        return {"m": self.m, "normals": [list(v) for v in self.normals]}


@dataclass(frozen=True)
class PolygonDiagram:
    """Counterclockwise vertices of a strictly convex lattice polygon."""

    vertices: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        vertices = tuple((int(p), int(q)) for p, q in self.vertices)
        object.__setattr__(self, "vertices", vertices)
        if len(vertices) < 3:
            msg = "invalid polygon: at least three vertices are needed"
            raise DiagramError(msg)
        n = len(vertices)
        for j in range(n):
            (x0, y0), (x1, y1) = vertices[j], vertices[(j + 1) % n]
            for i in range(n):
                if i in (j, (j + 1) % n):
                    continue
                x, y = vertices[i]
                if (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0) <= 0:
                    msg = (
                        f"invalid polygon: vertex {i} is not strictly left of edge {j}; "
                        "vertices must be strictly convex and counterclockwise"
                    )
                    raise DiagramError(msg)

    def edges(self) -> list[tuple[int, int]]:
        """Edge vectors v_{j+1} - v_j, cyclically."""
        n = len(self.vertices)
        return [
            (self.vertices[(j + 1) % n][0] - p, self.vertices[(j + 1) % n][1] - q)
            for j, (p, q) in enumerate(self.vertices)
        ]

    def to_json(self) -> dict[str, Any]:
        return {"vertices": [list(v) for v in self.vertices]}


@dataclass(frozen=True)
class UnimodularTransform:
    """An integer matrix of determinant one acting on normals and Reeb vectors."""

    g: tuple[Vector, ...]

    def __post_init__(self) -> None:
        rows = tuple(tuple(int(x) for x in row) for row in self.g)
        object.__setattr__(self, "g", rows)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            msg = "a unimodular transform must be a non-empty square matrix"
            raise DiagramError(msg)
        det = sympy.Matrix(rows).det()
        if det != 1:
            msg = f"transform has determinant {det}, expected 1"
            raise DiagramError(msg)

    @classmethod
    def identity(cls, n: int) -> UnimodularTransform:
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.g)

    def apply(self, v: Sequence[Any]) -> tuple[Any, ...]:
        """Return g·v; works for int, Fraction and float entries."""
        return tuple(sum((a * x for a, x in zip(row, v, strict=True)), 0 * v[0]) for row in self.g)

    def apply_to_diagram(self, diagram: ToricDiagram) -> ToricDiagram:
        """Transform every normal by g."""
        return ToricDiagram(
            m=diagram.m, normals=tuple(tuple(self.apply(v)) for v in diagram.normals)
        )

    def inverse(self) -> UnimodularTransform:
        inv = sympy.Matrix(self.g).inv()
        return UnimodularTransform(tuple(tuple(int(x) for x in inv.row(i)) for i in range(self.n)))

    def compose(self, other: UnimodularTransform) -> UnimodularTransform:
        """Return self·other."""
        prod = sympy.Matrix(self.g) * sympy.Matrix(other.g)
        return UnimodularTransform(tuple(tuple(int(x) for x in prod.row(i)) for i in range(self.n)))

    def to_json(self) -> list[list[int]]:
        return [list(row) for row in self.g]


@dataclass(frozen=True)
class GoodnessReport:
    """Outcome of the goodness check."""

    verdict: bool
    failing_face: tuple[int, ...] | None = None
    reason: GoodnessReason | None = None
    reduced: tuple[int, ...] = ()
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.verdict and self.failing_face is None and self.reason is None:
            msg = "a failing goodness report needs a face or a reason"
            raise ValueError(msg)

    def to_json(self) -> dict[str, Any]:
        return {
            "verdict": self.verdict,
            "failing_face": None if self.failing_face is None else list(self.failing_face),
            "reason": None if self.reason is None else str(self.reason),
            "reduced_normals": list(self.reduced),
            "warnings": list(self.warnings),
        }


@dataclass(frozen=True)
class Face:
    """A face of C, identified by the normals vanishing on it."""

    active: frozenset[int]
    dim: int
    rays: tuple[Vector, ...] = field(default=(), compare=False)
    lines: tuple[Vector, ...] = field(default=(), compare=False)

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.active))


@dataclass(frozen=True)
class HeightNormalization:
    """A height covector e with <e, lambda_j> = ell and a g in SL(m+1, Z) with first row e."""

    ell: int
    covector: Vector
    transform: UnimodularTransform

    def normalize(self, diagram: ToricDiagram) -> ToricDiagram:
        """Return the diagram with every normal of the form (ell, ...)."""
        return self.transform.apply_to_diagram(diagram)

    def to_json(self) -> dict[str, Any]:
        return {"ell": self.ell, "covector": list(self.covector), "g": self.transform.to_json()}


# =============================================================================
# Exact helpers
# =============================================================================


def _dot(a: Sequence[Any], b: Sequence[Any]) -> Any:
    return sum((x * y for x, y in zip(a, b, strict=True)), 0)


def _primitive_from_rational(row: Sequence[Any]) -> Vector:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    fracs = [Fraction(x) for x in row]
    lcm = reduce(math.lcm, (f.denominator for f in fracs), 1)
    ints = [int(f * lcm) for f in fracs]
    return primitive_reduce(ints)


def _inequality_matrix(normals: Sequence[Vector], equalities: Iterable[int] = ()) -> cdd.Matrix:
    """H-representation ``0 + <lambda, y> >= 0`` with optional equality rows."""
    mat = cdd.Matrix([[0, *v] for v in normals], number_type="fraction")
    mat.rep_type = cdd.RepType.INEQUALITY
    eq_rows = [[0, *normals[i]] for i in sorted(equalities)]
    if eq_rows:
        mat.extend(eq_rows, linear=True)
    return mat


@lru_cache(maxsize=4096)
def _generators(diagram: ToricDiagram, active: frozenset[int]) -> tuple[tuple[Vector, ...], tuple[Vector, ...]]:
    """Rays and lines of ``C ∩ {<lambda_i, y> = 0 : i in active}``."""
    poly = cdd.Polyhedron(_inequality_matrix(diagram.normals, active))
    gens = poly.get_generators()
    lin = set(gens.lin_set)
    rays: set[Vector] = set()
    lines: list[Vector] = []
    for i in range(gens.row_size):
        row = gens[i]
        if Fraction(row[0]) != 0 or not any(Fraction(x) != 0 for x in row[1:]):
            continue
        vec = _primitive_from_rational(row[1:])
        if i in lin:
            lines.append(vec)
        else:
            rays.add(vec)
    return tuple(sorted(rays)), tuple(sorted(lines))


def _rank(rows: Sequence[Sequence[int]]) -> int:
    if not rows:
        return 0
    return int(sympy.Matrix([list(r) for r in rows]).rank())


def _is_saturated(rows: Sequence[Vector]) -> bool:
    """True iff every elementary divisor of the integer matrix equals one."""
    snf = smith_normal_form(sympy.Matrix([list(r) for r in rows]), domain=ZZ)
    return all(abs(snf[i, i]) == 1 for i in range(len(rows)))


# =============================================================================
# Operations
# =============================================================================


def primitive_reduce(v: Sequence[int]) -> Vector:
    """Divide an integer vector by the gcd of its entries."""
    ints = tuple(int(x) for x in v)
    g = math.gcd(*ints)
    if g == 0:
        raise DiagramError.zero_normal()
    return tuple(x // g for x in ints)


def reduce_diagram(diagram: ToricDiagram) -> tuple[ToricDiagram, tuple[int, ...]]:
    """Make every normal primitive; return the new diagram and the touched indices."""
    reduced = tuple(primitive_reduce(v) for v in diagram.normals)
    changed = tuple(j for j, (a, b) in enumerate(zip(diagram.normals, reduced, strict=True)) if a != b)
    return ToricDiagram(m=diagram.m, normals=reduced), changed


def check_minimal(diagram: ToricDiagram) -> list[int]:
    """Indices of normals whose inequality is implied by the others."""
    mat = _inequality_matrix(diagram.normals)
    _implicit, redundant = mat.canonicalize()
    return sorted(int(i) for i in redundant)


def drop_redundant(diagram: ToricDiagram) -> ToricDiagram:
    """Remove the normals reported by check_minimal."""
    redundant = set(check_minimal(diagram))
    if not redundant:
        return diagram
    logger.warning("Dropping redundant normals %s", sorted(redundant))
    kept = tuple(v for j, v in enumerate(diagram.normals) if j not in redundant)
    return ToricDiagram(m=diagram.m, normals=kept)


def has_interior(diagram: ToricDiagram) -> bool:
    """True iff the strict inequalities <lambda_j, y> > 0 are simultaneously feasible."""
    implicit, _redundant = _inequality_matrix(diagram.normals).canonicalize()
    return not implicit


def dual_cone(diagram: ToricDiagram) -> list[Vector]:
    """Primitive edge rays of C, sorted lexicographically.

    These are the generators r for which ``<xi, r> > 0`` for all r describes the
    open Reeb cone; applying ``dual_cone`` to them as normals gives back the
    facet normals of C.
    """
    if not has_interior(diagram):
        raise DiagramError.degenerate("the cone has empty interior")
    rays, lines = _generators(diagram, frozenset())
    if lines:
        raise DiagramError.degenerate("the cone contains a line, so the Reeb cone has empty interior")
    return list(rays)


def _closure(diagram: ToricDiagram, active: frozenset[int]) -> Face:
    rays, lines = _generators(diagram, active)
    gens = rays + lines
    closed = frozenset(
        i for i, v in enumerate(diagram.normals) if all(_dot(v, g) == 0 for g in gens)
    )
    return Face(active=closed, dim=_rank(gens), rays=rays, lines=lines)


def faces(diagram: ToricDiagram) -> list[Face]:
    """Every nonempty face of C exactly once, largest dimension first."""
    top = _closure(diagram, frozenset())
    found: dict[frozenset[int], Face] = {top.active: top}
    queue = [top]
    while queue:
        face = queue.pop()
        for j in range(diagram.d):
            if j in face.active:
                continue
            sub = _closure(diagram, face.active | {j})
            if sub.active not in found:
                found[sub.active] = sub
                queue.append(sub)
    return sorted(found.values(), key=lambda f: (-f.dim, len(f.active), f.key()))


def face_rays(diagram: ToricDiagram, face: Face) -> list[Vector]:
    """Edge rays of C lying on the given face."""
    return [r for r in dual_cone(diagram) if all(_dot(diagram.normals[i], r) == 0 for i in face.active)]


def is_good(diagram: ToricDiagram, *, auto_reduce: bool = True) -> GoodnessReport:
    """Decide the goodness condition on every face except the apex."""
    reduced, changed = reduce_diagram(diagram)
    warnings: list[str] = []
    if changed:
        if not auto_reduce:
            return GoodnessReport(
                verdict=False, reason=GoodnessReason.not_primitive, reduced=changed
            )
        note = f"normals {list(changed)} were not primitive and have been reduced"
        logger.warning(note)
        warnings.append(note)
    redundant = check_minimal(reduced)
    if redundant:
        raise DiagramError.not_minimal(redundant)
    if not has_interior(reduced):
        raise DiagramError.degenerate("the cone has empty interior")

    for face in faces(reduced):
        if not face.active or face.dim == 0:
            continue
        rows = [reduced.normals[i] for i in face.key()]
        if _rank(rows) < len(rows):
            return GoodnessReport(
                verdict=False,
                failing_face=face.key(),
                reason=GoodnessReason.not_independent,
                reduced=changed,
                warnings=tuple(warnings),
            )
        if not _is_saturated(rows):
            return GoodnessReport(
                verdict=False,
                failing_face=face.key(),
                reason=GoodnessReason.lattice_saturation_fails,
                reduced=changed,
                warnings=tuple(warnings),
            )
    return GoodnessReport(verdict=True, reduced=changed, warnings=tuple(warnings))


def _unimodular_with_first_row(e: Vector) -> UnimodularTransform:
    """Complete a primitive covector to a matrix in SL(n, Z) with first row e.

    Column operations reduce e to (1, 0, ..., 0), the Hermite form of a
    primitive row; the inverse of the accumulated column operations has e as
    its first row.
    """
    n = len(e)
    row = list(e)
    cols = [[int(i == j) for j in range(n)] for i in range(n)]  # cols[i] = column i of V

    while sum(1 for x in row if x) > 1:
        pivot = min((i for i in range(n) if row[i]), key=lambda i: (abs(row[i]), i))
        for i in range(n):
            if i == pivot or not row[i]:
                continue
            q = row[i] // row[pivot]
            row[i] -= q * row[pivot]
            cols[i] = [a - q * b for a, b in zip(cols[i], cols[pivot], strict=True)]
    lead = next(i for i in range(n) if row[i])
    cols[0], cols[lead] = cols[lead], cols[0]
    if row[lead] < 0:
        cols[0] = [-a for a in cols[0]]

    v = sympy.Matrix(cols).T
    g = v.inv()
    if g.det() < 0:
        g[n - 1, :] = -g[n - 1, :]
    return UnimodularTransform(tuple(tuple(int(x) for x in g.row(i)) for i in range(n)))


def _integer_kernel(rows: Sequence[Sequence[int]], n: int) -> list[Vector]:
    """A basis of {x in Z^n : <row, x> = 0 for every row}."""
    rank, cols = _column_echelon(rows, n)
    return cols[rank:]


def _column_echelon(rows: Sequence[Sequence[int]], n: int) -> tuple[int, list[Vector]]:
    """Rank and the columns of U in GL(n, Z) with rows . U = [H | 0].

    H is lower echelon with nonzero pivots, so the columns of U facing the
    zero block span the integer kernel of the rows.
    """
    a = [list(r) for r in rows]
    cols = [[int(i == j) for j in range(n)] for i in range(n)]  # cols[j] = column j of U
    rank = 0
    for r in range(len(a)):
        while True:
            nz = [j for j in range(rank, n) if a[r][j]]
            if len(nz) <= 1:
                break
            pivot = min(nz, key=lambda j: (abs(a[r][j]), j))
            for j in nz:
                if j == pivot:
                    continue
                q = a[r][j] // a[r][pivot]
                for row in a:
                    row[j] -= q * row[pivot]
                cols[j] = [x - q * y for x, y in zip(cols[j], cols[pivot], strict=True)]
        if nz:
            j = nz[0]
            for row in a:
                row[rank], row[j] = row[j], row[rank]
            cols[rank], cols[j] = cols[j], cols[rank]
            rank += 1
    return rank, [tuple(c) for c in cols]


def _hermite_rows(rows: Sequence[Vector], n: int) -> list[Vector]:
    """Row Hermite normal form of an integer lattice basis (positive pivots, reduced above)."""
    pending = [list(r) for r in rows]
    done: list[list[int]] = []
    for col in range(n):
        while True:
            nz = [i for i, r in enumerate(pending) if r[col]]
            if len(nz) <= 1:
                break
            pivot = min(nz, key=lambda i: (abs(pending[i][col]), i))
            for i in nz:
                if i != pivot:
                    q = pending[i][col] // pending[pivot][col]
                    pending[i] = [x - q * y for x, y in zip(pending[i], pending[pivot], strict=True)]
        if not nz:
            continue
        row = pending.pop(nz[0])
        if row[col] < 0:
            row = [-x for x in row]
        for k, prev in enumerate(done):
            q = prev[col] // row[col]
            done[k] = [x - q * y for x, y in zip(prev, row, strict=True)]
        done.append(row)
    return [tuple(r) for r in done]


def _reduce_modulo(e: Vector, lattice: Sequence[Vector]) -> Vector:
    """The Hermite-reduced representative of e + lattice."""
    out = list(e)
    for row in _hermite_rows(lattice, len(e)):
        p = next(i for i, x in enumerate(row) if x)
        q = out[p] // row[p]
        out = [x - q * y for x, y in zip(out, row, strict=True)]
    return tuple(out)


def _height_covector(diagram: ToricDiagram) -> tuple[int, Vector] | None:
    """The smallest ell > 0 with <e, lambda_j> = ell for every j, and its covector."""
    base = diagram.normals[0]
    diffs = [tuple(a - b for a, b in zip(v, base, strict=True)) for v in diagram.normals[1:]]
    basis = _integer_kernel([d for d in diffs if any(d)], diagram.dim)
    if not basis:
        return None

    # On the kernel ell ranges over gcd(levels) * Z. The first column of the
    # echelon transform reaches the gcd, the others stay at level zero.
    levels = [_dot(b, base) for b in basis]
    rank, mix = _column_echelon([levels], len(basis))
    if rank == 0:
        return None

    def combine(coeffs: Sequence[int]) -> Vector:
        return tuple(sum(c * b[i] for c, b in zip(coeffs, basis, strict=True)) for i in range(diagram.dim))

    e = combine(mix[0])
    ell = _dot(e, base)
    if ell < 0:
        e, ell = tuple(-x for x in e), -ell
    return ell, _reduce_modulo(e, [combine(col) for col in mix[1:]])


def detect_height(diagram: ToricDiagram) -> HeightNormalization | None:
    """Find the height ell and a normalizing transform, or None when there is none.

    ell is the smallest positive common value of <e, lambda_j>; every other
    common value is a multiple of it. When several covectors reach it, the
    one Hermite-reduced against the level-zero covectors is returned.
    """
    found = _height_covector(diagram)
    if found is None:
        return None
    ell, e = found
    return HeightNormalization(ell=ell, covector=e, transform=_unimodular_with_first_row(e))


def polygon_to_cone(polygon: PolygonDiagram) -> ToricDiagram:
    """Lift a lattice polygon to the height-one cone with normals (1, p_j, q_j)."""
    return ToricDiagram(m=2, normals=tuple((1, p, q) for p, q in polygon.vertices))


def polygon_is_good(polygon: PolygonDiagram) -> bool:
    """Edge criterion: every edge vector has coprime coordinates."""
    for dp, dq in polygon.edges():
        if abs(dp) == 1 or abs(dq) == 1:
            continue
        if dp == 0 or dq == 0 or math.gcd(dp, dq) != 1:
            return False
    return True


def random_unimodular(n: int, rng: random.Random, steps: int = 6) -> UnimodularTransform:
    """A random element of SL(n, Z) built from elementary row operations."""
    rows = [[int(i == j) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.sample(range(n), 2)
        c = rng.choice((-1, 1))
        rows[i] = [a + c * b for a, b in zip(rows[i], rows[j], strict=True)]
    return UnimodularTransform(tuple(tuple(r) for r in rows))
