"""Donaldson-Futaki invariants from Hilbert-series samples.

For a polarized scheme with a C* action, ``d_k`` is the dimension of the
degree-k sections and ``w_k`` the total weight on them. For large k::

    d_k = a0 k^n + a1 k^(n-1) + ...
    w_k = b0 k^(n+1) + b1 k^n + ...
    w_k / (k d_k) = F0 + F1 / k + O(1/k^2)

Everything is computed in exact rationals.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import cdd
import numpy as np
import sympy

from reebvolmin.errors import DiagramError, InputError, SampleError
from reebvolmin.volume import format_number

if TYPE_CHECKING:
    from collections.abc import Sequence

logger = logging.getLogger(__name__)

_K = sympy.Symbol("k")


class KStabilityVerdict(StrEnum):
    """What one test configuration says about K-semistability."""

    semistable_consistent = "semistable-consistent"
    destabilized = "destabilized"


@dataclass(frozen=True)
class HilbertSamples:
    """Samples (k, d_k, w_k) of a polarized scheme of dimension n."""

    n: int
    samples: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        rows = tuple((int(k), int(d), int(w)) for k, d, w in self.samples)
        object.__setattr__(self, "samples", tuple(sorted(rows)))
        if self.n < 0:
            msg = f"dimension must be non-negative, got {self.n}"
            raise InputError(msg)
        ks = [k for k, _, _ in rows]
        if len(set(ks)) != len(ks):
            msg = "sample values of k must be distinct"
            raise InputError(msg)
        if any(k < 1 for k in ks) or any(d < 1 for _, d, _ in rows):
            msg = "k and d_k must be positive integers"
            raise InputError(msg)
        if len(rows) < self.n + 4:
            msg = f"need at least {self.n + 4} samples for dimension {self.n}, got {len(rows)}"
            raise InputError(msg)

    def shifted(self, c: int) -> HilbertSamples:
        """Replace w_k by w_k + c k d_k, a renormalization of the action."""
        return HilbertSamples(self.n, tuple((k, d, w + c * k * d) for k, d, w in self.samples))

    def to_json(self) -> dict[str, Any]:
        return {"n": self.n, "samples": [list(s) for s in self.samples]}


@dataclass(frozen=True)
class PolynomialFit:
    """Coefficients of d_k and w_k, leading coefficient first."""

    n: int
    d_coefficients: tuple[Fraction, ...]
    w_coefficients: tuple[Fraction, ...]


@dataclass(frozen=True)
class DFResult:
    a0: Fraction
    a1: Fraction
    b0: Fraction
    b1: Fraction
    F0: Fraction
    F1: Fraction
    consistency_residual: Fraction = Fraction(0)

    def to_json(self) -> dict[str, Any]:
        return {
            "a0": format_number(self.a0),
            "a1": format_number(self.a1),
            "b0": format_number(self.b0),
            "b1": format_number(self.b1),
            "F0": format_number(self.F0),
            "F1": format_number(self.F1),
            "consistency_residual": format_number(self.consistency_residual),
        }


@dataclass(frozen=True)
class LatticePolytopeAction:
    """A full-dimensional lattice polytope with a torus weight functional."""

    vertices: tuple[tuple[int, ...], ...]
    alpha: tuple[int, ...]

    def __post_init__(self) -> None:
        vertices = tuple(tuple(int(x) for x in v) for v in self.vertices)
        alpha = tuple(int(x) for x in self.alpha)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "alpha", alpha)
        if not alpha:
            msg = "alpha must be a non-empty integer vector"
            raise InputError(msg)
        if any(len(v) != len(alpha) for v in vertices):
            msg = f"vertices and alpha must all have dimension {len(alpha)}"
            raise InputError(msg)
        base = vertices[0] if vertices else ()
        diffs = [[a - b for a, b in zip(v, base, strict=True)] for v in vertices[1:]]
        if not diffs or sympy.Matrix(diffs).rank() < len(alpha):
            raise DiagramError.degenerate("the polytope is not full-dimensional")

    @property
    def n(self) -> int:
        return len(self.alpha)

    def translate(self, v: Sequence[int]) -> LatticePolytopeAction:
        """Shift every vertex by the integer vector v."""
        return LatticePolytopeAction(
            vertices=tuple(tuple(a + int(b) for a, b in zip(p, v, strict=True)) for p in self.vertices),
            alpha=self.alpha,
        )

    def to_json(self) -> dict[str, Any]:
        return {"vertices": [list(v) for v in self.vertices], "alpha": list(self.alpha)}


def _to_fraction(value: Any) -> Fraction:
    rational = sympy.Rational(value)
    return Fraction(int(rational.p), int(rational.q))


def _interpolate(points: Sequence[tuple[int, int]], degree: int) -> tuple[Fraction, ...]:
    expr = sympy.interpolate([(k, v) for k, v in points[: degree + 1]], _K)
    coeffs = sympy.Poly(expr, _K).all_coeffs() if expr != 0 else [0]
    padded = [0] * (degree + 1 - len(coeffs)) + list(coeffs)
    return tuple(_to_fraction(c) for c in padded)


def _evaluate(coeffs: Sequence[Fraction], k: int) -> Fraction:
    total = Fraction(0)
    for c in coeffs:
        total = total * k + c
    return total


def _first_mismatch(coeffs: Sequence[Fraction], points: Sequence[tuple[int, int]]) -> int | None:
    for k, v in points:
        if _evaluate(coeffs, k) != v:
            return k
    return None


def _fit_series(points: Sequence[tuple[int, int]], degree: int, series: str) -> tuple[Fraction, ...]:
    coeffs = _interpolate(points, degree)
    bad = _first_mismatch(coeffs, points[degree + 1 :])
    if bad is None:
        return coeffs
    # Name the corrupted sample when dropping exactly one sample restores polynomiality.
    culprits = []
    for i, (k, _v) in enumerate(points):
        rest = [p for j, p in enumerate(points) if j != i]
        if len(rest) > degree + 1 and _first_mismatch(_interpolate(rest, degree), rest) is None:
            culprits.append(k)
    raise SampleError.at_k(culprits[0] if len(culprits) == 1 else bad, series)


def fit_polynomials(samples: HilbertSamples) -> PolynomialFit:
    """Exact interpolation of d_k (degree n) and w_k (degree n+1), checked on the spare samples."""
    n = samples.n
    d_points = [(k, d) for k, d, _ in samples.samples]
    w_points = [(k, w) for k, _, w in samples.samples]
    return PolynomialFit(
        n=n,
        d_coefficients=_fit_series(d_points, n, "d"),
        w_coefficients=_fit_series(w_points, n + 1, "w"),
    )


def donaldson_futaki(fit: PolynomialFit) -> DFResult:
    """F0 = b0/a0 and F1 = (a0 b1 - a1 b0)/a0^2."""
    a0 = fit.d_coefficients[0]
    a1 = fit.d_coefficients[1] if len(fit.d_coefficients) > 1 else Fraction(0)
    b0, b1 = fit.w_coefficients[0], fit.w_coefficients[1]
    if a0 <= 0:
        msg = f"leading Hilbert coefficient must be positive, got a0 = {a0}"
        raise SampleError(msg)
    return DFResult(
        a0=a0,
        a1=a1,
        b0=b0,
        b1=b1,
        F0=b0 / a0,
        F1=(a0 * b1 - a1 * b0) / a0**2,
    )


def ksemistable_verdict(df: DFResult) -> KStabilityVerdict:
    """A single configuration with F1 > 0 destabilizes; F1 <= 0 decides nothing more."""
    if df.F1 > 0:
        return KStabilityVerdict.destabilized
    return KStabilityVerdict.semistable_consistent


def _integer_inequalities(cfg: LatticePolytopeAction) -> tuple[np.ndarray, np.ndarray]:
    """Rows (b, A) with b + A u >= 0 describing P, scaled to integers."""
    mat = cdd.Matrix([[1, *v] for v in cfg.vertices], number_type="fraction")
    mat.rep_type = cdd.RepType.GENERATOR
    ineqs = cdd.Polyhedron(mat).get_inequalities()
    if ineqs.lin_set:
        raise DiagramError.degenerate("the polytope is not full-dimensional")
    rows = []
    for i in range(ineqs.row_size):
        fracs = [Fraction(x) for x in ineqs[i]]
        scale = math.lcm(*(f.denominator for f in fracs))
        rows.append([int(f * scale) for f in fracs])
    table = np.array(rows, dtype=np.int64)
    return table[:, 0], table[:, 1:]


def _dilation_sums(cfg: LatticePolytopeAction, offsets: np.ndarray, normals: np.ndarray, k: int) -> tuple[int, int, int]:
    lows = [k * min(v[i] for v in cfg.vertices) for i in range(cfg.n)]
    highs = [k * max(v[i] for v in cfg.vertices) for i in range(cfg.n)]
    axes = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(lows, highs, strict=True)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, cfg.n)
    inside = np.all(grid @ normals.T + k * offsets >= 0, axis=1)
    points = grid[inside]
    weight = int((points @ np.array(cfg.alpha, dtype=np.int64)).sum())
    return k, len(points), weight


def toric_product_config(cfg: LatticePolytopeAction, k_max: int, *, workers: int | None = None) -> HilbertSamples:
    """Samples d_k = #(kP ∩ Z^n) and w_k = sum of <u, alpha> over kP ∩ Z^n for k = 1..k_max."""
    if k_max < cfg.n + 4:
        msg = f"k_max must be at least n + 4 = {cfg.n + 4}, got {k_max}"
        raise InputError(msg)
    offsets, normals = _integer_inequalities(cfg)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(lambda k: _dilation_sums(cfg, offsets, normals, k), range(1, k_max + 1)))
    logger.debug("Enumerated %d dilations of a %d-dimensional polytope", k_max, cfg.n)
    return HilbertSamples(n=cfg.n, samples=tuple(rows))
