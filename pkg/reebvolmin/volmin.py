"""Volume minimization over the Reeb slice.

The slice is ``{xi | <e, xi> = ell (m+1)}`` for the height covector e. After
the height normalization the first coordinate is fixed and the search runs
over the remaining m coordinates with a damped Newton method.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from fractions import Fraction
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.linalg
import scipy.optimize
from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import ZZ

from reebvolmin.cones import (
    HeightNormalization,
    ToricDiagram,
    Vector,
    detect_height,
    dual_cone,
    faces,
    is_good,
    primitive_reduce,
)
from reebvolmin.errors import NoHeightError, NotGoodError, OffSliceError, UnboundedTruncationError
from reebvolmin.volume import ReebVector, grad_vol, s_tilde_constant, vol_fn, volume_kernel

if TYPE_CHECKING:
    from collections.abc import Sequence

    from reebvolmin.volume import VolumeKernel

logger = logging.getLogger(__name__)

ARMIJO = 1e-4
BACKTRACK = 0.5
MAX_HALVINGS = 60
FUTAKI_TOLERANCE = 1e-8
SLICE_TOLERANCE = 1e-9
# Predicted decrease below this fraction of the value is at rounding level.
_ROUNDING = 1e-14
# Rational reconstruction: a float certifies p/q only for q <= MAX_DENOMINATOR,
# where MAX_DENOMINATOR**3 * IRRATIONALITY_TOLERANCE = 1.
IRRATIONALITY_TOLERANCE = 1e-9
MAX_DENOMINATOR = 1000


class ReebClass(StrEnum):
    """Regularity type of a Reeb vector."""

    regular = "regular"
    quasi_regular = "quasi-regular"
    irregular = "irregular"


@dataclass(frozen=True)
class MinimizationResult:
    """Outcome of minimize.

    ``grad_norm`` is the slice gradient norm divided by the functional value,
    the same relative measure the stopping rule uses.
    """

    xi_min: ReebVector
    s_tilde_min: float
    grad_norm: float
    iterations: int
    converged: bool
    method: str = "newton"
    history: tuple[float, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "xi_min": list(self.xi_min.xi),
            "s_tilde": self.s_tilde_min,
            "grad_norm": self.grad_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "method": self.method,
        }


@dataclass(frozen=True)
class FutakiReport:
    """Tangential gradient of the functional at a point of the slice."""

    slice_gradient: tuple[float, ...]
    norm: float
    relative_norm: float
    vanishes: bool

    def to_json(self) -> dict[str, Any]:
        return {
            "slice_gradient": list(self.slice_gradient),
            "norm": self.norm,
            "relative_norm": self.relative_norm,
            "vanishes": self.vanishes,
        }


@dataclass(frozen=True)
class EinsteinVerdict:
    admits: bool
    xi: ReebVector
    xi_min: ReebVector
    distance: float

    def to_json(self) -> dict[str, Any]:
        return {
            "xi": self.xi.to_json()["xi"],
            "admits": self.admits,
            "xi_min": list(self.xi_min.xi),
            "distance": self.distance,
        }


def _require_height(diagram: ToricDiagram) -> tuple[ToricDiagram, HeightNormalization]:
    report = is_good(diagram)
    if not report.verdict:
        msg = f"not a good diagram: {report.reason} at face {list(report.failing_face or ())}"
        raise NotGoodError(msg, report=report)
    reduced = ToricDiagram(m=diagram.m, normals=tuple(primitive_reduce(v) for v in diagram.normals))
    height = detect_height(reduced)
    if height is None:
        msg = "the diagram has no height: no covector pairs to the same positive value with every normal"
        raise NoHeightError(msg)
    return reduced, height


def slice_level(diagram: ToricDiagram, height: HeightNormalization) -> int:
    """The value ell (m+1) of the height covector on the slice."""
    return height.ell * diagram.dim


def on_slice(diagram: ToricDiagram, height: HeightNormalization, xi: ReebVector) -> bool:
    level = slice_level(diagram, height)
    value = sum((a * x for a, x in zip(height.covector, xi.xi, strict=True)), 0 * xi.xi[0])
    if xi.exact:
        return value == level
    return abs(float(value) - level) <= SLICE_TOLERANCE * level


def initial_point(diagram: ToricDiagram, ell: int) -> ReebVector:
    """(m+1) times the mean of the normals of a height-ell normalized diagram.

    The normals generate the Reeb cone, so their mean is interior to it and
    already has first coordinate ell.
    """
    if any(v[0] != ell for v in diagram.normals):
        msg = f"initial_point needs a diagram normalized to height {ell}"
        raise OffSliceError(msg)
    rays = dual_cone(diagram)
    point = tuple(Fraction(diagram.dim * sum(col), diagram.d) for col in zip(*diagram.normals, strict=True))
    xi = ReebVector(point, exact=True, on_slice=True)
    if not all(sum(a * x for a, x in zip(r, point, strict=True)) > 0 for r in rays):
        raise UnboundedTruncationError.for_reeb(point)
    return xi


class _SliceObjective:
    """Vol(Delta) on the slice xi = (level, z), with derivatives in z."""

    def __init__(self, kernel: VolumeKernel, level: float) -> None:
        self.kernel = kernel
        self.level = level

    def lift(self, z: np.ndarray) -> np.ndarray:
        return np.concatenate(([self.level], z))

    def feasible(self, z: np.ndarray) -> bool:
        return self.kernel.is_interior(self.lift(z))

    def value(self, z: np.ndarray) -> float:
        if not self.feasible(z):
            return math.inf
        return self.kernel.value(self.lift(z))

    def value_and_gradient(self, z: np.ndarray) -> tuple[float, np.ndarray]:
        vol, grad = self.kernel.value_and_gradient(self.lift(z))
        return vol, grad[1:]

    def hessian(self, z: np.ndarray) -> np.ndarray:
        return self.kernel.hessian(self.lift(z))[1:, 1:]


def _newton(
    objective: _SliceObjective, z0: np.ndarray, tolerance: float, max_iterations: int
) -> tuple[np.ndarray, int, bool, list[float], str]:
    z = z0.copy()
    history: list[float] = []
    for iteration in range(max_iterations + 1):
        value, grad = objective.value_and_gradient(z)
        history.append(value)
        if np.linalg.norm(grad) <= tolerance * value:
            return z, iteration, True, history, "newton"
        if iteration == max_iterations:
            break
        try:
            factor = scipy.linalg.cho_factor(objective.hessian(z))
        except np.linalg.LinAlgError:
            logger.warning("Hessian is not positive definite at iteration %d; switching to BFGS", iteration)
            return _bfgs(objective, z, tolerance, max_iterations - iteration, history, iteration)
        step = -scipy.linalg.cho_solve(factor, grad)
        slope = float(grad @ step)

        alpha = 1.0
        for _ in range(MAX_HALVINGS):
            trial = z + alpha * step
            if objective.feasible(trial):
                trial_value = objective.value(trial)
                if trial_value <= value + ARMIJO * alpha * slope:
                    break
                if -slope <= _ROUNDING * value and alpha == 1.0:
                    break
            alpha *= BACKTRACK
        else:
            logger.warning("Line search failed at iteration %d", iteration)
            return z, iteration, False, history, "newton"
        z = trial
        logger.debug("Newton step %d: vol=%.15g alpha=%g", iteration, value, alpha)
    return z, max_iterations, False, history, "newton"


def _bfgs(
    objective: _SliceObjective,
    z0: np.ndarray,
    tolerance: float,
    max_iterations: int,
    history: list[float],
    done: int,
) -> tuple[np.ndarray, int, bool, list[float], str]:
    def fun(z: np.ndarray) -> tuple[float, np.ndarray]:
        if not objective.feasible(z):
            return math.inf, np.zeros_like(z)
        return objective.value_and_gradient(z)

    result = scipy.optimize.minimize(
        fun, z0, jac=True, method="BFGS", options={"maxiter": max(max_iterations, 1), "gtol": 0.0}
    )
    z = np.asarray(result.x, dtype=float)
    value, grad = objective.value_and_gradient(z)
    history.append(value)
    converged = bool(np.linalg.norm(grad) <= tolerance * value)
    return z, done + int(result.nit), converged, history, "bfgs"


def minimize(
    diagram: ToricDiagram,
    start: ReebVector | None = None,
    *,
    tolerance: float = 1e-10,
    max_iterations: int = 200,
) -> MinimizationResult:
    """Find the minimizer of the volume functional on the Reeb slice."""
    reduced, height = _require_height(diagram)
    normalized = height.normalize(reduced)
    level = slice_level(reduced, height)
    g = height.transform

    if start is None:
        z0 = initial_point(normalized, height.ell).array()[1:]
    else:
        if start.dim != reduced.dim or not on_slice(reduced, height, start):
            msg = f"start point is not on the slice <e, xi> = {level}"
            raise OffSliceError(msg)
        z0 = np.array([float(x) for x in g.apply(start.as_float().xi)])[1:]

    objective = _SliceObjective(volume_kernel(normalized), float(level))
    if not objective.feasible(z0):
        raise UnboundedTruncationError.for_reeb(tuple(objective.lift(z0)))

    z, iterations, converged, history, method = _newton(objective, z0, tolerance, max_iterations)
    value, grad = objective.value_and_gradient(z)
    xi_normalized = tuple(float(x) for x in objective.lift(z))
    xi_min = tuple(float(x) for x in g.inverse().apply(xi_normalized))

    const = s_tilde_constant(reduced.m)
    if not converged:
        logger.warning("Minimization did not converge after %d iterations", iterations)
    return MinimizationResult(
        xi_min=ReebVector(xi_min, exact=False, on_slice=True),
        s_tilde_min=const * value,
        grad_norm=float(np.linalg.norm(grad) / value),
        iterations=iterations,
        converged=converged,
        method=method,
        history=tuple(const * v for v in history),
    )


def slice_gradient(diagram: ToricDiagram, xi: ReebVector) -> tuple[float, ...]:
    """Projection of grad S~ onto the hyperplane orthogonal to the height covector."""
    reduced, height = _require_height(diagram)
    if not on_slice(reduced, height, xi):
        msg = f"Reeb vector is not on the slice <e, xi> = {slice_level(reduced, height)}"
        raise OffSliceError(msg)
    const = s_tilde_constant(reduced.m)
    grad = np.array([const * float(x) for x in grad_vol(reduced, xi)])
    e = np.array(height.covector, dtype=float)
    return tuple(float(x) for x in grad - (grad @ e) / (e @ e) * e)


def futaki_obstruction(
    diagram: ToricDiagram, xi: ReebVector, *, tolerance: float = FUTAKI_TOLERANCE
) -> FutakiReport:
    """Report whether the Futaki character vanishes at xi.

    The character is the tangential gradient of S~; by convexity it
    vanishes only at the minimizer.
    """
    gradient = slice_gradient(diagram, xi)
    norm = float(np.linalg.norm(gradient))
    s_tilde = vol_fn(diagram, xi).s_tilde
    relative = norm / s_tilde
    return FutakiReport(
        slice_gradient=gradient,
        norm=norm,
        relative_norm=relative,
        vanishes=relative <= tolerance,
    )


def einstein_verdict(
    diagram: ToricDiagram,
    xi: ReebVector,
    *,
    coordinate_tolerance: float = 1e-6,
    result: MinimizationResult | None = None,
) -> EinsteinVerdict:
    """Decide whether xi carries the Sasaki-Einstein structure."""
    reduced, height = _require_height(diagram)
    if not on_slice(reduced, height, xi):
        msg = f"Reeb vector is not on the slice <e, xi> = {slice_level(reduced, height)}"
        raise OffSliceError(msg)
    if result is None:
        result = minimize(reduced)
    distance = max(abs(float(a) - b) for a, b in zip(xi.xi, result.xi_min.xi, strict=True))
    return EinsteinVerdict(
        admits=distance <= coordinate_tolerance,
        xi=xi,
        xi_min=result.xi_min,
        distance=distance,
    )


def rational_ray(xi: ReebVector) -> Vector | None:
    """The primitive integer vector on the ray of xi, or None for an irrational ray."""
    if not any(xi.xi):
        return None
    if xi.exact:
        return _primitive_vector([Fraction(x) for x in xi.xi])
    values = [float(x) for x in xi.xi]
    pivot = max(values, key=abs)
    ratios = []
    for x in values:
        ratio = x / pivot
        approx = Fraction(ratio).limit_denominator(MAX_DENOMINATOR)
        if abs(ratio - float(approx)) > IRRATIONALITY_TOLERANCE:
            return None
        ratios.append(approx)
    return _primitive_vector(ratios)


def _primitive_vector(values: Sequence[Fraction]) -> Vector:
    lcm = math.lcm(*(f.denominator for f in values))
    return primitive_reduce(tuple(int(f * lcm) for f in values))


def classify_reeb(diagram: ToricDiagram, xi: ReebVector) -> ReebClass:
    """Classify xi by the orbit structure of its flow.

    An irrational ray is irregular. A rational ray with primitive vector n is
    regular when the circle generated by n acts freely away from the apex,
    that is when n is primitive modulo the normals of every face.
    """
    n = rational_ray(xi)
    if n is None:
        logger.info("Reeb vector %s classified irregular from floating point data", xi.xi)
        return ReebClass.irregular
    for face in faces(diagram):
        if not face.active or face.dim == 0:
            continue
        rows = [list(diagram.normals[i]) for i in face.key()] + [list(n)]
        snf = smith_normal_form(Matrix(rows), domain=ZZ)
        if any(abs(snf[i, i]) != 1 for i in range(min(snf.shape))):
            return ReebClass.quasi_regular
    return ReebClass.regular
