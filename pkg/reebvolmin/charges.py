"""Charge spectra, heat-trace volumes and lattice-count volumes.

Charges are the values ``<xi, n>`` over the lattice points n of the moment
cone, each point contributing one monomial eigenfunction. Points are visited
slab by slab: for every integer prefix the admissible values of the last
coordinate form an interval, so counts and exponential sums over a slab are
closed-form.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import pairwise
from typing import TYPE_CHECKING, Any

import numpy as np
import scipy.optimize
import scipy.special

from reebvolmin.cones import ToricDiagram, Vector, dual_cone
from reebvolmin.errors import ChargeError, CutoffError, InputError, UnboundedTruncationError
from reebvolmin.volume import Number, ReebVector, format_number, vol_fn

if TYPE_CHECKING:
    from collections.abc import Iterable, Iterator, Sequence

logger = logging.getLogger(__name__)

DEFAULT_T_GRID = (0.2, 0.1, 0.05, 0.025)
DEFAULT_COUNT_CUTOFFS = (20, 40, 80)
TAIL_FRACTION = 1e-6
FLOAT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class ChargeSpectrum:
    """Distinct charges up to the cutoff with their multiplicities."""

    entries: tuple[tuple[Number, int], ...]
    cutoff: Number
    exact: bool

    def __post_init__(self) -> None:
        charges = [c for c, _ in self.entries]
        if any(b < a for a, b in pairwise(charges)):
            msg = "charges must be nondecreasing"
            raise ChargeError(msg)
        if charges and charges[0] < 0:
            msg = "charges must be nonnegative"
            raise ChargeError(msg)

    def multiplicity(self, charge: Any) -> int:
        for c, mult in self.entries:
            if self.exact and c == charge:
                return mult
            if not self.exact and abs(float(c) - float(charge)) <= FLOAT_TOLERANCE * max(1.0, abs(float(charge))):
                return mult
        return 0

    @property
    def total(self) -> int:
        return sum(mult for _, mult in self.entries)

    def to_json(self) -> dict[str, Any]:
        return {
            "cutoff": format_number(self.cutoff),
            "exact": self.exact,
            "entries": [[format_number(c), mult] for c, mult in self.entries],
        }


@dataclass(frozen=True)
class HeatTraceEstimate:
    """The heat-trace volume limit evaluated on a t grid and extrapolated to t = 0."""

    t_grid: tuple[float, ...]
    partial_values: tuple[float, ...]
    extrapolated: float
    extrapolation_error: float
    truncation_bound: float
    cutoff: float

    def to_json(self) -> dict[str, Any]:
        return {
            "t_grid": list(self.t_grid),
            "partial_values": list(self.partial_values),
            "extrapolated": self.extrapolated,
            "extrapolation_error": self.extrapolation_error,
            "truncation_bound": self.truncation_bound,
            "cutoff": self.cutoff,
        }


@dataclass(frozen=True)
class _Slab:
    prefixes: np.ndarray
    lo: np.ndarray
    hi: np.ndarray


class _SlabScanner:
    """Lattice points of ``{n in C | <xi, n> <= cutoff}`` grouped by prefix.

    The last scanned axis is the one where xi has the largest entry.
    Exact Reeb vectors are scaled to an integer vector so membership is
    decided in integer arithmetic.
    """

    def __init__(self, diagram: ToricDiagram, xi: ReebVector, cutoff: Number) -> None:
        if xi.dim != diagram.dim:
            msg = f"Reeb vector has {xi.dim} coordinates, the diagram lives in R^{diagram.dim}"
            raise InputError(msg)
        if cutoff < 0:
            msg = f"cutoff must be nonnegative, got {cutoff}"
            raise ChargeError(msg)
        rays = dual_cone(diagram)
        pairings = [sum(a * x for a, x in zip(r, xi.xi, strict=True)) for r in rays]
        if not all(p > 0 for p in pairings):
            raise UnboundedTruncationError.for_reeb(xi.xi)

        n = diagram.dim
        values = [float(x) for x in xi.xi]
        last = max(range(n), key=lambda a: (abs(values[a]), -a))
        self.order = [a for a in range(n) if a != last] + [last]
        self.inverse_order = np.argsort(self.order)
        self.exact = xi.exact
        self.cutoff = cutoff

        normals = np.array(diagram.normals, dtype=np.int64)[:, self.order]
        self._normal_prefix = normals[:, :-1]
        self._normal_last = normals[:, -1]
        self.xi_float = np.array(values, dtype=float)[self.order]

        if self.exact:
            fracs = [Fraction(x) for x in xi.xi]
            self.denominator = math.lcm(*(f.denominator for f in fracs))
            self.xi_int = np.array([int(f * self.denominator) for f in fracs], dtype=np.int64)[self.order]
            bound = Fraction(cutoff) * self.denominator
            self._bound_num, self._bound_den = bound.numerator, bound.denominator

        corners = np.array(
            [[0.0] * n] + [[float(cutoff) * a / float(p) for a in r] for r, p in zip(rays, pairings, strict=True)]
        )[:, self.order]
        self.box_lo = np.floor(corners.min(axis=0)).astype(np.int64) - 1
        self.box_hi = np.ceil(corners.max(axis=0)).astype(np.int64) + 1

    def _interval(self, prefixes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        size = len(prefixes)
        lo = np.full(size, self.box_lo[-1], dtype=np.int64)
        hi = np.full(size, self.box_hi[-1], dtype=np.int64)
        ok = np.ones(size, dtype=bool)
        offsets = prefixes @ self._normal_prefix.T if prefixes.shape[1] else np.zeros((size, len(self._normal_last)), dtype=np.int64)
        for j, a in enumerate(self._normal_last):
            b = offsets[:, j]
            if a > 0:
                lo = np.maximum(lo, -(b // a))
            elif a < 0:
                hi = np.minimum(hi, b // (-a))
            else:
                ok &= b >= 0

        if self.exact:
            c = prefixes @ self.xi_int[:-1] if prefixes.shape[1] else np.zeros(size, dtype=np.int64)
            num = self._bound_num - self._bound_den * c
            step = self._bound_den * int(self.xi_int[-1])
            if step > 0:
                hi = np.minimum(hi, num // step)
            else:
                lo = np.maximum(lo, -(num // (-step)))
        else:
            c = prefixes @ self.xi_float[:-1] if prefixes.shape[1] else np.zeros(size)
            limit = float(self.cutoff) + FLOAT_TOLERANCE * max(1.0, abs(float(self.cutoff)))
            bound = (limit - c) / self.xi_float[-1]
            if self.xi_float[-1] > 0:
                hi = np.minimum(hi, np.floor(bound).astype(np.int64))
            else:
                lo = np.maximum(lo, np.ceil(bound).astype(np.int64))
        hi = np.where(ok, hi, lo - 1)
        return lo, hi

    def slabs(self) -> Iterator[_Slab]:
        ranges = [np.arange(lo, hi + 1, dtype=np.int64) for lo, hi in zip(self.box_lo[:-1], self.box_hi[:-1], strict=True)]
        if not ranges:
            prefixes = np.zeros((1, 0), dtype=np.int64)
            lo, hi = self._interval(prefixes)
            if hi[0] >= lo[0]:
                yield _Slab(prefixes, lo, hi)
            return
        head, tail = ranges[0], ranges[1:]
        if tail:
            tail_grid = np.stack(np.meshgrid(*tail, indexing="ij"), axis=-1).reshape(-1, len(tail))
        else:
            tail_grid = np.zeros((1, 0), dtype=np.int64)
        for value in head:
            prefixes = np.column_stack([np.full(len(tail_grid), value, dtype=np.int64), tail_grid])
            lo, hi = self._interval(prefixes)
            keep = hi >= lo
            if keep.any():
                yield _Slab(prefixes[keep], lo[keep], hi[keep])

    def points(self) -> Iterator[np.ndarray]:
        """Lattice points slab by slab, as rows in the original coordinate order."""
        for slab in self.slabs():
            counts = slab.hi - slab.lo + 1
            prefixes = np.repeat(slab.prefixes, counts, axis=0)
            starts = np.repeat(slab.lo, counts)
            offsets = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
            last = starts + offsets
            yield np.column_stack([prefixes, last])[:, self.inverse_order]

    def count(self) -> int:
        return int(sum(int((slab.hi - slab.lo + 1).sum()) for slab in self.slabs()))


def lattice_points(diagram: ToricDiagram, xi: ReebVector, cutoff: Number) -> list[Vector]:
    """Every n in C ∩ Z^(m+1) with <xi, n> <= cutoff, sorted."""
    scanner = _SlabScanner(diagram, xi, cutoff)
    found = [tuple(int(x) for x in row) for block in scanner.points() for row in block]
    return sorted(found)


def lattice_count(diagram: ToricDiagram, xi: ReebVector, cutoff: Number) -> int:
    """Number of lattice points of C with charge at most the cutoff."""
    return _SlabScanner(diagram, xi, cutoff).count()


def charge_spectrum(diagram: ToricDiagram, xi: ReebVector, cutoff: Number) -> ChargeSpectrum:
    """Distinct charges <xi, n> up to the cutoff, with multiplicities."""
    scanner = _SlabScanner(diagram, xi, cutoff)
    if scanner.exact:
        weights = scanner.xi_int[scanner.inverse_order]
        counter: Counter[int] = Counter()
        for block in scanner.points():
            counter.update((block @ weights).tolist())
        entries = tuple((Fraction(k, scanner.denominator), counter[k]) for k in sorted(counter))
        return ChargeSpectrum(entries=entries, cutoff=Fraction(cutoff), exact=True)

    weights_f = scanner.xi_float[scanner.inverse_order]
    charges = np.concatenate([block @ weights_f for block in scanner.points()])
    return ChargeSpectrum(entries=group_float_charges(charges), cutoff=float(cutoff), exact=False)


def group_float_charges(charges: Iterable[float]) -> tuple[tuple[Number, int], ...]:
    """Merge float charges into groups of values within tolerance of the group's first value."""
    grouped: list[tuple[Number, int]] = []
    for c in sorted(charges):
        value = max(float(c), 0.0)
        if grouped and value - float(grouped[-1][0]) <= FLOAT_TOLERANCE * max(1.0, value):
            grouped[-1] = (grouped[-1][0], grouped[-1][1] + 1)
        else:
            grouped.append((value, 1))
    return tuple(grouped)


def laplacian_eigenvalue(charge: Number, m: int) -> Number:
    """Eigenvalue lambda (lambda + 2m) of the Laplacian on a charge-lambda eigenfunction."""
    if charge < 0:
        msg = f"charges are nonnegative, got {charge}"
        raise ChargeError(msg)
    return charge * (charge + 2 * m)


def unit_sphere_volume(m: int) -> float:
    """Volume 2 pi^(m+1) / m! of the unit sphere of dimension 2m+1."""
    return 2 * math.pi ** (m + 1) / math.factorial(m)


def reference_volume_ratio(m: int) -> Fraction:
    """Calibrated ratio between the heat-trace volume and S~/(4m): 2^-(m+1).

    Fixed empirically on the round sphere, where the heat trace reproduces
    the sphere volume exactly and the polytope pipeline is 2^(m+1) times larger.
    """
    return Fraction(1, 2 ** (m + 1))


def heat_trace_required_cutoff(m: int, t_min: float, *, tail: float = TAIL_FRACTION) -> float:
    """Smallest charge cutoff R whose neglected heat-trace tail is below ``tail``.

    The charge counting function grows like R^(m+1), so the tail fraction
    beyond R at time t is the regularized upper incomplete gamma Q(m+1, tR).
    """
    if t_min <= 0:
        msg = f"heat-trace times must be positive, got {t_min}"
        raise ChargeError(msg)
    hi = 1.0
    while scipy.special.gammaincc(m + 1, hi) > tail:
        hi *= 2
    x = scipy.optimize.brentq(lambda s: scipy.special.gammaincc(m + 1, s) - tail, 0.0, hi)
    return float(x) / t_min


def richardson(values: Sequence[float], *, step_ratio: float = 2.0, order: int | None = None) -> tuple[float, float]:
    """Richardson extrapolation of values taken at steps h, h/r, h/r^2, ...

    Each level removes one more power of h from the error. Returns the most
    accurate entry of the last level and the spread between the two most
    accurate entries as an error estimate.
    """
    if not values:
        msg = "nothing to extrapolate"
        raise ChargeError(msg)
    levels = len(values) - 1 if order is None else min(order, len(values) - 1)
    previous: list[float] = list(values)
    level = previous
    for k in range(1, levels + 1):
        mult = step_ratio**k
        factor = 1.0 / (mult - 1.0)
        previous, level = level, [factor * (mult * high - low) for low, high in pairwise(level)]
    if len(level) > 1:
        return level[-1], abs(level[-1] - level[-2])
    if levels == 0:
        return level[-1], math.nan
    return level[-1], abs(level[-1] - previous[-1])


def _check_grid(t_grid: Sequence[float]) -> float:
    if len(t_grid) < 2:
        msg = "the t grid needs at least two points"
        raise ChargeError(msg)
    if any(t <= 0 for t in t_grid) or any(b >= a for a, b in pairwise(t_grid)):
        msg = "the t grid must be positive and strictly decreasing"
        raise ChargeError(msg)
    ratio = t_grid[0] / t_grid[1]
    if any(not math.isclose(a / b, ratio, rel_tol=1e-9) for a, b in pairwise(t_grid)):
        msg = "the t grid must be geometric"
        raise ChargeError(msg)
    return ratio


def _heat_sum(scanner: _SlabScanner, slabs: Sequence[_Slab], t: float) -> float:
    step = float(abs(scanner.xi_float[-1]))
    ratio_log = -t * step
    total = 0.0
    for slab in slabs:
        base = slab.prefixes @ scanner.xi_float[:-1] if slab.prefixes.shape[1] else np.zeros(len(slab.lo))
        start_t = slab.lo if scanner.xi_float[-1] > 0 else slab.hi
        first = base + scanner.xi_float[-1] * start_t
        counts = (slab.hi - slab.lo + 1).astype(float)
        # sum_{i < count} exp(-t (first + i step)) as a geometric series
        series = np.expm1(ratio_log * counts) / math.expm1(ratio_log)
        total += float(np.sum(np.exp(-t * first) * series))
    return total


def heat_trace_volume(
    diagram: ToricDiagram,
    xi: ReebVector,
    cutoff: float | None = None,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    *,
    workers: int | None = None,
) -> HeatTraceEstimate:
    """Riemannian volume from the small-t limit of gamma t^(m+1) sum exp(-t lambda)."""
    ratio = _check_grid(t_grid)
    m = diagram.m
    required = heat_trace_required_cutoff(m, min(t_grid))
    if cutoff is None:
        cutoff = float(math.ceil(required))
    elif cutoff < required:
        raise CutoffError.insufficient(cutoff, required)

    scanner = _SlabScanner(diagram, xi.as_float(), cutoff)
    slabs = list(scanner.slabs())
    logger.debug("Heat trace over %d slabs up to charge %s", len(slabs), cutoff)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        sums = list(pool.map(lambda t: _heat_sum(scanner, slabs, t), t_grid))

    gamma = unit_sphere_volume(m)
    partial = tuple(gamma * t ** (m + 1) * s for t, s in zip(t_grid, sums, strict=True))
    extrapolated, error = richardson(partial, step_ratio=ratio, order=2)
    tail = float(scipy.special.gammaincc(m + 1, min(t_grid) * cutoff))
    return HeatTraceEstimate(
        t_grid=tuple(float(t) for t in t_grid),
        partial_values=partial,
        extrapolated=extrapolated,
        extrapolation_error=error,
        truncation_bound=partial[-1] * tail / (1.0 - tail),
        cutoff=float(cutoff),
    )


def calibrate_volume_constant(
    diagram: ToricDiagram,
    xi: ReebVector,
    cutoff: float | None = None,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    *,
    workers: int | None = None,
) -> float:
    """Ratio of the heat-trace volume to the polytope volume S~/(4m)."""
    heat = heat_trace_volume(diagram, xi, cutoff, t_grid, workers=workers)
    return heat.extrapolated / vol_fn(diagram, xi.as_float()).vol_riemannian


def volume_from_lattice_count(
    diagram: ToricDiagram,
    xi: ReebVector,
    cutoffs: Sequence[int] = DEFAULT_COUNT_CUTOFFS,
) -> tuple[float, float]:
    """Estimate Vol(Delta(xi)) from lattice counts N(R)/R^(m+1) at doubling cutoffs."""
    if len(cutoffs) < 2 or any(b != 2 * a for a, b in pairwise(cutoffs)):
        msg = "lattice-count cutoffs must double: R, 2R, 4R, ..."
        raise ChargeError(msg)
    exponent = diagram.dim
    ratios = [lattice_count(diagram, xi, r) / r**exponent for r in cutoffs]
    return richardson(ratios, step_ratio=2.0, order=len(cutoffs) - 1)
