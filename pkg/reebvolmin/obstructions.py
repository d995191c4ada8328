"""Lichnerowicz and Bishop obstructions for weighted homogeneous hypersurface links.

Both tests are necessary conditions only: passing them never proves that a
Sasaki-Einstein metric exists. All comparisons are exact rationals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from reebvolmin.charges import unit_sphere_volume
from reebvolmin.errors import InputError, NotFanoError
from reebvolmin.volume import format_number


@dataclass(frozen=True)
class WeightedHypersurface:
    """Zero set of a weighted homogeneous polynomial of degree d in C^(m+2)."""

    m: int
    weights: tuple[int, ...]
    degree: int
    smooth_claimed: bool = True

    def __post_init__(self) -> None:
        weights = tuple(int(w) for w in self.weights)
        object.__setattr__(self, "weights", weights)
        if self.m < 0:
            msg = f"m must be non-negative, got {self.m}"
            raise InputError(msg)
        if len(weights) != self.m + 2:
            msg = f"expected {self.m + 2} weights for m={self.m}, got {len(weights)}"
            raise InputError(msg)
        if any(w < 1 for w in weights):
            msg = "weights must be positive integers"
            raise InputError(msg)
        if self.degree < 1:
            msg = f"degree must be a positive integer, got {self.degree}"
            raise InputError(msg)

    @property
    def total_weight(self) -> int:
        return sum(self.weights)

    @property
    def is_fano(self) -> bool:
        return self.total_weight > self.degree

    def require_fano(self) -> None:
        if not self.is_fano:
            raise NotFanoError.for_weights(self.total_weight, self.degree)

    def scaled(self, c: int) -> WeightedHypersurface:
        return WeightedHypersurface(
            m=self.m,
            weights=tuple(c * w for w in self.weights),
            degree=c * self.degree,
            smooth_claimed=self.smooth_claimed,
        )

    def to_json(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "weights": list(self.weights),
            "degree": self.degree,
            "smooth_claimed": self.smooth_claimed,
        }


@dataclass(frozen=True)
class BrieskornExponents:
    """Exponents of ``z_0^a_0 + ... + z_(m+1)^a_(m+1)``."""

    a: tuple[int, ...]
    smooth_claimed: bool = True

    def __post_init__(self) -> None:
        exponents = tuple(int(x) for x in self.a)
        object.__setattr__(self, "a", exponents)
        if len(exponents) < 2:
            msg = "a Brieskorn polynomial needs at least two exponents"
            raise InputError(msg)
        if any(x < 1 for x in exponents):
            msg = "exponents must be positive integers"
            raise InputError(msg)

    @property
    def m(self) -> int:
        return len(self.a) - 2

    @property
    def reciprocal_sum(self) -> Fraction:
        return sum((Fraction(1, x) for x in self.a), Fraction(0))

    @property
    def is_fano(self) -> bool:
        return self.reciprocal_sum > 1

    def require_fano(self) -> None:
        if not self.is_fano:
            msg = f"not Fano: sum of 1/a_j = {self.reciprocal_sum} must exceed 1"
            raise NotFanoError(msg)

    def as_hypersurface(self, common_degree: int | None = None) -> WeightedHypersurface:
        """Weights D/a_j and degree D for a common multiple D of the exponents."""
        d = math.lcm(*self.a) if common_degree is None else common_degree
        if any(d % x for x in self.a):
            msg = f"degree {d} is not a common multiple of the exponents {list(self.a)}"
            raise InputError(msg)
        return WeightedHypersurface(
            m=self.m,
            weights=tuple(d // x for x in self.a),
            degree=d,
            smooth_claimed=self.smooth_claimed,
        )

    def to_json(self) -> dict[str, Any]:
        return {"exponents": list(self.a), "smooth_claimed": self.smooth_claimed}


@dataclass(frozen=True)
class ObstructionReport:
    """Outcome of both tests; ``necessary_only`` is always set."""

    m: int
    reeb: Fraction
    lambda1: Fraction
    vol_ratio: Fraction
    lichnerowicz_pass: bool
    bishop_pass: bool
    lichnerowicz_boundary: bool
    bishop_boundary: bool
    smooth_claimed: bool = True
    necessary_only: bool = True
    lichnerowicz_margin: Fraction | None = None
    bishop_value: Fraction | None = None

    def to_json(self) -> dict[str, Any]:
        payload: dict[str, Any] = {
            "m": self.m,
            "reeb": format_number(self.reeb),
            "lambda1": format_number(self.lambda1),
            "vol_ratio": format_number(self.vol_ratio),
            "lichnerowicz_pass": self.lichnerowicz_pass,
            "lichnerowicz_boundary": self.lichnerowicz_boundary,
            "bishop_pass": self.bishop_pass,
            "bishop_boundary": self.bishop_boundary,
            "smooth_claimed": self.smooth_claimed,
            "necessary_only": self.necessary_only,
        }
        if self.lichnerowicz_margin is not None:
            payload["lichnerowicz_margin"] = format_number(self.lichnerowicz_margin)
        if self.bishop_value is not None:
            payload["bishop_value"] = format_number(self.bishop_value)
            payload["bishop_bound"] = (self.m + 1) ** (self.m + 1)
        return payload


def normalized_reeb(h: WeightedHypersurface) -> Fraction:
    """Coefficient (m+1)/(|w|-d) normalizing the weight vector field to a Reeb field."""
    h.require_fano()
    return Fraction(h.m + 1, h.total_weight - h.degree)


def lichnerowicz_test(h: WeightedHypersurface) -> tuple[Fraction, bool]:
    """First positive charge lambda1 = (m+1) min w / (|w|-d); passes iff lambda1 >= 1."""
    lambda1 = normalized_reeb(h) * min(h.weights)
    return lambda1, lambda1 >= 1


def bishop_test(h: WeightedHypersurface) -> tuple[Fraction, bool]:
    """Volume over the unit sphere volume; passes iff the ratio is at most one."""
    h.require_fano()
    m1 = h.m + 1
    ratio = Fraction(h.degree * (h.total_weight - h.degree) ** m1, m1**m1 * math.prod(h.weights))
    return ratio, ratio <= 1


def hypersurface_volume(h: WeightedHypersurface) -> float:
    ratio, _ = bishop_test(h)
    return float(ratio) * unit_sphere_volume(h.m)


def hypersurface_tests(h: WeightedHypersurface) -> ObstructionReport:
    lambda1, lich = lichnerowicz_test(h)
    ratio, bishop = bishop_test(h)
    return ObstructionReport(
        m=h.m,
        reeb=normalized_reeb(h),
        lambda1=lambda1,
        vol_ratio=ratio,
        lichnerowicz_pass=lich,
        bishop_pass=bishop,
        lichnerowicz_boundary=lambda1 == 1,
        bishop_boundary=ratio == 1,
        smooth_claimed=h.smooth_claimed,
    )


def brieskorn_tests(a: BrieskornExponents) -> ObstructionReport:
    """Both tests in the exponent form of a Brieskorn-Pham polynomial.

    Lichnerowicz: (m+1) min 1/a_j >= sum 1/a_j - 1.
    Bishop: (prod a_j)(sum 1/a_j - 1)^(m+1) <= (m+1)^(m+1).
    """
    a.require_fano()
    m1 = a.m + 1
    excess = a.reciprocal_sum - 1
    margin = m1 * Fraction(1, max(a.a)) - excess
    bishop_value = math.prod(a.a) * excess**m1
    bound = m1**m1
    return ObstructionReport(
        m=a.m,
        reeb=normalized_reeb(a.as_hypersurface()),
        lambda1=m1 * Fraction(1, max(a.a)) / excess,
        vol_ratio=bishop_value / bound,
        lichnerowicz_pass=margin >= 0,
        bishop_pass=bishop_value <= bound,
        lichnerowicz_boundary=margin == 0,
        bishop_boundary=bishop_value == bound,
        smooth_claimed=a.smooth_claimed,
        lichnerowicz_margin=margin,
        bishop_value=bishop_value,
    )
