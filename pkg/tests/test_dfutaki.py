"""Tests for Donaldson-Futaki invariants."""

from fractions import Fraction

import pytest

from reebvolmin.dfutaki import (
    HilbertSamples,
    KStabilityVerdict,
    LatticePolytopeAction,
    donaldson_futaki,
    fit_polynomials,
    ksemistable_verdict,
    toric_product_config,
)
from reebvolmin.errors import DiagramError, InputError, SampleError

TRAPEZOID = LatticePolytopeAction(vertices=((0, 0), (2, 0), (1, 1), (0, 1)), alpha=(1, 0))


def _trapezoid_samples(k_max):
    """d_k = 3/2 k^2 + 5/2 k + 1 and w_k = 7/6 k^3 + 2 k^2 + 5/6 k."""
    rows = []
    for k in range(1, k_max + 1):
        d = Fraction(3, 2) * k**2 + Fraction(5, 2) * k + 1
        w = Fraction(7, 6) * k**3 + 2 * k**2 + Fraction(5, 6) * k
        rows.append((k, int(d), int(w)))
    return HilbertSamples(n=2, samples=tuple(rows))


def _df(samples):
    return donaldson_futaki(fit_polynomials(samples))


class TestHilbertSamples:
    """Test sample validation."""

    def test_too_few_samples(self):
        with pytest.raises(InputError, match="at least 5"):
            HilbertSamples(n=1, samples=((1, 2, 1), (2, 3, 3), (3, 4, 6), (4, 5, 10)))

    def test_duplicate_k(self):
        with pytest.raises(InputError, match="distinct"):
            HilbertSamples(n=0, samples=((1, 1, 1), (1, 1, 1), (2, 1, 2), (3, 1, 3)))

    def test_samples_are_sorted(self):
        samples = HilbertSamples(n=0, samples=((3, 1, 3), (1, 1, 1), (4, 1, 4), (2, 1, 2)))
        assert [k for k, _, _ in samples.samples] == [1, 2, 3, 4]


class TestFit:
    """Test exact polynomial fitting."""

    def test_trapezoid_coefficients(self):
        fit = fit_polynomials(_trapezoid_samples(6))
        assert fit.d_coefficients == (Fraction(3, 2), Fraction(5, 2), Fraction(1))
        assert fit.w_coefficients == (Fraction(7, 6), Fraction(2), Fraction(5, 6), Fraction(0))

    def test_corrupted_sample_is_named(self):
        rows = list(_trapezoid_samples(7).samples)
        k, d, w = rows[4]
        rows[4] = (k, d + 1, w)
        with pytest.raises(SampleError) as exc_info:
            fit_polynomials(HilbertSamples(n=2, samples=tuple(rows)))
        assert exc_info.value.k == 5
        assert exc_info.value.details() == {"k": 5}


class TestDonaldsonFutaki:
    """Test F0, F1 and the verdict."""

    def test_trapezoid(self):
        df = _df(_trapezoid_samples(6))
        assert df.F0 == Fraction(7, 9)
        assert df.F1 == Fraction(1, 27)
        assert ksemistable_verdict(df) is KStabilityVerdict.destabilized

    def test_interval(self):
        samples = HilbertSamples(n=1, samples=tuple((k, k + 1, k * (k + 1) // 2) for k in range(1, 6)))
        df = _df(samples)
        assert df.F1 == 0
        assert ksemistable_verdict(df) is KStabilityVerdict.semistable_consistent

    def test_shift_invariance(self):
        samples = _trapezoid_samples(6)
        assert _df(samples.shifted(3)).F1 == _df(samples).F1
        assert _df(samples.shifted(-2)).F1 == _df(samples).F1

    def test_polarization_power_invariance(self):
        # Passing from L to L^2 keeps the even samples, reindexed by k/2.
        samples = _trapezoid_samples(12)
        squared = HilbertSamples(
            n=2, samples=tuple((k // 2, d, w) for k, d, w in samples.samples if k % 2 == 0)
        )
        assert _df(squared).F1 == _df(samples).F1

    def test_json(self):
        payload = _df(_trapezoid_samples(6)).to_json()
        assert payload["F1"] == "1/27"
        assert payload["a0"] == "3/2"


class TestToricProductConfig:
    """Test lattice-point sampling of polytopes with a weight functional."""

    def test_trapezoid_samples(self):
        assert toric_product_config(TRAPEZOID, 6) == _trapezoid_samples(6)

    def test_trapezoid_end_to_end(self):
        df = _df(toric_product_config(TRAPEZOID, 6, workers=2))
        assert df.F1 == Fraction(1, 27)

    @pytest.mark.parametrize("length", [1, 2])
    def test_segments_are_balanced(self, length):
        segment = LatticePolytopeAction(vertices=((0,), (length,)), alpha=(1,))
        assert _df(toric_product_config(segment, 5)).F1 == 0

    def test_translation_invariance(self):
        moved = TRAPEZOID.translate((3, -1))
        assert _df(toric_product_config(moved, 6)).F1 == Fraction(1, 27)

    def test_k_max_too_small(self):
        with pytest.raises(InputError, match="k_max"):
            toric_product_config(TRAPEZOID, 4)

    def test_flat_polytope_rejected(self):
        with pytest.raises(DiagramError, match="full-dimensional"):
            LatticePolytopeAction(vertices=((0, 0), (1, 1), (2, 2)), alpha=(1, 0))

    def test_dimension_mismatch(self):
        with pytest.raises(InputError, match="dimension"):
            LatticePolytopeAction(vertices=((0, 0), (1, 0), (0, 1)), alpha=(1,))
