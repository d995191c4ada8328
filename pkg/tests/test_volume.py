"""Tests for truncated polytopes and the volume functional."""

import math
import random
from fractions import Fraction

import numpy as np
import pytest

from reebvolmin.cones import ToricDiagram, random_unimodular
from reebvolmin.errors import InputError, UnboundedTruncationError
from reebvolmin.volume import (
    ReebVector,
    cone_triangulation,
    format_number,
    grad_vol,
    hess_vol,
    in_interior,
    parse_number,
    s_tilde_constant,
    truncate,
    vol_fn,
    volume,
)


def xi(*values, exact=True):
    return ReebVector(values, exact=exact)


def _interior_reeb(diagram, rng):
    """A random exact point of the open Reeb cone, a positive combination of the normals."""
    weights = [rng.randint(1, 9) for _ in diagram.normals]
    return ReebVector(
        tuple(sum(w * v[a] for w, v in zip(weights, diagram.normals, strict=True)) for a in range(diagram.dim))
    )


class TestReebVector:
    """Test Reeb vector parsing and formatting."""

    def test_parse_rationals(self):
        vector = ReebVector.parse("3,5/2,1")
        assert vector.xi == (Fraction(3), Fraction(5, 2), Fraction(1))
        assert vector.to_json()["xi"] == ["3", "5/2", "1"]

    def test_float_mode(self):
        vector = ReebVector.parse("3,2.5,1", exact=False)
        assert vector.xi == (3.0, 2.5, 1.0)

    def test_booleans_rejected(self):
        with pytest.raises(InputError):
            parse_number(True)

    def test_garbage_rejected(self):
        with pytest.raises(InputError, match="not a rational"):
            ReebVector.parse("3,x,1")

    def test_format_number(self):
        assert format_number(Fraction(7, 162)) == "7/162"
        assert format_number(Fraction(4)) == "4"
        assert format_number(0.5) == 0.5


class TestInterior:
    """Test membership in the open Reeb cone."""

    def test_orthant(self, orthant):
        assert in_interior(orthant, xi(1, 1, 1)) is True
        assert in_interior(orthant, xi(1, 0, 1)) is False

    def test_pentagon(self, ex531):
        assert in_interior(ex531, xi(3, 3, 3)) is True
        assert in_interior(ex531, xi(1, 3, 3)) is False

    def test_dimension_mismatch(self, orthant):
        with pytest.raises(InputError, match="coordinates"):
            in_interior(orthant, xi(1, 1))


class TestTruncate:
    """Test the truncated polytope."""

    def test_orthant_simplex(self, orthant):
        polytope = truncate(orthant, xi(1, 1, 1))
        assert set(polytope.vertices) == {(0, 0, 0), (0, 0, 1), (0, 1, 0), (1, 0, 0)}
        assert polytope.vertices[0] == (0, 0, 0)

    def test_orthant_scaled_ray(self, orthant):
        polytope = truncate(orthant, xi(2, 1, 1))
        assert set(polytope.vertices) == {
            (0, 0, 0),
            (0, 0, 1),
            (0, 1, 0),
            (Fraction(1, 2), 0, 0),
        }

    def test_pentagon_vertex_count(self, ex531):
        polytope = truncate(ex531, xi(3, 3, 3))
        assert len(polytope.vertices) == 1 + 5
        # five cone facets through the apex plus the cap
        assert len(polytope.facets) == 6
        assert polytope.facets[-1] == (1, 2, 3, 4, 5)

    def test_boundary_reeb_is_unbounded(self, orthant):
        with pytest.raises(UnboundedTruncationError, match="unbounded truncation"):
            truncate(orthant, xi(1, 0, 1))


class TestVolume:
    """Test exact and floating point volumes."""

    def test_orthant_unit(self, orthant):
        value = vol_fn(orthant, xi(1, 1, 1))
        assert value.vol_delta == Fraction(1, 6)
        assert value.s_tilde == pytest.approx(8 * (2 * math.pi) ** 3)
        assert value.vol_riemannian == pytest.approx((2 * math.pi) ** 3)

    def test_orthant_scaled(self, orthant):
        assert vol_fn(orthant, xi(2, 1, 1)).vol_delta == Fraction(1, 12)

    def test_pentagon(self, ex531):
        assert vol_fn(ex531, xi(1, 1, 1)).vol_delta == Fraction(7, 6)
        assert vol_fn(ex531, xi(3, 3, 3)).vol_delta == Fraction(7, 162)

    def test_polytope_volume_agrees(self, ex531):
        reeb = xi(3, Fraction(5, 2), Fraction(11, 4))
        assert volume(truncate(ex531, reeb)) == vol_fn(ex531, reeb).vol_delta

    def test_float_agrees_with_exact(self, ex531):
        exact = vol_fn(ex531, xi(3, 3, 3)).vol_delta
        approx = vol_fn(ex531, xi(3.0, 3.0, 3.0, exact=False)).vol_delta
        assert approx == pytest.approx(float(exact), rel=1e-12)
        assert volume(truncate(ex531, xi(3.0, 3.0, 3.0, exact=False))) == pytest.approx(float(exact))

    def test_homogeneity(self, ex531):
        base = vol_fn(ex531, xi(3, 2, 2)).vol_delta
        assert vol_fn(ex531, xi(6, 4, 4)).vol_delta == base / 8

    def test_unimodular_invariance(self, ex531):
        reeb = xi(3, Fraction(5, 2), 3)
        expected = vol_fn(ex531, reeb).vol_delta
        rng = random.Random(5)
        for _ in range(4):
            g = random_unimodular(3, rng)
            moved = vol_fn(g.apply_to_diagram(ex531), ReebVector(g.apply(reeb.xi)))
            assert moved.vol_delta == expected

    def test_triangulation_weights(self, ex531):
        tri = cone_triangulation(ex531)
        assert sum(tri.weights) == 7
        assert len(tri.simplices) == 3

    def test_s_tilde_constant(self):
        assert s_tilde_constant(2) == pytest.approx(48 * (2 * math.pi) ** 3)

    def test_minimizer_is_lower(self, ex531):
        at_regular = vol_fn(ex531, xi(3, 3, 3)).s_tilde
        root = 9 / 16 * (math.sqrt(33) - 1)
        at_min = vol_fn(ex531, xi(3.0, root, root, exact=False)).s_tilde
        assert at_min < at_regular


class TestGradient:
    """Test the analytic gradient and Hessian."""

    def test_euler_identity(self, ex531):
        reeb = xi(3, 3, 3)
        grad = grad_vol(ex531, reeb)
        vol = vol_fn(ex531, reeb).vol_delta
        assert sum(g * x for g, x in zip(grad, reeb.xi, strict=True)) == -3 * vol

    def test_matches_finite_differences(self, ex531):
        point = np.array([3.0, 3.0, 3.0])
        grad = np.array(grad_vol(ex531, xi(*point, exact=False)))
        h = 1e-6
        for a in range(3):
            step = np.zeros(3)
            step[a] = h
            plus = vol_fn(ex531, xi(*(point + step), exact=False)).vol_delta
            minus = vol_fn(ex531, xi(*(point - step), exact=False)).vol_delta
            assert (plus - minus) / (2 * h) == pytest.approx(grad[a], rel=1e-6)

    def test_exact_and_float_gradients_agree(self, ex531):
        exact = grad_vol(ex531, xi(3, 3, 3))
        approx = grad_vol(ex531, xi(3.0, 3.0, 3.0, exact=False))
        assert list(approx) == pytest.approx([float(g) for g in exact], rel=1e-12)

    def test_hessian_positive_definite(self, ex531):
        hess = hess_vol(ex531, xi(3.0, 3.0, 3.0, exact=False))
        np.testing.assert_allclose(hess, hess.T, rtol=1e-12)
        assert np.all(np.linalg.eigvalsh(hess) > 0)


DIAGRAMS = ["ex531", "orthant", "conifold"]


class TestVolumeProperties:
    """Seeded checks of the volume functional on random Reeb vectors."""

    @pytest.mark.parametrize("name", DIAGRAMS)
    def test_homogeneity(self, request, name):
        diagram = request.getfixturevalue(name)
        rng = random.Random(31)
        for _ in range(50):
            reeb = _interior_reeb(diagram, rng)
            c = Fraction(rng.randint(1, 7), rng.randint(1, 7))
            scaled = vol_fn(diagram, reeb.scaled(c)).vol_delta
            assert scaled == vol_fn(diagram, reeb).vol_delta / c ** (diagram.m + 1)

    @pytest.mark.parametrize("name", DIAGRAMS)
    def test_euler_identity(self, request, name):
        diagram = request.getfixturevalue(name)
        rng = random.Random(37)
        for _ in range(50):
            reeb = _interior_reeb(diagram, rng)
            grad = grad_vol(diagram, reeb)
            pairing = sum(g * x for g, x in zip(grad, reeb.xi, strict=True))
            assert pairing == -(diagram.m + 1) * vol_fn(diagram, reeb).vol_delta

    @pytest.mark.parametrize("name", DIAGRAMS)
    def test_gradient_matches_central_differences(self, request, name):
        diagram = request.getfixturevalue(name)
        rng = random.Random(41)
        for _ in range(20):
            point = _interior_reeb(diagram, rng).array()
            grad = np.array(grad_vol(diagram, xi(*point, exact=False)))
            h = 1e-6 * float(np.max(np.abs(point)))
            for a in range(diagram.dim):
                step = np.zeros(diagram.dim)
                step[a] = h
                plus = vol_fn(diagram, xi(*(point + step), exact=False)).vol_delta
                minus = vol_fn(diagram, xi(*(point - step), exact=False)).vol_delta
                assert abs((plus - minus) / (2 * h) - grad[a]) <= 1e-6 * np.linalg.norm(grad)

    @pytest.mark.parametrize("seed", range(3))
    def test_relabeling_normals_keeps_volume(self, ex531, seed):
        rng = random.Random(seed)
        normals = list(ex531.normals)
        rng.shuffle(normals)
        shuffled = ToricDiagram(m=2, normals=tuple(normals))
        for _ in range(10):
            reeb = _interior_reeb(ex531, rng)
            assert vol_fn(shuffled, reeb).vol_delta == vol_fn(ex531, reeb).vol_delta

    def test_monte_carlo_agrees_with_exact_volume(self, ex531):
        reeb = xi(3, Fraction(5, 2), Fraction(11, 4))
        exact = float(vol_fn(ex531, reeb).vol_delta)
        vertices = np.array(truncate(ex531, reeb).vertices, dtype=float)
        low, high = vertices.min(axis=0), vertices.max(axis=0)
        box = float(np.prod(high - low))

        n = 200_000
        samples = np.random.default_rng(7).uniform(low, high, size=(n, 3))
        normals = np.array(ex531.normals, dtype=float)
        inside = np.all(samples @ normals.T >= 0, axis=1) & (samples @ reeb.array() <= 1)
        p = float(inside.mean())
        estimate = box * p
        stderr = box * math.sqrt(p * (1 - p) / n)
        assert abs(estimate - exact) <= 5 * stderr
