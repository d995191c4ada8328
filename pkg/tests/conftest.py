"""Pytest configuration and fixtures."""

import json

import pytest

from reebvolmin import PolygonDiagram, ToricDiagram, polygon_to_cone

PENTAGON = ((0, 0), (1, 0), (2, 1), (1, 2), (0, 1))
SQUARE = ((0, 0), (1, 0), (1, 1), (0, 1))
# Edge (2, 4) -> (0, 0) has gcd 2.
BAD_TRIANGLE = ((0, 0), (1, 0), (2, 4))
# Good, but no covector pairs to the same value with every normal.
NO_HEIGHT_NORMALS = ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 1, -2))


@pytest.fixture(autouse=True)
def env_setup(monkeypatch):
    """Isolate tests from the caller's environment and any .env file."""
    for name in (
        "REEBVOLMIN_THREADS",
        "REEBVOLMIN_TOLERANCE",
        "REEBVOLMIN_MAX_ITERATIONS",
        "REEBVOLMIN_COORDINATE_TOLERANCE",
    ):
        monkeypatch.delenv(name, raising=False)
    monkeypatch.setattr("reebvolmin.config.load_dotenv", lambda *_args, **_kwargs: False)


@pytest.fixture
def pentagon() -> PolygonDiagram:
    """The lattice pentagon whose cone carries an irregular Sasaki-Einstein metric."""
    return PolygonDiagram(PENTAGON)


@pytest.fixture
def ex531() -> ToricDiagram:
    """Cone over the pentagon, normals (1, p_j, q_j)."""
    return ToricDiagram(m=2, normals=tuple((1, p, q) for p, q in PENTAGON))


@pytest.fixture
def orthant() -> ToricDiagram:
    """The positive orthant of R^3, the cone of the round S^5."""
    return ToricDiagram(m=2, normals=((1, 0, 0), (0, 1, 0), (0, 0, 1)))


@pytest.fixture
def square() -> PolygonDiagram:
    """Unit square, the conifold."""
    return PolygonDiagram(SQUARE)


@pytest.fixture
def conifold(square) -> ToricDiagram:
    """Cone over the unit square."""
    return polygon_to_cone(square)


@pytest.fixture
def bad_triangle() -> PolygonDiagram:
    return PolygonDiagram(BAD_TRIANGLE)


@pytest.fixture
def no_height() -> ToricDiagram:
    return ToricDiagram(m=2, normals=NO_HEIGHT_NORMALS)


@pytest.fixture
def write_json(tmp_path):
    """Write a JSON document to a temporary file and return its path."""

    def _write(payload, name="input.json"):
        path = tmp_path / name
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    return _write
