"""Tests for input document parsing."""

import io
import json

import pytest

from reebvolmin.cones import PolygonDiagram, ToricDiagram
from reebvolmin.dfutaki import HilbertSamples, LatticePolytopeAction
from reebvolmin.errors import InputError
from reebvolmin.models import (
    load_diagram,
    parse_document,
    parse_inputs,
    read_document,
    to_diagram,
    to_reeb,
)
from reebvolmin.obstructions import BrieskornExponents, WeightedHypersurface
from reebvolmin.volume import ReebVector


class TestDocumentKinds:
    """Test that each document kind is recognized by its keys."""

    def test_diagram(self):
        value = parse_document({"normals": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
        assert isinstance(value, ToricDiagram)
        assert value.m == 2

    def test_polygon(self):
        value = parse_document({"vertices": [[0, 0], [1, 0], [1, 1], [0, 1]]})
        assert isinstance(value, PolygonDiagram)

    def test_reeb_with_rationals(self):
        value = parse_document({"xi": [3, "5/2", 1.5]})
        assert isinstance(value, ReebVector)

    def test_samples(self):
        rows = [[k, k + 1, k * (k + 1) // 2] for k in range(1, 6)]
        assert isinstance(parse_document({"n": 1, "samples": rows}), HilbertSamples)

    def test_polytope_action(self):
        value = parse_document({"vertices": [[0], [2]], "alpha": [1]})
        assert isinstance(value, LatticePolytopeAction)

    def test_hypersurface(self):
        value = parse_document({"m": 2, "weights": [1, 1, 1, 1], "degree": 2})
        assert isinstance(value, WeightedHypersurface)

    def test_brieskorn(self):
        value = parse_document({"exponents": [2, 2, 2, 5], "smooth": False})
        assert isinstance(value, BrieskornExponents)
        assert value.smooth_claimed is False

    def test_unknown_keys(self):
        with pytest.raises(InputError, match="unrecognized document"):
            parse_document({"colour": "blue"})

    def test_not_an_object(self):
        with pytest.raises(InputError, match="expected a JSON object"):
            parse_document([1, 2, 3])


class TestPointers:
    """Test that schema errors are located by JSON pointer."""

    def test_wrong_length_normal(self):
        with pytest.raises(InputError) as exc_info:
            to_diagram({"normals": [[1, 0, 0], [0, 1]]})
        assert exc_info.value.pointer == "/normals/1"

    def test_boolean_entry(self):
        with pytest.raises(InputError) as exc_info:
            to_diagram({"normals": [[1, True, 0]]})
        assert exc_info.value.pointer == "/normals/0/1"

    def test_float_entry(self):
        with pytest.raises(InputError) as exc_info:
            to_diagram({"normals": [[1, 0, 0], [0, 0.5, 1]]})
        assert exc_info.value.pointer == "/normals/1/1"

    def test_extra_key(self):
        with pytest.raises(InputError) as exc_info:
            to_diagram({"normals": [[1, 0, 0]], "comment": "hi"})
        assert exc_info.value.pointer == "/comment"
        assert exc_info.value.details() == {"pointer": "/comment"}

    def test_zero_normal(self):
        with pytest.raises(InputError, match="zero normal") as exc_info:
            to_diagram({"normals": [[1, 0, 0], [0, 0, 0]]})
        assert exc_info.value.pointer == "/normals"

    def test_bad_rational(self):
        with pytest.raises(InputError, match="not a rational") as exc_info:
            to_reeb({"xi": [3, "x", 1]})
        assert exc_info.value.pointer.startswith("/xi")

    def test_clockwise_polygon(self):
        with pytest.raises(InputError, match="invalid polygon") as exc_info:
            parse_document({"vertices": [[0, 0], [0, 1], [1, 1], [1, 0]]})
        assert exc_info.value.pointer == "/vertices"


class TestReading:
    """Test reading documents from files and stdin."""

    def test_file(self, write_json):
        path = write_json({"normals": [[1, 0, 0], [0, 1, 0], [0, 0, 1]]})
        assert isinstance(parse_inputs(path), ToricDiagram)

    def test_stdin(self, monkeypatch):
        monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"exponents": [2, 2, 2, 3]})))
        assert read_document("-") == {"exponents": [2, 2, 2, 3]}

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(InputError, match="malformed JSON"):
            read_document(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(InputError, match="cannot read"):
            read_document(tmp_path / "absent.json")

    def test_load_diagram_lifts_polygons(self, write_json, ex531, pentagon):
        diagram, polygon = load_diagram(write_json(pentagon.to_json()))
        assert diagram == ex531
        assert polygon == pentagon

    def test_load_diagram_keeps_normals(self, write_json, orthant):
        diagram, polygon = load_diagram(write_json(orthant.to_json()))
        assert diagram == orthant
        assert polygon is None

    def test_load_diagram_rejects_other_kinds(self, write_json):
        with pytest.raises(InputError, match="diagram or a polygon"):
            load_diagram(write_json({"exponents": [2, 2, 2, 3]}))
