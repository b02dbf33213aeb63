"""Canonical serialization: round trips, digests, packages, DOT export."""

import json

import pytest

from ttforge.freegroup import fold, pi1_endomorphism
from ttforge.graphs import rose
from ttforge.induced import build_induced, verify_package
from ttforge.io import (
    PACKAGE_FILES, canonical_text, content_digest, export_dot, graph_from_obj,
    graph_to_obj, input_to_obj, labeled_from_obj, labeled_to_obj, load_input,
    load_package, make_report, map_from_obj, map_to_obj, report_to_obj,
    write_package,
)

ROSE2 = rose(["a", "b"])


class TestCanonicalForm:
    def test_key_order_is_immaterial(self):
        assert canonical_text({"b": 1, "a": [2, 3]}) \
            == canonical_text({"a": [2, 3], "b": 1})
        assert canonical_text({"x": 0}).endswith("\n")

    def test_digest_tracks_content(self):
        assert content_digest({"a": 1}) == content_digest({"a": 1})
        assert content_digest({"a": 1}) != content_digest({"a": 2})
        assert len(content_digest({})) == 64


class TestGraphAndMapObjects:
    def test_graph_round_trip(self, sigma, cyc2, pre1_r2):
        for g in (sigma.domain, cyc2.domain, pre1_r2.domain):
            assert graph_from_obj(graph_to_obj(g)) == g

    def test_map_round_trip(self, named_fixture_maps, corpus100):
        for f in list(named_fixture_maps.values()) + corpus100[:10]:
            assert map_from_obj(map_to_obj(f), f.domain) == f

    def test_serialized_paths_use_minus_tokens(self, nilp):
        obj = map_to_obj(nilp)
        assert obj["edges"]["c"] == "a -b"
        back = map_from_obj(obj, nilp.domain)
        assert back == nilp

    def test_labeled_round_trip(self, sigma, fib):
        for f in (sigma, fib):
            pkg = build_induced(f)
            obj = labeled_to_obj(pkg.core)
            assert labeled_from_obj(obj, f.domain) == pkg.core

    def test_subgroup_core_round_trip(self):
        core = fold(ROSE2, "v", ["a b", "b a"])
        again = labeled_from_obj(labeled_to_obj(core), ROSE2)
        assert again == core
        assert again.basepoint == core.basepoint


class TestInputDocuments:
    def test_map_document(self, sigma):
        bundle = load_input(input_to_obj(sigma))
        assert bundle.kind == "map"
        assert bundle.graph_map == sigma
        assert bundle.endomorphism is None
        assert bundle.digest == content_digest(input_to_obj(sigma))

    def test_endomorphism_document(self):
        doc = {"endomorphism": {"generators": ["x", "y"],
                                "images": {"x": "x y", "y": "x y"}}}
        bundle = load_input(doc)
        assert bundle.kind == "endomorphism"
        assert bundle.endomorphism is not None
        f = bundle.graph_map
        assert f.is_self_map
        assert sorted(f.domain.edge_ids) == ["x", "y"]
        assert f.dart_image("x") == ("x", "y")

    def test_rejects_malformed_documents(self):
        with pytest.raises(ValueError, match="JSON object"):
            load_input([1, 2])
        with pytest.raises(ValueError, match="graph"):
            load_input({"map": {}})


class TestPackageFiles:
    def test_write_and_load_round_trip(self, tmp_path, sigma):
        pkg = build_induced(sigma)
        report = verify_package(pkg)
        write_package(tmp_path, pkg, report)
        for name in PACKAGE_FILES:
            assert (tmp_path / name).exists()
        loaded = load_package(tmp_path)
        assert loaded.source == pkg.source
        assert loaded.core == pkg.core
        assert loaded.induced == pkg.induced
        assert loaded.projection == pkg.projection
        assert loaded.transfer == pkg.transfer
        assert loaded.constants() == pkg.constants()
        assert verify_package(loaded).ok

    def test_package_bytes_are_deterministic(self, tmp_path, fib):
        pkg = build_induced(fib)
        report = verify_package(pkg)
        a, b = tmp_path / "a", tmp_path / "b"
        a.mkdir(), b.mkdir()
        write_package(a, pkg, report)
        write_package(b, pkg, report)
        for name in PACKAGE_FILES:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_constants_file_contents(self, tmp_path, sigma):
        pkg = build_induced(sigma)
        write_package(tmp_path, pkg, verify_package(pkg))
        doc = json.loads((tmp_path / "constants.json").read_text())
        assert doc["constant"] == 2 and doc["schema"] == 1
        assert doc["input_digest"] == content_digest(input_to_obj(sigma))
        assert "tool_version" in doc

    def test_report_objects(self, sigma):
        pkg = build_induced(sigma)
        obj = report_to_obj(verify_package(pkg))
        assert obj["ok"] is True
        assert all(entry["ok"] for entry in obj["checks"].values())
        envelope = make_report("analyze", "f" * 64, {"expanding": True})
        assert envelope["command"] == "analyze"
        assert envelope["input_digest"] == "f" * 64
        assert envelope["results"] == {"expanding": True}


class TestDotExport:
    def test_rose_layout(self):
        text = export_dot(ROSE2)
        assert text.startswith("digraph G {")
        assert text.count('"v";') == 1
        assert '"v" -> "v" [label="a"];' in text
        assert '"v" -> "v" [label="b"];' in text
        assert text.endswith("}\n")

    def test_deterministic_and_label_override(self, cyc2):
        assert export_dot(cyc2.domain) == export_dot(cyc2.domain)
        text = export_dot(ROSE2, edge_labels={"a": "p"}, name="H")
        assert 'digraph H {' in text
        assert '[label="p"];' in text
        assert '[label="b"];' in text

    def test_projection_labels_on_cover(self, sigma):
        pkg = build_induced(sigma)
        text = export_dot(pkg.core.graph, edge_labels=pkg.core.edge_label)
        assert text.count('[label="a"]') == 1
        assert text.count('[label="b"]') == 1
