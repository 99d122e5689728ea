"""Profiling statistics against brute-force oracles, format detection and
attribute-pair analysis."""

from __future__ import annotations

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lakecat import profiler, tabular
from lakecat.fixtures import corpus_path

from .conftest import ingest_file, write_csv
from .oracles import ref_nominal_stats, ref_numeric_stats, ref_pearson

REL = 1e-9


class TestNumericStats:
    def test_frozen_example(self):
        # oracle: count=4 null=1 distinct=3 min=1 max=3 mean=2 stdDev=sqrt(2/3)
        stats = profiler.compute_numeric_stats([1.0, 2.0, 3.0, None])
        assert (stats.count, stats.null_count, stats.distinct_count) == (4, 1, 3)
        assert (stats.minimum, stats.maximum, stats.mean) == (1.0, 3.0, 2.0)
        assert stats.std_dev == pytest.approx(0.816496580927726, rel=1e-12)

    def test_single_value(self):
        stats = profiler.compute_numeric_stats([5.0])
        assert stats.minimum == stats.maximum == stats.mean == 5.0
        assert stats.std_dev == 0.0

    def test_empty_list(self):
        stats = profiler.compute_numeric_stats([])
        assert stats.count == 0 and stats.mean is None and stats.minimum is None

    def test_all_null(self):
        stats = profiler.compute_numeric_stats([None, None])
        assert stats.count == 2 and stats.null_count == 2
        assert stats.mean is None and stats.std_dev is None

    @settings(max_examples=60, deadline=None)
    @given(
        values=st.lists(
            st.one_of(st.none(), st.floats(-1e6, 1e6, allow_nan=False)), min_size=0, max_size=40
        )
    )
    def test_matches_oracle(self, values):
        stats = profiler.compute_numeric_stats(values)
        expected = ref_numeric_stats(values)
        assert stats.count == expected["count"]
        assert stats.null_count == expected["nullCount"]
        assert stats.distinct_count == expected["distinctCount"]
        if "mean" in expected:
            assert stats.minimum == expected["min"]
            assert stats.maximum == expected["max"]
            assert stats.mean == pytest.approx(expected["mean"], rel=REL, abs=1e-12)
            assert stats.std_dev == pytest.approx(expected["stdDev"], rel=REL, abs=1e-9)


class TestNominalStats:
    def test_frozen_example(self):
        stats = profiler.compute_nominal_stats(["a", "b", "a", None])
        assert (stats.count, stats.null_count, stats.distinct_count) == (4, 1, 2)
        assert stats.top_values == [("a", 2), ("b", 1)]

    def test_all_distinct(self):
        stats = profiler.compute_nominal_stats(["x", "y", "z"])
        assert stats.distinct_count == stats.count == 3

    def test_empty(self):
        stats = profiler.compute_nominal_stats([])
        assert stats.count == 0 and stats.min_length == 0 and stats.top_values == []

    def test_tie_break_lexicographic(self):
        stats = profiler.compute_nominal_stats(["b", "a", "c", "a", "b", "c", "d", "e", "f"])
        expected = ref_nominal_stats(["b", "a", "c", "a", "b", "c", "d", "e", "f"])
        assert stats.top_values == expected["top"]
        assert stats.top_values[:3] == [("a", 2), ("b", 2), ("c", 2)]


class TestFormat:
    def test_jpeg_magic(self, tmp_path):
        p = tmp_path / "f.weird"
        p.write_bytes(b"\xff\xd8\xff\xdb" + b"\x00" * 8)
        assert profiler.get_dataset_format(p) == "image/jpeg"

    def test_png_magic(self, tmp_path):
        p = tmp_path / "f.png"
        p.write_bytes(b"\x89PNG\r\n\x1a\n" + b"\x00" * 8)
        assert profiler.get_dataset_format(p) == "image/png"

    def test_unknown_binary_fallback(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(b"\x01\x02\x03\x04")
        assert profiler.get_dataset_format(p) == "application/octet-stream"

    def test_extension_fallback(self, tmp_path):
        p = tmp_path / "notes.txt"
        p.write_text("hello")
        assert profiler.get_dataset_format(p) == "text/plain"

    def test_directory_common_format(self):
        assert profiler.get_dataset_format(corpus_path() / "chest_xray_mini") == "image/jpeg"


class TestProfileDataset:
    def test_multi_entity_fixture(self, lake):
        source_id = lake.connect_source(
            str(corpus_path() / "chsi_cancer_mini"), "csv files", "chsi", "tester"
        )
        _, dataset_id = lake.ingest(source_id)
        entities = lake.store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out")
        assert len(entities) == 11

    def test_single_entity_seven_columns(self, lake, tmp_path):
        path = write_csv(
            tmp_path / "seven.csv",
            ["c1", "c2", "c3", "c4", "c5", "c6", "c7"],
            [[1, 2, 3, 4, 5, 6, "x"], [7, 8, 9, 10, 11, 12, "y"]],
        )
        _, _, dataset_id = ingest_file(lake, path, "seven")
        entities = lake.store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out")
        assert len(entities) == 1
        atts = lake.store.neighbors(entities[0].id, "EntityClass-Attribute", "out")
        assert len(atts) == 7
        assert entities[0].props["attributeCount"] == 7

    def test_header_only_zero_rows(self, lake, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("a,b\n")
        _, _, dataset_id = ingest_file(lake, path, "empty")
        entities = lake.store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out")
        assert entities[0].props["rowCount"] == 0
        atts = lake.store.neighbors(entities[0].id, "EntityClass-Attribute", "out")
        assert all(a.props["count"] == 0 for a in atts)

    def test_unstructured_gets_format(self, lake, tmp_path):
        path = tmp_path / "scan.jpg"
        path.write_bytes(b"\xff\xd8\xff\xe0" + b"\x00" * 32)
        _, _, dataset_id = ingest_file(lake, path, "scan", source_type="images")
        node = lake.store.node(dataset_id)
        assert node.props["type"] == "unstructured"
        assert node.props["format"] == "image/jpeg"

    def test_attribute_totals_match_entity_counts(self, lake):
        source_id = lake.connect_source(
            str(corpus_path() / "chsi_cancer_mini"), "csv files", "chsi", "tester"
        )
        _, dataset_id = lake.ingest(source_id)
        total = 0
        for entity in lake.store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out"):
            atts = lake.store.neighbors(entity.id, "EntityClass-Attribute", "out")
            assert entity.props["attributeCount"] == len(atts)
            total += len(atts)
        stats = lake.store.stats()["nodes"]
        assert total == stats["NumericAttribute"] + stats["NominalAttribute"]

    def test_fixture_stats_match_oracle(self, lake):
        """Every fixture column's stored stats equal the brute-force oracle."""
        source_id = lake.connect_source(
            str(corpus_path() / "critical_care_mini.csv"), "csv file", "icu", "tester"
        )
        _, dataset_id = lake.ingest(source_id)
        entity = lake.store.neighbors(dataset_id, "DatalakeDataset-EntityClass", "out")[0]
        parsed = tabular.load_entities(corpus_path() / "critical_care_mini.csv", "icu")[0]
        atts = {a.props["name"]: a for a in lake.store.neighbors(entity.id, "EntityClass-Attribute", "out")}
        for index, column in enumerate(parsed.columns):
            values = parsed.column_values(index)
            node = atts[column]
            if node.label == "NumericAttribute":
                expected = ref_numeric_stats(tabular.numeric_values(values))
                assert node.props["count"] == expected["count"]
                assert node.props["nullCount"] == expected["nullCount"]
                assert node.props["min"] == expected["min"]
                assert node.props["max"] == expected["max"]
                assert node.props["mean"] == pytest.approx(expected["mean"], rel=REL)
                assert node.props["stdDev"] == pytest.approx(expected["stdDev"], rel=REL, abs=1e-12)
            else:
                expected = ref_nominal_stats(values)
                assert node.props["distinctCount"] == expected["distinctCount"]
                assert json.loads(node.props["topValues"]) == [list(t) for t in expected["top"]]


class TestAnalyzeAttributePairs:
    def test_identical_columns_full_correlation(self, lake, tmp_path):
        path = write_csv(tmp_path / "c.csv", ["x", "x_copy"], [[1, 1], [2, 2], [3, 3]])
        _, _, dataset_id = ingest_file(lake, path, "copycol")
        analyses = lake.store.find("AnalysisAttribute")
        kinds = {}
        for node in analyses:
            kind = lake.store.neighbors(node.id, "AnalysisAttribute-RelationshipAtt", "out")[0]
            kinds.setdefault(kind.props["name"], []).append(node.props["value"])
        assert 1.0 in kinds.get("correlation", [])

    def test_pearson_example_above_threshold(self, lake, tmp_path):
        # oracle: r([1,2,3,4],[2,4,5,4]) = 0.7181848464596079 >= 0.7 -> persisted
        assert ref_pearson([1, 2, 3, 4], [2, 4, 5, 4]) == pytest.approx(0.718, abs=1e-3)
        path = write_csv(tmp_path / "p.csv", ["a", "b"], [[1, 2], [2, 4], [3, 5], [4, 4]])
        _, _, dataset_id = ingest_file(lake, path, "pear")
        analyses = lake.store.find("AnalysisAttribute")
        values = [n.props["value"] for n in analyses]
        assert any(math.isclose(v, 0.7181848464596079, rel_tol=REL) for v in values)

    def test_symmetry_of_measures(self, lake, tmp_path):
        """value(a,b) == value(b,a): column order cannot change results."""
        path_ab = write_csv(tmp_path / "ab.csv", ["a", "b"], [[1, 2], [2, 4], [3, 5], [4, 4]])
        path_ba = write_csv(tmp_path / "ba.csv", ["b", "a"], [[2, 1], [4, 2], [5, 3], [4, 4]])
        _, _, ds_ab = ingest_file(lake, path_ab, "ab")
        _, _, ds_ba = ingest_file(lake, path_ba, "ba")

        def analysis_values(ds):
            out = []
            for entity in lake.store.neighbors(ds, "DatalakeDataset-EntityClass", "out"):
                att_ids = {a.id for a in lake.store.neighbors(entity.id, "EntityClass-Attribute", "out")}
                for node in lake.store.find("AnalysisAttribute"):
                    linked = {a.id for a in lake.store.neighbors(node.id, "AnalysisAttribute-Attribute", "out")}
                    if linked <= att_ids:
                        out.append(round(node.props["value"], 12))
            return sorted(out)

        assert analysis_values(ds_ab) == analysis_values(ds_ba)

    def test_persisted_values_meet_thresholds(self, lake):
        source_id = lake.connect_source(
            str(corpus_path() / "breast_cancer_mini.csv"), "csv file", "breast", "tester"
        )
        _, dataset_id = lake.ingest(source_id)
        thresholds = lake.config.att_thresholds
        for node in lake.store.find("AnalysisAttribute"):
            kind = lake.store.neighbors(node.id, "AnalysisAttribute-RelationshipAtt", "out")[0]
            assert abs(node.props["value"]) >= thresholds[kind.props["name"]] - 1e-12

    def test_malformed_tabular_aborts_into_error_log(self, lake, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        source_id = lake.connect_source(str(path), "csv file", "bad", "tester")
        ingest_id, dataset_id = lake.ingest(source_id)
        # corrupt the raw copy, then force a re-profile
        raw = lake.store.node(dataset_id).props["lakePath"]
        with open(raw, "w") as handle:
            handle.write("a,b\n1,2,3,4\n")
        ok = profiler.profile_dataset(lake.store, lake.config, dataset_id)
        assert ok is False
        assert "profiling failed" in lake.store.node(ingest_id).props["errorLog"]
