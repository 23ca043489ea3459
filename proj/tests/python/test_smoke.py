import json

import pytest

import callfuse


def test_f_measure():
    assert callfuse.f_measure(0.753, 0.569) == pytest.approx(0.648, abs=1e-3)
    assert callfuse.f_measure(0.0, 0.0) == 0.0


def test_wilcoxon_small_sample():
    r = callfuse.wilcoxon([1, 2, 3], [0, 0, 0])
    assert r == {"T": 0.0, "p_value": 0.25, "n_effective": 3, "method": "exact"}
    assert callfuse.wilcoxon([0, 0, 0], [1, 2, 3]) == r
    with pytest.raises(ValueError):
        callfuse.wilcoxon([1], [1], zero_method="zsplit")


def test_grid_has_36_configs():
    configs = callfuse.enumerate_configs()
    assert [c[0] for c in configs] == list(range(1, 37))
    assert len({c[1] for c in configs}) == 9


def test_extract_merge_and_count(fixtures):
    graph, spans, _ = callfuse.extract_static(str(fixtures / "corpus" / "v2" / "src"))
    doc = json.loads(graph)
    assert len(doc["nodes"]) == 11
    assert len(json.loads(spans)) == 10
    trace = (fixtures / "corpus" / "v2" / "trace.json").read_text()
    merged = json.loads(callfuse.merge_graphs([("static-ast", graph), ("dynamic-trace", trace)]))
    assert len(merged["edges"]) == 12
    passing = sum(e["confidence"] > 0.3 for e in doc["edges"])
    counts = callfuse.count_invocations(graph, 0.3)
    assert sum(c["hnii"] for c in counts) == sum(c["hnoi"] for c in counts) == passing


def test_run_stage_errors(tmp_path):
    with pytest.raises(callfuse.MissingInputError):
        callfuse.run_stage("all", str(tmp_path / "absent.json"))
    with pytest.raises(FileNotFoundError):
        callfuse.run_stage("all", str(tmp_path / "absent.json"))


def test_run_pipeline(fixtures, tmp_path):
    callfuse.run_stage("all", str(fixtures / "corpus" / "callfuse.json"), out=str(tmp_path), seed=3)
    records = (tmp_path / "dataset" / "0_00_records.csv").read_text().splitlines()
    assert len(records) == 11
    assert sum(line.split(",")[4] == "1" for line in records[1:]) == 3
    assert (tmp_path / "report" / "significance.csv").exists()
