import json
import subprocess


def run(cli, *args):
    return subprocess.run([cli, *args], capture_output=True, text=True)


def test_missing_config_exits_2(cli, tmp_path):
    missing = tmp_path / "nope.json"
    r = run(cli, "fuse", "--config", str(missing))
    assert r.returncode == 2
    assert str(missing) in r.stderr


def test_missing_prerequisite_exits_2(cli, fixtures, tmp_path):
    r = run(cli, "metrics", "--config", str(fixtures / "corpus" / "callfuse.json"), "--out", str(tmp_path))
    assert r.returncode == 2
    assert "fuse" in r.stderr and "v1.json" in r.stderr


def test_stage_failure_exits_1(cli, fixtures, tmp_path):
    config = json.loads((fixtures / "corpus" / "callfuse.json").read_text())
    bad_patch = tmp_path / "bad.diff"
    bad_patch.write_text("--- a/lib/x.js\n+++ b/lib/x.js\n@@ -x +y @@\n")
    base = fixtures / "corpus"
    for v in config["versions"].values():
        v["source_dir"] = str(base / v["source_dir"])
        v["metrics"] = str(base / v["metrics"])
        for t in v["tools"]:
            t["path"] = str(base / t["path"])
    config["confidence"]["labeled_sample"] = str(base / config["confidence"]["labeled_sample"])
    for b in config["bugs"]:
        b["patch"] = str(bad_patch if b["id"] == "Bug-2" else base / b["patch"])
    path = tmp_path / "callfuse.json"
    path.write_text(json.dumps(config))
    r = run(cli, "all", "--config", str(path), "--out", str(tmp_path / "out"))
    assert r.returncode == 1
    assert "stage ingest failed" in r.stderr


def test_bad_threshold_exits_1(cli, fixtures, tmp_path):
    r = run(cli, "extract-static", "--config", str(fixtures / "corpus" / "callfuse.json"), "--out", str(tmp_path),
            "--threshold", "0.5", "--threshold", "0.2")
    assert r.returncode == 1
    assert "extract-static" in r.stderr


def test_extract_static_directory(cli, fixtures, tmp_path):
    out = tmp_path / "g" / "graph.json"
    r = run(cli, "extract-static", str(fixtures / "corpus" / "v1" / "src"), "--out", str(out))
    assert r.returncode == 0, r.stderr
    doc = json.loads(out.read_text())
    assert len(doc["nodes"]) == 11 and len(doc["edges"]) == 10
    r = run(cli, "extract-static", str(tmp_path / "absent"), "--out", str(out))
    assert r.returncode == 2
    assert "absent" in r.stderr


def test_all_writes_every_stage(cli, fixtures, tmp_path):
    r = run(cli, "all", "--config", str(fixtures / "corpus" / "callfuse.json"), "--out", str(tmp_path))
    assert r.returncode == 0, r.stderr
    for name in ["static/v1.json", "ingest/patches/Bug-3.json", "fuse/confidence.json", "fuse/v2.cells.csv",
                 "metrics/summary.csv", "metrics/v2/0_30.json", "dataset/0_00_s+h.csv", "train/results.json",
                 "report/report.md", "report/best_by_algorithm.csv"]:
        assert (tmp_path / name).is_file(), name
