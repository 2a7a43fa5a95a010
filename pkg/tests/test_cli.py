import hashlib
import json
import subprocess
import sys
from pathlib import Path

import pytest

from bisys.cli import main

DATA = Path(__file__).resolve().parent.parent / "data"
GM = str(DATA / "golden_mean.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def file_hash(*paths):
    h = hashlib.sha256()
    for p in paths:
        h.update(hashlib.sha256(Path(p).read_bytes()).digest())
    return h.hexdigest()


def test_ingest(capsys):
    doc = run_json(capsys, "ingest", GM)
    assert doc["schema"] == "subshift/1" and doc["essential"]
    assert doc["input_hash"] == file_hash(GM)


def test_build_and_validate(capsys, tmp_path):
    out = tmp_path / "gm.json"
    code, _, err = run(capsys, "build-canonical", GM, "-L", "4", "-o", str(out))
    assert code == 0, err
    doc = json.loads(out.read_text())
    assert doc["schema"] == "bisystem/1"
    assert doc["m"] == [1, 2, 4, 4, 4]
    assert doc["stabilization"]["onset"] == 2
    rep = run_json(capsys, "validate", str(out))
    assert rep["ok"] and rep["verified_to_level"] == 4


def test_validate_rejects_broken_bisystem(capsys, tmp_path):
    out = tmp_path / "gm.json"
    run(capsys, "build-canonical", GM, "-L", "3", "-o", str(out))
    doc = json.loads(out.read_text())
    doc["levels"][3].append("orphan")
    doc.pop("phi", None)
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    code, out_text, _ = run(capsys, "validate", str(bad))
    assert code == 2
    assert not json.loads(out_text)["axioms"]["essential"]["ok"]


@pytest.mark.parametrize("fmt,needle", [("dot", "digraph"), ("table", "v1_0"), ("json", "bisystem/1")])
def test_render(capsys, fmt, needle):
    code, out, err = run(capsys, "render", GM, "-L", "3", "--format", fmt)
    assert code == 0, err
    assert needle in out


@pytest.mark.parametrize("which,name,status", [
    ("condition-i", "full2", "Certified"),
    ("irreducibility", "full2", "Certified"),
    ("condition-i", "one_point", "Refuted"),
    ("irreducibility", "two_component", "Refuted"),
    ("essential-freeness", "one_point", "Refuted"),
    ("pi-condition-i", "golden_mean", "Certified"),
])
def test_analyze(capsys, which, name, status):
    doc = run_json(capsys, "analyze", which, str(DATA / f"{name}.json"))
    text = json.dumps(doc)
    assert f'"status": "{status}"' in text
    assert doc["input_hash"] == file_hash(DATA / f"{name}.json")


def test_patch_commands(capsys, tmp_path):
    tri = run_json(capsys, "patch", "fill-triangle", GM, "--vertex", "2:1", "--word", "00")
    assert tri["schema"] == "patch/1" and len(tri["patch"]["cells"]) == 6
    gm = run_json(capsys, "groupoid-dump", GM, "--samples", "1")
    point = next(iter(gm["points"].values()))
    zfile = tmp_path / "zig.json"
    zfile.write_text(json.dumps(point))
    rect = run_json(capsys, "patch", "from-zigzag", GM, "--patch", str(zfile),
                    "--corner", "-1", "1", "--extents", "2", "2")
    assert rect["patch"]["zigzag_roundtrip"]
    pfile = tmp_path / "rect.json"
    pfile.write_text(json.dumps(rect))
    ext = run_json(capsys, "patch", "extend", GM, "--patch", str(pfile), "--word", point["head"])
    assert ext["patch"]["orders_agree"] and ext["patch"]["restriction_matches"]


def test_invariants_and_compare(capsys):
    inv = run_json(capsys, "invariants", GM, "--stages", "3")
    assert inv["schema"] == "afinv/1" and inv["system"]["unit_growth"] == [3, 13, 34, 89]
    cmp_ = run_json(capsys, "compare", str(DATA / "full2.json"), str(DATA / "full3.json"))
    assert cmp_["comparison"]["outcome"] == "Obstructed"
    rec = run_json(capsys, "compare", GM, "--self-recode", "2")
    assert rec["comparison"]["outcome"] == "IntertwinedUpTo" and rec["comparison"]["ladder_verified"]


@pytest.mark.parametrize("argv", [
    ["ingest", "/nonexistent.json"],
    ["analyze", "condition-i", GM, "--depth", "0"],
    ["compare", GM],
    ["patch", "fill-triangle", GM, "--vertex", "2:1", "--word", "11"],
    ["patch", "fill-triangle", GM, "--vertex", "2:1", "--word", "1"],
    ["patch", "fill-triangle", GM, "--vertex", "2:1", "--word", "1x"],
])
def test_input_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error")


def test_malformed_json_reports_position(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "subshift/1",\n "alphabet": [}')
    code, _, err = run(capsys, "ingest", str(bad))
    assert code == 2 and "line 2" in err


def test_console_script_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}.json"
        subprocess.run([sys.executable, "-m", "bisys.cli", "groupoid-dump", GM, "--seed", "7", "-o", str(path)],
                       check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
