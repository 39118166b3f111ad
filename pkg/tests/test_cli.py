import hashlib
import json
import os
import shutil

import pytest

from helpers import calibrated_wsc, write_instances, write_predictions, write_scores
from wscoverlap.cli import COMMANDS, build_parser, run


def tree_digest(root):
    h = {}
    for dirpath, _, files in os.walk(root):
        for f in files:
            p = os.path.join(dirpath, f)
            h[os.path.relpath(p, root)] = hashlib.sha256(open(p, "rb").read()).hexdigest()
    return h


@pytest.fixture
def work(tmp_path, fixtures):
    shutil.copy(fixtures / "lifting_corpus.txt", tmp_path / "corpus.txt")
    shutil.copy(fixtures / "reference_instances.jsonl", tmp_path / "wsc.jsonl")
    return tmp_path


def test_index_happy_path(work):
    assert run(["index", "--corpus", str(work / "corpus.txt"), "--format", "lines", "--out", str(work / "idx")]) == 0
    manifest = json.loads((work / "idx" / "run_manifest.json").read_text())
    assert manifest["command"] == "index"
    assert manifest["inputs"]["corpus"][0]["path"] == "../corpus.txt"
    assert len(manifest["inputs"]["corpus"][0]["sha256"]) == 64


def test_score_one_line_per_instance(work):
    run(["index", "--corpus", str(work / "corpus.txt"), "--format", "lines", "--out", str(work / "idx")])
    assert run(["score", "--instances", str(work / "wsc.jsonl"), "--index", str(work / "idx"),
                "--out", str(work / "scores.jsonl")]) == 0
    rows = [json.loads(ln) for ln in (work / "scores.jsonl").read_text().splitlines()]
    assert [r["instance_id"] for r in rows] == ["wsc-1b", "wsc-2a", "wsc-3b"]
    first = rows[0]
    assert first["best_match"]["text"] == "The man couldn't lift his son because he was so heavy"
    assert first["max_score"] > 0
    assert (work / "scores.jsonl.manifest.json").exists()


def test_score_top_k_and_threads(work):
    run(["index", "--corpus", str(work / "corpus.txt"), "--format", "lines", "--out", str(work / "idx")])
    base = ["score", "--instances", str(work / "wsc.jsonl"), "--index", str(work / "idx")]
    assert run(base + ["--out", str(work / "a.jsonl")]) == 0
    assert run(base + ["--out", str(work / "b.jsonl"), "--threads", "4"]) == 0
    assert (work / "a.jsonl").read_bytes() == (work / "b.jsonl").read_bytes()
    assert run(base + ["--out", str(work / "c.jsonl"), "--top-k", "3"]) == 0
    row = json.loads((work / "c.jsonl").read_text().splitlines()[0])
    assert 1 <= len(row["matches"]) <= 3


def _analysis_inputs(d):
    gold, scores, preds = calibrated_wsc()
    write_instances(d / "wsc.jsonl", gold)
    write_scores(d / "scores.jsonl", scores)
    write_predictions(d / "bert.tsv", preds.entries)
    return gold, scores, preds


def test_analyze_missing_prediction(tmp_path, capsys):
    _, _, preds = _analysis_inputs(tmp_path)
    entries = dict(preds.entries)
    del entries["wsc007"]
    write_predictions(tmp_path / "bert.tsv", entries)
    code = run(["analyze", "--instances", str(tmp_path / "wsc.jsonl"), "--scores", str(tmp_path / "scores.jsonl"),
                "--predictions", str(tmp_path / "bert.tsv"), "--out", str(tmp_path / "rep")])
    assert code == 2
    assert "wsc007" in capsys.readouterr().err


def test_analyze_writes_report(tmp_path):
    _analysis_inputs(tmp_path)
    code = run(["analyze", "--instances", str(tmp_path / "wsc.jsonl"), "--scores", str(tmp_path / "scores.jsonl"),
                "--predictions", f"bert={tmp_path / 'bert.tsv'}", "--cutoffs", "0,10,25",
                "--out", str(tmp_path / "rep")])
    assert code == 0
    names = {p.name for p in (tmp_path / "rep").iterdir()}
    assert names == {"tables.csv", "tables.txt", "curve.csv", "curve.svg", "run_manifest.json"}
    rows = (tmp_path / "rep" / "tables.csv").read_text().splitlines()
    assert rows[1].startswith("bert,0,53,220,")


def test_unknown_command(capsys):
    assert run(["bogus"]) == 1
    assert "usage" in capsys.readouterr().err.lower()
    assert run([]) == 1


def test_missing_input_exits_2(tmp_path):
    assert run(["index", "--corpus", str(tmp_path / "absent.txt"), "--out", str(tmp_path / "idx")]) == 2


def test_unwritable_directory_exits_2(tmp_path):
    _analysis_inputs(tmp_path)
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code = run(["analyze", "--instances", str(tmp_path / "wsc.jsonl"), "--scores", str(tmp_path / "scores.jsonl"),
                "--predictions", str(tmp_path / "bert.tsv"), "--out", str(blocker / "rep")])
    assert code == 2


def test_config_file_flags_win(tmp_path):
    _analysis_inputs(tmp_path)
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"# defaults\ncutoffs = 0,5\nscores = {tmp_path / 'scores.jsonl'}\nyates = true\n")
    code = run(["analyze", "--config", str(cfg), "--instances", str(tmp_path / "wsc.jsonl"),
                "--predictions", str(tmp_path / "bert.tsv"), "--cutoffs", "25", "--out", str(tmp_path / "rep")])
    assert code == 0
    manifest = json.loads((tmp_path / "rep" / "run_manifest.json").read_text())
    assert manifest["options"]["cutoffs"] == [25.0]
    assert manifest["options"]["yates"] is True


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("nonsense = 1\n")
    assert run(["curve", "--config", str(cfg), "--out", str(tmp_path / "c")]) == 1


def test_help_documents_every_flag(capsys):
    parser = build_parser()
    sub = next(a for a in parser._actions if a.dest == "command")
    assert set(sub.choices) == set(COMMANDS)
    for name, p in sub.choices.items():
        text = p.format_help()
        for a in p._actions:
            for opt in a.option_strings:
                assert opt in text
            if a.option_strings and a.dest != "help":
                assert a.help, f"{name} {a.dest} has no help"


def test_inputs_not_mutated(work):
    before = tree_digest(work)
    run(["index", "--corpus", str(work / "corpus.txt"), "--format", "lines", "--out", str(work / "out" / "idx")])
    run(["score", "--instances", str(work / "wsc.jsonl"), "--index", str(work / "out" / "idx"),
         "--out", str(work / "out" / "s.jsonl")])
    after = {k: v for k, v in tree_digest(work).items() if not k.startswith("out")}
    assert after == before


def test_partition_and_curve(tmp_path):
    _, scores, _ = _analysis_inputs(tmp_path)
    assert run(["partition", "--scores", str(tmp_path / "scores.jsonl"), "--cutoffs", "0,25",
                "--out", str(tmp_path / "part.json")]) == 0
    parts = json.loads((tmp_path / "part.json").read_text())
    assert [len(p["overlap"]) for p in parts][0] == 53
    assert all(len(p["overlap"]) + len(p["nonoverlap"]) == 273 for p in parts)
    assert run(["curve", "--scores", f"wsc={tmp_path / 'scores.jsonl'}", "--grid", "0:10:5",
                "--out", str(tmp_path / "curve")]) == 0
    lines = (tmp_path / "curve" / "curve.csv").read_text().splitlines()
    assert lines[0] == "cutoff,proportion" and lines[1] == f"0,{53 / 273:.6f}"


def test_parse_command(work):
    assert run(["parse", "--instances", str(work / "wsc.jsonl"), "--out", str(work / "q.jsonl")]) == 0
    rows = [json.loads(ln) for ln in (work / "q.jsonl").read_text().splitlines()]
    assert len(rows) == 3


def test_pipeline_command(tmp_path, fixtures):
    shutil.copy(fixtures / "comments_200.jsonl", tmp_path / "dump.jsonl")
    assert run(["pipeline", "--input", str(tmp_path / "dump.jsonl"), "--out", str(tmp_path / "p"),
                "--seed", "3"]) == 0
    funnel = json.loads((tmp_path / "p" / "funnel.json").read_text())
    assert funnel["perturbed"] == 114
    assert (tmp_path / "p" / "run_manifest.json").exists()
