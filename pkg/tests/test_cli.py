"""Exercises every subcommand through the click runner, plus one live server."""

from __future__ import annotations

import json
import os
import signal
import socket
import subprocess
import sys
import time

import httpx
import pytest
from click.testing import CliRunner

from ginsign.cli import main

from conftest import fixture_path

SIG = str(fixture_path("signatures", "warehouse.json"))
DATA = str(fixture_path("corpora", "warehouse_eval.jsonl"))
TRACE = str(fixture_path("traces", "alternating.json"))
KRIPKE = str(fixture_path("kripke", "request_grant.json"))
SPLIT = str(fixture_path("splits", "warehouse_intra_ood.json"))


@pytest.fixture()
def runner():
    return CliRunner()


def _invoke(runner, args, **kwargs):
    kwargs.setdefault("env", {"GINSIGN_URL": "", "GINSIGN_WORKERS": ""})
    result = runner.invoke(main, args, catch_exceptions=False, **kwargs)
    return result


def test_validate_subcommand(runner):
    result = _invoke(runner, ["validate", "--sig", SIG])
    assert result.exit_code == 0
    body = json.loads(result.output)
    assert body["name"] == "warehouse"
    assert body["predicates"] == 5


def test_prefix_subcommand(runner):
    result = _invoke(runner, ["prefix", "--sig", SIG])
    assert json.loads(result.output)["candidates"] == [
        "deliver", "pickup", "search", "get_help", "idle",
    ]
    result = _invoke(runner, ["prefix", "--sig", SIG, "--type", "location"])
    assert json.loads(result.output)["candidates"] == ["shelf", "loading_dock"]


def test_parse_subcommand(runner):
    result = _invoke(runner, ["parse", "F prop_1 -> G prop_2"])
    assert result.exit_code == 0
    assert json.loads(result.output)["canonical"] == "(F (prop_1)) -> (G (prop_2))"


def test_parse_reports_syntax_errors(runner):
    result = runner.invoke(main, ["parse", "F &"], env={"GINSIGN_URL": ""})
    assert result.exit_code != 0
    assert "LtlSyntaxError" in result.output


def test_eval_trace_mode(runner):
    result = _invoke(runner, ["eval", "--trace", TRACE, "G (F q)"])
    assert json.loads(result.output)["value"] is True
    result = _invoke(runner, ["eval", "--trace", TRACE, "--position", "3", "p"])
    assert json.loads(result.output)["position"] == 3


def test_eval_trace_mode_needs_formula(runner):
    result = runner.invoke(main, ["eval", "--trace", TRACE], env={"GINSIGN_URL": ""})
    assert result.exit_code != 0
    assert "formula" in result.output


def test_eval_dataset_mode_needs_inputs(runner):
    result = runner.invoke(main, ["eval"], env={"GINSIGN_URL": ""})
    assert result.exit_code != 0
    assert "--sig" in result.output


def test_eval_dataset_writes_report(runner, tmp_path):
    out = tmp_path / "report.json"
    result = _invoke(
        runner,
        ["eval", "--sig", SIG, "--data", DATA, "--scorer", "lexical", "--out", str(out)],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(out.read_text())
    assert report["config"]["scorer"] == "lexical"
    assert report["config"]["k"] == 8
    assert "workers" not in report["config"]
    metrics = report["domains"]["warehouse"]["metrics"]
    assert set(metrics) == {
        "predicate_f1", "argument_f1", "atom_f1", "le_rate", "gle_rate",
    }
    for cell in metrics.values():
        assert set(cell) == {"value", "variance", "ci95"}


def test_eval_dataset_runs_are_byte_identical(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out, workers in ((a, "1"), (b, "4")):
        result = _invoke(
            runner,
            ["eval", "--sig", SIG, "--data", DATA, "--workers", workers,
             "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
    assert a.read_bytes() == b.read_bytes()


def test_eval_dataset_split_and_table(runner):
    result = _invoke(
        runner,
        ["eval", "--sig", SIG, "--data", DATA, "--split", SPLIT,
         "--format", "table"],
    )
    assert result.exit_code == 0
    assert "warehouse" in result.output
    assert "GLE" in result.output
    assert "records=7/10" in result.output


def test_eval_rejects_bad_worker_env(runner):
    result = runner.invoke(
        main,
        ["eval", "--sig", SIG, "--data", DATA],
        env={"GINSIGN_URL": "", "GINSIGN_WORKERS": "0"},
    )
    assert result.exit_code != 0
    assert "GINSIGN_WORKERS" in result.output


def test_ground_from_stdin(runner):
    result = _invoke(
        runner,
        ["ground", "--sig", SIG],
        input="pickup the backpack\nsearch for the teddy bear\n",
    )
    assert result.exit_code == 0, result.output
    lines = [json.loads(l) for l in result.output.splitlines() if l.strip()]
    assert [d["atom"] for d in lines] == ["pickup(backpack)", "search(teddy-bear)"]
    assert [d["placeholder_id"] for d in lines] == ["prop_1", "prop_2"]


def test_ground_from_jsonl_file(runner, tmp_path):
    aps = tmp_path / "aps.jsonl"
    aps.write_text(
        json.dumps({
            "placeholder_id": "prop_9",
            "span_text": "deliver the laptop to the shelf",
        }) + "\n"
    )
    result = _invoke(runner, ["ground", "--sig", SIG, "--input", str(aps)])
    (decision,) = [json.loads(l) for l in result.output.splitlines() if l.strip()]
    assert decision["placeholder_id"] == "prop_9"
    assert decision["predicate"] == "deliver"
    assert decision["args"] == ["laptop", "shelf"]


def test_check_equiv_subcommand(runner):
    result = _invoke(runner, ["check-equiv", "F p", "! (G (! p))"])
    body = json.loads(result.output)
    assert body["equivalent"] is True
    result = _invoke(runner, ["check-equiv", "--k", "6", "F p", "G p"])
    body = json.loads(result.output)
    assert body["equivalent"] is False
    assert body["witness"] is not None


def test_check_gle_subcommand_inline_maps(runner):
    result = _invoke(
        runner,
        [
            "check-gle",
            "--pred-ltl", "F prop_1",
            "--pred-map", '{"prop_1": "pickup(backpack)"}',
            "--gold-ltl", "F prop_1",
            "--gold-map", '{"prop_1": "pickup(backpack)"}',
            "--sig", SIG,
        ],
    )
    assert json.loads(result.output)["gle"] is True


def test_check_gle_subcommand_map_files(runner, tmp_path):
    pred = tmp_path / "pred.json"
    gold = tmp_path / "gold.json"
    pred.write_text(json.dumps({"prop_1": "pickup(backpack)"}))
    gold.write_text(json.dumps({"prop_1": "pickup(suitcase)"}))
    result = _invoke(
        runner,
        [
            "check-gle",
            "--pred-ltl", "F prop_1",
            "--pred-map", str(pred),
            "--gold-ltl", "F prop_1",
            "--gold-map", str(gold),
        ],
    )
    body = json.loads(result.output)
    assert body["gle"] is False
    assert body["ap_diff"] == ["pickup(backpack)", "pickup(suitcase)"]


def test_model_check_subcommand(runner):
    result = _invoke(
        runner, ["model-check", "--model", KRIPKE, "G (request -> F grant)"]
    )
    body = json.loads(result.output)
    assert body["holds"] is False
    assert body["counterexample_states"][0] == "idle"
    result = _invoke(runner, ["model-check", "--model", KRIPKE, "G (grant -> ! request)"])
    assert json.loads(result.output)["holds"] is True
    result = runner.invoke(
        main, ["model-check", "--model", KRIPKE, "F idle"], env={"GINSIGN_URL": ""}
    )
    assert result.exit_code != 0
    assert "UngroundedAtomError" in result.output


def test_translate_subcommand(runner):
    result = _invoke(
        runner, ["translate", "--sig", SIG, "Eventually pickup the backpack."]
    )
    body = json.loads(result.output)
    assert body["lifted_ltl"] is not None
    assert "prop_1" in body["lifted_nl"]


def test_export_training_to_file_is_stable(runner, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for out in (a, b):
        result = _invoke(
            runner,
            ["export-training", "--sig", SIG, "--data", DATA, "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        assert "wrote" in result.output
    assert a.read_bytes() == b.read_bytes()
    shards = [json.loads(l) for l in a.read_text().splitlines()]
    assert all(list(s) == sorted(s) for s in shards)


def test_export_training_split_filters(runner, tmp_path):
    full = tmp_path / "full.jsonl"
    ood = tmp_path / "ood.jsonl"
    _invoke(runner, ["export-training", "--sig", SIG, "--data", DATA, "--out", str(full)])
    _invoke(
        runner,
        ["export-training", "--sig", SIG, "--data", DATA, "--split", SPLIT,
         "--out", str(ood)],
    )
    held = json.loads(open(SPLIT).read())
    banned = set(held["heldout_predicates"]) | set(held["heldout_constants"])
    ood_shards = [json.loads(l) for l in ood.read_text().splitlines()]
    assert 0 < len(ood_shards) < len(full.read_text().splitlines())
    for shard in ood_shards:
        assert shard["window"][shard["gold_index"]] not in banned


def _free_port() -> int:
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def test_serve_and_remote_cli():
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "ginsign.cli", "serve", "--port", str(port)],
        stdout=subprocess.DEVNULL,
        stderr=subprocess.DEVNULL,
        env={**os.environ, "PYTHONPATH": "src"},
    )
    base = f"http://127.0.0.1:{port}"
    try:
        for _ in range(100):
            try:
                if httpx.get(f"{base}/health", timeout=1.0).status_code == 200:
                    break
            except httpx.HTTPError:
                time.sleep(0.1)
        else:
            pytest.fail("service never came up")
        runner = CliRunner()
        result = runner.invoke(
            main, ["--url", base, "parse", "F p"], catch_exceptions=False
        )
        assert result.exit_code == 0
        assert json.loads(result.output)["canonical"] == "F (p)"
        wire = httpx.post(
            f"{base}/score",
            json={"task": "predicate", "span_text": "pickup it",
                  "candidates": ["deliver", "pickup"]},
            timeout=5.0,
        ).json()
        assert wire["chosen_index"] == 1
    finally:
        proc.send_signal(signal.SIGINT)
        try:
            proc.wait(timeout=10)
        except subprocess.TimeoutExpired:
            proc.kill()
