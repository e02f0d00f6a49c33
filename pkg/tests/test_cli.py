import json
from pathlib import Path

import pytest

from mtriage import pipeline as pl
from mtriage.cli import EXIT_INPUT, EXIT_OK, EXIT_STAGE, main
from mtriage.demo import generate_demo


@pytest.fixture(scope="module")
def demo_inputs(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-demo")
    paths = generate_demo(root / "data", n_train=300, n_log=300, dim=12, seed=3)
    config_obj = json.loads(paths.config_file.read_text("utf-8"))
    config_obj["kde"]["grid_density"] = 64
    small = root / "config.json"
    small.write_text(json.dumps(config_obj, indent=2, sort_keys=True) + "\n", "utf-8")
    return root, small


def tree_bytes(root: Path) -> dict[str, bytes]:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


def test_demo_command(tmp_path):
    assert main(["demo", "--out", str(tmp_path / "d"), "--train", "50",
                 "--log", "50", "--dim", "8"]) == EXIT_OK
    for name in ("train.jsonl", "log.jsonl", "embeddings.aemb", "coords.jsonl", "config.json"):
        assert (tmp_path / "d" / name).exists()


def test_run_pipeline_and_exit_code(demo_inputs, tmp_path, capsys):
    _, config = demo_inputs
    store = tmp_path / "store"
    assert main(["run", "--config", str(config), "--store", str(store)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "mismatch-" in out and "topic-" in out
    assert (store / "manifest.json").exists()
    assert not store.with_name("store.partial").exists()


def test_run_json_summary(demo_inputs, tmp_path, capsys):
    _, config = demo_inputs
    store = tmp_path / "store"
    assert main(["run", "--config", str(config), "--store", str(store),
                 "--json"]) == EXIT_OK
    payload = json.loads(capsys.readouterr().out)
    assert {row["kind"] for row in payload["sets"]} == {"unit-test", "topic"}


def test_seeded_runs_are_identical(demo_inputs, tmp_path):
    _, config = demo_inputs
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", str(config), "--store", str(a)]) == EXIT_OK
    assert main(["run", "--config", str(config), "--store", str(b)]) == EXIT_OK
    ta, tb = tree_bytes(a), tree_bytes(b)
    assert ta.keys() == tb.keys()
    assert ta == tb


def test_stage_subcommands_compose_to_identical_store(demo_inputs, tmp_path):
    _, config = demo_inputs
    full, staged = tmp_path / "full", tmp_path / "staged"
    assert main(["run", "--config", str(config), "--store", str(full)]) == EXIT_OK
    for stage in pl.STAGES:
        assert main([stage, "--config", str(config), "--store", str(staged)]) == EXIT_OK
    assert tree_bytes(full) == tree_bytes(staged)


def test_missing_input_is_exit_2(tmp_path):
    assert main(["run", "--config", str(tmp_path / "nope.json"),
                 "--store", str(tmp_path / "s")]) == EXIT_INPUT


def test_failed_run_removes_partial_store(demo_inputs, tmp_path):
    root, config = demo_inputs
    broken = json.loads(config.read_text("utf-8"))
    broken["embedding_file"] = str(root / "missing.aemb")
    cfg_path = tmp_path / "broken.json"
    cfg_path.write_text(json.dumps(broken), "utf-8")
    store = tmp_path / "s"
    assert main(["run", "--config", str(cfg_path), "--store", str(store)]) == EXIT_STAGE
    assert not store.exists()
    assert not store.with_name("s.partial").exists()


def test_stage_out_of_order_is_exit_3(demo_inputs, tmp_path, capsys):
    _, config = demo_inputs
    code = main(["project", "--config", str(config), "--store", str(tmp_path / "empty")])
    assert code == EXIT_STAGE
    assert "project" in capsys.readouterr().err


def test_existing_store_rejected(demo_inputs, tmp_path):
    _, config = demo_inputs
    store = tmp_path / "s"
    store.mkdir()
    (store / "leftover").write_text("x")
    assert main(["run", "--config", str(config), "--store", str(store)]) == EXIT_INPUT


def test_lock_contention(demo_inputs, tmp_path):
    _, config = demo_inputs
    store = tmp_path / "locked"
    store.mkdir()
    (store / ".lock").write_text("12345")
    assert main(["ingest", "--config", str(config), "--store", str(store)]) == EXIT_INPUT


def test_export_subcommand(demo_inputs, tmp_path):
    _, config = demo_inputs
    store = tmp_path / "store"
    assert main(["run", "--config", str(config), "--store", str(store)]) == EXIT_OK
    manifest = json.loads((store / "manifest.json").read_text("utf-8"))
    sid = manifest["sets"][0]["set_id"]
    out = tmp_path / "export.jsonl"
    assert main(["export", "--store", str(store), "--set-id", sid,
                 "--out", str(out), "--chrf-max", "0.9"]) == EXIT_OK
    rows = [json.loads(ln) for ln in out.read_text("utf-8").splitlines()]
    assert rows
    assert all(r["chrf"] <= 0.9 for r in rows if r["origin"] == "train")


def test_unknown_set_export_fails(demo_inputs, tmp_path):
    _, config = demo_inputs
    store = tmp_path / "store"
    main(["run", "--config", str(config), "--store", str(store)])
    assert main(["export", "--store", str(store), "--set-id", "nope",
                 "--out", str(tmp_path / "x.jsonl")]) == EXIT_INPUT
