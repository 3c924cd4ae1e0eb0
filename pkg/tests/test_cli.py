"""Command-line behavior: dispatch, flag handling, and exit codes."""

import json
from pathlib import Path

from conftest import mini_config
from probseg.cli import _build_parser, _resolve_config, main
from probseg.pipeline import save_config
from probseg.volume import Plane


def _write_config(tmp_path, **overrides) -> Path:
    cfg = mini_config(tmp_path / "data", **overrides)
    (tmp_path / "data").mkdir(exist_ok=True)
    path = tmp_path / "mini.json"
    save_config(cfg, path)
    return path


def test_full_pipeline_via_cli(tmp_path, capsys):
    cfg_path = str(_write_config(tmp_path))
    for command in ("phantom", "preprocess", "split", "train", "predict",
                    "reconstruct", "ensemble", "evaluate", "report"):
        assert main([command, "--config", cfg_path, "--quiet"]) == 0, command
    out = capsys.readouterr().out
    assert "reports written" in out
    sweep = tmp_path / "data/eval/sweep.csv"
    before = sweep.read_bytes()
    assert main(["evaluate", "--config", cfg_path, "--quiet"]) == 0
    assert sweep.read_bytes() == before


def test_missing_stage_exit_code(tmp_path, capsys):
    cfg_path = str(_write_config(tmp_path))
    assert main(["train", "--config", cfg_path, "--quiet"]) == 2
    assert "probseg split" in capsys.readouterr().err


def test_plane_flag_restricts_stages(tmp_path):
    cfg_path = str(_write_config(tmp_path, planes=(Plane.AXIAL, Plane.CORONAL)))
    assert main(["phantom", "--config", cfg_path, "--quiet"]) == 0
    assert main(["preprocess", "--config", cfg_path, "--quiet"]) == 0
    assert main(["split", "--config", cfg_path, "--quiet",
                 "--plane", "coronal"]) == 0
    splits = sorted(p.name for p in (tmp_path / "data/splits").glob("*.json"))
    assert splits == ["coronal.json"]


def test_seed_flag_overrides_config(tmp_path):
    cfg_path = str(_write_config(tmp_path, seed=1))
    args = _build_parser().parse_args(
        ["phantom", "--config", cfg_path, "--seed", "5"])
    cfg = _resolve_config(args)
    assert cfg.seed == 5
    assert cfg.model.seed == 5
    assert cfg.selection.rng_seed == 5


def test_profile_flag_without_config(tmp_path):
    args = _build_parser().parse_args(
        ["phantom", "--data-root", str(tmp_path / "d"), "--profile", "paper"])
    cfg = _resolve_config(args)
    assert cfg.profile == "paper"
    assert cfg.model.image_size == 144


def test_init_config_writes_loadable_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert main(["init-config", "--data-root", str(tmp_path / "data"),
                 "--seed", "9"]) == 0
    payload = json.loads((tmp_path / "probseg.json").read_text())
    assert payload["seed"] == 9
    assert payload["profile"] == "desk"


def test_bad_config_exit_code(tmp_path, capsys):
    assert main(["phantom", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err
