"""Stage orchestration: artifact layout, determinism, restartability,
missing-upstream reporting, and config round-trips."""

import json
from pathlib import Path

import numpy as np
import pytest

from conftest import mini_config
from probseg.pipeline import (MissingStageError, cmd_ensemble, cmd_evaluate,
                              cmd_phantom, cmd_predict, cmd_preprocess,
                              cmd_reconstruct, cmd_report, cmd_split,
                              cmd_train, config_hash, desk_profile,
                              load_config, paper_profile, read_sweep_csv,
                              save_config)
from probseg.reconstruct import ProbVolume, ensemble
from probseg.volume import Plane, read_bundle, slice_volume, n_slices


def _tree_bytes(root: Path) -> dict:
    return {str(p.relative_to(root)): p.read_bytes()
            for p in sorted(root.rglob("*")) if p.is_file()}


def _read_prob_volume(path, plane):
    vol = read_bundle(path)
    maps = np.stack([slice_volume(vol, plane, k)
                     for k in range(1, n_slices(vol, plane) + 1)])
    return ProbVolume(plane, maps, vol.spacing_mm)


def test_phantom_stage_deterministic(tmp_path):
    cfg_a = mini_config(tmp_path / "a", seed=7, n_patients=4, n_test=1)
    cfg_b = mini_config(tmp_path / "b", seed=7, n_patients=4, n_test=1)
    ids_a = cmd_phantom(cfg_a)
    ids_b = cmd_phantom(cfg_b)
    assert ids_a == ids_b == [f"p{i:02d}" for i in range(1, 5)]
    assert _tree_bytes(tmp_path / "a") == _tree_bytes(tmp_path / "b")


def test_phantom_different_seed_differs(tmp_path):
    cmd_phantom(mini_config(tmp_path / "a", seed=1, n_patients=2, n_test=1))
    cmd_phantom(mini_config(tmp_path / "b", seed=2, n_patients=2, n_test=1))
    a = (tmp_path / "a/raw/p01_pet.raw").read_bytes()
    b = (tmp_path / "b/raw/p01_pet.raw").read_bytes()
    assert a != b


def test_phantom_empty_cohort(tmp_path):
    cfg = mini_config(tmp_path, n_patients=0, n_test=0)
    assert cmd_phantom(cfg) == []
    manifest = json.loads((tmp_path / "raw/manifest.json").read_text())
    assert manifest["patients"] == []


def test_manifest_lists_all_ids(mini_run):
    manifest = json.loads((Path(mini_run.data_root) / "raw/manifest.json").read_text())
    assert manifest["patients"] == [f"p{i:02d}" for i in range(1, 7)]
    assert manifest["n_patients"] == 6


def test_preprocess_crops_and_reports_qc(mini_run):
    root = Path(mini_run.data_root)
    qc = json.loads((root / "preproc/qc.json").read_text())
    assert [line["id"] for line in qc] == [f"p{i:02d}" for i in range(1, 7)]
    assert all(line["included"] for line in qc)
    assert all(line["status"] in ("Accepted", "ThresholdAdjusted") for line in qc)
    ct = read_bundle(root / "preproc/p01_ct")
    assert ct.dims == (32, 32, 32)


def test_split_partitions_patients(mini_run):
    root = Path(mini_run.data_root)
    split = json.loads((root / "splits/axial.json").read_text())
    test = set(split["test"])
    folds = [set(f) for f in split["folds"]]
    assert len(test) == 2
    train = set().union(*folds)
    assert len(train) == 4 and not train & test
    assert not folds[0] & folds[1]


def test_training_artifacts_exist(mini_run):
    fold_dir = Path(mini_run.data_root) / "models/axial/fold0"
    for name in ("last", "best_val", "second_best"):
        assert (fold_dir / f"{name}.ckpt").exists()
    history = (fold_dir / "history.csv").read_text().splitlines()
    assert history[0] == "epoch,train_loss,val_loss,val_dsc_mean,val_dsc_std"
    assert len(history) == 3


def test_train_stage_is_restartable(mini_run):
    fold_dir = Path(mini_run.data_root) / "models/axial/fold0"
    before = (fold_dir / "history.csv").stat().st_mtime_ns
    messages = []
    cmd_train(mini_run, echo=messages.append)
    after = (fold_dir / "history.csv").stat().st_mtime_ns
    assert before == after
    assert any("already complete" in m for m in messages)


def test_predictions_cover_all_sequences(mini_run):
    root = Path(mini_run.data_root)
    split = json.loads((root / "splits/axial.json").read_text())
    pid = split["test"][0]
    sidecar = json.loads((root / f"predictions/axial/fold0/{pid}.json").read_text())
    maps = np.load(root / f"predictions/axial/fold0/{pid}.npy")
    assert sidecar["n_slices"] == 32
    assert sidecar["start_ks"] == list(range(1, 31))
    assert maps.shape == (30, 3, 32, 32)
    assert sidecar["checkpoint"] == "last"


def test_ensemble_matches_library_call(mini_run):
    root = Path(mini_run.data_root)
    split = json.loads((root / "splits/axial.json").read_text())
    for pid in split["test"]:
        members = [_read_prob_volume(root / f"probmaps/axial/fold{f}/{pid}",
                                     Plane.AXIAL)
                   for f in range(mini_run.fold_count)]
        manual = ensemble(members).to_volume().data.astype("<f4").tobytes(order="F")
        on_disk = (root / f"probmaps/axial/ensemble/{pid}.raw").read_bytes()
        assert manual == on_disk


def test_evaluate_rerun_is_byte_identical(mini_run):
    sweep_path = Path(mini_run.data_root) / "eval/sweep.csv"
    before = sweep_path.read_bytes()
    cmd_evaluate(mini_run)
    assert sweep_path.read_bytes() == before


def test_report_rerun_is_byte_identical(mini_run):
    root = Path(mini_run.data_root)
    names = ("cohort.csv", "boxplot.json", "scatter.json", "report.txt")
    before = {n: (root / "eval" / n).read_bytes() for n in names}
    cmd_report(mini_run)
    assert {n: (root / "eval" / n).read_bytes() for n in names} == before


def test_sweep_csv_roundtrip(mini_run):
    path = Path(mini_run.data_root) / "eval/sweep.csv"
    rows = read_sweep_csv(path)
    assert len(rows) == 2 * 9  # 2 test patients x 9 thresholds, one plane
    first = rows[0]
    assert first["plane"] == "axial"
    assert isinstance(first["pos_pixels"], int)
    assert isinstance(first["precision_defaulted"], bool)
    assert 0.0 <= first["mean_dsc"] <= 1.0


def test_report_files_have_expected_shape(mini_run):
    root = Path(mini_run.data_root)
    cohort = (root / "eval/cohort.csv").read_text().splitlines()
    assert cohort[0] == "plane,threshold,group,n,mean,std,min,max,formatted"
    boxes = json.loads((root / "eval/boxplot.json").read_text())
    assert len(boxes) == 9
    assert {"plane", "threshold", "mean", "median", "q1", "q3",
            "whisker_lo", "whisker_hi", "outliers", "n"} <= set(boxes[0])
    scatter = json.loads((root / "eval/scatter.json").read_text())
    assert {"patient", "plane", "threshold", "precision", "recall",
            "tumor_mm3"} <= set(scatter[0])
    text = (root / "eval/report.txt").read_text()
    assert "threshold 0.9" in text


def test_missing_upstream_names_stage(tmp_path):
    cfg = mini_config(tmp_path / "empty")
    with pytest.raises(MissingStageError, match="probseg phantom"):
        cmd_preprocess(cfg)
    with pytest.raises(MissingStageError, match="probseg preprocess"):
        cmd_split(cfg)
    with pytest.raises(MissingStageError, match="probseg split"):
        cmd_train(cfg)
    with pytest.raises(MissingStageError, match="probseg split"):
        cmd_predict(cfg)
    with pytest.raises(MissingStageError, match="probseg split"):
        cmd_reconstruct(cfg)
    with pytest.raises(MissingStageError, match="probseg split"):
        cmd_ensemble(cfg)
    with pytest.raises(MissingStageError, match="probseg split"):
        cmd_evaluate(cfg)
    with pytest.raises(MissingStageError, match="probseg evaluate"):
        cmd_report(cfg)


def test_predict_requires_checkpoints(tmp_path):
    cfg = mini_config(tmp_path, n_patients=5, n_test=1)
    cmd_phantom(cfg)
    cmd_preprocess(cfg)
    cmd_split(cfg)
    with pytest.raises(MissingStageError, match="probseg train"):
        cmd_predict(cfg)


def test_config_roundtrip(tmp_path):
    cfg = mini_config(tmp_path / "data", seed=11)
    (tmp_path / "data").mkdir()
    path = tmp_path / "cfg.json"
    save_config(cfg, path)
    loaded = load_config(path)
    assert loaded == cfg
    assert config_hash(loaded) == config_hash(cfg)


def test_config_validation(tmp_path):
    from dataclasses import replace

    from probseg.model import ModelConfig
    cfg = desk_profile(tmp_path)
    with pytest.raises(ValueError, match="inconsistency"):
        replace(cfg, model=ModelConfig(image_size=64, base_width=8))
    with pytest.raises(ValueError, match="n_test"):
        mini_config(tmp_path, n_test=7)
    with pytest.raises(ValueError, match="fold_count"):
        mini_config(tmp_path, fold_count=1)
    with pytest.raises(FileNotFoundError):
        load_config(tmp_path / "absent.json")


def test_paper_profile_shape(tmp_path):
    cfg = paper_profile(tmp_path)
    assert cfg.model.image_size == 144
    assert cfg.qc.bbox_size == 144
    assert cfg.train.epochs == 150
    assert cfg.model.base_width == 64
    assert cfg.fold_count == 3


def test_split_excludes_failed_patients(tmp_path):
    # mark one patient as failed in qc.json and confirm split drops it
    cfg = mini_config(tmp_path, n_patients=6, n_test=1)
    cmd_phantom(cfg)
    cmd_preprocess(cfg)
    qc_path = tmp_path / "preproc/qc.json"
    lines = json.loads(qc_path.read_text())
    lines[0]["included"] = False
    qc_path.write_text(json.dumps(lines))
    out = cmd_split(cfg)
    used = set(out["test"]) | set(out["train"])
    assert lines[0]["id"] not in used
    assert len(used) == 5
