"""End-to-end orchestration from phantom cohort to evaluation reports.

Stage order: phantom -> preprocess -> split -> train -> predict ->
reconstruct -> ensemble -> evaluate -> report. Each stage is a
deterministic function of (upstream artifacts, config, seed), validates
that its inputs exist, and can be rerun without changing its outputs.

Artifact layout under ``data_root``::

    raw/        patient bundles + metadata + manifest.json
    preproc/    cropped, normalized bundles + qc.json
    splits/     per-plane fold manifests
    models/     <plane>/fold<i>/{last,best_val,second_best}.ckpt, history.csv
    predictions/<plane>/fold<i>/<pid>.npy (+ .json sidecar)
    probmaps/   <plane>/{fold<i>,ensemble}/<pid> probability bundles
    eval/       sweep.csv, cohort.csv, boxplot.json, scatter.json, report.txt
    provenance/ one JSON per stage (config hash, seed, timestamp)
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .metrics import (SweepConfig, boxplot_data, cohort_report, scatter_data,
                      sweep, write_boxplot_json, write_cohort_csv,
                      write_scatter_json, write_sweep_csv)
from .model import (ModelConfig, build_model, forward, load_checkpoint,
                    save_checkpoint, set_params)
from .phantom import generate_phantom, random_phantom_spec
from .reconstruct import ProbVolume, ensemble, reconstruct
from .roi import QcPolicy, RoiStatus, auto_roi, preprocess, qc_report_line
from .sequences import (SelectionPolicy, extract_sequences, make_folds,
                        read_fold_manifest, select_test, select_training,
                        write_fold_manifest)
from .training import TrainConfig, train, write_history_csv
from .volume import (PatientMeta, PatientRecord, Plane, Volume3D, n_slices,
                     read_bundle, slice_volume, write_bundle)

__all__ = [
    "PipelineConfig",
    "MissingStageError",
    "desk_profile",
    "paper_profile",
    "load_config",
    "save_config",
    "config_hash",
    "cmd_phantom",
    "cmd_preprocess",
    "cmd_split",
    "cmd_train",
    "cmd_predict",
    "cmd_reconstruct",
    "cmd_ensemble",
    "cmd_evaluate",
    "cmd_report",
    "run_all",
]

ALL_PLANES = (Plane.AXIAL, Plane.CORONAL, Plane.SAGITTAL)
CHECKPOINT_NAMES = ("last", "best_val", "second_best")


class MissingStageError(RuntimeError):
    """An upstream artifact is absent; names the stage that produces it."""

    def __init__(self, missing, stage: str):
        super().__init__(f"missing artifact {missing}; run `probseg {stage}` first")
        self.stage = stage


@dataclass(frozen=True)
class PipelineConfig:
    data_root: str
    qc: QcPolicy = field(default_factory=QcPolicy)
    selection: SelectionPolicy = field(default_factory=SelectionPolicy)
    model: ModelConfig = field(default_factory=lambda: ModelConfig(image_size=144))
    train: TrainConfig = field(default_factory=TrainConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)
    planes: tuple[Plane, ...] = ALL_PLANES
    profile: str = "desk"
    n_patients: int = 20
    n_test: int = 6
    fold_count: int = 3
    seed: int = 0

    def __post_init__(self):
        if not self.data_root:
            raise ValueError("data_root must be set")
        if not self.planes or len(set(self.planes)) != len(self.planes):
            raise ValueError("planes must be a non-empty set of distinct planes")
        if self.model.image_size != self.qc.bbox_size:
            raise ValueError(
                f"profile inconsistency: model image_size {self.model.image_size} "
                f"!= ROI bbox_size {self.qc.bbox_size}")
        if self.n_patients < 0 or not 0 <= self.n_test <= self.n_patients:
            raise ValueError("need 0 <= n_test <= n_patients")
        if self.fold_count < 2:
            raise ValueError("fold_count must be at least 2")
        object.__setattr__(self, "planes", tuple(self.planes))


def desk_profile(data_root, seed: int = 0, **overrides) -> PipelineConfig:
    """Small-scale profile: 48^3 phantoms at 4 mm, 32^2 crops, 30 epochs.

    Keep fractions are pinned rather than auto-tuned because desk-scale
    patients have ~30 sequences per plane; auto-tuning would keep too few
    negatives for stable training.
    """
    cfg = PipelineConfig(
        data_root=str(data_root),
        qc=QcPolicy(bbox_size=32),
        selection=SelectionPolicy(keep_fraction_negative=0.25,
                                  keep_fraction_low_tumor=0.25, rng_seed=seed),
        model=ModelConfig(image_size=32, base_width=8, depth=3, seed=seed),
        train=TrainConfig(epochs=30, warmup_epochs=8),
        sweep=SweepConfig(),
        profile="desk",
        n_patients=20,
        n_test=6,
        fold_count=3,
        seed=seed,
    )
    return replace(cfg, **overrides) if overrides else cfg


def paper_profile(data_root, seed: int = 0, **overrides) -> PipelineConfig:
    """Published-scale profile: 144^2 crops, 150 epochs, width-64 encoder.

    Phantom generation still produces desk-scale anatomy; this profile
    exists so a real cohort dropped into raw/ trains at full scale.
    """
    cfg = PipelineConfig(
        data_root=str(data_root),
        qc=QcPolicy(bbox_size=144),
        selection=SelectionPolicy(rng_seed=seed),
        model=ModelConfig(image_size=144, base_width=64, depth=3, seed=seed),
        train=TrainConfig(epochs=150),
        sweep=SweepConfig(),
        profile="paper",
        n_patients=0,
        n_test=0,
        fold_count=3,
        seed=seed,
    )
    return replace(cfg, **overrides) if overrides else cfg


def _config_dict(cfg: PipelineConfig) -> dict:
    data = asdict(cfg)
    data["planes"] = [p.value for p in cfg.planes]
    return data


def save_config(cfg: PipelineConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(_config_dict(cfg), fh, indent=1, sort_keys=True)
        fh.write("\n")


def _tupled(d: dict, keys: tuple[str, ...]) -> dict:
    return {k: tuple(v) if k in keys and v is not None else v
            for k, v in d.items()}


def config_from_dict(data: dict) -> PipelineConfig:
    data = dict(data)
    data["planes"] = tuple(Plane.parse(p) for p in data.get("planes", []))
    data["qc"] = QcPolicy(**_tupled(data["qc"], ("brain_volume_cm3", "ladder",
                                                 "bbox_offset")))
    data["selection"] = SelectionPolicy(**data["selection"])
    data["model"] = ModelConfig(**data["model"])
    data["train"] = TrainConfig(**data["train"])
    data["sweep"] = SweepConfig(**_tupled(data["sweep"], ("thresholds",)))
    return PipelineConfig(**data)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path} does not exist")
    cfg = config_from_dict(json.loads(path.read_text()))
    root = Path(cfg.data_root)
    if not root.exists() and not root.parent.exists():
        raise ValueError(f"data_root {root} and its parent both missing")
    return cfg


def config_hash(cfg: PipelineConfig) -> str:
    canon = json.dumps(_config_dict(cfg), sort_keys=True)
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------- layout


class _Paths:
    def __init__(self, cfg: PipelineConfig):
        self.root = Path(cfg.data_root)
        self.raw = self.root / "raw"
        self.preproc = self.root / "preproc"
        self.splits = self.root / "splits"
        self.models = self.root / "models"
        self.predictions = self.root / "predictions"
        self.probmaps = self.root / "probmaps"
        self.eval = self.root / "eval"
        self.provenance = self.root / "provenance"

    def manifest(self):
        return self.raw / "manifest.json"

    def bundle(self, stage_dir: Path, pid: str, kind: str):
        return stage_dir / f"{pid}_{kind}"

    def meta(self, stage_dir: Path, pid: str):
        return stage_dir / f"{pid}_meta.json"

    def qc(self):
        return self.preproc / "qc.json"

    def split(self, plane: Plane):
        return self.splits / f"{plane.value}.json"

    def fold_dir(self, plane: Plane, fold: int):
        return self.models / plane.value / f"fold{fold}"

    def prediction(self, plane: Plane, fold: int, pid: str):
        return self.predictions / plane.value / f"fold{fold}" / pid

    def prob(self, plane: Plane, member: str, pid: str):
        return self.probmaps / plane.value / member / pid


def _require(path: Path, stage: str) -> Path:
    if not Path(path).exists():
        raise MissingStageError(path, stage)
    return Path(path)


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _stage_provenance(cfg: PipelineConfig, paths: _Paths, stage: str,
                      inputs: list[str]) -> None:
    _write_json(paths.provenance / f"{stage}.json", {
        "stage": stage,
        "config_sha256": config_hash(cfg),
        "seed": cfg.seed,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "inputs": inputs,
    })


def _derive_seed(*parts: int) -> int:
    return int(np.random.SeedSequence(list(parts)).generate_state(1)[0])


def _patient_ids(paths: _Paths, stage: str = "phantom") -> list[str]:
    manifest = json.loads(_require(paths.manifest(), stage).read_text())
    return list(manifest["patients"])


def _read_patient(paths: _Paths, stage_dir: Path, pid: str, stage: str) -> PatientRecord:
    ct = read_bundle(_require(paths.bundle(stage_dir, pid, "ct").with_suffix(".json"),
                              stage).with_suffix(""))
    pet = read_bundle(paths.bundle(stage_dir, pid, "pet"))
    gtv = read_bundle(paths.bundle(stage_dir, pid, "gtv"))
    meta_raw = json.loads(paths.meta(stage_dir, pid).read_text())
    meta = PatientMeta(**{k: v for k, v in meta_raw.items() if k != "patient_id"})
    return PatientRecord(pid, ct, pet, gtv, meta)


def _write_patient(paths: _Paths, stage_dir: Path, rec: PatientRecord) -> None:
    stage_dir.mkdir(parents=True, exist_ok=True)
    write_bundle(rec.ct, paths.bundle(stage_dir, rec.id, "ct"))
    write_bundle(rec.pet, paths.bundle(stage_dir, rec.id, "pet"))
    write_bundle(rec.gtv, paths.bundle(stage_dir, rec.id, "gtv"))
    _write_json(paths.meta(stage_dir, rec.id),
                {"patient_id": rec.id, **rec.meta.as_dict()})


# ----------------------------------------------------------------- stages


def cmd_phantom(cfg: PipelineConfig, echo=None) -> list[str]:
    """Generate the synthetic cohort; same config -> identical tree."""
    paths = _Paths(cfg)
    paths.raw.mkdir(parents=True, exist_ok=True)
    ids = [f"p{i:02d}" for i in range(1, cfg.n_patients + 1)]
    for i, pid in enumerate(ids, start=1):
        spec = random_phantom_spec(_derive_seed(cfg.seed, i))
        rec = generate_phantom(spec, patient_id=pid)
        _write_patient(paths, paths.raw, rec)
        if echo:
            echo(f"phantom {pid}: tumor T={rec.meta.t_stage} N={rec.meta.n_stage}")
    _write_json(paths.manifest(), {
        "schema_version": 1,
        "seed": cfg.seed,
        "n_patients": cfg.n_patients,
        "patients": ids,
    })
    return ids


def cmd_preprocess(cfg: PipelineConfig, echo=None) -> list[dict]:
    """QC-gated ROI extraction and normalization for every raw patient."""
    paths = _Paths(cfg)
    ids = _patient_ids(paths)
    qc_lines = []
    for pid in ids:
        rec = _read_patient(paths, paths.raw, pid, "phantom")
        roi = auto_roi(rec, cfg.qc)
        line = dict(qc_report_line(pid, roi))
        line["included"] = roi.status is not RoiStatus.FAILED
        qc_lines.append(line)
        if line["included"]:
            _write_patient(paths, paths.preproc, preprocess(rec, roi))
        if echo:
            echo(f"preprocess {pid}: {roi.status.value} at SUV {roi.suv_threshold}")
    paths.preproc.mkdir(parents=True, exist_ok=True)
    _write_json(paths.qc(), sorted(qc_lines, key=lambda l: l["id"]))
    _stage_provenance(cfg, paths, "preprocess", [str(paths.manifest())])
    return qc_lines


def _included_ids(paths: _Paths) -> list[str]:
    lines = json.loads(_require(paths.qc(), "preprocess").read_text())
    return sorted(line["id"] for line in lines if line["included"])


def cmd_split(cfg: PipelineConfig, echo=None) -> dict[str, list]:
    """Hold out the test set, then assign train patients to folds."""
    paths = _Paths(cfg)
    ids = _included_ids(paths)
    if len(ids) < cfg.n_test + cfg.fold_count:
        raise ValueError(f"{len(ids)} usable patients cannot cover "
                         f"{cfg.n_test} test + {cfg.fold_count} folds")
    order = [str(x) for x in
             np.random.default_rng([cfg.seed, 0x53504C49]).permutation(ids)]
    test_ids = sorted(order[:cfg.n_test])
    train_ids = sorted(order[cfg.n_test:])
    paths.splits.mkdir(parents=True, exist_ok=True)
    for plane in cfg.planes:
        split = make_folds(train_ids, cfg.fold_count, seed=cfg.seed,
                           plane=plane, test_ids=test_ids)
        write_fold_manifest(split, paths.split(plane), cfg.seed)
        if echo:
            echo(f"split {plane.value}: test={test_ids}")
    _stage_provenance(cfg, paths, "split", [str(paths.qc())])
    return {"test": test_ids, "train": train_ids}


def _fold_complete(fold_dir: Path) -> bool:
    files = [fold_dir / f"{name}.ckpt" for name in CHECKPOINT_NAMES]
    files.append(fold_dir / "history.csv")
    return all(f.exists() for f in files)


def cmd_train(cfg: PipelineConfig, planes=None, echo=None) -> None:
    """Train fold_count models per plane; finished folds are skipped."""
    paths = _Paths(cfg)
    for plane in planes or cfg.planes:
        split = read_fold_manifest(_require(paths.split(plane), "split"))
        cache: dict[str, PatientRecord] = {}

        def patient(pid):
            if pid not in cache:
                cache[pid] = _read_patient(paths, paths.preproc, pid, "preprocess")
            return cache[pid]

        for fold in range(cfg.fold_count):
            fold_dir = paths.fold_dir(plane, fold)
            if _fold_complete(fold_dir):
                if echo:
                    echo(f"train {plane.value} fold{fold}: already complete")
                continue
            train_pool = [seq for pid in split.train_ids(fold)
                          for seq in extract_sequences(patient(pid), plane)]
            train_seqs = select_training(train_pool, cfg.selection)
            val_seqs = [seq for pid in split.fold_ids(fold)
                        for seq in select_test(extract_sequences(patient(pid), plane))]
            model_cfg = replace(cfg.model,
                                seed=_derive_seed(cfg.seed, plane.axis, fold))
            log = None
            if echo:
                log = lambda row: echo(
                    f"train {plane.value} fold{fold} epoch {row.epoch}: "
                    f"loss {row.train_loss:.4f} val_dsc {row.val_dsc_mean:.4f}")
            result = train(train_seqs, val_seqs, model_cfg, cfg.train, log=log)
            fold_dir.mkdir(parents=True, exist_ok=True)
            for name, ckpt in zip(CHECKPOINT_NAMES,
                                  (result.checkpoints.last,
                                   result.checkpoints.best_val,
                                   result.checkpoints.second_best_post_warmup)):
                save_checkpoint(fold_dir / f"{name}.ckpt", ckpt.params,
                                model_cfg, ckpt.epoch, ckpt.val_dsc)
            write_history_csv(fold_dir / "history.csv", result.history)
    _stage_provenance(cfg, paths, "train",
                      [str(paths.split(p)) for p in (planes or cfg.planes)])


def cmd_predict(cfg: PipelineConfig, planes=None, echo=None) -> None:
    """Per-sequence probability maps for every test patient and fold.

    Test-time predictions always come from the `last` checkpoint.
    """
    paths = _Paths(cfg)
    for plane in planes or cfg.planes:
        split = read_fold_manifest(_require(paths.split(plane), "split"))
        for fold in range(cfg.fold_count):
            ckpt_path = _require(paths.fold_dir(plane, fold) / "last.ckpt", "train")
            params, model_cfg, _ = load_checkpoint(ckpt_path)
            model = set_params(build_model(model_cfg), params)
            for pid in split.test_ids:
                rec = _read_patient(paths, paths.preproc, pid, "preprocess")
                seqs = select_test(extract_sequences(rec, plane))
                maps = np.stack([forward(params, model_cfg, seq, model=model).maps
                                 for seq in seqs])
                out = paths.prediction(plane, fold, pid)
                out.parent.mkdir(parents=True, exist_ok=True)
                np.save(out.with_suffix(".npy"), maps.astype("<f4"))
                _write_json(out.with_suffix(".json"), {
                    "patient": pid,
                    "plane": plane.value,
                    "fold": fold,
                    "checkpoint": "last",
                    "n_slices": n_slices(rec.ct, plane),
                    "start_ks": [seq.start_k for seq in seqs],
                })
                if echo:
                    echo(f"predict {plane.value} fold{fold} {pid}: "
                         f"{maps.shape[0]} sequences")
    _stage_provenance(cfg, paths, "predict", [])


def cmd_reconstruct(cfg: PipelineConfig, planes=None, echo=None) -> None:
    """Average overlapping sequence predictions into per-fold volumes."""
    from .reconstruct import ProbSequence

    paths = _Paths(cfg)
    for plane in planes or cfg.planes:
        split = read_fold_manifest(_require(paths.split(plane), "split"))
        for fold in range(cfg.fold_count):
            for pid in split.test_ids:
                base = paths.prediction(plane, fold, pid)
                sidecar = _require(base.with_suffix(".json"), "predict")
                info = json.loads(sidecar.read_text())
                maps = np.load(_require(base.with_suffix(".npy"), "predict"))
                seqs = [ProbSequence(k, m.astype(np.float64))
                        for k, m in zip(info["start_ks"], maps)]
                gtv = read_bundle(paths.bundle(paths.preproc, pid, "gtv"))
                volume = reconstruct(
                    seqs, info["n_slices"], plane=plane,
                    spacing_mm=gtv.spacing_mm,
                    provenance={"model_ids": [f"{plane.value}-fold{fold}"],
                                "checkpoint": "last", "patient": pid})
                out = paths.prob(plane, f"fold{fold}", pid)
                out.parent.mkdir(parents=True, exist_ok=True)
                write_bundle(volume.to_volume(), out)
                if echo:
                    echo(f"reconstruct {plane.value} fold{fold} {pid}")
    _stage_provenance(cfg, paths, "reconstruct", [])


def _read_prob(paths: _Paths, plane: Plane, member: str, pid: str,
               stage: str) -> ProbVolume:
    base = paths.prob(plane, member, pid)
    vol = read_bundle(_require(base.with_suffix(".json"), stage).with_suffix(""))
    maps = np.stack([slice_volume(vol, plane, k)
                     for k in range(1, n_slices(vol, plane) + 1)])
    return ProbVolume(plane, maps, vol.spacing_mm,
                      {"model_ids": [f"{plane.value}-{member}"]})


def cmd_ensemble(cfg: PipelineConfig, planes=None, echo=None) -> None:
    """Average the fold volumes into one probability volume per patient."""
    paths = _Paths(cfg)
    for plane in planes or cfg.planes:
        split = read_fold_manifest(_require(paths.split(plane), "split"))
        for pid in split.test_ids:
            members = [_read_prob(paths, plane, f"fold{f}", pid, "reconstruct")
                       for f in range(cfg.fold_count)]
            combined = ensemble(members)
            out = paths.prob(plane, "ensemble", pid)
            out.parent.mkdir(parents=True, exist_ok=True)
            write_bundle(combined.to_volume(), out)
            if echo:
                echo(f"ensemble {plane.value} {pid}")
    _stage_provenance(cfg, paths, "ensemble", [])


def cmd_evaluate(cfg: PipelineConfig, echo=None) -> list[dict]:
    """Threshold sweep per patient/plane; writes eval/sweep.csv."""
    paths = _Paths(cfg)
    all_rows = []
    for plane in cfg.planes:
        split = read_fold_manifest(_require(paths.split(plane), "split"))
        for pid in sorted(split.test_ids):
            prob = _read_prob(paths, plane, "ensemble", pid, "ensemble")
            gtv = read_bundle(_require(
                paths.bundle(paths.preproc, pid, "gtv").with_suffix(".json"),
                "preprocess").with_suffix(""))
            for row in sweep(prob, gtv, cfg.sweep):
                all_rows.append({"patient": pid, "plane": plane.value, **row})
            if echo:
                echo(f"evaluate {plane.value} {pid}")
    paths.eval.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(paths.eval / "sweep.csv", all_rows)
    _stage_provenance(cfg, paths, "evaluate", [])
    return all_rows


def read_sweep_csv(path) -> list[dict]:
    """Inverse of write_sweep_csv; restores the numeric row types."""
    import csv

    bool_cols = {"precision_defaulted", "recall_defaulted"}
    int_cols = {"pos_pixels"}
    str_cols = {"patient", "plane"}
    rows = []
    with open(path, newline="") as fh:
        for raw in csv.DictReader(fh):
            row = {}
            for key, value in raw.items():
                if key in str_cols:
                    row[key] = value
                elif key in bool_cols:
                    row[key] = value == "1"
                elif key in int_cols:
                    row[key] = int(value)
                else:
                    row[key] = float(value)
            rows.append(row)
    return rows


def _report_text(cfg: PipelineConfig, stats, rows) -> str:
    lines = ["Cohort evaluation report", ""]
    patients = sorted({r["patient"] for r in rows})
    lines.append(f"test patients: {len(patients)} "
                 f"({', '.join(patients)})")
    lines.append("")
    lines.append("Mean DSC at threshold 0.9 by plane "
                 "(mean +- std (min - max) over patients):")
    for s in stats:
        if s.group == "overall" and s.threshold == 0.9:
            lines.append(f"  {s.plane:<9} {s.formatted}")
    lines.append("")
    lines.append("Mean DSC by threshold:")
    planes = [p.value for p in cfg.planes]
    lines.append("  th    " + "".join(f"{p:>10}" for p in planes))
    for th in cfg.sweep.thresholds:
        cells = []
        for plane in planes:
            match = [s for s in stats
                     if s.plane == plane and s.threshold == th and s.group == "overall"]
            cells.append(f"{match[0].mean:>10.3f}" if match else f"{'-':>10}")
        lines.append(f"  {th:<4g}" + "".join(cells))
    lines.append("")
    lines.append("Groups at threshold 0.9:")
    for s in stats:
        if s.group != "overall" and s.threshold == 0.9:
            lines.append(f"  {s.plane:<9} {s.group:<12} n={s.n:<3} {s.formatted}")
    return "\n".join(lines) + "\n"


def cmd_report(cfg: PipelineConfig, echo=None) -> dict:
    """Cohort tables and plot payloads derived from the sweep rows."""
    paths = _Paths(cfg)
    rows = read_sweep_csv(_require(paths.eval / "sweep.csv", "evaluate"))
    metadata = {}
    for pid in sorted({row["patient"] for row in rows}):
        meta_path = _require(paths.meta(paths.preproc, pid), "preprocess")
        raw = json.loads(meta_path.read_text())
        metadata[pid] = PatientMeta(**{k: v for k, v in raw.items()
                                       if k != "patient_id"})
    stats = cohort_report(rows, metadata)
    write_cohort_csv(paths.eval / "cohort.csv", stats)
    write_boxplot_json(paths.eval / "boxplot.json", rows)
    boxes = boxplot_data(rows)
    write_scatter_json(paths.eval / "scatter.json", rows)
    points = scatter_data(rows)
    text = _report_text(cfg, stats, rows)
    (paths.eval / "report.txt").write_text(text, encoding="utf-8")
    if echo:
        echo(text)
    _stage_provenance(cfg, paths, "report", [str(paths.eval / "sweep.csv")])
    return {"cohort": stats, "boxplot": boxes, "scatter": points}


def run_all(cfg: PipelineConfig, echo=None) -> dict:
    """Every stage in order; returns the report payload."""
    cmd_phantom(cfg, echo)
    cmd_preprocess(cfg, echo)
    cmd_split(cfg, echo)
    cmd_train(cfg, echo=echo)
    cmd_predict(cfg, echo=echo)
    cmd_reconstruct(cfg, echo=echo)
    cmd_ensemble(cfg, echo=echo)
    cmd_evaluate(cfg, echo)
    return cmd_report(cfg, echo)
