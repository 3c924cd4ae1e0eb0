"""Smoothed DSC, volume-aggregated precision/recall, sweeps, and reports.

DSC is computed per slice with an additive smoothing term so that
tumor-free slices with empty predictions score 1 instead of 0/0.
Precision and recall aggregate pixel counts over the whole stack; the
slice-averaged variant is emitted alongside since display conventions
differ. Cohort reports group per-patient results by T and N stage.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .reconstruct import ProbVolume
from .volume import PatientMeta, Volume3D, n_slices, slice_volume

__all__ = [
    "EvalCounts",
    "SweepConfig",
    "PrecisionRecall",
    "GroupStats",
    "slice_counts",
    "dsc_slice",
    "patient_mean_dsc",
    "precision_recall",
    "precision_recall_slice_mean",
    "sweep",
    "tumor_volume",
    "cohort_report",
    "boxplot_data",
    "scatter_data",
    "write_sweep_csv",
    "write_cohort_csv",
    "write_boxplot_json",
    "write_scatter_json",
]

EPSILON_SMOOTH = 1e-5

DEFAULT_THRESHOLDS = tuple(round(0.1 * i, 1) for i in range(1, 10))


@dataclass(frozen=True)
class EvalCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn


@dataclass(frozen=True)
class SweepConfig:
    thresholds: tuple[float, ...] = DEFAULT_THRESHOLDS
    epsilon_smooth: float = EPSILON_SMOOTH

    def __post_init__(self):
        ths = tuple(self.thresholds)
        if not ths or any(not 0.0 < t < 1.0 for t in ths):
            raise ValueError(f"thresholds must lie in (0,1), got {ths}")
        if list(ths) != sorted(set(ths)):
            raise ValueError("thresholds must be strictly increasing")
        object.__setattr__(self, "thresholds", ths)


@dataclass(frozen=True)
class PrecisionRecall:
    precision: float
    recall: float
    precision_defaulted: bool  # no positive prediction anywhere
    recall_defaulted: bool  # no tumor pixel anywhere


def _as_binary(arr, name: str) -> np.ndarray:
    arr = np.asarray(arr)
    if arr.dtype != bool and not np.isin(arr, (0.0, 1.0)).all():
        raise ValueError(f"{name} must be binary")
    return arr.astype(bool)


def slice_counts(pred, gt) -> EvalCounts:
    pred = _as_binary(pred, "pred")
    gt = _as_binary(gt, "gt")
    if pred.shape != gt.shape:
        raise ValueError(f"shape mismatch {pred.shape} vs {gt.shape}")
    tp = int((pred & gt).sum())
    fp = int((pred & ~gt).sum())
    fn = int((~pred & gt).sum())
    return EvalCounts(tp, fp, fn, pred.size - tp - fp - fn)


def dsc_slice(pred, gt, epsilon: float = EPSILON_SMOOTH) -> float:
    """(2*TP + eps) / ((TP+FP) + (TP+FN) + eps); empty/empty scores 1."""
    c = slice_counts(pred, gt)
    return (2.0 * c.tp + epsilon) / ((c.tp + c.fp) + (c.tp + c.fn) + epsilon)


def _gt_slices(prob: ProbVolume, gt: Volume3D) -> list[np.ndarray]:
    n = n_slices(gt, prob.plane)
    if n != prob.n_slices:
        raise ValueError(f"slice count mismatch: prob {prob.n_slices}, gt {n}")
    return [slice_volume(gt, prob.plane, k) for k in range(1, n + 1)]


def patient_mean_dsc(prob: ProbVolume, gt: Volume3D, th: float,
                     epsilon: float = EPSILON_SMOOTH) -> tuple[float, float]:
    """Mean and population std of per-slice DSC over every slice."""
    scores = [dsc_slice(prob.maps[i] > th, gt_slice, epsilon)
              for i, gt_slice in enumerate(_gt_slices(prob, gt))]
    scores = np.asarray(scores)
    return float(scores.mean()), float(scores.std())


def precision_recall(prob: ProbVolume, gt: Volume3D, th: float) -> PrecisionRecall:
    """Stack-aggregated pixel counts; empty denominators default to 1."""
    tp = fp = fn = 0
    for i, gt_slice in enumerate(_gt_slices(prob, gt)):
        c = slice_counts(prob.maps[i] > th, gt_slice)
        tp, fp, fn = tp + c.tp, fp + c.fp, fn + c.fn
    p_def, r_def = tp + fp == 0, tp + fn == 0
    return PrecisionRecall(
        precision=1.0 if p_def else tp / (tp + fp),
        recall=1.0 if r_def else tp / (tp + fn),
        precision_defaulted=p_def,
        recall_defaulted=r_def,
    )


def precision_recall_slice_mean(prob: ProbVolume, gt: Volume3D,
                                th: float) -> tuple[float, float]:
    """Per-slice precision/recall averaged over slices, same defaulting."""
    ps, rs = [], []
    for i, gt_slice in enumerate(_gt_slices(prob, gt)):
        c = slice_counts(prob.maps[i] > th, gt_slice)
        ps.append(1.0 if c.tp + c.fp == 0 else c.tp / (c.tp + c.fp))
        rs.append(1.0 if c.tp + c.fn == 0 else c.tp / (c.tp + c.fn))
    return float(np.mean(ps)), float(np.mean(rs))


def tumor_volume(gt: Volume3D) -> float:
    """Tumor volume in mm^3 from the binary mask."""
    data = _as_binary(gt.data, "gt")
    return float(data.sum()) * gt.voxel_volume_mm3


def sweep(prob: ProbVolume, gt: Volume3D,
          cfg: SweepConfig | None = None) -> list[dict]:
    """Per-threshold metric rows for one reconstructed patient volume."""
    cfg = cfg or SweepConfig()
    gt_mm3 = tumor_volume(gt)
    rows = []
    for th in cfg.thresholds:
        mean_dsc, std_dsc = patient_mean_dsc(prob, gt, th, cfg.epsilon_smooth)
        pr = precision_recall(prob, gt, th)
        p_sl, r_sl = precision_recall_slice_mean(prob, gt, th)
        rows.append({
            "threshold": th,
            "mean_dsc": mean_dsc,
            "std_dsc": std_dsc,
            "precision": pr.precision,
            "recall": pr.recall,
            "precision_defaulted": pr.precision_defaulted,
            "recall_defaulted": pr.recall_defaulted,
            "precision_slice_mean": p_sl,
            "recall_slice_mean": r_sl,
            "pos_pixels": int((prob.maps > th).sum()),
            "tumor_mm3": gt_mm3,
        })
    return rows


@dataclass(frozen=True)
class GroupStats:
    plane: str
    threshold: float
    group: str
    n: int
    mean: float
    std: float
    min: float
    max: float

    @property
    def formatted(self) -> str:
        return (f"{self.mean:.2f} ± {self.std:.2f} "
                f"({self.min:.2f} - {self.max:.2f})")


def _stats(plane, th, group, values) -> GroupStats:
    vals = np.asarray(values, dtype=np.float64)
    return GroupStats(plane, th, group, len(vals), float(vals.mean()),
                      float(vals.std()), float(vals.min()), float(vals.max()))


def cohort_report(rows: list[dict],
                  metadata: dict[str, PatientMeta]) -> list[GroupStats]:
    """mean +- std (min - max) of per-patient DSC, overall and by stage.

    Rows carry {patient, plane, threshold, mean_dsc}; every patient id
    must resolve in metadata.
    """
    for row in rows:
        if row["patient"] not in metadata:
            raise ValueError(f"unknown patient id {row['patient']!r}")
    cells: dict[tuple, list[float]] = {}
    for row in rows:
        meta = metadata[row["patient"]]
        keys = [(row["plane"], row["threshold"], "overall"),
                (row["plane"], row["threshold"], f"t_stage:{meta.t_stage}"),
                (row["plane"], row["threshold"], f"n_stage:{meta.n_stage}")]
        for key in keys:
            cells.setdefault(key, []).append(row["mean_dsc"])
    return [_stats(plane, th, group, vals)
            for (plane, th, group), vals in sorted(cells.items())]


def boxplot_data(rows: list[dict], value_key: str = "mean_dsc") -> list[dict]:
    """Tukey box stats per (plane, threshold) for swept patient metrics."""
    cells: dict[tuple, list[float]] = {}
    for row in rows:
        cells.setdefault((row["plane"], row["threshold"]), []).append(row[value_key])
    out = []
    for (plane, th), vals in sorted(cells.items()):
        arr = np.asarray(sorted(vals), dtype=np.float64)
        q1, med, q3 = (float(q) for q in np.percentile(arr, [25, 50, 75]))
        iqr = q3 - q1
        inside = arr[(arr >= q1 - 1.5 * iqr) & (arr <= q3 + 1.5 * iqr)]
        out.append({
            "plane": plane,
            "threshold": th,
            "mean": float(arr.mean()),
            "q1": q1,
            "median": med,
            "q3": q3,
            "whisker_lo": float(inside.min()),
            "whisker_hi": float(inside.max()),
            "outliers": [float(v) for v in arr
                         if v < q1 - 1.5 * iqr or v > q3 + 1.5 * iqr],
            "n": len(vals),
        })
    return out


def scatter_data(rows: list[dict]) -> list[dict]:
    """Precision/recall/tumor-volume triples for bubble plots."""
    return [{
        "patient": row["patient"],
        "plane": row["plane"],
        "threshold": row["threshold"],
        "precision": row["precision"],
        "recall": row["recall"],
        "tumor_mm3": row["tumor_mm3"],
    } for row in rows]


def _fmt(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_sweep_csv(path, rows: list[dict]) -> None:
    """Deterministic CSV: fixed column order, 12-significant-digit floats."""
    cols = ["patient", "plane", "threshold", "mean_dsc", "std_dsc", "precision",
            "recall", "precision_defaulted", "recall_defaulted",
            "precision_slice_mean", "recall_slice_mean", "pos_pixels", "tumor_mm3"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in cols])


def write_cohort_csv(path, stats: list[GroupStats]) -> None:
    cols = ["plane", "threshold", "group", "n", "mean", "std", "min", "max",
            "formatted"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(cols)
        for s in stats:
            writer.writerow([s.plane, _fmt(s.threshold), s.group, s.n,
                             _fmt(s.mean), _fmt(s.std), _fmt(s.min),
                             _fmt(s.max), s.formatted])


def write_boxplot_json(path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump(boxplot_data(rows), fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_scatter_json(path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        json.dump(scatter_data(rows), fh, indent=1, sort_keys=True)
        fh.write("\n")
