"""Brain-anchored ROI extraction and intensity normalization.

The brain is segmented on PET as the largest 6-connected component above
an SUV threshold. QC metrics (brain volume, HU statistics inside the
mask) police the segmentation; when they fail, the threshold escalates
along a ladder instead of requiring manual correction. The accepted mask
anchors a fixed-size bounding box whose crops feed the model.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .volume import Modality, PatientRecord, Volume3D

__all__ = [
    "QcMetrics",
    "QcPolicy",
    "RoiResult",
    "RoiStatus",
    "segment_brain",
    "qc_brain",
    "auto_roi",
    "crop",
    "window_ct",
    "clamp_pet",
    "znorm",
    "suv_convert",
    "preprocess",
    "qc_report_line",
]


@dataclass(frozen=True)
class QcMetrics:
    brain_volume_cm3: float
    hu_max: float
    hu_mean: float
    hu_std: float


@dataclass(frozen=True)
class QcPolicy:
    """Acceptance bands for the brain segmentation plus box geometry.

    Volume bounds bracket typical adult brain volumes; hu_max above soft
    tissue means the mask leaked into bone. The ladder is ascending so a
    failing threshold is only ever raised.
    """

    brain_volume_cm3: tuple[float, float] = (900.0, 1600.0)
    hu_max_cap: float = 300.0
    ladder: tuple[float, ...] = (3.0, 4.0, 5.0, 6.0, 8.0)
    bbox_size: int = 144
    bbox_offset: tuple[int, int, int] = (0, 0, 0)

    def __post_init__(self):
        if list(self.ladder) != sorted(self.ladder) or len(self.ladder) == 0:
            raise ValueError("threshold ladder must be nonempty ascending")
        if self.bbox_size < 1:
            raise ValueError("bbox_size must be positive")

    def qc_passes(self, qc: QcMetrics) -> bool:
        lo, hi = self.brain_volume_cm3
        return (lo <= qc.brain_volume_cm3 <= hi) and (qc.hu_max <= self.hu_max_cap)


class RoiStatus(str, Enum):
    ACCEPTED = "Accepted"
    THRESHOLD_ADJUSTED = "ThresholdAdjusted"
    FAILED = "Failed"


@dataclass(frozen=True)
class RoiResult:
    suv_threshold: float
    brain_mask: Volume3D
    bbox_origin: tuple[int, int, int]
    bbox_size: int
    qc: QcMetrics
    status: RoiStatus


def segment_brain(pet: Volume3D, suv_threshold: float) -> Volume3D:
    """Largest 6-connected component of {voxel : SUV > threshold}."""
    if pet.modality is not Modality.PET:
        raise TypeError(f"expected PET volume, got {pet.modality}")
    if suv_threshold <= 0:
        raise ValueError("suv_threshold must be > 0")
    above = pet.data > suv_threshold
    # rank-1 structuring element: faces only, no diagonal bridges
    labels, count = ndimage.label(above)
    if count == 0:
        mask = np.zeros(pet.dims)
    else:
        sizes = np.bincount(labels.ravel())[1:]
        keep = int(np.argmax(sizes)) + 1
        mask = (labels == keep).astype(np.float64)
    return Volume3D(mask, pet.spacing_mm, Modality.MASK)


def qc_brain(mask: Volume3D, ct: Volume3D) -> QcMetrics:
    """Brain volume and HU statistics over the masked CT region."""
    if mask.dims != ct.dims:
        raise ValueError("mask and ct dims differ")
    sel = mask.data > 0.5
    count = int(sel.sum())
    if count == 0:
        raise ValueError("empty brain mask: segmentation failed")
    hu = ct.data[sel]
    return QcMetrics(
        brain_volume_cm3=count * mask.voxel_volume_mm3 / 1000.0,
        hu_max=float(hu.max()),
        hu_mean=float(hu.mean()),
        hu_std=float(hu.std()),
    )


def _place_bbox(mask: Volume3D, policy: QcPolicy) -> tuple[int, int, int]:
    """Box top aligned to the brain centroid axially, centered laterally."""
    size = policy.bbox_size
    idx = np.argwhere(mask.data > 0.5)
    if idx.size:
        cx, cy, cz = (int(np.rint(c)) for c in idx.mean(axis=0))
    else:
        cx, cy, cz = (d // 2 for d in mask.dims)
    ox, oy, oz = policy.bbox_offset
    origin = [cx - size // 2 + ox, cy - size // 2 + oy, cz - (size - 1) + oz]
    return tuple(min(max(o, 0), max(d - size, 0))
                 for o, d in zip(origin, mask.dims))


def auto_roi(patient: PatientRecord, policy: QcPolicy | None = None) -> RoiResult:
    """Segment the brain, escalating the SUV threshold until QC passes."""
    policy = policy or QcPolicy()
    mask = None
    qc = QcMetrics(0.0, float("nan"), float("nan"), float("nan"))
    for rung, threshold in enumerate(policy.ladder):
        mask = segment_brain(patient.pet, threshold)
        if mask.data.sum() == 0:
            qc = QcMetrics(0.0, float("nan"), float("nan"), float("nan"))
            continue
        qc = qc_brain(mask, patient.ct)
        if policy.qc_passes(qc):
            status = RoiStatus.ACCEPTED if rung == 0 else RoiStatus.THRESHOLD_ADJUSTED
            return RoiResult(threshold, mask, _place_bbox(mask, policy),
                             policy.bbox_size, qc, status)
    return RoiResult(policy.ladder[-1], mask, _place_bbox(mask, policy),
                     policy.bbox_size, qc, RoiStatus.FAILED)


def crop(v: Volume3D, roi: RoiResult) -> Volume3D:
    """Extract the ROI box, zero-padding any part outside the volume."""
    size = roi.bbox_size
    out = np.zeros((size, size, size))
    src, dst = [], []
    for o, d in zip(roi.bbox_origin, v.dims):
        lo, hi = max(o, 0), min(o + size, d)
        if lo >= hi:
            return v.with_data(out)
        src.append(slice(lo, hi))
        dst.append(slice(lo - o, hi - o))
    out[tuple(dst)] = v.data[tuple(src)]
    return v.with_data(out)


def window_ct(ct: Volume3D, level: float = 40.0, window: float = 350.0) -> Volume3D:
    if ct.modality is not Modality.CT:
        raise TypeError(f"expected CT volume, got {ct.modality}")
    if window <= 0:
        raise ValueError("window width must be > 0")
    half = window / 2.0
    return ct.with_data(np.clip(ct.data, level - half, level + half))


def clamp_pet(pet: Volume3D) -> Volume3D:
    if pet.modality is not Modality.PET:
        raise TypeError(f"expected PET volume, got {pet.modality}")
    return pet.with_data(np.maximum(pet.data, 0.0))


def znorm(v: Volume3D) -> Volume3D:
    """Zero-mean unit-variance rescaling with population statistics."""
    std = float(v.data.std())
    if std == 0.0:
        raise ValueError("cannot z-normalize a constant volume")
    return v.with_data((v.data - v.data.mean()) / std)


def suv_convert(raw_pet: Volume3D, weight_kg: float, dose_bq: float,
                decay_factor: float) -> Volume3D:
    """Body-weight SUV from raw activity concentration (Bq/ml input)."""
    if raw_pet.modality is not Modality.PET:
        raise TypeError(f"expected PET volume, got {raw_pet.modality}")
    if weight_kg <= 0 or dose_bq <= 0 or decay_factor <= 0:
        raise ValueError("weight, dose and decay factor must all be > 0")
    return raw_pet.with_data(raw_pet.data * (weight_kg * 1000.0)
                             / (dose_bq * decay_factor))


def preprocess(patient: PatientRecord, roi: RoiResult) -> PatientRecord:
    """Cropped, windowed, z-normalized record ready for sequence extraction."""
    if roi.status is RoiStatus.FAILED:
        raise ValueError(f"cannot preprocess {patient.id}: ROI status Failed")
    ct = znorm(window_ct(crop(patient.ct, roi)))
    pet = znorm(clamp_pet(crop(patient.pet, roi)))
    gtv = crop(patient.gtv, roi)
    return PatientRecord(patient.id, ct, pet, gtv, patient.meta)


def qc_report_line(patient_id: str, roi: RoiResult) -> dict:
    """One QC-report JSON-lines entry."""
    return {
        "id": patient_id,
        "threshold": roi.suv_threshold,
        "status": roi.status.value,
        "brain_volume_cm3": roi.qc.brain_volume_cm3,
        "hu_max": roi.qc.hu_max,
        "hu_mean": roi.qc.hu_mean,
        "hu_std": roi.qc.hu_std,
        "bbox_origin": list(roi.bbox_origin),
    }
