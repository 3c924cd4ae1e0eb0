"""3-slice sequence extraction, imbalance-aware selection, and fold splits.

A sequence is three consecutive slices of the cropped CT/PET/GTV stack in
one plane. Training selection keeps every sequence whose first slice has
more than 5% tumor area and samples the rest so that negatives and
low-tumor sequences each land near 5% of the selected set. Test-time
selection always takes everything.
"""

from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field

import numpy as np

from .volume import PatientRecord, Plane, n_slices, slice_volume

__all__ = [
    "SliceSequence",
    "SelectionPolicy",
    "FoldSplit",
    "extract_sequences",
    "first_slice_tumor_fraction",
    "select_training",
    "select_test",
    "selection_report",
    "make_folds",
    "write_fold_manifest",
    "read_fold_manifest",
]


@dataclass(frozen=True)
class SliceSequence:
    patient_id: str
    plane: Plane
    start_k: int
    ct: np.ndarray
    pet: np.ndarray
    gtv: np.ndarray

    def __post_init__(self):
        if self.start_k < 1:
            raise ValueError(f"start_k must be >= 1, got {self.start_k}")
        if not (self.ct.shape == self.pet.shape == self.gtv.shape):
            raise ValueError("ct/pet/gtv slice stacks differ in shape")
        if self.ct.ndim != 3 or self.ct.shape[0] != 3:
            raise ValueError(f"expected 3 stacked slices, got shape {self.ct.shape}")
        if not np.isin(self.gtv, (0.0, 1.0)).all():
            raise ValueError("gtv slices must be binary")


@dataclass(frozen=True)
class SelectionPolicy:
    """Sampling knobs; None keep fractions are auto-tuned per patient so
    each sampled group lands near 5% of that patient's selected set."""

    tumor_area_threshold: float = 0.05
    keep_fraction_negative: float | None = None
    keep_fraction_low_tumor: float | None = None
    rng_seed: int = 0

    def __post_init__(self):
        for frac in (self.keep_fraction_negative, self.keep_fraction_low_tumor):
            if frac is not None and not 0.0 <= frac <= 1.0:
                raise ValueError(f"keep fraction outside [0,1]: {frac}")
        if not 0.0 < self.tumor_area_threshold < 1.0:
            raise ValueError("tumor_area_threshold must be in (0,1)")


@dataclass(frozen=True)
class FoldSplit:
    plane: Plane
    fold_count: int
    assignments: dict[str, int]
    test_ids: tuple[str, ...] = field(default_factory=tuple)

    def fold_ids(self, fold: int) -> list[str]:
        return sorted(pid for pid, f in self.assignments.items() if f == fold)

    def train_ids(self, fold: int) -> list[str]:
        return sorted(pid for pid, f in self.assignments.items() if f != fold)


def extract_sequences(patient: PatientRecord, plane: Plane) -> list[SliceSequence]:
    """All n-2 overlapping 3-slice sequences, start_k = 1..n-2 in order."""
    n = n_slices(patient.ct, plane)
    if n < 3:
        raise ValueError(f"need at least 3 {plane.value} slices, got {n}")
    out = []
    for start in range(1, n - 1):
        ks = (start, start + 1, start + 2)
        out.append(SliceSequence(
            patient_id=patient.id,
            plane=plane,
            start_k=start,
            ct=np.stack([slice_volume(patient.ct, plane, k) for k in ks]),
            pet=np.stack([slice_volume(patient.pet, plane, k) for k in ks]),
            gtv=np.stack([slice_volume(patient.gtv, plane, k) for k in ks]),
        ))
    return out


def first_slice_tumor_fraction(seq: SliceSequence) -> float:
    first = seq.gtv[0]
    return float(first.sum() / first.size)


def _auto_fraction(n_unconditional: int, n_group: int) -> float:
    # expected kept per group = P/18, i.e. ~5% of a selected set that is
    # ~90% unconditional sequences
    if n_group == 0 or n_unconditional == 0:
        return 0.0
    return min(1.0, n_unconditional / (18.0 * n_group))


def select_training(seqs: list[SliceSequence],
                    policy: SelectionPolicy | None = None) -> list[SliceSequence]:
    """Class-imbalance selection; deterministic per (rng_seed, patient)."""
    policy = policy or SelectionPolicy()
    by_patient: dict[str, list[SliceSequence]] = {}
    for seq in seqs:
        by_patient.setdefault(seq.patient_id, []).append(seq)

    kept_ids = set()
    for pid, group in by_patient.items():
        fractions = {s.start_k: first_slice_tumor_fraction(s) for s in group}
        n_uncond = sum(1 for f in fractions.values()
                       if f > policy.tumor_area_threshold)
        n_neg = sum(1 for f in fractions.values() if f == 0.0)
        n_low = len(group) - n_uncond - n_neg
        p_neg = (policy.keep_fraction_negative
                 if policy.keep_fraction_negative is not None
                 else _auto_fraction(n_uncond, n_neg))
        p_low = (policy.keep_fraction_low_tumor
                 if policy.keep_fraction_low_tumor is not None
                 else _auto_fraction(n_uncond, n_low))
        rng = np.random.default_rng(
            np.random.SeedSequence([policy.rng_seed, zlib.crc32(pid.encode())]))
        for seq in sorted(group, key=lambda s: s.start_k):
            frac = fractions[seq.start_k]
            if frac > policy.tumor_area_threshold:
                kept_ids.add((pid, seq.start_k))
            elif frac == 0.0:
                if rng.random() < p_neg:
                    kept_ids.add((pid, seq.start_k))
            else:
                if rng.random() < p_low:
                    kept_ids.add((pid, seq.start_k))
    return [s for s in seqs if (s.patient_id, s.start_k) in kept_ids]


def select_test(seqs: list[SliceSequence]) -> list[SliceSequence]:
    """Test-time path: every sequence of the volume, no sampling."""
    return list(seqs)


def selection_report(seqs: list[SliceSequence],
                     kept: list[SliceSequence]) -> list[dict]:
    """Sidecar entries recording the per-sequence selection outcome."""
    kept_ids = {(s.patient_id, s.start_k) for s in kept}
    return [{
        "start_k": s.start_k,
        "first_slice_tumor_fraction": first_slice_tumor_fraction(s),
        "kept": (s.patient_id, s.start_k) in kept_ids,
    } for s in seqs]


def make_folds(train_ids, fold_count: int = 3, seed: int = 0,
               plane: Plane = Plane.AXIAL, test_ids=()) -> FoldSplit:
    """Near-equal random patient-level partition, deterministic under seed."""
    train_ids = list(train_ids)
    if len(set(train_ids)) != len(train_ids):
        raise ValueError("duplicate patient ids")
    if len(train_ids) < fold_count:
        raise ValueError(f"need at least {fold_count} patients, got {len(train_ids)}")
    overlap = set(train_ids) & set(test_ids)
    if overlap:
        raise ValueError(f"patients in both train and test: {sorted(overlap)}")
    order = list(train_ids)
    np.random.default_rng(seed).shuffle(order)
    assignments = {pid: i % fold_count for i, pid in enumerate(order)}
    return FoldSplit(plane=plane, fold_count=fold_count,
                     assignments=assignments, test_ids=tuple(test_ids))


def write_fold_manifest(split: FoldSplit, path, seed: int) -> None:
    payload = {
        "plane": split.plane.value,
        "seed": seed,
        "folds": [split.fold_ids(f) for f in range(split.fold_count)],
        "test": sorted(split.test_ids),
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def read_fold_manifest(path) -> FoldSplit:
    with open(path) as fh:
        payload = json.load(fh)
    assignments = {pid: f for f, ids in enumerate(payload["folds"]) for pid in ids}
    return FoldSplit(plane=Plane.parse(payload["plane"]),
                     fold_count=len(payload["folds"]),
                     assignments=assignments,
                     test_ids=tuple(payload["test"]))
