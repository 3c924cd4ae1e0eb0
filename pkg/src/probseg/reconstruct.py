"""Per-slice probability reconstruction from overlapping 3-slice windows.

Every interior slice is predicted by up to three sequences; the final
per-slice map is the plain average of all predictions that slice
received, giving prediction counts {1, 2, 3, ..., 3, 2, 1} along the
stack. Fold models are ensembled by averaging their reconstructed maps.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .volume import Modality, Plane, Volume3D, volume_from_slices

__all__ = [
    "ProbSequence",
    "ProbVolume",
    "CoverageError",
    "prediction_counts",
    "reconstruct",
    "ensemble",
    "threshold",
    "extract_contours",
]


class CoverageError(ValueError):
    """Sequence set does not cover start positions 1..n-2 exactly once."""


@dataclass(frozen=True)
class ProbSequence:
    start_k: int
    maps: np.ndarray  # (3, H, W) in [0,1]

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.float64)
        if maps.ndim != 3 or maps.shape[0] != 3:
            raise ValueError(f"expected 3 probability maps, got shape {maps.shape}")
        if maps.min() < 0.0 or maps.max() > 1.0:
            raise ValueError("probability maps must lie in [0,1]")
        if self.start_k < 1:
            raise ValueError(f"start_k must be >= 1, got {self.start_k}")
        object.__setattr__(self, "maps", maps)


@dataclass(frozen=True)
class ProbVolume:
    plane: Plane
    maps: np.ndarray  # (n, H, W) in [0,1]
    spacing_mm: tuple[float, float, float] = (1.0, 1.0, 1.0)
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        maps = np.asarray(self.maps, dtype=np.float64)
        if maps.ndim != 3:
            raise ValueError(f"expected (n, H, W) maps, got shape {maps.shape}")
        if maps.min() < 0.0 or maps.max() > 1.0:
            raise ValueError("probability maps must lie in [0,1]")
        object.__setattr__(self, "maps", maps)

    @property
    def n_slices(self) -> int:
        return self.maps.shape[0]

    def slice_map(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.n_slices:
            raise IndexError(f"slice {k} outside 1..{self.n_slices}")
        return self.maps[k - 1].copy()

    def to_volume(self) -> Volume3D:
        return volume_from_slices(self.plane, list(self.maps), self.spacing_mm,
                                  Modality.PROB)


def prediction_counts(n: int) -> list[int]:
    """How many sequence predictions each of the n slices receives."""
    if n < 3:
        raise ValueError(f"need n >= 3, got {n}")
    return [min(k, n - 2) - max(1, k - 2) + 1 for k in range(1, n + 1)]


def reconstruct(seqs: list[ProbSequence], n: int, plane: Plane = Plane.AXIAL,
                spacing_mm=(1.0, 1.0, 1.0), provenance: dict | None = None,
                ) -> ProbVolume:
    """Average overlapping sequence predictions into n per-slice maps."""
    starts = sorted(s.start_k for s in seqs)
    expected = list(range(1, n - 1))
    if starts != expected:
        missing = sorted(set(expected) - set(starts))
        extra = sorted(set(starts) - set(expected))
        dup = sorted({k for k in starts if starts.count(k) > 1})
        raise CoverageError(
            f"need one sequence per start 1..{n - 2}: "
            f"missing {missing}, unexpected {extra}, duplicated {dup}")
    shape = seqs[0].maps.shape[1:]
    if any(s.maps.shape[1:] != shape for s in seqs):
        raise ValueError("sequence map dims differ")
    acc = np.zeros((n, *shape))
    # ascending start_k fixes the floating-point reduction order
    for seq in sorted(seqs, key=lambda s: s.start_k):
        acc[seq.start_k - 1:seq.start_k + 2] += seq.maps
    counts = np.asarray(prediction_counts(n), dtype=np.float64)
    maps = acc / counts[:, None, None]
    return ProbVolume(plane, maps, tuple(spacing_mm), provenance or {})


def ensemble(volumes: list[ProbVolume]) -> ProbVolume:
    """Voxelwise mean of reconstructed fold predictions."""
    if not volumes:
        raise ValueError("need at least one volume to ensemble")
    head = volumes[0]
    for v in volumes[1:]:
        if v.plane is not head.plane:
            raise ValueError("cannot ensemble volumes from different planes")
        if v.maps.shape != head.maps.shape:
            raise ValueError("cannot ensemble volumes with different dims")
    maps = np.zeros_like(head.maps)
    # canonical summand order makes the mean independent of list order
    for v in sorted(volumes, key=lambda v: v.maps.tobytes()):
        maps += v.maps
    maps /= len(volumes)
    model_ids = [m for v in volumes for m in v.provenance.get("model_ids", [])]
    return ProbVolume(head.plane, maps, head.spacing_mm,
                      {"model_ids": model_ids, "ensemble": True})


def threshold(v: ProbVolume, th: float) -> Volume3D:
    """Binary mask of strictly super-threshold probabilities."""
    if not 0.0 <= th <= 1.0:
        raise ValueError(f"threshold must lie in [0,1], got {th}")
    masks = [(v.maps[i] > th).astype(np.float64) for i in range(v.n_slices)]
    return volume_from_slices(v.plane, masks, v.spacing_mm, Modality.MASK)


def extract_contours(v: ProbVolume, k: int, th: float) -> list[np.ndarray]:
    """Closed iso-contours of slice k at level th, super-threshold on the left.

    Returned polylines are (m, 2) arrays of fractional (row, col) points
    with first point == last point. Padding below the level closes
    contours that would otherwise exit the slice.
    """
    if not 0.0 < th < 1.0:
        raise ValueError(f"contour level must lie in (0,1), got {th}")
    sl = v.slice_map(k)
    padded = np.pad(sl, 1, constant_values=-1.0)
    contours = measure.find_contours(padded, level=th, positive_orientation="high")
    return [c - 1.0 for c in contours]
