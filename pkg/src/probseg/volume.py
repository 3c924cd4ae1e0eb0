"""Core 3D volume and slice types plus the on-disk volume-bundle format.

A volume is a dense scalar grid indexed ``[x, y, z]`` with per-axis voxel
spacing in mm. Slicing is plane-wise (axial / coronal / sagittal) with
1-based slice indices in every public interface.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

__all__ = [
    "Modality",
    "Plane",
    "Volume3D",
    "PatientMeta",
    "PatientRecord",
    "BundleError",
    "BundleHeaderError",
    "BundleSizeError",
    "slice_volume",
    "n_slices",
    "volume_from_slices",
    "write_bundle",
    "read_bundle",
]

BUNDLE_SCHEMA_VERSION = 1

T_STAGES = ("T1", "T2", "T3", "T4")
N_STAGES = ("N0", "N1", "N2a", "N2b", "N2c", "N3")
HPV_STATUS = ("pos", "neg", "unknown")


class Modality(str, Enum):
    CT = "CT"
    PET = "PET"
    MASK = "MASK"
    PROB = "PROB"


class Plane(str, Enum):
    """Slicing orientation. ``axis`` is the normal axis into the [x,y,z] grid."""

    AXIAL = "axial"
    CORONAL = "coronal"
    SAGITTAL = "sagittal"

    @property
    def axis(self) -> int:
        return {Plane.SAGITTAL: 0, Plane.CORONAL: 1, Plane.AXIAL: 2}[self]

    @classmethod
    def parse(cls, name: str) -> "Plane":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown plane {name!r}, expected one of "
                             f"{[p.value for p in cls]}") from None


class BundleError(ValueError):
    """Base error for malformed volume bundles."""


class BundleHeaderError(BundleError):
    """Header JSON is missing, unparseable, or carries bad fields."""


class BundleSizeError(BundleError):
    """Header dims do not match the raw payload length."""


def _validate_data(data: np.ndarray, modality: Modality) -> None:
    if data.ndim != 3:
        raise ValueError(f"volume data must be 3D, got shape {data.shape}")
    if not np.isfinite(data).all():
        raise ValueError(f"{modality.value} volume contains NaN/Inf")
    if modality is Modality.MASK:
        if not np.logical_or(data == 0.0, data == 1.0).all():
            raise ValueError("MASK volume must contain only {0, 1}")
    elif modality is Modality.PROB:
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("PROB volume must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class Volume3D:
    """Immutable dense scalar grid with spacing metadata.

    ``data`` is float64 indexed ``[x, y, z]``; MASK volumes hold only {0, 1}
    and PROB volumes lie in [0, 1].
    """

    data: np.ndarray
    spacing_mm: tuple[float, float, float]
    modality: Modality

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        _validate_data(data, self.modality)
        if len(self.spacing_mm) != 3 or any(s <= 0 for s in self.spacing_mm):
            raise ValueError(f"spacing must be 3 positive floats, got {self.spacing_mm}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "spacing_mm", tuple(float(s) for s in self.spacing_mm))

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.data.shape

    @property
    def voxel_volume_mm3(self) -> float:
        sx, sy, sz = self.spacing_mm
        return sx * sy * sz

    def with_data(self, data: np.ndarray, modality: Modality | None = None) -> "Volume3D":
        """New volume sharing spacing, replacing data (and optionally modality)."""
        return Volume3D(data, self.spacing_mm, modality or self.modality)


@dataclass(frozen=True)
class PatientMeta:
    gender: str = "unknown"
    t_stage: str = "T1"
    n_stage: str = "N0"
    hpv: str = "unknown"

    def __post_init__(self):
        if self.t_stage not in T_STAGES:
            raise ValueError(f"t_stage must be one of {T_STAGES}, got {self.t_stage!r}")
        if self.n_stage not in N_STAGES:
            raise ValueError(f"n_stage must be one of {N_STAGES}, got {self.n_stage!r}")
        if self.hpv not in HPV_STATUS:
            raise ValueError(f"hpv must be one of {HPV_STATUS}, got {self.hpv!r}")

    def as_dict(self) -> dict:
        return {"gender": self.gender, "t_stage": self.t_stage,
                "n_stage": self.n_stage, "hpv": self.hpv}


@dataclass(frozen=True, eq=False)
class PatientRecord:
    """Co-registered CT / PET / tumor-mask triple plus staging metadata."""

    id: str
    ct: Volume3D
    pet: Volume3D
    gtv: Volume3D
    meta: PatientMeta = field(default_factory=PatientMeta)

    def __post_init__(self):
        if self.ct.modality is not Modality.CT:
            raise TypeError("ct volume must have CT modality")
        if self.pet.modality is not Modality.PET:
            raise TypeError("pet volume must have PET modality")
        if self.gtv.modality is not Modality.MASK:
            raise TypeError("gtv volume must have MASK modality")
        if not (self.ct.dims == self.pet.dims == self.gtv.dims):
            raise ValueError("ct/pet/gtv dims differ; volumes must be co-registered")
        if not (self.ct.spacing_mm == self.pet.spacing_mm == self.gtv.spacing_mm):
            raise ValueError("ct/pet/gtv spacing differs")


def n_slices(volume: Volume3D, plane: Plane) -> int:
    """Number of slices of ``volume`` along ``plane`` (equals the dim on its axis)."""
    return volume.dims[plane.axis]


def slice_volume(volume: Volume3D, plane: Plane, k: int) -> np.ndarray:
    """Extract slice ``k`` (1-based) of ``volume`` along ``plane``.

    Returns a 2D copy; axial slices are indexed [x, y], coronal [x, z],
    sagittal [y, z]. Writing through the result does not touch the volume.
    """
    bound = n_slices(volume, plane)
    if not 1 <= k <= bound:
        raise IndexError(
            f"slice index {k} out of range for {plane.value} plane (1..{bound})")
    return np.take(volume.data, k - 1, axis=plane.axis).copy()


def volume_from_slices(plane: Plane, slices, spacing, modality: Modality) -> Volume3D:
    """Reassemble a volume from its ordered per-plane slices (inverse of slicing)."""
    stack = np.stack(list(slices), axis=plane.axis)
    return Volume3D(stack, spacing, modality)


def _bundle_paths(path) -> tuple[Path, Path]:
    base = Path(path)
    if base.suffix in (".json", ".raw"):
        base = base.with_suffix("")
    return base.with_suffix(".json"), base.with_suffix(".raw")


def write_bundle(volume: Volume3D, path) -> None:
    """Write ``volume`` as a two-file bundle ``<path>.json`` + ``<path>.raw``.

    The payload is little-endian float32 in x-fastest order; values must
    survive the float32 round-trip for re-reads to be bit-exact.
    """
    header_path, raw_path = _bundle_paths(path)
    header = {
        "schema_version": BUNDLE_SCHEMA_VERSION,
        "dims": list(volume.dims),
        "spacing_mm": list(volume.spacing_mm),
        "modality": volume.modality.value,
        "dtype": "f32le",
    }
    header_path.parent.mkdir(parents=True, exist_ok=True)
    header_path.write_text(json.dumps(header, indent=1) + "\n")
    raw_path.write_bytes(volume.data.astype("<f4").tobytes(order="F"))


def read_bundle(path) -> Volume3D:
    """Read a volume bundle written by :func:`write_bundle`."""
    header_path, raw_path = _bundle_paths(path)
    try:
        header = json.loads(header_path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise BundleHeaderError(f"cannot parse bundle header {header_path}: {exc}") from exc
    if not isinstance(header, dict):
        raise BundleHeaderError(f"bundle header {header_path} is not a JSON object")
    missing = {"schema_version", "dims", "spacing_mm", "modality", "dtype"} - header.keys()
    if missing:
        raise BundleHeaderError(f"bundle header missing fields {sorted(missing)}")
    if header["schema_version"] != BUNDLE_SCHEMA_VERSION:
        raise BundleHeaderError(f"unsupported schema_version {header['schema_version']}")
    if header["dtype"] != "f32le":
        raise BundleHeaderError(f"unsupported dtype {header['dtype']!r}")
    dims = header["dims"]
    if (not isinstance(dims, list) or len(dims) != 3
            or any((not isinstance(d, int)) or d <= 0 for d in dims)):
        raise BundleHeaderError(f"bad dims {dims!r}, expected 3 positive integers")
    try:
        modality = Modality(header["modality"])
    except ValueError:
        raise BundleHeaderError(
            f"unknown modality tag {header['modality']!r}") from None
    try:
        payload = np.fromfile(raw_path, dtype="<f4")
    except OSError as exc:
        raise BundleError(f"cannot read payload {raw_path}: {exc}") from exc
    expected = dims[0] * dims[1] * dims[2]
    if payload.size != expected:
        raise BundleSizeError(
            f"payload holds {payload.size} voxels, header dims {tuple(dims)} "
            f"require {expected}")
    data = payload.astype(np.float64).reshape(dims, order="F")
    return Volume3D(data, tuple(header["spacing_mm"]), modality)
