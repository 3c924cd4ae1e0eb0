"""Synthetic PET/CT head phantoms used as the canonical test-data source.

Each phantom is a head-sized ellipsoid with a bone shell, a bright brain
blob and a tumor blob on PET, and a matching tumor mask. Geometry is
specified in mm so the same spec scales across voxel spacings. Generation
is fully deterministic given the spec seed.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .volume import (
    HPV_STATUS,
    Modality,
    N_STAGES,
    PatientMeta,
    PatientRecord,
    T_STAGES,
    Volume3D,
)

__all__ = [
    "Ellipsoid",
    "Bridge",
    "PhantomSpec",
    "PhantomSpecError",
    "generate_phantom",
    "default_phantom_spec",
    "random_phantom_spec",
    "bridging_phantom_spec",
    "bone_leak_phantom_spec",
]


class PhantomSpecError(ValueError):
    """Raised for geometrically invalid phantom specifications."""


@dataclass(frozen=True)
class Ellipsoid:
    """Axis-aligned ellipsoid in mm coordinates."""

    center_mm: tuple[float, float, float]
    radii_mm: tuple[float, float, float]


@dataclass(frozen=True)
class Bridge:
    """Cylinder of elevated SUV connecting two points, used to fake tumor
    activity that touches the brain at low segmentation thresholds."""

    start_mm: tuple[float, float, float]
    end_mm: tuple[float, float, float]
    radius_mm: float
    suv: float


@dataclass(frozen=True)
class PhantomSpec:
    seed: int
    brain: Ellipsoid
    tumor: Ellipsoid
    dims: tuple[int, int, int] = (48, 48, 48)
    spacing_mm: tuple[float, float, float] = (4.0, 4.0, 4.0)
    brain_peak_suv: float = 8.0
    tumor_peak_suv: float = 5.5
    tumor_hu_offset: float = 40.0
    nodes: tuple[Ellipsoid, ...] = ()
    node_peak_suv: float = 4.0
    head: Ellipsoid | None = None
    bridge: Bridge | None = None
    noise_suv: float = 0.05
    noise_hu: float = 5.0
    background_suv: float = 0.4
    soft_tissue_hu: float = 40.0
    bone_hu: float = 700.0
    air_hu: float = -1000.0
    shell_start: float = 0.93
    max_overlap_fraction: float = 0.05

    def __post_init__(self):
        extent = tuple(d * s for d, s in zip(self.dims, self.spacing_mm))
        for name, blob in (("brain", self.brain), ("tumor", self.tumor),
                           *((f"node[{i}]", n) for i, n in enumerate(self.nodes))):
            if any(r <= 0 for r in blob.radii_mm):
                raise PhantomSpecError(f"{name} ellipsoid has degenerate radii "
                                       f"{blob.radii_mm}")
            for ax in range(3):
                c, r = blob.center_mm[ax], blob.radii_mm[ax]
                if c - r < 0 or c + r > extent[ax]:
                    raise PhantomSpecError(
                        f"{name} ellipsoid leaves the volume along axis {ax}: "
                        f"center {c} radius {r} vs extent {extent[ax]}")
        for name, peak in (("brain", self.brain_peak_suv),
                           ("tumor", self.tumor_peak_suv),
                           ("node", self.node_peak_suv)):
            if peak <= 0:
                raise PhantomSpecError(f"{name} peak SUV must be > 0, got {peak}")

    @property
    def extent_mm(self) -> tuple[float, float, float]:
        return tuple(d * s for d, s in zip(self.dims, self.spacing_mm))

    def head_ellipsoid(self) -> Ellipsoid:
        """The head outline; defaults to a near-volume-filling ellipsoid."""
        if self.head is not None:
            return self.head
        ex, ey, ez = self.extent_mm
        return Ellipsoid((ex / 2, ey / 2, ez / 2),
                         (ex / 2 - 2.0, ey / 2 - 2.0, ez / 2 - 2.0))


def _voxel_center_grids(dims, spacing):
    axes = [(np.arange(n) + 0.5) * s for n, s in zip(dims, spacing)]
    return np.meshgrid(*axes, indexing="ij")


def _rho_sq(ellipsoid: Ellipsoid, grids):
    acc = np.zeros_like(grids[0])
    for g, c, r in zip(grids, ellipsoid.center_mm, ellipsoid.radii_mm):
        acc = acc + ((g - c) / r) ** 2
    return acc


def _inside(ellipsoid: Ellipsoid, grids):
    return _rho_sq(ellipsoid, grids) <= 1.0


def _inside_bridge(bridge: Bridge, grids):
    p0 = np.asarray(bridge.start_mm, dtype=float)
    p1 = np.asarray(bridge.end_mm, dtype=float)
    axis = p1 - p0
    length_sq = float(axis @ axis)
    if length_sq == 0:
        raise PhantomSpecError("bridge start and end coincide")
    dx = [g - c for g, c in zip(grids, p0)]
    t = sum(d * a for d, a in zip(dx, axis)) / length_sq
    t = np.clip(t, 0.0, 1.0)
    dist_sq = sum((d - t * a) ** 2 for d, a in zip(dx, axis))
    return dist_sq <= bridge.radius_mm ** 2


def _round_f32(data: np.ndarray) -> np.ndarray:
    # keep values exactly representable in the f32le bundle payload
    return data.astype(np.float32).astype(np.float64)


def _derive_meta(spec: PhantomSpec) -> PatientMeta:
    rng = np.random.default_rng([spec.seed, 0x4D455441])
    rx, ry, rz = spec.tumor.radii_mm
    tumor_cm3 = 4.0 / 3.0 * np.pi * rx * ry * rz / 1000.0
    # larger primaries get higher T stages, mirroring clinical staging
    t_stage = T_STAGES[int(np.searchsorted([26.0, 32.0, 38.0], tumor_cm3))]
    n_stage = rng.choice(N_STAGES, p=[0.16, 0.11, 0.05, 0.33, 0.32, 0.03])
    return PatientMeta(
        gender="male" if rng.random() < 0.6 else "female",
        t_stage=t_stage,
        n_stage=str(n_stage),
        hpv=str(rng.choice(HPV_STATUS, p=[0.42, 0.42, 0.16])),
    )


def generate_phantom(spec: PhantomSpec, patient_id: str | None = None,
                     meta: PatientMeta | None = None) -> PatientRecord:
    """Rasterize ``spec`` into a co-registered CT / PET / GTV patient record.

    PET holds flat-top SUV blobs (brain, tumor, optional nodes and bridge)
    over a soft-tissue background plus Gaussian noise; CT holds air, soft
    tissue, a bone shell at the head boundary, and a tumor HU offset. The
    GTV mask is exactly the set of voxels inside the tumor ellipsoid.
    """
    grids = _voxel_center_grids(spec.dims, spec.spacing_mm)
    head = spec.head_ellipsoid()
    head_rho = _rho_sq(head, grids)
    in_head = head_rho <= 1.0
    in_shell = in_head & (head_rho >= spec.shell_start ** 2)
    in_brain = _inside(spec.brain, grids)
    in_tumor = _inside(spec.tumor, grids)

    tumor_count = int(in_tumor.sum())
    if tumor_count == 0:
        raise PhantomSpecError("tumor ellipsoid covers no voxel centers")
    overlap = int((in_tumor & in_brain).sum()) / tumor_count
    if overlap > spec.max_overlap_fraction:
        raise PhantomSpecError(
            f"brain/tumor ellipsoids overlap on {overlap:.1%} of the tumor, "
            f"above the allowed {spec.max_overlap_fraction:.1%}")

    rng = np.random.default_rng(spec.seed)

    ct = np.full(spec.dims, spec.air_hu)
    ct[in_head] = spec.soft_tissue_hu
    ct[in_shell] = spec.bone_hu
    ct[in_tumor] += spec.tumor_hu_offset
    ct = ct + rng.normal(0.0, spec.noise_hu, spec.dims)

    pet = np.where(in_head, spec.background_suv, 0.0)
    if spec.bridge is not None:
        pet[_inside_bridge(spec.bridge, grids)] = spec.bridge.suv
    for node in spec.nodes:
        pet[_inside(node, grids)] = spec.node_peak_suv
    pet[in_brain] = spec.brain_peak_suv
    pet[in_tumor] = spec.tumor_peak_suv
    pet = pet + rng.normal(0.0, spec.noise_suv, spec.dims)

    spacing = spec.spacing_mm
    record_id = patient_id if patient_id is not None else f"phantom-{spec.seed:04d}"
    return PatientRecord(
        id=record_id,
        ct=Volume3D(_round_f32(ct), spacing, Modality.CT),
        pet=Volume3D(_round_f32(pet), spacing, Modality.PET),
        gtv=Volume3D(in_tumor.astype(np.float64), spacing, Modality.MASK),
        meta=meta if meta is not None else _derive_meta(spec),
    )


def default_phantom_spec(seed: int = 0, **overrides) -> PhantomSpec:
    """Canonical clean desk-scale phantom: threshold 3 isolates the brain."""
    spec = PhantomSpec(
        seed=seed,
        brain=Ellipsoid((96.0, 96.0, 120.0), (73.0, 69.0, 48.0)),
        tumor=Ellipsoid((96.0, 96.0, 48.0), (24.0, 22.0, 15.0)),
    )
    return replace(spec, **overrides) if overrides else spec


def random_phantom_spec(seed: int, with_nodes: bool = True) -> PhantomSpec:
    """Jittered clean phantom for cohort generation.

    Jitter ranges are chosen so that QC at SUV threshold 3 passes, the
    brain/tumor voxel gap survives, and every plane keeps at least one
    slice whose tumor area exceeds 5% of a 128 mm crop.
    """
    rng = np.random.default_rng([seed, 0x5048414E])
    brain = Ellipsoid(
        (96.0, 96.0, 120.0),
        (rng.uniform(71, 75), rng.uniform(68, 71), rng.uniform(46, 49)),
    )
    tumor = Ellipsoid(
        (96.0 + rng.uniform(-8, 8), 96.0 + rng.uniform(-8, 8), rng.uniform(46, 50)),
        (rng.uniform(21, 26), rng.uniform(20, 25), rng.uniform(14, 16)),
    )
    nodes = ()
    if with_nodes and rng.random() < 0.5:
        side = rng.choice([-1.0, 1.0])
        radius = rng.uniform(6, 10)
        nodes = (Ellipsoid((96.0 + side * 38.0, 96.0 + rng.uniform(18, 30),
                            rng.uniform(56, 64)),
                           (radius, radius, radius)),)
    return PhantomSpec(
        seed=seed,
        brain=brain,
        tumor=tumor,
        nodes=nodes,
        brain_peak_suv=rng.uniform(7.5, 8.5),
        tumor_peak_suv=rng.uniform(4.8, 6.5),
        node_peak_suv=rng.uniform(3.5, 4.2),
    )


def bridging_phantom_spec(seed: int = 0) -> PhantomSpec:
    """Phantom whose tumor activity touches the brain below SUV 5.

    The SUV-4.5 cylinder merges tumor and brain into one component at
    thresholds 3 and 4; at 5 the bridge drops out and the bare brain
    segments cleanly.
    """
    return default_phantom_spec(
        seed,
        tumor=Ellipsoid((96.0, 96.0, 40.0), (32.0, 30.0, 26.0)),
        bridge=Bridge((96.0, 96.0, 56.0), (96.0, 96.0, 84.0), 10.0, 4.5),
    )


def bone_leak_phantom_spec(seed: int = 0) -> PhantomSpec:
    """Phantom whose PET brain blob reaches into the bone shell, so the
    brain mask picks up HU ~700 voxels and fails the hu_max QC check."""
    return default_phantom_spec(
        seed,
        brain=Ellipsoid((96.0, 96.0, 120.0), (86.0, 68.0, 52.0)),
    )
