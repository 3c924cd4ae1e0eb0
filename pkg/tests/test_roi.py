"""Brain segmentation, QC gating, box placement, and normalization ops."""

import numpy as np
import pytest

from probseg.phantom import (
    bone_leak_phantom_spec,
    bridging_phantom_spec,
    default_phantom_spec,
    generate_phantom,
)
from probseg.roi import (
    QcPolicy,
    RoiStatus,
    auto_roi,
    clamp_pet,
    crop,
    preprocess,
    qc_brain,
    qc_report_line,
    segment_brain,
    suv_convert,
    window_ct,
    znorm,
)
from probseg.volume import Modality, PatientRecord, Volume3D


def _pet(data, spacing=(1.0, 1.0, 1.0)):
    return Volume3D(np.asarray(data, dtype=float), spacing, Modality.PET)


def _ct(data, spacing=(1.0, 1.0, 1.0)):
    return Volume3D(np.asarray(data, dtype=float), spacing, Modality.CT)


def _components_by_flood_fill(field):
    """All 6-connected components of a binary field, found by explicit BFS.

    Oracle for segment_brain's largest-component choice.
    """
    visited = np.zeros(field.shape, dtype=bool)
    components = []
    dims = field.shape
    for start in np.argwhere(field):
        start = tuple(start)
        if visited[start]:
            continue
        comp = np.zeros(field.shape, dtype=bool)
        queue = [start]
        visited[start] = True
        while queue:
            x, y, z = queue.pop()
            comp[x, y, z] = True
            for dx, dy, dz in ((1, 0, 0), (-1, 0, 0), (0, 1, 0),
                               (0, -1, 0), (0, 0, 1), (0, 0, -1)):
                nx, ny, nz = x + dx, y + dy, z + dz
                if (0 <= nx < dims[0] and 0 <= ny < dims[1] and 0 <= nz < dims[2]
                        and field[nx, ny, nz] and not visited[nx, ny, nz]):
                    visited[nx, ny, nz] = True
                    queue.append((nx, ny, nz))
        components.append(comp)
    return components


def test_segment_brain_matches_flood_fill_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(20):
        p = rng.uniform(0.05, 0.35)
        field = rng.random((12, 12, 12)) < p
        pet = _pet(np.where(field, 10.0, 0.0))
        got = segment_brain(pet, 3.0).data.astype(bool)
        comps = _components_by_flood_fill(field)
        if not comps:
            assert got.sum() == 0
            continue
        biggest = max(c.sum() for c in comps)
        assert got.sum() == biggest
        assert any(np.array_equal(got, c) for c in comps if c.sum() == biggest)


def test_segment_brain_single_blob():
    data = np.zeros((8, 8, 8))
    data[2:5, 2:5, 2:5] = 10.0
    mask = segment_brain(_pet(data), 3.0)
    np.testing.assert_array_equal(mask.data, (data > 3.0).astype(float))


def test_segment_brain_keeps_larger_of_two_blobs():
    data = np.zeros((20, 10, 10))
    data[1:6, 1:6, 1:5] = 9.0  # 100 voxels
    data[12:17, 1:5, 1:3] = 9.0  # 40 voxels
    mask = segment_brain(_pet(data), 3.0).data
    assert mask.sum() == 100
    assert mask[2, 2, 2] == 1.0 and mask[13, 2, 1] == 0.0


def test_segment_brain_threshold_is_strict():
    data = np.zeros((4, 4, 4))
    data[0, 0, 0] = 3.0
    data[1, 1, 1] = 3.0001
    mask = segment_brain(_pet(data), 3.0).data
    assert mask[0, 0, 0] == 0.0 and mask[1, 1, 1] == 1.0


def test_segment_brain_rejects_non_pet():
    with pytest.raises(TypeError):
        segment_brain(_ct(np.zeros((4, 4, 4))), 3.0)


def test_qc_brain_unit_conversion_and_stats():
    mask = Volume3D(np.pad(np.ones((10, 10, 10)), ((0, 2),) * 3),
                    (1.0, 1.0, 1.0), Modality.MASK)
    ct = _ct(np.full((12, 12, 12), 55.0))
    qc = qc_brain(mask, ct)
    assert qc.brain_volume_cm3 == pytest.approx(1.0)
    assert qc.hu_max == 55.0 and qc.hu_mean == 55.0 and qc.hu_std == 0.0


def test_qc_brain_population_std_oracle():
    rng = np.random.default_rng(5)
    sel = rng.random((6, 6, 6)) < 0.4
    ct_data = rng.normal(40.0, 30.0, (6, 6, 6))
    qc = qc_brain(Volume3D(sel.astype(float), (1, 1, 1), Modality.MASK), _ct(ct_data))
    vals = [ct_data[i, j, k] for i, j, k in np.argwhere(sel)]
    mean = sum(vals) / len(vals)
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    assert qc.hu_mean == pytest.approx(mean, rel=1e-12)
    assert qc.hu_std == pytest.approx(var ** 0.5, rel=1e-12)
    assert qc.hu_max == max(vals)


def test_qc_brain_rejects_empty_mask():
    mask = Volume3D(np.zeros((4, 4, 4)), (1, 1, 1), Modality.MASK)
    with pytest.raises(ValueError):
        qc_brain(mask, _ct(np.zeros((4, 4, 4))))


def test_auto_roi_accepts_clean_phantom_at_base_threshold():
    rec = generate_phantom(default_phantom_spec(3))
    policy = QcPolicy(bbox_size=32)
    roi = auto_roi(rec, policy)
    assert roi.status is RoiStatus.ACCEPTED
    assert roi.suv_threshold == 3.0
    assert 900.0 <= roi.qc.brain_volume_cm3 <= 1600.0
    assert roi.qc.hu_max <= 300.0
    assert roi.brain_mask.data.sum() > 0
    again = auto_roi(rec, policy)
    assert again.bbox_origin == roi.bbox_origin
    np.testing.assert_array_equal(again.brain_mask.data, roi.brain_mask.data)


def test_auto_roi_escalates_over_suv_bridge():
    # tumor activity touches the brain below SUV 5; a tightened volume
    # band makes the merged component fail until the bridge drops out
    rec = generate_phantom(bridging_phantom_spec(4))
    policy = QcPolicy(brain_volume_cm3=(900.0, 1050.0), bbox_size=32)
    roi = auto_roi(rec, policy)
    assert roi.status is RoiStatus.THRESHOLD_ADJUSTED
    assert roi.suv_threshold == 5.0
    assert 900.0 <= roi.qc.brain_volume_cm3 <= 1050.0


def test_auto_roi_flags_bone_leak():
    rec = generate_phantom(bone_leak_phantom_spec(7))
    roi = auto_roi(rec, QcPolicy(bbox_size=32))
    assert roi.status is RoiStatus.FAILED
    assert roi.qc.hu_max > 300.0


def test_auto_roi_fails_on_cold_pet():
    dims = (8, 8, 8)
    rec = PatientRecord(
        "cold",
        _ct(np.zeros(dims)),
        _pet(np.zeros(dims)),
        Volume3D(np.zeros(dims), (1, 1, 1), Modality.MASK),
    )
    roi = auto_roi(rec, QcPolicy(bbox_size=4))
    assert roi.status is RoiStatus.FAILED
    assert roi.qc.brain_volume_cm3 == 0.0
    assert np.isnan(roi.qc.hu_max)


def _loose_policy(size, offset=(0, 0, 0)):
    return QcPolicy(brain_volume_cm3=(0.0, 1e9), hu_max_cap=1e9,
                    bbox_size=size, bbox_offset=offset)


def test_bbox_top_aligns_to_centroid():
    data = np.zeros((30, 30, 30))
    data[10:13, 14:17, 20:23] = 9.0  # centroid (11, 15, 21)
    rec = PatientRecord("p", _ct(np.zeros(data.shape)), _pet(data),
                        Volume3D(np.zeros(data.shape), (1, 1, 1), Modality.MASK))
    roi = auto_roi(rec, _loose_policy(8))
    assert roi.bbox_origin == (11 - 4, 15 - 4, 21 - 7)
    shifted = auto_roi(rec, _loose_policy(8, offset=(2, -1, -3)))
    assert shifted.bbox_origin == (11 - 4 + 2, 15 - 4 - 1, 21 - 7 - 3)


def test_bbox_clamped_to_volume():
    data = np.zeros((20, 20, 20))
    data[0:2, 18:20, 1:3] = 9.0
    rec = PatientRecord("p", _ct(np.zeros(data.shape)), _pet(data),
                        Volume3D(np.zeros(data.shape), (1, 1, 1), Modality.MASK))
    roi = auto_roi(rec, _loose_policy(12))
    for o in roi.bbox_origin:
        assert 0 <= o <= 20 - 12


def test_crop_constant_and_idempotent():
    rng = np.random.default_rng(8)
    data = rng.standard_normal((20, 20, 20))
    rec = PatientRecord("p", _ct(data), _pet(np.abs(data)),
                        Volume3D(np.zeros(data.shape), (1, 1, 1), Modality.MASK))
    roi = auto_roi(rec, _loose_policy(10))
    const = crop(_ct(np.full((20, 20, 20), 7.0)), roi)
    assert const.dims == (10, 10, 10)
    np.testing.assert_array_equal(const.data, np.full((10, 10, 10), 7.0))

    once = crop(_ct(data), roi)
    again = crop(once, type(roi)(roi.suv_threshold, roi.brain_mask, (0, 0, 0),
                                 roi.bbox_size, roi.qc, roi.status))
    np.testing.assert_array_equal(again.data, once.data)


def test_crop_zero_pads_outside_volume():
    data = np.ones((6, 6, 6))
    vol = _ct(data)
    roi_like = auto_roi(
        PatientRecord("p", vol, _pet(data), Volume3D(np.zeros((6, 6, 6)), (1, 1, 1),
                                                     Modality.MASK)),
        _loose_policy(6))
    shifted = type(roi_like)(3.0, roi_like.brain_mask, (-2, 0, 4), 6,
                             roi_like.qc, roi_like.status)
    out = crop(vol, shifted).data
    assert out[0, 0, 0] == 0.0  # x pad region
    assert out[2, 0, 0] == 1.0
    assert out[2, 0, 2] == 0.0  # z pad region (origin beyond extent)
    assert out[2, 0, 1] == 1.0


def test_crop_preserves_interior_tumor():
    rec = generate_phantom(default_phantom_spec(12))
    roi = auto_roi(rec, QcPolicy(bbox_size=32))
    cropped = crop(rec.gtv, roi)
    assert cropped.data.sum() == rec.gtv.data.sum()


def test_window_ct_bounds_and_idempotence():
    vals = _ct([[[-1000.0, 100.0, 700.0]]])
    out = window_ct(vals)
    np.testing.assert_array_equal(out.data.ravel(), [-135.0, 100.0, 215.0])
    np.testing.assert_array_equal(window_ct(out).data, out.data)
    with pytest.raises(ValueError):
        window_ct(vals, window=0.0)


def test_clamp_pet_zeroes_negatives():
    out = clamp_pet(_pet([[[-0.5, 4.2, 0.0]]]))
    np.testing.assert_array_equal(out.data.ravel(), [0.0, 4.2, 0.0])
    all_neg = clamp_pet(_pet(-np.ones((3, 3, 3))))
    np.testing.assert_array_equal(all_neg.data, np.zeros((3, 3, 3)))
    np.testing.assert_array_equal(clamp_pet(all_neg).data, all_neg.data)


def test_znorm_statistics_and_affine_invariance():
    rng = np.random.default_rng(77)
    data = rng.normal(12.0, 5.0, (10, 10, 10))
    out = znorm(_ct(data))
    assert abs(out.data.mean()) < 1e-9
    assert abs(out.data.std() - 1.0) < 1e-9
    affine = znorm(_ct(3.5 * data + 11.0))
    np.testing.assert_allclose(affine.data, out.data, atol=1e-9)
    np.testing.assert_allclose(znorm(out).data, out.data, atol=1e-9)
    with pytest.raises(ValueError):
        znorm(_ct(np.full((4, 4, 4), 3.0)))


def test_crop_commutes_with_pointwise_ops():
    rec = generate_phantom(default_phantom_spec(15))
    roi = auto_roi(rec, QcPolicy(bbox_size=32))
    a = window_ct(crop(rec.ct, roi))
    b = crop(window_ct(rec.ct), roi)
    np.testing.assert_array_equal(a.data, b.data)
    c = clamp_pet(crop(rec.pet, roi))
    d = crop(clamp_pet(rec.pet), roi)
    np.testing.assert_array_equal(c.data, d.data)


def test_suv_convert():
    raw = _pet(np.full((2, 2, 2), 5000.0))
    out = suv_convert(raw, weight_kg=70.0, dose_bq=350e6, decay_factor=1.0)
    np.testing.assert_allclose(out.data, 1.0)
    doubled = suv_convert(raw, weight_kg=140.0, dose_bq=350e6, decay_factor=1.0)
    np.testing.assert_allclose(doubled.data, 2.0 * out.data)
    zeros = suv_convert(_pet(np.zeros((2, 2, 2))), 70.0, 350e6, 1.0)
    assert zeros.data.sum() == 0.0
    with pytest.raises(ValueError):
        suv_convert(raw, -1.0, 350e6, 1.0)
    with pytest.raises(ValueError):
        suv_convert(raw, 70.0, 0.0, 1.0)


def test_preprocess_produces_normalized_crops():
    rec = generate_phantom(default_phantom_spec(21))
    roi = auto_roi(rec, QcPolicy(bbox_size=32))
    prep = preprocess(rec, roi)
    assert prep.ct.dims == (32, 32, 32)
    assert abs(prep.ct.data.mean()) < 1e-9
    assert abs(prep.pet.data.std() - 1.0) < 1e-9
    assert set(np.unique(prep.gtv.data)) <= {0.0, 1.0}
    assert prep.gtv.data.sum() == rec.gtv.data.sum()
    assert prep.meta == rec.meta


def test_qc_report_line_shape():
    rec = generate_phantom(default_phantom_spec(2))
    roi = auto_roi(rec, QcPolicy(bbox_size=32))
    line = qc_report_line(rec.id, roi)
    assert set(line) == {"id", "threshold", "status", "brain_volume_cm3",
                         "hu_max", "hu_mean", "hu_std", "bbox_origin"}
    assert line["status"] == "Accepted"
    assert isinstance(line["bbox_origin"], list) and len(line["bbox_origin"]) == 3
