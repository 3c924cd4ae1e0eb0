"""
Synthetic PET/CT phantoms and the brain QC ladder
=================================================

Generates a phantom patient, inspects its intensity statistics, then runs
the automatic ROI stage on both an ordinary phantom and one whose tumor
bridges into the brain at low SUV cutoffs.
"""

import numpy as np

from probseg import (QcPolicy, RoiStatus, auto_roi, bridging_phantom_spec,
                     generate_phantom, random_phantom_spec)

# -- an ordinary phantom ----------------------------------------------------

spec = random_phantom_spec(seed=42)
patient = generate_phantom(spec, patient_id="demo01")

print("volume dims      :", patient.ct.dims)
print("voxel spacing mm :", patient.ct.spacing_mm)
print("CT range (HU)    : %.0f .. %.0f" % (patient.ct.data.min(), patient.ct.data.max()))
print("PET range (SUV)  : %.2f .. %.2f" % (patient.pet.data.min(), patient.pet.data.max()))
print("tumor voxels     :", int(patient.gtv.data.sum()))
print("T/N staging      :", patient.meta.t_stage, patient.meta.n_stage)

# -- QC on the ordinary phantom --------------------------------------------

# desk-size boxes; clinical defaults use a 144 box on real resolutions
policy = QcPolicy(bbox_size=32)
roi = auto_roi(patient, policy)
print("\nQC status        :", roi.status.value)
print("SUV threshold    :", roi.suv_threshold)
print("brain volume cm3 : %.0f" % roi.qc.brain_volume_cm3)

from probseg import preprocess

cropped = preprocess(patient, roi)
print("crop shape       :", cropped.ct.dims)

# -- a phantom built to fool the first threshold ----------------------------

# its tumor touches the brain, so SUV > 3 merges both into one component
# and the measured "brain" volume lands outside the acceptance band; the
# ladder retries at higher cutoffs until the components separate
bridge = generate_phantom(bridging_phantom_spec(seed=3), patient_id="bridge")
tight = QcPolicy(brain_volume_cm3=(900.0, 1050.0), bbox_size=32)
roi2 = auto_roi(bridge, tight)
print("\nbridging phantom :", roi2.status.value)
print("escalated to SUV :", roi2.suv_threshold)
assert roi2.status is RoiStatus.THRESHOLD_ADJUSTED

# -- what failure looks like -------------------------------------------------

# an empty scan never yields an acceptable brain at any rung
empty = generate_phantom(random_phantom_spec(seed=1), patient_id="cold")
cold_pet = empty.pet.data * 0.0
from probseg import Modality, PatientRecord, Volume3D

cold = PatientRecord(
    "cold", empty.ct,
    Volume3D(cold_pet, empty.pet.spacing_mm, Modality.PET),
    empty.gtv, empty.meta)
roi3 = auto_roi(cold, policy)
print("\nempty PET scan   :", roi3.status.value)
assert roi3.status is RoiStatus.FAILED
