"""
Slice sequences and class-balanced training selection
=====================================================

Shows how a cropped patient becomes overlapping 3-slice sequences, and how
the training selector keeps every tumor-rich sequence while thinning the
near-empty ones.
"""

import numpy as np

from probseg import (Plane, QcPolicy, SelectionPolicy, auto_roi,
                     extract_sequences, generate_phantom, preprocess,
                     random_phantom_spec, select_test, select_training)
from probseg.sequences import first_slice_tumor_fraction

patient = generate_phantom(random_phantom_spec(seed=5), patient_id="demo02")
roi = auto_roi(patient, QcPolicy(bbox_size=32))
cropped = preprocess(patient, roi)

# -- overlapping sequences ---------------------------------------------------

# a 32-slice stack gives 30 sequences; neighbors share two slices
for plane in (Plane.AXIAL, Plane.CORONAL, Plane.SAGITTAL):
    seqs = extract_sequences(cropped, plane)
    print("%-8s : %d sequences, start_k %d..%d" %
          (plane.value, len(seqs), seqs[0].start_k, seqs[-1].start_k))

axial = extract_sequences(cropped, Plane.AXIAL)
shared = np.array_equal(axial[0].pet[1:], axial[1].pet[:2])
print("adjacent overlap :", shared)

# -- tumor-fraction profile --------------------------------------------------

fracs = [first_slice_tumor_fraction(s) for s in axial]
print("\nfirst-slice tumor fraction along the stack:")
print("  max %.3f, slices above the 5%% keep-line: %d of %d" %
      (max(fracs), sum(f > 0.05 for f in fracs), len(fracs)))

# -- selection ----------------------------------------------------------------

# tumor-rich sequences always pass; negatives and low-tumor ones are
# subsampled so they end up a small minority of the training set
policy = SelectionPolicy(keep_fraction_negative=0.25,
                         keep_fraction_low_tumor=0.25, rng_seed=0)
kept = select_training(axial, policy)
print("\nselect_training  : kept %d of %d" % (len(kept), len(axial)))

rich = [s for s in kept if first_slice_tumor_fraction(s) > 0.05]
print("tumor-rich kept  : %d (all of them)" % len(rich))

# evaluation never drops anything
test = select_test(axial)
print("select_test      : kept %d of %d" % (len(test), len(axial)))
assert len(test) == len(axial)
