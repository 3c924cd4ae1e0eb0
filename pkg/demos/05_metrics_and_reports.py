"""
Threshold sweeps, cohort statistics, and plot payloads
======================================================

Runs the evaluation metrics over a synthetic probability volume whose
errors are known by construction, then shows the report layers built on
top of the per-patient sweep rows.
"""

import numpy as np

from probseg import (Modality, PatientMeta, Plane, ProbVolume, SweepConfig,
                     Volume3D, cohort_report, dsc_slice, precision_recall,
                     sweep)
from probseg.metrics import boxplot_data, scatter_data

rng = np.random.default_rng(1)

# ground truth: a bright square on 12 of 20 slices
n, side = 20, 24
gt = np.zeros((side, side, n))
gt[8:16, 8:16, 4:16] = 1.0
gt_vol = Volume3D(gt, (2.0, 2.0, 2.0), Modality.MASK)

# prediction: confident inside the square, noisy elsewhere
maps = np.clip(rng.uniform(0.0, 0.35, size=(n, side, side)), 0, 1)
maps[4:16, 8:16, 8:16] = rng.uniform(0.6, 1.0, size=(12, 8, 8))
prob = ProbVolume(Plane.AXIAL, maps, spacing_mm=(2.0, 2.0, 2.0))

# -- slice metric -------------------------------------------------------------

mid_pred = maps[10] > 0.5
mid_gt = gt[:, :, 10]
print("slice 11 DSC     : %.4f" % dsc_slice(mid_pred, mid_gt))
print("empty-empty DSC  : %.4f" % dsc_slice(np.zeros((4, 4)), np.zeros((4, 4))))

# -- volume-aggregated precision/recall ---------------------------------------

pr = precision_recall(prob, gt_vol, 0.5)
print("precision/recall : %.4f / %.4f (defaulted: %s/%s)" %
      (pr.precision, pr.recall, pr.precision_defaulted, pr.recall_defaulted))

# -- the 9-point threshold sweep ----------------------------------------------

rows = sweep(prob, gt_vol, SweepConfig())
print("\n th   mean_dsc  precision  recall  pos_pixels")
for r in rows:
    print(" %.1f   %.4f    %.4f   %.4f  %8d" %
          (r["threshold"], r["mean_dsc"], r["precision"], r["recall"],
           r["pos_pixels"]))

# recall and positive pixels can only fall as the threshold rises
pp = [r["pos_pixels"] for r in rows]
assert all(a >= b for a, b in zip(pp, pp[1:]))

# -- cohort layers ------------------------------------------------------------

# tag the rows the way the pipeline does, once per patient/plane
tagged = [{"patient": "demo", "plane": "axial", **r} for r in rows]
stats = cohort_report(tagged, {"demo": PatientMeta(t_stage="T2", n_stage="N1")})
at_09 = [s for s in stats if s.threshold == 0.9 and s.group == "overall"]
print("\ncohort @ 0.9     :", at_09[0].formatted)

groups = sorted({s.group for s in stats})
print("groups           :", ", ".join(groups))

boxes = boxplot_data(tagged)
b = [x for x in boxes if x["threshold"] == 0.9][0]
print("boxplot @ 0.9    : mean %.3f median %.3f IQR [%.3f, %.3f]" %
      (b["mean"], b["median"], b["q1"], b["q3"]))

points = scatter_data(tagged)
print("scatter tuple    :", {k: round(v, 4) if isinstance(v, float) else v
                             for k, v in points[-1].items()})
