"""
Training the recurrent attention segmenter on one phantom
=========================================================

Builds the smallest usable model, trains it briefly on sequences from a
single cropped phantom, and inspects the checkpoint tournament.
"""

import numpy as np

from probseg import (ModelConfig, Plane, QcPolicy, TrainConfig, auto_roi,
                     extract_sequences, forward, generate_phantom, preprocess,
                     random_phantom_spec, select_test, train, validation_dsc)
from probseg.training import write_history_csv

patient = generate_phantom(random_phantom_spec(seed=9), patient_id="demo04")
cropped = preprocess(patient, auto_roi(patient, QcPolicy(bbox_size=32)))

seqs = extract_sequences(cropped, Plane.AXIAL)
train_seqs = [s for s in seqs if s.gtv.sum() > 0]
val_seqs = [s for s in select_test(seqs) if s.gtv.sum() > 0]
print("train/val sequences:", len(train_seqs), "/", len(val_seqs))

# tiny width keeps this demo in seconds; the desk profile uses width 8
model_cfg = ModelConfig(image_size=32, base_width=4, depth=3,
                        recurrent_hidden=8, seed=0)
train_cfg = TrainConfig(epochs=30, warmup_epochs=8)

result = train(train_seqs, val_seqs, model_cfg, train_cfg)

# -- history ------------------------------------------------------------------

print("\nepoch  train_loss  val_loss  val_dsc")
for row in result.history:
    print(" %3d    %8.4f  %8.4f  %7.4f" %
          (row.epoch, row.train_loss, row.val_loss, row.val_dsc_mean))

# -- checkpoint tournament ----------------------------------------------------

cks = result.checkpoints
print("\nlast epoch          :", cks.last.epoch)
print("best val epoch      : %d (dsc %.4f)" % (cks.best_val.epoch, cks.best_val.val_dsc))
print("second best (late)  : %d (dsc %.4f)" %
      (cks.second_best_post_warmup.epoch, cks.second_best_post_warmup.val_dsc))

# -- inference with the trained weights ---------------------------------------

probs = forward(cks.last.params, model_cfg, val_seqs[0])
print("\npredicted maps     :", probs.maps.shape,
      "range %.3f..%.3f" % (probs.maps.min(), probs.maps.max()))

dsc, std = validation_dsc(cks.last.params, model_cfg, val_seqs)
print("val DSC @ 0.5      : %.4f +/- %.4f" % (dsc, std))

# history rows serialize to a stable CSV (same floats, same bytes)
import io, tempfile, pathlib

with tempfile.TemporaryDirectory() as td:
    p = pathlib.Path(td) / "history.csv"
    write_history_csv(p, result.history)
    print("\nhistory.csv head   :", p.read_text().splitlines()[0])
