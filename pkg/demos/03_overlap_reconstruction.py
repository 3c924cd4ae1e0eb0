"""
Probability maps from overlapping sequence predictions
======================================================

Every slice k is predicted by up to three different sequences (as their
first, middle, and last position). Reconstruction averages those votes
per slice; the edge slices naturally get fewer votes.
"""

import numpy as np

from probseg import ProbSequence, prediction_counts, reconstruct, threshold

rng = np.random.default_rng(0)
n, h, w = 10, 4, 4

# fake per-sequence predictions for a 10-slice stack: 8 sequences
seqs = [ProbSequence(k, rng.uniform(size=(3, h, w))) for k in range(1, n - 1)]

# -- vote counts --------------------------------------------------------------

print("votes per slice  :", prediction_counts(n))

# -- the averaging is exactly accumulate-then-divide -------------------------

vol = reconstruct(seqs, n)
acc = np.zeros((n, h, w))
cnt = np.zeros(n)
for s in seqs:
    for j in range(3):
        acc[s.start_k - 1 + j] += s.maps[j]
        cnt[s.start_k - 1 + j] += 1
manual = acc / cnt[:, None, None]
print("max |vote avg - reconstruct| : %.2e" % np.abs(vol.maps - manual).max())

# -- slice accessors and thresholding -----------------------------------------

mid = vol.slice_map(5)
print("slice 5 mean prob: %.3f" % mid.mean())

mask = threshold(vol, 0.5)
print("mask voxels > .5 : %d of %d" % (int(mask.data.sum()), mask.data.size))

# strictly-greater convention: a slice pinned at exactly 0.5 stays out
flat = ProbSequence(1, np.full((3, h, w), 0.5))
pinned = reconstruct([flat], 3)
print("prob 0.5 @ th 0.5:", int(threshold(pinned, 0.5).data.sum()), "voxels kept")
