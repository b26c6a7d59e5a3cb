"""Privately learning thresholds and axis-aligned boxes.

Both learners reduce to interior-point searches on slices of the sample, so
their sample complexity inherits the iterated-log dependence on the domain.
"""

import numpy as np

from slicedp import (
    LabeledSample,
    Universe,
    boundary_window_size,
    learn_rectangles,
    learn_threshold_realizable,
    rectangle_gate_threshold,
    threshold_sample_size,
)

rng = np.random.default_rng(23)
u = Universe(16)

print("== threshold: sample size budget ==")
xi, beta, eps, delta = 0.2, 0.2, 1.0, 0.5
window = boundary_window_size(u, eps, delta)
n = threshold_sample_size(u, xi, beta, eps, delta)
print(f"  boundary window {window}, required sample {n} "
      f"(error {xi}, confidence {1 - beta})")

print()
print("== threshold: plant, learn, score ==")
true_cut = 39000
points = rng.integers(0, u.size, size=n, dtype=np.uint64)
labels = (points < true_cut).astype(np.int8)
hyp = learn_threshold_realizable(LabeledSample(points, labels, u),
                                 xi, beta, eps, delta, rng)
fresh = rng.integers(0, u.size, size=50000, dtype=np.uint64)
err = np.mean(hyp.predict(fresh) != (fresh < true_cut))
print(f"  true cut {true_cut}, learned {hyp.threshold}, "
      f"fresh-sample error {err:.4f}")

print()
print("== boxes: the gate decides zero vs learn ==")
d = 2
gate = rectangle_gate_threshold(u, d, eps, delta)
print(f"  d={d}: noisy positive count must clear {gate:.1f}")

# a handful of positives cannot clear the gate; the all-zero box comes back
few_pts = rng.integers(0, u.size, size=(300, d), dtype=np.uint64)
few = learn_rectangles(LabeledSample(few_pts, np.ones(300, dtype=np.int8), u),
                       eps, delta, rng)
print(f"  300 positives: zero hypothesis = {few.zero}")

print()
print("== boxes: planted rectangle ==")
box = [(12000, 30000), (41000, 55000)]
n_pos = int(40 * d * 2800)

def draw(inside, count):
    pts = np.empty((count, d), dtype=np.uint64)
    for j, (lo, hi) in enumerate(box):
        if inside:
            pts[:, j] = rng.integers(lo, hi + 1, size=count)
        else:
            pts[:, j] = rng.integers(0, u.size, size=count)
    if inside:
        return pts
    # negatives: rejection-sample points outside the box
    inside_mask = np.ones(count, dtype=bool)
    for j, (lo, hi) in enumerate(box):
        inside_mask &= (pts[:, j] >= lo) & (pts[:, j] <= hi)
    return pts[~inside_mask]

pos = draw(True, n_pos)
neg = draw(False, 4000)
pts = np.vstack([pos, neg])
labels = np.concatenate([np.ones(len(pos), dtype=np.int8),
                         np.zeros(len(neg), dtype=np.int8)])
hyp = learn_rectangles(LabeledSample(pts, labels, u), eps, delta, rng)
print(f"  learned box {hyp.rectangle}")

fresh_pos = draw(True, 20000)
fresh_neg = draw(False, 20000)
cov = np.mean(hyp.predict(fresh_pos))
exc = 1.0 - np.mean(hyp.predict(fresh_neg))
print(f"  fresh positives covered {cov:.4f}, fresh negatives excluded {exc:.4f}")
print("  (the learned box sits inside the true one, so exclusion is the")
print("   easy direction; coverage is what costs samples)")
