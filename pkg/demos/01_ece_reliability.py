"""
Measuring calibration
=====================

A classifier is calibrated when, among predictions made with confidence q,
a fraction q is correct. This walk-through builds prediction sets with a
known amount of overconfidence and measures it with the expected
calibration error and a reliability table.
"""

# %%
# A synthetic prediction set. ``logit_scale`` multiplies the logits of a
# model whose labels were drawn from its own softmax, so scale 1 is
# calibrated and larger scales are overconfident.
import numpy as np

from xlcalib import BinningSpec, calibration_report, ece, generate_synthetic

_, calibrated = generate_synthetic(20_000, logit_scale=1.0, seed=0)
_, overconfident = generate_synthetic(20_000, logit_scale=3.0, seed=0)

print("ECE at scale 1:", round(ece(calibrated), 4))
print("ECE at scale 3:", round(ece(overconfident), 4))

# %%
# Reliability table. Each row is one confidence bin: how many predictions
# landed there, how many of them were right, and their mean confidence.
report = calibration_report(overconfident, BinningSpec(10))
print(f"{'bin':>11} {'n':>6} {'acc':>6} {'conf':>6}")
for b in report.bins:
    if b.count:
        print(f"{b.bin_lo:.1f}-{b.bin_hi:.1f} {b.count:6d} {b.accuracy:6.3f} {b.avg_confidence:6.3f}")

# %%
# Equal-mass bins put the same number of predictions in every bin, which
# helps when confidences pile up near 1.
for scheme in ("equal-width", "equal-mass"):
    print(scheme, round(ece(overconfident, BinningSpec(15, scheme)), 4))

# %%
# Scaling the logits never changes the predicted class, only the
# confidence attached to it.
for T in (0.5, 1.0, 3.0):
    print(f"T={T}: ECE {ece(overconfident, T=T):.4f}")
print("argmax unchanged:", np.array_equal(overconfident.logits.argmax(1), (overconfident.logits / 3).argmax(1)))
