"""
Label smoothing and few-shot adaptation
=======================================

Two training-time remedies. Label smoothing softens the targets so the
model stops pushing confidence towards 1. Few-shot continued training
adapts a source model with a small budget of target-language examples.
"""

# %%
from xlcalib import SmoothingSpec, TrainConfig, continue_finetune, ece, generate_synthetic, nll, smooth_labels, train
from xlcalib.core import confidences_and_correct

print("smoothed target:", smooth_labels(1, 3, SmoothingSpec(0.1)))

# %%
# Train with and without smoothing on the same source data.
src, _ = generate_synthetic(3000, seed=1, language="en")
tgt_test, _ = generate_synthetic(3000, domain_shift=2.0, seed=3, language="sw")

for alpha in (0.0, 0.1):
    model = train(src, TrainConfig(epochs=20, learning_rate=0.05, smoothing=SmoothingSpec(alpha)))
    preds = model.predictions(tgt_test)
    conf, _ = confidences_and_correct(preds)
    print(f"alpha={alpha}: target ECE {ece(preds):.4f}, mean confidence {conf.mean():.3f}")

# %%
# Few-shot adaptation. Only the first 2500 target examples are used.
fewshot, _ = generate_synthetic(4000, domain_shift=2.0, seed=2, language="sw")
config = TrainConfig(epochs=5, smoothing=SmoothingSpec(0.0))
base = train(src, config)
adapted = continue_finetune(base, fewshot, config)
print(f"target NLL before {nll(base.predictions(tgt_test)):.4f}, after {nll(adapted.predictions(tgt_test)):.4f}")
