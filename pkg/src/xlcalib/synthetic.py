"""Seeded synthetic classification data with a known calibration ground truth.

A task (class prototypes, a linear logit map, a shift direction) is fixed by
``task_seed``; ``seed`` draws the examples. Labels are sampled from
``softmax(z)`` where ``z`` are the true logits, so logits exposed as ``c * z``
are exactly calibrated after dividing by ``T = c``.

``domain_shift`` moves the observed features along a fixed unit direction
without changing how labels depend on the underlying example. A model fitted
on unshifted features therefore transfers imperfectly, much like a classifier
trained on one language and evaluated on another.
"""

from __future__ import annotations

import numpy as np

from .core import PredictionSet, softmax_with_temperature
from .smoothing import FeatureDataset


def _task(num_classes: int, dim: int, task_seed: int):
    rng = np.random.default_rng([task_seed, 0])
    prototypes = rng.normal(size=(num_classes, dim))
    W = rng.normal(size=(num_classes, dim)) * (2.0 / np.sqrt(dim))
    direction = rng.normal(size=dim)
    direction /= np.linalg.norm(direction)
    return prototypes, W, direction


def generate_synthetic(
    n: int,
    num_classes: int = 3,
    dim: int = 8,
    domain_shift: float = 0.0,
    logit_scale: float = 1.0,
    seed: int = 0,
    task_seed: int = 0,
    language: str = "",
) -> tuple[FeatureDataset, PredictionSet]:
    """Draw ``n`` examples from the synthetic task.

    Returns
    -------
    features : FeatureDataset
        Observed (possibly shifted) features with the sampled labels.
    predictions : PredictionSet
        The same labels with logits ``logit_scale * z``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if num_classes < 2 or dim < 1:
        raise ValueError("need num_classes >= 2 and dim >= 1")
    if domain_shift < 0 or not logit_scale > 0:
        raise ValueError("domain_shift must be >= 0 and logit_scale > 0")
    prototypes, W, direction = _task(num_classes, dim, task_seed)
    rng = np.random.default_rng([seed, 1])
    component = rng.integers(num_classes, size=n)
    latent = prototypes[component] + rng.normal(size=(n, dim))
    z = latent @ W.T
    cdf = np.cumsum(softmax_with_temperature(z), axis=1)
    u = rng.random(n)[:, None]
    labels = np.minimum((u >= cdf).sum(axis=1), num_classes - 1)
    observed = latent + domain_shift * direction
    return (FeatureDataset(observed, labels, num_classes, language),
            PredictionSet(logit_scale * z, labels, language))
