"""
Calibration statistics over exported classifier logits.

Everything here works on a :class:`PredictionSet`, the logits a classifier
produced on one language's test data together with the gold labels. Values
are fractions in [0, 1]; percentage display is left to the caller.

Binning follows the usual reliability-diagram estimator: each example is
reduced to its maximum softmax confidence, examples are grouped into ``M``
bins, and ECE is the count-weighted mean of ``|acc(B_m) - conf(B_m)|``.
Equal-width bins are right-inclusive with bin 0 closed at 0, so a confidence
of exactly 1.0 always falls in the last bin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Mapping, Sequence

import numpy as np

# Probabilities are clamped here before taking logs.
PROB_FLOOR = 1e-300
_LOG_FLOOR = math.log(PROB_FLOOR)


@dataclass(frozen=True)
class LabeledPrediction:
    logits: np.ndarray
    label: int


@dataclass(eq=False)
class PredictionSet:
    """Logits and gold labels for one language's evaluation data.

    Parameters
    ----------
    logits : array_like, shape (n, K)
        Raw classifier outputs, one row per example.
    labels : array_like of int, shape (n,)
        Gold class indices in ``[0, K)``.
    language : str
        Language tag such as ``"en"`` or ``"sw"``.
    ids : sequence, optional
        Per-example identifiers carried through file round trips.
    """

    logits: np.ndarray
    labels: np.ndarray
    language: str = ""
    ids: tuple | None = None

    def __post_init__(self):
        logits = np.array(self.logits, dtype=np.float64)
        labels = np.array(self.labels)
        if logits.ndim != 2:
            raise ValueError(f"logits must be 2-D (n, K), got shape {logits.shape}")
        n, k = logits.shape
        if n == 0:
            raise ValueError("prediction set must be non-empty")
        if k < 2:
            raise ValueError(f"need at least 2 classes, got {k}")
        if not np.all(np.isfinite(logits)):
            raise ValueError("logits must be finite")
        if labels.shape != (n,):
            raise ValueError(f"expected {n} labels, got shape {labels.shape}")
        if labels.dtype.kind not in "iu":
            if not np.all(np.equal(np.mod(labels, 1), 0)):
                raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
        if np.any(labels < 0) or np.any(labels >= k):
            raise ValueError(f"labels must lie in [0, {k})")
        if self.ids is not None:
            self.ids = tuple(self.ids)
            if len(self.ids) != n:
                raise ValueError(f"expected {n} ids, got {len(self.ids)}")
        logits.flags.writeable = False
        labels.flags.writeable = False
        self.logits = logits
        self.labels = labels

    @classmethod
    def from_items(cls, items: Sequence[LabeledPrediction], language: str = "") -> PredictionSet:
        if not items:
            raise ValueError("prediction set must be non-empty")
        k = len(items[0].logits)
        for i, item in enumerate(items):
            if len(item.logits) != k:
                raise ValueError(f"item {i}: expected {k} logits, found {len(item.logits)}")
        return cls(np.array([it.logits for it in items], dtype=np.float64),
                   np.array([it.label for it in items]), language)

    @property
    def num_classes(self) -> int:
        return self.logits.shape[1]

    @property
    def items(self) -> list[LabeledPrediction]:
        return list(iter(self))

    def __len__(self) -> int:
        return self.logits.shape[0]

    def __iter__(self) -> Iterator[LabeledPrediction]:
        for row, y in zip(self.logits, self.labels):
            yield LabeledPrediction(row.copy(), int(y))

    def __eq__(self, other):
        if not isinstance(other, PredictionSet):
            return NotImplemented
        return (self.language == other.language
                and self.ids == other.ids
                and np.array_equal(self.logits, other.logits)
                and np.array_equal(self.labels, other.labels))

    def subset(self, index, language: str | None = None) -> PredictionSet:
        """Rows selected by ``index`` (slice, mask or integer array)."""
        ids = None
        if self.ids is not None:
            ids = tuple(np.asarray(self.ids, dtype=object)[index])
        return PredictionSet(self.logits[index], self.labels[index],
                             self.language if language is None else language, ids)


def _check_temperature(T: float) -> float:
    T = float(T)
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"temperature must be positive and finite, got {T}")
    return T


def log_softmax(logits, T: float = 1.0) -> np.ndarray:
    """Log-probabilities of ``softmax(logits / T)`` along the last axis."""
    T = _check_temperature(T)
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    z = z / T
    z = z - z.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax_with_temperature(logits, T: float = 1.0) -> np.ndarray:
    """Temperature-scaled softmax, ``exp(o_k/T) / sum_k' exp(o_k'/T)``.

    Works on a single logit vector or a batch of shape ``(n, K)``. The max
    logit is subtracted first, so large logits do not overflow.

    >>> softmax_with_temperature([np.log(2), 0.0])
    array([0.66666667, 0.33333333])
    """
    T = _check_temperature(T)
    z = np.asarray(logits, dtype=np.float64)
    if not np.all(np.isfinite(z)):
        raise ValueError("logits must be finite")
    z = z / T
    e = np.exp(z - z.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def predict(probs) -> tuple[int, float]:
    """Arg-max class and its probability; ties go to the lowest index."""
    p = np.asarray(probs, dtype=np.float64)
    k = int(np.argmax(p))
    return k, float(p[k])


def confidences_and_correct(pset: PredictionSet, T: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Max-softmax confidence and 0/1 correctness for every example."""
    probs = softmax_with_temperature(pset.logits, T)
    # argmax on the logits: rounding in exp() can fake ties between near-equal classes
    pred = np.argmax(pset.logits, axis=1)
    conf = probs[np.arange(len(pset)), pred]
    return conf, (pred == pset.labels)


def nll(pset: PredictionSet, T: float = 1.0) -> float:
    """Mean negative log-likelihood of the gold labels at temperature ``T``.

    Log-probabilities are floored at ``log(1e-300)`` so the result is always
    finite.
    """
    logp = log_softmax(pset.logits, T)[np.arange(len(pset)), pset.labels]
    return max(0.0, float(-np.mean(np.maximum(logp, _LOG_FLOOR))))


def accuracy(pset: PredictionSet, T: float = 1.0) -> float:
    _check_temperature(T)
    # argmax of o/T is argmax of o for every T > 0
    pred = np.argmax(pset.logits, axis=1)
    return float(np.mean(pred == pset.labels))


class BinningScheme(str, Enum):
    EQUAL_WIDTH = "equal-width"
    EQUAL_MASS = "equal-mass"


@dataclass(frozen=True)
class BinningSpec:
    num_bins: int = 10
    scheme: BinningScheme = BinningScheme.EQUAL_WIDTH

    def __post_init__(self):
        if int(self.num_bins) != self.num_bins or self.num_bins < 1:
            raise ValueError(f"num_bins must be a positive integer, got {self.num_bins}")
        object.__setattr__(self, "num_bins", int(self.num_bins))
        object.__setattr__(self, "scheme", BinningScheme(self.scheme))


@dataclass(frozen=True)
class BinStats:
    bin_lo: float
    bin_hi: float
    count: int
    accuracy: float
    avg_confidence: float
    gap: float


def assign_bins(confidences, spec: BinningSpec = BinningSpec()) -> np.ndarray:
    """Bin index for each confidence.

    Equal-width bin ``m`` covers ``(m/M, (m+1)/M]`` and bin 0 also takes 0.
    Equal-mass bins split the stably sorted confidences into ``M`` contiguous
    runs whose sizes differ by at most one (earlier bins take the extras).
    """
    c = np.asarray(confidences, dtype=np.float64)
    if c.ndim != 1:
        raise ValueError("confidences must be 1-D")
    if np.any((c < 0) | (c > 1)) or not np.all(np.isfinite(c)):
        raise ValueError("confidences must lie in [0, 1]")
    M = spec.num_bins
    if spec.scheme is BinningScheme.EQUAL_WIDTH:
        upper = np.arange(1, M) / M
        return np.searchsorted(upper, c, side="left").astype(np.int64)
    order = np.argsort(c, kind="stable")
    bins = np.empty(len(c), dtype=np.int64)
    for m, chunk in enumerate(np.array_split(order, M)):
        bins[chunk] = m
    return bins


def _bin_bounds(conf: np.ndarray, bins: np.ndarray, spec: BinningSpec) -> list[tuple[float, float]]:
    M = spec.num_bins
    if spec.scheme is BinningScheme.EQUAL_WIDTH:
        return [(m / M, (m + 1) / M) for m in range(M)]
    # equal-mass: bins tile [0, 1], each closing at its largest confidence
    bounds = []
    lo = 0.0
    for m in range(M):
        members = conf[bins == m]
        hi = float(members.max()) if members.size else lo
        if m == M - 1:
            hi = 1.0
        bounds.append((lo, hi))
        lo = hi
    return bounds


def bin_statistics(conf, correct, spec: BinningSpec = BinningSpec()) -> list[BinStats]:
    """Per-bin count, accuracy, mean confidence and gap (``conf - acc``)."""
    conf = np.asarray(conf, dtype=np.float64)
    correct = np.asarray(correct, dtype=np.float64)
    bins = assign_bins(conf, spec)
    stats = []
    for m, (lo, hi) in enumerate(_bin_bounds(conf, bins, spec)):
        mask = bins == m
        count = int(mask.sum())
        if count == 0:
            stats.append(BinStats(lo, hi, 0, 0.0, 0.0, 0.0))
            continue
        acc = float(correct[mask].mean())
        avg = float(conf[mask].mean())
        stats.append(BinStats(lo, hi, count, acc, avg, avg - acc))
    return stats


def reliability(pset: PredictionSet, spec: BinningSpec = BinningSpec(), T: float = 1.0) -> list[BinStats]:
    conf, correct = confidences_and_correct(pset, T)
    return bin_statistics(conf, correct, spec)


def ece_from_bins(bins: Sequence[BinStats]) -> float:
    n = sum(b.count for b in bins)
    if n == 0:
        raise ValueError("no examples in bins")
    return math.fsum(b.count / n * abs(b.gap) for b in bins)


def ece(pset: PredictionSet, spec: BinningSpec = BinningSpec(), T: float = 1.0) -> float:
    """Expected calibration error ``sum_m |B_m|/n * |acc(B_m) - conf(B_m)|``."""
    return ece_from_bins(reliability(pset, spec, T))


@dataclass
class CalibrationReport:
    language: str
    n: int
    ece: float
    accuracy: float
    nll: float
    bins: list[BinStats]
    binning: BinningSpec = field(default_factory=BinningSpec)
    temperature: float = 1.0


def calibration_report(pset: PredictionSet, spec: BinningSpec = BinningSpec(), T: float = 1.0) -> CalibrationReport:
    bins = reliability(pset, spec, T)
    return CalibrationReport(
        language=pset.language,
        n=len(pset),
        ece=ece_from_bins(bins),
        accuracy=accuracy(pset, T),
        nll=nll(pset, T),
        bins=bins,
        binning=spec,
        temperature=float(T),
    )


@dataclass
class AggregateReport:
    """Cross-language summary: pivot ECE plus mean and max over the rest."""

    pivot: str
    pivot_ece: float
    mean_ece: float
    max_ece: float
    max_language: str
    reports: dict = field(default_factory=dict)

    @property
    def other_languages(self) -> list[str]:
        return sorted(lang for lang in self.reports if lang != self.pivot)


def aggregate(reports: Mapping[str, CalibrationReport | float], pivot: str) -> AggregateReport:
    """Summarise per-language ECE the way a cross-lingual results table does.

    ``reports`` maps language tags to a :class:`CalibrationReport` or a bare
    ECE value. Ties on the maximum go to the lexicographically smallest tag.
    """
    values = {lang: float(getattr(r, "ece", r)) for lang, r in reports.items()}
    if pivot not in values:
        raise KeyError(f"pivot language {pivot!r} not among reports")
    others = sorted(lang for lang in values if lang != pivot)
    if not others:
        raise ValueError("need at least one non-pivot language")
    max_lang = others[0]
    for lang in others[1:]:
        if values[lang] > values[max_lang]:
            max_lang = lang
    return AggregateReport(
        pivot=pivot,
        pivot_ece=values[pivot],
        mean_ece=math.fsum(values[lang] for lang in others) / len(others),
        max_ece=values[max_lang],
        max_language=max_lang,
        reports=dict(reports),
    )
