"""Language-level factors and their correlation with calibration error.

Three factors are supported, each measured for a target language relative to
a pivot language:

SIZE
    natural log of the target language's pre-training token count
SYN
    cosine similarity of typological feature vectors, restricted to the
    dimensions both languages have values for
SWO
    Jaccard overlap of frequency-thresholded token vocabularies
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, NamedTuple, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FACTORS = ("SIZE", "SYN", "SWO")


@dataclass(frozen=True)
class Vocabulary:
    tokens: frozenset
    min_count: int = 10
    source: str = ""

    def __len__(self):
        return len(self.tokens)


def whitespace_tokenize(line: str) -> list[str]:
    return line.split()


def build_vocab(corpus: Iterable[str], min_count: int = 10,
                tokenizer: Callable[[str], Sequence[str]] | None = whitespace_tokenize,
                source: str = "") -> Vocabulary:
    """Tokens occurring at least ``min_count`` times in ``corpus``.

    ``corpus`` yields lines (one document each) that are split with
    ``tokenizer``; pass ``tokenizer=None`` when it already yields tokens.
    """
    counts = Counter()
    for item in corpus:
        counts.update(item if tokenizer is None else tokenizer(item))
    return Vocabulary(frozenset(t for t, c in counts.items() if c >= min_count), min_count, source)


def _tokens(v) -> frozenset:
    return v.tokens if isinstance(v, Vocabulary) else frozenset(v)


def subword_overlap(pivot_vocab: Vocabulary, target_vocab: Vocabulary) -> float:
    """Jaccard index ``|Vp & Vt| / |Vp | Vt|``."""
    a, b = _tokens(pivot_vocab), _tokens(target_vocab)
    union = a | b
    if not union:
        raise ValueError("subword overlap is undefined for two empty vocabularies")
    return len(a & b) / len(union)


class Similarity(NamedTuple):
    value: float
    shared: np.ndarray  # bool mask of dimensions present in both vectors


def _as_features(v) -> np.ndarray:
    return np.array([np.nan if x is None else x for x in v], dtype=np.float64)


def syntactic_similarity(pivot_features, target_features) -> Similarity:
    """Cosine similarity over the dimensions present in both vectors.

    Missing entries are ``None`` or NaN. The returned ``shared`` mask records
    which dimensions were used.

    >>> syntactic_similarity([1, None, 0], [1, 1, None]).value
    1.0
    """
    a, b = _as_features(pivot_features), _as_features(target_features)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"feature vectors differ in shape: {a.shape} vs {b.shape}")
    shared = ~(np.isnan(a) | np.isnan(b))
    if not shared.any():
        raise ValueError("feature vectors share no present dimensions")
    a, b = a[shared], b[shared]
    na, nb = math.sqrt(math.fsum(a * a)), math.sqrt(math.fsum(b * b))
    if na == 0 or nb == 0:
        raise ValueError("zero feature vector on the shared dimensions")
    value = math.fsum(a * b) / (na * nb)
    return Similarity(min(1.0, max(-1.0, value)), shared)


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient.

    Raises ``ValueError`` when either input has zero variance.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("x and y must be 1-D sequences of equal length")
    if len(x) < 2:
        raise ValueError("need at least two observations")
    dx = x - math.fsum(x) / len(x)
    dy = y - math.fsum(y) / len(y)
    sxx, syy = math.fsum(dx * dx), math.fsum(dy * dy)
    if sxx == 0 or syy == 0:
        raise ValueError("undefined correlation: zero variance")
    r = math.fsum(dx * dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


@dataclass
class LanguageProfile:
    language: str
    size_tokens: float | None = None
    syn_features: Sequence[float | None] | None = None
    vocabulary: Vocabulary | None = None


def factor_values(profiles: Mapping[str, LanguageProfile], pivot: str, factor: str) -> dict[str, float]:
    """Per-language value of ``factor`` relative to ``pivot``, pivot excluded.

    Languages lacking the data for this factor are left out.
    """
    if factor not in FACTORS:
        raise ValueError(f"unknown factor {factor!r}")
    ref = profiles.get(pivot)
    out = {}
    for lang in sorted(profiles):
        if lang == pivot:
            continue
        p = profiles[lang]
        try:
            if factor == "SIZE":
                if p.size_tokens is None or p.size_tokens < 1:
                    continue
                out[lang] = math.log(p.size_tokens)
            elif factor == "SYN":
                if ref is None or ref.syn_features is None or p.syn_features is None:
                    continue
                out[lang] = syntactic_similarity(ref.syn_features, p.syn_features).value
            else:
                if ref is None or ref.vocabulary is None or p.vocabulary is None:
                    continue
                out[lang] = subword_overlap(ref.vocabulary, p.vocabulary)
        except ValueError as exc:
            logger.warning("%s unavailable for %s: %s", factor, lang, exc)
    return out


@dataclass
class FactorCorrelation:
    factor: str
    r: float | None
    languages: list[str] = field(default_factory=list)
    dropped: list[str] = field(default_factory=list)
    reason: str = ""

    @property
    def available(self) -> bool:
        return self.r is not None


def correlate_factors(ece_by_language: Mapping[str, float], profiles: Mapping[str, LanguageProfile],
                      pivot: str) -> dict[str, FactorCorrelation]:
    """Pearson r between ECE and each factor across the non-pivot languages.

    Languages missing either the ECE or the factor are dropped for that factor
    only. A factor with fewer than two usable languages, or with zero
    variance, comes back with ``r=None`` and a ``reason``.
    """
    candidates = sorted(lang for lang in ece_by_language if lang != pivot)
    results = {}
    for factor in FACTORS:
        values = factor_values(profiles, pivot, factor)
        used = [lang for lang in candidates if lang in values]
        dropped = [lang for lang in candidates if lang not in values]
        if dropped:
            logger.warning("%s: dropped %d language(s) without data: %s", factor, len(dropped), ", ".join(dropped))
        res = FactorCorrelation(factor, None, used, dropped)
        if len(used) < 2:
            res.reason = f"only {len(used)} usable language(s)"
        else:
            try:
                res.r = pearson([values[lang] for lang in used], [ece_by_language[lang] for lang in used])
            except ValueError as exc:
                res.reason = str(exc)
        results[factor] = res
    return results
