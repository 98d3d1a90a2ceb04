"""Post-hoc temperature scaling.

A single scalar ``T`` is fitted on a dev set by minimising NLL and then used to
divide the logits of a test set. Fitting on the pivot language's dev data or
on the target language's own dev data is only a matter of which set is passed
in; the procedure is identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .core import _LOG_FLOOR, PredictionSet, _check_temperature, log_softmax, nll

T_MIN = 0.05
T_MAX = 20.0
_INV_PHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class TemperatureModel:
    T: float
    dev_nll: float = float("nan")
    iterations: int = 0
    converged: bool = True
    dev_language: str = ""

    def __post_init__(self):
        _check_temperature(self.T)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> TemperatureModel:
        doc = json.loads(text)
        return cls(T=float(doc["T"]), dev_nll=float(doc["dev_nll"]),
                   iterations=int(doc["iterations"]), converged=bool(doc["converged"]),
                   dev_language=str(doc.get("dev_language", "")))


def nll_grad_T(pset: PredictionSet, T: float) -> float:
    """Derivative of :func:`~xlcalib.core.nll` with respect to ``T``.

    Per example this is ``(o_y - sum_k p_k(T) o_k) / T**2``. Examples whose
    log-probability sits below the NLL floor are constant there and
    contribute zero.
    """
    T = _check_temperature(T)
    o = pset.logits
    idx = np.arange(len(pset))
    logp = log_softmax(o, T)
    p = np.exp(logp)
    terms = (o[idx, pset.labels] - (p * o).sum(axis=1)) / (T * T)
    terms = np.where(logp[idx, pset.labels] < _LOG_FLOOR, 0.0, terms)
    return float(np.mean(terms))


def _golden_section(f, lo: float, hi: float, width: float) -> float:
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def fit_temperature(
    dev: PredictionSet,
    init_T: float = 1.5,
    max_iter: int = 100,
    tol: float = 1e-8,
    bounds: tuple[float, float] = (T_MIN, T_MAX),
) -> TemperatureModel:
    """Fit ``T`` by minimising dev-set NLL over ``bounds``.

    Newton iterations run on ``u = ln T`` with an analytic first derivative and
    a central-difference second derivative. NLL is unimodal in ``u``, so the
    sign of the derivative shrinks a bracket around the minimiser; a Newton
    step that would leave the bracket (or meets non-positive curvature) is
    replaced by a golden-section search over the bracket. The best ``T`` seen,
    including ``T = 1`` and ``init_T``, is returned, so the fitted NLL is never
    worse than either.

    Returns a model with ``converged=False`` when ``|dNLL/dT| >= tol`` after
    ``max_iter`` iterations or when the minimiser sits on a bound.
    """
    if dev is None or len(dev) == 0:
        raise ValueError("dev set is empty")
    init_T = _check_temperature(init_T)
    t_lo, t_hi = bounds
    if not 0 < t_lo < t_hi:
        raise ValueError(f"invalid temperature bounds {bounds}")

    if np.all(np.ptp(dev.logits, axis=1) == 0):
        # every T gives NLL = ln K
        return TemperatureModel(init_T, nll(dev, init_T), 0, True, dev.language)

    lo, hi = math.log(t_lo), math.log(t_hi)
    best_T, best_nll = None, math.inf

    def f(u):
        nonlocal best_T, best_nll
        T = math.exp(u)
        value = nll(dev, T)
        if value < best_nll:
            best_T, best_nll = T, value
        return value

    def du(u):
        T = math.exp(u)
        return T * nll_grad_T(dev, T)

    for T in (1.0, init_T):
        if t_lo <= T <= t_hi:
            f(math.log(T))

    u = min(max(math.log(init_T), lo), hi)
    delta = 1e-4
    converged = False
    it = 0
    while it < max_iter:
        it += 1
        T = math.exp(u)
        f(u)
        grad = nll_grad_T(dev, T)
        if abs(grad) < tol:
            converged = True
            best_T, best_nll = T, nll(dev, T)
            break
        g = T * grad
        if g > 0:
            hi = u
        else:
            lo = u
        if hi - lo < 1e-12:
            break
        curv = (du(u + delta) - du(u - delta)) / (2 * delta)
        step = u - g / curv if curv > 0 else math.nan
        if lo < step < hi:
            u = step
        else:
            u = _golden_section(f, lo, hi, width=1e-3 * max(hi - lo, 1e-3))

    return TemperatureModel(best_T, best_nll, it, converged, dev.language)


def apply_temperature(pset: PredictionSet, model: TemperatureModel | float) -> PredictionSet:
    """Return a copy of ``pset`` with every logit divided by the temperature."""
    T = _check_temperature(getattr(model, "T", model))
    return PredictionSet(pset.logits / T, pset.labels, pset.language, pset.ids)
