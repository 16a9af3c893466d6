"""Proper scoring rules and their score divergences.

Scores are negatively oriented. ``mean_score`` averages a rule over an
observed sample, ``self_score`` is the expected score of the empirical
measure against itself, and ``score_divergence`` is their difference.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .errors import InvalidInput, SingularCovariance
from .measures import (
    CategoricalDist,
    EmpiricalMeasure,
    MomentSummary,
    PiecewiseLinearCdf,
    _as_counts,
    eval_left,
    eval_right,
    moment_summary,
)

log = logging.getLogger(__name__)

NEGATIVE_SLACK = 1e-10

RULES = ("crps", "log", "brier", "ds")


@dataclass(frozen=True)
class ScoreValue:
    value: float
    rule_id: str

    def __float__(self):
        return float(self.value)


# --- helpers --------------------------------------------------------------------


def _segment_sq_integral(a, b, h):
    # integral over a segment of length h of the square of a linear function a -> b
    return h * (a * a + a * b + b * b) / 3.0


def _check_finite(y, name="observation"):
    y = float(y)
    if not math.isfinite(y):
        raise InvalidInput(f"{name} must be finite, got {y!r}")
    return y


def spd_factor(cov, what="covariance"):
    """Cholesky factor of a covariance, rejecting (near-)singular input."""
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    tr = float(np.trace(cov))
    tol = 1e-12 * max(tr, np.finfo(float).tiny)
    try:
        L = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(f"{what} is not positive definite") from exc
    if tr <= 0 or np.min(np.diag(L)) ** 2 <= tol:
        raise SingularCovariance(f"{what} is singular within tolerance")
    return L


def _quad_form(L, v):
    z = np.linalg.solve(L, v) if L.shape[0] > 1 else v / L[0, 0]
    return float(z @ z)


def _logdet(L):
    return float(2.0 * np.sum(np.log(np.diag(L))))


# --- pointwise scores -------------------------------------------------------------


def crps(F: PiecewiseLinearCdf, y: float) -> ScoreValue:
    """Continuous ranked probability score, integrated exactly segment by segment."""
    if isinstance(F, EmpiricalMeasure):
        F = F.as_cdf()
    y = _check_finite(y)
    x = F.breakpoints
    grid = np.union1d(x, [y])
    fr = eval_right(x, F.values_left, F.values_right, grid[:-1])
    fl = eval_left(x, F.values_left, F.values_right, grid[1:])
    ind = (grid[:-1] >= y).astype(float)
    total = np.sum(_segment_sq_integral(fr - ind, fl - ind, np.diff(grid)))
    return ScoreValue(float(total), "crps")


def _kernel(h, alpha):
    if callable(h):
        return h
    if h in ("abs", "|x-y|"):
        return lambda d: np.abs(d)
    if h in ("abs_power", "|x-y|^a"):
        if not 0.0 < alpha < 2.0:
            raise InvalidInput(f"kernel exponent {alpha!r} outside (0, 2)")
        return lambda d: np.abs(d) ** alpha
    raise InvalidInput(f"unknown kernel {h!r}")


def kernel_score(h: Union[str, Callable], F: EmpiricalMeasure, y: float, alpha: float = 1.0) -> ScoreValue:
    """E_F h(x, y) - E_F h(x, x') / 2 by exact double sums over the atoms.

    ``h`` is ``"abs"`` for |x - y|, ``"abs_power"`` for |x - y|**alpha with
    alpha in (0, 2), or a callable acting on differences. User kernels must
    be negative definite and keep both expectations finite.
    """
    y = _check_finite(y)
    kern = _kernel(h, alpha)
    a = F.atoms
    first = float(np.mean(kern(a - y)))
    second = float(np.mean(kern(a[:, None] - a[None, :])))
    name = h if isinstance(h, str) else getattr(h, "__name__", "kernel")
    return ScoreValue(first - 0.5 * second, f"kernel:{name}")


def _category(F: CategoricalDist, y) -> int:
    if isinstance(y, (bool, np.bool_)) or int(y) != y:
        raise InvalidInput(f"category index must be an integer, got {y!r}")
    y = int(y)
    if not 1 <= y <= F.c:
        raise InvalidInput(f"category {y} outside 1..{F.c}")
    return y - 1


def log_score(F: CategoricalDist, y: int) -> ScoreValue:
    f = F.probs[_category(F, y)]
    return ScoreValue(math.inf if f == 0 else -math.log(f), "log")


def brier_score(F: CategoricalDist, y: int) -> ScoreValue:
    j = _category(F, y)
    e = np.zeros(F.c)
    e[j] = 1.0
    return ScoreValue(float(np.sum((F.probs - e) ** 2)), "brier")


def ds_score(F: MomentSummary, y) -> ScoreValue:
    """Dawid-Sebastiani score log det S + (mu - y)' S^{-1} (mu - y)."""
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if y.shape != F.mean.shape:
        raise InvalidInput(f"observation dimension {y.size} != {F.m}")
    L = spd_factor(F.cov, "forecast covariance")
    return ScoreValue(_logdet(L) + _quad_form(L, F.mean - y), "ds")


# --- aggregate forms ----------------------------------------------------------------


def _rule(rule):
    rule = str(rule).lower()
    if rule not in RULES:
        raise InvalidInput(f"unknown rule {rule!r}; expected one of {RULES}")
    return rule


def _continuous_sample(sample):
    if isinstance(sample, EmpiricalMeasure):
        return sample
    if isinstance(sample, (CategoricalDist, PiecewiseLinearCdf, MomentSummary)):
        raise InvalidInput("continuous rules need an observed sample")
    return EmpiricalMeasure(sample)


def _vector_sample(sample):
    if isinstance(sample, EmpiricalMeasure):
        return sample.atoms[:, None]
    X = np.asarray(sample, dtype=float)
    return X[:, None] if X.ndim == 1 else X


def _counts(sample):
    if isinstance(sample, (EmpiricalMeasure, CategoricalDist, PiecewiseLinearCdf, MomentSummary)):
        raise InvalidInput("categorical rules need a vector of category counts")
    return _as_counts(sample)


def _expect_type(F, cls, rule):
    if isinstance(F, EmpiricalMeasure) and cls is PiecewiseLinearCdf:
        return F.as_cdf()
    if isinstance(F, PiecewiseLinearCdf) and cls is MomentSummary:
        return F.moments()
    if not isinstance(F, cls):
        raise InvalidInput(f"rule {rule!r} needs a {cls.__name__} forecast, got {type(F).__name__}")
    return F


def mean_score(rule, F, sample) -> float:
    """Average score of F over the observations in ``sample``.

    For ``crps`` and ``ds`` the sample is a list of observations (or an
    :class:`EmpiricalMeasure`); for ``log`` and ``brier`` it is a vector of
    category counts.
    """
    rule = _rule(rule)
    if rule == "crps":
        F = _expect_type(F, PiecewiseLinearCdf, rule)
        obs = _continuous_sample(sample).atoms
        return float(np.mean([crps(F, y).value for y in obs]))
    if rule == "ds":
        F = _expect_type(F, MomentSummary, rule)
        X = _vector_sample(sample)
        if X.shape[1] != F.m:
            raise InvalidInput("sample dimension does not match the forecast")
        L = spd_factor(F.cov, "forecast covariance")
        D = F.mean[None, :] - X
        Z = np.linalg.solve(L, D.T)
        return float(_logdet(L) + np.mean(np.sum(Z * Z, axis=0)))
    F = _expect_type(F, CategoricalDist, rule)
    counts = _counts(sample)
    if counts.size != F.c:
        raise InvalidInput(f"counts have {counts.size} categories, forecast has {F.c}")
    k = counts.sum()
    if rule == "log":
        obs = counts > 0
        if np.any(F.probs[obs] == 0):
            return math.inf
        return float(-np.sum(counts[obs] * np.log(F.probs[obs])) / k)
    # brier: sum_j f_j^2 - 2 f_y + 1 averaged over observations
    return float(np.sum(F.probs**2) - 2.0 * np.sum(counts * F.probs) / k + 1.0)


def self_score(rule, sample) -> float:
    """Expected score of the empirical measure when scored against itself."""
    rule = _rule(rule)
    if rule == "crps":
        a = _continuous_sample(sample).atoms
        k = a.size
        # sum_{i,j} |a_i - a_j| = 2 sum_i (2i - k - 1) a_(i) for sorted atoms
        pair_sum = 2.0 * np.sum((2.0 * np.arange(1, k + 1) - k - 1) * a)
        return float(0.5 * pair_sum / (k * k))
    if rule == "ds":
        summary = moment_summary(_vector_sample(sample))
        L = spd_factor(summary.cov, "empirical covariance")
        return _logdet(L) + summary.m
    counts = _counts(sample)
    g = counts / counts.sum()
    if rule == "log":
        nz = g[g > 0]
        return float(-np.sum(nz * np.log(nz)))
    return float(1.0 - np.sum(g * g))


def score_divergence(rule, F, sample) -> float:
    """Mean score of F minus the self score of the sample; never negative."""
    ms = mean_score(rule, F, sample)
    if math.isinf(ms):
        return ms
    d = ms - self_score(rule, sample)
    if d < 0:
        if d < -NEGATIVE_SLACK:
            raise ArithmeticError(f"score divergence {d!r} below the numerical slack")
        log.debug("clamping score divergence %r to 0", d)
        d = 0.0
    return float(d)
