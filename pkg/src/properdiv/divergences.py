"""Divergence functions between distributions, each tagged with its propriety status.

Every one-dimensional divergence here is evaluated exactly on the merged
breakpoints of its arguments: between breakpoints both CDFs (or both
quantile functions) are linear, so the integrands are polynomials of degree
at most two, or powers of a linear function, with closed-form integrals.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Any, Optional

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
    quantile_minus,
    quantile_plus,
)
from .scores import _logdet, _quad_form, spd_factor


class Propriety(str, enum.Enum):
    K_PROPER = "k_proper"
    ASYMPTOTICALLY_PROPER = "asymptotically_proper"
    IMPROPER_VARIANT = "improper_variant"


PROPRIETY = {
    "IQ": Propriety.K_PROPER,
    "WIQ": Propriety.K_PROPER,
    "MV": Propriety.K_PROPER,
    "MAHALANOBIS": Propriety.K_PROPER,
    "IMPROPER_MAHALANOBIS": Propriety.IMPROPER_VARIANT,
    "DS": Propriety.K_PROPER,
    "AV": Propriety.ASYMPTOTICALLY_PROPER,
    "WASSERSTEIN": Propriety.ASYMPTOTICALLY_PROPER,
    "KS": Propriety.ASYMPTOTICALLY_PROPER,
    "KL": Propriety.K_PROPER,
    "KL_SCOREFORM": Propriety.K_PROPER,
    "BRIER": Propriety.K_PROPER,
    "HELLINGER": Propriety.ASYMPTOTICALLY_PROPER,
}

DIVERGENCE_IDS = tuple(PROPRIETY)

ONE_DIMENSIONAL = {"IQ", "WIQ", "AV", "WASSERSTEIN", "KS"}
MOMENT_BASED = {"MV", "MAHALANOBIS", "IMPROPER_MAHALANOBIS", "DS"}
CATEGORICAL = {"KL", "KL_SCOREFORM", "BRIER", "HELLINGER"}

DESCRIPTIONS = {
    "IQ": "integrated quadratic distance",
    "WIQ": "weighted integrated quadratic distance",
    "MV": "mean value divergence",
    "MAHALANOBIS": "squared Mahalanobis distance, fixed covariance",
    "IMPROPER_MAHALANOBIS": "squared Mahalanobis distance, forecast covariance",
    "DS": "Dawid-Sebastiani divergence",
    "AV": "area validation metric",
    "WASSERSTEIN": "Wasserstein distance of order p",
    "KS": "Kolmogorov-Smirnov distance",
    "KL": "Kullback-Leibler divergence, sum f log(f/g)",
    "KL_SCOREFORM": "log-score divergence, sum g log(g/f)",
    "BRIER": "Brier (quadratic) divergence",
    "HELLINGER": "Hellinger distance",
}


# --- spec types -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class WeightFunction:
    """Piecewise-constant weight: ``levels[i]`` on [breakpoints[i], breakpoints[i+1]), 0 elsewhere."""

    breakpoints: np.ndarray
    levels: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=float).ravel()
        lv = np.asarray(self.levels, dtype=float).ravel()
        if b.size < 2 or lv.size != b.size - 1:
            raise InvalidInput("weight needs n+1 breakpoints and n levels")
        if np.any(np.diff(b) <= 0) or not np.all(np.isfinite(b)):
            raise InvalidInput("weight breakpoints must be finite and strictly increasing")
        if np.any(lv < 0) or not np.all(np.isfinite(lv)):
            raise InvalidInput("weight levels must be finite and nonnegative")
        for name, arr in (("breakpoints", b), ("levels", lv)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        i = np.searchsorted(self.breakpoints, t, side="right") - 1
        inside = (i >= 0) & (i < self.levels.size)
        return np.where(inside, self.levels[np.clip(i, 0, self.levels.size - 1)], 0.0)

    def total(self) -> float:
        return float(np.sum(self.levels * np.diff(self.breakpoints)))

    def to_json(self):
        return {"breakpoints": self.breakpoints.tolist(), "levels": self.levels.tolist()}


@dataclass(frozen=True, eq=False)
class DivergenceSpec:
    id: str
    p: Optional[float] = None
    weight: Optional[WeightFunction] = None
    sigma: Optional[np.ndarray] = None

    def __post_init__(self):
        did = str(self.id).upper()
        if did not in PROPRIETY:
            raise InvalidInput(f"unknown divergence id {self.id!r}")
        object.__setattr__(self, "id", did)
        if did == "WASSERSTEIN":
            p = 1.0 if self.p is None else float(self.p)
            if not p >= 1.0 or not math.isfinite(p):
                raise InvalidInput(f"Wasserstein order must be >= 1, got {self.p!r}")
            object.__setattr__(self, "p", p)
        if did == "WIQ":
            if self.weight is None:
                raise InvalidInput("WIQ needs a weight function")
            if not isinstance(self.weight, WeightFunction):
                w = self.weight
                object.__setattr__(self, "weight", WeightFunction(w["breakpoints"], w["levels"]))
        if did == "MAHALANOBIS":
            if self.sigma is None:
                raise InvalidInput("MAHALANOBIS needs a fixed covariance 'sigma'")
            s = np.atleast_2d(np.asarray(self.sigma, dtype=float))
            spd_factor(s, "sigma")
            s.setflags(write=False)
            object.__setattr__(self, "sigma", s)

    @property
    def propriety(self) -> Propriety:
        return PROPRIETY[self.id]

    @property
    def label(self) -> str:
        if self.id == "WASSERSTEIN":
            return f"WASSERSTEIN(p={self.p:g})"
        return self.id

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {"id": self.id}
        if self.id == "WASSERSTEIN":
            out["p"] = self.p
        if self.weight is not None:
            out["weight"] = self.weight.to_json()
        if self.sigma is not None:
            out["sigma"] = self.sigma.tolist()
        return out

    @classmethod
    def from_json(cls, obj) -> DivergenceSpec:
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise InvalidInput(f"divergence spec is not valid JSON: {exc}") from exc
        if not isinstance(obj, dict) or "id" not in obj:
            raise InvalidInput("divergence spec must be an object with an 'id'")
        unknown = set(obj) - {"id", "p", "weight", "sigma"}
        if unknown:
            raise InvalidInput(f"unknown divergence spec fields {sorted(unknown)}")
        try:
            return cls(obj["id"], p=obj.get("p"), weight=obj.get("weight"), sigma=obj.get("sigma"))
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed divergence spec: {exc}") from exc

    def units(self, data_units: str = "data") -> str:
        if self.id in ("IQ", "WIQ", "AV", "WASSERSTEIN"):
            return data_units
        if self.id == "MV":
            return f"{data_units}^2"
        return "dimensionless"


@dataclass(frozen=True)
class DivergenceValue:
    value: float
    units: str
    spec: DivergenceSpec = field(repr=False)

    @property
    def propriety(self) -> Propriety:
        return self.spec.propriety

    def __float__(self):
        return float(self.value)

    def to_json(self):
        v = self.value
        return {
            "value": v if math.isfinite(v) else ("inf" if v > 0 else "-inf"),
            "units": self.units,
            "propriety": self.propriety.value,
            "divergence": self.spec.to_json(),
        }


def _wrap(spec_id, value, units="data", **params) -> DivergenceValue:
    spec = params.pop("spec", None) or DivergenceSpec(spec_id, **params)
    return DivergenceValue(float(value), spec.units(units), spec)


# --- segment integrals -------------------------------------------------------------

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(32)


def seg_sq(a, b, h):
    """Integral of the square of a linear function going a -> b over length h."""
    return h * (a * a + a * b + b * b) / 3.0


def seg_abs(a, b, h):
    """Integral of |linear| going a -> b over length h, split at the root."""
    a, b, h = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(h, float))
    aa, ab = np.abs(a), np.abs(b)
    same = a * b >= 0
    denom = np.where(same, 1.0, aa + ab)
    return np.where(same, h * (aa + ab) / 2.0, h * (a * a + b * b) / (2.0 * denom))


def seg_pow(a, b, h, p):
    """Integral of |linear|**p going a -> b over length h (p >= 1)."""
    a, b, h = np.broadcast_arrays(np.asarray(a, float), np.asarray(b, float), np.asarray(h, float))
    aa, ab = np.abs(a), np.abs(b)
    cross = a * b < 0
    # sign change: two pieces of the form (c s)^p starting at the root
    split_len = np.where(cross, h * aa / np.where(cross, aa + ab, 1.0), 0.0)
    crossed = (split_len * aa**p + (h - split_len) * ab**p) / (p + 1.0)
    lo, hi = np.minimum(aa, ab), np.maximum(aa, ab)
    gap = hi - lo
    wide = gap > 1e-6 * hi
    out = np.where(cross, crossed, h * (hi ** (p + 1) - lo ** (p + 1)) / ((p + 1.0) * np.where(wide, gap, 1.0)))
    flat = ~cross & (gap == 0)
    out = np.where(flat, h * hi**p, out)
    # near-constant integrand: the closed form cancels, Gauss-Legendre is exact to rounding
    near = ~cross & ~wide & ~flat
    if np.any(near):
        s = (_GL_NODES + 1.0) / 2.0
        an, bn = a[near], b[near]
        vals = np.abs(an[:, None] + (bn - an)[:, None] * s) ** p
        out = out.copy()
        out[near] = h[near] * (vals @ _GL_WEIGHTS) / 2.0
    return out


# --- one-dimensional divergences ----------------------------------------------------


def _as_cdf(F) -> PiecewiseLinearCdf:
    if isinstance(F, PiecewiseLinearCdf):
        return F
    if isinstance(F, EmpiricalMeasure):
        return F.as_cdf()
    if isinstance(F, (CategoricalDist, MomentSummary)):
        raise InvalidInput(f"expected a one-dimensional distribution, got {type(F).__name__}")
    return EmpiricalMeasure(F).as_cdf()


def _merged_segments(F, G, extra=None):
    grid = np.union1d(F.breakpoints, G.breakpoints)
    if extra is not None:
        grid = np.union1d(grid, extra)
    lo, hi = grid[:-1], grid[1:]
    fa = eval_right(F.breakpoints, F.values_left, F.values_right, lo)
    fb = eval_left(F.breakpoints, F.values_left, F.values_right, hi)
    ga = eval_right(G.breakpoints, G.values_left, G.values_right, lo)
    gb = eval_left(G.breakpoints, G.values_left, G.values_right, hi)
    return grid, fa - ga, fb - gb


def _iq(F, G) -> float:
    grid, a, b = _merged_segments(F, G)
    return float(np.sum(seg_sq(a, b, np.diff(grid))))


def _wiq(F, G, w: WeightFunction) -> float:
    grid, a, b = _merged_segments(F, G, w.breakpoints)
    mid = (grid[:-1] + grid[1:]) / 2.0
    return float(np.sum(w(mid) * seg_sq(a, b, np.diff(grid))))


def _av(F, G) -> float:
    grid, a, b = _merged_segments(F, G)
    return float(np.sum(seg_abs(a, b, np.diff(grid))))


def _ks(F, G) -> float:
    grid = np.union1d(F.breakpoints, G.breakpoints)
    right = eval_right(F.breakpoints, F.values_left, F.values_right, grid) - eval_right(
        G.breakpoints, G.values_left, G.values_right, grid
    )
    left = eval_left(F.breakpoints, F.values_left, F.values_right, grid) - eval_left(
        G.breakpoints, G.values_left, G.values_right, grid
    )
    return float(max(np.max(np.abs(right)), np.max(np.abs(left))))


def _quantile_segments(F, G, u_extra=None):
    UF, TF = F.quantile_knots()
    UG, TG = G.quantile_knots()
    u = np.union1d(UF, UG)
    if u_extra is not None:
        u = np.union1d(u, u_extra)
    lo, hi = u[:-1], u[1:]
    a = quantile_plus(UF, TF, lo) - quantile_plus(UG, TG, lo)
    b = quantile_minus(UF, TF, hi) - quantile_minus(UG, TG, hi)
    return np.diff(u), a, b


def _wasserstein(F, G, p) -> float:
    h, a, b = _quantile_segments(F, G)
    if p == 1.0:
        return float(np.sum(seg_abs(a, b, h)))
    if p == 2.0:
        return float(math.sqrt(np.sum(seg_sq(a, b, h))))
    return float(np.sum(seg_pow(a, b, h, p)) ** (1.0 / p))


def iq_distance(F, G, units="data") -> DivergenceValue:
    """Integrated quadratic distance: integral of (F - G)^2."""
    return _wrap("IQ", _iq(_as_cdf(F), _as_cdf(G)), units)


def weighted_iq(F, G, w: WeightFunction, units="data") -> DivergenceValue:
    if not isinstance(w, WeightFunction):
        w = WeightFunction(*w)
    return _wrap("WIQ", _wiq(_as_cdf(F), _as_cdf(G), w), units, weight=w)


def area_validation_metric(F, G, units="data") -> DivergenceValue:
    """Integral of |F - G|, split at sign changes on every merged segment."""
    return _wrap("AV", _av(_as_cdf(F), _as_cdf(G)), units)


def wasserstein(F, G, p: float = 1.0, units="data") -> DivergenceValue:
    """Order-p Wasserstein distance as the L^p distance of the quantile functions.

    Exact for every p: on each merged quantile segment the difference is
    linear and the integral of its p-th absolute power has a closed form.
    """
    p = float(p)
    if not p >= 1.0:
        raise InvalidInput(f"Wasserstein order must be >= 1, got {p!r}")
    return _wrap("WASSERSTEIN", _wasserstein(_as_cdf(F), _as_cdf(G), p), units, p=p)


def ks_distance(F, G) -> DivergenceValue:
    return _wrap("KS", _ks(_as_cdf(F), _as_cdf(G)))


# --- moment-based divergences ---------------------------------------------------------


def _as_moments(F) -> MomentSummary:
    if isinstance(F, MomentSummary):
        return F
    if isinstance(F, (PiecewiseLinearCdf, EmpiricalMeasure)):
        return F.moments()
    if isinstance(F, CategoricalDist):
        raise InvalidInput("moment divergences need real-valued distributions")
    return moment_summary(F)


def _mean_gap(F, G) -> np.ndarray:
    if F.m != G.m:
        raise InvalidInput(f"dimension mismatch: {F.m} vs {G.m}")
    return F.mean - G.mean


def mean_value_divergence(F, G, units="data") -> DivergenceValue:
    F, G = _as_moments(F), _as_moments(G)
    d = _mean_gap(F, G)
    return _wrap("MV", float(d @ d), units)


def mahalanobis_divergence(F, G, sigma) -> DivergenceValue:
    F, G = _as_moments(F), _as_moments(G)
    d = _mean_gap(F, G)
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    if sigma.shape != (F.m, F.m):
        raise InvalidInput("sigma has the wrong shape")
    L = spd_factor(sigma, "sigma")
    return _wrap("MAHALANOBIS", _quad_form(L, d), sigma=sigma)


def improper_mahalanobis(F, G) -> DivergenceValue:
    """Mahalanobis form with the forecast's own covariance; not proper."""
    F, G = _as_moments(F), _as_moments(G)
    d = _mean_gap(F, G)
    L = spd_factor(F.cov, "forecast covariance")
    return _wrap("IMPROPER_MAHALANOBIS", _quad_form(L, d))


def _is_singular(cov) -> bool:
    tr = float(np.trace(cov))
    if tr <= 0:
        return True
    return float(np.linalg.eigvalsh(cov).min()) <= 1e-12 * tr


def dawid_sebastiani(F, G) -> DivergenceValue:
    F, G = _as_moments(F), _as_moments(G)
    d = _mean_gap(F, G)
    L = spd_factor(F.cov, "forecast covariance")
    if _is_singular(G.cov):
        return _wrap("DS", math.inf)
    # eigenvalues of L^{-1} S_G L^{-T} give tr - logdet - m as sum(lam - log lam - 1)
    A = np.linalg.solve(L, G.cov)
    M = np.linalg.solve(L, A.T)
    lam = np.linalg.eigvalsh((M + M.T) / 2.0)
    if lam.min() <= 0:
        return _wrap("DS", math.inf)
    value = float(np.sum(lam - np.log(lam) - 1.0)) + _quad_form(L, d)
    return _wrap("DS", max(value, 0.0))


# --- categorical divergences ------------------------------------------------------------


def _as_categorical(F) -> CategoricalDist:
    if isinstance(F, CategoricalDist):
        return F
    if isinstance(F, (PiecewiseLinearCdf, EmpiricalMeasure, MomentSummary)):
        raise InvalidInput("categorical divergences need probability vectors")
    return CategoricalDist(F)


def _pair(F, G):
    F, G = _as_categorical(F), _as_categorical(G)
    if F.c != G.c:
        raise InvalidInput(f"category count mismatch: {F.c} vs {G.c}")
    return F.probs, G.probs


def _kl(f, g) -> float:
    act = f > 0
    if np.any(g[act] == 0):
        return math.inf
    return max(float(np.sum(f[act] * np.log(f[act] / g[act]))), 0.0)


def kl_divergence(F, G) -> DivergenceValue:
    """sum_i f_i log(f_i / g_i), with 0 log 0 = 0 and +inf when g_i = 0 < f_i."""
    f, g = _pair(F, G)
    return _wrap("KL", _kl(f, g))


def kl_score_divergence(F, sample_counts) -> DivergenceValue:
    """Log-score divergence of F from the empirical frequencies of the counts."""
    F = _as_categorical(F)
    counts = _as_counts(sample_counts)
    if counts.size != F.c:
        raise InvalidInput(f"category count mismatch: {F.c} vs {counts.size}")
    g_hat = counts / counts.sum()
    return _wrap("KL_SCOREFORM", _kl(g_hat, F.probs))


def brier_divergence(F, G) -> DivergenceValue:
    f, g = _pair(F, G)
    return _wrap("BRIER", float(np.sum((f - g) ** 2)))


def hellinger_distance(F, G) -> DivergenceValue:
    f, g = _pair(F, G)
    h2 = 0.5 * float(np.sum((np.sqrt(f) - np.sqrt(g)) ** 2))
    return _wrap("HELLINGER", math.sqrt(min(max(h2, 0.0), 1.0)))


# --- dispatch --------------------------------------------------------------------------


def divergence(spec: DivergenceSpec, F, G, units: str = "data") -> DivergenceValue:
    """Evaluate ``spec`` for forecast F against G.

    For KL_SCOREFORM, G may be a vector of category counts or a
    CategoricalDist (then the score form is KL(G, F)).
    """
    if not isinstance(spec, DivergenceSpec):
        spec = DivergenceSpec.from_json(spec)
    i = spec.id
    if i in ONE_DIMENSIONAL:
        F, G = _as_cdf(F), _as_cdf(G)
        if i == "IQ":
            v = _iq(F, G)
        elif i == "WIQ":
            v = _wiq(F, G, spec.weight)
        elif i == "AV":
            v = _av(F, G)
        elif i == "KS":
            v = _ks(F, G)
        else:
            v = _wasserstein(F, G, spec.p)
    elif i in MOMENT_BASED:
        if i == "MV":
            v = mean_value_divergence(F, G).value
        elif i == "MAHALANOBIS":
            v = mahalanobis_divergence(F, G, spec.sigma).value
        elif i == "IMPROPER_MAHALANOBIS":
            v = improper_mahalanobis(F, G).value
        else:
            v = dawid_sebastiani(F, G).value
    else:
        if i == "KL_SCOREFORM":
            if isinstance(G, CategoricalDist):
                f, g = _pair(F, G)
                v = _kl(g, f)
            else:
                v = kl_score_divergence(F, G).value
        elif i == "KL":
            v = kl_divergence(F, G).value
        elif i == "BRIER":
            v = brier_divergence(F, G).value
        else:
            v = hellinger_distance(F, G).value
    return DivergenceValue(float(v), spec.units(units), spec)


__all__ = [
    "DIVERGENCE_IDS",
    "DivergenceSpec",
    "DivergenceValue",
    "Propriety",
    "WeightFunction",
    "area_validation_metric",
    "brier_divergence",
    "dawid_sebastiani",
    "divergence",
    "hellinger_distance",
    "improper_mahalanobis",
    "iq_distance",
    "kl_divergence",
    "kl_score_divergence",
    "ks_distance",
    "mahalanobis_divergence",
    "mean_value_divergence",
    "wasserstein",
    "weighted_iq",
    "SingularCovariance",
]
