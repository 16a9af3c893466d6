"""One-dimensional distributions, empirical measures, categorical and moment summaries.

All containers are immutable: their arrays are copied on construction and
flagged read-only.
"""

from __future__ import annotations

import csv
import datetime as _dt
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import IncompleteYear, InvalidInput, OutOfRange, ParseError

_MONOTONE_SLACK = 1e-12


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# --- raw CDF / quantile evaluation on (x, left, right) arrays -----------------


def eval_right(x, left, right, t):
    """F(t) for the right-continuous piecewise-linear CDF given by its arrays."""
    t = np.asarray(t, dtype=float)
    n = x.shape[0]
    i = np.searchsorted(x, t, side="right") - 1
    j = np.clip(i, 0, max(n - 2, 0))
    if n > 1:
        width = x[j + 1] - x[j]
        # lanes outside the support are discarded below; silence their overflow
        with np.errstate(over="ignore", invalid="ignore"):
            frac = (t - x[j]) / width
            inner = right[j] + (left[j + 1] - right[j]) * frac
    else:
        inner = np.zeros_like(t)
    out = np.where(i < 0, 0.0, np.where(i >= n - 1, 1.0, inner))
    return out


def eval_left(x, left, right, t):
    """Left limit F(t-) of the CDF given by its arrays."""
    t = np.asarray(t, dtype=float)
    n = x.shape[0]
    i = np.searchsorted(x, t, side="left")
    j = np.clip(i, 1, max(n - 1, 1))
    if n > 1:
        width = x[j] - x[j - 1]
        with np.errstate(over="ignore", invalid="ignore"):
            frac = (t - x[j - 1]) / width
            inner = right[j - 1] + (left[j] - right[j - 1]) * frac
    else:
        inner = np.zeros_like(t)
    return np.where(i <= 0, 0.0, np.where(i >= n, 1.0, inner))


def quantile_minus(U, T, u):
    """Generalized inverse inf{t : F(t) >= u} from the quantile knots (U, T)."""
    u = np.asarray(u, dtype=float)
    last = U.shape[0] - 1
    p = np.clip(np.searchsorted(U, u, side="left"), 0, last)
    q = np.clip(p - 1, 0, last)
    span = U[p] - U[q]
    safe = np.where(span > 0, span, 1.0)
    interp = T[q] + (T[p] - T[q]) * (u - U[q]) / safe
    return np.where((U[p] == u) | (span <= 0), T[p], interp)


def quantile_plus(U, T, u):
    """Right limit of the quantile function at u."""
    u = np.asarray(u, dtype=float)
    last = U.shape[0] - 1
    p = np.clip(np.searchsorted(U, u, side="right") - 1, 0, last)
    q = np.clip(p + 1, 0, last)
    span = U[q] - U[p]
    safe = np.where(span > 0, span, 1.0)
    interp = T[p] + (T[q] - T[p]) * (u - U[p]) / safe
    return np.where((U[p] == u) | (span <= 0), T[p], interp)


# --- types ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PiecewiseLinearCdf:
    """Right-continuous CDF, linear between breakpoints, with stored left limits.

    ``values_left[i]`` is F(x_i-) and ``values_right[i]`` is F(x_i). The CDF
    is 0 before the first breakpoint and 1 from the last one onwards.
    """

    breakpoints: np.ndarray
    values_left: np.ndarray
    values_right: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.breakpoints, dtype=float).ravel()
        lo = np.asarray(self.values_left, dtype=float).ravel()
        hi = np.asarray(self.values_right, dtype=float).ravel()
        if x.size == 0:
            raise InvalidInput("a CDF needs at least one breakpoint")
        if not (x.shape == lo.shape == hi.shape):
            raise InvalidInput("breakpoints and values must have equal length")
        if not np.all(np.isfinite(x)):
            raise InvalidInput("breakpoints must be finite")
        if np.any(np.diff(x) <= 0):
            raise InvalidInput("breakpoints must be strictly increasing")
        merged = np.column_stack([lo, hi]).ravel()
        if np.any(merged < -_MONOTONE_SLACK) or np.any(merged > 1 + _MONOTONE_SLACK):
            raise InvalidInput("CDF values must lie in [0, 1]")
        if np.any(np.diff(merged) < -_MONOTONE_SLACK):
            raise InvalidInput("CDF values must be nondecreasing")
        if abs(lo[0]) > _MONOTONE_SLACK:
            raise InvalidInput("left limit at the first breakpoint must be 0")
        if abs(hi[-1] - 1.0) > _MONOTONE_SLACK:
            raise InvalidInput("CDF must reach 1 at the last breakpoint")
        merged = np.maximum.accumulate(np.clip(merged, 0.0, 1.0))
        merged[0] = 0.0
        merged[-1] = 1.0
        object.__setattr__(self, "breakpoints", _frozen(x))
        object.__setattr__(self, "values_left", _frozen(merged[0::2]))
        object.__setattr__(self, "values_right", _frozen(merged[1::2]))

    # constructors
    @classmethod
    def point_mass(cls, x: float) -> PiecewiseLinearCdf:
        return cls([x], [0.0], [1.0])

    @classmethod
    def uniform(cls, a: float = 0.0, b: float = 1.0) -> PiecewiseLinearCdf:
        if not b > a:
            raise InvalidInput("uniform law needs a < b")
        return cls([a, b], [0.0, 1.0], [0.0, 1.0])

    @classmethod
    def from_atoms(cls, atoms, weights=None) -> PiecewiseLinearCdf:
        """Step CDF of a discrete law; equal weights when ``weights`` is None."""
        atoms = np.asarray(atoms, dtype=float).ravel()
        if atoms.size == 0:
            raise InvalidInput("no atoms given")
        if weights is None:
            return EmpiricalMeasure(atoms).as_cdf()
        w = np.asarray(weights, dtype=float).ravel()
        if w.shape != atoms.shape or np.any(w < 0) or not np.isfinite(w).all():
            raise InvalidInput("weights must be nonnegative and match the atoms")
        total = w.sum()
        if abs(total - 1.0) > 1e-12:
            raise InvalidInput("weights must sum to 1")
        order = np.argsort(atoms, kind="stable")
        atoms, w = atoms[order], w[order]
        ux, inv = np.unique(atoms, return_inverse=True)
        mass = np.bincount(inv, weights=w, minlength=ux.size)
        keep = mass > 0
        ux, mass = ux[keep], mass[keep]
        cum = np.cumsum(mass)
        cum /= cum[-1]
        left = np.concatenate([[0.0], cum[:-1]])
        return cls(ux, left, cum)

    # evaluation
    def __call__(self, t):
        out = eval_right(self.breakpoints, self.values_left, self.values_right, t)
        return float(out) if out.ndim == 0 else out

    def left_limit(self, t):
        out = eval_left(self.breakpoints, self.values_left, self.values_right, t)
        return float(out) if out.ndim == 0 else out

    def quantile_knots(self):
        """Knots (U, T) of the quantile function, U nondecreasing in [0, 1]."""
        U = np.column_stack([self.values_left, self.values_right]).ravel()
        T = np.repeat(self.breakpoints, 2)
        return U, T

    def quantile(self, u):
        U, T = self.quantile_knots()
        out = quantile_minus(U, T, u)
        return float(out) if out.ndim == 0 else out

    @property
    def support(self) -> tuple[float, float]:
        return float(self.breakpoints[0]), float(self.breakpoints[-1])

    @property
    def is_step(self) -> bool:
        return bool(np.all(self.values_left[1:] == self.values_right[:-1]))

    def shift(self, c: float) -> PiecewiseLinearCdf:
        return PiecewiseLinearCdf(self.breakpoints + c, self.values_left, self.values_right)

    def components(self):
        """Split into point masses and uniform pieces.

        Returns ``(atom_x, atom_w, seg_a, seg_b, seg_w)``.
        """
        x, lo, hi = self.breakpoints, self.values_left, self.values_right
        jump = hi - lo
        a_mask = jump > 0
        seg_w = lo[1:] - hi[:-1]
        s_mask = seg_w > 0
        return (x[a_mask], jump[a_mask], x[:-1][s_mask], x[1:][s_mask], seg_w[s_mask])

    def mean(self) -> float:
        ax, aw, sa, sb, sw = self.components()
        return float(np.sum(aw * ax) + np.sum(sw * (sa + sb) / 2.0))

    def variance(self) -> float:
        mu = self.mean()
        ax, aw, sa, sb, sw = self.components()
        a, b = sa - mu, sb - mu
        return float(np.sum(aw * (ax - mu) ** 2) + np.sum(sw * (a * a + a * b + b * b) / 3.0))

    def moments(self) -> MomentSummary:
        return MomentSummary([self.mean()], [[self.variance()]])


@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Equal-weight point masses at ``atoms``; duplicates stack their weight."""

    atoms: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.atoms, dtype=float).ravel()
        if a.size == 0:
            raise InvalidInput("empirical measure needs at least one observation")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("observations must be finite")
        object.__setattr__(self, "atoms", _frozen(np.sort(a, kind="stable")))

    @property
    def k(self) -> int:
        return int(self.atoms.size)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.k, 1.0 / self.k)

    def as_cdf(self) -> PiecewiseLinearCdf:
        ux, counts = np.unique(self.atoms, return_counts=True)
        cum = np.cumsum(counts)
        right = cum / self.k
        left = np.concatenate([[0], cum[:-1]]) / self.k
        return PiecewiseLinearCdf(ux, left, right)

    def moments(self) -> MomentSummary:
        return moment_summary(self.atoms[:, None])


@dataclass(frozen=True, eq=False)
class CategoricalDist:
    probs: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float).ravel()
        if p.size == 0:
            raise InvalidInput("a categorical law needs at least one category")
        if not np.all(np.isfinite(p)) or np.any(p < 0):
            raise InvalidInput("probabilities must be finite and nonnegative")
        if abs(math.fsum(p) - 1.0) > 1e-12:
            raise InvalidInput(f"probabilities sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "probs", _frozen(p))

    @property
    def c(self) -> int:
        return int(self.probs.size)

    @classmethod
    def from_counts(cls, counts) -> CategoricalDist:
        counts = _as_counts(counts)
        return cls(counts / counts.sum())


@dataclass(frozen=True, eq=False)
class MomentSummary:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mean, dtype=float)).ravel()
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        m = mu.size
        if cov.shape != (m, m):
            raise InvalidInput(f"covariance shape {cov.shape} does not match mean length {m}")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(cov))):
            raise InvalidInput("moments must be finite")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise InvalidInput("covariance must be symmetric")
        cov = (cov + cov.T) / 2.0
        tr = np.trace(cov)
        if m and np.linalg.eigvalsh(cov).min() < -1e-12 * max(tr, 1.0):
            raise InvalidInput("covariance must be positive semidefinite")
        object.__setattr__(self, "mean", _frozen(mu))
        object.__setattr__(self, "cov", _frozen(cov))

    @property
    def m(self) -> int:
        return int(self.mean.size)


def _as_counts(counts) -> np.ndarray:
    arr = np.asarray(counts)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidInput("counts must be a nonempty vector")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0) or np.any(arr != np.round(arr)):
        raise InvalidInput("counts must be nonnegative integers")
    arr = arr.astype(np.int64)
    if arr.sum() < 1:
        raise InvalidInput("counts must sum to at least 1")
    return arr


# --- operations ----------------------------------------------------------------


def empirical_from_samples(values: Iterable[float]) -> EmpiricalMeasure:
    if not isinstance(values, np.ndarray):
        values = list(values)
    return EmpiricalMeasure(np.asarray(values, dtype=float))


def cdf_eval(F: PiecewiseLinearCdf, t: float) -> float:
    return F(float(t))


def quantile(F: PiecewiseLinearCdf, u: float) -> float:
    u = float(u)
    if not 0.0 < u <= 1.0:
        raise InvalidInput(f"quantile level {u!r} outside (0, 1]")
    return F.quantile(u)


def bin_counts(values, edges) -> np.ndarray:
    """Counts per bin; bins are [e_{i-1}, e_i) except the last, which is closed."""
    edges = np.asarray(edges, dtype=float).ravel()
    if edges.size < 2 or np.any(np.diff(edges) <= 0):
        raise InvalidInput("edges must be a strictly increasing list of at least two values")
    values = np.asarray(values, dtype=float).ravel()
    if values.size == 0:
        raise InvalidInput("no values to bin")
    bad = ~np.isfinite(values) | (values < edges[0]) | (values > edges[-1])
    if np.any(bad):
        raise OutOfRange(float(values[np.argmax(bad)]))
    c = edges.size - 1
    idx = np.minimum(np.searchsorted(edges, values, side="right") - 1, c - 1)
    return np.bincount(idx, minlength=c)


def bin_to_categorical(values, edges) -> CategoricalDist:
    counts = bin_counts(values, edges)
    return CategoricalDist(counts / counts.sum())


def moment_summary(samples) -> MomentSummary:
    """Mean and population (divisor k) covariance of equally weighted samples."""
    try:
        X = np.asarray(samples, dtype=float)
    except ValueError as exc:
        raise InvalidInput("samples must share one dimension") from exc
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] == 0:
        raise InvalidInput("need at least one sample of equal dimension")
    if not np.all(np.isfinite(X)):
        raise InvalidInput("samples must be finite")
    mu = X.mean(axis=0)
    if np.all(X == X[0]):
        # rounding in the mean would otherwise leave a tiny nonzero covariance
        return MomentSummary(X[0].copy(), np.zeros((X.shape[1], X.shape[1])))
    D = X - mu
    return MomentSummary(mu, D.T @ D / X.shape[0])


class AnnualMaximum(NamedTuple):
    year: int
    value: float
    complete: bool


def _as_date(d) -> _dt.date:
    if isinstance(d, _dt.datetime):
        return d.date()
    if isinstance(d, _dt.date):
        return d
    try:
        return _dt.date.fromisoformat(str(d).strip())
    except ValueError as exc:
        raise InvalidInput(f"unparseable date {d!r}") from exc


def annual_maxima(series: Sequence[tuple], min_days: int = 300) -> list[AnnualMaximum]:
    """Per calendar year maximum of a daily series, years ascending.

    Years with fewer than ``min_days`` entries are still emitted but carry
    ``complete=False`` and raise an :class:`IncompleteYear` warning.
    """
    best: dict[int, float] = {}
    count: dict[int, int] = {}
    for d, v in series:
        v = float(v)
        if not math.isfinite(v):
            raise InvalidInput(f"non-finite value on {d}")
        y = _as_date(d).year
        count[y] = count.get(y, 0) + 1
        if y not in best or v > best[y]:
            best[y] = v
    out = []
    for y in sorted(best):
        complete = count[y] >= min_days
        if not complete:
            warnings.warn(f"year {y} has {count[y]} entries (< {min_days})", IncompleteYear, stacklevel=2)
        out.append(AnnualMaximum(y, best[y], complete))
    return out


# --- energy-form expectations (exact, component-wise) --------------------------


def _abs_antiderivative(x, y):
    # d/dx of (x - y)|x - y| / 2 is |x - y|
    d = x - y
    return d * np.abs(d) / 2.0


def _corner(x, y):
    # mixed second derivative equals |x - y|
    return -np.abs(x - y) ** 3 / 6.0


def expected_abs_deviation(F: PiecewiseLinearCdf, y: float) -> float:
    """E_F |X - y| computed from the atom / uniform-piece decomposition."""
    ax, aw, sa, sb, sw = F.components()
    atom_part = np.sum(aw * np.abs(ax - y))
    seg_part = np.sum(sw * (_abs_antiderivative(sb, y) - _abs_antiderivative(sa, y)) / (sb - sa))
    return float(atom_part + seg_part)


def cross_abs_difference(F: PiecewiseLinearCdf, G: PiecewiseLinearCdf) -> float:
    """E|X - Y| for independent X ~ F, Y ~ G."""
    shift = min(F.breakpoints[0], G.breakpoints[0])
    fx, fw, fa, fb, fs = F.shift(-shift).components()
    gx, gw, ga, gb, gs = G.shift(-shift).components()
    total = np.sum(fw[:, None] * gw[None, :] * np.abs(fx[:, None] - gx[None, :]))
    if gs.size:
        t = (_abs_antiderivative(gb[None, :], fx[:, None]) - _abs_antiderivative(ga[None, :], fx[:, None])) / (gb - ga)
        total += np.sum(fw[:, None] * gs[None, :] * t)
    if fs.size:
        t = (_abs_antiderivative(fb[None, :], gx[:, None]) - _abs_antiderivative(fa[None, :], gx[:, None])) / (fb - fa)
        total += np.sum(gw[:, None] * fs[None, :] * t)
    if fs.size and gs.size:
        a, b = fa[:, None], fb[:, None]
        c, d = ga[None, :], gb[None, :]
        rect = _corner(b, d) - _corner(a, d) - _corner(b, c) + _corner(a, c)
        total += np.sum(fs[:, None] * gs[None, :] * rect / ((b - a) * (d - c)))
    return float(total)


def mean_abs_difference(F: PiecewiseLinearCdf) -> float:
    """E|X - X'| for independent copies X, X' ~ F."""
    return cross_abs_difference(F, F)


# --- file formats ---------------------------------------------------------------


def read_samples(path) -> np.ndarray:
    """One real per line, or a CSV with a ``value`` column."""
    text = Path(path).read_text(encoding="utf-8")
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(f"{path}: no samples")
    out = []
    if lines[0].split(",")[0].strip().lower() == "value" or "," in lines[0]:
        reader = csv.DictReader(lines)
        if reader.fieldnames is None or "value" not in reader.fieldnames:
            raise ParseError(f"{path}: CSV input needs a 'value' column", row=1)
        for n, row in enumerate(reader, start=2):
            out.append(_parse_float(row["value"], n))
    else:
        for n, ln in enumerate(lines, start=1):
            out.append(_parse_float(ln, n))
    if not out:
        raise ParseError(f"{path}: no samples")
    return np.asarray(out)


def read_daily_series(path) -> list[tuple[_dt.date, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"date", "value"} <= set(reader.fieldnames):
            raise ParseError(f"{path}: expected header 'date,value'", row=1)
        out = []
        for n, row in enumerate(reader, start=2):
            try:
                d = _dt.date.fromisoformat(row["date"].strip())
            except (ValueError, AttributeError) as exc:
                raise ParseError(f"bad date {row['date']!r}", row=n) from exc
            out.append((d, _parse_float(row["value"], n)))
    return out


def _parse_float(s, row) -> float:
    try:
        v = float(s)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"not a number: {s!r}", row=row) from exc
    if not math.isfinite(v):
        raise ParseError(f"non-finite value {s!r}", row=row)
    return v
