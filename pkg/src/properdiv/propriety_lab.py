"""Monte Carlo and exact audits of k-propriety.

A divergence d is k-proper when E_G d(G, Ĝ_k) <= E_G d(F, Ĝ_k) for every
candidate F, where Ĝ_k is the empirical measure of k independent draws from
the truth G. The lab estimates both expectations with common random numbers
(the same Ĝ_k draws score F and G) and reports a one-sided verdict.

Random draws come from Philox substreams keyed by the seed, a hash of the
truth sampler, k and a fixed-size chunk index, so results never depend on
how many workers evaluate the replicates.
"""

from __future__ import annotations

import hashlib
import itertools
import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np
from scipy import integrate
from scipy.special import gammaln

from . import _kernels
from ._accel import configure_threads
from .divergences import (
    CATEGORICAL,
    MOMENT_BASED,
    ONE_DIMENSIONAL,
    DivergenceSpec,
    _as_cdf,
    _as_moments,
    divergence,
    hellinger_distance,
    brier_divergence,
    kl_score_divergence,
)
from .errors import InvalidInput, SingularCovariance, Unsupported
from .measures import CategoricalDist, EmpiricalMeasure, MomentSummary, PiecewiseLinearCdf

CHUNK_SIZE = 16384

PROPER_CONSISTENT = "proper_consistent"
IMPROPER_DETECTED = "improper_detected"
INCONCLUSIVE = "inconclusive"


# --- truth samplers -------------------------------------------------------------


@dataclass(frozen=True)
class Sampler:
    """Truth distribution G that generates the observations."""

    kind: str
    a: float = 0.0
    b: float = 1.0
    atoms: Optional[tuple] = None
    weights: Optional[tuple] = None
    probs: Optional[tuple] = None

    def __post_init__(self):
        if self.kind == "uniform":
            if not (math.isfinite(self.a) and math.isfinite(self.b) and self.b > self.a):
                raise InvalidInput("uniform sampler needs finite a < b")
        elif self.kind == "discrete":
            if not self.atoms:
                raise InvalidInput("discrete sampler needs atoms")
            w = self.weights or tuple([1.0 / len(self.atoms)] * len(self.atoms))
            object.__setattr__(self, "atoms", tuple(float(x) for x in self.atoms))
            object.__setattr__(self, "weights", tuple(float(x) for x in w))
            PiecewiseLinearCdf.from_atoms(self.atoms, self.weights)
        elif self.kind == "categorical":
            object.__setattr__(self, "probs", tuple(float(x) for x in (self.probs or ())))
            CategoricalDist(self.probs)
        else:
            raise InvalidInput(f"unknown sampler kind {self.kind!r}")

    @classmethod
    def uniform(cls, a=0.0, b=1.0) -> Sampler:
        return cls("uniform", a=float(a), b=float(b))

    @classmethod
    def discrete(cls, atoms, weights=None) -> Sampler:
        return cls("discrete", atoms=tuple(atoms), weights=None if weights is None else tuple(weights))

    @classmethod
    def categorical(cls, probs) -> Sampler:
        return cls("categorical", probs=tuple(probs))

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"

    def distribution(self):
        if self.kind == "uniform":
            return PiecewiseLinearCdf.uniform(self.a, self.b)
        if self.kind == "discrete":
            return PiecewiseLinearCdf.from_atoms(self.atoms, self.weights)
        return CategoricalDist(self.probs)

    def draw(self, rng: np.random.Generator, n: int, k: int) -> np.ndarray:
        """n replicate samples of size k: sorted rows, or category counts."""
        if self.kind == "categorical":
            return rng.multinomial(k, np.asarray(self.probs), size=n)
        u = rng.random((n, k))
        if self.kind == "uniform":
            out = self.a + (self.b - self.a) * u
        else:
            F = self.distribution()
            cum = F.values_right
            idx = np.minimum(np.searchsorted(cum, u, side="right"), cum.size - 1)
            out = F.breakpoints[idx]
        out.sort(axis=1)
        return out

    def to_json(self):
        if self.kind == "uniform":
            return {"kind": "uniform", "a": self.a, "b": self.b}
        if self.kind == "discrete":
            return {"kind": "discrete", "atoms": list(self.atoms), "weights": list(self.weights)}
        return {"kind": "categorical", "probs": list(self.probs)}

    @classmethod
    def from_json(cls, obj) -> Sampler:
        try:
            kind = obj["kind"]
            if kind == "uniform":
                return cls.uniform(obj.get("a", 0.0), obj.get("b", 1.0))
            if kind == "discrete":
                return cls.discrete(obj["atoms"], obj.get("weights"))
            if kind == "categorical":
                return cls.categorical(obj["probs"])
        except (KeyError, TypeError) as exc:
            raise InvalidInput(f"malformed sampler: {exc}") from exc
        raise InvalidInput(f"unknown sampler kind {obj.get('kind')!r}")

    def key(self) -> int:
        blob = json.dumps(self.to_json(), sort_keys=True).encode()
        return int.from_bytes(hashlib.sha256(blob).digest()[:8], "little")


@dataclass(frozen=True)
class McConfig:
    seed: int
    n_reps: int = 100_000
    confidence: float = 0.99

    def __post_init__(self):
        if not isinstance(self.seed, (int, np.integer)) or not 0 <= int(self.seed) < 2**64:
            raise InvalidInput("seed must be an unsigned 64-bit integer")
        if int(self.n_reps) < 2:
            raise InvalidInput("n_reps must be at least 2")
        if not 0.0 < self.confidence < 1.0:
            raise InvalidInput("confidence must lie in (0, 1)")
        object.__setattr__(self, "seed", int(self.seed))
        object.__setattr__(self, "n_reps", int(self.n_reps))

    @property
    def z(self) -> float:
        return NormalDist().inv_cdf(self.confidence)


def draw_replicates(sampler: Sampler, k: int, cfg: McConfig) -> np.ndarray:
    """All n_reps replicate samples of size k, chunk by chunk from Philox substreams."""
    if k < 1:
        raise InvalidInput("k must be a positive integer")
    key = sampler.key()
    blocks = []
    for c, start in enumerate(range(0, cfg.n_reps, CHUNK_SIZE)):
        n = min(CHUNK_SIZE, cfg.n_reps - start)
        ss = np.random.SeedSequence(cfg.seed, spawn_key=(key, int(k), c))
        rng = np.random.Generator(np.random.Philox(ss))
        blocks.append(sampler.draw(rng, n, k))
    return np.concatenate(blocks, axis=0)


# --- per-replicate divergence values -----------------------------------------------


def _moment_batch(spec: DivergenceSpec, F, S):
    F = _as_moments(F)
    if F.m != 1:
        raise Unsupported("the lab draws one-dimensional samples; moment summaries must have m = 1")
    mu_f = float(F.mean[0])
    var_f = float(F.cov[0, 0])
    mu = S.mean(axis=1)
    var = ((S - mu[:, None]) ** 2).mean(axis=1)
    var[S[:, 0] == S[:, -1]] = 0.0
    gap2 = (mu_f - mu) ** 2
    if spec.id == "MV":
        return gap2
    if spec.id == "MAHALANOBIS":
        sigma = float(spec.sigma[0, 0])
        return gap2 / sigma
    if var_f <= 0:
        raise SingularCovariance("forecast covariance is singular")
    if spec.id == "IMPROPER_MAHALANOBIS":
        return gap2 / var_f
    lam = var / var_f
    with np.errstate(divide="ignore"):
        out = lam - np.log(lam) - 1.0 + gap2 / var_f
    return np.where(var > 0, np.maximum(out, 0.0), np.inf)


def _categorical_batch(spec: DivergenceSpec, F, counts):
    if not isinstance(F, CategoricalDist):
        F = CategoricalDist(F)
    if F.c != counts.shape[1]:
        raise InvalidInput("category count mismatch")
    f = F.probs[None, :]
    g = counts / counts.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        if spec.id == "BRIER":
            return np.sum((f - g) ** 2, axis=1)
        if spec.id == "HELLINGER":
            h2 = 0.5 * np.sum((np.sqrt(f) - np.sqrt(g)) ** 2, axis=1)
            return np.sqrt(np.clip(h2, 0.0, 1.0))
        if spec.id == "KL":
            p, q = np.broadcast_to(f, g.shape), g
        else:
            p, q = g, np.broadcast_to(f, g.shape)
        terms = np.where(p > 0, p * np.log(p / q), 0.0)
        out = np.maximum(terms.sum(axis=1), 0.0)
        return np.where(np.any((p > 0) & (q == 0), axis=1), np.inf, out)


def batch_divergence(spec: DivergenceSpec, F, draws: np.ndarray, categorical: bool) -> np.ndarray:
    """d(F, Ĝ) for every replicate row of ``draws``."""
    if spec.id in CATEGORICAL:
        if not categorical:
            raise InvalidInput(f"{spec.id} needs a categorical truth sampler")
        return _categorical_batch(spec, F, draws)
    if categorical:
        raise InvalidInput(f"{spec.id} needs a real-valued truth sampler")
    if spec.id in MOMENT_BASED:
        return _moment_batch(spec, F, draws)
    F = _as_cdf(F)
    if spec.id == "WASSERSTEIN":
        return _kernels.wasserstein_batch(F, draws, spec.p)
    kind = {"IQ": _kernels.KIND_IQ, "WIQ": _kernels.KIND_WIQ, "AV": _kernels.KIND_AV, "KS": _kernels.KIND_KS}[spec.id]
    return _kernels.cdf_batch(F, draws, kind, weight=spec.weight)


class McEstimate(NamedTuple):
    mean: float
    std_error: float
    n_infinite: int
    draws: int


def _summarize(values: np.ndarray, draws: int) -> McEstimate:
    n_inf = int(np.count_nonzero(np.isinf(values)))
    if n_inf:
        return McEstimate(math.inf, math.inf, n_inf, draws)
    n = values.size
    return McEstimate(float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)), 0, draws)


def _check_sampler(sampler) -> Sampler:
    if isinstance(sampler, Sampler):
        return sampler
    if isinstance(sampler, Mapping):
        return Sampler.from_json(sampler)
    raise InvalidInput(f"not a truth sampler: {sampler!r}")


def mc_expected_divergence(d: DivergenceSpec, F, G_sampler: Sampler, k: int, cfg: McConfig) -> McEstimate:
    """Monte Carlo mean and standard error of d(F, Ĝ_k) over cfg.n_reps replicates."""
    if not isinstance(d, DivergenceSpec):
        d = DivergenceSpec.from_json(d)
    G_sampler = _check_sampler(G_sampler)
    configure_threads()
    draws = draw_replicates(G_sampler, k, cfg)
    values = batch_divergence(d, F, draws, G_sampler.is_categorical)
    return _summarize(values, cfg.n_reps * k)


# --- exact expectations ---------------------------------------------------------------

_K1_SUPPORTED = {"AV", "KS", "HELLINGER", "BRIER", "KL_SCOREFORM", "IQ"}


def _unit_counts(c, j):
    e = np.zeros(c, dtype=np.int64)
    e[j] = 1
    return e


def _point_divergence(d: DivergenceSpec, F, y) -> float:
    return divergence(d, F, PiecewiseLinearCdf.point_mass(y)).value


def exact_expected_divergence_k1(d: DivergenceSpec, F, G) -> float:
    """E_G d(F, Ĝ_1): a finite sum for categorical or discrete G, an integral for uniform G."""
    if not isinstance(d, DivergenceSpec):
        d = DivergenceSpec.from_json(d)
    if d.id not in _K1_SUPPORTED:
        raise Unsupported(f"no exact k = 1 expectation for {d.id}")
    if isinstance(G, Mapping):
        G = Sampler.from_json(G)
    if isinstance(G, Sampler):
        G = G.distribution() if G.kind != "uniform" else G
    if isinstance(G, CategoricalDist):
        if d.id not in CATEGORICAL:
            raise Unsupported(f"{d.id} with a categorical truth")
        F = F if isinstance(F, CategoricalDist) else CategoricalDist(F)
        total = 0.0
        for j, g in enumerate(G.probs):
            if g == 0:
                continue
            e = _unit_counts(G.c, j)
            if d.id == "KL_SCOREFORM":
                v = kl_score_divergence(F, e).value
            elif d.id == "BRIER":
                v = brier_divergence(F, CategoricalDist(e.astype(float))).value
            else:
                v = hellinger_distance(F, CategoricalDist(e.astype(float))).value
            total += g * v
        return total
    if d.id in CATEGORICAL:
        raise Unsupported(f"{d.id} needs a categorical truth")
    F = _as_cdf(F)
    if isinstance(G, PiecewiseLinearCdf) and G.is_step:
        ax, aw, _, _, _ = G.components()
        return float(sum(w * _point_divergence(d, F, y) for y, w in zip(ax, aw)))
    if isinstance(G, Sampler):
        a, b = G.a, G.b
    elif isinstance(G, PiecewiseLinearCdf) and G.breakpoints.size == 2 and G.values_right[0] == 0.0:
        a, b = G.support
    else:
        raise Unsupported("exact k = 1 expectations need a uniform, discrete or categorical truth")
    # integrand is a polynomial between these points; the median is a kink for KS
    inner = np.concatenate([F.breakpoints, [F.quantile(0.5)]])
    pts = sorted({float(t) for t in inner if a < t < b})
    edges = [a, *pts, b]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda y: _point_divergence(d, F, y), lo, hi, epsabs=1e-14, epsrel=1e-13, limit=200)
        total += val
    return total / (b - a)


def hellinger_binary_k1(f1: float, g1: float) -> float:
    """Closed-form E_G d_H(F, Ĝ_1) for F = (f1, 1 - f1), G = (g1, 1 - g1)."""
    return g1 * math.sqrt(1.0 - math.sqrt(f1)) + (1.0 - g1) * math.sqrt(1.0 - math.sqrt(1.0 - f1))


def _compositions(k, c):
    for cuts in itertools.combinations(range(k + c - 1), c - 1):
        prev = -1
        parts = []
        for cut in cuts:
            parts.append(cut - prev - 1)
            prev = cut
        parts.append(k + c - 2 - prev)
        yield parts


def exact_expected_divergence(d: DivergenceSpec, F, G: CategoricalDist, k: int) -> float:
    """E_G d(F, Ĝ_k) for categorical G by enumerating every multinomial outcome."""
    if not isinstance(d, DivergenceSpec):
        d = DivergenceSpec.from_json(d)
    if d.id not in CATEGORICAL:
        raise Unsupported("multinomial enumeration applies to categorical divergences only")
    G = G if isinstance(G, CategoricalDist) else CategoricalDist(G)
    F = F if isinstance(F, CategoricalDist) else CategoricalDist(F)
    counts = np.array(list(_compositions(int(k), G.c)), dtype=np.int64)
    with np.errstate(divide="ignore"):
        logp = gammaln(k + 1) - gammaln(counts + 1).sum(axis=1) + (counts * np.log(G.probs)).sum(axis=1)
    logp = np.where(np.any((counts > 0) & (G.probs == 0), axis=1), -np.inf, logp)
    prob = np.exp(logp)
    values = _categorical_batch(d, F, counts)
    live = prob > 0
    if np.any(np.isinf(values[live])):
        return math.inf
    return float(np.sum(prob[live] * values[live]))


# --- scenarios and verdicts -----------------------------------------------------------


def _dist_to_json(F):
    if isinstance(F, CategoricalDist):
        return {"kind": "categorical", "probs": F.probs.tolist()}
    if isinstance(F, MomentSummary):
        return {"kind": "moments", "mean": F.mean.tolist(), "cov": F.cov.tolist()}
    if isinstance(F, EmpiricalMeasure):
        return {"kind": "atoms", "atoms": F.atoms.tolist()}
    return {
        "kind": "cdf",
        "breakpoints": F.breakpoints.tolist(),
        "values_left": F.values_left.tolist(),
        "values_right": F.values_right.tolist(),
    }


def _dist_from_json(obj):
    try:
        kind = obj["kind"]
        if kind == "categorical":
            return CategoricalDist(obj["probs"])
        if kind == "moments":
            return MomentSummary(obj["mean"], obj["cov"])
        if kind == "atoms":
            return PiecewiseLinearCdf.from_atoms(obj["atoms"], obj.get("weights"))
        if kind == "uniform":
            return PiecewiseLinearCdf.uniform(obj.get("a", 0.0), obj.get("b", 1.0))
        if kind == "point":
            return PiecewiseLinearCdf.point_mass(obj["x"])
        if kind == "cdf":
            return PiecewiseLinearCdf(obj["breakpoints"], obj["values_left"], obj["values_right"])
    except (KeyError, TypeError) as exc:
        raise InvalidInput(f"malformed distribution: {exc}") from exc
    raise InvalidInput(f"unknown distribution kind {obj.get('kind')!r}")


@dataclass(frozen=True, eq=False)
class Scenario:
    """A divergence, a truth sampler G, a candidate F (possibly one per k) and the k values."""

    divergence: DivergenceSpec
    truth: Sampler
    candidate: Union[object, Mapping[int, object]]
    k_values: tuple

    def __post_init__(self):
        ks = tuple(int(k) for k in self.k_values)
        if not ks or any(k < 1 for k in ks):
            raise InvalidInput("k_values must be nonempty positive integers")
        object.__setattr__(self, "k_values", ks)
        if isinstance(self.candidate, Mapping):
            missing = [k for k in ks if k not in self.candidate]
            if missing:
                raise InvalidInput(f"no candidate for k = {missing}")
        categorical = self.divergence.id in CATEGORICAL
        if categorical != self.truth.is_categorical:
            raise InvalidInput(f"{self.divergence.id} does not match a {self.truth.kind} truth")
        for k in ks:
            F = self.candidate_for(k)
            if categorical != isinstance(F, CategoricalDist):
                raise InvalidInput("candidate and truth live on different sample spaces")
            if categorical and F.c != len(self.truth.probs):
                raise InvalidInput("candidate and truth have different category counts")

    def candidate_for(self, k: int):
        if isinstance(self.candidate, Mapping):
            return self.candidate[k]
        return self.candidate

    def to_json(self):
        if isinstance(self.candidate, Mapping):
            cand = {"by_k": {str(k): _dist_to_json(v) for k, v in sorted(self.candidate.items())}}
        else:
            cand = _dist_to_json(self.candidate)
        return {
            "divergence": self.divergence.to_json(),
            "truth": self.truth.to_json(),
            "candidate": cand,
            "k_values": list(self.k_values),
        }

    @classmethod
    def from_json(cls, obj) -> Scenario:
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            cand = obj["candidate"]
            if "by_k" in cand:
                cand = {int(k): _dist_from_json(v) for k, v in cand["by_k"].items()}
            else:
                cand = _dist_from_json(cand)
            return cls(
                DivergenceSpec.from_json(obj["divergence"]),
                Sampler.from_json(obj["truth"]),
                cand,
                tuple(obj["k_values"]),
            )
        except (KeyError, TypeError, AttributeError, ValueError) as exc:
            if isinstance(exc, InvalidInput):
                raise
            raise InvalidInput(f"malformed scenario: {exc}") from exc


@dataclass(frozen=True)
class KVerdict:
    k: int
    estimate_F: float
    estimate_G: float
    std_error_diff: float
    verdict: str
    draws: int
    evaluations: int
    infinite: bool = False

    def to_json(self):
        def num(x):
            return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")

        return {
            "k": self.k,
            "estimate_F": num(self.estimate_F),
            "estimate_G": num(self.estimate_G),
            "std_error_diff": num(self.std_error_diff),
            "verdict": self.verdict,
            "draws": self.draws,
            "evaluations": self.evaluations,
            "infinite": self.infinite,
        }


@dataclass(frozen=True)
class ProprietyVerdict:
    scenario: Scenario
    config: McConfig
    results: tuple = field(default_factory=tuple)

    def by_k(self) -> dict:
        return {r.k: r for r in self.results}

    def to_json(self):
        return {
            "scenario": self.scenario.to_json(),
            "config": {"seed": self.config.seed, "n_reps": self.config.n_reps, "confidence": self.config.confidence},
            "propriety_tag": self.scenario.divergence.propriety.value,
            "results": [r.to_json() for r in self.results],
        }


def classify(mean_diff: float, se: float, z: float) -> str:
    """One-sided verdict on E d(F) - E d(G) given its standard error."""
    if mean_diff + z * se < 0.0:
        return IMPROPER_DETECTED
    if mean_diff >= 2.0 * se:
        return PROPER_CONSISTENT
    return INCONCLUSIVE


def _verdict_for_k(sc: Scenario, k: int, cfg: McConfig) -> KVerdict:
    draws = draw_replicates(sc.truth, k, cfg)
    cat = sc.truth.is_categorical
    v_f = batch_divergence(sc.divergence, sc.candidate_for(k), draws, cat)
    v_g = batch_divergence(sc.divergence, sc.truth.distribution(), draws, cat)
    est_f = _summarize(v_f, 0).mean
    est_g = _summarize(v_g, 0).mean
    n_draws = cfg.n_reps * k
    if math.isinf(est_f) or math.isinf(est_g):
        if math.isinf(est_g) and not math.isinf(est_f):
            verdict = IMPROPER_DETECTED
        elif math.isinf(est_f) and not math.isinf(est_g):
            verdict = PROPER_CONSISTENT
        else:
            verdict = INCONCLUSIVE
        return KVerdict(k, est_f, est_g, math.inf, verdict, n_draws, 2 * cfg.n_reps, infinite=True)
    diff = v_f - v_g
    se = float(diff.std(ddof=1) / math.sqrt(diff.size))
    return KVerdict(k, est_f, est_g, se, classify(float(diff.mean()), se, cfg.z), n_draws, 2 * cfg.n_reps)


def propriety_check(sc: Scenario, cfg: McConfig) -> ProprietyVerdict:
    configure_threads()
    return ProprietyVerdict(sc, cfg, tuple(_verdict_for_k(sc, k, cfg) for k in sc.k_values))


class CurvePoint(NamedTuple):
    k: int
    estimate_G: float
    se_G: float
    estimate_F: float
    se_F: float


def asymptotic_curve(sc: Scenario, cfg: McConfig) -> list[CurvePoint]:
    """E_G d(G, Ĝ_k) and E_G d(F, Ĝ_k) across ascending k."""
    if list(sc.k_values) != sorted(sc.k_values):
        raise InvalidInput("k_values must be ascending")
    configure_threads()
    out = []
    for k in sc.k_values:
        draws = draw_replicates(sc.truth, k, cfg)
        cat = sc.truth.is_categorical
        g = _summarize(batch_divergence(sc.divergence, sc.truth.distribution(), draws, cat), cfg.n_reps * k)
        f = _summarize(batch_divergence(sc.divergence, sc.candidate_for(k), draws, cat), cfg.n_reps * k)
        out.append(CurvePoint(k, g.mean, g.std_error, f.mean, f.std_error))
    return out


# --- counterexamples -------------------------------------------------------------------

FAMILIES = ("AV_UNIFORM", "KS_UNIFORM", "HELLINGER_BINARY")


@dataclass(frozen=True)
class CounterexampleFamily:
    id: str
    k: Optional[int] = None
    f1: float = 0.10
    g1: float = 0.25

    def __post_init__(self):
        fid = str(self.id).upper().replace("-", "_")
        aliases = {"AV": "AV_UNIFORM", "KS": "KS_UNIFORM", "HELLINGER": "HELLINGER_BINARY"}
        fid = aliases.get(fid, fid)
        if fid not in FAMILIES:
            raise InvalidInput(f"unknown counterexample family {self.id!r}")
        object.__setattr__(self, "id", fid)
        if fid != "HELLINGER_BINARY" and (self.k is None or int(self.k) < 1):
            raise InvalidInput("k must be a positive integer")
        if fid == "HELLINGER_BINARY" and not (0.0 <= self.f1 <= 1.0 and 0.0 <= self.g1 <= 1.0):
            raise InvalidInput("f1 and g1 must be probabilities")


def av_candidate(k: int) -> PiecewiseLinearCdf:
    """Mass 1/k at i/(k+1), i = 1..k."""
    return PiecewiseLinearCdf.from_atoms(np.arange(1, k + 1) / (k + 1))


def ks_candidate(k: int) -> PiecewiseLinearCdf:
    """Mass 1/(k+1) at i/k, i = 0..k."""
    return PiecewiseLinearCdf.from_atoms(np.arange(0, k + 1) / k)


def build_counterexample(fam: CounterexampleFamily, k_values: Optional[Sequence[int]] = None) -> Scenario:
    if fam.id == "HELLINGER_BINARY":
        ks = tuple(k_values) if k_values is not None else ((fam.k,) if fam.k else (1, 2, 5, 6, 10))
        return Scenario(
            DivergenceSpec("HELLINGER"),
            Sampler.categorical((fam.g1, 1.0 - fam.g1)),
            CategoricalDist([fam.f1, 1.0 - fam.f1]),
            ks,
        )
    ks = tuple(k_values) if k_values is not None else (int(fam.k),)
    if any(int(k) < 1 for k in ks):
        raise InvalidInput("k must be a positive integer")
    make = av_candidate if fam.id == "AV_UNIFORM" else ks_candidate
    spec = DivergenceSpec("AV" if fam.id == "AV_UNIFORM" else "KS")
    return Scenario(spec, Sampler.uniform(0.0, 1.0), {int(k): make(int(k)) for k in ks}, ks)
