import json
import math
import os
import subprocess
import sys

import numpy as np
import pytest

from properdiv import (
    CategoricalDist,
    DivergenceSpec,
    InvalidInput,
    MomentSummary,
    PiecewiseLinearCdf,
    Unsupported,
    iq_distance,
)
from properdiv.propriety_lab import (
    IMPROPER_DETECTED,
    INCONCLUSIVE,
    PROPER_CONSISTENT,
    CounterexampleFamily,
    McConfig,
    Sampler,
    Scenario,
    asymptotic_curve,
    av_candidate,
    batch_divergence,
    build_counterexample,
    classify,
    draw_replicates,
    exact_expected_divergence,
    exact_expected_divergence_k1,
    hellinger_binary_k1,
    ks_candidate,
    mc_expected_divergence,
    propriety_check,
)

U = PiecewiseLinearCdf.uniform()
UNIF = Sampler.uniform()


# --- configuration and samplers -----------------------------------------------------


@pytest.mark.parametrize("kw", [{"seed": 1, "n_reps": 1}, {"seed": -1}, {"seed": 1, "confidence": 1.0}, {"seed": 2**64}])
def test_mc_config_validation(kw):
    with pytest.raises(InvalidInput):
        McConfig(**kw)


def test_mc_config_defaults():
    cfg = McConfig(seed=3)
    assert cfg.n_reps == 100_000 and cfg.confidence == 0.99
    assert cfg.z == pytest.approx(2.3263478740408408)


def test_sampler_draws_are_sorted_and_in_range():
    cfg = McConfig(5, 1000)
    S = draw_replicates(Sampler.uniform(2, 3), 4, cfg)
    assert S.shape == (1000, 4) and np.all(np.diff(S, axis=1) >= 0)
    assert S.min() >= 2 and S.max() <= 3
    D = draw_replicates(Sampler.discrete([0, 5], [0.25, 0.75]), 3, McConfig(5, 20000))
    assert set(np.unique(D)) == {0.0, 5.0}
    assert np.mean(D == 5.0) == pytest.approx(0.75, abs=0.01)
    C = draw_replicates(Sampler.categorical([0.2, 0.8]), 6, cfg)
    assert C.shape == (1000, 2) and np.all(C.sum(axis=1) == 6)


def test_draws_depend_only_on_seed_sampler_and_k():
    a = draw_replicates(UNIF, 3, McConfig(11, 20000))
    b = draw_replicates(UNIF, 3, McConfig(11, 40000))
    assert np.array_equal(a, b[:20000])
    c = draw_replicates(UNIF, 3, McConfig(12, 20000))
    assert not np.array_equal(a, c)
    d = draw_replicates(UNIF, 4, McConfig(11, 20000))
    assert not np.array_equal(a, d[:, :3])


def test_sampler_json_round_trip():
    for s in (Sampler.uniform(1, 2), Sampler.discrete([1, 2], [0.5, 0.5]), Sampler.categorical([0.1, 0.9])):
        assert Sampler.from_json(s.to_json()) == s
        assert Sampler.from_json(s.to_json()).key() == s.key()
    with pytest.raises(InvalidInput):
        Sampler.from_json({"kind": "normal"})
    with pytest.raises(InvalidInput):
        Sampler.uniform(1, 1)


# --- Monte Carlo expectations -------------------------------------------------------------


def test_mc_counterexample_values():
    cfg = McConfig(42, 100_000)
    e = mc_expected_divergence(DivergenceSpec("AV"), U, UNIF, 1, cfg)
    assert abs(e.mean - 1 / 3) <= 3 * e.std_error
    e = mc_expected_divergence(DivergenceSpec("AV"), PiecewiseLinearCdf.point_mass(0.5), UNIF, 1, cfg)
    assert abs(e.mean - 1 / 4) <= 3 * e.std_error
    e = mc_expected_divergence(DivergenceSpec("KS"), U, UNIF, 1, cfg)
    assert abs(e.mean - 3 / 4) <= 3 * e.std_error
    assert e.draws == 100_000 and e.n_infinite == 0


def test_mc_type_mismatch():
    cfg = McConfig(1, 100)
    with pytest.raises(InvalidInput):
        mc_expected_divergence(DivergenceSpec("KL_SCOREFORM"), CategoricalDist([0.5, 0.5]), UNIF, 2, cfg)
    with pytest.raises(InvalidInput):
        mc_expected_divergence(DivergenceSpec("AV"), U, Sampler.categorical([0.5, 0.5]), 2, cfg)


def test_mc_infinity_is_counted():
    cfg = McConfig(1, 2000)
    e = mc_expected_divergence(DivergenceSpec("KL_SCOREFORM"), CategoricalDist([1.0, 0.0]), Sampler.categorical([0.5, 0.5]), 1, cfg)
    assert e.mean == math.inf and 900 < e.n_infinite < 1100


def test_batch_moment_values_match_scalar():
    rng = np.random.default_rng(0)
    S = np.sort(rng.normal(size=(50, 5)), axis=1)
    F = MomentSummary([0.3], [[1.7]])
    from properdiv import divergence, moment_summary

    for spec in (DivergenceSpec("MV"), DivergenceSpec("MAHALANOBIS", sigma=[[2.0]]), DivergenceSpec("IMPROPER_MAHALANOBIS"), DivergenceSpec("DS")):
        got = batch_divergence(spec, F, S, False)
        ref = [divergence(spec, F, moment_summary(row)).value for row in S]
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-12)
    # constant sample: DS infinite
    assert batch_divergence(DivergenceSpec("DS"), F, np.zeros((1, 3)), False)[0] == math.inf


def test_batch_categorical_values_match_scalar():
    from properdiv import divergence

    rng = np.random.default_rng(1)
    F = CategoricalDist([0.2, 0.5, 0.3])
    counts = rng.multinomial(4, [0.3, 0.3, 0.4], size=60)
    for i in ("KL", "KL_SCOREFORM", "BRIER", "HELLINGER"):
        got = batch_divergence(DivergenceSpec(i), F, counts, True)
        ref = [
            divergence(DivergenceSpec(i), F, c if i == "KL_SCOREFORM" else CategoricalDist(c / c.sum())).value
            for c in counts
        ]
        np.testing.assert_allclose(got, ref, rtol=1e-12, atol=1e-14)


# --- exact expectations -------------------------------------------------------------------------


def test_exact_k1_examples():
    av = DivergenceSpec("AV")
    assert exact_expected_divergence_k1(av, U, UNIF) == pytest.approx(1 / 3, abs=1e-10)
    assert exact_expected_divergence_k1(av, PiecewiseLinearCdf.point_mass(0.5), UNIF) == pytest.approx(0.25, abs=1e-10)
    ks = DivergenceSpec("KS")
    assert exact_expected_divergence_k1(ks, ks_candidate(1), UNIF) == pytest.approx(0.5, abs=1e-10)
    assert exact_expected_divergence_k1(ks, U, UNIF) == pytest.approx(0.75, abs=1e-10)
    assert exact_expected_divergence_k1(DivergenceSpec("IQ"), PiecewiseLinearCdf.point_mass(0), UNIF) == pytest.approx(0.5, abs=1e-10)


def test_exact_k1_hellinger_closed_form():
    h = DivergenceSpec("HELLINGER")
    for f1, g1 in ((0.10, 0.25), (0.25, 0.25), (0.6, 0.3)):
        v = exact_expected_divergence_k1(h, CategoricalDist([f1, 1 - f1]), Sampler.categorical([g1, 1 - g1]))
        assert v == pytest.approx(hellinger_binary_k1(f1, g1), abs=1e-14)
    assert hellinger_binary_k1(0.10, 0.25) == pytest.approx(0.3766, abs=1e-4)
    assert hellinger_binary_k1(0.25, 0.25) == pytest.approx(0.4513, abs=1e-4)


def test_exact_k1_kl_scoreform_is_cross_entropy():
    F, g = CategoricalDist([0.2, 0.3, 0.5]), [0.5, 0.25, 0.25]
    v = exact_expected_divergence_k1(DivergenceSpec("KL_SCOREFORM"), F, CategoricalDist(g))
    assert v == pytest.approx(-sum(gi * math.log(fi) for gi, fi in zip(g, F.probs)), abs=1e-14)


def test_exact_k1_unsupported():
    with pytest.raises(Unsupported):
        exact_expected_divergence_k1(DivergenceSpec("MV"), U, UNIF)
    with pytest.raises(Unsupported):
        exact_expected_divergence_k1(DivergenceSpec("HELLINGER"), U, UNIF)


def test_exact_vs_mc_agreement():
    cfg = McConfig(99, 100_000)
    rng = np.random.default_rng(3)
    cases = [
        (DivergenceSpec("AV"), av_candidate(1), UNIF),
        (DivergenceSpec("KS"), ks_candidate(1), UNIF),
        (DivergenceSpec("IQ"), PiecewiseLinearCdf([0.2, 0.9], [0, 0.7], [0.3, 1]), UNIF),
        (DivergenceSpec("AV"), PiecewiseLinearCdf.uniform(0.3, 1.4), UNIF),
        (DivergenceSpec("KS"), PiecewiseLinearCdf.uniform(-0.5, 0.8), UNIF),
        (DivergenceSpec("HELLINGER"), CategoricalDist([0.1, 0.9]), Sampler.categorical([0.25, 0.75])),
        (DivergenceSpec("BRIER"), CategoricalDist([0.2, 0.3, 0.5]), Sampler.categorical([0.5, 0.25, 0.25])),
        (DivergenceSpec("KL_SCOREFORM"), CategoricalDist([0.2, 0.3, 0.5]), Sampler.categorical([0.5, 0.25, 0.25])),
        (DivergenceSpec("IQ"), PiecewiseLinearCdf.from_atoms(rng.uniform(0, 1, 3)), Sampler.discrete([0.1, 0.4, 0.8], [0.2, 0.5, 0.3])),
    ]
    for spec, F, G in cases:
        exact = exact_expected_divergence_k1(spec, F, G)
        e = mc_expected_divergence(spec, F, G, 1, cfg)
        assert abs(exact - e.mean) <= 4 * e.std_error, (spec.id, exact, e)


def test_multinomial_enumeration_vs_binomial_sum():
    f1, g1 = 0.10, 0.25
    F = CategoricalDist([f1, 1 - f1])
    for k in (1, 2, 5, 10):
        oracle = 0.0
        for j in range(k + 1):
            p = math.comb(k, j) * g1**j * (1 - g1) ** (k - j)
            gh = j / k
            h2 = 0.5 * ((math.sqrt(f1) - math.sqrt(gh)) ** 2 + (math.sqrt(1 - f1) - math.sqrt(1 - gh)) ** 2)
            oracle += p * math.sqrt(h2)
        got = exact_expected_divergence(DivergenceSpec("HELLINGER"), F, CategoricalDist([g1, 1 - g1]), k)
        assert got == pytest.approx(oracle, abs=1e-14)
    assert exact_expected_divergence(DivergenceSpec("HELLINGER"), F, CategoricalDist([g1, 1 - g1]), 1) == pytest.approx(
        hellinger_binary_k1(f1, g1), abs=1e-14
    )


def test_enumeration_three_categories_vs_mc():
    spec = DivergenceSpec("BRIER")
    F, g = CategoricalDist([0.2, 0.3, 0.5]), [0.5, 0.3, 0.2]
    exact = exact_expected_divergence(spec, F, CategoricalDist(g), 4)
    e = mc_expected_divergence(spec, F, Sampler.categorical(g), 4, McConfig(5, 50_000))
    assert abs(exact - e.mean) <= 4 * e.std_error


def test_kl_scoreform_enumeration_is_infinite_when_f_has_zero():
    v = exact_expected_divergence(DivergenceSpec("KL_SCOREFORM"), CategoricalDist([1.0, 0.0]), CategoricalDist([0.5, 0.5]), 3)
    assert v == math.inf


# --- counterexamples -----------------------------------------------------------------------------


def test_build_counterexamples():
    sc = build_counterexample(CounterexampleFamily("AV_UNIFORM", k=1))
    F = sc.candidate_for(1)
    assert F.breakpoints.tolist() == [0.5] and sc.divergence.id == "AV"
    sc = build_counterexample(CounterexampleFamily("KS_UNIFORM", k=1))
    F = sc.candidate_for(1)
    assert F.breakpoints.tolist() == [0.0, 1.0] and F.values_right.tolist() == [0.5, 1.0]
    sc = build_counterexample(CounterexampleFamily("HELLINGER_BINARY", f1=0.10, g1=0.25))
    assert sc.candidate_for(5).probs.tolist() == [0.10, 0.90]
    assert sc.truth.probs == (0.25, 0.75) and sc.k_values == (1, 2, 5, 6, 10)
    F4 = av_candidate(4)
    assert np.allclose(F4.breakpoints, [0.2, 0.4, 0.6, 0.8]) and np.allclose(np.diff(F4.values_right), 0.25)
    K3 = ks_candidate(3)
    assert np.allclose(K3.breakpoints, [0, 1 / 3, 2 / 3, 1]) and np.allclose(K3.values_right, [0.25, 0.5, 0.75, 1])


@pytest.mark.parametrize("bad", [dict(id="AV_UNIFORM", k=0), dict(id="KS_UNIFORM"), dict(id="OTHER", k=1), dict(id="HELLINGER_BINARY", f1=1.5)])
def test_counterexample_validation(bad):
    with pytest.raises(InvalidInput):
        CounterexampleFamily(**bad)


# --- verdicts --------------------------------------------------------------------------------------


def test_classify_rule():
    z = 2.326
    assert classify(-0.01, 0.001, z) == IMPROPER_DETECTED
    assert classify(-0.002, 0.001, z) == INCONCLUSIVE
    assert classify(0.001, 0.001, z) == INCONCLUSIVE
    assert classify(0.002, 0.001, z) == PROPER_CONSISTENT
    assert classify(0.0, 0.0, z) == PROPER_CONSISTENT
    assert classify(-1e-12, 0.0, z) == IMPROPER_DETECTED


def test_iq_identical_is_proper_consistent():
    sc = Scenario(DivergenceSpec("IQ"), UNIF, U, (1, 3, 10))
    v = propriety_check(sc, McConfig(1, 5000))
    assert all(r.verdict == PROPER_CONSISTENT for r in v.results)
    assert all(r.std_error_diff == 0.0 and r.estimate_F == r.estimate_G for r in v.results)


def test_crn_draw_accounting():
    sc = build_counterexample(CounterexampleFamily("AV_UNIFORM", k=1), (1, 4))
    v = propriety_check(sc, McConfig(2, 3000))
    for r in v.results:
        assert r.draws == 3000 * r.k  # one set of draws per k
        assert r.evaluations == 2 * 3000  # scored by both F and G
    # the G estimate equals a standalone MC run on the same substreams
    e = mc_expected_divergence(sc.divergence, U, UNIF, 4, McConfig(2, 3000))
    assert v.by_k()[4].estimate_G == e.mean


def test_infinite_estimates_flagged():
    sc = Scenario(DivergenceSpec("KL_SCOREFORM"), Sampler.categorical([0.5, 0.5]), CategoricalDist([1.0, 0.0]), (2,))
    r = propriety_check(sc, McConfig(1, 500)).results[0]
    assert r.infinite and r.estimate_F == math.inf and r.verdict == PROPER_CONSISTENT
    assert json.loads(json.dumps(r.to_json()))["estimate_F"] == "inf"


def test_scenario_validation():
    with pytest.raises(InvalidInput):
        Scenario(DivergenceSpec("IQ"), UNIF, U, ())
    with pytest.raises(InvalidInput):
        Scenario(DivergenceSpec("IQ"), UNIF, U, (0,))
    with pytest.raises(InvalidInput):
        Scenario(DivergenceSpec("HELLINGER"), UNIF, CategoricalDist([0.5, 0.5]), (1,))
    with pytest.raises(InvalidInput):
        Scenario(DivergenceSpec("HELLINGER"), Sampler.categorical([0.5, 0.5]), CategoricalDist([0.2, 0.3, 0.5]), (1,))
    with pytest.raises(InvalidInput):
        Scenario(DivergenceSpec("AV"), UNIF, {1: U}, (1, 2))


def test_scenario_json_round_trip():
    for sc in (
        build_counterexample(CounterexampleFamily("KS_UNIFORM", k=2), (2, 3)),
        build_counterexample(CounterexampleFamily("HELLINGER_BINARY")),
        Scenario(DivergenceSpec("DS"), UNIF, MomentSummary([0.5], [[0.1]]), (3,)),
    ):
        text = json.dumps(sc.to_json())
        assert Scenario.from_json(text).to_json() == sc.to_json()
    with pytest.raises(InvalidInput):
        Scenario.from_json({"divergence": {"id": "IQ"}})


def test_verdict_determinism_across_worker_counts():
    code = (
        "import json\n"
        "from properdiv.propriety_lab import *\n"
        "sc = build_counterexample(CounterexampleFamily('AV_UNIFORM', k=1), (1, 7))\n"
        "print(json.dumps(propriety_check(sc, McConfig(42, 20000)).to_json(), sort_keys=True))"
    )
    outs = []
    for threads in ("1", "4"):
        env = dict(os.environ, PROPERDIV_THREADS=threads, NUMBA_NUM_THREADS="4")
        outs.append(subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True).stdout)
    assert outs[0] == outs[1]


# --- asymptotic curves ----------------------------------------------------------------------------------


def test_asymptotic_curve_av_ks_decrease():
    cfg = McConfig(8, 40_000)
    for spec in (DivergenceSpec("AV"), DivergenceSpec("KS")):
        pts = asymptotic_curve(Scenario(spec, UNIF, U, (1, 4, 16, 64)), cfg)
        for a, b in zip(pts, pts[1:]):
            assert a.estimate_G - b.estimate_G > 2 * math.hypot(a.se_G, b.se_G)


def test_asymptotic_curve_iq_converges_to_gap():
    F = PiecewiseLinearCdf.point_mass(0)
    pts = asymptotic_curve(Scenario(DivergenceSpec("IQ"), UNIF, F, (1, 4, 16, 64, 256)), McConfig(8, 20_000))
    target = iq_distance(F, U).value
    assert target == pytest.approx(1 / 3)
    gaps = [abs(p.estimate_F - target) for p in pts]
    assert gaps[-1] < 0.005 and gaps[-1] < gaps[0]
    # E IQ(F, G_k) = IQ(F, G) + E IQ(G, G_k) for k-proper IQ
    for p in pts:
        assert p.estimate_F - p.estimate_G == pytest.approx(target, abs=4 * p.se_F)


def test_asymptotic_curve_requires_ascending_k():
    with pytest.raises(InvalidInput):
        asymptotic_curve(Scenario(DivergenceSpec("AV"), UNIF, U, (4, 1)), McConfig(1, 100))
