import math

import numpy as np
import pytest

from oracles import SyndromeTableBDD, chase_extrinsic_reference
from tpc.codes import build_code
from tpc.de import (
    FIXED,
    ConfigurationError,
    DeConfig,
    InvalidBracket,
    MessagePopulation,
    channel_llr_stats,
    de_half_iteration,
    design_rate,
    error_fraction,
    find_threshold,
    initial_population,
    run_de,
)
from tpc.gmi import PostProcParams
from tpc.product import CoefficientSchedule, GMI

HAMMING = build_code("ebch", 32, 1)


def test_design_rate_and_llr_stats():
    assert design_rate(HAMMING) == pytest.approx(0.625)
    mu, var = channel_llr_stats(HAMMING, 2.14)
    assert mu == pytest.approx(4 * 0.625 * 10**0.214) == pytest.approx(4.093, abs=1e-3)
    assert var == 2 * mu


def test_population_checks():
    rng = np.random.default_rng(0)
    with pytest.raises(ConfigurationError):
        initial_population(HAMMING, 2.0, 3201, rng)
    with pytest.raises(ConfigurationError):
        initial_population(HAMMING, 2.0, 288, rng)


def test_one_half_iteration_matches_reference_script():
    N, p, snr = 3200, 2, 2.2
    theta = PostProcParams(0.5, 1.5)
    pop = initial_population(HAMMING, snr, N, np.random.default_rng(1))
    new, _, nempty = de_half_iteration(pop, HAMMING, p, snr, np.random.default_rng(2), theta)

    # reference: same RNG call order, pure-Python Chase oracle
    rng = np.random.default_rng(2)
    mu, var = channel_llr_stats(HAMMING, snr)
    l_in = pop.l_in[rng.permutation(N)].reshape(-1, 32)
    l_ch = mu + math.sqrt(var) * rng.standard_normal(l_in.shape)
    bdd = SyndromeTableBDD(HAMMING.generator_matrix, 1, extended=True).decode
    v = np.empty_like(l_in)
    for g in range(l_in.shape[0]):
        _, w, alt = chase_extrinsic_reference(l_in[g], l_ch[g], p, bdd)
        v[g] = np.where(alt, theta.gamma * w, theta.delta * w)
    np.testing.assert_allclose(new.v, v.ravel(), rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(new.l_in, (l_ch + v).ravel(), rtol=1e-9, atol=1e-12)
    assert error_fraction(new) == np.mean(v < 0) + 0.5 * np.mean(v == 0)
    assert nempty == 0


def test_zero_messages_are_not_convergence():
    pop = MessagePopulation(np.zeros(320), np.zeros(320))
    assert error_fraction(pop) == 0.5


def test_noiseless_limit():
    r = run_de(HAMMING, 2, 30.0, DeConfig(N=3200, l_max=2))
    assert r.trajectory[0] == 0.0 and r.converged


def test_fixed_schedule_mode():
    with pytest.raises(ConfigurationError):
        run_de(HAMMING, 2, 2.0, DeConfig(N=3200, l_max=2, theta_mode=FIXED))
    sched = CoefficientSchedule(GMI, [(0.4, 1.0), (0.5, 1.2)])
    r = run_de(HAMMING, 2, 2.5, DeConfig(N=3200, l_max=2, theta_mode=FIXED, schedule=sched))
    assert [(t.gamma, t.delta) for t in r.thetas] == sched.pairs


def test_empty_list_abort():
    # p = 1 with strict BDD and very noisy inputs empties many lists
    pop = MessagePopulation(np.random.default_rng(3).normal(0, 0.1, 3200))
    with pytest.raises(ConfigurationError):
        de_half_iteration(pop, build_code("ebch", 32, 2), 1, -5.0, np.random.default_rng(4), bdd_mode="strict")


def test_common_random_numbers_monotone():
    cfg = DeConfig(N=32_000, l_max=15, seed=5)
    lo = run_de(HAMMING, 2, 2.2, cfg).trajectory
    hi = run_de(HAMMING, 2, 2.5, cfg).trajectory
    assert all(h <= l for h, l in zip(hi, lo))


def test_invalid_bracket():
    cfg = DeConfig(N=3200, l_max=3)
    with pytest.raises(InvalidBracket):
        find_threshold(HAMMING, 2, cfg, (2.0, 1.0))
    with pytest.raises(InvalidBracket):
        find_threshold(HAMMING, 2, cfg, (20.0, 30.0))


def test_threshold_result_json():
    cfg = DeConfig(N=3200, l_max=3)
    res = find_threshold(HAMMING, 2, cfg, (-2.0, 12.0), resolution_db=2.0)
    doc = res.to_json()
    lo, hi = doc["bracket"]
    assert lo < hi and hi - lo <= 2.0 and doc["ebn0_star_db"] == hi
    assert doc["code"] == "(32,26,4)" and len(doc["trajectory"]) >= 3
