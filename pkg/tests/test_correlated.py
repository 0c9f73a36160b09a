import math
from fractions import Fraction

import numpy as np
import pytest

from gencap.correlated import (
    HypergeometricLaw,
    YhApproximator,
    estimate_elogz_correlated,
    hypergeometric_sample,
    log_abar,
    y_h_eta_approx,
    y_h_exact,
)
from gencap.costs import ModelParams, risk_linear
from gencap.errors import CapacityError, DomainError
from gencap.gc import noise_draw
from gencap.hypothesis import log_comb, stratum_size
from gencap.partition import exhaustive_log_partitions, log_sum_exp

import oracles

XI8 = np.array([0.3, -1.1, 0.8, 2.2, -0.4, -1.7, 0.9, 0.05])


def test_pmf_sums_to_one_exactly():
    for d in range(0, 65):
        for k in range(0, d + 1):
            law = HypergeometricLaw(d, k)
            assert sum(law.pmf_exact(h) for h in law.support) == 1


def test_pmf_values():
    law = HypergeometricLaw(10, 4)
    assert law.pmf_exact(4) == Fraction(1, 210)
    assert law.pmf_exact(0) == Fraction(15, 210)
    for h in law.support:
        assert math.exp(law.log_pmf(h)) == pytest.approx(oracles.hypergeom_pmf(10, 4, h), rel=1e-13)


def test_degenerate_law():
    law = HypergeometricLaw(5, 5)
    assert list(law.support) == [5]
    assert np.all(hypergeometric_sample(law, np.random.default_rng(0), 100) == 5)


def test_sampler_mean():
    law = HypergeometricLaw(20, 6)
    x = hypergeometric_sample(law, np.random.default_rng(1), 200_000)
    var = law.k * law.k / law.d * (1 - law.k / law.d) * (law.d - law.k) / (law.d - 1)
    assert abs(x.mean() - law.mean) < 5 * math.sqrt(var / x.size)


def test_y_h_trivial_cases():
    p = ModelParams.standard(8, 3, 5.0)
    for h in range(0, 4):
        expected = math.log(stratum_size(8, 3, h))
        assert y_h_exact(0.0, h, XI8, p) == pytest.approx(expected, rel=1e-14)
        assert y_h_exact(2.0, h, np.zeros(8), p) == pytest.approx(expected, rel=1e-14)
        assert y_h_eta_approx(1.5, h, 0.0, 8, 3) == pytest.approx(expected, rel=1e-14)


def test_y_h_frozen_oracle():
    # 50-digit direct summation over the h=1 stratum, beta=2, sigma=5
    p = ModelParams.standard(8, 3, 5.0)
    assert y_h_exact(2.0, 1, XI8, p) == pytest.approx(8.37874842084136, rel=1e-12)


def test_y_h_random_against_oracle():
    p = ModelParams.standard(8, 3, 3.0)
    rng = np.random.default_rng(2)
    for _ in range(3):
        xi = rng.standard_normal(8)
        beta = float(rng.uniform(0.1, 5))
        ref = oracles.stratum_log_y(8, 3, 1, beta, p.mu0, 3.0, 100, xi)
        assert y_h_exact(beta, 1, xi, p) == pytest.approx(ref, rel=1e-12)


def test_stratum_capacity_error():
    p = ModelParams.standard(200, 10, 1.0)
    with pytest.raises(CapacityError):
        y_h_exact(1.0, 0, np.zeros(200), p)


def test_decomposition_identity_d8():
    # exhaustive log Z with the linear risk reassembled from per-stratum sums
    p = ModelParams.standard(8, 3, 2.0)
    rng = np.random.default_rng(3)
    law = HypergeometricLaw(8, 3)
    for _ in range(5):
        xi = rng.standard_normal(8)
        beta = float(rng.uniform(0.05, 4))
        exact = exhaustive_log_partitions(beta, xi, xi, p, "linear").log_z1
        terms = [law.log_pmf(h) + 2 * beta * h - math.log(stratum_size(8, 3, h))
                 + y_h_exact(beta, h, xi, p) for h in law.support]
        rebuilt = -beta * 3 + log_comb(8, 3) + log_sum_exp(terms)
        assert rebuilt == pytest.approx(exact, rel=1e-9)


def test_enumerate_h_hook_matches_exhaustive():
    p = ModelParams.standard(8, 3, 1.5)
    beta, m, seed = 1.2, 20, 4
    est = estimate_elogz_correlated(p, beta, m, 1, seed=seed, enumerate_h=True)
    exact = np.mean([exhaustive_log_partitions(beta, noise_draw(p, seed, i),
                                               noise_draw(p, seed, i), p, "linear").log_z1
                     for i in range(m)])
    assert est.value == pytest.approx(exact, rel=1e-9)


def test_beta_zero_reduces_to_count():
    p = ModelParams.standard(10, 3, 1.0)
    est = estimate_elogz_correlated(p, 0.0, 10, 7, seed=1)
    assert est.value == pytest.approx(math.log(120), rel=1e-13)


def test_singleton_space():
    p = ModelParams.standard(4, 4, 2.0)
    beta, seed = 0.7, 5
    est = estimate_elogz_correlated(p, beta, 6, 3, seed=seed)
    want = np.mean([-beta * risk_linear(p.mu0, noise_draw(p, seed, i), p) for i in range(6)])
    assert est.value == pytest.approx(want, rel=1e-12)


def test_agrees_with_exhaustive_within_mc_error():
    p = ModelParams.standard(10, 3, 1.0)
    beta, m, seed = 0.5, 200, 3
    est = estimate_elogz_correlated(p, beta, m, 50, seed=seed)
    exact = np.array([exhaustive_log_partitions(beta, noise_draw(p, seed, i), noise_draw(p, seed, i),
                                                p, "linear").log_z1 for i in range(m)])
    diff = (est.log_abar - beta * 3 + log_comb(10, 3)) - exact
    se = diff.std(ddof=1) / math.sqrt(m)
    assert abs(diff.mean()) < 3 * se


def test_eta_h_strategy():
    p = ModelParams.standard(8, 3, 1.0)
    zero = YhApproximator("eta_h", eta_fn=lambda h, xi, params, rng: 0.0)
    est = estimate_elogz_correlated(p, 1.0, 5, 40, approx=zero, seed=0)
    assert np.isfinite(est.value)
    rnd = estimate_elogz_correlated(p, 1.0, 5, 40, approx=YhApproximator("eta_h"), seed=0)
    assert np.isfinite(rnd.value)


def test_custom_strategy_is_called():
    p = ModelParams.standard(8, 3, 1.0)
    calls = []

    def log_y(beta, h, xi, params, rng):
        calls.append(h)
        return math.log(stratum_size(8, 3, h))

    v = log_abar(0.0, XI8, p, 30, YhApproximator("custom", log_y_fn=log_y), np.random.default_rng(0))
    assert v == pytest.approx(0.0, abs=1e-14)
    assert len(calls) == len(set(calls))


def test_correlated_noise_runs():
    cov = np.full((10, 10), 0.3)
    np.fill_diagonal(cov, 1.0)
    p = ModelParams.standard(10, 3, 1.0, covariance=cov)
    est = estimate_elogz_correlated(p, 0.5, 20, 20, seed=2)
    assert np.isfinite(est.value) and est.stderr > 0


def test_errors():
    with pytest.raises(DomainError):
        HypergeometricLaw(3, 4)
    with pytest.raises(DomainError):
        YhApproximator("median")
    with pytest.raises(DomainError):
        YhApproximator("custom")
    with pytest.raises(DomainError):
        estimate_elogz_correlated(ModelParams.standard(6, None, 1.0), 1.0, 5, 5)
    with pytest.raises(DomainError):
        estimate_elogz_correlated(ModelParams.standard(6, 2, 1.0), -1.0, 5, 5)
