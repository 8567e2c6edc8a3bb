"""Sampling reproducibility, KS/ECF distances, exact binomial-Poisson TV."""

import math

import numpy as np
import pytest
from scipy.stats import binom, poisson

from summand_lab import (
    Degenerate,
    FiniteDiscrete,
    GaussianCF,
    Gaussian,
    RowSpec,
    SimulationPlan,
    ecf_distance,
    ks_distance,
    run_simulation,
    sample_sums,
    sample_sums_chunked,
    std_normal_cdf,
    translated_poisson_cdf,
    tv_binomial_poisson,
)
from summand_lab.montecarlo import SUBSTREAM_CHUNK, std_gaussian_limit, translated_poisson_limit
from scipy.special import ndtri


def test_degenerate_row_sums_exact():
    row = RowSpec(3, (FiniteDiscrete(((1.5, 1.0),)), FiniteDiscrete(((-0.5, 1.0),))))
    s = sample_sums(row, 100, seed=1)
    assert (s == 1.0).all()


def test_bernoulli_sums_are_integers(bernoulli_gen):
    row = bernoulli_gen.row(50)
    s = sample_sums(row, 2000, seed=5)
    assert np.array_equal(s, np.round(s))
    assert s.min() >= 0 and s.max() <= 50


def test_rademacher_sample_mean(rademacher_gen):
    row = rademacher_gen.row(16)
    s = sample_sums_chunked(row, 100_000, seed=99)
    assert abs(s.mean()) <= 0.013  # 4 sigma of the 1e5-sample mean


def test_chunked_equals_ordered_merge(rademacher_gen):
    row = rademacher_gen.row(32)
    count = 2 * SUBSTREAM_CHUNK + 700
    ref = sample_sums_chunked(row, count, seed=7)
    parts = {}
    for j in (2, 0, 1):  # any execution order
        start = j * SUBSTREAM_CHUNK
        m = min(SUBSTREAM_CHUNK, count - start)
        parts[j] = sample_sums(row, m, 7, stream_id=j)
    manual = np.concatenate([parts[j] for j in sorted(parts)])
    assert manual.tobytes() == ref.tobytes()


def test_run_simulation_reproducible(rademacher_gen):
    plan = SimulationPlan(
        generator=rademacher_gen,
        n_list=(16, 64),
        samples_per_n=4000,
        seed=123,
        u_grid=(-2.0, 1.0),
        limit=std_gaussian_limit(),
    )
    r1, _ = run_simulation(plan)
    r2, _ = run_simulation(plan)
    assert r1 == r2
    assert all(0.0 <= r.ks <= 1.0 for r in r1)
    assert all(0.0 <= r.ecf <= 2.0 for r in r1)


def test_ks_single_median_sample():
    assert ks_distance([0.0], std_normal_cdf) == 0.5


def test_ks_interleaved_quantiles():
    n = 1000
    samples = ndtri((np.arange(1, n + 1) - 0.5) / n)
    assert ks_distance(samples, std_normal_cdf) == pytest.approx(1.0 / (2 * n), abs=1e-12)


def test_ks_from_the_limit_itself():
    g = Gaussian(0.0, 1.0)
    row = RowSpec(1, (g,))
    n = 100_000
    s = sample_sums_chunked(row, n, seed=42)
    dkw = math.sqrt(math.log(2.0 / 1e-3) / (2 * n))  # 0.0062 at delta = 1e-3
    assert ks_distance(s, std_normal_cdf) <= dkw


def test_ks_against_step_cdf():
    cdf = translated_poisson_cdf(0.0, 1.0)
    # all mass at 0 vs Poisson(1): gap at 0 is 1 - e^{-1}
    assert ks_distance([0.0], cdf) == pytest.approx(1.0 - math.exp(-1.0), abs=1e-15)
    vals = cdf(np.array([-0.5, 0.0, 0.9, 1.0, 5.0]))
    assert vals[0] == 0.0
    assert vals[1] == pytest.approx(math.exp(-1.0), abs=1e-15)
    assert vals[2] == vals[1]
    assert vals[3] == pytest.approx(2 * math.exp(-1.0), abs=1e-15)


def test_ecf_examples():
    zeros = np.zeros(10)
    assert ecf_distance(zeros, Degenerate(0.0), (0.5, 2.0)) == 0.0
    d = ecf_distance(zeros, GaussianCF(0.0, 1.0), (2.0,))
    assert d == pytest.approx(1.0 - math.exp(-2.0), abs=1e-14)
    assert d == pytest.approx(0.8646647167633873, abs=1e-14)


def test_ecf_of_gaussian_samples():
    row = RowSpec(1, (Gaussian(0.0, 1.0),))
    s = sample_sums_chunked(row, 100_000, seed=4242)
    grid = [u / 2 for u in range(-10, 11)]
    assert ecf_distance(s, GaussianCF(0.0, 1.0), grid) <= 0.02


def test_tv_binomial_poisson_le_cam():
    for n in (100, 1000, 10000):
        lam = 1.0
        tv = tv_binomial_poisson(n, lam / n, lam)
        assert 0.0 <= tv <= lam * lam / n


def test_tv_against_scipy():
    for n, lam in ((100, 1.0), (500, 2.0)):
        p = lam / n
        mine = tv_binomial_poisson(n, p, lam)
        ks = np.arange(0, n + 1)
        ref = 0.5 * (np.abs(binom.pmf(ks, n, p) - poisson.pmf(ks, lam)).sum() + poisson.sf(n, lam))
        assert mine == pytest.approx(ref, rel=1e-10)


def test_tv_validation():
    with pytest.raises(ValueError):
        tv_binomial_poisson(0, 0.5, 1.0)
    with pytest.raises(ValueError):
        tv_binomial_poisson(10, 1.0, 1.0)


def test_named_limits():
    lim = translated_poisson_limit(1.0, 2.0)
    assert lim.cdf is not None
    assert abs(lim.cf(0.0) - 1.0) <= 1e-15
