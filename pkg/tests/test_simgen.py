import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal
from scipy import stats

from croc.errors import ValidationError
from croc.simgen import (
    CorrelatedSpec,
    GaussianShiftSpec,
    correlated_pairs,
    gen_correlated,
    gen_setting,
    generate,
    setting1,
    setting2,
)


def test_setting1_defaults():
    spec = setting1()
    assert (spec.n, spec.K, spec.root + 1) == (80, 10, 2)
    assert spec.xi == (50, 20) + (50,) * 8
    assert (spec.mean_lo, spec.mean_hi, spec.delta_root, spec.delta_other) == (-2.0, 3.0, 1.0, 2.0)
    assert spec.pre_means()[0] == -2.0 and spec.pre_means()[-1] == 3.0


def test_setting2_shifts():
    spec = setting2()
    assert (spec.delta_root, spec.delta_other) == (0.25, 0.75)
    assert_allclose(spec.post_means() - spec.pre_means(), [0.75, 0.25] + [0.75] * 8)


def test_single_stream_mean():
    spec = GaussianShiftSpec(K=1, root=0)
    assert spec.pre_means().tolist() == [-2.0]


def test_bad_specs():
    with pytest.raises(ValidationError):
        GaussianShiftSpec(early=50, late=20)
    with pytest.raises(ValidationError):
        GaussianShiftSpec(root=10)
    with pytest.raises(ValidationError):
        CorrelatedSpec(n=50, K=6, early=15, late=30, pairs=((0, 1), (1, 2)))
    with pytest.raises(ValidationError):
        correlated_pairs(rho=1.0)


def test_pre_segment_means():
    spec = setting1()
    within = 0
    draws = 50
    for s in range(draws):
        X, xi, _ = gen_setting(spec.with_seed(s))
        for k in range(spec.K):
            m = np.asarray(X)[: xi[k], k].mean()
            within += abs(m - spec.pre_means()[k]) <= 4 / np.sqrt(xi[k])
    assert within == draws * spec.K


def test_oracle_model_matches_generator():
    spec = setting1()
    _, xi, model = gen_setting(spec)
    assert xi == spec.xi
    assert_array_equal(model.mean0, spec.pre_means())
    assert_array_equal(model.mean1, spec.post_means())
    assert_array_equal(model.sd0, np.ones(10))


def test_bit_identical():
    a = gen_setting(setting1(seed=42))[0]
    b = gen_setting(setting1(seed=42))[0]
    assert np.asarray(a).tobytes() == np.asarray(b).tobytes()
    c = gen_correlated(correlated_pairs(seed=42))[0]
    assert np.asarray(c).tobytes() == np.asarray(gen_correlated(correlated_pairs(seed=42))[0]).tobytes()


def test_correlated_pairs_defaults():
    spec = correlated_pairs()
    X, xi, model, part = gen_correlated(spec)
    assert (spec.n, spec.K, spec.root + 1, spec.rho) == (50, 6, 2, 0.65)
    assert xi == (30, 15, 30, 30, 30, 30)
    assert [[k + 1 for k in g] for g in part.groups] == [[1, 3, 5], [2, 4, 6]]
    assert spec.pre_means()[0] == -3.0 and spec.pre_means()[-1] == 3.0
    assert_allclose(spec.post_means() - spec.pre_means(), [1.5, 1.0, 1.5, 1.5, 1.5, 1.5])


def test_zero_correlation_reduces_to_independent():
    for s in range(5):
        X, *_ = gen_correlated(correlated_pairs(rho=0.0, seed=s))
        Y, *_ = gen_setting(GaussianShiftSpec(**{f: getattr(correlated_pairs(seed=s), f) for f in (
            "n", "K", "root", "early", "late", "mean_lo", "mean_hi", "delta_root", "delta_other", "seed")}))
        assert_array_equal(np.asarray(X), np.asarray(Y))
    a = np.concatenate([np.asarray(gen_correlated(correlated_pairs(rho=0.0, seed=s))[0])[:15, 1] for s in range(40)])
    b = np.concatenate([np.asarray(gen_setting(GaussianShiftSpec(n=50, K=6, early=15, late=30, mean_lo=-3.0,
                                                                 mean_hi=3.0, delta_other=1.5, seed=900 + s))[0])[:15, 1]
                        for s in range(40)])
    assert stats.ks_2samp(a, b).pvalue > 0.001


def test_large_sample_correlation_and_variance():
    spec = correlated_pairs(n=5000, early=2500, late=4000, seed=3)
    X, xi, model, _ = gen_correlated(spec)
    resid = np.asarray(X)[:2500] - model.mean0
    for a, b in spec.pairs:
        assert abs(np.corrcoef(resid[:, a], resid[:, b])[0, 1] - 0.65) <= 0.1
    assert np.all(np.abs(resid.var(axis=0) - 1.0) <= 0.1)


def test_generate_dispatch():
    assert generate(setting1())[3] is None
    assert generate(correlated_pairs())[3] is not None
