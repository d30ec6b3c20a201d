import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uaggregation.exceptions import ConfigError
from uaggregation.stabilize import normalize_rows
from uaggregation.synthgen import (GroundTruth, Law, SynthConfig, draw_truth, generate, keep_count,
                                   sample_predictions, spiked_whitened)


def test_keep_count_guards_float_ceil():
    # 0.3 * 10 is 3.0000000000000004 in binary
    assert keep_count(0.3, 10) == 3
    assert keep_count(0.31, 10) == 4
    assert keep_count(0.05, 10) == 1


def test_law_parse_and_str():
    law = Law.parse("uniform:0,2")
    assert law == Law("uniform", (0.0, 2.0))
    assert Law.parse(str(law)) == law
    with pytest.raises(ConfigError):
        Law.parse("cauchy:0,1")


def test_heteroskedastic_defaults_match_protocol():
    cfg = SynthConfig(n=1000, d=100, omega=0.3, noise_regime="heteroskedastic", seed=1)
    Y, truth = generate(cfg)
    assert Y.shape == (100, 1000)
    assert truth.s == 30
    assert np.all((truth.v > -1) & (truth.v < 1))
    assert np.all((truth.sigma >= 0) & (truth.sigma <= 2))
    assert np.all((truth.f >= 0) & (truth.f <= 2))
    np.testing.assert_array_equal(truth.c, 1.0)
    assert truth.magnitude == pytest.approx(math.sqrt((100 / 1000) / 30))


def test_homoskedastic_has_unit_noise():
    _, truth = generate(SynthConfig(noise_regime="homoskedastic", seed=2))
    np.testing.assert_array_equal(truth.sigma, 1.0)
    np.testing.assert_array_equal(truth.f, 1.0)


def test_zero_noise_rows_are_exact(zero_noise):
    Y, truth = zero_noise
    on = truth.support
    np.testing.assert_array_equal(Y.values[~on], 0.0)
    for row, c, u in zip(Y.values[on], truth.c[on], truth.u[on]):
        np.testing.assert_allclose(row / (c * u), truth.v, rtol=1e-13)


def test_seed_reproduces_bytes():
    cfg = SynthConfig(seed=42, c_law=Law("lognormal", (0, 1)))
    Y1, t1 = generate(cfg)
    Y2, t2 = generate(cfg)
    assert Y1.values.tobytes() == Y2.values.tobytes()
    assert t1.to_json() == t2.to_json()


def test_data_model_is_exact():
    cfg = SynthConfig(n=50, d=8, omega=0.5, c_law=Law("lognormal", (0, 1)), seed=3)
    rng = np.random.default_rng(cfg.seed)
    truth = draw_truth(cfg, rng)
    state = rng.bit_generator.state
    Y = sample_predictions(truth, rng)
    rng2 = np.random.default_rng()
    rng2.bit_generator.state = state
    w = rng2.standard_normal((8, 50)) / math.sqrt(50)
    expected = truth.c[:, None] * (np.outer(truth.u, truth.v)
                                   + truth.sigma[:, None] * np.sqrt(truth.f)[None, :] * w)
    np.testing.assert_allclose(Y, expected, rtol=1e-14)


def test_signal_norm_sets_lambda():
    _, truth = generate(SynthConfig(signal_norm=2.5, seed=4))
    assert truth.lam == pytest.approx(2.5)


def test_invalid_configs():
    with pytest.raises(ConfigError):
        SynthConfig(d=1)
    with pytest.raises(ConfigError):
        SynthConfig(omega=1.0)
    with pytest.raises(ConfigError):
        SynthConfig(noise_regime="weird")
    with pytest.raises(ConfigError):
        SynthConfig(signal_norm=-1.0)


def test_ground_truth_json_roundtrip():
    _, truth = generate(SynthConfig(n=20, d=5, omega=0.4, seed=9))
    back = GroundTruth.from_json(truth.to_json())
    np.testing.assert_array_equal(back.v, truth.v)
    np.testing.assert_array_equal(back.support, truth.support)
    assert back.magnitude == truth.magnitude


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 60), d=st.integers(2, 40), omega=st.floats(0.01, 0.99),
       seed=st.integers(0, 2 ** 32))
def test_support_size_and_shape(n, d, omega, seed):
    Y, truth = generate(SynthConfig(n=n, d=d, omega=omega, seed=seed))
    assert Y.shape == (d, n)
    assert truth.s == math.ceil(omega * d - 1e-9)
    u = truth.u
    assert np.count_nonzero(u) == truth.s
    assert len(set(u[u != 0])) == 1
    assert np.sum(u ** 2) == pytest.approx(truth.s * truth.magnitude ** 2)


def test_normalized_noise_variance_matches_profile():
    # Monte Carlo over 500 noise draws for a fixed truth, n = 1000
    cfg = SynthConfig(n=1000, d=6, omega=0.5, seed=21)
    truth = draw_truth(cfg, np.random.default_rng(cfg.seed))
    rng = np.random.default_rng(99)
    reps = 500
    draws = np.empty((reps, 6, 1000))
    for r in range(reps):
        draws[r] = normalize_rows(sample_predictions(truth, rng)).values
    emp = draws.var(axis=0)
    h0, f = truth.noise_profile()
    S = np.outer(h0, f) / cfg.n
    ratio = emp.sum(axis=1) / S.sum(axis=1)
    np.testing.assert_allclose(ratio, 1.0, atol=0.10)
    big = S > np.median(S)
    assert np.median(np.abs(emp[big] / S[big] - 1)) < 0.10


def test_spiked_whitened_shapes_and_moments():
    Yt, u, v = spiked_whitened(2000, 600, 2.0, 0.3, seed=1)
    assert Yt.shape == (600, 2000)
    assert np.mean(u ** 2) == pytest.approx(1.0, abs=0.15)
    assert np.mean(u > 0) == pytest.approx(0.3, abs=0.06)
