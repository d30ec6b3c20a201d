import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uaggregation.exceptions import DegenerateSpectrumError, DysonNormalizerError, ZeroNormRowError
from uaggregation.stabilize import (StabilizedMatrix, dyson_factors, normalize_rows,
                                    resolvent_diagonals, stabilize)
from uaggregation.synthgen import SynthConfig, generate


def aligned_error(a, b):
    """Mean absolute gap after dividing each vector by its own mean."""
    return float(np.mean(np.abs(a / a.mean() - b / b.mean())))


# --- normalize_rows ---------------------------------------------------------

def test_normalize_scales_row():
    out = normalize_rows(np.array([[3.0, 4.0], [1.0, 0.0]]))
    np.testing.assert_allclose(out.values[0], [0.6, 0.8])
    np.testing.assert_allclose(out.row_norms, [5.0, 1.0])


def test_normalize_centered():
    out = normalize_rows(np.array([[1.0, 2.0, 3.0], [0.0, 1.0, 5.0]]), center=True)
    np.testing.assert_allclose(out.values[0], np.array([-1.0, 0.0, 1.0]) / np.sqrt(2))
    assert out.centered


def test_constant_row_names_model():
    Y = np.array([[5.0, 5.0, 5.0], [1.0, 2.0, 4.0]])
    with pytest.raises(ZeroNormRowError, match="zero-norm row.*model_0"):
        normalize_rows(Y, center=True)


# --- resolvent_diagonals ----------------------------------------------------

def test_resolvent_identity_vectors():
    g1, g2, tb = resolvent_diagonals(np.eye(2), np.array([2.0, 1.0]), np.eye(2))
    assert tb == 1.5
    np.testing.assert_allclose(g1, [1.5 / 6.25, 1.5 / 3.25])
    np.testing.assert_allclose(g1, [0.24, 0.46154], atol=1e-5)
    np.testing.assert_allclose(g2, g1)


def test_resolvent_flat_spectrum():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
    V, _ = np.linalg.qr(rng.standard_normal((8, 5)))
    g1, g2, tb = resolvent_diagonals(Q, np.full(5, 0.7), V)
    assert tb == pytest.approx(0.7)
    np.testing.assert_allclose(g1, 1 / (2 * 0.7))


def test_resolvent_degenerate():
    with pytest.raises(DegenerateSpectrumError, match="degenerate spectrum"):
        resolvent_diagonals(np.eye(2), np.zeros(2), np.eye(2))


def test_resolvent_homoskedastic_noise_is_flat():
    rng = np.random.default_rng(1)
    X = rng.standard_normal((100, 1000)) / np.sqrt(1000)
    U, s, Vt = np.linalg.svd(X, full_matrices=False)
    g1, g2, _ = resolvent_diagonals(U, s, Vt.T)
    assert g1.std() / g1.mean() < 0.15
    assert np.all(g1 > 0) and np.all(g2 > 0)


# --- dyson_factors ----------------------------------------------------------

def test_dyson_constant_input():
    h, f, floored = dyson_factors(np.full(4, 0.5), np.full(4, 0.5), 1.0)
    np.testing.assert_allclose(h, 1 / np.sqrt(2))
    np.testing.assert_allclose(h, 0.70711, atol=1e-5)
    assert floored == 0


def test_dyson_nonpositive_normalizer():
    with pytest.raises(DysonNormalizerError, match="nonpositive"):
        dyson_factors(np.full(4, 2.0), np.full(4, 0.5), 1.0)


def test_dyson_floor_warns_and_stays_positive():
    g1 = np.array([0.5, 0.5, 0.5, 1.2])     # last entry gives 1/g - theta < 0
    with pytest.warns(RuntimeWarning, match="floored 1 row"):
        h, f, floored = dyson_factors(g1, np.full(4, 0.5), 1.0)
    assert floored == 1
    assert np.all(h > 0)
    assert h[-1] == pytest.approx(1e-8 * h[0])


def test_homoskedastic_factors_track_profile(quiet):
    # rows are equal up to the signal share of the row norm, h0 = 1 / (lam^2 u^2 + 1)
    for seed in range(20):
        Y, truth = generate(SynthConfig(n=1000, d=100, noise_regime="homoskedastic", seed=seed))
        st_ = stabilize(normalize_rows(Y))
        h0, _ = truth.noise_profile()
        q = st_.h_hat / h0
        assert q.max() / q.min() < 1.3
        noise_rows = st_.h_hat[~truth.support]
        assert noise_rows.max() / noise_rows.min() < 1.3


def test_heteroskedastic_factor_error(quiet):
    Y, truth = generate(SynthConfig(n=2000, d=200, seed=3))
    st_ = stabilize(normalize_rows(Y))
    h0, f0 = truth.noise_profile()
    assert aligned_error(st_.h_hat, h0) <= 0.2
    assert aligned_error(st_.f_hat, f0) <= 0.2


# --- stabilize --------------------------------------------------------------

def test_noise_rows_whitened(quiet):
    Y, truth = generate(SynthConfig(n=1000, d=100, noise_regime="homoskedastic", seed=7))
    Yt = stabilize(normalize_rows(Y)).values
    row_var = Yt[~truth.support].var(axis=1)
    col_var = Yt[~truth.support].var(axis=0)
    assert row_var.std() / row_var.mean() < 0.2
    assert col_var.std() / col_var.mean() < 0.2
    # noise variance is ~1/n after whitening
    assert row_var.mean() == pytest.approx(1 / 1000, rel=0.1)


def test_second_pass_is_flat(quiet):
    Y, _ = generate(SynthConfig(n=1000, d=100, noise_regime="homoskedastic", seed=8))
    once = stabilize(normalize_rows(Y))
    twice = stabilize(once.values)
    for x in (twice.h_hat, twice.f_hat):
        assert x.std() / x.mean() < 0.05


def test_orthogonal_input_is_diagonally_rescaled():
    rng = np.random.default_rng(2)
    Q, _ = np.linalg.qr(rng.standard_normal((6, 6)))
    st_ = stabilize(Q)
    np.testing.assert_allclose(st_.values * st_.row_scale[:, None] * st_.col_scale[None, :], Q,
                               atol=1e-13)
    np.testing.assert_allclose(st_.singular_values, 1.0)


def test_unscaled_is_identity():
    X = np.arange(6.0).reshape(2, 3)
    st_ = StabilizedMatrix.unscaled(X)
    np.testing.assert_allclose(st_.row_scale, 1.0)
    np.testing.assert_allclose(st_.col_scale, 1.0)
    np.testing.assert_allclose(st_.reconstruct(), X, rtol=1e-14)


def test_tall_input_transposes(quiet):
    rng = np.random.default_rng(4)
    X = normalize_rows(rng.standard_normal((80, 30)) * rng.uniform(0.5, 2, 30)).values
    st_ = stabilize(X)
    assert st_.transposed
    assert st_.h_hat.shape == (80,) and st_.f_hat.shape == (30,)
    np.testing.assert_allclose(st_.reconstruct(), X, rtol=1e-10, atol=1e-14)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), d=st.integers(5, 40), n=st.integers(5, 120))
def test_reconstruction_and_positivity(seed, d, n):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((d, n)) * rng.uniform(0.2, 2, (d, 1)) * rng.uniform(0.2, 2, n)
    Xn = normalize_rows(X).values
    try:
        st_ = stabilize(Xn)
    except DysonNormalizerError:
        return  # tiny matrices can violate the rank-one variance model outright
    assert np.all(st_.h_hat > 0) and np.all(st_.f_hat > 0)
    err = np.linalg.norm(st_.reconstruct() - Xn) / np.linalg.norm(Xn)
    assert err < 1e-10


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), logc=st.lists(st.floats(-5, 5), min_size=30, max_size=30))
def test_row_scale_invariance(seed, logc):
    Y, _ = generate(SynthConfig(n=120, d=30, seed=seed))
    a = stabilize(normalize_rows(Y.values))
    b = stabilize(normalize_rows(Y.values * np.exp(logc)[:, None]))
    np.testing.assert_allclose(b.values, a.values, rtol=1e-9, atol=1e-12)
    np.testing.assert_allclose(b.h_hat, a.h_hat, rtol=1e-9)
    np.testing.assert_allclose(b.f_hat, a.f_hat, rtol=1e-9)
