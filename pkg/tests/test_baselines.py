import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uaggregation.baselines import hetero_pca_aggregate, pca_aggregate, simple_average
from uaggregation.metrics import pearson
from uaggregation.stabilize import normalize_rows
from uaggregation.synthgen import SynthConfig, generate


def test_average_arithmetic():
    out = simple_average(np.array([[1.0, 0.0], [0.0, 1.0]]))
    np.testing.assert_allclose(out.v_hat, [0.5, 0.5])
    assert out.u_hat is None and out.method == "average"


def test_average_of_equal_rows():
    r = np.array([0.2, -0.4, 0.9])
    np.testing.assert_allclose(simple_average(np.tile(r, (4, 1))).v_hat, r)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6))
def test_average_permutation_symmetry(seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((6, 9))
    np.testing.assert_allclose(simple_average(X[rng.permutation(6)]).v_hat,
                               simple_average(X).v_hat, atol=1e-15)


def test_pca_rank_one():
    rng = np.random.default_rng(0)
    u, v = rng.uniform(0.1, 1, 10), rng.standard_normal(40)
    out = pca_aggregate(normalize_rows(np.outer(u, v)))
    assert np.linalg.norm(out.u_hat) == pytest.approx(1.0)
    assert pearson(out.v_hat, v) == pytest.approx(1.0, abs=1e-12)
    assert out.u_hat.sum() >= 0


def test_pca_degenerate_gap_warns():
    with pytest.warns(RuntimeWarning, match="not simple"):
        out = pca_aggregate(np.eye(3))
    np.testing.assert_allclose(np.abs(out.u_hat), [0, 0, 1], atol=1e-12)


def test_hetero_pca_completes_rank_one():
    rng = np.random.default_rng(0)
    a, D = rng.uniform(0.2, 1, 8), rng.uniform(0.1, 2, 8)
    # X X^T = a a^T + diag(D), so the off-diagonal is exactly rank one
    X = np.hstack([a[:, None], np.diag(np.sqrt(D))])
    out = hetero_pca_aggregate(X, max_iters=50)
    assert out.converged and out.iterations <= 50
    np.testing.assert_allclose(out.u_hat, a / np.linalg.norm(a), atol=1e-8)


# the re-imputed diagonal is uniform only when every informative row carries the
# same signal share, so the match is checked for dense supports
@pytest.mark.parametrize("omega", [0.7, 0.999])
def test_hetero_pca_matches_pca_when_homoskedastic(omega):
    Y, _ = generate(SynthConfig(noise_regime="homoskedastic", omega=omega, seed=1))
    Yn = normalize_rows(Y)
    assert 1 - pca_aggregate(Yn).u_hat @ hetero_pca_aggregate(Yn).u_hat < 1e-6


def test_hetero_pca_one_iteration_is_diagonal_deleted_pca():
    rng = np.random.default_rng(2)
    X = normalize_rows(rng.standard_normal((7, 30)) + rng.standard_normal(30)).values
    G = X @ X.T
    np.fill_diagonal(G, 0)
    w, V = np.linalg.eigh(G)
    top = V[:, -1] * np.sign(V[:, -1].sum())
    out = hetero_pca_aggregate(X, max_iters=1)
    np.testing.assert_allclose(out.u_hat, top, atol=1e-12)
    assert out.iterations == 1


def test_hetero_pca_validates():
    with pytest.raises(ValueError):
        hetero_pca_aggregate(np.eye(2), max_iters=0)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10 ** 6), logc=st.lists(st.floats(-4, 4), min_size=12, max_size=12))
def test_baselines_ignore_row_scale(seed, logc):
    Y, _ = generate(SynthConfig(n=80, d=12, seed=seed))
    a = normalize_rows(Y.values)
    b = normalize_rows(Y.values * np.exp(logc)[:, None])
    for fn in (simple_average, pca_aggregate, hetero_pca_aggregate):
        np.testing.assert_allclose(fn(b).v_hat, fn(a).v_hat, atol=1e-9)
