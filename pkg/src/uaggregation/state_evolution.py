"""State evolution for the sparse AMP iteration.

Scalar recursion tracking the high-dimensional limit of AMP on the whitened
model ``Ytilde = (lam/n) u v^T + W``::

    mu_bar_t    = lam * alpha * E[U g_t(mu_t U + sigma_t G)]
    sigma_bar_t = sqrt(alpha * E[g_t(mu_t U + sigma_t G)^2])
    mu_{t+1}    = lam * mu_bar_t
    sigma_{t+1} = sqrt(mu_bar_t^2 + sigma_bar_t^2)

with ``U ~ nu_u`` (sparse uniform mixture) and ``G ~ N(0, 1)``.  The limiting
cosines are ``mu_{t+1} / (lam sigma_{t+1})`` for the right iterate and
``mu_bar_t / (sqrt(alpha) lam sigma_bar_t)`` for the left one.

For soft thresholding the expectation over ``G`` is available in closed form,
so the deterministic path integrates exactly in ``G`` and uses 64-point
Gauss-Legendre over the uniform component of ``U``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .exceptions import ConfigError

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)


@dataclass(frozen=True)
class SparseUniformMixture:
    """``Unif(0, c)`` with probability ``omega``, point mass at 0 otherwise."""

    omega: float
    c: float

    @property
    def second_moment(self) -> float:
        return self.omega * self.c ** 2 / 3.0

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        on = rng.random(size) < self.omega
        return np.where(on, rng.uniform(0.0, self.c, size), 0.0)

    def nodes(self):
        """Quadrature nodes/weights for the uniform component (weights sum to 1)."""
        x = 0.5 * self.c * (_GL_NODES + 1.0)
        return x, 0.5 * _GL_WEIGHTS


def nu_u_mixture(omega: float) -> SparseUniformMixture:
    """Mixture with unit second moment: ``c = sqrt(3 / omega)``."""
    if not 0 < omega < 1:
        raise ConfigError("omega must lie in (0, 1)")
    return SparseUniformMixture(omega, math.sqrt(3.0 / omega))


def se_init(lam: float, alpha: float, allow_subcritical: bool = False):
    """Spectral initial condition ``(mu0, sigma0)``; ``mu0^2 + sigma0^2 = 1``."""
    if lam <= 0 or alpha <= 0:
        raise ConfigError("lambda and alpha must be positive")
    if lam ** 2 * math.sqrt(alpha) <= 1 and not allow_subcritical:
        raise ConfigError("lambda^2 sqrt(alpha) = %.4g <= 1: below the BBP threshold "
                          "(pass allow_subcritical=True to explore)" % (lam ** 2 * math.sqrt(alpha)))
    li2 = lam ** -2
    li4 = lam ** -4
    num = max(1.0 - li4 / alpha, 0.0)
    mu0 = math.sqrt(num / (1.0 + li2))
    sigma0 = math.sqrt(1.0 - mu0 ** 2)
    return mu0, sigma0


def _phi(x):
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def _Phi(x):
    return special.ndtr(x)


def soft_moments(m, s, tau):
    """``E[g(X)]`` and ``E[g(X)^2]`` for ``X ~ N(m, s^2)`` and soft threshold ``g``."""
    m = np.asarray(m, dtype=float)
    a = (m - tau) / s
    b = (-m - tau) / s
    e1 = (m - tau) * _Phi(a) + s * _phi(a) - ((-m - tau) * _Phi(b) + s * _phi(b))
    e2 = ((m - tau) ** 2 + s ** 2) * _Phi(a) + (m - tau) * s * _phi(a) \
        + ((m + tau) ** 2 + s ** 2) * _Phi(b) + (-m - tau) * s * _phi(b)
    return e1, e2


def _tail(mu, sigma, tau, mix):
    """``P(|mu U + sigma G| > tau)``."""
    x, w = mix.nodes()
    zero = 2.0 * _Phi(-tau / sigma)
    m = mu * x
    on = w @ (_Phi((m - tau) / sigma) + _Phi((-m - tau) / sigma))
    return (1 - mix.omega) * zero + mix.omega * on


def quantile_threshold(mu, sigma, omega, mix=None) -> float:
    """``tau`` with ``P(|mu U + sigma G| > tau) = omega`` (mirrors the AMP quantile rule)."""
    mix = mix or nu_u_mixture(omega)
    hi = abs(mu) * mix.c + 40.0 * sigma
    return float(optimize.brentq(lambda t: _tail(mu, sigma, t, mix) - omega, 0.0, hi,
                                 xtol=1e-14, rtol=1e-14, maxiter=500))


@dataclass(frozen=True)
class SeConfig:
    lam: float
    alpha: float
    omega: float
    tau_policy: str = "quantile"   # or "fixed"
    tau: float = 0.5               # used by the fixed policy
    T: int = 200
    expectation: str = "quadrature"  # or "montecarlo"
    mc_samples: int = 1_000_000
    seed: int = 0
    allow_subcritical: bool = False
    tol: float = 1e-8

    def __post_init__(self):
        if self.lam <= 0 or self.alpha <= 0:
            raise ConfigError("lambda and alpha must be positive")
        if not 0 < self.omega < 1:
            raise ConfigError("omega must lie in (0, 1)")
        if self.tau_policy not in ("quantile", "fixed"):
            raise ConfigError("tau_policy must be 'quantile' or 'fixed'")
        if self.tau < 0:
            raise ConfigError("tau must be nonnegative")
        if self.expectation not in ("quadrature", "montecarlo"):
            raise ConfigError("expectation must be 'quadrature' or 'montecarlo'")
        if self.T < 1:
            raise ConfigError("T must be >= 1")
        if self.lam ** 2 * math.sqrt(self.alpha) <= 1:
            if not self.allow_subcritical:
                raise ConfigError("below the BBP threshold lambda^2 sqrt(alpha) <= 1")
            warnings.warn("state evolution run below the BBP threshold", RuntimeWarning,
                          stacklevel=3)


def expectations(mu, sigma, tau, mix, method="quadrature", rng=None, mc_samples=1_000_000):
    """``(E[U g(mu U + sigma G)], E[g(mu U + sigma G)^2])`` and, for Monte Carlo, their standard errors."""
    if method == "quadrature":
        x, w = mix.nodes()
        e1_on, e2_on = soft_moments(mu * x, sigma, tau)
        _, e2_off = soft_moments(0.0, sigma, tau)
        eu = mix.omega * float(w @ (x * e1_on))
        eg2 = (1 - mix.omega) * float(e2_off) + mix.omega * float(w @ e2_on)
        return eu, eg2, 0.0, 0.0
    rng = rng if rng is not None else np.random.default_rng(0)
    U = mix.sample(rng, mc_samples)
    G = rng.standard_normal(mc_samples)
    X = mu * U + sigma * G
    g = np.sign(X) * np.maximum(np.abs(X) - tau, 0.0)
    a, b = U * g, g * g
    se = math.sqrt(mc_samples)
    return float(a.mean()), float(b.mean()), float(a.std() / se), float(b.std() / se)


def se_step(mu, sigma, config: SeConfig, rng=None):
    """One recursion step: ``(mu_bar, sigma_bar, mu_next, sigma_next, tau)``."""
    if not sigma > 0:
        raise ValueError("sigma_t must be positive")
    mix = nu_u_mixture(config.omega)
    if config.tau_policy == "quantile":
        tau = quantile_threshold(mu, sigma, config.omega, mix)
    else:
        tau = config.tau
    eu, eg2, _, _ = expectations(mu, sigma, tau, mix, config.expectation, rng, config.mc_samples)
    if not (math.isfinite(eu) and math.isfinite(eg2)):
        raise ArithmeticError("non-finite state-evolution expectation")
    mu_bar = config.lam * config.alpha * eu
    sigma_bar = math.sqrt(config.alpha * eg2)
    mu_next = config.lam * mu_bar
    sigma_next = math.sqrt(mu_bar ** 2 + sigma_bar ** 2)
    return mu_bar, sigma_bar, mu_next, sigma_next, tau


def _clamp(x):
    return float(min(1.0, max(-1.0, x)))


@dataclass(frozen=True)
class SeRow:
    t: int
    mu: float
    sigma: float
    mu_bar: float
    sigma_bar: float
    cos_v: float
    cos_u: float
    tau: float
    gain: float


@dataclass(frozen=True)
class SeTrace:
    config: SeConfig
    rows: list
    fixed_point: tuple
    converged: bool
    residual: float = float("nan")

    @property
    def cos_v_limit(self) -> float:
        mu, sigma, _, _ = self.fixed_point
        return _clamp(mu / (self.config.lam * sigma)) if sigma > 0 else 0.0

    @property
    def cos_u_limit(self) -> float:
        _, _, mu_bar, sigma_bar = self.fixed_point
        c = self.config
        return _clamp(mu_bar / (math.sqrt(c.alpha) * c.lam * sigma_bar)) if sigma_bar > 0 else 0.0


def fixed_point_residual(fp, config: SeConfig) -> float:
    """Max-abs residual of the four fixed-point equations at ``fp = (mu, sigma, mu_bar, sigma_bar)``.

    Under the quantile policy the recursion is positively homogeneous, so a
    fixed point exists only as a ray; the per-step gain is divided out of the
    first two equations and the threshold is the one matched at ``(mu, sigma)``.
    """
    mu, sigma, mu_bar, sigma_bar = fp
    mix = nu_u_mixture(config.omega)
    tau = (quantile_threshold(mu, sigma, config.omega, mix)
           if config.tau_policy == "quantile" else config.tau)
    eu, eg2, _, _ = expectations(mu, sigma, tau, mix)
    gain = 1.0
    if config.tau_policy == "quantile":
        gain = math.hypot(config.lam * mu_bar, math.hypot(mu_bar, sigma_bar)) / math.hypot(mu, sigma)
    res = (
        mu - config.lam * mu_bar / gain,
        sigma ** 2 - (mu_bar ** 2 + sigma_bar ** 2) / gain ** 2,
        mu_bar - config.lam * config.alpha * eu,
        sigma_bar ** 2 - config.alpha * eg2,
    )
    return float(max(abs(r) for r in res))


def _safe_step(mu, sigma, config, rng):
    if not (math.isfinite(mu) and math.isfinite(sigma) and sigma > 0):
        return None
    try:
        with np.errstate(all="ignore"):
            step = se_step(mu, sigma, config, rng)
    except (ArithmeticError, ValueError):
        return None
    return step if all(math.isfinite(x) for x in step) else None


def se_run(config: SeConfig) -> SeTrace:
    """Iterate from the spectral initial condition for up to ``T`` steps.

    Under the quantile policy ``(mu, sigma)`` is renormalized to the unit
    circle each step (cosines are scale free); the gain is recorded per row.
    """
    mu, sigma = se_init(config.lam, config.alpha, config.allow_subcritical)
    rng = np.random.default_rng(config.seed) if config.expectation == "montecarlo" else None
    rows = []
    converged = False
    mu_bar = sigma_bar = float("nan")
    for t in range(config.T):
        step = _safe_step(mu, sigma, config, rng)
        if step is None:
            break  # overflow or collapse under a fixed threshold: flagged, not fatal
        mu_bar, sigma_bar, mu_next, sigma_next, tau = step
        gain = 1.0
        if config.tau_policy == "quantile":
            gain = math.hypot(mu_next, sigma_next) / math.hypot(mu, sigma)
            mu_next, sigma_next = mu_next / gain, sigma_next / gain
        cos_v = _clamp(mu_next / (config.lam * sigma_next)) if sigma_next > 0 else 0.0
        cos_u = (_clamp(mu_bar / (math.sqrt(config.alpha) * config.lam * sigma_bar))
                 if sigma_bar > 0 else 0.0)
        rows.append(SeRow(t, mu, sigma, mu_bar, sigma_bar, cos_v, cos_u, tau, gain))
        change = max(abs(mu_next - mu), abs(sigma_next - sigma))
        mu, sigma = mu_next, sigma_next
        if change < config.tol:
            converged = True
            break
    # refresh the bar quantities at the final state so the tuple is self-consistent
    step = _safe_step(mu, sigma, config, rng)
    if step is not None:
        mu_bar, sigma_bar = step[0], step[1]
    fp = (mu, sigma, mu_bar, sigma_bar)
    residual = float("nan")
    if config.expectation == "quadrature" and step is not None:
        with np.errstate(all="ignore"):
            residual = fixed_point_residual(fp, config)
    return SeTrace(config, rows, fp, converged, residual)
