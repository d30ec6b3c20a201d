"""Synthetic prediction matrices with known ground truth.

Each model row is ``Y_i = c_i * (v * u_i + sigma_i * F w_i)`` with
``F = diag(f ** 0.5)`` and ``w_i ~ N(0, I / n)``.  Informative models carry
``u_i = sqrt(alpha / s)`` with ``alpha = d / n``; the rest carry ``u_i = 0``.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .data import PredictionMatrix
from .exceptions import ConfigError

_LAWS = {
    "uniform": 2,    # low, high
    "constant": 1,   # value
    "lognormal": 2,  # mean, sigma of the underlying normal
    "normal": 2,     # mean, sd
}


@dataclass(frozen=True)
class Law:
    """A named distribution with positional parameters, e.g. ``Law("uniform", (0, 2))``."""

    name: str
    params: tuple = ()

    def __post_init__(self):
        if self.name not in _LAWS:
            raise ConfigError("unknown distribution %r (known: %s)" % (self.name, ", ".join(_LAWS)))
        params = tuple(float(p) for p in self.params)
        if len(params) != _LAWS[self.name]:
            raise ConfigError("distribution %r takes %d parameters, got %d"
                              % (self.name, _LAWS[self.name], len(params)))
        if self.name == "uniform" and not params[0] < params[1]:
            raise ConfigError("uniform law needs low < high")
        if self.name in ("lognormal", "normal") and params[1] < 0:
            raise ConfigError("scale parameter must be nonnegative")
        object.__setattr__(self, "params", params)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        p = self.params
        if self.name == "uniform":
            return rng.uniform(p[0], p[1], size)
        if self.name == "constant":
            return np.full(size, p[0])
        if self.name == "lognormal":
            return rng.lognormal(p[0], p[1], size)
        return rng.normal(p[0], p[1], size)

    @classmethod
    def parse(cls, text: str) -> "Law":
        """Parse ``"uniform:0,2"`` / ``"constant:1"`` style descriptors."""
        name, _, rest = text.partition(":")
        params = tuple(float(x) for x in rest.split(",") if x.strip()) if rest else ()
        return cls(name.strip(), params)

    def __str__(self):
        return "%s:%s" % (self.name, ",".join("%g" % p for p in self.params))


def keep_count(omega: float, d: int) -> int:
    """``ceil(omega * d)`` guarded against float noise such as ``0.3 * 10``."""
    return int(math.ceil(omega * d - 1e-9))


@dataclass(frozen=True)
class SynthConfig:
    n: int = 1000
    d: int = 100
    omega: float = 0.3
    noise_regime: str = "heteroskedastic"
    v_law: Law = Law("uniform", (-1, 1))
    sigma_law: Law | None = None
    f_law: Law | None = None
    c_law: Law = Law("constant", (1,))
    #: rescale v to this Euclidean norm (lambda); ``None`` keeps the raw draw
    signal_norm: float | None = None
    #: "gaussian" or "uniform" (variance-matched) noise entries
    noise: str = "gaussian"
    seed: int = 0

    def __post_init__(self):
        if self.n < 2 or self.d < 2:
            raise ConfigError("n and d must both be >= 2")
        if not 0 < self.omega < 1:
            raise ConfigError("omega must lie in (0, 1)")
        if keep_count(self.omega, self.d) < 1:
            raise ConfigError("omega * d rounds to zero informative models")
        if self.noise_regime not in ("homoskedastic", "heteroskedastic"):
            raise ConfigError("noise_regime must be homoskedastic or heteroskedastic")
        if self.noise not in ("gaussian", "uniform"):
            raise ConfigError("noise must be 'gaussian' or 'uniform'")
        if self.signal_norm is not None and self.signal_norm <= 0:
            raise ConfigError("signal_norm must be positive")
        for name in ("v_law", "sigma_law", "f_law", "c_law"):
            law = getattr(self, name)
            if isinstance(law, str):
                object.__setattr__(self, name, Law.parse(law))
            elif law is not None and not isinstance(law, Law):
                raise ConfigError("%s must be a Law or descriptor string" % name)

    @property
    def s(self) -> int:
        return keep_count(self.omega, self.d)

    def noise_laws(self) -> tuple[Law, Law]:
        default = (Law("constant", (1,)) if self.noise_regime == "homoskedastic"
                   else Law("uniform", (0, 2)))
        return self.sigma_law or default, self.f_law or default


@dataclass(frozen=True)
class GroundTruth:
    v: np.ndarray
    support: np.ndarray  # boolean mask of informative models
    magnitude: float
    sigma: np.ndarray
    f: np.ndarray
    c: np.ndarray

    @property
    def s(self) -> int:
        return int(self.support.sum())

    @property
    def u(self) -> np.ndarray:
        return np.where(self.support, self.magnitude, 0.0)

    @property
    def lam(self) -> float:
        return float(np.linalg.norm(self.v))

    def noise_profile(self) -> tuple[np.ndarray, np.ndarray]:
        """Row and column factors ``(h0, f)`` of the normalized noise variance ``h0 f^T / n``.

        ``h0_i = sigma_i^2 / (||v||^2 u_i^2 + sigma_i^2 mean(f))``; the ``mean(f)``
        term is the finite-sample row-norm correction and equals 1 when f is
        normalized.
        """
        u = self.u
        h0 = self.sigma ** 2 / (self.lam ** 2 * u ** 2 + self.sigma ** 2 * self.f.mean())
        return h0, self.f.copy()

    def to_json(self) -> str:
        payload = {
            "v": self.v.tolist(),
            "support": self.support.astype(int).tolist(),
            "magnitude": self.magnitude,
            "sigma": self.sigma.tolist(),
            "f": self.f.tolist(),
            "c": self.c.tolist(),
            "s": self.s,
            "lambda": self.lam,
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        p = json.loads(text)
        return cls(np.array(p["v"]), np.array(p["support"], dtype=bool), float(p["magnitude"]),
                   np.array(p["sigma"]), np.array(p["f"]), np.array(p["c"]))


def draw_truth(config: SynthConfig, rng: np.random.Generator) -> GroundTruth:
    n, d, s = config.n, config.d, config.s
    v = config.v_law.sample(rng, n)
    if config.signal_norm is not None:
        norm = np.linalg.norm(v)
        if norm == 0:
            raise ConfigError("v draw is identically zero; cannot rescale")
        v = v * (config.signal_norm / norm)
    support = np.zeros(d, dtype=bool)
    support[rng.choice(d, size=s, replace=False)] = True
    sigma_law, f_law = config.noise_laws()
    sigma = sigma_law.sample(rng, d)
    f = f_law.sample(rng, n)
    c = config.c_law.sample(rng, d)
    if np.any(c <= 0):
        raise ConfigError("scale law produced a nonpositive scale")
    if np.any(sigma < 0) or np.any(f < 0):
        raise ConfigError("noise laws must be nonnegative")
    return GroundTruth(v, support, math.sqrt((d / n) / s), sigma, f, c)


def sample_predictions(truth: GroundTruth, rng: np.random.Generator,
                       noise: str = "gaussian") -> np.ndarray:
    """Fresh noise draw for fixed ground truth; returns the raw ``d x n`` matrix."""
    d, n = truth.sigma.size, truth.v.size
    if noise == "gaussian":
        w = rng.standard_normal((d, n)) / math.sqrt(n)
    else:
        # Unif(-a, a) has variance a^2 / 3
        a = math.sqrt(3.0 / n)
        w = rng.uniform(-a, a, (d, n))
    signal = np.outer(truth.u, truth.v)
    noise_part = truth.sigma[:, None] * np.sqrt(truth.f)[None, :] * w
    return truth.c[:, None] * (signal + noise_part)


def generate(config: SynthConfig) -> tuple[PredictionMatrix, GroundTruth]:
    """Draw ground truth and a prediction matrix; identical seeds give identical bytes."""
    rng = np.random.default_rng(config.seed)
    truth = draw_truth(config, rng)
    Y = sample_predictions(truth, rng, config.noise)
    return PredictionMatrix(Y), truth


def spiked_whitened(n: int, d: int, lam: float, omega: float, seed: int = 0):
    """Already-whitened rank-one model ``Ytilde = (lam / n) u v^T + W``.

    ``W`` has i.i.d. ``N(0, 1/n)`` entries, ``u`` is drawn from the sparse
    uniform mixture (unit second moment) and ``v`` is standard normal.  This is
    the normalization under which the state-evolution recursion is stated.

    Returns ``(Ytilde, u, v)``.
    """
    from .state_evolution import nu_u_mixture

    rng = np.random.default_rng(seed)
    mix = nu_u_mixture(omega)
    u = mix.sample(rng, d)
    v = rng.standard_normal(n)
    W = rng.standard_normal((d, n)) / math.sqrt(n)
    return (lam / n) * np.outer(u, v) + W, u, v


def config_dict(config: SynthConfig) -> dict:
    out = asdict(config)
    for k, law in list(out.items()):
        if isinstance(getattr(config, k), Law):
            out[k] = str(getattr(config, k))
    return out
