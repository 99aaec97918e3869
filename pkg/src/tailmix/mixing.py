"""Mixing laws for a random correlation parameter.

Four laws are supported: a point mass, the uniform law on an interval, the
stationary law of the SCAR process ``gamma_t = alpha + beta gamma_{t-1} +
sigma eps_t`` with ``rho_t = tanh(gamma_t)``, and an empirical sample.  Each
can be discretized into weighted nodes for mixture integrals and sampled
reproducibly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np
from scipy import optimize, special
from scipy.special import roots_hermitenorm, roots_legendre

from tailmix import rng as _rng


@dataclass(frozen=True)
class PointMass:
    rho: float

    def __post_init__(self):
        if not -1.0 <= self.rho <= 1.0:
            raise ValueError(f"point mass must lie in [-1, 1], got {self.rho}")

    def __str__(self):
        return f"point:{self.rho:g}"


@dataclass(frozen=True)
class UniformInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not -1.0 <= self.lo < self.hi <= 1.0:
            raise ValueError(f"need -1 <= lo < hi <= 1, got ({self.lo}, {self.hi})")

    def __str__(self):
        return f"uniform:{self.lo:g},{self.hi:g}"


@dataclass(frozen=True)
class ScarStationary:
    """Stationary law of the SCAR correlation process.

    The latent ``gamma_t`` is a Gaussian AR(1), stationary with mean
    ``alpha / (1 - beta)`` and variance ``sigma^2 / (1 - beta^2)``.
    """

    alpha: float
    beta: float
    sigma: float

    def __post_init__(self):
        if not abs(self.beta) < 1.0:
            raise ValueError(f"SCAR needs |beta| < 1, got {self.beta}")
        if not self.sigma > 0.0:
            raise ValueError(f"SCAR needs sigma > 0, got {self.sigma}")

    @property
    def gamma_mean(self) -> float:
        return self.alpha / (1.0 - self.beta)

    @property
    def gamma_sd(self) -> float:
        return self.sigma / math.sqrt(1.0 - self.beta * self.beta)

    @classmethod
    def with_mean(cls, rho_bar: float, beta: float, sigma: float) -> "ScarStationary":
        """Build the law whose mean correlation equals `rho_bar`."""
        return cls(solve_alpha_for_mean(rho_bar, beta, sigma), beta, sigma)

    def __str__(self):
        return f"scar:alpha={self.alpha!r},beta={self.beta:g},sigma={self.sigma:g}"


@dataclass(frozen=True)
class Empirical:
    samples: tuple

    def __post_init__(self):
        samples = tuple(float(s) for s in self.samples)
        if not samples:
            raise ValueError("empirical mixing law needs at least one sample")
        if not all(-1.0 < s < 1.0 for s in samples):
            raise ValueError("empirical correlations must lie in (-1, 1)")
        object.__setattr__(self, "samples", samples)

    def __str__(self):
        return f"empirical:n={len(self.samples)}"


MixingDistribution = Union[PointMass, UniformInterval, ScarStationary, Empirical]


class WeightedNodes(NamedTuple):
    nodes: np.ndarray
    weights: np.ndarray


def _hermite(mu: ScarStationary, n: int) -> WeightedNodes:
    x, w = roots_hermitenorm(n)
    return WeightedNodes(np.tanh(mu.gamma_mean + mu.gamma_sd * x), w / w.sum())


def _scar_mean(alpha, beta, sigma, tol=1e-14):
    mu = ScarStationary(alpha, beta, sigma)

    def mean(n):
        nodes, weights = _hermite(mu, n)
        return float(weights @ nodes)

    n = 64
    prev = mean(n)
    while n < 2048:
        n *= 2
        cur = mean(n)
        if abs(cur - prev) < tol:
            return cur
        prev = cur
    return cur


def mean_correlation(mu: MixingDistribution) -> float:
    """Mean of the mixing law.

    The SCAR mean is a Gauss-Hermite integral of ``tanh`` over the stationary
    Gaussian law, with the order doubled until it settles to 1e-14.
    """
    if isinstance(mu, PointMass):
        return float(mu.rho)
    if isinstance(mu, UniformInterval):
        return 0.5 * (mu.lo + mu.hi)
    if isinstance(mu, ScarStationary):
        return _scar_mean(mu.alpha, mu.beta, mu.sigma)
    if isinstance(mu, Empirical):
        return math.fsum(mu.samples) / len(mu.samples)
    raise TypeError(f"not a mixing distribution: {mu!r}")


def solve_alpha_for_mean(target: float, beta: float, sigma: float) -> float:
    """SCAR intercept ``alpha`` giving mean correlation `target`.

    Raises
    ------
    ValueError
        If ``|target| >= 1``.
    ArithmeticError
        If no sign change is found while widening the bracket.
    """
    if not abs(target) < 1.0:
        raise ValueError("target correlation must lie in (-1, 1)")
    if target == 0.0:
        return 0.0
    if target < 0.0:
        return -solve_alpha_for_mean(-target, beta, sigma)
    scale = 1.0 - beta

    def gap(alpha):
        return _scar_mean(alpha, beta, sigma) - target

    hi = math.atanh(target) * scale
    for _ in range(60):
        if gap(hi) > 0:
            break
        hi = 2.0 * hi + scale
    else:
        raise ArithmeticError("could not bracket the SCAR intercept")
    return optimize.brentq(gap, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)


def quadrature_nodes(mu: MixingDistribution, n: int, graded: bool = False) -> WeightedNodes:
    """Discretize the mixing law into `n` weighted nodes.

    Point masses give one node and empirical laws give their samples with
    equal weights.  The uniform law uses Gauss-Legendre on ``(lo, hi)``; with
    ``graded=True`` the rule is applied after the substitution
    ``rho = lo + (hi - lo)(1 - cos(pi x))/2``, which clusters nodes at the ends
    and restores fast convergence for integrands with square-root behaviour at
    ``rho = +-1`` (tail dependence coefficients have that).  The SCAR law uses
    Gauss-Hermite in the latent Gaussian mapped through ``tanh``.
    """
    if n < 1:
        raise ValueError("need at least one node")
    if isinstance(mu, PointMass):
        return WeightedNodes(np.array([float(mu.rho)]), np.array([1.0]))
    if isinstance(mu, UniformInterval):
        x, w = roots_legendre(n)
        x = 0.5 * (x + 1.0)
        w = 0.5 * w
        if graded:
            w = w * 0.5 * math.pi * np.sin(math.pi * x)
            x = 0.5 * (1.0 - np.cos(math.pi * x))
        return WeightedNodes(mu.lo + (mu.hi - mu.lo) * x, w / w.sum())
    if isinstance(mu, ScarStationary):
        return _hermite(mu, n)
    if isinstance(mu, Empirical):
        m = len(mu.samples)
        return WeightedNodes(np.array(mu.samples), np.full(m, 1.0 / m))
    raise TypeError(f"not a mixing distribution: {mu!r}")


def is_discrete(mu: MixingDistribution) -> bool:
    """True when ``quadrature_nodes`` is exact whatever the order."""
    return isinstance(mu, (PointMass, Empirical))


def sample_rho(mu: MixingDistribution, n: int, seed=0) -> np.ndarray:
    """Draw `n` i.i.d. correlations; `seed` may be an int or a Generator."""
    if n < 1:
        raise ValueError("need at least one draw")
    gen = _rng.generator(seed)
    if isinstance(mu, PointMass):
        return np.full(n, float(mu.rho))
    if isinstance(mu, UniformInterval):
        return mu.lo + (mu.hi - mu.lo) * _rng.open_uniform(gen, n)
    if isinstance(mu, ScarStationary):
        z = special.ndtri(_rng.open_uniform(gen, n))
        return np.tanh(mu.gamma_mean + mu.gamma_sd * z)
    if isinstance(mu, Empirical):
        idx = gen.integers(0, len(mu.samples), size=n)
        return np.asarray(mu.samples)[idx]
    raise TypeError(f"not a mixing distribution: {mu!r}")


def parse_mixing(text: str) -> MixingDistribution:
    """Parse the command-line grammar for mixing laws.

    ``point:<rho>``, ``uniform:<lo>,<hi>``, ``scar:<beta>,<sigma>,mean=<rho_bar>``
    and ``empirical:<path>`` (one correlation per line, ``#`` comments allowed).
    """
    kind, _, body = text.strip().partition(":")
    kind = kind.lower()
    if kind == "point":
        return PointMass(float(body))
    if kind == "uniform":
        lo, hi = (float(s) for s in body.split(","))
        return UniformInterval(lo, hi)
    if kind == "scar":
        parts = [p.strip() for p in body.split(",")]
        if len(parts) != 3 or not parts[2].startswith("mean="):
            raise ValueError("SCAR spec is scar:<beta>,<sigma>,mean=<rho_bar>")
        return ScarStationary.with_mean(float(parts[2][5:]), float(parts[0]), float(parts[1]))
    if kind == "empirical":
        values = []
        with open(body) as fh:
            for line in fh:
                line = line.split("#", 1)[0].strip()
                if line:
                    values.append(float(line.split(",")[0]))
        return Empirical(tuple(values))
    raise ValueError(f"unknown mixing spec {text!r}")
