"""Simulation of SCAR correlation paths and (mixture) elliptical copulas.

Normal variates come from the inverse normal CDF applied to open-interval
uniforms and the t mixing variable ``S = sqrt(chi2_nu / nu)`` from the
inverse regularized gamma function, so a seed fixes every draw on any
platform.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from tailmix import dist, rng as _rng
from tailmix.copula import CopulaFamily
from tailmix.mixing import MixingDistribution, ScarStationary, sample_rho

# SCAR parameters (alpha, beta, sigma) are the same triple that defines the
# stationary mixing law.
ScarParams = ScarStationary


@dataclass
class CopulaSample:
    """Pairs ``(u_i, v_i)`` in the open unit square plus where they came from."""

    u: np.ndarray
    v: np.ndarray
    seed: int | None = None
    provenance: str = ""
    rho: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        self.v = np.asarray(self.v, dtype=float)
        if self.u.shape != self.v.shape or self.u.ndim != 1:
            raise ValueError("u and v must be 1-d arrays of equal length")

    def __len__(self):
        return len(self.u)

    @property
    def pairs(self):
        return list(zip(self.u.tolist(), self.v.tolist()))

    def swapped(self) -> "CopulaSample":
        return CopulaSample(self.v, self.u, self.seed, self.provenance, self.rho)

    def write_csv(self, fh, comments=()):
        for line in comments:
            fh.write(f"# {line}\n")
        if self.provenance:
            fh.write(f"# provenance: {self.provenance}\n")
        if self.seed is not None:
            fh.write(f"# seed: {self.seed}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "v"])
        for a, b in zip(self.u.tolist(), self.v.tolist()):
            w.writerow([f"{a:.17g}", f"{b:.17g}"])


def _normals(gen, size):
    return special.ndtri(_rng.open_uniform(gen, size))


def simulate_scar_path(params: ScarParams, length: int, seed=0) -> np.ndarray:
    """Correlation path ``rho_t = tanh(gamma_t)`` of the SCAR process.

    ``gamma_0`` is drawn from the stationary law, then
    ``gamma_t = alpha + beta gamma_{t-1} + sigma eps_t``.
    """
    if length < 1:
        raise ValueError("path length must be at least 1")
    gen = _rng.generator(seed)
    eps = _normals(gen, length)
    gamma = np.empty(length)
    g = params.gamma_mean + params.gamma_sd * eps[0]
    gamma[0] = g
    a, b, s = params.alpha, params.beta, params.sigma
    for t in range(1, length):
        g = a + b * g + s * eps[t]
        gamma[t] = g
    return np.tanh(gamma)


def sample_pairs(rho, family: CopulaFamily, seed=0, size=None):
    """Draw copula pairs with correlation(s) `rho`.

    Uses ``X = Z1 / S`` and ``Y = (rho Z1 + sqrt(1 - rho^2) Z2) / S`` with
    ``S = 1`` in the Gaussian case and returns ``(F(X), F(Y))``.
    """
    gen = _rng.generator(seed)
    rho = np.asarray(rho, dtype=float)
    n = rho.size if size is None else size
    rho = np.broadcast_to(rho, (n,)) if rho.ndim else np.full(n, float(rho))
    z1 = _normals(gen, n)
    z2 = _normals(gen, n)
    x = z1
    y = rho * z1 + np.sqrt(np.clip((1.0 - rho) * (1.0 + rho), 0.0, None)) * z2
    y = np.where(rho >= 1.0, x, y)
    nu = family.nu
    if not math.isinf(nu):
        s = np.sqrt(2.0 * special.gammaincinv(0.5 * nu, _rng.open_uniform(gen, n)) / nu)
        x = x / s
        y = y / s
    u = dist._t_cdf(x, nu)
    v = dist._t_cdf(y, nu)
    # keep pairs inside the open square despite rounding at the extremes
    tiny = np.nextafter(0.0, 1.0)
    top = np.nextafter(1.0, 0.0)
    return np.clip(u, tiny, top), np.clip(v, tiny, top)


def sample_conditional_pair(rho, family: CopulaFamily, seed=0) -> tuple[float, float]:
    """One pair from the fixed-correlation copula."""
    u, v = sample_pairs(float(rho), family, seed, size=1)
    return float(u[0]), float(v[0])


def sample_mixture(n: int, family: CopulaFamily, mu: MixingDistribution, seed=0,
                   path_mode: bool = False) -> CopulaSample:
    """Sample `n` pairs from the correlation mixture copula.

    Correlations are i.i.d. draws from `mu`, or with ``path_mode=True`` (SCAR
    laws only) consecutive values of one simulated SCAR path.
    """
    if n < 1:
        raise ValueError("need at least one pair")
    gen = _rng.generator(seed)
    if path_mode:
        if not isinstance(mu, ScarStationary):
            raise ValueError("path mode needs a SCAR mixing law")
        rho = simulate_scar_path(mu, n, gen)
    else:
        rho = sample_rho(mu, n, gen)
    u, v = sample_pairs(rho, family, gen)
    mode = "path" if path_mode else "iid"
    seed_val = None if isinstance(seed, np.random.Generator) else int(seed)
    return CopulaSample(u, v, seed_val, f"family={family} mix={mu} rho={mode}", rho)


def empirical_lambda(sample: CopulaSample, u: float) -> float:
    """Empirical ``P(V < u | U < u)``.

    Returns NaN, with a warning, when no ``u_i`` falls below `u`.
    """
    if not 0.0 < u < 1.0:
        raise dist.DomainError("u must lie in (0, 1)")
    if len(sample) == 0:
        raise ValueError("empty sample")
    below = sample.u < u
    count = int(below.sum())
    if count == 0:
        warnings.warn(f"no observations with U < {u:g}; lambda(u) undefined", RuntimeWarning)
        return math.nan
    return int((below & (sample.v < u)).sum()) / count
