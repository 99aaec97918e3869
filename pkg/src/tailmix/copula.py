"""Fixed-correlation Gaussian and Student-t copulas on the diagonal.

All functions here accept a scalar or an array of correlations and evaluate
them in one vectorized quadrature, which is what the mixture code relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from tailmix import dist
from tailmix.dist import INF, DomainError

# correlations this close to +-1 take the Frechet-bound path
RHO_EDGE = 1e-12


@dataclass(frozen=True)
class CopulaFamily:
    """Gaussian (``nu = INF``) or Student-t copula family."""

    nu: float = INF

    def __post_init__(self):
        object.__setattr__(self, "nu", dist.check_dof(self.nu))

    @classmethod
    def gaussian(cls) -> "CopulaFamily":
        return cls(INF)

    @classmethod
    def student_t(cls, nu: float) -> "CopulaFamily":
        if math.isinf(float(nu)):
            raise DomainError("Student-t family needs finite degrees of freedom")
        return cls(nu)

    @classmethod
    def parse(cls, text: str) -> "CopulaFamily":
        """Parse ``gauss`` / ``gaussian`` / ``normal`` or ``t:<nu>``."""
        key = text.strip().lower()
        if key in ("gauss", "gaussian", "normal", "t:inf"):
            return cls.gaussian()
        if key.startswith("t:"):
            return cls.student_t(float(key[2:]))
        raise ValueError(f"unknown copula family {text!r}; use 'gauss' or 't:<nu>'")

    @property
    def kind(self) -> str:
        return "gaussian" if self.is_gaussian else "t"

    @property
    def is_gaussian(self) -> bool:
        return math.isinf(self.nu)

    def __str__(self):
        return "gauss" if self.is_gaussian else f"t:{self.nu:g}"


def _check_u(u):
    u = float(u)
    if not 0.0 < u <= 1.0:
        raise DomainError(f"u must lie in (0, 1], got {u}")
    return u


def _check_rho(rho):
    rho = np.asarray(rho, dtype=float)
    if np.any(np.isnan(rho)) or np.any(np.abs(rho) > 1):
        raise DomainError("correlation must lie in [-1, 1]")
    return rho


def _lambda_rho(u, rho, nu):
    """u^{-1} C_rho(u, u) for an array of correlations (no validation)."""
    rho = np.atleast_1d(rho)
    out = np.empty(rho.shape)
    if u == 1.0:
        out.fill(1.0)
        return out
    upper = rho >= 1.0 - RHO_EDGE
    lower = rho <= -1.0 + RHO_EDGE
    out[upper] = 1.0
    out[lower] = max(2.0 * u - 1.0, 0.0) / u
    inner = ~(upper | lower)
    if np.any(inner):
        q = float(dist._t_quantile(u, nu))
        out[inner] = dist.orthant_ratio(u, q, rho[inner], nu)
    return out


def penultimate_lambda(u, rho, family: CopulaFamily):
    """Penultimate tail dependence ``C_rho(u, u) / u``.

    The ratio is integrated directly rather than formed by division, so it
    is accurate in relative terms even when ``C_rho(u, u)`` is below 1e-20.

    Parameters
    ----------
    u : float
        Threshold in ``(0, 1]``.
    rho : float or array_like
        Correlation(s) in ``[-1, 1]``.
    family : CopulaFamily

    Returns
    -------
    float or ndarray
        Values in ``[0, 1]``, same shape as `rho`.
    """
    u = _check_u(u)
    rho = _check_rho(rho)
    out = _lambda_rho(u, rho, family.nu)
    return float(out[0]) if rho.ndim == 0 else out.reshape(rho.shape)


def diagonal(u, rho, family: CopulaFamily):
    """Copula diagonal ``C_rho(u, u)``; ``rho = +-1`` gives the Frechet bounds."""
    u = _check_u(u)
    return u * penultimate_lambda(u, rho, family)


def limiting_lambda(rho, family: CopulaFamily):
    """Coefficient of tail dependence of the fixed-correlation copula.

    For the t copula this is ``2 t_{nu+1}(-sqrt(nu+1) sqrt(1-rho)/sqrt(1+rho))``,
    which tends to 0 as ``rho -> -1``.  The Gaussian copula has no tail
    dependence unless ``rho = 1``.
    """
    rho = _check_rho(rho)
    if family.is_gaussian:
        out = np.where(rho >= 1.0, 1.0, 0.0)
    else:
        nu = family.nu
        with np.errstate(divide="ignore"):
            # rho = -1 gives -inf and a limit of 0
            arg = -math.sqrt(nu + 1.0) * np.sqrt((1.0 - rho) / (1.0 + rho))
        out = 2.0 * dist._t_cdf(arg, nu + 1.0)
    return float(out) if out.ndim == 0 else out


def copula_cdf(u, v, rho, family: CopulaFamily):
    """Thin pass-through ``C_rho(u, v)`` for ``u, v`` in ``(0, 1)``."""
    nu = family.nu
    x = float(dist._t_quantile(u, nu))
    y = float(dist._t_quantile(v, nu))
    return dist.bv_elliptical_cdf(x, y, rho, nu)
