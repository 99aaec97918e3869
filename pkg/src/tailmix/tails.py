"""Tail dependence of correlation mixtures.

The mixture copula is ``C(u, v) = int C_rho(u, v) mu(drho)``, so its
penultimate coefficient ``lambda(u) = C(u, u)/u`` and its limit are
``mu``-averages of the fixed-correlation quantities in :mod:`tailmix.copula`.
Continuous mixing laws are discretized with :func:`quadrature_nodes`, the
order being doubled from 64 until successive values agree to 1e-9.

Also here: the second-order expansion ``lambda(u) = lambda + gamma u^{2/nu}``
for t mixtures, the expansion of ``P(S^{-1} > z)`` it rests on, and
least-squares estimation of the Ledford-Tawn index from a computed curve.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import partial
from typing import NamedTuple

import numpy as np
from scipy import special, stats

from tailmix import copula, dist
from tailmix._parallel import pmap
from tailmix.copula import CopulaFamily
from tailmix.mixing import MixingDistribution, PointMass, is_discrete, quadrature_nodes

N_NODES_START = 64
N_NODES_MAX = 2048
NODE_TOL = 1e-9


class InsufficientDataError(ValueError):
    """Too few curve points inside a regression window."""


# -- mixture integrals -------------------------------------------------------

def mixture_expectation(fn, mu: MixingDistribution, n_nodes: int | None = None) -> float:
    """``int fn(rho) mu(drho)`` for a vectorized `fn`.

    With ``n_nodes=None`` the node count starts at 64 and doubles until two
    successive values differ by less than ``NODE_TOL``; the finer value is
    returned.
    """
    def at(n):
        nodes, weights = quadrature_nodes(mu, n, graded=True)
        return math.fsum(weights * fn(nodes))

    if is_discrete(mu):
        return at(1)
    if n_nodes is not None:
        return at(n_nodes)
    n = N_NODES_START
    prev = at(n)
    while n < N_NODES_MAX:
        n *= 2
        cur = at(n)
        if abs(cur - prev) < NODE_TOL:
            return cur
        prev = cur
    return cur


def mixture_penultimate_lambda(u, family: CopulaFamily, mu: MixingDistribution,
                               n_nodes: int | None = None) -> float:
    """Penultimate tail dependence ``lambda(u)`` of the mixture copula."""
    u = copula._check_u(u)
    val = mixture_expectation(lambda r: copula._lambda_rho(u, r, family.nu), mu, n_nodes)
    return min(max(val, 0.0), 1.0)


def mixture_diagonal(u, family: CopulaFamily, mu: MixingDistribution,
                     n_nodes: int | None = None) -> float:
    """Mixture copula diagonal ``C(u, u)``."""
    return u * mixture_penultimate_lambda(u, family, mu, n_nodes)


def mixture_limiting_lambda(family: CopulaFamily, mu: MixingDistribution,
                            n_nodes: int | None = None) -> float:
    """Coefficient of tail dependence ``E[lambda_rho]`` of the mixture.

    Zero for Gaussian mixtures unless the law puts mass on ``rho = 1``, which
    only a point mass can do here.
    """
    if family.is_gaussian:
        return 1.0 if isinstance(mu, PointMass) and mu.rho >= 1.0 else 0.0
    return mixture_expectation(lambda r: copula.limiting_lambda(r, family), mu, n_nodes)


# -- second-order expansion for t mixtures ----------------------------------

class ExpansionConstants(NamedTuple):
    a_nu: float
    b_nu: float
    ez_nu: float
    gamma: float
    lambda_limit: float


def tail_constants(nu: float) -> tuple[float, float, float]:
    """``(a_nu, b_nu, E[Z_+^nu])`` for finite `nu`.

    ``a_nu = (nu/2)^{nu/2} / Gamma(nu/2 + 1)``, ``b_nu = (nu/2)^2/(nu/2 + 1)``
    and ``E[Z_+^nu] = 2^{nu/2 - 1} Gamma((nu + 1)/2) / sqrt(pi)``.
    """
    h = 0.5 * nu
    a = math.exp(h * math.log(h) - special.gammaln(h + 1.0))
    b = h * h / (h + 1.0)
    ez = math.exp((h - 1.0) * math.log(2.0) + special.gammaln(0.5 * (nu + 1.0))) / math.sqrt(math.pi)
    return a, b, ez


def expansion_constants(nu, mu: MixingDistribution, n_nodes: int | None = None) -> ExpansionConstants:
    """Constants of ``lambda(u) = lambda + gamma u^{2/nu} + o(u^{2/nu})``.

    ``gamma = (a_nu E[Z_+^nu])^{-2/nu} b_nu (nu + 1) E[lambda_{nu,rho} -
    lambda_{nu+2,rho}]``, the expectation being over the mixing law.
    """
    nu = dist.check_dof(nu)
    if math.isinf(nu):
        raise dist.DomainError("the expansion needs finite degrees of freedom")
    a, b, ez = tail_constants(nu)
    fam = CopulaFamily.student_t(nu)
    fam2 = CopulaFamily.student_t(nu + 2.0)
    gap = mixture_expectation(
        lambda r: copula.limiting_lambda(r, fam) - copula.limiting_lambda(r, fam2), mu, n_nodes)
    gamma = (a * ez) ** (-2.0 / nu) * b * (nu + 1.0) * gap
    return ExpansionConstants(a, b, ez, gamma, mixture_limiting_lambda(fam, mu, n_nodes))


def expansion_lambda(u, constants: ExpansionConstants, nu) -> float:
    """Two-term approximation ``lambda + gamma u^{2/nu}``."""
    return constants.lambda_limit + constants.gamma * u ** (2.0 / nu)


class InvChiTail(NamedTuple):
    exact: float
    expansion: float
    delta_bound: float


def inv_chi_tail(z, nu) -> InvChiTail:
    """Tail ``P(S^{-1} > z)`` where ``nu S^2`` is chi-square(nu).

    Returns the exact value ``P(chi2_nu < nu z^-2)``, the expansion
    ``a_nu z^-nu (1 - b_nu z^-2)`` and the remainder bound ``c_nu z^{-nu-4}``
    with ``c_nu = (nu/2)^{nu/2+2} / (2 Gamma(nu/2) (nu/2 + 2))``.
    """
    z = float(z)
    if not z > 0.0:
        raise dist.DomainError("z must be positive")
    nu = dist.check_dof(nu)
    a, b, _ = tail_constants(nu)
    h = 0.5 * nu
    c = math.exp((h + 2.0) * math.log(h) - special.gammaln(h)) / (2.0 * (h + 2.0))
    exact = dist.chi_square_cdf(nu / (z * z), nu)
    return InvChiTail(exact, a * z ** -nu * (1.0 - b / (z * z)), c * z ** (-nu - 4.0))


# -- curves and the Ledford-Tawn index ---------------------------------------

@dataclass(frozen=True)
class TailCurve:
    """Penultimate tail dependence on a strictly decreasing grid of ``u``."""

    u: np.ndarray
    lambda_u: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        lam = np.asarray(self.lambda_u, dtype=float)
        if u.shape != lam.shape or u.ndim != 1:
            raise ValueError("u and lambda_u must be 1-d arrays of equal length")
        if np.any(u <= 0) or np.any(u > 1) or np.any(np.diff(u) >= 0):
            raise ValueError("u must be strictly decreasing inside (0, 1]")
        if np.any(lam < 0) or np.any(lam > 1):
            raise ValueError("lambda_u must lie in [0, 1]")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "lambda_u", lam)

    @property
    def points(self):
        return list(zip(self.u.tolist(), self.lambda_u.tolist()))

    def __len__(self):
        return len(self.u)

    def write_csv(self, fh, comments=()):
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["u", "lambda_u"])
        for u, lam in self.points:
            w.writerow([f"{u:.17g}", f"{lam:.17g}"])

    @classmethod
    def read_csv(cls, fh) -> "TailCurve":
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        pairs = [(float(r["u"]), float(r["lambda_u"])) for r in rows]
        return cls(np.array([p[0] for p in pairs]), np.array([p[1] for p in pairs]))


def log_grid(u_max=1e-1, u_min=1e-10, per_decade=50) -> np.ndarray:
    """Log-spaced decreasing grid with `per_decade` points per decade."""
    top, bottom = math.log10(u_max), math.log10(u_min)
    n = int(round((top - bottom) * per_decade))
    return 10.0 ** (top - np.arange(n + 1) / per_decade)


def _curve_point(u, family, mu):
    return mixture_penultimate_lambda(u, family, mu)


def tail_curve(family: CopulaFamily, mu: MixingDistribution, u_grid, threads: int = 1) -> TailCurve:
    """Evaluate ``lambda(u)`` of the mixture on `u_grid`.

    Points are independent, so any `threads` value yields the same numbers.
    """
    u_grid = np.asarray(u_grid, dtype=float)
    if np.any(np.diff(u_grid) >= 0):
        raise ValueError("u_grid must be strictly decreasing")
    values = pmap(partial(_curve_point, family=family, mu=mu), u_grid.tolist(), threads)
    return TailCurve(u_grid, np.array(values))


@dataclass(frozen=True)
class EtaEstimate:
    eta: float
    chi_bar: float
    u_lower: float
    u_upper: float
    slope: float
    r_squared: float
    n_points: int


MIN_WINDOW_POINTS = 10


def estimate_eta(curve: TailCurve, u_lower: float, u_upper: float) -> EtaEstimate:
    """Ledford-Tawn index from a tail curve by ordinary least squares.

    Regresses ``log lambda(u)`` on ``log u`` over the curve points inside
    ``[u_lower, u_upper]``; a slope ``b`` maps to ``eta = 1/(1 + b)`` and
    ``chi_bar = 2 eta - 1``.

    Raises
    ------
    InsufficientDataError
        Fewer than ten points in the window.
    DomainError
        A nonpositive ``lambda(u)`` inside the window.
    """
    if not u_lower < u_upper:
        raise ValueError("need u_lower < u_upper")
    slack = 1e-9
    mask = (curve.u >= u_lower * (1 - slack)) & (curve.u <= u_upper * (1 + slack))
    n = int(mask.sum())
    if n < MIN_WINDOW_POINTS:
        raise InsufficientDataError(f"{n} curve points in [{u_lower:g}, {u_upper:g}], need {MIN_WINDOW_POINTS}")
    lam = curve.lambda_u[mask]
    if np.any(lam <= 0):
        raise dist.DomainError("lambda(u) must be positive inside the window")
    fit = stats.linregress(np.log(curve.u[mask]), np.log(lam))
    eta = 1.0 / (1.0 + fit.slope)
    return EtaEstimate(eta, 2.0 * eta - 1.0, float(u_lower), float(u_upper),
                       float(fit.slope), float(fit.rvalue ** 2), n)


def eta_windows(k_start=3.0, k_stop=10.0, k_step=0.01, width=3.0):
    """Sliding windows ``[10^{-k-width}, 10^{-k}]`` for k on a regular grid."""
    m = int(round((k_stop - k_start) / k_step))
    ks = k_start + k_step * np.arange(m + 1)
    return [(10.0 ** -(k + width), 10.0 ** -k) for k in ks]


def eta_sweep(curve: TailCurve, windows=None) -> list[EtaEstimate]:
    """:func:`estimate_eta` over each window, in order of decreasing ``u``."""
    windows = eta_windows() if windows is None else windows
    return [estimate_eta(curve, lo, hi) for lo, hi in windows]
