"""Static t-copula estimation and the constant-correlation bias study.

The static fit is two-stage: for a candidate ``nu`` the correlation is the
Pearson correlation of ``(t_nu^{-1}(U_i), t_nu^{-1}(V_i))``, and ``nu`` maximizes
the resulting copula log-likelihood over ``[1, 400]``.  A fit that ends on the
upper bound is reported as ``nu = inf`` (the Gaussian copula).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import stats

from tailmix import copula, dist, tails
from tailmix._parallel import pmap
from tailmix.copula import CopulaFamily
from tailmix.dist import INF
from tailmix.mixing import ScarStationary
from tailmix.rng import generator
from tailmix.sim import CopulaSample, ScarParams, sample_mixture

log = logging.getLogger(__name__)

NU_LOWER = 1.0
NU_UPPER = 400.0
RHO_CLAMP = 0.9999
MIN_SAMPLE = 20
_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitError(ArithmeticError):
    """Optimizer failure; `best` holds the best ``(nu, log_lik)`` seen."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DegenerateDataError(ValueError):
    pass


class InputError(ValueError):
    pass


@dataclass(frozen=True)
class FitResult:
    nu_hat: float
    rho_hat: float
    log_lik: float
    at_bound: bool

    @property
    def family(self) -> CopulaFamily:
        return CopulaFamily(self.nu_hat)


@dataclass(frozen=True)
class TailReport:
    lambda_year: float
    lambda_dec: float
    lambda_cent: float
    lambda_limit: float
    levels: tuple

    @property
    def ordered(self) -> bool:
        return self.lambda_year >= self.lambda_dec >= self.lambda_cent


# -- data preparation --------------------------------------------------------

def pseudo_observations(x, y) -> CopulaSample:
    """Rank transform to ``(rank/(n+1))``, ties sharing their average rank."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise InputError("x and y must be 1-d sequences of equal length")
    if np.any(np.isnan(x)) or np.any(np.isnan(y)):
        raise InputError("inputs contain NaN")
    n = len(x)
    if n < MIN_SAMPLE:
        raise InputError(f"need at least {MIN_SAMPLE} observations, got {n}")
    return CopulaSample(stats.rankdata(x) / (n + 1), stats.rankdata(y) / (n + 1),
                        provenance="pseudo-observations")


def load_sample(path, kind: str = "raw") -> CopulaSample:
    """Read a two-column CSV of raw data (``kind='raw'``) or of ``(u, v)``.

    Lines starting with ``#`` and a non-numeric header row are skipped.
    """
    xs, ys = [], []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                a, b = (float(c) for c in row[:2])
            except ValueError:
                if not xs and not ys:
                    continue  # header
                raise InputError(f"{path}, line {lineno}: expected two numbers, got {row!r}") from None
            xs.append(a)
            ys.append(b)
    if kind == "raw":
        sample = pseudo_observations(xs, ys)
    elif kind == "uv":
        sample = CopulaSample(np.array(xs), np.array(ys), provenance=f"uv:{path}")
        if len(sample) < MIN_SAMPLE:
            raise InputError(f"need at least {MIN_SAMPLE} observations, got {len(sample)}")
        if np.any((sample.u <= 0) | (sample.u >= 1) | (sample.v <= 0) | (sample.v >= 1)):
            raise InputError("(u, v) input must lie strictly inside the unit square")
    else:
        raise ValueError(f"unknown input kind {kind!r}")
    return sample


# -- estimation ----------------------------------------------------------------

def _corr(x, y):
    xc = x - x.mean()
    yc = y - y.mean()
    sxx = float(xc @ xc)
    syy = float(yc @ yc)
    if sxx <= 0.0 or syy <= 0.0:
        raise DegenerateDataError("zero variance after quantile transform")
    r = float(xc @ yc) / math.sqrt(sxx * syy)
    return min(max(r, -RHO_CLAMP), RHO_CLAMP)


def rho_moment(sample: CopulaSample, nu) -> float:
    """Pearson correlation of the t-quantile transformed pairs, clamped to
    ``[-0.9999, 0.9999]``."""
    if len(sample) < MIN_SAMPLE:
        raise InputError(f"need at least {MIN_SAMPLE} observations")
    nu = dist.check_dof(nu)
    return _corr(dist._t_quantile(sample.u, nu), dist._t_quantile(sample.v, nu))


def profile_loglik(sample: CopulaSample, nu: float) -> tuple[float, float]:
    """Copula log-likelihood at `nu` with the moment correlation plugged in.

    Returns ``(log_lik, rho_hat)``.
    """
    x = dist._t_quantile(sample.u, nu)
    y = dist._t_quantile(sample.v, nu)
    rho = _corr(x, y)
    if math.isinf(nu):
        det = 1.0 - rho * rho
        q = (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / det
        ll = -0.5 * len(x) * math.log(det) - 0.5 * math.fsum(q)
    else:
        joint = dist.bv_t_log_density(x, y, rho, nu)
        ll = math.fsum(joint - dist.t_log_pdf(x, nu) - dist.t_log_pdf(y, nu))
    return ll, rho


def _golden_max(f, a, b, tol, max_iter):
    """Golden-section search for a maximum of `f` on ``[a, b]``."""
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    for it in range(max_iter):
        if b - a <= tol:
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    else:
        best = (c, fc) if fc >= fd else (d, fd)
        raise FitError(f"golden section did not converge in {max_iter} iterations", best)
    return (c, fc) if fc >= fd else (d, fd)


def fit_static_t(sample: CopulaSample, brackets: int = 3, tol: float = 1e-6,
                 max_iter: int = 200) -> FitResult:
    """Fit a static t-copula by profile likelihood.

    ``nu`` is searched on a log scale: ``[1, 400]`` is cut into `brackets`
    equal pieces, each searched by golden section down to a bracket of width
    `tol` in ``log nu``, and the best interior or end point wins.  An optimum
    within 1e-6 of 400 is reported as ``nu_hat = inf`` with ``at_bound`` set.

    Raises
    ------
    FitError
        Non-finite likelihood or no convergence; carries the best iterate.
    """
    if len(sample) < MIN_SAMPLE:
        raise InputError(f"need at least {MIN_SAMPLE} observations")
    cache = {}

    def ll_log(t):
        if t not in cache:
            cache[t] = profile_loglik(sample, math.exp(t))[0]
        return cache[t]

    lo, hi = math.log(NU_LOWER), math.log(NU_UPPER)
    edges = np.linspace(lo, hi, brackets + 1)
    candidates = [(lo, ll_log(lo)), (hi, ll_log(hi))]
    for a, b in zip(edges[:-1], edges[1:]):
        candidates.append(_golden_max(ll_log, float(a), float(b), tol, max_iter))
    best_t, best_ll = max(candidates, key=lambda c: c[1])
    if not math.isfinite(best_ll):
        raise FitError("non-finite log-likelihood", (math.exp(best_t), best_ll))
    nu = math.exp(best_t)
    at_bound = nu >= NU_UPPER - 1e-6
    if at_bound:
        nu = NU_UPPER
    ll, rho = profile_loglik(sample, nu)
    return FitResult(INF if at_bound else nu, rho, ll, at_bound)


def implied_tail_report(fit: FitResult, frequency: float = 250) -> TailReport:
    """Tail dependence of the fitted copula at once-a-year, -decade and
    -century exceedance levels for data observed `frequency` times a year."""
    if frequency < 1:
        raise ValueError("frequency must be at least one observation per year")
    levels = (1.0 / frequency, 1.0 / (10.0 * frequency), 1.0 / (100.0 * frequency))
    fam = fit.family
    lam = [copula.penultimate_lambda(u, fit.rho_hat, fam) for u in levels]
    report = TailReport(*lam, copula.limiting_lambda(fit.rho_hat, fam), levels)
    if fit.rho_hat > 0 and not report.ordered:
        log.warning("implied lambda(u) not monotone over the horizon levels: %s", lam)
    return report


# -- Monte Carlo bias study ----------------------------------------------------

@dataclass(frozen=True)
class BiasRow:
    nu_true: float
    sigma: float
    bias_lambda_u: float
    bias_lambda: float
    true_lambda_u: float
    true_lambda: float
    mean_rho_hat: float
    median_nu_hat: float
    replicates: int
    failures: int
    sample_size: int


def _replicate(index, family, scar, sample_size, u_eval, seed, path_mode):
    sample = sample_mixture(sample_size, family, scar, seed=generator(seed, index), path_mode=path_mode)
    try:
        fit = fit_static_t(sample)
    except (FitError, DegenerateDataError) as exc:
        log.info("replicate %d failed: %s", index, exc)
        return None
    fam = fit.family
    return (copula.penultimate_lambda(u_eval, fit.rho_hat, fam),
            copula.limiting_lambda(fit.rho_hat, fam), fit.rho_hat, fit.nu_hat)


def mc_bias_study(nu_true, scar: ScarParams, sample_size: int = 1000, replicates: int = 200,
                  u_eval: float = 0.01, seed: int = 0, path_mode: bool = True,
                  threads: int = 1) -> BiasRow:
    """Bias of static t-copula estimates of ``lambda(u_eval)`` and ``lambda``
    when the data come from a SCAR correlation mixture.

    Replicate ``i`` draws from the stream keyed by ``(seed, i)``, so cells of a
    table run with one seed share common random numbers and results do not
    depend on `threads`.  Failed fits are dropped and counted.
    """
    if replicates < 1:
        raise ValueError("need at least one replicate")
    family = CopulaFamily(nu_true)
    job = partial(_replicate, family=family, scar=scar, sample_size=sample_size,
                  u_eval=u_eval, seed=seed, path_mode=path_mode)
    results = [r for r in pmap(job, range(replicates), threads) if r is not None]
    failures = replicates - len(results)
    if failures:
        log.warning("%d of %d replicates failed and were excluded", failures, replicates)
    if not results:
        raise FitError("every replicate failed")
    true_u = tails.mixture_penultimate_lambda(u_eval, family, scar)
    true_lim = tails.mixture_limiting_lambda(family, scar)
    m = len(results)
    cols = list(zip(*results))
    return BiasRow(
        nu_true=float(nu_true),
        sigma=scar.sigma,
        bias_lambda_u=math.fsum(cols[0]) / m - true_u,
        bias_lambda=math.fsum(cols[1]) / m - true_lim,
        true_lambda_u=true_u,
        true_lambda=true_lim,
        mean_rho_hat=math.fsum(cols[2]) / m,
        median_nu_hat=float(np.median(cols[3])),
        replicates=m,
        failures=failures,
        sample_size=sample_size,
    )


@dataclass
class BiasTable:
    rows: dict  # (nu_true, sigma) -> BiasRow
    nus: tuple
    sigmas: tuple

    def cell(self, nu, sigma) -> BiasRow:
        return self.rows[(float(nu), float(sigma))]

    def write_csv(self, fh, comments=()):
        """Two blocks, ``lambda_u`` then ``lambda``, one row per ``nu``."""
        for line in comments:
            fh.write(f"# {line}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["statistic", "nu"] + [f"sigma={s:g}" for s in self.sigmas])
        for stat, attr in (("lambda_u", "bias_lambda_u"), ("lambda", "bias_lambda")):
            for nu in self.nus:
                vals = [getattr(self.cell(nu, s), attr) for s in self.sigmas]
                w.writerow([stat, "inf" if math.isinf(nu) else f"{nu:g}"] + [f"{v:.17g}" for v in vals])

    def write_detail_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        fields = list(BiasRow.__dataclass_fields__)
        w.writerow(fields)
        for nu in self.nus:
            for s in self.sigmas:
                row = self.cell(nu, s)
                w.writerow([f"{getattr(row, f):.17g}" if isinstance(getattr(row, f), float)
                            else getattr(row, f) for f in fields])


def bias_table(nus=(5.0, 10.0, 20.0, INF), sigmas=(0.05, 0.1, 0.15, 0.2), beta: float = 0.97,
               rho_bar: float = 0.5, sample_size: int = 1000, replicates: int = 200,
               u_eval: float = 0.01, seed: int = 0, path_mode: bool = True,
               threads: int = 1) -> BiasTable:
    """Run :func:`mc_bias_study` over a ``(nu, sigma)`` grid with SCAR mean
    correlation `rho_bar`."""
    rows = {}
    for s in sigmas:
        scar = ScarStationary.with_mean(rho_bar, beta, s)
        for nu in nus:
            rows[(float(nu), float(s))] = mc_bias_study(
                nu, scar, sample_size, replicates, u_eval, seed, path_mode, threads)
    return BiasTable(rows, tuple(float(n) for n in nus), tuple(float(s) for s in sigmas))
