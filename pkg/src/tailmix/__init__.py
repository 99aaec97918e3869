"""Tail dependence of correlation mixtures of Gaussian and Student-t copulas."""

from tailmix.dist import INF, DomainError
from tailmix.copula import CopulaFamily, diagonal, limiting_lambda, penultimate_lambda
from tailmix.mixing import (
    Empirical,
    PointMass,
    ScarStationary,
    UniformInterval,
    mean_correlation,
    quadrature_nodes,
    solve_alpha_for_mean,
)
from tailmix.tails import (
    TailCurve,
    estimate_eta,
    expansion_constants,
    mixture_limiting_lambda,
    mixture_penultimate_lambda,
    tail_curve,
)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "DomainError",
    "CopulaFamily",
    "diagonal",
    "limiting_lambda",
    "penultimate_lambda",
    "Empirical",
    "PointMass",
    "ScarStationary",
    "UniformInterval",
    "mean_correlation",
    "quadrature_nodes",
    "solve_alpha_for_mean",
    "TailCurve",
    "estimate_eta",
    "expansion_constants",
    "mixture_limiting_lambda",
    "mixture_penultimate_lambda",
    "tail_curve",
]
