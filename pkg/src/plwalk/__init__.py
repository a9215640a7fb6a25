"""Exact piecewise-linear group actions on the dyadic rationals and
random walks on the associated Schreier graph."""

from .dyadic import Dyadic, NEG_INF, ONE, ZERO
from .plmaps import PLMap, compose, compose_all, generator, identity
from .words import StepDistribution, preset, uniform_k

__version__ = "0.1.0"

__all__ = [
    "Dyadic",
    "NEG_INF",
    "ZERO",
    "ONE",
    "PLMap",
    "compose",
    "compose_all",
    "generator",
    "identity",
    "StepDistribution",
    "preset",
    "uniform_k",
    "__version__",
]
