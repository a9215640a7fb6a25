"""Transience diagnostics: truncated lambda-Green kernels and the
comparison inequality between step distributions.

Chains are assembled exactly (Fraction entries) from a ball of the graph,
with all mass leaving the ball killed; killing only underestimates the true
Green kernel, so growth in the radius gives one-sided evidence.  Floats
enter only in the linear solve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .dyadic import Dyadic
from .schreier import LabeledBall, ball
from .walk import sample_increment_codes, stream, _compile_generic
from .words import StepDistribution

__all__ = [
    "TruncatedChain",
    "truncated_chain",
    "truncated_green",
    "ComparisonReport",
    "comparison_check",
    "DominationFailed",
    "SolverFailure",
    "return_probability",
    "ReturnEstimate",
]

SOLVE_TOL = 1e-12


class DominationFailed(ValueError):
    """The pointwise hypothesis p'(x,y) >= eps * p(x,y) fails somewhere."""

    def __init__(self, violations):
        self.violations = violations
        x, y, p, q = violations[0]
        super().__init__(
            f"domination fails at {len(violations)} transition(s); "
            f"first: p'({x},{y}) = {q} < eps * {p}"
        )


class SolverFailure(RuntimeError):
    pass


@dataclass(frozen=True)
class TruncatedChain:
    """Substochastic restriction of the induced chain to a ball.

    Rows sum to one exactly for states whose whole neighborhood stays in
    the ball; boundary states leak mass (killing).
    """

    ball: LabeledBall
    states: tuple
    index: dict
    entries: dict  # (i, j) -> Fraction

    def row_sum(self, i: int) -> Fraction:
        return sum((w for (r, _), w in self.entries.items() if r == i), Fraction(0))

    def matrix(self) -> scipy.sparse.csr_matrix:
        n = len(self.states)
        rows, cols, vals = [], [], []
        for (i, j), w in self.entries.items():
            rows.append(i)
            cols.append(j)
            vals.append(float(w))
        return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n, n))


def truncated_chain(mu: StepDistribution, center: Dyadic, radius: int) -> TruncatedChain:
    """Exact transition entries of the mu-induced chain on the radius-ball
    of the simple-walk graph around center."""
    b = ball(center, radius)
    states = tuple(sorted(b.vertices))
    index = {v: i for i, v in enumerate(states)}
    entries: dict[tuple, Fraction] = {}
    for v in states:
        i = index[v]
        for g, w in mu:
            t = g(v)
            j = index.get(t)
            if j is not None:
                entries[i, j] = entries.get((i, j), Fraction(0)) + w
    return TruncatedChain(b, states, index, entries)


def _green_solve(chain: TruncatedChain, lam: float, origin_index: int) -> float:
    n = len(chain.states)
    p = chain.matrix()
    a = scipy.sparse.identity(n, format="csr") - lam * p.T
    rhs = np.zeros(n)
    rhs[origin_index] = 1.0
    u = scipy.sparse.linalg.spsolve(a.tocsc(), rhs)
    residual = np.abs(a @ u - rhs).max()
    if not np.isfinite(u[origin_index]) or residual > 1e-8:
        raise SolverFailure(f"sparse solve residual {residual:.3e}")
    return float(u[origin_index])


def _green_iterate(chain: TruncatedChain, lam: float, origin_index: int,
                   tol: float = SOLVE_TOL, max_iter: int = 2_000_000) -> float:
    p = chain.matrix().T.tocsr()
    n = len(chain.states)
    rhs = np.zeros(n)
    rhs[origin_index] = 1.0
    u = rhs.copy()
    for _ in range(max_iter):
        nxt = rhs + lam * (p @ u)
        if np.abs(nxt - u).max() < tol:
            return float(nxt[origin_index])
        u = nxt
    residual = np.abs(u - (rhs + lam * (p @ u))).max()
    raise SolverFailure(f"damped iteration not converged, residual {residual:.3e}")


def truncated_green(mu: StepDistribution, center: Dyadic, radius: int, lam: float,
                    *, method: str = "solve") -> float:
    """(sum over k of lam^k P^k)(center, center) for the chain killed
    outside the radius-ball; nondecreasing in both radius and lam."""
    if not 0 <= lam <= 1:
        raise ValueError("lambda must lie in [0, 1]")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if lam == 0:
        return 1.0
    chain = truncated_chain(mu, center, radius)
    o = chain.index[center]
    if method == "solve":
        return _green_solve(chain, lam, o)
    if method == "iterate":
        return _green_iterate(chain, lam, o)
    raise ValueError(f"unknown method {method!r}")


@dataclass(frozen=True)
class ComparisonReport:
    radius: int
    lam: float
    epsilon: Fraction
    green_base: float
    green_prime: float
    bound: float  # green_base / epsilon
    passed: bool


def comparison_check(mu_base: StepDistribution, mu_dominating: StepDistribution,
                     epsilon, center: Dyadic, radius: int, lam: float) -> ComparisonReport:
    """Exact pointwise check p' >= eps * p on the ball, then both Green
    values on the same truncation and the conclusion G' <= G / eps."""
    epsilon = Fraction(epsilon)
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    base = truncated_chain(mu_base, center, radius)
    prime = truncated_chain(mu_dominating, center, radius)
    violations = []
    for (i, j), w in base.entries.items():
        w_prime = prime.entries.get((i, j), Fraction(0))
        if w_prime < epsilon * w:
            violations.append((base.states[i], base.states[j], w, w_prime))
    if violations:
        raise DominationFailed(sorted(violations, key=lambda v: (v[0], v[1])))
    o = base.index[center]
    g = _green_solve(base, lam, o)
    g_prime = _green_solve(prime, lam, o)
    bound = g / float(epsilon)
    # solver-tolerance slack only; the inequality itself is the content
    passed = g_prime <= bound * (1 + 1e-9) + 1e-9
    return ComparisonReport(radius, lam, epsilon, g, g_prime, bound, passed)


@dataclass(frozen=True)
class ReturnEstimate:
    frequency: float
    low: float
    high: float
    returns: int
    n_walks: int


def _wilson(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    phat = k / n
    denom = 1 + z * z / n
    mid = (phat + z * z / (2 * n)) / denom
    half = z * np.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return max(0.0, mid - half), min(1.0, mid + half)


def return_probability(mu: StepDistribution, start: Dyadic, horizon: int,
                       n_walks: int, seed: int) -> ReturnEstimate:
    """Fraction of walks revisiting their start within the horizon, with a
    95% Wilson interval."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    steps = [_compile_generic(g) for g in mu.support]
    s_num, s_exp = start.num, start.exp
    returns = 0
    for w in range(n_walks):
        rng = stream(seed, w)
        codes = sample_increment_codes(mu, rng, horizon).tolist()
        n, k = s_num, s_exp
        for c in codes:
            n, k = steps[c](n, k)
            if n == s_num and k == s_exp:
                returns += 1
                break
    low, high = _wilson(returns, n_walks)
    return ReturnEstimate(returns / n_walks, low, high, returns, n_walks)
