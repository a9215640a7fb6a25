"""Random-walk engines and estimators on the group and its Schreier graph.

The hot loop works on raw canonical (numerator, exponent) integer pairs
rather than Dyadic objects; the four standard generators are inlined and
arbitrary support elements fall back to compiled closures.  Randomness
comes from counter-based Philox streams keyed by seed xor walk index, so
parallel and serial runs are bit-identical.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .dyadic import NEG_INF, Dyadic, ZERO
from .plmaps import PLMap, compose, compose_all, identity
from .schreier import (
    EndAddress,
    EndKind,
    ResourceLimit,
    UNDECIDED,
    ray_membership,
)
from .words import StepDistribution, uniform_k

__all__ = [
    "WalkConfig",
    "WalkTrace",
    "StartTrace",
    "WindowReport",
    "stream",
    "sample_increment_codes",
    "sample_walk",
    "induced_law",
    "simple_walk_law",
    "hitting_distribution_on_i",
    "induced_chain_on_i",
    "lognorm_series",
    "drift_estimate",
    "configuration_trace",
    "classify_trajectory_end",
    "end_field_sample",
    "component_frequencies",
    "chi_projections",
    "DEFAULT_TAIL_WINDOW",
    "DEFAULT_SKELETON_GAIN",
]

DEFAULT_TAIL_WINDOW = 1000
DEFAULT_SKELETON_GAIN = 8


# -- randomness -------------------------------------------------------------


def stream(seed: int, index: int = 0) -> np.random.Generator:
    """Counter-based Philox stream; index selects an independent substream."""
    return np.random.Generator(np.random.Philox(key=seed ^ index))


def sample_increment_codes(mu: StepDistribution, rng: np.random.Generator, n: int) -> np.ndarray:
    """n iid support indices, via one cumulative-table lookup per draw."""
    cum = mu.cumulative()
    return np.searchsorted(cum, rng.random(n), side="right").astype(np.int64)


# -- raw-step compilation ---------------------------------------------------

_GEN_CODES = {"A": 0, "a": 1, "B": 2, "b": 3}


def _symbol_of(g: PLMap):
    from .plmaps import _GENERATORS  # standard generators are singletons

    for sym, gen in _GENERATORS.items():
        if g == gen:
            return _GEN_CODES[sym]
    return None


def _raw(d: Dyadic) -> tuple[int, int]:
    return d.num, d.exp


def _compile_generic(g: PLMap):
    """Closure applying an arbitrary PL map to raw (num, exp) pairs."""
    bps = [_raw(b) for b in g.breakpoints]
    imgs = [_raw(v) for v in g._images]
    slopes = g.slopes
    c_minus = g.c_minus
    m = len(bps)

    def step(n: int, k: int) -> tuple[int, int]:
        # rightmost breakpoint <= x by binary search on exact comparisons
        lo, hi = 0, m
        while lo < hi:
            mid = (lo + hi) // 2
            bn, bk = bps[mid]
            e = k if k >= bk else bk
            if (bn << (e - bk)) <= (n << (e - k)):
                lo = mid + 1
            else:
                hi = mid
        if lo == 0:
            if k <= 0:
                v = (n << -k) + c_minus
                if v == 0:
                    return 0, 0
                tz = (v & -v).bit_length() - 1
                return v >> tz, -tz
            return n + (c_minus << k), k
        bn, bk = bps[lo - 1]
        vn, vk = imgs[lo - 1]
        s = slopes[lo]
        # y = img + (x - bp) * 2**s
        e = k if k >= bk else bk
        dn = (n << (e - k)) - (bn << (e - bk))
        dk = e - s
        e2 = dk if dk >= vk else vk
        rn = (dn << (e2 - dk)) + (vn << (e2 - vk))
        if rn == 0:
            return 0, 0
        tz = (rn & -rn).bit_length() - 1
        return rn >> tz, e2 - tz

    return step


def _compile_support(mu: StepDistribution):
    """Per-support symbol codes (0..3 for the standard generators, -1 for
    generic) plus fallback closures and raw configurations."""
    syms, closures, configs = [], [], []
    for g in mu.support:
        code = _symbol_of(g)
        syms.append(-1 if code is None else code)
        closures.append(None if code is not None else _compile_generic(g))
        configs.append({_raw(p): v for p, v in g.configuration().items()})
    return syms, closures, configs


# -- configuration and traces -----------------------------------------------


@dataclass
class StartTrace:
    start: Dyadic
    final: Dyadic
    lognorms: np.ndarray | None  # per step incl. step 0; -inf encodes zero
    positions: list[Dyadic] | None
    tail: list[Dyadic]
    checkpoint_positions: list[tuple[int, Dyadic]] = field(default_factory=list)


@dataclass
class WindowReport:
    point: Dyadic
    final_value: int
    last_change: int  # 0 if the value never changed
    checkpoint_values: list = field(default_factory=list)  # (step, value)


@dataclass
class WalkConfig:
    mu: StepDistribution
    length: int
    seed: int
    walk_index: int = 0
    tracked_starts: tuple = (ZERO,)
    window: tuple = ()
    tail_window: int = DEFAULT_TAIL_WINDOW
    record_lognorms: bool = True
    record_positions: bool = False
    checkpoint_every: int = 0  # 0 disables group-element materialization
    retain_final_element: bool = False
    breakpoint_budget: int = 1_000_000

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be >= 0")
        if not self.tracked_starts:
            raise ValueError("need at least one tracked start")


@dataclass
class WalkTrace:
    config: WalkConfig
    codes: np.ndarray
    starts: list[StartTrace]
    window: list[WindowReport]
    checkpoints: list[tuple[int, PLMap]]
    final_element: PLMap | None


def _evolve_start(start: Dyadic, codes, syms, closures, *, record_lognorms, record_positions,
                  tail_window, checkpoint_steps):
    n, k = start.num, start.exp
    length = len(codes)
    lognorms = np.empty(length + 1) if record_lognorms else None
    if record_lognorms:
        lognorms[0] = k if n else NEG_INF
    positions = [start] if record_positions else None
    tail_from = max(0, length - tail_window)
    tail = [start] if length <= tail_window else []
    checkpoint_positions = []
    cp_set = set(checkpoint_steps)
    for i, c in enumerate(codes):
        sym = syms[c]
        if sym == 0:  # translate by -1
            if k <= 0:
                v = (n << -k) - 1
                if v:
                    tz = (v & -v).bit_length() - 1
                    n, k = v >> tz, -tz
                else:
                    n, k = 0, 0
            else:
                n -= 1 << k
        elif sym == 1:  # translate by +1
            if k <= 0:
                v = (n << -k) + 1
                if v:
                    tz = (v & -v).bit_length() - 1
                    n, k = v >> tz, -tz
                else:
                    n, k = 0, 0
            else:
                n += 1 << k
        elif sym == 2:  # B: halve on [0,2], shift above, fix below
            if n > 0:
                if (k >= 0 and n <= (2 << k)) or (k == -1 and n == 1):
                    k += 1
                else:
                    if k <= 0:
                        v = (n << -k) - 1
                        tz = (v & -v).bit_length() - 1
                        n, k = v >> tz, -tz
                    else:
                        n -= 1 << k
        elif sym == 3:  # B inverse: double on [0,1], shift above, fix below
            if n > 0:
                if k >= 0 and n <= (1 << k):
                    k -= 1
                else:
                    if k <= 0:
                        v = (n << -k) + 1
                        tz = (v & -v).bit_length() - 1
                        n, k = v >> tz, -tz
                    else:
                        n += 1 << k
        else:
            n, k = closures[c](n, k)
        step = i + 1
        if record_lognorms:
            lognorms[step] = k if n else NEG_INF
        if record_positions:
            positions.append(Dyadic._raw(n, k))
        if i >= tail_from:
            tail.append(Dyadic._raw(n, k))
        if step in cp_set:
            checkpoint_positions.append((step, Dyadic._raw(n, k)))
    if length > tail_window:
        tail = tail[-tail_window:]
    else:
        tail = tail[-(tail_window + 1):]
    final = Dyadic._raw(n, k)
    return StartTrace(start, final, lognorms, positions, tail, checkpoint_positions)


def _evolve_window_point(point: Dyadic, codes, syms, closures, configs, checkpoint_steps=()):
    """Track one slope-jump value under the incremental update rule: the
    increment's configuration is read at the current induced position, then
    the position moves."""
    n, k = point.num, point.exp
    value = 0
    last_change = 0
    cp_set = set(checkpoint_steps)
    snapshots = []
    for i, c in enumerate(codes):
        sym = syms[c]
        if sym == 2:
            if n == 0 and k == 0:
                value -= 1
                last_change = i + 1
            elif n == 1 and k == -1:
                value += 1
                last_change = i + 1
        elif sym == 3:
            if n == 0 and k == 0:
                value += 1
                last_change = i + 1
            elif n == 1 and k == 0:
                value -= 1
                last_change = i + 1
        elif sym < 0:
            delta = configs[c].get((n, k))
            if delta:
                value += delta
                last_change = i + 1
        if sym == 0:
            if k <= 0:
                v = (n << -k) - 1
                if v:
                    tz = (v & -v).bit_length() - 1
                    n, k = v >> tz, -tz
                else:
                    n, k = 0, 0
            else:
                n -= 1 << k
        elif sym == 1:
            if k <= 0:
                v = (n << -k) + 1
                if v:
                    tz = (v & -v).bit_length() - 1
                    n, k = v >> tz, -tz
                else:
                    n, k = 0, 0
            else:
                n += 1 << k
        elif sym == 2:
            if n > 0:
                if (k >= 0 and n <= (2 << k)) or (k == -1 and n == 1):
                    k += 1
                else:
                    if k <= 0:
                        v = (n << -k) - 1
                        tz = (v & -v).bit_length() - 1
                        n, k = v >> tz, -tz
                    else:
                        n -= 1 << k
        elif sym == 3:
            if n > 0:
                if k >= 0 and n <= (1 << k):
                    k -= 1
                else:
                    if k <= 0:
                        v = (n << -k) + 1
                        tz = (v & -v).bit_length() - 1
                        n, k = v >> tz, -tz
                    else:
                        n += 1 << k
        else:
            n, k = closures[c](n, k)
        if i + 1 in cp_set:
            snapshots.append((i + 1, value))
    return WindowReport(point, value, last_change, snapshots)


def sample_walk(cfg: WalkConfig) -> WalkTrace:
    """One walk, deterministic given (seed, walk_index)."""
    rng = stream(cfg.seed, cfg.walk_index)
    codes = sample_increment_codes(cfg.mu, rng, cfg.length)
    syms, closures, configs = _compile_support(cfg.mu)
    code_list = codes.tolist()

    checkpoint_steps = []
    if cfg.checkpoint_every:
        checkpoint_steps = list(range(cfg.checkpoint_every, cfg.length + 1, cfg.checkpoint_every))

    starts = [
        _evolve_start(
            s,
            code_list,
            syms,
            closures,
            record_lognorms=cfg.record_lognorms,
            record_positions=cfg.record_positions,
            tail_window=cfg.tail_window,
            checkpoint_steps=checkpoint_steps,
        )
        for s in cfg.tracked_starts
    ]
    window = [
        _evolve_window_point(p, code_list, syms, closures, configs, checkpoint_steps)
        for p in cfg.window
    ]

    checkpoints = []
    final_element = None
    if checkpoint_steps or cfg.retain_final_element:
        support = cfg.mu.support
        acc = identity()
        prev = 0
        marks = checkpoint_steps or []
        if cfg.retain_final_element and cfg.length not in marks:
            marks = marks + [cfg.length]
        for mark in marks:
            chunk = compose_all(support[c] for c in code_list[prev:mark])
            acc = compose(acc, chunk)
            if len(acc.breakpoints) > cfg.breakpoint_budget:
                raise ResourceLimit(
                    f"group element exceeds {cfg.breakpoint_budget} breakpoints at step {mark}"
                )
            prev = mark
            if mark in checkpoint_steps:
                checkpoints.append((mark, acc))
        final_element = acc if cfg.retain_final_element else None
    return WalkTrace(cfg, codes, starts, window, checkpoints, final_element)


# -- exact one-step and induced laws ----------------------------------------


def induced_law(gamma: Dyadic, mu: StepDistribution | None = None) -> dict[Dyadic, Fraction]:
    """Exact one-step law of the induced chain, coincident targets merged."""
    if mu is None:
        mu = uniform_k()
    law: dict[Dyadic, Fraction] = {}
    for g, w in mu:
        t = g(gamma)
        law[t] = law.get(t, Fraction(0)) + w
    return law


def simple_walk_law(gamma: Dyadic) -> dict[Dyadic, Fraction]:
    return induced_law(gamma, uniform_k())


def hitting_distribution_on_i(gamma: Dyadic) -> dict[Dyadic, Fraction]:
    """First-entry law into [0,1) of the simple walk started in [1,2)."""
    from .plmaps import OutOfDomain

    if not Dyadic(1) <= gamma < Dyadic(2):
        raise OutOfDomain(f"need gamma in [1,2), got {gamma}")
    half = Fraction(1, 2)
    return {gamma - 1: half, gamma.mul_pow2(-1): half}


def induced_chain_on_i(gamma: Dyadic) -> dict[int, Fraction]:
    """Exact law of the log-norm increment for one step of the chain induced
    on [0,1), for a non-half start in (0,1).

    Built from the one-step simple-walk law: targets in [1,2) are replaced
    by the two-point hitting law, a step onto the negative ray returns to
    its attachment (the start itself) with probability one.
    """
    from .plmaps import OutOfDomain

    if not ZERO < gamma < Dyadic(1) or gamma == Dyadic(1, 1):
        raise OutOfDomain(f"need gamma in (0,1) minus {{1/2}}, got {gamma}")
    one = Dyadic(1)
    landing: dict[Dyadic, Fraction] = {}

    def put(t, w):
        landing[t] = landing.get(t, Fraction(0)) + w

    for t, w in simple_walk_law(gamma).items():
        if t < ZERO:
            put(gamma, w)  # recurrent ray excursion re-enters at the start
        elif t < one:
            put(t, w)
        else:
            for u, h in hitting_distribution_on_i(t).items():
                put(u, w * h)
    x = gamma.two_adic_log_norm()
    out: dict[int, Fraction] = {}
    for t, w in landing.items():
        d = t.two_adic_log_norm() - x
        out[d] = out.get(d, Fraction(0)) + w
    return out


# -- series and estimators --------------------------------------------------


def lognorm_series(trace: WalkTrace, start_index: int = 0) -> np.ndarray:
    st = trace.starts[start_index]
    if st.lognorms is None:
        raise ValueError("walk was run without lognorm recording")
    return st.lognorms


def drift_estimate(series: np.ndarray, burn_in: int = 0) -> float:
    """Least-squares slope of the finite log-norm values after burn_in;
    zero positions (log-norm -inf) are excluded from the fit."""
    y = series[burn_in:]
    idx = np.arange(len(series))[burn_in:]
    mask = np.isfinite(y)
    if mask.sum() < 2:
        return float("nan")
    return float(np.polyfit(idx[mask], y[mask], 1)[0])


def chi_projections(trace: WalkTrace) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative chi_a and chi_a+chi_b along the walk (integer walks on Z)."""
    mu = trace.config.mu
    chi_a = np.array([g.chi_a() for g in mu.support])
    chi_ab = np.array([g.chi_a() + g.chi_b() for g in mu.support])
    return np.cumsum(chi_a[trace.codes]), np.cumsum(chi_ab[trace.codes])


def configuration_trace(cfg: WalkConfig) -> list[WindowReport]:
    if not cfg.window:
        raise ValueError("config has an empty window")
    return sample_walk(cfg).window


# -- end classification -----------------------------------------------------


def classify_trajectory_end(
    trace_or_tail,
    tail_window: int = DEFAULT_TAIL_WINDOW,
    *,
    skeleton_gain: int = DEFAULT_SKELETON_GAIN,
    start_index: int = 0,
    start_lognorm=None,
) -> EndAddress:
    """Heuristic finite-time end classification from the trajectory tail.

    The limit statement is asymptotic, so Undecided is an honest output.
    A skeleton verdict needs the 2-adic log-norm to have gained at least
    ``skeleton_gain`` since the walk started and the tail valuations to stay
    positive; the stabilized low numerator bits form the address prefix.
    """
    if isinstance(trace_or_tail, WalkTrace):
        st = trace_or_tail.starts[start_index]
        tail = st.tail
        start_lognorm = st.start.two_adic_log_norm()
    else:
        tail = list(trace_or_tail)
    if len(tail) > tail_window:
        tail = tail[-tail_window:]
    if not tail:
        return UNDECIDED
    final = tail[-1]

    # Skeleton convergence shows up in the 2-adic valuation, which stays
    # frozen during (arbitrarily long) ray excursions, so it is tested
    # before the sign-based ray criteria.
    exps = [p.exp if p.num else None for p in tail]
    if not any(e is None for e in exps):
        bits_known = min(exps)
        base = start_lognorm if start_lognorm is not None and np.isfinite(start_lognorm) else 0
        if bits_known >= 1 and final.exp - base >= skeleton_gain:
            modulus = 1 << bits_known
            prefix = final.num % modulus
            if all(p.num % modulus == prefix for p in tail):
                return EndAddress(EndKind.SKELETON, prefix=prefix, bits_known=bits_known)
            return UNDECIDED

    if all(p <= ZERO for p in tail):
        members = {ray_membership(p).attachment for p in tail}
        if len(members) == 1 and final == min(tail):
            return EndAddress(EndKind.NEG_RAY, attachment=members.pop())
        return UNDECIDED
    if all(p >= Dyadic(2) for p in tail):
        members = {ray_membership(p).attachment for p in tail}
        if len(members) == 1 and final == max(tail):
            return EndAddress(EndKind.POS_RAY, attachment=members.pop())
        return UNDECIDED
    return UNDECIDED


# -- many-walk drivers ------------------------------------------------------


def _one_end_field(mu, starts, length, seed, walk_index, tail_window, skeleton_gain):
    cfg = WalkConfig(
        mu=mu,
        length=length,
        seed=seed,
        walk_index=walk_index,
        tracked_starts=tuple(starts),
        tail_window=tail_window,
        record_lognorms=False,
    )
    trace = sample_walk(cfg)
    return {
        st.start: classify_trajectory_end(
            st.tail,
            tail_window,
            skeleton_gain=skeleton_gain,
            start_lognorm=st.start.two_adic_log_norm(),
        )
        for st in trace.starts
    }


def end_field_sample(
    mu: StepDistribution,
    starts,
    length: int,
    n_walks: int,
    seed: int,
    *,
    tail_window: int = DEFAULT_TAIL_WINDOW,
    skeleton_gain: int = DEFAULT_SKELETON_GAIN,
    threads: int = 1,
) -> list[dict]:
    """One end address per start for each of n_walks independent walks; all
    starts within a walk share the same increment sequence."""
    starts = tuple(starts)
    if not starts:
        raise ValueError("need at least one start")
    args = [(mu, starts, length, seed, w, tail_window, skeleton_gain) for w in range(n_walks)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda a: _one_end_field(*a), args))
    return [_one_end_field(*a) for a in args]


def component_frequencies(
    mu: StepDistribution,
    length: int,
    n_walks: int,
    seed: int,
    *,
    start: Dyadic = ZERO,
    tail_window: int = DEFAULT_TAIL_WINDOW,
    skeleton_gain: int = DEFAULT_SKELETON_GAIN,
    threads: int = 1,
) -> dict[EndKind, float]:
    """Empirical distribution of the trajectory-end classification."""
    fields = end_field_sample(
        mu,
        (start,),
        length,
        n_walks,
        seed,
        tail_window=tail_window,
        skeleton_gain=skeleton_gain,
        threads=threads,
    )
    counts = {kind: 0 for kind in EndKind}
    for f in fields:
        counts[f[start].kind] += 1
    return {kind: counts[kind] / n_walks for kind in EndKind}
