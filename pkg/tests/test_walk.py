from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plwalk.dyadic import Dyadic, ZERO
from plwalk.plmaps import OutOfDomain, generator
from plwalk.schreier import EndKind
from plwalk.walk import (
    WalkConfig,
    chi_projections,
    classify_trajectory_end,
    component_frequencies,
    configuration_trace,
    drift_estimate,
    end_field_sample,
    hitting_distribution_on_i,
    induced_chain_on_i,
    induced_law,
    lognorm_series,
    sample_increment_codes,
    sample_walk,
    simple_walk_law,
    stream,
)
from plwalk.words import StepDistribution, delta, evaluate_word, preset, uniform_k

grid_pts = st.builds(Dyadic, st.integers(-64, 64), st.integers(0, 6))


# -- engine vs direct application -------------------------------------------


@settings(max_examples=60, deadline=None)
@given(grid_pts, st.integers(0, 2**31), st.integers(0, 300))
def test_positions_match_map_application(start, seed, length):
    mu = uniform_k()
    tr = sample_walk(WalkConfig(mu=mu, length=length, seed=seed, tracked_starts=(start,),
                                record_positions=True))
    pos = start
    for i, c in enumerate(tr.codes):
        pos = mu.support[c](pos)
        assert tr.starts[0].positions[i + 1] == pos
    assert tr.starts[0].final == pos


@settings(max_examples=30, deadline=None)
@given(grid_pts, st.integers(0, 2**31))
def test_generic_support_matches_map_application(start, seed):
    # support containing a non-generator element exercises the fallback path
    mu = StepDistribution([
        (evaluate_word("BB"), Fraction(1, 3)),
        (evaluate_word("bAb"), Fraction(1, 3)),
        (generator("a"), Fraction(1, 3)),
    ])
    tr = sample_walk(WalkConfig(mu=mu, length=150, seed=seed, tracked_starts=(start,),
                                record_positions=True))
    pos = start
    for i, c in enumerate(tr.codes):
        pos = mu.support[c](pos)
        assert tr.starts[0].positions[i + 1] == pos


def test_lognorms_and_tail():
    tr = sample_walk(WalkConfig(mu=uniform_k(), length=500, seed=1, tail_window=100,
                                record_positions=True))
    st_ = tr.starts[0]
    assert len(st_.lognorms) == 501
    assert st_.tail == st_.positions[-100:]
    for p, ln in zip(st_.positions, st_.lognorms):
        expected = p.two_adic_log_norm()
        assert ln == expected or (np.isneginf(ln) and np.isneginf(expected))


def test_checkpoints_consistent_with_positions():
    tr = sample_walk(WalkConfig(mu=uniform_k(), length=300, seed=9, checkpoint_every=100,
                                tracked_starts=(Dyadic(1, 2),), retain_final_element=True))
    st_ = tr.starts[0]
    for (step, g), (step2, pos) in zip(tr.checkpoints, st_.checkpoint_positions):
        assert step == step2
        assert g(st_.start) == pos
    assert tr.final_element(st_.start) == st_.final


# -- sampling ----------------------------------------------------------------


def test_codes_deterministic_per_stream():
    mu = uniform_k()
    a = sample_increment_codes(mu, stream(5, 3), 1000)
    b = sample_increment_codes(mu, stream(5, 3), 1000)
    c = sample_increment_codes(mu, stream(5, 4), 1000)
    assert (a == b).all()
    assert (a != c).any()


def test_code_frequencies_roughly_uniform():
    codes = sample_increment_codes(uniform_k(), stream(0, 0), 40_000)
    counts = np.bincount(codes, minlength=4)
    assert counts.min() > 9_000


# -- exact laws --------------------------------------------------------------


def test_simple_walk_law_cases():
    q = Fraction(1, 4)
    # black region: B and b act trivially (two lazy self-loops)
    assert simple_walk_law(Dyadic(-2)) == {Dyadic(-3): q, Dyadic(-1): q, Dyadic(-2): 2 * q}
    # grey region: four distinct neighbors
    assert simple_walk_law(Dyadic(1, 1)) == {
        Dyadic(-1, 1): q, Dyadic(3, 1): q, Dyadic(1, 2): q, Dyadic(1): q}
    # white region far right: A and B coincide, a and b coincide
    assert simple_walk_law(Dyadic(5)) == {Dyadic(4): 2 * q, Dyadic(6): 2 * q}
    # white region (1,2): halving still active; a and b merge at gamma + 1
    assert simple_walk_law(Dyadic(3, 1)) == {
        Dyadic(1, 1): q, Dyadic(5, 1): 2 * q, Dyadic(3, 2): q}


def test_hitting_distribution():
    h = Fraction(1, 2)
    assert hitting_distribution_on_i(Dyadic(1)) == {ZERO: h, Dyadic(1, 1): h}
    assert hitting_distribution_on_i(Dyadic(3, 1)) == {Dyadic(1, 1): h, Dyadic(3, 2): h}
    with pytest.raises(OutOfDomain):
        hitting_distribution_on_i(Dyadic(2))


def test_induced_chain_tables():
    low = {0: Fraction(3, 8), 1: Fraction(3, 8), -1: Fraction(1, 4)}
    high = {0: Fraction(1, 2), 1: Fraction(3, 8), -1: Fraction(1, 8)}
    for gamma in (Dyadic(1, 2), Dyadic(3, 3), Dyadic(7, 4), Dyadic(1, 9)):
        assert induced_chain_on_i(gamma) == low, gamma
    for gamma in (Dyadic(3, 2), Dyadic(5, 3), Dyadic(13, 4), Dyadic(511, 9)):
        assert induced_chain_on_i(gamma) == high, gamma
    with pytest.raises(OutOfDomain):
        induced_chain_on_i(Dyadic(1, 1))
    with pytest.raises(OutOfDomain):
        induced_chain_on_i(Dyadic(3, 1))


def test_induced_law_merges_duplicates():
    law = induced_law(Dyadic(5))
    assert law == {Dyadic(4): Fraction(1, 2), Dyadic(6): Fraction(1, 2)}
    assert sum(law.values()) == 1


# -- series ------------------------------------------------------------------


def test_drift_estimate_linear_series():
    s = np.arange(100, dtype=float) * 0.5 + 3
    assert drift_estimate(s) == pytest.approx(0.5)
    s[10] = -np.inf  # zeros excluded from the fit
    assert drift_estimate(s) == pytest.approx(0.5, abs=1e-6)


def test_chi_projections_match_group_element():
    tr = sample_walk(WalkConfig(mu=uniform_k(), length=200, seed=12,
                                retain_final_element=True))
    ca, cab = chi_projections(tr)
    g = tr.final_element
    assert ca[-1] == g.chi_a()
    assert cab[-1] == g.chi_a() + g.chi_b()


# -- configurations ----------------------------------------------------------


def test_window_values_equal_group_configuration():
    wpts = tuple(Dyadic(n, 2) for n in range(-8, 9))
    tr = sample_walk(WalkConfig(mu=uniform_k(), length=600, seed=21, window=wpts,
                                checkpoint_every=200, retain_final_element=True))
    final_cfg = tr.final_element.configuration()
    for rep in tr.window:
        assert rep.final_value == final_cfg[rep.point]
    for step, g in tr.checkpoints:
        cfg = g.configuration()
        for rep in tr.window:
            assert dict(rep.checkpoint_values)[step] == cfg[rep.point]


def test_degenerate_measure_never_stabilizes():
    # deterministic B-walk: the jump at 0 keeps decreasing, one unit per step
    reports = configuration_trace(WalkConfig(mu=delta(generator("B")), length=50, seed=0,
                                             window=(ZERO,)))
    assert reports[0].final_value == -50
    assert reports[0].last_change == 50


def test_last_change_zero_when_untouched():
    reports = configuration_trace(WalkConfig(mu=delta(generator("A")), length=30, seed=0,
                                             window=(ZERO, Dyadic(1, 1))))
    for rep in reports:
        assert rep.final_value == 0
        assert rep.last_change == 0


# -- end classification ------------------------------------------------------


def test_deterministic_ray_ends():
    tr = sample_walk(WalkConfig(mu=delta(generator("A")), length=5, seed=0,
                                tracked_starts=(Dyadic(1, 2),), tail_window=4))
    e = classify_trajectory_end(tr, 4)
    assert e.kind is EndKind.NEG_RAY and e.attachment == Dyadic(1, 2)

    tr = sample_walk(WalkConfig(mu=delta(generator("a")), length=5, seed=0,
                                tracked_starts=(Dyadic(3, 1),), tail_window=4))
    e = classify_trajectory_end(tr, 4)
    assert e.kind is EndKind.POS_RAY and e.attachment == Dyadic(3, 1)


def test_skeleton_classification_under_uniform_measure():
    freq = component_frequencies(uniform_k(), 30_000, 25, 77)
    assert freq[EndKind.SKELETON] >= 0.6
    assert freq[EndKind.NEG_RAY] + freq[EndKind.POS_RAY] <= 0.1


def test_end_field_same_start_twice():
    fields = end_field_sample(delta(generator("A")), [Dyadic(1, 2), Dyadic(3, 3)], 10, 3, 4,
                              tail_window=5)
    for f in fields:
        assert f[Dyadic(1, 2)].kind is EndKind.NEG_RAY
        assert f[Dyadic(1, 2)].attachment == Dyadic(1, 2)
        assert f[Dyadic(3, 3)].attachment == Dyadic(3, 3)


def test_skeleton_prefix_is_odd_and_stable():
    fields = end_field_sample(uniform_k(), [ZERO], 30_000, 20, 99)
    for f in fields:
        e = f[ZERO]
        if e.kind is EndKind.SKELETON:
            assert e.prefix % 2 == 1
            assert e.bits_known >= 1


def test_thread_count_does_not_change_results():
    serial = end_field_sample(uniform_k(), [ZERO, Dyadic(1)], 3000, 12, 31, threads=1)
    parallel = end_field_sample(uniform_k(), [ZERO, Dyadic(1)], 3000, 12, 31, threads=5)
    assert serial == parallel


def test_short_tail_undecided():
    e = classify_trajectory_end([], 10)
    assert e.kind is EndKind.UNDECIDED


# -- config validation -------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        WalkConfig(mu=uniform_k(), length=-1, seed=0)
    with pytest.raises(ValueError):
        WalkConfig(mu=uniform_k(), length=5, seed=0, tracked_starts=())
    with pytest.raises(ValueError):
        configuration_trace(WalkConfig(mu=uniform_k(), length=5, seed=0))
