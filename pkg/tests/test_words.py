from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from plwalk.plmaps import compose, generator, identity
from plwalk.words import (
    DriftParameters,
    EndComponent,
    PRESETS,
    RELATORS,
    StepDistribution,
    delta,
    evaluate_word,
    parse_word,
    predict_end_component,
    preset,
    relator_check,
    uniform_k,
)

words_st = st.text(alphabet="AaBb", min_size=0, max_size=20)


def test_parse_compact_and_spaced():
    assert parse_word("AbA") == ("A", "b", "A")
    assert parse_word("A B^-1 A") == ("A", "b", "A")
    with pytest.raises(ValueError):
        parse_word("AxB")


def test_relators():
    assert relator_check()
    for x, y in RELATORS:
        gx, gy = evaluate_word(x), evaluate_word(y)
        comm = compose(compose(gx, gy), compose(gx.invert(), gy.invert()))
        assert comm.is_identity()


def test_misordered_relators_fail():
    # reading the commutator words with the opposite letter order does not
    # give the identity: the letter order is part of the convention
    gx, gy = evaluate_word("Ab"), evaluate_word("aBA")
    comm = compose(compose(gx, gy), compose(gx.invert(), gy.invert()))
    assert not comm.is_identity()


@settings(max_examples=100, deadline=None)
@given(words_st)
def test_free_reduction_collapses(word):
    inverse = "".join(s.swapcase() for s in reversed(word))
    assert evaluate_word(word + inverse).is_identity()


def test_uniform_k():
    mu = uniform_k()
    assert len(mu) == 4
    assert all(w == Fraction(1, 4) for _, w in mu)
    assert mu.weight(generator("B")) == Fraction(1, 4)
    assert mu.weight(identity()) == 0


def test_weights_validation():
    with pytest.raises(ValueError):
        StepDistribution([(identity(), Fraction(1, 2))])
    with pytest.raises(ValueError):
        StepDistribution([(identity(), Fraction(3, 2)), (generator("A"), Fraction(-1, 2))])


def test_merging_coincident_support():
    mu = StepDistribution(
        [(generator("A"), Fraction(1, 2)), (evaluate_word("Aaa"), Fraction(1, 2))]
    )
    # Aaa reduces to a; support stays distinct from A
    assert len(mu) == 2
    mu2 = StepDistribution(
        [(generator("A"), Fraction(1, 2)), (evaluate_word("AaA"), Fraction(1, 2))]
    )
    assert len(mu2) == 1 and mu2.weight(generator("A")) == 1


def test_convolution_square():
    mu = uniform_k()
    sq = mu.convolve(mu)
    assert len(sq) == 13
    assert sq.weight(identity()) == Fraction(1, 4)
    assert sum(w for _, w in sq) == 1


def test_cesaro_two():
    mu = uniform_k()
    ces = mu.cesaro(2)
    assert ces.weight(identity()) == Fraction(1, 8)
    # every one-step transition retains at least half its weight
    assert min(ces.weight(g) / w for g, w in mu) == Fraction(1, 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 4))
def test_cesaro_total_mass(n):
    ces = uniform_k().cesaro(n)
    assert sum(w for _, w in ces) == 1


def test_barycenters_exact():
    expected = {
        "uniform-K": (Fraction(0), Fraction(0)),
        "drift-neg": (Fraction(3, 5), Fraction(0)),
        "drift-pos": (Fraction(-3, 5), Fraction(0)),
        "drift-split": (Fraction(3, 10), Fraction(-2, 5)),
    }
    for name, (alpha, beta) in expected.items():
        d = preset(name).barycenters()
        assert (d.alpha, d.beta) == (alpha, beta), name


def test_predicted_components():
    cases = {
        "uniform-K": EndComponent.SKELETON,
        "drift-neg": EndComponent.NEG_ONLY,
        "drift-pos": EndComponent.POS_ONLY,
        "drift-split": EndComponent.NEG_AND_POS,
    }
    for name, comp in cases.items():
        assert predict_end_component(preset(name).barycenters()) is comp, name


def test_prediction_boundaries_are_exact():
    # alpha + beta = 0 must land on the closed side of each case split
    assert predict_end_component(DriftParameters(Fraction(1), Fraction(-1))) is EndComponent.NEG_ONLY
    assert predict_end_component(DriftParameters(Fraction(0), Fraction(0))) is EndComponent.SKELETON
    assert predict_end_component(DriftParameters(Fraction(0), Fraction(-1, 10**12))) \
        is EndComponent.POS_ONLY


def test_dump_load_round_trip():
    for name in PRESETS:
        mu = preset(name)
        assert StepDistribution.load(mu.dump()) == mu
    assert StepDistribution.load(delta(evaluate_word("AbAB")).dump()) == delta(
        evaluate_word("AbAB")
    )


def test_cumulative_table():
    c = uniform_k().cumulative()
    assert c[-1] == 1.0
    assert all(x <= y for x, y in zip(c, c[1:]))
