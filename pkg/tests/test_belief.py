import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cascade_dtw.belief import (ConflictError, Frame, MassFunction, combine_conjunctive,
                                combine_dempster, combine_disjunctive, pignistic, simple_bba)

F2 = Frame(("s1", "s2"))
F3 = Frame(("a", "b", "c"))


def random_mass(rng, frame, n_focal=None, allow_empty=False):
    lo = 0 if allow_empty else 1
    masks = list(range(lo, frame.omega + 1))
    chosen = rng.sample(masks, n_focal or rng.randint(1, min(4, len(masks))))
    w = [rng.random() + 1e-3 for _ in chosen]
    s = sum(w)
    return MassFunction(frame, {k: x / s for k, x in zip(chosen, w)})


def as_sets(m):
    return {frozenset(m.frame.subset(k)): v for k, v in m.focal().items()}


def assert_same(m, ref, tol=1e-9):
    keys = set(as_sets(m)) | set(ref)
    for k in keys:
        assert as_sets(m).get(k, 0.0) == pytest.approx(ref.get(k, 0.0), abs=tol), k


def test_frame_rules():
    with pytest.raises(ValueError):
        Frame(("a",))
    with pytest.raises(ValueError):
        Frame(("a", "a"))
    assert F3.subset(F3.mask(["c", "a"])) == ("a", "c")


def test_mass_validation():
    with pytest.raises(ValueError):
        MassFunction(F2, {1: 0.5})
    with pytest.raises(ValueError):
        MassFunction(F2, {1: 1.2, 3: -0.2})
    # sub-tolerance drift is renormalized
    m = MassFunction(F2, {1: 0.5, 3: 0.5 + 5e-10})
    assert sum(m.focal().values()) == pytest.approx(1.0, abs=1e-15)


def test_simple_bba():
    m = simple_bba(F3, "a", 0.95)
    assert m.mass(["a"]) == 0.95
    assert m.mass(["a", "b", "c"]) == pytest.approx(0.05)
    assert m.mass(["b"]) == 0
    assert simple_bba(F3, "a", 0.95).focal() == m.focal()


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1, 1.5])
def test_simple_bba_open_interval(alpha):
    with pytest.raises(ValueError):
        simple_bba(F3, "a", alpha)


def test_simple_bba_unknown_label():
    with pytest.raises(ValueError):
        simple_bba(F3, "z", 0.5)


def test_conjunctive_examples():
    m = random_mass(random.Random(1), F3)
    assert_same(combine_conjunctive(MassFunction.vacuous(F3), m), as_sets(m))
    both = combine_conjunctive(simple_bba(F2, "s1", 0.5), simple_bba(F2, "s1", 0.5))
    assert both.mass(["s1"]) == pytest.approx(0.75)
    assert both.mass(["s1", "s2"]) == pytest.approx(0.25)
    assert both.conflict == 0
    total = combine_conjunctive(MassFunction.from_sets(F2, {("s1",): 1}), MassFunction.from_sets(F2, {("s2",): 1}))
    assert total.conflict == 1


def test_dempster_examples():
    m = random_mass(random.Random(2), F3)
    assert_same(combine_dempster(MassFunction.vacuous(F3), m), as_sets(m))
    out = combine_dempster(simple_bba(F2, "s1", 0.8), simple_bba(F2, "s2", 0.5))
    assert out.mass(["s1"]) == pytest.approx(0.4 / 0.6, abs=1e-12)
    assert out.mass(["s2"]) == pytest.approx(0.1 / 0.6, abs=1e-12)
    assert out.mass(["s1", "s2"]) == pytest.approx(0.1 / 0.6, abs=1e-12)
    assert out.conflict == 0
    with pytest.raises(ConflictError):
        combine_dempster(MassFunction.from_sets(F2, {("s1",): 1}), MassFunction.from_sets(F2, {("s2",): 1}))


def test_disjunctive_examples():
    m = random_mass(random.Random(3), F3)
    assert_same(combine_disjunctive(MassFunction.vacuous(F3), m), {frozenset("abc"): 1.0})
    out = combine_disjunctive(simple_bba(F3, "a", 0.6), simple_bba(F3, "a", 0.7))
    assert out.mass(["a"]) == pytest.approx(0.42)
    assert out.mass(["a", "b", "c"]) == pytest.approx(0.58)
    two = combine_disjunctive(simple_bba(F2, "s1", 0.6), simple_bba(F2, "s2", 0.7))
    assert set(as_sets(two)) <= {frozenset({"s1", "s2"})}


def test_frame_mismatch():
    with pytest.raises(ValueError):
        combine_conjunctive(MassFunction.vacuous(F2), MassFunction.vacuous(F3))


def test_pignistic_examples():
    assert pignistic(MassFunction.vacuous(F3)) == pytest.approx({"a": 1 / 3, "b": 1 / 3, "c": 1 / 3})
    bet = pignistic(simple_bba(F2, "s1", 0.95))
    assert bet == pytest.approx({"s1": 0.975, "s2": 0.025})
    F = Frame(("s1", "s2", "s3"))
    m = MassFunction.from_sets(F, {("s1",): 0.6, ("s1", "s2"): 0.4})
    assert pignistic(m) == pytest.approx({"s1": 0.8, "s2": 0.2, "s3": 0.0})
    with pytest.raises(ConflictError):
        pignistic(MassFunction(F2, {0: 1.0}))


def test_pignistic_handles_conflict_mass():
    m = combine_conjunctive(simple_bba(F2, "s1", 0.8), simple_bba(F2, "s2", 0.5))
    assert m.conflict == pytest.approx(0.4)
    assert pignistic(m) == pytest.approx(pignistic(combine_dempster(simple_bba(F2, "s1", 0.8),
                                                                    simple_bba(F2, "s2", 0.5))))


def test_bayesian_mass_is_its_own_pignistic():
    m = MassFunction.from_sets(F3, {("a",): 0.2, ("b",): 0.5, ("c",): 0.3})
    assert pignistic(m) == pytest.approx({"a": 0.2, "b": 0.5, "c": 0.3})


frames = st.integers(2, 4).map(lambda n: Frame(tuple("pqrs"[:n])))


@settings(max_examples=100, deadline=None)
@given(frames, st.integers(0, 2**32))
def test_rules_commutative_associative(frame, seed):
    rng = random.Random(seed)
    a, b, c = (random_mass(rng, frame, allow_empty=True) for _ in range(3))
    for rule in (combine_conjunctive, combine_disjunctive):
        assert_same(rule(a, b), as_sets(rule(b, a)))
        assert_same(rule(rule(a, b), c), as_sets(rule(a, rule(b, c))))
        assert sum(rule(a, b).focal().values()) == pytest.approx(1.0, abs=1e-9)


@settings(max_examples=100, deadline=None)
@given(frames, st.integers(0, 2**32))
def test_dempster_is_normalized_conjunctive(frame, seed):
    rng = random.Random(seed)
    a, b = random_mass(rng, frame), random_mass(rng, frame)
    conj = combine_conjunctive(a, b)
    if conj.conflict > 1 - 1e-9:
        with pytest.raises(ConflictError):
            combine_dempster(a, b)
        return
    expected = {k: v / (1 - conj.conflict) for k, v in as_sets(conj).items() if k}
    assert_same(combine_dempster(a, b), expected)
    assert sum(pignistic(conj).values()) == pytest.approx(1.0, abs=1e-9)


def test_vacuous_neutral_for_conjunctive_and_dempster():
    rng = random.Random(9)
    for _ in range(20):
        m = random_mass(rng, F3)
        v = MassFunction.vacuous(F3)
        assert_same(combine_conjunctive(m, v), as_sets(m))
        assert_same(combine_dempster(v, m), as_sets(m))


def test_records():
    recs = simple_bba(F2, "s1", 0.95).to_records()
    assert recs[0] == {"focal": ["s1"], "mass": 0.95}
    assert recs[1]["focal"] == ["s1", "s2"]


def test_against_product_oracle_small():
    rng = random.Random(5)
    for n in (2, 3):
        frame = Frame(tuple("xyz"[:n]))
        for _ in range(10):
            a, b = random_mass(rng, frame), random_mass(rng, frame)
            sa, sb = as_sets(a), as_sets(b)
            assert_same(combine_conjunctive(a, b), oracles.conjunctive(sa, sb))
            assert_same(combine_disjunctive(a, b), oracles.disjunctive(sa, sb))
            if oracles.conjunctive(sa, sb).get(frozenset(), 0) < 1 - 1e-9:
                assert_same(combine_dempster(a, b), oracles.dempster(sa, sb))
            for s, p in pignistic(a).items():
                assert p == pytest.approx(oracles.betp(sa, frame.labels)[s], abs=1e-12)


def test_all_subsets_of_frame_roundtrip():
    for r in range(0, 4):
        for sub in itertools.combinations(F3.labels, r):
            assert F3.subset(F3.mask(sub)) == sub
