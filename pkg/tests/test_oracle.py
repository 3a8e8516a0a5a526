from itertools import product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from llstruct.model import DomainSpec, FCContext, StructureModel
from llstruct.oracle import (
    GuardExceeded,
    Triplet,
    brute_confusion_matrix,
    complete_triplet_census,
    enumerate_fc_contexts,
    feature_fc_set,
    is_dependent_fc,
    is_independent_general,
    reduced_dependency_model,
)

from conftest import domains, feat, features_in, models_in, pair_in


def model(domain, *feats):
    return StructureModel(domain, tuple(feats))


def ctx(pair, **kw):
    return FCContext(pair, tuple(sorted((int(k[1:]), v) for k, v in kw.items())))


class TestEnumeration:
    def test_four_binary(self):
        assert len(list(enumerate_fc_contexts((0, 1), DomainSpec((2,) * 4)))) == 4

    def test_six_binary(self):
        dom = DomainSpec((2,) * 6)
        assert all(len(list(enumerate_fc_contexts(p, dom))) == 16 for p in dom.pairs())

    def test_mixed(self):
        dom = DomainSpec((2, 2, 2, 2, 2, 3, 3))
        contexts = list(enumerate_fc_contexts((0, 1), dom))
        assert len(contexts) == 72 == 2**3 * 3**2
        assert len(set(contexts)) == 72

    def test_lexicographic(self):
        contexts = list(enumerate_fc_contexts((1, 3), DomainSpec((2, 2, 3, 2))))
        assert [c.values for c in contexts[:3]] == [
            ((0, 0), (2, 0)), ((0, 0), (2, 1)), ((0, 0), (2, 2))
        ]


class TestDependence:
    F = model(DomainSpec((2,) * 5), feat(X0=0, X1=0, X4=0))

    def test_match(self):
        assert is_dependent_fc(self.F, (0, 1), ctx((0, 1), X2=0, X3=1, X4=0))

    def test_mismatch(self):
        assert not is_dependent_fc(self.F, (0, 1), ctx((0, 1), X2=0, X3=1, X4=1))

    def test_pair_not_held(self):
        F = model(DomainSpec((2,) * 4), feat(X0=0, X2=1), feat(X1=1))
        assert not reduced_dependency_model(F, (0, 1))


def test_union_of_fc_sets_example():
    # variables X1..X4 of the worked example are indices 0..3 here
    dom = DomainSpec((2,) * 4)
    F = model(dom, feat(X0=0, X2=0, X3=1), feat(X1=1, X2=0, X3=0), feat(X0=0, X1=0))
    deps = reduced_dependency_model(F, (2, 3))
    assert {c.values for c in deps} == {((0, 0), (1, 0)), ((0, 0), (1, 1)), ((0, 1), (1, 1))}


def test_partition_example_contexts():
    # enumeration over X2, X3, X4; the worked example's listing omits X2
    dom = DomainSpec((2,) * 5)
    H = model(dom, feat(X0=0, X1=0, X4=0), feat(X0=0, X1=0, X3=0))
    assert len(reduced_dependency_model(H, (0, 1))) == 6
    assert not reduced_dependency_model(model(dom), (0, 1))


class TestGeneralQueries:
    # three binary variables, saturated except X1 indep X2 given X0=1
    dom = DomainSpec((2, 2, 2))
    M = model(
        dom,
        *[feat(X0=0, X1=a, X2=b) for a, b in product((0, 1), repeat=2)],
        *[feat(X0=1, X1=a) for a in (0, 1)],
        *[feat(X0=1, X2=b) for b in (0, 1)],
    )

    def test_fc_dependencies(self):
        deps = {(p, c.values) for p in self.dom.pairs() for c in reduced_dependency_model(self.M, p)}
        assert deps == {
            ((1, 2), ((0, 0),)),
            ((0, 2), ((1, 0),)),
            ((0, 2), ((1, 1),)),
            ((0, 1), ((2, 0),)),
            ((0, 1), ((2, 1),)),
        }

    def test_context_specific_independence(self):
        assert is_independent_general(self.M, Triplet((1, 2), ((0, 1),)))
        assert not is_independent_general(self.M, Triplet((1, 2), ((0, 0),)))
        for pair, x in [((0, 2), 0), ((0, 2), 1)]:
            assert not is_independent_general(self.M, Triplet(pair, ((1, x),)))

    def test_conditional_and_marginal(self):
        assert not is_independent_general(self.M, Triplet((1, 2), free=(0,)))
        assert not is_independent_general(self.M, Triplet((1, 2)))
        assert not is_independent_general(self.M, Triplet((0, 1)))

    def test_empty_model(self):
        E = model(self.dom)
        for pair in self.dom.pairs():
            rest = [k for k in range(3) if k not in pair]
            assert is_independent_general(E, Triplet(pair))
            assert is_independent_general(E, Triplet(pair, free=tuple(rest)))
            assert is_independent_general(E, Triplet(pair, ((rest[0], 1),)))

    def test_saturated_full_scope(self):
        S = model(self.dom, *[feat(X0=a, X1=b, X2=c) for a, b, c in product((0, 1), repeat=3)])
        for pair in self.dom.pairs():
            (k,) = [k for k in range(3) if k not in pair]
            for v in (0, 1):
                assert not is_independent_general(S, Triplet(pair, ((k, v),)))

    def test_triplet_validation(self):
        with pytest.raises(ValueError):
            Triplet((0, 1), ((0, 1),))
        with pytest.raises(ValueError):
            Triplet((0, 1), ((2, 0),), free=(2,))


@settings(max_examples=150, deadline=None)
@given(st.data())
def test_union_and_query_equivalence(data):
    dom = data.draw(domains(max_n=5))
    F = data.draw(models_in(dom))
    pair = data.draw(pair_in(dom))
    deps = {c.values for c in reduced_dependency_model(F, pair)}
    union = set()
    for f in F.features:
        union |= feature_fc_set(f, pair, dom)
    assert deps == union
    for c in enumerate_fc_contexts(pair, dom):
        assert is_dependent_fc(F, pair, c) == (
            not is_independent_general(F, Triplet(pair, c.values))
        )


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_monotone_in_features(data):
    dom = data.draw(domains(max_n=5))
    F = data.draw(models_in(dom))
    extra = data.draw(features_in(dom))
    bigger = StructureModel(dom, F.features + (extra,))
    for pair in dom.pairs():
        assert reduced_dependency_model(F, pair) <= reduced_dependency_model(bigger, pair)


class TestCensus:
    def test_four_binary(self):
        rows = complete_triplet_census(DomainSpec((2,) * 4))
        assert list(rows.values()) == [6, 12, 6, 24, 24, 24]
        assert list(rows) == [(0, 0), (0, 1), (0, 2), (1, 0), (2, 0), (1, 1)]
        assert sum(rows.values()) == 96

    def test_three_binary(self):
        # each of 3 pairs: one marginal, one conditional, two contextualized
        rows = complete_triplet_census(DomainSpec((2,) * 3))
        assert rows == {(0, 0): 3, (0, 1): 3, (1, 0): 6}

    def test_two_variables(self):
        assert complete_triplet_census(DomainSpec((2, 2))) == {(0, 0): 1}

    def test_closed_form(self):
        # per pair and variable: unused, free, or one of its values
        for cards in [(2,) * 5, (2, 3, 2, 3)]:
            dom = DomainSpec(cards)
            expected = 0
            for i, j in dom.pairs():
                term = 1
                for k, c in enumerate(cards):
                    if k not in (i, j):
                        term *= 2 + c
                expected += term
            assert sum(complete_triplet_census(dom).values()) == expected

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            complete_triplet_census(DomainSpec((2,) * 8), max_total=1000)


def test_brute_matrix_basics():
    dom = DomainSpec((2,) * 6)
    F = model(dom, feat(X0=1, X1=1, X2=0), feat(X3=0, X4=1))
    cm = brute_confusion_matrix(F, F)
    assert cm.total == 240
    assert cm.fp == cm.fn == 0
    with pytest.raises(GuardExceeded):
        brute_confusion_matrix(F, F, max_memberships=100)
