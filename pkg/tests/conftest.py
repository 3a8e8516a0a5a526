import random
import sys

import pytest
from hypothesis import strategies as st

from llstruct.model import DomainSpec, Feature, PairFeature, StructureModel, random_model


def feat(**kw):
    """``feat(X0=1, X2=0)`` -> Feature <X0=1,X2=0>."""
    return Feature(tuple((int(k[1:]), v) for k, v in kw.items()))


def pfeat(pair, **kw):
    return PairFeature(pair, tuple((int(k[1:]), v) for k, v in kw.items()))


@st.composite
def domains(draw, max_n=6, max_card=3):
    n = draw(st.integers(2, max_n))
    return DomainSpec(tuple(draw(st.integers(2, max_card)) for _ in range(n)))


@st.composite
def features_in(draw, domain, min_size=0):
    scope = draw(st.lists(st.integers(0, domain.n - 1), unique=True, min_size=min_size))
    return Feature(tuple((k, draw(st.integers(0, domain.card(k) - 1))) for k in scope))


@st.composite
def pair_in(draw, domain):
    i, j = draw(st.lists(st.integers(0, domain.n - 1), unique=True, min_size=2, max_size=2))
    return (i, j)


@st.composite
def models_in(draw, domain, max_features=6):
    feats = draw(st.lists(features_in(domain), max_size=max_features))
    return StructureModel(domain, tuple(feats))


def random_instances(count, seed, n_choices=(3, 4, 5, 6), cards=(2, 3), max_features=8):
    """Seeded random model pairs over small domains."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        n = rng.choice(n_choices)
        dom = DomainSpec(tuple(rng.choice(cards) for _ in range(n)))
        a = random_model(dom, rng.randint(0, max_features), rng.randint(1, n), rng)
        b = random_model(dom, rng.randint(0, max_features), rng.randint(1, n), rng)
        out.append((a, b))
    return out


@pytest.fixture
def ternary6():
    return DomainSpec((3,) * 6)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, label, ok, elapsed, detail in sorted(mod.RESULTS):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {label}  ({elapsed:.2f}s)"
        terminalreporter.write_line(line + (f"  {detail}" if detail else ""))
