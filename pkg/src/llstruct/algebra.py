"""Single-feature operations over the FC contexts of a pair.

Everything here works on assignments only; no FC context is ever enumerated.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Tuple

from .model import (
    DomainSpec,
    Feature,
    PairFeature,
    check_pair,
    compatible_outside_pair,
    scope_contains_pair,
    strip_pair,
)


class IncompatibleFeatures(ValueError):
    """Two assignments disagree on a shared variable."""

    def __init__(self, var: int, a: int, b: int):
        super().__init__(f"incompatible assignments for X{var}: {a} vs {b}")
        self.var = var


class DiffKind(enum.Enum):
    EMPTY = "empty"
    WHOLE = "whole"
    DIFFERENCE = "difference"


@dataclass(frozen=True)
class DiffResult:
    """Outcome of ``X(f) minus X(g)``.

    ``features`` is only populated for ``DiffKind.DIFFERENCE``; its members
    have pairwise disjoint FC sets.
    """

    kind: DiffKind
    features: Tuple[PairFeature, ...] = ()

    @classmethod
    def empty(cls):
        return cls(DiffKind.EMPTY)

    @classmethod
    def whole(cls):
        return cls(DiffKind.WHOLE)


def _merge(assignments: Iterable[Tuple[Tuple[int, int], ...]]) -> Tuple[Tuple[int, int], ...]:
    merged = {}
    for items in assignments:
        for k, v in items:
            w = merged.setdefault(k, v)
            if w != v:
                raise IncompatibleFeatures(k, w, v)
    return tuple(sorted(merged.items()))


def union_features(f: Feature, g: Feature) -> Feature:
    return Feature(_merge((f.items, g.items)))


def union_over_pair(hs: Sequence[PairFeature], pair: Sequence[int]) -> PairFeature:
    """Merge pair-relative features; the pair variables stay unassigned."""
    pair = check_pair(pair)
    if not hs:
        raise ValueError("union over a pair needs at least one feature")
    for h in hs:
        if tuple(h.pair) != pair:
            raise ValueError(f"feature {h} belongs to pair {h.pair}, not {pair}")
    return PairFeature(pair, _merge(h.items for h in hs))


def fc_cardinality(p: PairFeature, domain: DomainSpec) -> int:
    i, j = p.pair
    assigned = p.scope
    total = 1
    for k, c in enumerate(domain.cardinalities):
        if k != i and k != j and k not in assigned:
            total *= c
    return total


def is_sub_assignment(a, b) -> bool:
    """Every ``(var, val)`` of ``a`` also appears in ``b``."""
    bd = dict(b.items)
    return all(bd.get(k) == v for k, v in a.items)


def intersect_pair(p: PairFeature, q: PairFeature) -> Optional[PairFeature]:
    """Pair-relative intersection; ``None`` when the FC sets are disjoint."""
    if not compatible_outside_pair(p, q, p.pair):
        return None
    return union_over_pair((p, q), p.pair)


def intersect_fc(f: Feature, g: Feature, pair: Sequence[int], domain: DomainSpec) -> Optional[PairFeature]:
    pair = check_pair(pair)
    if not (scope_contains_pair(f, pair) and scope_contains_pair(g, pair)):
        return None
    return intersect_pair(strip_pair(f, pair), strip_pair(g, pair))


def difference_set(fp: PairFeature, gp: PairFeature, domain: DomainSpec) -> Tuple[PairFeature, ...]:
    """Disjoint features covering ``X(f) minus X(g)`` in the non-trivial case.

    For each variable ``X_k`` assigned by ``g`` but not ``f`` (ascending), one
    feature per value ``v != X_k(g)``: ``f``'s assignments, plus ``g``'s values
    on the earlier g-only variables, plus ``X_k = v``.
    """
    fd = dict(fp.items)
    g_only = [(k, v) for k, v in gp.items if k not in fd]
    out = []
    for idx, (k, gk) in enumerate(g_only):
        prefix = fp.items + tuple(g_only[:idx])
        for v in range(domain.card(k)):
            if v != gk:
                out.append(PairFeature(fp.pair, prefix + ((k, v),)))
    return tuple(out)


def diff_pair(fp: PairFeature, gp: PairFeature, domain: DomainSpec) -> DiffResult:
    """Difference on pair-relative operands (both features hold the pair)."""
    if is_sub_assignment(gp, fp):
        return DiffResult.empty()
    if not compatible_outside_pair(fp, gp, fp.pair):
        return DiffResult.whole()
    return DiffResult(DiffKind.DIFFERENCE, difference_set(fp, gp, domain))


def diff_fc(f: Feature, g: Feature, pair: Sequence[int], domain: DomainSpec) -> DiffResult:
    pair = check_pair(pair)
    c1f = scope_contains_pair(f, pair)
    c1g = scope_contains_pair(g, pair)
    fp, gp = strip_pair(f, pair), strip_pair(g, pair)
    if not c1f or (c1g and is_sub_assignment(gp, fp)):
        return DiffResult.empty()
    if not c1g or not compatible_outside_pair(f, g, pair):
        return DiffResult.whole()
    return DiffResult(DiffKind.DIFFERENCE, difference_set(fp, gp, domain))
