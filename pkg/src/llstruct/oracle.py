"""Brute-force ground truth by enumerating contexts.

Exponential by design; every entry point is size-guarded. Used to validate
the efficient comparator and to answer general independence queries.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from itertools import product
from typing import Dict, Iterator, Set, Tuple

from .comparator import ConfusionMatrix
from .model import DomainSpec, FCContext, Feature, StructureModel, check_pair

DEFAULT_MAX_MEMBERSHIPS = 10**7
DEFAULT_MAX_CENSUS = 10**7


class GuardExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Triplet:
    """Query ``<X_i, X_j | x_U, X_W>``: ``context`` assigns U, ``free`` lists W."""

    pair: Tuple[int, int]
    context: Tuple[Tuple[int, int], ...] = ()
    free: Tuple[int, ...] = ()

    def __post_init__(self):
        pair = check_pair(self.pair)
        context = tuple(sorted(self.context))
        free = tuple(sorted(self.free))
        used = [k for k, _ in context] + list(free)
        if len(set(used)) != len(used):
            raise ValueError("context and free variables must be disjoint and distinct")
        if set(used) & set(pair):
            raise ValueError("pair variables cannot condition their own query")
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "context", context)
        object.__setattr__(self, "free", free)

    def validate(self, domain: DomainSpec) -> None:
        domain.validate(self.context, where="triplet context")
        for k in self.free + self.pair:
            if not 0 <= k < domain.n:
                raise ValueError(f"variable index {k} out of range")


def _rest(pair, n):
    i, j = pair
    return [k for k in range(n) if k != i and k != j]


def enumerate_fc_contexts(pair, domain: DomainSpec) -> Iterator[FCContext]:
    """All complete assignments outside ``pair``, lexicographic by index then value."""
    pair = check_pair(pair)
    rest = _rest(pair, domain.n)
    for values in product(*(range(domain.card(k)) for k in rest)):
        yield FCContext(pair, tuple(zip(rest, values)))


def completions(f, pair, domain: DomainSpec) -> Set[Tuple[Tuple[int, int], ...]]:
    """FC contexts of ``pair`` extending the non-pair assignments of ``f``."""
    pair = check_pair(pair)
    fixed = {k: v for k, v in f.items if k not in pair}
    rest = _rest(pair, domain.n)
    axes = [(fixed[k],) if k in fixed else range(domain.card(k)) for k in rest]
    return {tuple(zip(rest, vals)) for vals in product(*axes)}


def feature_fc_set(f: Feature, pair, domain: DomainSpec) -> Set[Tuple[Tuple[int, int], ...]]:
    """Enumerated ``X^ij(f)``: empty unless both pair variables are in scope."""
    pair = check_pair(pair)
    if not (pair[0] in f.scope and pair[1] in f.scope):
        return set()
    return completions(f, pair, domain)


def _agrees(f: Feature, ctx: Dict[int, int]) -> bool:
    return all(ctx.get(k, v) == v for k, v in f.items)


def is_dependent_fc(F: StructureModel, pair, ctx: FCContext) -> bool:
    i, j = check_pair(pair)
    values = ctx.as_dict()
    for f in F.features:
        scope = f.scope
        if i in scope and j in scope and _agrees(f, values):
            return True
    return False


def is_independent_general(F: StructureModel, t: Triplet) -> bool:
    """Read ``<X_i indep X_j | x_U, X_W>`` off the features.

    Each completion ``x_W`` gives a context-specific query: keep the features
    compatible with the context and require that none of them holds both
    ``X_i`` and ``X_j``. The answer is the conjunction over completions.
    """
    t.validate(F.domain)
    i, j = t.pair
    holders = [f for f in F.features if i in f.scope and j in f.scope]
    base = dict(t.context)
    for vals in product(*(range(F.domain.card(k)) for k in t.free)):
        ctx = dict(base)
        ctx.update(zip(t.free, vals))
        if any(_agrees(f, ctx) for f in holders):
            return False
    return True


def reduced_dependency_model(F: StructureModel, pair) -> Set[FCContext]:
    pair = check_pair(pair)
    return {ctx for ctx in enumerate_fc_contexts(pair, F.domain) if is_dependent_fc(F, pair, ctx)}


def _census_rows(domain: DomainSpec):
    # Each non-pair variable is either unused, assigned (in U) or free (in W).
    rows = Counter()
    for pair in domain.pairs():
        rest = _rest(pair, domain.n)
        for roles in product((0, 1, 2), repeat=len(rest)):
            u = w = 0
            contexts = 1
            for k, r in zip(rest, roles):
                if r == 1:
                    u += 1
                    contexts *= domain.card(k)
                elif r == 2:
                    w += 1
            rows[(u, w)] += contexts
    return rows


def census_row_order(key):
    u, w = key
    group = 0 if u == 0 else (1 if w == 0 else 2)
    return (group, u, w)


def complete_triplet_census(domain: DomainSpec, max_total: int = DEFAULT_MAX_CENSUS) -> Dict[Tuple[int, int], int]:
    """Count every contextualized triplet, grouped by ``(|U|, |W|)``.

    Rows come back ordered as: unconditioned/free-only rows, then
    assigned-only rows, then mixed rows.
    """
    # Closed-form size check before enumerating.
    rest_cost = 0
    for pair in domain.pairs():
        cost = 1
        for k in _rest(pair, domain.n):
            cost *= 2 + domain.card(k)
        rest_cost += cost
    if rest_cost > max_total:
        raise GuardExceeded(f"census has {rest_cost} triplets (guard {max_total})")
    rows = _census_rows(domain)
    return {k: rows[k] for k in sorted(rows, key=census_row_order)}


def brute_confusion_matrix(
    F: StructureModel,
    G: StructureModel,
    max_memberships: int = DEFAULT_MAX_MEMBERSHIPS,
    per_pair: bool = False,
) -> ConfusionMatrix:
    """Tally every FC triplet literally against both models."""
    if F.domain != G.domain:
        raise ValueError("models have different domains")
    dom = F.domain
    total = dom.total_fc_contexts()
    if total > max_memberships:
        raise GuardExceeded(f"{total} FC triplets exceed the oracle guard ({max_memberships})")
    tp = fp = fn = tn = 0
    breakdown = {}
    for pair in dom.pairs():
        c = [0, 0, 0, 0]
        for ctx in enumerate_fc_contexts(pair, dom):
            in_f = is_dependent_fc(F, pair, ctx)
            in_g = is_dependent_fc(G, pair, ctx)
            if in_f and in_g:
                c[0] += 1
            elif in_g:
                c[1] += 1
            elif in_f:
                c[2] += 1
            else:
                c[3] += 1
        breakdown[pair] = tuple(c)
        tp, fp, fn, tn = tp + c[0], fp + c[1], fn + c[2], tn + c[3]
    return ConfusionMatrix(tp, fp, fn, tn, total, breakdown if per_pair else None)
