"""Efficient FC confusion matrix and structural distance between two models.

Per pair ``(i, j)`` the four counts come from partitioning three derived
feature sets (true positives, false negatives, false positives) and summing
closed-form cardinalities; true negatives are the remainder.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .algebra import difference_set, intersect_pair, is_sub_assignment
from .model import (
    Feature,
    PairFeature,
    StructureModel,
    check_pair,
    compatible_outside_pair,
    scope_contains_pair,
    strip_pair,
)
from .partition import coverage_cardinality

DEFAULT_MAX_UNION_TERMS = 1_000_000

Counts = Tuple[int, int, int, int]


class DomainMismatch(ValueError):
    pass


class CapExceeded(RuntimeError):
    """The false-negative expansion for one feature grew past the configured cap."""

    def __init__(self, pair, feature, terms: int, cap: int):
        super().__init__(
            f"union expansion for feature {feature} on pair {pair} reached {terms} terms "
            f"(cap {cap})"
        )
        self.pair = pair
        self.feature = feature
        self.terms = terms
        self.cap = cap


@dataclass(frozen=True)
class ComparatorConfig:
    max_union_terms: int = DEFAULT_MAX_UNION_TERMS
    emit_per_pair: bool = False
    workers: int = 1

    def __post_init__(self):
        if self.max_union_terms < 1:
            raise ValueError("max_union_terms must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int
    total: int
    per_pair: Optional[Dict[Tuple[int, int], Counts]] = field(default=None, compare=False)

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError(f"negative count in {self}")
        if self.tp + self.fp + self.fn + self.tn != self.total:
            raise ValueError(f"counts do not sum to total in {self}")

    @property
    def distance(self) -> int:
        return self.fp + self.fn

    @property
    def normalized(self) -> float:
        return self.distance / self.total

    def counts(self) -> Counts:
        return (self.tp, self.fp, self.fn, self.tn)

    def swapped(self) -> "ConfusionMatrix":
        per_pair = None
        if self.per_pair is not None:
            per_pair = {p: (tp, fn, fp, tn) for p, (tp, fp, fn, tn) in self.per_pair.items()}
        return ConfusionMatrix(self.tp, self.fn, self.fp, self.tn, self.total, per_pair)

    def to_dict(self, method: str = "efficient") -> dict:
        out = {
            "method": method,
            "tp": str(self.tp),
            "fp": str(self.fp),
            "fn": str(self.fn),
            "tn": str(self.tn),
            "total": str(self.total),
            "distance": str(self.distance),
            "normalized_distance": self.normalized,
        }
        if self.per_pair is not None:
            out["per_pair"] = [
                {"i": i, "j": j, "tp": str(c[0]), "fp": str(c[1]), "fn": str(c[2]), "tn": str(c[3])}
                for (i, j), c in sorted(self.per_pair.items())
            ]
        return out

    def to_json(self, method: str = "efficient") -> str:
        return json.dumps(self.to_dict(method), indent=2)

    def to_csv(self) -> str:
        lines = ["i,j,tp,fp,fn,tn,total,distance,normalized_distance"]
        if self.per_pair is not None:
            for (i, j), (tp, fp, fn, tn) in sorted(self.per_pair.items()):
                tot = tp + fp + fn + tn
                lines.append(f"{i},{j},{tp},{fp},{fn},{tn},{tot},{fp + fn},{(fp + fn) / tot!r}")
        lines.append(
            f"all,all,{self.tp},{self.fp},{self.fn},{self.tn},{self.total},"
            f"{self.distance},{self.normalized!r}"
        )
        return "\n".join(lines) + "\n"


def _check_domains(F: StructureModel, G: StructureModel) -> None:
    if F.domain != G.domain:
        raise DomainMismatch(
            f"models have different domains: {F.domain.cardinalities} vs {G.domain.cardinalities}"
        )


def _ordered_unique(items):
    return list(dict.fromkeys(items))


def dependence_features(F: StructureModel, pair) -> List[PairFeature]:
    """Stripped features of ``F`` that hold both pair variables."""
    pair = check_pair(pair)
    return _ordered_unique(strip_pair(f, pair) for f in F.features if scope_contains_pair(f, pair))


def build_htp(F: StructureModel, G: StructureModel, pair) -> List[PairFeature]:
    pair = check_pair(pair)
    gs = [strip_pair(g, pair) for g in G.features if scope_contains_pair(g, pair)]
    out = []
    for f in F.features:
        if not scope_contains_pair(f, pair):
            continue
        fp = strip_pair(f, pair)
        for gp in gs:
            u = intersect_pair(fp, gp)
            if u is not None:
                out.append(u)
    return _ordered_unique(out)


def _fn_terms(f: Feature, G: StructureModel, pair, domain, cap: int) -> List[PairFeature]:
    fp = strip_pair(f, pair)
    diffs = []
    for g in G.features:
        c1g = scope_contains_pair(g, pair)
        gp = strip_pair(g, pair)
        if c1g and is_sub_assignment(gp, fp):
            return []  # every context of f is also one of g's
        if not c1g or not compatible_outside_pair(fp, gp, pair):
            continue  # g removes nothing from f
        diffs.append(difference_set(fp, gp, domain))
    if not diffs:
        return [fp]

    # Distribute the intersection over the per-g unions one factor at a time,
    # dropping incompatible (empty) partial selections as they appear.
    terms = [fp]
    for ds in diffs:
        nxt = {}
        for t in terms:
            for d in ds:
                u = intersect_pair(t, d)
                if u is not None:
                    nxt[u] = None
                    if len(nxt) > cap:
                        raise CapExceeded(pair, f, len(nxt), cap)
        terms = list(nxt)
        if not terms:
            break
    return terms


def build_hfn(
    F: StructureModel, G: StructureModel, pair, cfg: Optional[ComparatorConfig] = None
) -> List[PairFeature]:
    """Features whose FC contexts are exactly those of ``F`` missing from ``G``."""
    cfg = cfg or ComparatorConfig()
    pair = check_pair(pair)
    out = []
    for f in F.features:
        if scope_contains_pair(f, pair):
            out.extend(_fn_terms(f, G, pair, F.domain, cfg.max_union_terms))
    return _ordered_unique(out)


def pair_counts(F: StructureModel, G: StructureModel, pair, cfg: Optional[ComparatorConfig] = None) -> Counts:
    cfg = cfg or ComparatorConfig()
    pair = check_pair(pair)
    dom = F.domain
    tp = coverage_cardinality(build_htp(F, G, pair), pair, dom)
    fn = coverage_cardinality(build_hfn(F, G, pair, cfg), pair, dom)
    fp = coverage_cardinality(build_hfn(G, F, pair, cfg), pair, dom)
    tn = dom.contexts_per_pair(pair) - tp - fn - fp
    return (tp, fp, fn, tn)


def _pair_task(args):
    return pair_counts(*args)


def confusion_matrix(
    F: StructureModel, G: StructureModel, cfg: Optional[ComparatorConfig] = None
) -> ConfusionMatrix:
    """FC confusion matrix of ``G`` with respect to ``F`` (``F`` is the reference)."""
    cfg = cfg or ComparatorConfig()
    _check_domains(F, G)
    F, G = F.structure(), G.structure()
    pairs = list(F.domain.pairs())
    if cfg.workers > 1 and len(pairs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            results = list(pool.map(_pair_task, [(F, G, p, cfg) for p in pairs]))
    else:
        results = [pair_counts(F, G, p, cfg) for p in pairs]
    per_pair = dict(zip(pairs, results))
    tp = sum(c[0] for c in results)
    fp = sum(c[1] for c in results)
    fn = sum(c[2] for c in results)
    total = F.domain.total_fc_contexts()
    return ConfusionMatrix(
        tp, fp, fn, total - tp - fp - fn, total, per_pair if cfg.emit_per_pair else None
    )


def distance(
    F: StructureModel, G: StructureModel, cfg: Optional[ComparatorConfig] = None
) -> Tuple[int, float]:
    cm = confusion_matrix(F, G, cfg)
    return cm.distance, cm.normalized


def dependence_count(F: StructureModel, pair) -> int:
    """``|X^ij(F)|``: FC contexts of the pair on which ``F`` encodes a dependence."""
    return coverage_cardinality(dependence_features(F, pair), pair, F.domain)


def total_dependence_count(F: StructureModel) -> int:
    return sum(dependence_count(F, p) for p in F.domain.pairs())
