"""Turn overlapping pair-relative features into a disjoint cover."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from .algebra import DiffKind, diff_pair, fc_cardinality
from .model import DomainSpec, PairFeature, check_pair


@dataclass(frozen=True)
class PartitionModel:
    pair: Tuple[int, int]
    members: Tuple[PairFeature, ...]

    def cardinality(self, domain: DomainSpec) -> int:
        return sum(fc_cardinality(p, domain) for p in self.members)


def _dedupe(hs: Iterable[PairFeature]):
    seen = {}
    for h in hs:
        seen.setdefault(h, None)
    return list(seen)


def partition(hs: Sequence[PairFeature], pair: Sequence[int], domain: DomainSpec) -> PartitionModel:
    """Partition model of ``hs``: same FC coverage, pairwise disjoint members.

    The first feature of ``hs`` seeds the partition. Every later feature is
    cut down by subtracting each member already in the partition from each of
    its surviving fragments; whatever survives joins the partition.
    """
    pair = check_pair(pair)
    hs = _dedupe(hs)
    for h in hs:
        if h.pair != pair:
            raise ValueError(f"feature {h} belongs to pair {h.pair}, not {pair}")
    if not hs:
        return PartitionModel(pair, ())

    parts = [hs[0]]
    for h in hs[1:]:
        fragments = [h]
        for p in parts:
            nxt = []
            for frag in fragments:
                res = diff_pair(frag, p, domain)
                if res.kind is DiffKind.WHOLE:
                    nxt.append(frag)
                elif res.kind is DiffKind.DIFFERENCE:
                    nxt.extend(res.features)
            fragments = nxt
            if not fragments:
                break
        parts.extend(fragments)
    return PartitionModel(pair, tuple(parts))


def coverage_cardinality(hs: Sequence[PairFeature], pair: Sequence[int], domain: DomainSpec) -> int:
    """Number of FC contexts covered by at least one feature of ``hs``."""
    return partition(hs, pair, domain).cardinality(domain)
