"""Domains, features and log-linear structures.

A feature is a sparse partial assignment ``{variable: value}`` kept as a tuple
of ``(index, value)`` pairs sorted by index, so equal assignments compare and
hash equal. A :class:`PairFeature` is a feature with the two variables of a
pair ``(i, j)`` stripped; it stands for the set of fully-contextualized (FC)
contexts of that pair on which the original feature induces a dependence.
"""
from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

Pair = Tuple[int, int]
Assignment = Tuple[Tuple[int, int], ...]


class ModelError(ValueError):
    """Raised for malformed or inconsistent model input."""


class ModelWarning(UserWarning):
    """Non-fatal oddities found while loading a model."""


def _canonical(items: Iterable[Tuple[int, int]]) -> Assignment:
    ordered = tuple(sorted((int(k), int(v)) for k, v in items))
    for (a, _), (b, _) in zip(ordered, ordered[1:]):
        if a == b:
            raise ModelError(f"duplicate variable index {a} in assignment")
    return ordered


def check_pair(pair: Sequence[int]) -> Pair:
    i, j = int(pair[0]), int(pair[1])
    if i == j:
        raise ValueError(f"pair indices must differ, got ({i}, {j})")
    return (i, j)


@dataclass(frozen=True)
class DomainSpec:
    cardinalities: Tuple[int, ...]

    def __post_init__(self):
        cards = tuple(int(c) for c in self.cardinalities)
        object.__setattr__(self, "cardinalities", cards)
        if len(cards) < 2:
            raise ModelError("a domain needs at least 2 variables")
        for k, c in enumerate(cards):
            if c < 2:
                raise ModelError(f"variable {k} has cardinality {c} (must be >= 2)")

    @property
    def n(self) -> int:
        return len(self.cardinalities)

    def card(self, k: int) -> int:
        return self.cardinalities[k]

    def pairs(self):
        """Unordered pairs ``i < j`` in ascending order."""
        return combinations(range(self.n), 2)

    def contexts_per_pair(self, pair: Pair) -> int:
        i, j = pair
        total = 1
        for k, c in enumerate(self.cardinalities):
            if k != i and k != j:
                total *= c
        return total

    def total_fc_contexts(self) -> int:
        return sum(self.contexts_per_pair(p) for p in self.pairs())

    def configuration_count(self) -> int:
        total = 1
        for c in self.cardinalities:
            total *= c
        return total

    def validate(self, items: Assignment, where: str = "feature") -> None:
        for k, v in items:
            if not 0 <= k < self.n:
                raise ModelError(f"{where}: variable index {k} out of range (n={self.n})")
            if not 0 <= v < self.cardinalities[k]:
                raise ModelError(
                    f"{where}: value {v} out of range for variable {k} "
                    f"(cardinality {self.cardinalities[k]})"
                )


@dataclass(frozen=True, order=True)
class Feature:
    items: Assignment = ()

    def __post_init__(self):
        object.__setattr__(self, "items", _canonical(self.items))

    @classmethod
    def of(cls, mapping: Mapping[int, int]) -> "Feature":
        return cls(tuple(mapping.items()))

    @property
    def scope(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def get(self, k: int, default=None):
        for var, val in self.items:
            if var == k:
                return val
        return default

    def __len__(self) -> int:
        return len(self.items)

    def __str__(self) -> str:
        return "<" + ",".join(f"X{k}={v}" for k, v in self.items) + ">"


@dataclass(frozen=True, order=True)
class PairFeature:
    pair: Pair
    items: Assignment = ()

    def __post_init__(self):
        pair = check_pair(self.pair)
        items = _canonical(self.items)
        for k, _ in items:
            if k in pair:
                raise ValueError(f"pair variable X{k} cannot be assigned in a PairFeature")
        object.__setattr__(self, "pair", pair)
        object.__setattr__(self, "items", items)

    @property
    def scope(self) -> frozenset:
        return frozenset(k for k, _ in self.items)

    def as_dict(self) -> dict:
        return dict(self.items)

    def to_feature(self) -> Feature:
        """The assignments outside the pair, as a plain feature."""
        return Feature(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def __str__(self) -> str:
        return "<" + ",".join(f"X{k}={v}" for k, v in self.items) + ">"


@dataclass(frozen=True)
class FCContext:
    """A complete assignment to every variable outside ``pair``."""

    pair: Pair
    values: Assignment

    def as_dict(self) -> dict:
        return dict(self.values)


@dataclass(frozen=True, eq=False)
class StructureModel:
    """Domain plus a duplicate-free feature list, optionally weighted.

    Equality ignores feature order; weights, when present, are compared per
    feature.
    """

    domain: DomainSpec
    features: Tuple[Feature, ...] = ()
    weights: Optional[Tuple[float, ...]] = None

    def __post_init__(self):
        feats = tuple(self.features)
        if self.weights is not None:
            weights = tuple(float(w) for w in self.weights)
            if len(weights) != len(feats):
                raise ModelError(
                    f"weight-length mismatch: {len(weights)} weights for {len(feats)} features"
                )
        else:
            weights = None
        seen = {}
        for idx, f in enumerate(feats):
            self.domain.validate(f.items, where=f"feature {idx}")
            seen.setdefault(f, idx)
        if len(seen) != len(feats):
            keep = sorted(seen.values())
            feats = tuple(feats[i] for i in keep)
            if weights is not None:
                weights = tuple(weights[i] for i in keep)
        object.__setattr__(self, "features", feats)
        object.__setattr__(self, "weights", weights)

    def _key(self):
        if self.weights is None:
            return (self.domain, frozenset(self.features), None)
        return (self.domain, frozenset(zip(self.features, self.weights)), True)

    def __eq__(self, other):
        if not isinstance(other, StructureModel):
            return NotImplemented
        return self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __len__(self) -> int:
        return len(self.features)

    def structure(self) -> "StructureModel":
        """This model with its weights dropped."""
        return StructureModel(self.domain, self.features)

    def with_weights(self, weights: Sequence[float]) -> "StructureModel":
        return StructureModel(self.domain, self.features, tuple(weights))


def strip_pair(f: Union[Feature, PairFeature], pair: Sequence[int]) -> PairFeature:
    """Drop the assignments of ``X_i`` and ``X_j`` from ``f``."""
    i, j = check_pair(pair)
    return PairFeature((i, j), tuple((k, v) for k, v in f.items if k != i and k != j))


def scope_contains_pair(f: Feature, pair: Sequence[int]) -> bool:
    i, j = check_pair(pair)
    scope = f.scope
    return i in scope and j in scope


def compatible_outside_pair(f, g, pair: Sequence[int]) -> bool:
    """True when ``f`` and ``g`` agree on every shared variable outside the pair."""
    i, j = check_pair(pair)
    gd = dict(g.items)
    for k, v in f.items:
        if k == i or k == j:
            continue
        w = gd.get(k)
        if w is not None and w != v:
            return False
    return True


def parse_model(text: Union[bytes, str]) -> StructureModel:
    """Parse and validate the JSON model format.

    Duplicate features are merged keeping the first weight; empty-scope
    features are kept. Both emit a :class:`ModelWarning`.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"malformed JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ModelError("model must be a JSON object")
    if "variables" not in doc:
        raise ModelError("missing 'variables'")
    variables = doc["variables"]
    if not isinstance(variables, list) or not all(_is_int(c) for c in variables):
        raise ModelError("'variables' must be a list of integers")
    domain = DomainSpec(tuple(variables))

    raw_features = doc.get("features", [])
    if not isinstance(raw_features, list):
        raise ModelError("'features' must be a list")
    features = []
    for idx, raw in enumerate(raw_features):
        if not isinstance(raw, list):
            raise ModelError(f"feature {idx}: expected a list of [var, val] pairs")
        pairs = []
        for entry in raw:
            if not (isinstance(entry, list) and len(entry) == 2 and all(_is_int(x) for x in entry)):
                raise ModelError(f"feature {idx}: malformed assignment {entry!r}")
            pairs.append((entry[0], entry[1]))
        try:
            f = Feature(tuple(pairs))
        except ModelError as exc:
            raise ModelError(f"feature {idx}: {exc}") from None
        domain.validate(f.items, where=f"feature {idx}")
        if not f.items:
            warnings.warn(f"feature {idx} has an empty scope", ModelWarning, stacklevel=2)
        features.append(f)

    weights = doc.get("weights")
    if weights is not None:
        if not isinstance(weights, list) or not all(
            isinstance(w, (int, float)) and not isinstance(w, bool) for w in weights
        ):
            raise ModelError("'weights' must be a list of numbers")
        if len(weights) != len(features):
            raise ModelError(
                f"weight-length mismatch: {len(weights)} weights for {len(features)} features"
            )

    seen = set()
    for idx, f in enumerate(features):
        if f in seen:
            warnings.warn(
                f"feature {idx} duplicates an earlier feature; merged", ModelWarning, stacklevel=2
            )
        seen.add(f)
    return StructureModel(domain, tuple(features), None if weights is None else tuple(weights))


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def model_to_dict(m: StructureModel) -> dict:
    doc = {
        "variables": list(m.domain.cardinalities),
        "features": [[[k, v] for k, v in f.items] for f in m.features],
    }
    if m.weights is not None:
        doc["weights"] = list(m.weights)
    return doc


def serialize_model(m: StructureModel) -> str:
    return json.dumps(model_to_dict(m))


def load_model(path) -> StructureModel:
    with open(path, "rb") as fh:
        return parse_model(fh.read())


def random_model(
    domain: DomainSpec,
    n_features: int,
    max_arity: Optional[int] = None,
    rng: Optional[random.Random] = None,
    min_arity: int = 1,
) -> StructureModel:
    """Draw a random structure: each feature gets a random scope and values."""
    rng = rng or random.Random()
    max_arity = domain.n if max_arity is None else max_arity
    if not 1 <= min_arity <= max_arity <= domain.n:
        raise ValueError(f"need 1 <= min_arity <= max_arity <= {domain.n}")
    feats = []
    for _ in range(n_features):
        arity = rng.randint(min_arity, max_arity)
        scope = sorted(rng.sample(range(domain.n), arity))
        feats.append(Feature(tuple((k, rng.randrange(domain.card(k))) for k in scope)))
    return StructureModel(domain, tuple(feats))
