"""Structural comparison of log-linear models over fully-contextualized contexts."""
from .algebra import (
    DiffKind,
    DiffResult,
    IncompatibleFeatures,
    diff_fc,
    fc_cardinality,
    intersect_fc,
    union_features,
    union_over_pair,
)
from .comparator import (
    CapExceeded,
    ComparatorConfig,
    ConfusionMatrix,
    DomainMismatch,
    build_hfn,
    build_htp,
    confusion_matrix,
    distance,
)
from .model import (
    DomainSpec,
    FCContext,
    Feature,
    ModelError,
    ModelWarning,
    PairFeature,
    StructureModel,
    compatible_outside_pair,
    parse_model,
    scope_contains_pair,
    serialize_model,
    strip_pair,
)
from .partition import PartitionModel, coverage_cardinality, partition

__version__ = "0.1.0"

__all__ = [
    "build_hfn",
    "build_htp",
    "CapExceeded",
    "ComparatorConfig",
    "compatible_outside_pair",
    "confusion_matrix",
    "ConfusionMatrix",
    "coverage_cardinality",
    "diff_fc",
    "DiffKind",
    "DiffResult",
    "distance",
    "DomainMismatch",
    "DomainSpec",
    "fc_cardinality",
    "FCContext",
    "Feature",
    "IncompatibleFeatures",
    "intersect_fc",
    "ModelError",
    "ModelWarning",
    "PairFeature",
    "parse_model",
    "partition",
    "PartitionModel",
    "scope_contains_pair",
    "serialize_model",
    "strip_pair",
    "StructureModel",
    "union_features",
    "union_over_pair",
]
