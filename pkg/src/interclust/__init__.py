"""Interactive clustering engine: local split/merge edits driven by an oracle."""

from .core import (
    Cluster,
    Clustering,
    DomainError,
    EditRequest,
    ErrorReport,
    Model,
    ModelConfig,
    SimilarityMatrix,
    SplitInfeasible,
    TreeMode,
    cluster_distance,
    error_report,
)

__all__ = [
    "Cluster",
    "Clustering",
    "DomainError",
    "EditRequest",
    "ErrorReport",
    "Model",
    "ModelConfig",
    "SimilarityMatrix",
    "SplitInfeasible",
    "TreeMode",
    "cluster_distance",
    "error_report",
]
