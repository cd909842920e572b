"""BOM forging: hierarchical crypto graph and document builders."""

from .builder import (
    ArtifactCounts,
    build_cbom,
    build_sbom,
    count_artifacts,
    document_serial,
    enrich_with_vulnerabilities,
    link_to_profile,
)
from .hierarchy import (
    ALGORITHM_PRIMITIVES,
    LAYER_FAMILY,
    LAYER_OCCURRENCE,
    LAYER_PARAMETERIZATION,
    LAYER_PRIMITIVE,
    PRIMITIVES,
    CryptoHierarchyGraph,
    Edge,
    EdgeKind,
    NodeId,
    build_graph,
    insert_crypto_node,
    occurrence_name,
)

__all__ = [
    "ALGORITHM_PRIMITIVES",
    "LAYER_FAMILY",
    "LAYER_OCCURRENCE",
    "LAYER_PARAMETERIZATION",
    "LAYER_PRIMITIVE",
    "PRIMITIVES",
    "ArtifactCounts",
    "CryptoHierarchyGraph",
    "Edge",
    "EdgeKind",
    "NodeId",
    "build_cbom",
    "build_graph",
    "build_sbom",
    "count_artifacts",
    "document_serial",
    "enrich_with_vulnerabilities",
    "insert_crypto_node",
    "link_to_profile",
    "occurrence_name",
]
