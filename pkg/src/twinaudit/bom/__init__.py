"""Document model, canonical serialization, and revision deltas."""

from .diff import (
    BomDelta,
    DeltaMismatch,
    apply_delta,
    delta_from_dict,
    delta_payload_bytes,
    delta_to_dict,
    diff_boms,
)
from .model import (
    KIND_PROPERTY,
    AnalysisState,
    Bom,
    BomKind,
    BomLink,
    BomLinkNotFound,
    BomMetadata,
    BomValidationError,
    Component,
    ComponentType,
    CryptoAssetKind,
    CryptoProperties,
    DanglingRef,
    Dependency,
    LinkResolutionError,
    Severity,
    SubjectKind,
    Violation,
    VulnerabilityEntry,
    is_bom_link,
    resolve_bom_link,
    serial_uuid,
    severity_for_score,
    validate_bom,
)
from .serialize import (
    BOM_FORMAT,
    SPEC_VERSION,
    BomParseError,
    BomSchemaError,
    bom_to_dict,
    parse_bom,
    serialize_bom,
)

__all__ = [
    "KIND_PROPERTY",
    "BOM_FORMAT",
    "SPEC_VERSION",
    "AnalysisState",
    "Bom",
    "BomDelta",
    "BomKind",
    "BomLink",
    "BomLinkNotFound",
    "BomMetadata",
    "BomParseError",
    "BomSchemaError",
    "BomValidationError",
    "Component",
    "ComponentType",
    "CryptoAssetKind",
    "CryptoProperties",
    "DanglingRef",
    "DeltaMismatch",
    "Dependency",
    "LinkResolutionError",
    "Severity",
    "SubjectKind",
    "Violation",
    "VulnerabilityEntry",
    "apply_delta",
    "bom_to_dict",
    "delta_from_dict",
    "delta_payload_bytes",
    "delta_to_dict",
    "diff_boms",
    "is_bom_link",
    "parse_bom",
    "resolve_bom_link",
    "serial_uuid",
    "serialize_bom",
    "severity_for_score",
    "validate_bom",
]
