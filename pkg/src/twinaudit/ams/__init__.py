"""Audit management: inventory, profiles, runs, and twin synchronization."""

from .profiles import (
    AuditProfile,
    ProfileError,
    SyncPolicy,
    create_profile,
    get_profile,
    list_profiles,
    load_profile_file,
    selected_hosts,
)
from .runs import TRANSITIONS, AuditRun, InvalidTransition, RunState
from .service import AuditService, PeriodicSync, UnknownRun
from .store import DocumentStore, FileDocumentStore
from .topology import (
    HostRecord,
    InventoryError,
    Relationship,
    RelationshipKind,
    Segment,
    TopologyGraph,
    ingest_inventory,
    load_inventory,
    parse_inventory,
    topology_from_store,
)

__all__ = [
    "TRANSITIONS",
    "AuditProfile",
    "AuditRun",
    "AuditService",
    "DocumentStore",
    "FileDocumentStore",
    "HostRecord",
    "InvalidTransition",
    "InventoryError",
    "PeriodicSync",
    "ProfileError",
    "Relationship",
    "RelationshipKind",
    "RunState",
    "Segment",
    "SyncPolicy",
    "TopologyGraph",
    "UnknownRun",
    "create_profile",
    "get_profile",
    "ingest_inventory",
    "list_profiles",
    "load_inventory",
    "load_profile_file",
    "parse_inventory",
    "selected_hosts",
    "topology_from_store",
]
