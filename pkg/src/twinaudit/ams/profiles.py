"""Audit profiles: which hosts and which evidence categories a run covers."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Union

import yaml

from ..collect import EvidenceCategory
from .store import DocumentStore
from .topology import TopologyGraph, topology_from_store

__all__ = [
    "AuditProfile",
    "ProfileError",
    "SyncPolicy",
    "create_profile",
    "get_profile",
    "list_profiles",
    "load_profile_file",
    "selected_hosts",
]

PROFILES = "profiles"
DERIVED = "profiles_derived"

ON_DEMAND = "ON_DEMAND"
PERIODIC = "PERIODIC"


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class SyncPolicy:
    kind: str = ON_DEMAND
    interval_seconds: Optional[float] = None

    def __post_init__(self) -> None:
        if self.kind not in (ON_DEMAND, PERIODIC):
            raise ProfileError(f"unknown sync policy {self.kind!r}")
        if self.kind == PERIODIC:
            if self.interval_seconds is None or self.interval_seconds <= 0:
                raise ProfileError("PERIODIC policy requires interval_seconds > 0")

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"kind": self.kind}
        if self.interval_seconds is not None:
            doc["interval_seconds"] = self.interval_seconds
        return doc


@dataclass(frozen=True)
class AuditProfile:
    profile_id: str
    name: str
    host_selector: tuple[str, ...]
    categories: tuple[str, ...] = ()  # empty means every category
    sync_policy: SyncPolicy = field(default_factory=SyncPolicy)

    def __post_init__(self) -> None:
        if not self.profile_id:
            raise ProfileError("profile_id must be non-empty")
        if not self.host_selector:
            raise ProfileError("host_selector must be non-empty")
        for category in self.categories:
            try:
                EvidenceCategory(category)
            except ValueError:
                raise ProfileError(f"unknown evidence category {category!r}") from None

    def to_dict(self) -> dict[str, Any]:
        return {
            "profile_id": self.profile_id,
            "name": self.name,
            "host_selector": list(self.host_selector),
            "categories": list(self.categories),
            "sync_policy": self.sync_policy.to_dict(),
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "AuditProfile":
        policy_doc = doc.get("sync_policy") or {}
        return cls(
            profile_id=str(doc.get("profile_id", "")),
            name=str(doc.get("name", doc.get("profile_id", ""))),
            host_selector=tuple(doc.get("host_selector") or ()),
            categories=tuple(doc.get("categories") or ()),
            sync_policy=SyncPolicy(
                kind=str(policy_doc.get("kind", ON_DEMAND)),
                interval_seconds=policy_doc.get("interval_seconds"),
            ),
        )


def selected_hosts(profile: AuditProfile, topology: TopologyGraph) -> list[str]:
    """Selector entries match a host_id or a role tag; each must match."""
    chosen: set[str] = set()
    known = set(topology.host_ids())
    for entry in profile.host_selector:
        if entry in known:
            chosen.add(entry)
            continue
        by_role = topology.by_role(entry)
        if not by_role:
            raise ProfileError(f"selector entry {entry!r} matches no host or role")
        chosen.update(h.host_id for h in by_role)
    return sorted(chosen)


def create_profile(store: DocumentStore, profile: AuditProfile) -> AuditProfile:
    """Validate against the stored topology, persist, and derive per-host
    profiles listing the categories each host will be scanned for."""
    topology = topology_from_store(store)
    hosts = selected_hosts(profile, topology)
    store.put(PROFILES, profile.profile_id, profile.to_dict())
    categories = list(profile.categories) or [c.value for c in EvidenceCategory]
    for host_id in hosts:
        store.put(
            DERIVED,
            f"{profile.profile_id}:{host_id}",
            {"profile_id": profile.profile_id, "host_id": host_id, "categories": categories},
        )
    return profile


def get_profile(store: DocumentStore, profile_id: str) -> Optional[AuditProfile]:
    doc = store.get(PROFILES, profile_id)
    return AuditProfile.from_dict(doc) if doc is not None else None


def list_profiles(store: DocumentStore) -> list[AuditProfile]:
    return [AuditProfile.from_dict(doc) for doc in store.query(PROFILES).values()]


def load_profile_file(path: Union[str, Path]) -> AuditProfile:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ProfileError("profile file must contain an object")
    return AuditProfile.from_dict(data)
