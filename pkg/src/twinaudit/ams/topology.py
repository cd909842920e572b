"""Network topology: audited hosts and their typed relationships,
persisted in the document store."""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Union

import yaml

from .store import DocumentStore

__all__ = [
    "HostRecord",
    "InventoryError",
    "Relationship",
    "RelationshipKind",
    "Segment",
    "TopologyGraph",
    "ingest_inventory",
    "load_inventory",
    "topology_from_store",
]

HOSTS = "hosts"
TOPOLOGY = "topology"


class InventoryError(ValueError):
    pass


class Segment(str, Enum):
    DMZ = "DMZ"
    LAN = "LAN"


class RelationshipKind(str, Enum):
    SERVES = "SERVES"
    CONNECTS_TO = "CONNECTS_TO"


@dataclass(frozen=True)
class HostRecord:
    host_id: str
    role: str
    segment: Segment
    snapshot_ref: str

    def to_dict(self) -> dict[str, str]:
        return {
            "host_id": self.host_id,
            "role": self.role,
            "segment": self.segment.value,
            "snapshot_ref": self.snapshot_ref,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "HostRecord":
        missing = {"host_id", "role", "segment", "snapshot_ref"} - set(doc)
        if missing:
            raise InventoryError(f"host entry missing fields: {sorted(missing)}")
        try:
            segment = Segment(str(doc["segment"]).upper())
        except ValueError:
            raise InventoryError(f"unknown segment {doc['segment']!r}") from None
        return cls(
            host_id=str(doc["host_id"]),
            role=str(doc["role"]),
            segment=segment,
            snapshot_ref=str(doc["snapshot_ref"]),
        )


@dataclass(frozen=True)
class Relationship:
    source: str
    kind: RelationshipKind
    target: str

    def to_dict(self) -> dict[str, str]:
        return {"source": self.source, "kind": self.kind.value, "target": self.target}


@dataclass(frozen=True)
class TopologyGraph:
    hosts: tuple[HostRecord, ...]
    relationships: tuple[Relationship, ...]

    def host(self, host_id: str) -> HostRecord:
        for record in self.hosts:
            if record.host_id == host_id:
                return record
        raise KeyError(host_id)

    def host_ids(self) -> list[str]:
        return sorted(h.host_id for h in self.hosts)

    def by_role(self, role: str) -> list[HostRecord]:
        return sorted(
            (h for h in self.hosts if h.role == role), key=lambda h: h.host_id
        )


def _parse_relationship(doc: dict[str, Any], known: set[str]) -> Relationship:
    missing = {"source", "kind", "target"} - set(doc)
    if missing:
        raise InventoryError(f"relationship missing fields: {sorted(missing)}")
    try:
        kind = RelationshipKind(str(doc["kind"]).upper())
    except ValueError:
        raise InventoryError(f"unknown relationship kind {doc['kind']!r}") from None
    source, target = str(doc["source"]), str(doc["target"])
    for endpoint in (source, target):
        if endpoint not in known:
            raise InventoryError(f"relationship endpoint {endpoint!r} is not a known host")
    return Relationship(source=source, kind=kind, target=target)


def parse_inventory(data: Any) -> TopologyGraph:
    if not isinstance(data, dict):
        raise InventoryError("inventory must be an object with hosts/relationships")
    host_entries = data.get("hosts") or []
    hosts: list[HostRecord] = []
    seen: set[str] = set()
    for entry in host_entries:
        record = HostRecord.from_dict(entry)
        if record.host_id in seen:
            raise InventoryError(f"duplicate host_id {record.host_id!r} in inventory")
        seen.add(record.host_id)
        hosts.append(record)
    relationships = tuple(
        _parse_relationship(entry, seen) for entry in data.get("relationships") or []
    )
    return TopologyGraph(hosts=tuple(hosts), relationships=relationships)


def load_inventory(path: Union[str, Path]) -> TopologyGraph:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() in (".yaml", ".yml"):
        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    return parse_inventory(data)


def ingest_inventory(store: DocumentStore, source: Union[str, Path, dict]) -> TopologyGraph:
    """Parse and persist an inventory; hosts upsert by host_id."""
    graph = parse_inventory(source) if isinstance(source, dict) else load_inventory(source)
    for host in graph.hosts:
        store.put(HOSTS, host.host_id, host.to_dict())
    existing = store.get(TOPOLOGY, "relationships") or []
    merged = {json.dumps(r, sort_keys=True) for r in existing}
    merged.update(
        json.dumps(r.to_dict(), sort_keys=True) for r in graph.relationships
    )
    store.put(TOPOLOGY, "relationships", [json.loads(r) for r in sorted(merged)])
    return graph


def topology_from_store(store: DocumentStore) -> TopologyGraph:
    hosts = tuple(
        HostRecord.from_dict(doc) for doc in store.query(HOSTS).values()
    )
    known = {h.host_id for h in hosts}
    relationships: Iterable[dict] = store.get(TOPOLOGY, "relationships") or []
    return TopologyGraph(
        hosts=hosts,
        relationships=tuple(_parse_relationship(r, known) for r in relationships),
    )
