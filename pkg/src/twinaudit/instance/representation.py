"""Stored representation of one security digital twin.

Things are WoT-style descriptions, one per audited host plus one for the
profile manifest. Every thing keeps an append-only revision history; past
revisions stay readable verbatim after any number of updates.
"""

from __future__ import annotations

import copy
import json
import time
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional

from ..bom import Bom, BomKind, Component, SubjectKind

__all__ = [
    "RepresentationError",
    "Revision",
    "StoredRepresentation",
    "UnknownThing",
    "VersionConflict",
    "build_representation",
    "thing_states_from_boms",
]


class RepresentationError(ValueError):
    """Input rejected before any state change."""


class UnknownThing(KeyError):
    def __init__(self, thing_id: str):
        super().__init__(thing_id)
        self.thing_id = thing_id


class VersionConflict(Exception):
    def __init__(self, expected: int, got: int):
        super().__init__(f"expected version {expected}, got {got}")
        self.expected = expected
        self.got = got


def _software_entry(component: Component) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "name": component.name,
        "version": component.version,
        "ref": component.bom_ref,
        "type": component.component_type.value,
    }
    if component.package_url:
        entry["purl"] = component.package_url
    return entry


def _crypto_bucket(component: Component) -> str:
    if component.crypto is None:
        return "libraries" if component.component_type.value == "LIBRARY" else "settings"
    kind = component.crypto.asset_kind.value
    return {
        "ALGORITHM": "algorithms",
        "PROTOCOL": "protocols",
        "CERTIFICATE": "certificates",
        "KEY_MATERIAL": "keyMaterial",
    }.get(kind, "settings")


def _crypto_entry(component: Component) -> dict[str, Any]:
    entry: dict[str, Any] = {
        "name": component.name,
        "version": component.version,
        "ref": component.bom_ref,
    }
    crypto = component.crypto
    if crypto is None:
        return entry
    if crypto.algorithm_family:
        entry["family"] = crypto.algorithm_family
    if crypto.parameter_set:
        entry["parameter"] = crypto.parameter_set
    if crypto.mode:
        entry["mode"] = crypto.mode
    if crypto.protocol_version:
        entry["protocolVersion"] = crypto.protocol_version
    if crypto.certificate_subject:
        entry["subject"] = crypto.certificate_subject
        entry["issuer"] = crypto.certificate_issuer
        entry["notValidBefore"] = crypto.not_before
        entry["notValidAfter"] = crypto.not_after
    return entry


def thing_states_from_boms(boms: Iterable[Bom]) -> dict[str, dict[str, Any]]:
    """Project parsed documents onto per-thing states.

    One thing per host subject, one per profile subject. Each document kind
    may appear once per subject; duplicates are rejected.
    """
    parsed = list(boms)
    seen: set[tuple[str, str, str]] = set()
    for bom in parsed:
        key = (bom.metadata.subject_kind.value, bom.metadata.subject_name, bom.kind.value)
        if key in seen:
            raise RepresentationError(
                f"duplicate {bom.kind.value} document for subject {bom.metadata.subject_name!r}"
            )
        seen.add(key)

    states: dict[str, dict[str, Any]] = {}
    for bom in sorted(parsed, key=lambda b: (b.metadata.subject_name, b.kind.value)):
        subject = bom.metadata.subject_name
        if bom.metadata.subject_kind == SubjectKind.PROFILE:
            state = states.setdefault(
                subject,
                {
                    "id": subject,
                    "title": f"Audit profile manifest for {subject}",
                    "properties": {"documents": []},
                    "links": [],
                },
            )
        else:
            state = states.setdefault(
                subject,
                {
                    "id": subject,
                    "title": f"Security twin of host {subject}",
                    "properties": {"documents": []},
                    "links": [],
                },
            )
        properties = state["properties"]
        properties["documents"].append(
            {"serial": bom.serial_number, "version": bom.version, "kind": bom.kind.value}
        )

        software_kinds = (BomKind.SBOM, BomKind.MIXED)
        for component in bom.components:
            if component.crypto is None and bom.kind in software_kinds:
                bucket, entry = "software", _software_entry(component)
            else:
                bucket, entry = _crypto_bucket(component), _crypto_entry(component)
            properties.setdefault(bucket, []).append(entry)

        for vuln in bom.vulnerabilities:
            properties.setdefault("vulnerabilities", []).append(
                {
                    "cve": vuln.cve_id,
                    "score": vuln.cvss_score,
                    "severity": vuln.severity.value,
                    "state": vuln.analysis_state.value,
                    "affects": list(vuln.affects),
                }
            )

        for link in bom.links:
            rendered = link.render()
            if rendered not in state["links"]:
                state["links"].append(rendered)

    for state in states.values():
        for key, value in state["properties"].items():
            if isinstance(value, list):
                value.sort(key=lambda item: json.dumps(item, sort_keys=True))
        state["links"].sort()
    return states


@dataclass(frozen=True)
class Revision:
    revision: int
    timestamp: float
    state: dict[str, Any]


class StoredRepresentation:
    """Thing states keyed by id, each with gap-free revision history."""

    def __init__(self, clock: Callable[[], float] = time.monotonic):
        self._things: dict[str, list[Revision]] = {}
        self._version = 0
        self._clock = clock

    @property
    def current_version(self) -> int:
        return self._version

    @classmethod
    def build(
        cls, states: dict[str, dict[str, Any]], clock: Callable[[], float] = time.monotonic
    ) -> "StoredRepresentation":
        if not states:
            raise RepresentationError("representation requires at least one thing")
        rep = cls(clock=clock)
        now = rep._clock()
        for thing_id in sorted(states):
            rep._things[thing_id] = [
                Revision(revision=1, timestamp=now, state=copy.deepcopy(states[thing_id]))
            ]
        rep._version = 1
        return rep

    def apply_update(self, states: dict[str, dict[str, Any]], new_version: int) -> int:
        """Advance to new_version; returns the number of things revised.

        Atomic: validation happens before any append. A thing gains a
        revision only when its state actually changed.
        """
        if new_version != self._version + 1:
            raise VersionConflict(expected=self._version + 1, got=new_version)
        unknown = sorted(set(states) - set(self._things))
        if unknown:
            raise UnknownThing(unknown[0])
        now = self._clock()
        revised = 0
        for thing_id in sorted(states):
            history = self._things[thing_id]
            new_state = states[thing_id]
            if new_state == history[-1].state:
                continue
            history.append(
                Revision(
                    revision=history[-1].revision + 1,
                    timestamp=now,
                    state=copy.deepcopy(new_state),
                )
            )
            revised += 1
        self._version = new_version
        return revised

    def thing_ids(self) -> list[str]:
        return sorted(self._things)

    def _history_of(self, thing_id: str) -> list[Revision]:
        try:
            return self._things[thing_id]
        except KeyError:
            raise UnknownThing(thing_id) from None

    def latest(self, thing_id: str) -> dict[str, Any]:
        return copy.deepcopy(self._history_of(thing_id)[-1].state)

    def at_revision(self, thing_id: str, revision: int) -> dict[str, Any]:
        history = self._history_of(thing_id)
        if revision < 1 or revision > len(history):
            raise UnknownThing(f"{thing_id}@{revision}")
        return copy.deepcopy(history[revision - 1].state)

    def at_time(self, thing_id: str, timestamp: float) -> dict[str, Any]:
        history = self._history_of(thing_id)
        best: Optional[Revision] = None
        for rev in history:
            if rev.timestamp <= timestamp:
                best = rev
        if best is None:
            raise UnknownThing(f"{thing_id}@t={timestamp}")
        return copy.deepcopy(best.state)

    def history(self, thing_id: str) -> list[tuple[int, float]]:
        return [(r.revision, r.timestamp) for r in self._history_of(thing_id)]

    def snapshot_doc(self) -> dict[str, Any]:
        """The whole representation, history included, as plain JSON data."""
        return {
            "version": self._version,
            "things": {
                thing_id: [
                    {"revision": r.revision, "timestamp": r.timestamp, "state": r.state}
                    for r in history
                ]
                for thing_id, history in sorted(self._things.items())
            },
        }

    def serialized_bytes(self) -> bytes:
        return json.dumps(self.snapshot_doc(), sort_keys=True, separators=(",", ":")).encode(
            "utf-8"
        )


def build_representation(boms: Iterable[Bom]) -> StoredRepresentation:
    """Project documents to things and open their histories at revision 1."""
    return StoredRepresentation.build(thing_states_from_boms(boms))
