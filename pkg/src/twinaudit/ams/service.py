"""Audit orchestration: collect evidence, forge documents, drive the twin."""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Any, Callable, Iterable, Optional, Union

from ..bom import Bom, delta_to_dict, diff_boms, parse_bom, serialize_bom
from ..collect import EvidenceBundle, EvidenceCategory, HostSnapshot, scan_host
from ..forge import (
    build_cbom,
    build_graph,
    build_sbom,
    enrich_with_vulnerabilities,
    link_to_profile,
)
from ..jsonhttp import RequestRejected, TransportUnavailable
from ..manager import ManagerClient
from ..vulnstore import VulnerabilityStore
from .profiles import AuditProfile, ProfileError, create_profile, get_profile, selected_hosts
from .runs import RUNS, AuditRun, RunState
from .store import DocumentStore
from .topology import HostRecord, TopologyGraph, ingest_inventory, topology_from_store

__all__ = ["AuditService", "PeriodicSync", "UnknownRun"]

BOMS = "boms"


class UnknownRun(KeyError):
    def __init__(self, run_id: str) -> None:
        super().__init__(run_id)
        self.run_id = run_id


def _filtered(bundle: EvidenceBundle, categories: tuple[str, ...]) -> EvidenceBundle:
    if not categories:
        return bundle
    wanted = {EvidenceCategory(c) for c in categories}
    return EvidenceBundle(
        host=bundle.host,
        records=tuple(r for r in bundle.records if r.category in wanted),
    )


class AuditService:
    """Stateless over a document store: every run survives a restart."""

    def __init__(
        self,
        store: DocumentStore,
        manager: ManagerClient,
        vulnerabilities: Optional[VulnerabilityStore] = None,
        clock: Callable[[], float] = time.time,
        max_workers: int = 8,
        sdt_options: Optional[dict[str, Any]] = None,
    ) -> None:
        self.store = store
        self.manager = manager
        self.vulnerabilities = vulnerabilities or VulnerabilityStore()
        self.clock = clock
        self.max_workers = max_workers
        # Passed through on twin creation, e.g. consumer access tokens.
        self.sdt_options = dict(sdt_options or {})

    # -- inventory and profiles -------------------------------------------

    def ingest_inventory(self, source: Union[str, dict]) -> TopologyGraph:
        return ingest_inventory(self.store, source)

    def create_profile(self, profile: AuditProfile) -> AuditProfile:
        return create_profile(self.store, profile)

    # -- persistence helpers ----------------------------------------------

    def _save_run(self, run: AuditRun) -> None:
        self.store.put(RUNS, run.run_id, run.to_dict())

    def load_run(self, run_id: str) -> AuditRun:
        doc = self.store.get(RUNS, run_id)
        if doc is None:
            raise UnknownRun(run_id)
        return AuditRun.from_dict(doc)

    def list_runs(self) -> list[AuditRun]:
        return [AuditRun.from_dict(d) for d in self.store.query(RUNS).values()]

    def stored_bom(self, serial: str) -> Optional[Bom]:
        doc = self.store.get(BOMS, serial)
        if doc is None:
            return None
        return parse_bom(doc["text"])

    def run_boms(self, run: AuditRun) -> list[Bom]:
        boms = []
        for serial in run.bom_serials:
            bom = self.stored_bom(serial)
            if bom is not None:
                boms.append(bom)
        return boms

    def _persist_boms(self, boms: Iterable[Bom]) -> None:
        for bom in boms:
            self.store.put(
                BOMS,
                bom.serial_number,
                {"serial": bom.serial_number, "version": bom.version, "text": serialize_bom(bom)},
            )

    # -- evidence collection ----------------------------------------------

    def _collect(
        self, hosts: list[HostRecord]
    ) -> tuple[dict[str, EvidenceBundle], dict[str, str]]:
        """Scan every host in parallel; one bad snapshot fails only itself."""

        def scan_one(record: HostRecord) -> EvidenceBundle:
            if not record.snapshot_ref:
                raise ValueError("host has no snapshot reference")
            return scan_host(HostSnapshot.open(record.snapshot_ref))

        bundles: dict[str, EvidenceBundle] = {}
        errors: dict[str, str] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            futures = {record.host_id: pool.submit(scan_one, record) for record in hosts}
            for host_id, future in futures.items():
                try:
                    bundles[host_id] = future.result()
                except Exception as exc:
                    errors[host_id] = str(exc)
        return bundles, errors

    def _forge_host(
        self, bundle: EvidenceBundle, categories: tuple[str, ...], version: int = 1
    ) -> list[Bom]:
        scoped = _filtered(bundle, categories)
        sbom = build_sbom(scoped.host, scoped.records, version=version)
        graph = build_graph(scoped.records)
        cbom = build_cbom(scoped.host, graph, scoped.records, version=version)
        return [
            enrich_with_vulnerabilities(sbom, self.vulnerabilities),
            enrich_with_vulnerabilities(cbom, self.vulnerabilities),
        ]

    # -- run lifecycle ------------------------------------------------------

    def run_audit(self, profile_id: str) -> AuditRun:
        profile = get_profile(self.store, profile_id)
        if profile is None:
            raise ProfileError(f"unknown profile {profile_id!r}")
        topology = topology_from_store(self.store)
        host_ids = selected_hosts(profile, topology)
        host_records = [topology.host(h) for h in host_ids]

        run = AuditRun.new(profile_id, self.clock())
        run.hosts = tuple(host_ids)
        self._save_run(run)

        run.advance(RunState.COLLECTING, self.clock())
        self._save_run(run)
        bundles, errors = self._collect(host_records)
        run.host_errors = errors
        if not bundles:
            run.advance(RunState.FAILED, self.clock(), error="no_evidence")
            self._save_run(run)
            return run

        host_docs: list[Bom] = []
        for host_id in sorted(bundles):
            host_docs.extend(self._forge_host(bundles[host_id], profile.categories))
        linked = link_to_profile(host_docs, profile_id)
        self._persist_boms(linked)
        run.bom_serials = tuple(b.serial_number for b in linked)
        run.advance(RunState.BOMS_BUILT, self.clock())
        self._save_run(run)

        run.advance(RunState.SDT_REQUESTED, self.clock())
        self._save_run(run)
        try:
            created = self.manager.create(
                profile_id,
                [serialize_bom(b) for b in linked],
                options=self.sdt_options or None,
            )
        except TransportUnavailable:
            run.advance(RunState.FAILED, self.clock(), error="transport")
            self._save_run(run)
            return run
        except RequestRejected as exc:
            run.advance(RunState.FAILED, self.clock(), error=f"update_rejected:{exc.code}")
            self._save_run(run)
            return run
        run.sdt_id = created["sdtId"]
        run.representation_version = int(created["representationVersion"])
        run.advance(RunState.SDT_READY, self.clock())
        self._save_run(run)
        return run

    def update_audit(self, run_id: str, hosts: Optional[Iterable[str]] = None) -> AuditRun:
        """Rescan, diff against the persisted documents, and push deltas.

        Stored documents are replaced only after the manager accepts the
        update, so a failed push leaves the previous inventory intact.
        """
        run = self.load_run(run_id)
        profile = get_profile(self.store, run.profile_id)
        if profile is None:
            raise ProfileError(f"unknown profile {run.profile_id!r}")
        rescan_ids = sorted(set(hosts) if hosts is not None else set(run.hosts))
        unknown = [h for h in rescan_ids if h not in run.hosts]
        if unknown:
            raise ProfileError(f"hosts not part of this run: {', '.join(unknown)}")

        topology = topology_from_store(self.store)
        run.advance(RunState.UPDATING, self.clock())
        self._save_run(run)

        bundles, errors = self._collect([topology.host(h) for h in rescan_ids])
        if errors:
            run.host_errors = {**run.host_errors, **errors}
            run.advance(RunState.FAILED, self.clock(), error="no_evidence")
            self._save_run(run)
            return run

        previous: dict[str, Bom] = {}
        for serial in run.bom_serials:
            stored = self.stored_bom(serial)
            if stored is None:
                raise UnknownRun(f"{run_id}: stored document {serial} is missing")
            previous[serial] = stored
        # link_to_profile puts the profile manifest first.
        manifest = previous[run.bom_serials[0]]
        old_hosts = {s: b for s, b in previous.items() if b is not manifest}

        # Rebuild rescanned hosts at the old document version first so an
        # unchanged host compares byte-equal and is carried over untouched.
        changed = False
        rebuilt: dict[str, Bom] = {}
        for host_id in rescan_ids:
            for doc in self._forge_host(bundles[host_id], profile.categories):
                old = old_hosts[doc.serial_number]
                candidate = replace(doc, version=old.version)
                if serialize_bom(candidate) != serialize_bom(old.with_links(())):
                    changed = True
                    rebuilt[doc.serial_number] = doc
        if not changed:
            run.advance(RunState.SDT_READY, self.clock())
            self._save_run(run)
            return run

        new_docs: list[Bom] = []
        for serial, old in old_hosts.items():
            fresh = rebuilt.get(serial)
            if fresh is not None:
                new_docs.append(replace(fresh, version=old.version + 1))
            else:
                new_docs.append(replace(old.with_links(()), version=old.version + 1))
        linked = link_to_profile(new_docs, run.profile_id, version=manifest.version + 1)
        deltas = [diff_boms(previous[b.serial_number], b) for b in linked]

        try:
            result = self.manager.update(
                run.sdt_id or "",
                expected_version=run.representation_version,
                deltas=[delta_to_dict(d) for d in deltas],
            )
        except TransportUnavailable:
            run.advance(RunState.FAILED, self.clock(), error="transport")
            self._save_run(run)
            return run
        except RequestRejected as exc:
            run.advance(RunState.FAILED, self.clock(), error=f"update_rejected:{exc.code}")
            self._save_run(run)
            return run

        self._persist_boms(linked)
        run.representation_version = int(result["representationVersion"])
        run.advance(RunState.SDT_READY, self.clock())
        self._save_run(run)
        return run

    def status(self, run_id: str) -> AuditRun:
        return self.load_run(run_id)


class PeriodicSync:
    """Drives update_audit on a fixed cadence; call tick() from any loop."""

    def __init__(
        self,
        service: AuditService,
        run_id: str,
        interval_seconds: float,
        clock: Callable[[], float] = time.time,
    ) -> None:
        if interval_seconds <= 0:
            raise ValueError("interval_seconds must be positive")
        self.service = service
        self.run_id = run_id
        self.interval_seconds = interval_seconds
        self.clock = clock
        self.last_sync = clock()

    def due(self, now: Optional[float] = None) -> bool:
        now = self.clock() if now is None else now
        return now - self.last_sync >= self.interval_seconds

    def tick(self, now: Optional[float] = None) -> Optional[Any]:
        """Runs one update when the interval has elapsed; returns the run."""
        now = self.clock() if now is None else now
        if not self.due(now):
            return None
        self.last_sync = now
        return self.service.update_audit(self.run_id)
