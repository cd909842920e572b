"""Lifecycle core: descriptor registry plus create/update/destroy handlers.

Create follows interface -> core -> LCM -> runtime deploy -> data-adapter
push -> controller confirmation -> response; any failure after deploy tears
the instance down again so no orphan keeps running. Updates are guarded by
an optimistic representation-version precondition.
"""

from __future__ import annotations

import json
import secrets
import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Iterable, Optional, Sequence

from ..bom import Bom, BomParseError, BomSchemaError, BomValidationError, parse_bom
from ..bom.diff import DeltaMismatch, apply_delta, delta_from_dict
from ..instance import RepresentationError, Scope
from ..jsonhttp import HttpError, RequestRejected, TransportUnavailable
from .adapter import DataAdapter
from .runtime import (
    InstanceConfig,
    PlacementStrategy,
    RuntimeAdapter,
    SingleRuntimePlacement,
)
from .trace import TraceRecorder, TraceSpan

__all__ = ["SdtDescriptor", "SdtManager", "SdtState"]

ID_PATTERN = "[0-9a-f]{32}"


class SdtState(str, Enum):
    DEPLOYING = "DEPLOYING"
    READY = "READY"
    UPDATING = "UPDATING"
    DESTROYED = "DESTROYED"
    ERROR = "ERROR"


@dataclass
class SdtDescriptor:
    sdt_id: str
    state: SdtState
    profile_id: str
    created_at: float
    updated_at: float
    endpoint: Optional[str] = None
    representation_version: int = 0
    error: Optional[str] = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "sdtId": self.sdt_id,
            "state": self.state.value,
            "profileId": self.profile_id,
            "createdAt": self.created_at,
            "updatedAt": self.updated_at,
            "endpoint": self.endpoint,
            "representationVersion": self.representation_version,
        }
        if self.error is not None:
            doc["error"] = self.error
        return doc


@dataclass
class _SdtRecord:
    descriptor: SdtDescriptor
    write_token: str
    runtime: Optional[RuntimeAdapter] = None
    boms: dict[str, Bom] = field(default_factory=dict)
    lock: threading.RLock = field(default_factory=threading.RLock)


def _scope_names(values: Iterable[Any]) -> tuple[str, ...]:
    names = []
    for value in values:
        Scope(str(value))  # raises ValueError on unknown scope names
        names.append(str(value))
    return tuple(names)


class SdtManager:
    def __init__(
        self,
        runtimes: Sequence[RuntimeAdapter],
        tracer: Optional[TraceRecorder] = None,
        placement: Optional[PlacementStrategy] = None,
        adapter: Optional[DataAdapter] = None,
        clock: Callable[[], float] = time.time,
    ):
        if not runtimes:
            raise ValueError("at least one runtime is required")
        self._runtimes = tuple(runtimes)
        self.tracer = tracer or TraceRecorder()
        self._placement = placement or SingleRuntimePlacement()
        self._adapter = adapter or DataAdapter()
        self._clock = clock
        self._records: dict[str, _SdtRecord] = {}
        self._registry_lock = threading.RLock()

    # -- registry -------------------------------------------------------------

    def allocate_id(self) -> str:
        """32 lowercase hex chars from a CSPRNG; registry collisions retried."""
        while True:
            sdt_id = secrets.token_hex(16)
            with self._registry_lock:
                if sdt_id not in self._records:
                    return sdt_id

    def _record(self, sdt_id: str) -> _SdtRecord:
        with self._registry_lock:
            record = self._records.get(sdt_id)
        if record is None:
            raise HttpError(404, "not_found", f"no such sdt: {sdt_id}")
        return record

    def _touch(self, descriptor: SdtDescriptor) -> None:
        descriptor.updated_at = max(descriptor.updated_at, self._clock())

    def get_descriptor(self, sdt_id: str) -> dict[str, Any]:
        return self._record(sdt_id).descriptor.to_dict()

    def list_descriptors(self) -> list[dict[str, Any]]:
        with self._registry_lock:
            descriptors = [r.descriptor for r in self._records.values()]
        ordered = sorted(descriptors, key=lambda d: (d.created_at, d.sdt_id))
        return [d.to_dict() for d in ordered]

    def current_boms(self, sdt_id: str) -> dict[str, Bom]:
        return dict(self._record(sdt_id).boms)

    # -- create ---------------------------------------------------------------

    def _parse_boms(self, texts: Any) -> list[Bom]:
        if not isinstance(texts, list) or not texts:
            raise HttpError(400, "bad_request", "boms must be a non-empty list")
        parsed: list[Bom] = []
        serials: set[str] = set()
        for index, text in enumerate(texts):
            if not isinstance(text, str):
                raise HttpError(400, "invalid_bom", f"boms[{index}] must be a string document")
            try:
                bom = parse_bom(text, strict=False)
            except (BomParseError, BomSchemaError, BomValidationError) as err:
                raise HttpError(400, "invalid_bom", f"boms[{index}]: {err}") from err
            if bom.serial_number in serials:
                raise HttpError(
                    400, "invalid_bom", f"duplicate serial number {bom.serial_number}"
                )
            serials.add(bom.serial_number)
            parsed.append(bom)
        return parsed

    def _parse_tokens(self, options: Any) -> dict[str, tuple[str, ...]]:
        if options is None:
            return {}
        if not isinstance(options, dict):
            raise HttpError(400, "bad_request", "options must be an object")
        tokens = options.get("tokens") or {}
        if not isinstance(tokens, dict):
            raise HttpError(400, "bad_request", "options.tokens must be an object")
        provisioned: dict[str, tuple[str, ...]] = {}
        for token, scopes in tokens.items():
            if not isinstance(scopes, list):
                raise HttpError(400, "bad_request", "token scopes must be a list")
            try:
                provisioned[str(token)] = _scope_names(scopes)
            except ValueError as err:
                raise HttpError(400, "bad_request", f"unknown scope: {err}") from err
        return provisioned

    def handle_create(self, payload: Any, span: Optional[TraceSpan] = None) -> dict[str, Any]:
        span = span or self.tracer.span("create")
        span.record("core")
        if not isinstance(payload, dict):
            raise HttpError(400, "bad_request", "body must be a JSON object")
        profile_id = payload.get("profileId")
        if not isinstance(profile_id, str) or not profile_id:
            raise HttpError(400, "bad_request", "profileId must be a non-empty string")

        # All validation happens before anything deploys.
        boms = self._parse_boms(payload.get("boms"))
        try:
            states = self._adapter.process(boms)
        except RepresentationError as err:
            raise HttpError(400, "invalid_bom", str(err)) from err
        user_tokens = self._parse_tokens(payload.get("options"))

        write_token = secrets.token_hex(16)
        tokens = dict(user_tokens)
        tokens[write_token] = ("READ", "WRITE_REPRESENTATION", "ADMIN")

        with self._registry_lock:
            sdt_id = self.allocate_id()
            now = self._clock()
            record = _SdtRecord(
                descriptor=SdtDescriptor(
                    sdt_id=sdt_id,
                    state=SdtState.DEPLOYING,
                    profile_id=profile_id,
                    created_at=now,
                    updated_at=now,
                ),
                write_token=write_token,
            )
            self._records[sdt_id] = record

        with record.lock:
            descriptor = record.descriptor
            config = InstanceConfig(sdt_id=sdt_id, tokens=tokens)
            span.record("lcm")
            runtime = self._placement.choose(self._runtimes, config)
            record.runtime = runtime
            try:
                endpoint = runtime.deploy_instance(config)
            except Exception as err:
                descriptor.state = SdtState.ERROR
                descriptor.error = "deploy"
                self._touch(descriptor)
                raise HttpError(502, "deploy", f"runtime deploy failed: {err}") from err
            span.record("deploy")
            descriptor.endpoint = endpoint

            span.record("data_adapter")
            try:
                self._adapter.push(endpoint, write_token, 1, states)
            except (TransportUnavailable, RequestRejected) as err:
                runtime.destroy_instance(endpoint)  # no orphans
                descriptor.endpoint = None
                descriptor.state = SdtState.ERROR
                descriptor.error = "representation"
                self._touch(descriptor)
                raise HttpError(
                    502, "representation", f"representation build failed: {err}"
                ) from err
            span.record("controller")

            record.boms = {b.serial_number: b for b in boms}
            descriptor.representation_version = 1
            descriptor.state = SdtState.READY
            self._touch(descriptor)
            span.record("confirm")
            return descriptor.to_dict()

    # -- update ---------------------------------------------------------------

    def _updated_boms(self, record: _SdtRecord, payload: dict[str, Any]) -> dict[str, Bom]:
        new_boms = dict(record.boms)
        if payload.get("boms"):
            for bom in self._parse_boms(payload["boms"]):
                new_boms[bom.serial_number] = bom
        deltas = payload.get("deltas") or []
        if not isinstance(deltas, list):
            raise HttpError(400, "bad_request", "deltas must be a list")
        for index, delta_doc in enumerate(deltas):
            if not isinstance(delta_doc, dict):
                raise HttpError(400, "invalid_delta", f"deltas[{index}] must be an object")
            try:
                delta = delta_from_dict(delta_doc)
            except (KeyError, ValueError, TypeError) as err:
                raise HttpError(400, "invalid_delta", f"deltas[{index}]: {err}") from err
            base = new_boms.get(delta.base_serial)
            if base is None:
                raise HttpError(
                    400,
                    "unknown_document",
                    f"deltas[{index}] targets unknown serial {delta.base_serial}",
                )
            try:
                new_boms[delta.base_serial] = apply_delta(base, delta)
            except DeltaMismatch as err:
                raise HttpError(409, "delta_mismatch", f"deltas[{index}]: {err}") from err
        return new_boms

    def handle_update(
        self, sdt_id: str, payload: Any, span: Optional[TraceSpan] = None
    ) -> dict[str, Any]:
        span = span or self.tracer.span("update")
        span.record("core")
        record = self._record(sdt_id)
        if not isinstance(payload, dict):
            raise HttpError(400, "bad_request", "body must be a JSON object")

        with record.lock:
            descriptor = record.descriptor
            if descriptor.state == SdtState.DESTROYED:
                raise HttpError(409, "destroyed", f"sdt {sdt_id} is destroyed")
            if descriptor.state != SdtState.READY:
                raise HttpError(
                    409, "state", f"sdt {sdt_id} is not updatable in state {descriptor.state.value}"
                )
            expected = payload.get("expectedVersion")
            if not isinstance(expected, int) or isinstance(expected, bool):
                raise HttpError(400, "bad_request", "expectedVersion must be an integer")
            if expected != descriptor.representation_version:
                raise HttpError(
                    409,
                    "version_conflict",
                    f"expected version {descriptor.representation_version}, got {expected}",
                )

            # Validation failures leave the descriptor READY and unchanged.
            new_boms = self._updated_boms(record, payload)
            try:
                states = self._adapter.process(new_boms.values())
            except RepresentationError as err:
                raise HttpError(400, "invalid_bom", str(err)) from err

            descriptor.state = SdtState.UPDATING
            self._touch(descriptor)
            span.record("data_adapter")
            try:
                self._adapter.push(
                    descriptor.endpoint or "",
                    record.write_token,
                    descriptor.representation_version + 1,
                    states,
                )
            except TransportUnavailable as err:
                descriptor.state = SdtState.ERROR
                descriptor.error = "unreachable"
                self._touch(descriptor)
                raise HttpError(502, "unreachable", f"instance unreachable: {err}") from err
            except RequestRejected as err:
                # The instance refused atomically; nothing changed on it.
                descriptor.state = SdtState.READY
                self._touch(descriptor)
                raise HttpError(409, "update_rejected", str(err)) from err
            span.record("controller")

            record.boms = new_boms
            descriptor.representation_version += 1
            descriptor.state = SdtState.READY
            self._touch(descriptor)
            return {
                "sdtId": sdt_id,
                "representationVersion": descriptor.representation_version,
            }

    # -- destroy / inspect ------------------------------------------------------

    def handle_destroy(self, sdt_id: str) -> None:
        record = self._record(sdt_id)
        with record.lock:
            descriptor = record.descriptor
            if descriptor.state == SdtState.DESTROYED:
                return  # idempotent
            if descriptor.endpoint and record.runtime is not None:
                record.runtime.destroy_instance(descriptor.endpoint)
            descriptor.state = SdtState.DESTROYED
            self._touch(descriptor)

    def footprint(self, sdt_id: str) -> int:
        record = self._record(sdt_id)
        with record.lock:
            descriptor = record.descriptor
            if descriptor.state == SdtState.DESTROYED:
                raise HttpError(409, "destroyed", f"sdt {sdt_id} is destroyed")
            if not descriptor.endpoint:
                raise HttpError(409, "state", f"sdt {sdt_id} has no live instance")
            endpoint, token = descriptor.endpoint, record.write_token
        try:
            doc = self._adapter.export(endpoint, token)
        except TransportUnavailable as err:
            raise HttpError(502, "unreachable", f"instance unreachable: {err}") from err
        except RequestRejected as err:
            raise HttpError(502, "export_failed", str(err)) from err
        return len(json.dumps(doc, sort_keys=True, separators=(",", ":")).encode("utf-8"))

    def close(self) -> None:
        for runtime in self._runtimes:
            closer = getattr(runtime, "close", None)
            if callable(closer):
                closer()
