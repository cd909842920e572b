"""HTTP client for the lifecycle manager API."""

from __future__ import annotations

from typing import Any, Optional

from ..jsonhttp import expect_json

__all__ = ["ManagerClient"]


class ManagerClient:
    """Thin typed wrapper; raises TransportUnavailable when the manager is
    down and RequestRejected when it answers with an error status."""

    def __init__(self, base_url: str, timeout: float = 60.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout

    def create(
        self,
        profile_id: str,
        bom_texts: list[str],
        options: Optional[dict[str, Any]] = None,
    ) -> dict[str, Any]:
        body: dict[str, Any] = {"profileId": profile_id, "boms": bom_texts}
        if options:
            body["options"] = options
        return expect_json("POST", f"{self.base_url}/sdts", body=body, timeout=self.timeout)

    def update(
        self,
        sdt_id: str,
        expected_version: int,
        deltas: Optional[list[dict[str, Any]]] = None,
        bom_texts: Optional[list[str]] = None,
    ) -> dict[str, Any]:
        body: dict[str, Any] = {"expectedVersion": expected_version}
        if deltas is not None:
            body["deltas"] = deltas
        if bom_texts is not None:
            body["boms"] = bom_texts
        return expect_json(
            "PUT", f"{self.base_url}/sdts/{sdt_id}", body=body, timeout=self.timeout
        )

    def destroy(self, sdt_id: str) -> None:
        expect_json("DELETE", f"{self.base_url}/sdts/{sdt_id}", timeout=self.timeout)

    def get(self, sdt_id: str) -> dict[str, Any]:
        return expect_json("GET", f"{self.base_url}/sdts/{sdt_id}", timeout=self.timeout)

    def list(self) -> list[dict[str, Any]]:
        payload = expect_json("GET", f"{self.base_url}/sdts", timeout=self.timeout)
        return payload.get("sdts", []) if isinstance(payload, dict) else []

    def footprint(self, sdt_id: str) -> int:
        payload = expect_json(
            "GET", f"{self.base_url}/sdts/{sdt_id}/footprint", timeout=self.timeout
        )
        return int(payload["footprintBytes"])
