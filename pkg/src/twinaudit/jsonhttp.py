"""Shared JSON-over-HTTP plumbing.

One ThreadingHTTPServer carries many mounted services, each under a path
prefix. Services implement `dispatch(request) -> (status, payload)` and
signal failures with HttpError; the handler turns both into JSON bodies.
Every error body has the shape {"code": ..., "message": ...}.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Any, Mapping, Optional
from urllib.parse import parse_qsl, urlsplit

import requests

__all__ = [
    "ApiRequest",
    "HttpError",
    "JsonApi",
    "RequestRejected",
    "SharedJsonServer",
    "TransportUnavailable",
    "bearer_token",
    "expect_json",
    "http_json",
]


class HttpError(Exception):
    """Failure a service wants reported as an HTTP status + error body."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code
        self.message = message

    def body(self) -> dict[str, str]:
        return {"code": self.code, "message": self.message}


class TransportUnavailable(Exception):
    """The remote service could not be reached at all."""


class RequestRejected(Exception):
    """The remote service answered with an error status."""

    def __init__(self, status: int, code: str, message: str):
        super().__init__(f"{status} {code}: {message}")
        self.status = status
        self.code = code
        self.message = message


@dataclass
class ApiRequest:
    method: str
    path: str
    query: dict[str, str] = field(default_factory=dict)
    headers: Mapping[str, str] = field(default_factory=dict)
    body: Any = None


class JsonApi:
    """A mountable service. Subclasses override dispatch."""

    def dispatch(self, request: ApiRequest) -> tuple[int, Any]:
        raise NotImplementedError


def bearer_token(headers: Mapping[str, str]) -> Optional[str]:
    value = headers.get("Authorization") or headers.get("authorization") or ""
    if value.startswith("Bearer "):
        return value[len("Bearer "):].strip() or None
    return None


class _Handler(BaseHTTPRequestHandler):
    server_version = "twinaudit"
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args: Any) -> None:  # quiet by design
        pass

    def _respond(self, status: int, payload: Any) -> None:
        if status == 204 or payload is None and status < 400:
            body = b""
        else:
            body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        if body:
            self.wfile.write(body)

    def _handle(self, method: str) -> None:
        parts = urlsplit(self.path)
        path = parts.path or "/"
        mount = self.server.resolve(path)  # type: ignore[attr-defined]
        if mount is None:
            self._respond(404, {"code": "not_found", "message": f"no service at {path}"})
            return

        prefix, api = mount
        sub_path = path[len(prefix):] or "/"
        body: Any = None
        length = int(self.headers.get("Content-Length") or 0)
        if length:
            raw = self.rfile.read(length)
            try:
                body = json.loads(raw.decode("utf-8"))
            except (UnicodeDecodeError, json.JSONDecodeError):
                self._respond(400, {"code": "bad_request", "message": "body is not valid JSON"})
                return

        request = ApiRequest(
            method=method,
            path=sub_path,
            query=dict(parse_qsl(parts.query)),
            headers=dict(self.headers.items()),
            body=body,
        )
        try:
            status, payload = api.dispatch(request)
        except HttpError as err:
            self._respond(err.status, err.body())
            return
        except Exception as err:  # service bug: report, keep the server alive
            self._respond(500, {"code": "internal", "message": str(err)})
            return
        self._respond(status, payload)

    def do_GET(self) -> None:
        self._handle("GET")

    def do_POST(self) -> None:
        self._handle("POST")

    def do_PUT(self) -> None:
        self._handle("PUT")

    def do_DELETE(self) -> None:
        self._handle("DELETE")


class _Server(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int]):
        super().__init__(address, _Handler)
        self._mounts: dict[str, JsonApi] = {}
        self._mounts_lock = threading.Lock()

    def resolve(self, path: str) -> Optional[tuple[str, JsonApi]]:
        with self._mounts_lock:
            candidates = sorted(self._mounts, key=len, reverse=True)
            for prefix in candidates:
                if path == prefix or path.startswith(prefix + "/"):
                    return prefix, self._mounts[prefix]
        return None

    def add_mount(self, prefix: str, api: JsonApi) -> None:
        with self._mounts_lock:
            if prefix in self._mounts:
                raise ValueError(f"prefix already mounted: {prefix!r}")
            self._mounts[prefix] = api

    def remove_mount(self, prefix: str) -> bool:
        with self._mounts_lock:
            return self._mounts.pop(prefix, None) is not None

    def mounted_prefixes(self) -> list[str]:
        with self._mounts_lock:
            return sorted(self._mounts)


class SharedJsonServer:
    """One listening socket shared by many prefix-mounted services."""

    def __init__(self, host: str = "127.0.0.1", port: int = 0):
        self._server = _Server((host, port))
        self._thread: Optional[threading.Thread] = None

    @property
    def base_url(self) -> str:
        host, port = self._server.server_address[:2]
        return f"http://{host}:{port}"

    def url_for(self, prefix: str) -> str:
        return self.base_url + prefix

    def start(self) -> "SharedJsonServer":
        if self._thread is None:
            self._thread = threading.Thread(
                target=self._server.serve_forever, name="twinaudit-http", daemon=True
            )
            self._thread.start()
        return self

    def stop(self) -> None:
        if self._thread is not None:
            self._server.shutdown()
            self._thread.join(timeout=5)
            self._thread = None
        self._server.server_close()

    def mount(self, prefix: str, api: JsonApi) -> str:
        if not prefix.startswith("/") or prefix.endswith("/"):
            raise ValueError("mount prefix must start with '/' and not end with '/'")
        self._server.add_mount(prefix, api)
        return self.url_for(prefix)

    def unmount(self, prefix: str) -> bool:
        return self._server.remove_mount(prefix)

    def mounts(self) -> list[str]:
        return self._server.mounted_prefixes()

    def service_at(self, prefix: str) -> Optional[JsonApi]:
        mount = self._server.resolve(prefix)
        return mount[1] if mount is not None and mount[0] == prefix else None


def http_json(
    method: str,
    url: str,
    body: Any = None,
    token: Optional[str] = None,
    timeout: float = 30.0,
) -> tuple[int, Any]:
    """One JSON request/response exchange. Connection-level failures raise
    TransportUnavailable; error statuses are returned, not raised."""
    headers = {"Accept": "application/json"}
    if token is not None:
        headers["Authorization"] = f"Bearer {token}"
    try:
        response = requests.request(
            method, url, json=body, headers=headers, timeout=timeout
        )
    except requests.RequestException as err:
        raise TransportUnavailable(str(err)) from err
    if not response.content:
        return response.status_code, None
    try:
        return response.status_code, response.json()
    except ValueError:
        return response.status_code, None


def expect_json(
    method: str,
    url: str,
    body: Any = None,
    token: Optional[str] = None,
    timeout: float = 30.0,
) -> Any:
    """Like http_json but raises RequestRejected on any error status."""
    status, payload = http_json(method, url, body=body, token=token, timeout=timeout)
    if status >= 400:
        detail = payload if isinstance(payload, dict) else {}
        raise RequestRejected(
            status,
            str(detail.get("code", "error")),
            str(detail.get("message", f"request failed with status {status}")),
        )
    return payload
