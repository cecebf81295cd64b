"""Stateless JSON-over-HTTP reward service.

Endpoints:
  GET  /health           -> {"status": "ok", "profiles": [...], "mode": ...}
  POST /v1/reward        -> RewardRequest in, RewardResponse out
  POST /v1/reward/batch  -> array in, array out, order preserving

Every request builds its own simulator instances, so concurrent handlers
never share mutable state. Exact request/response schemas live in
docs/schemas/.
"""

from __future__ import annotations

import json
import logging
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

from .llm import ChatClient
from .reward import (
    DETERMINISTIC,
    MODES,
    ReferenceExecutionError,
    RewardRequest,
    compute_reward,
)
from .sim import RobotProfile, builtin_profiles

log = logging.getLogger(__name__)

REQUEST_TIMEOUT = 30.0
SECRET_HEADER = "X-Reward-Key"


class RequestError(Exception):
    def __init__(self, status: int, message: str, field: str | None = None):
        super().__init__(message)
        self.status = status
        self.message = message
        self.field = field


class RewardService:
    """Request validation and dispatch, independent of the transport."""

    def __init__(
        self,
        profiles: dict[str, RobotProfile] | None = None,
        default_mode: str = DETERMINISTIC,
        client: ChatClient | None = None,
        secret: str | None = None,
    ):
        if default_mode not in MODES:
            raise ValueError(f"unknown mode {default_mode!r}")
        self.profiles = profiles or builtin_profiles()
        self.default_mode = default_mode
        self.client = client
        self.secret = secret

    def health(self) -> dict:
        return {
            "status": "ok",
            "profiles": sorted(self.profiles),
            "mode": self.default_mode,
        }

    def parse_request(self, body: dict) -> RewardRequest:
        if not isinstance(body, dict):
            raise RequestError(400, "request body must be a JSON object")
        for fieldname in ("candidate_code", "reference_code"):
            value = body.get(fieldname)
            if not isinstance(value, str) or not value.strip():
                raise RequestError(
                    400, f"{fieldname} must be a non-empty string", fieldname
                )
        profile = body.get("robot_profile", "uav")
        if not isinstance(profile, str):
            raise RequestError(400, "robot_profile must be a string", "robot_profile")
        if profile not in self.profiles:
            raise RequestError(422, f"unknown robot profile {profile!r}", "robot_profile")
        mode = body.get("mode", self.default_mode)
        if mode not in MODES:
            raise RequestError(400, f"mode must be one of {MODES}", "mode")
        if mode != DETERMINISTIC and self.client is None:
            raise RequestError(422, f"mode {mode!r} is not configured on this server", "mode")
        overrides = body.get("match_overrides") or {}
        if not isinstance(overrides, dict):
            raise RequestError(400, "match_overrides must be an object", "match_overrides")
        try:
            return RewardRequest(
                candidate_code=body["candidate_code"],
                reference_code=body["reference_code"],
                robot_profile=profile,
                mode=mode,
                match_overrides=overrides,
            )
        except ValueError as exc:
            raise RequestError(400, str(exc)) from exc

    def score(self, body: dict) -> dict:
        req = self.parse_request(body)
        try:
            return compute_reward(req, self.profiles, self.client).to_dict()
        except ValueError as exc:
            raise RequestError(400, str(exc)) from exc

    def score_batch(self, body) -> list[dict]:
        if not isinstance(body, list):
            raise RequestError(400, "batch body must be a JSON array")
        requests = []
        for i, item in enumerate(body):
            try:
                requests.append(self.parse_request(item))
            except RequestError as exc:
                raise RequestError(
                    exc.status, f"item {i}: {exc.message}", exc.field
                ) from exc
        return [
            compute_reward(req, self.profiles, self.client).to_dict()
            for req in requests
        ]


class _Handler(BaseHTTPRequestHandler):
    service: RewardService
    timeout = REQUEST_TIMEOUT
    protocol_version = "HTTP/1.1"
    # one buffered write per response and no Nagle stalls on loopback
    wbufsize = -1
    disable_nagle_algorithm = True

    def log_message(self, fmt, *args):  # noqa: A002 - stdlib signature
        log.debug("%s - %s", self.address_string(), fmt % args)

    def _write(self, status: int, payload) -> None:
        body = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status: int, message: str, field: str | None = None) -> None:
        self._write(status, {"error": {"message": message, "field": field}})

    def _authorized(self) -> bool:
        if self.service.secret is None:
            return True
        return self.headers.get(SECRET_HEADER, "") == self.service.secret

    def do_GET(self):  # noqa: N802 - stdlib naming
        if not self._authorized():
            return self._error(401, "missing or wrong shared secret")
        if self.path == "/health":
            return self._write(200, self.service.health())
        return self._error(404, f"no such endpoint {self.path}")

    def do_POST(self):  # noqa: N802 - stdlib naming
        if not self._authorized():
            return self._error(401, "missing or wrong shared secret")
        try:
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            body = json.loads(raw.decode("utf-8")) if raw else None
        except (ValueError, UnicodeDecodeError) as exc:
            return self._error(400, f"invalid JSON body: {exc}")
        if body is None:
            return self._error(400, "empty request body")

        try:
            if self.path == "/v1/reward":
                return self._write(200, self.service.score(body))
            if self.path == "/v1/reward/batch":
                return self._write(200, self.service.score_batch(body))
            return self._error(404, f"no such endpoint {self.path}")
        except RequestError as exc:
            return self._error(exc.status, exc.message, exc.field)
        except ReferenceExecutionError as exc:
            return self._error(500, str(exc))
        except Exception as exc:  # pragma: no cover - defensive
            log.exception("internal error")
            return self._error(500, f"internal error: {exc}")


class _Server(ThreadingHTTPServer):
    daemon_threads = True
    request_queue_size = 256  # hold bursts of concurrent connections


def serve(
    host: str = "127.0.0.1",
    port: int = 8700,
    service: RewardService | None = None,
) -> ThreadingHTTPServer:
    """Bind the service; caller decides between serve_forever and a thread."""
    service = service or RewardService()
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return _Server((host, port), handler)


def serve_background(service: RewardService | None = None, host: str = "127.0.0.1"):
    """Start on an ephemeral port in a daemon thread; returns (server, url)."""
    server = serve(host=host, port=0, service=service)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    return server, f"http://{host}:{server.server_address[1]}"
