"""HTTP+JSON front for vouchers and bookings.

Endpoints (lab-authenticated routes use HTTP Basic with lab credentials;
citizen routes take no identity of any kind):

    GET  /api/health                                   liveness probe
    GET  /api/slots?from=ISO&to=ISO                    open appointment slots
    POST /api/redeem        {code, slot_id}            redeem + book (citizen)
    GET  /api/results/{confirmation_code}              result lookup (citizen)
    POST /api/lab/vouchers            {limit?, ttl_days?}   issue voucher (lab)
    POST /api/lab/vouchers/single-use {}                    single-use voucher (lab)
    POST /api/lab/performed {confirmation_code}             mark test taken (lab)
    POST /api/lab/results   {confirmation_code, result}     post result (lab)
    POST /api/admin/locations {label, address}              add location (lab)
    POST /api/admin/slots   {location_id, slots: [...]}     add slots (lab)

Statuses: 404 unknown code/slot, 410 exhausted or expired voucher, 409 slot
full or wrong record state, 429 rate limited (with Retry-After), 401 failed
lab auth, 400 malformed input. Error bodies are fixed per error kind and
never echo the submitted code, so the answer for an erased code is
byte-identical to the answer for one that never existed.

The server handles each connection on its own thread; correctness under
concurrency comes entirely from the store-level atomicity of redeem and
book. A background sweeper erases expired vouchers and stale confirmations.
"""

from __future__ import annotations

import base64
import json
import re
import threading
from datetime import timedelta
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from . import booking as bk
from . import codes
from .config import ServiceConfig
from .errors import (
    AcdcError,
    ChecksumMismatch,
    Exhausted,
    Expired,
    MalformedCode,
    NotFound,
    SlotFull,
    StorageUnavailable,
    UnknownLocation,
    UnknownSlot,
    WrongState,
)
from .labauth import LabRegistry
from .ratelimit import TokenBucketLimiter, client_key
from .storage import open_store
from .timeutil import iso, parse_iso, utcnow
from .vouchers import VoucherLedger

_RESULTS_PATH = re.compile(r"^/api/results/([^/]+)$")

# (status, body) per error kind. Bodies are constants: nothing from the
# request may leak into them.
_ERROR_MAP: list[tuple[type, int, dict]] = [
    (NotFound, 404, {"error": "not_found"}),
    (Exhausted, 410, {"error": "voucher_exhausted"}),
    (Expired, 410, {"error": "voucher_expired"}),
    (SlotFull, 409, {"error": "slot_full"}),
    (WrongState, 409, {"error": "wrong_state"}),
    (UnknownSlot, 404, {"error": "unknown_slot"}),
    (UnknownLocation, 404, {"error": "unknown_location"}),
    (MalformedCode, 400, {"error": "malformed_code"}),
    (ChecksumMismatch, 400, {"error": "checksum_mismatch"}),
    (StorageUnavailable, 503, {"error": "storage_unavailable"}),
]


def canonical_json(body: dict) -> bytes:
    return json.dumps(body, sort_keys=True, separators=(",", ":")).encode("utf-8")


class ApiResponse(Exception):
    """Short-circuit carrier for a finished (status, body, headers) triple."""

    def __init__(self, status: int, body: dict, headers: dict[str, str] | None = None):
        super().__init__(status)
        self.status = status
        self.body = body
        self.headers = headers or {}


class TracingApi:
    """Transport-free request handling; the HTTP layer is a thin shell."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        store_dir = config.store_dir
        self.voucher_store = open_store(store_dir, "vouchers")
        self.confirmation_store = open_store(store_dir, "confirmations")
        self.slot_store = open_store(store_dir, "slots")
        self.location_store = open_store(store_dir, "locations")
        self.vouchers = VoucherLedger(self.voucher_store, exhausted_grace=config.exhausted_grace)
        self.flow = bk.TestingFlow(
            locations=self.location_store,
            slots=self.slot_store,
            confirmations=self.confirmation_store,
            vouchers=self.vouchers,
        )
        self.labs = (
            LabRegistry.load(config.lab_credentials) if config.lab_credentials else LabRegistry()
        )
        self.limiter = TokenBucketLimiter(
            capacity=config.rate_limit_burst,
            refill_per_second=config.rate_limit_per_hour / 3600.0,
        )

    # -- plumbing ----------------------------------------------------------

    def _fail(self, exc: AcdcError) -> ApiResponse:
        for etype, status, body in _ERROR_MAP:
            if isinstance(exc, etype):
                return ApiResponse(status, body)
        return ApiResponse(500, {"error": "internal"})

    def _require_lab(self, headers: dict[str, str]) -> None:
        auth = headers.get("authorization", "")
        if auth.startswith("Basic "):
            try:
                decoded = base64.b64decode(auth[6:]).decode("utf-8")
                lab_id, _, secret = decoded.partition(":")
            except (ValueError, UnicodeDecodeError):
                lab_id, secret = "", ""
            if self.labs.verify(lab_id, secret):
                return
        raise ApiResponse(
            401, {"error": "unauthorized"}, {"WWW-Authenticate": 'Basic realm="lab"'}
        )

    def _throttle(self, client_ip: str) -> None:
        if not self.config.rate_limit_enabled:
            return
        decision = self.limiter.check(client_key(client_ip), utcnow().timestamp())
        if not decision.allowed:
            retry = max(1, int(decision.retry_after + 0.999))
            raise ApiResponse(
                429,
                {"error": "rate_limited", "retry_after": retry},
                {"Retry-After": str(retry)},
            )

    # -- request entry point ------------------------------------------------

    def handle(
        self,
        method: str,
        path: str,
        query: dict[str, list[str]],
        body: dict | None,
        headers: dict[str, str],
        client_ip: str,
    ) -> ApiResponse:
        try:
            return self._route(method, path, query, body or {}, headers, client_ip)
        except ApiResponse as resp:
            return resp
        except AcdcError as exc:
            return self._fail(exc)
        except (KeyError, TypeError, ValueError):
            return ApiResponse(400, {"error": "bad_request"})

    def _route(self, method, path, query, body, headers, client_ip) -> ApiResponse:
        if method == "GET" and path == "/api/health":
            return ApiResponse(200, {"status": "ok"})
        if method == "GET" and path == "/api/slots":
            return self._list_slots(query)
        if method == "POST" and path == "/api/redeem":
            self._throttle(client_ip)
            return self._redeem_and_book(body)
        match = _RESULTS_PATH.match(path)
        if method == "GET" and match:
            self._throttle(client_ip)
            return self._lookup(match.group(1))
        if method == "POST" and path == "/api/lab/vouchers":
            self._require_lab(headers)
            return self._issue(body)
        if method == "POST" and path == "/api/lab/vouchers/single-use":
            self._require_lab(headers)
            return self._issue({**body, "limit": 1})
        if method == "POST" and path == "/api/lab/performed":
            self._require_lab(headers)
            return self._performed(body)
        if method == "POST" and path == "/api/lab/results":
            self._require_lab(headers)
            return self._post_result(body)
        if method == "POST" and path == "/api/admin/locations":
            self._require_lab(headers)
            return self._add_location(body)
        if method == "POST" and path == "/api/admin/slots":
            self._require_lab(headers)
            return self._add_slots(body)
        return ApiResponse(404, {"error": "no_such_endpoint"})

    # -- endpoints -----------------------------------------------------------

    def _issue(self, body: dict) -> ApiResponse:
        limit = int(body.get("limit", self.config.default_cap))
        ttl_days = float(
            body.get("ttl_days", self.config.voucher_ttl.total_seconds() / 86400.0)
        )
        if limit < 1 or ttl_days <= 0:
            return ApiResponse(400, {"error": "bad_request"})
        record = self.vouchers.issue(limit=limit, ttl=timedelta(days=ttl_days), now=utcnow())
        return ApiResponse(
            201,
            {
                "code": codes.render(record.code),
                "remaining_uses": record.remaining_uses,
                "expires_at": iso(record.expires_at),
            },
        )

    def _list_slots(self, query: dict[str, list[str]]) -> ApiResponse:
        now = utcnow()
        from_ts = parse_iso(query["from"][0]) if "from" in query else now
        to_ts = (
            parse_iso(query["to"][0])
            if "to" in query
            else now + self.config.voucher_ttl
        )
        slots = self.flow.list_available(from_ts, to_ts)
        payload = []
        for slot in slots:
            loc = self.flow.get_location(slot.location_id)
            payload.append(
                {
                    "slot_id": slot.slot_id,
                    "location_id": slot.location_id,
                    "location_label": loc.label if loc else "",
                    "address": loc.address if loc else "",
                    "window_start": iso(slot.window_start),
                    "window_end": iso(slot.window_end),
                    "places_left": slot.capacity - slot.booked,
                }
            )
        return ApiResponse(200, {"slots": payload})

    def _redeem_and_book(self, body: dict) -> ApiResponse:
        raw_code = str(body["code"])
        slot_id = str(body["slot_id"])
        code = codes.normalize_and_check(raw_code, self.vouchers.policy)
        now = utcnow()
        token = self.vouchers.redeem(code, now)
        record = self.flow.book(token, slot_id, now)
        slot = self.flow.get_slot(slot_id)
        loc = self.flow.get_location(slot.location_id) if slot else None
        return ApiResponse(
            201,
            {
                "confirmation_code": codes.render(record.confirmation_code),
                "slot_id": slot_id,
                "location_label": loc.label if loc else "",
                "address": loc.address if loc else "",
                "window_start": iso(slot.window_start) if slot else None,
                "window_end": iso(slot.window_end) if slot else None,
            },
        )

    def _lookup(self, raw_code: str) -> ApiResponse:
        code = codes.normalize_and_check(raw_code, self.flow.confirmation_policy)
        found = self.flow.lookup(code, utcnow())
        if found.status == "pending":
            return ApiResponse(200, {"status": "pending"})
        payload: dict = {"status": "ready", "result": found.result}
        if found.chain_voucher:
            payload["chain_voucher"] = codes.render(found.chain_voucher)
            payload["chain_cap"] = self.config.default_cap
        return ApiResponse(200, payload)

    def _performed(self, body: dict) -> ApiResponse:
        code = codes.normalize_and_check(
            str(body["confirmation_code"]), self.flow.confirmation_policy
        )
        self.flow.mark_performed(code, utcnow())
        return ApiResponse(200, {"status": "performed"})

    def _post_result(self, body: dict) -> ApiResponse:
        code = codes.normalize_and_check(
            str(body["confirmation_code"]), self.flow.confirmation_policy
        )
        result = str(body["result"]).lower()
        if result not in bk.RESULTS:
            return ApiResponse(400, {"error": "bad_request"})
        self.flow.post_result(
            code,
            result,
            now=utcnow(),
            chain_limit=self.config.default_cap,
            chain_ttl=self.config.voucher_ttl,
        )
        return ApiResponse(200, {"status": "result_recorded"})

    def _add_location(self, body: dict) -> ApiResponse:
        loc = self.flow.add_location(label=str(body["label"]), address=str(body["address"]))
        return ApiResponse(201, loc.to_record())

    def _add_slots(self, body: dict) -> ApiResponse:
        windows = [
            (parse_iso(s["window_start"]), parse_iso(s["window_end"]), int(s["capacity"]))
            for s in body["slots"]
        ]
        created = self.flow.add_slots(str(body["location_id"]), windows)
        return ApiResponse(201, {"slots": [slot.to_record() for slot in created]})

    # -- maintenance ----------------------------------------------------------

    def sweep(self) -> int:
        now = utcnow()
        removed = self.vouchers.sweep_expired(now, self.config.exhausted_grace)
        removed += self.flow.sweep_confirmations(
            now,
            result_retention=self.config.result_retention,
            stale_booking_grace=self.config.stale_booking_grace,
        )
        return removed

    def close(self) -> None:
        for store in (
            self.voucher_store,
            self.confirmation_store,
            self.slot_store,
            self.location_store,
        ):
            store.close()


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt: str, *args) -> None:
        # Default logging would write full client addresses; keep nothing.
        pass

    def _dispatch(self, method: str) -> None:
        parsed = urlparse(self.path)
        body = None
        if method == "POST":
            length = int(self.headers.get("Content-Length", 0) or 0)
            raw = self.rfile.read(length) if length else b""
            if raw:
                try:
                    body = json.loads(raw)
                except json.JSONDecodeError:
                    self._write(ApiResponse(400, {"error": "bad_request"}))
                    return
            if body is not None and not isinstance(body, dict):
                self._write(ApiResponse(400, {"error": "bad_request"}))
                return
        headers = {k.lower(): v for k, v in self.headers.items()}
        resp = self.server.api.handle(
            method,
            parsed.path,
            parse_qs(parsed.query),
            body,
            headers,
            self.client_address[0],
        )
        self._write(resp)

    def _write(self, resp: ApiResponse) -> None:
        data = canonical_json(resp.body)
        self.send_response(resp.status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        for name, value in resp.headers.items():
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(data)

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")


class TracingServer:
    """Threaded HTTP server plus the periodic sweeper."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.api = TracingApi(config)
        self._httpd = ThreadingHTTPServer((config.host, config.port), _Handler)
        self._httpd.api = self.api  # type: ignore[attr-defined]
        self._httpd.daemon_threads = True
        self._thread: threading.Thread | None = None
        self._sweeper: threading.Thread | None = None
        self._stop = threading.Event()

    @property
    def port(self) -> int:
        return self._httpd.server_address[1]

    @property
    def base_url(self) -> str:
        return f"http://{self.config.host}:{self.port}"

    def _sweep_loop(self) -> None:
        while not self._stop.wait(self.config.sweep_interval_seconds):
            try:
                self.api.sweep()
            except StorageUnavailable:
                pass  # transient; next period retries

    def start(self) -> "TracingServer":
        self._thread = threading.Thread(
            target=self._httpd.serve_forever, kwargs={"poll_interval": 0.05}, daemon=True
        )
        self._thread.start()
        self._sweeper = threading.Thread(target=self._sweep_loop, daemon=True)
        self._sweeper.start()
        return self

    def stop(self) -> None:
        self._stop.set()
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread:
            self._thread.join(timeout=5)
        if self._sweeper:
            self._sweeper.join(timeout=5)
        self.api.close()

    def serve_until_interrupt(self) -> None:
        self.start()
        try:
            while True:
                self._stop.wait(3600)
        except KeyboardInterrupt:
            pass
        finally:
            self.stop()
