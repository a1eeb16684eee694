from __future__ import annotations

import base64
import json
from datetime import datetime, timedelta, timezone

import pytest
import requests

from acdc.booking import TestingFlow
from acdc.config import ServiceConfig
from acdc.labauth import LabRegistry
from acdc.service import TracingServer
from acdc.storage import MemoryStore
from acdc.vouchers import VoucherLedger

FIXED_NOW = datetime(2026, 8, 8, 12, 0, 0, tzinfo=timezone.utc)
DAY = timedelta(days=1)
HOUR = timedelta(hours=1)


@pytest.fixture
def now():
    return FIXED_NOW


@pytest.fixture
def ledger():
    return VoucherLedger(MemoryStore())


@pytest.fixture
def flow(ledger):
    return TestingFlow(
        locations=MemoryStore(),
        slots=MemoryStore(),
        confirmations=MemoryStore(),
        vouchers=ledger,
    )


class ApiClient:
    """Thin requests wrapper bound to one server and one lab credential."""

    def __init__(self, base_url: str, lab_id: str, lab_secret: str):
        self.base_url = base_url
        self.lab_id = lab_id
        self.lab_secret = lab_secret
        self.session = requests.Session()

    def _auth_header(self) -> dict:
        token = base64.b64encode(f"{self.lab_id}:{self.lab_secret}".encode()).decode()
        return {"Authorization": f"Basic {token}"}

    def get(self, path: str, lab: bool = False) -> requests.Response:
        headers = self._auth_header() if lab else {}
        return self.session.get(self.base_url + path, headers=headers, timeout=10)

    def post(self, path: str, body: dict | None = None, lab: bool = False) -> requests.Response:
        headers = {"Content-Type": "application/json"}
        if lab:
            headers.update(self._auth_header())
        data = json.dumps(body if body is not None else {})
        return self.session.post(self.base_url + path, data=data, headers=headers, timeout=10)

    # Convenience wrappers for the common protocol steps.

    def issue_voucher(self, **body) -> dict:
        resp = self.post("/api/lab/vouchers", body, lab=True)
        assert resp.status_code == 201, resp.text
        return resp.json()

    def add_location(self, label="Test Center", address="1 Main St") -> dict:
        resp = self.post("/api/admin/locations", {"label": label, "address": address}, lab=True)
        assert resp.status_code == 201, resp.text
        return resp.json()

    def add_slot(self, location_id: str, start: str, end: str, capacity: int) -> dict:
        resp = self.post(
            "/api/admin/slots",
            {
                "location_id": location_id,
                "slots": [{"window_start": start, "window_end": end, "capacity": capacity}],
            },
            lab=True,
        )
        assert resp.status_code == 201, resp.text
        return resp.json()["slots"][0]


@pytest.fixture
def service_factory(tmp_path):
    """Start servers on ephemeral ports; everything stops at teardown."""
    servers: list[TracingServer] = []

    def start(**overrides) -> tuple[TracingServer, ApiClient]:
        creds = tmp_path / f"labs-{len(servers)}.creds"
        registry = LabRegistry()
        secret = registry.add("lab1")
        registry.save(creds)
        defaults = dict(
            host="127.0.0.1",
            port=0,
            lab_credentials=str(creds),
            rate_limit_enabled=False,
            sweep_interval_seconds=3600.0,
        )
        defaults.update(overrides)
        server = TracingServer(ServiceConfig(**defaults)).start()
        servers.append(server)
        return server, ApiClient(server.base_url, "lab1", secret)

    yield start
    for server in servers:
        server.stop()


@pytest.fixture
def live_service(service_factory):
    """One ready-to-use server with a location and a roomy slot."""
    server, client = service_factory()
    loc = client.add_location()
    slot = client.add_slot(
        loc["location_id"], "2026-08-10T09:00:00Z", "2026-08-10T17:00:00Z", capacity=1000
    )
    return server, client, slot["slot_id"]
