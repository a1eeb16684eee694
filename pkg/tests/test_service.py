import threading
import time

import pytest

from acdc.codes import CONFIRMATION_POLICY, VOUCHER_POLICY, generate_code, render
from acdc.config import ServiceConfig
from acdc.service import TracingServer


def test_health(live_service):
    _, client, _ = live_service
    resp = client.get("/api/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok"}


def test_full_protocol_over_http(live_service):
    _, client, slot_id = live_service

    voucher = client.issue_voucher()
    assert voucher["remaining_uses"] == 6

    booked = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id})
    assert booked.status_code == 201
    confirmation = booked.json()["confirmation_code"]
    assert booked.json()["location_label"] == "Test Center"

    assert client.get(f"/api/results/{confirmation}").json() == {"status": "pending"}

    performed = client.post("/api/lab/performed", {"confirmation_code": confirmation}, lab=True)
    assert performed.status_code == 200

    posted = client.post(
        "/api/lab/results", {"confirmation_code": confirmation, "result": "positive"}, lab=True
    )
    assert posted.status_code == 200

    ready = client.get(f"/api/results/{confirmation}").json()
    assert ready["status"] == "ready"
    assert ready["result"] == "positive"
    assert ready["chain_cap"] == 6
    chain = ready["chain_voucher"]

    chained = client.post("/api/redeem", {"code": chain, "slot_id": slot_id})
    assert chained.status_code == 201


def test_lab_response_never_contains_chain_voucher(live_service):
    _, client, slot_id = live_service
    voucher = client.issue_voucher()
    booked = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id}).json()
    code = booked["confirmation_code"]
    client.post("/api/lab/performed", {"confirmation_code": code}, lab=True)
    posted = client.post(
        "/api/lab/results", {"confirmation_code": code, "result": "positive"}, lab=True
    )
    # Delivery happens only through the citizen's own lookup.
    assert posted.json() == {"status": "result_recorded"}


def test_limit_six_code_books_exactly_six(live_service):
    _, client, slot_id = live_service
    voucher = client.issue_voucher()
    statuses = [
        client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id}).status_code
        for _ in range(7)
    ]
    assert statuses.count(201) == 6
    assert statuses[6] == 410


def test_concurrent_redeem_through_http(live_service):
    _, client, slot_id = live_service
    voucher = client.issue_voucher()
    results = []
    barrier = threading.Barrier(12)
    lock = threading.Lock()

    def hit():
        import requests

        barrier.wait()
        resp = requests.post(
            client.base_url + "/api/redeem",
            json={"code": voucher["code"], "slot_id": slot_id},
            timeout=10,
        )
        with lock:
            results.append(resp.status_code)

    threads = [threading.Thread(target=hit) for _ in range(12)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert results.count(201) == 6
    assert results.count(410) == 6


def test_single_use_endpoint(live_service):
    _, client, slot_id = live_service
    resp = client.post("/api/lab/vouchers/single-use", {}, lab=True)
    assert resp.status_code == 201
    code = resp.json()["code"]
    assert resp.json()["remaining_uses"] == 1
    assert client.post("/api/redeem", {"code": code, "slot_id": slot_id}).status_code == 201
    assert client.post("/api/redeem", {"code": code, "slot_id": slot_id}).status_code == 410


def test_citizen_endpoints_need_no_identity(live_service):
    # No auth header, no cookie, no client field anywhere in the bodies.
    _, client, slot_id = live_service
    voucher = client.issue_voucher()
    resp = client.session.post(
        client.base_url + "/api/redeem",
        json={"code": voucher["code"], "slot_id": slot_id},
        timeout=10,
    )
    assert resp.status_code == 201
    slots = client.session.get(client.base_url + "/api/slots", timeout=10)
    assert slots.status_code == 200
    lookup = client.session.get(
        client.base_url + "/api/results/" + resp.json()["confirmation_code"], timeout=10
    )
    assert lookup.status_code == 200


def test_lab_endpoints_reject_missing_or_bad_auth(live_service):
    _, client, _ = live_service
    bare = client.session.post(client.base_url + "/api/lab/vouchers", json={}, timeout=10)
    assert bare.status_code == 401

    wrong = ApiClientWithSecret(client, "lab1", "wrong-secret")
    resp = wrong.post("/api/lab/vouchers", {}, lab=True)
    assert resp.status_code == 401
    ghost = ApiClientWithSecret(client, "ghost", "whatever")
    ghost_resp = ghost.post("/api/lab/vouchers", {}, lab=True)
    assert ghost_resp.status_code == 401
    assert ghost_resp.content == resp.content


class ApiClientWithSecret:
    def __init__(self, template, lab_id, secret):
        from tests.conftest import ApiClient

        self._client = ApiClient(template.base_url, lab_id, secret)

    def post(self, path, body, lab=False):
        return self._client.post(path, body, lab=lab)


def test_malformed_code_caught_before_any_lookup(live_service):
    _, client, slot_id = live_service
    resp = client.post("/api/redeem", {"code": "ABC", "slot_id": slot_id})
    assert resp.status_code == 400
    assert resp.json() == {"error": "malformed_code"}

    valid = generate_code(VOUCHER_POLICY)
    wrong_last = valid[:-1] + ("2" if valid[-1] != "2" else "3")
    resp = client.post("/api/redeem", {"code": wrong_last, "slot_id": slot_id})
    assert resp.status_code == 400
    assert resp.json() == {"error": "checksum_mismatch"}


def test_unknown_voucher_vs_erased_voucher_bodies_identical(live_service):
    server, client, slot_id = live_service
    voucher = client.issue_voucher()
    canonical = voucher["code"].replace("-", "")
    server.api.vouchers.erase(canonical)

    erased = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id})
    fresh = generate_code(VOUCHER_POLICY)
    unknown = client.post("/api/redeem", {"code": render(fresh), "slot_id": slot_id})
    assert erased.status_code == unknown.status_code == 404
    assert erased.content == unknown.content


def test_unknown_vs_erased_confirmation_bodies_identical(live_service):
    server, client, slot_id = live_service
    voucher = client.issue_voucher()
    booked = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id}).json()
    canonical = booked["confirmation_code"].replace("-", "")
    server.api.flow.erase_confirmation(canonical)

    erased = client.get("/api/results/" + booked["confirmation_code"])
    unknown = client.get("/api/results/" + render(generate_code(CONFIRMATION_POLICY)))
    assert erased.status_code == unknown.status_code == 404
    assert erased.content == unknown.content


def test_slot_full_and_unknown_slot(service_factory):
    _, client = service_factory()
    loc = client.add_location()
    slot = client.add_slot(
        loc["location_id"], "2026-08-10T09:00:00Z", "2026-08-10T10:00:00Z", capacity=1
    )
    voucher = client.issue_voucher()

    missing = client.post("/api/redeem", {"code": voucher["code"], "slot_id": "nope"})
    assert missing.status_code == 404
    assert missing.json() == {"error": "unknown_slot"}

    first = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    assert first.status_code == 201
    full = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    assert full.status_code == 409
    assert full.json() == {"error": "slot_full"}

    # Every failed attempt keeps giving the use back: the voucher never
    # drains against a full calendar.
    statuses = [
        client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]}).status_code
        for _ in range(6)
    ]
    assert statuses == [409] * 6


def test_wrong_state_maps_to_409(live_service):
    _, client, slot_id = live_service
    voucher = client.issue_voucher()
    booked = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot_id}).json()
    code = booked["confirmation_code"]
    resp = client.post(
        "/api/lab/results", {"confirmation_code": code, "result": "negative"}, lab=True
    )
    assert resp.status_code == 409
    assert resp.json() == {"error": "wrong_state"}


def test_list_slots_reports_remaining_capacity(service_factory):
    _, client = service_factory()
    loc = client.add_location(label="South", address="2 Dock Rd")
    client.add_slot(loc["location_id"], "2026-08-11T09:00:00Z", "2026-08-11T12:00:00Z", 2)
    listing = client.get("/api/slots?from=2026-08-11T00:00:00Z&to=2026-08-12T00:00:00Z")
    assert listing.status_code == 200
    (slot,) = listing.json()["slots"]
    assert slot["places_left"] == 2
    assert slot["location_label"] == "South"

    voucher = client.issue_voucher()
    client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    (after,) = client.get(
        "/api/slots?from=2026-08-11T00:00:00Z&to=2026-08-12T00:00:00Z"
    ).json()["slots"]
    assert after["places_left"] == 1


def test_rate_limit_kicks_in_and_names_retry_after(service_factory):
    _, client = service_factory(
        rate_limit_enabled=True, rate_limit_burst=3, rate_limit_per_hour=3.0
    )
    code = render(generate_code(CONFIRMATION_POLICY))
    statuses = [client.get(f"/api/results/{code}").status_code for _ in range(4)]
    assert statuses[:3] == [404, 404, 404]
    assert statuses[3] == 429
    limited = client.get(f"/api/results/{code}")
    assert limited.status_code == 429
    assert "Retry-After" in limited.headers
    assert limited.json()["error"] == "rate_limited"
    # Lab and admin endpoints are not throttled by the citizen bucket.
    assert client.post("/api/lab/vouchers", {}, lab=True).status_code == 201


def test_bad_json_and_bad_result_value(live_service):
    _, client, _ = live_service
    import requests

    resp = requests.post(
        client.base_url + "/api/redeem",
        data="{not json",
        headers={"Content-Type": "application/json"},
        timeout=10,
    )
    assert resp.status_code == 400

    voucher = client.issue_voucher()
    assert (
        client.post(
            "/api/lab/results",
            {"confirmation_code": voucher["code"], "result": "maybe"},
            lab=True,
        ).status_code
        == 400
    )


def test_unknown_endpoint_404(live_service):
    _, client, _ = live_service
    assert client.get("/api/nope").status_code == 404
    assert client.post("/api/redeem/extra", {}).status_code == 404


def test_restart_preserves_stores_and_resets_limiter(tmp_path, service_factory):
    store_dir = tmp_path / "persistent"
    server, client = service_factory(
        store_dir=str(store_dir),
        rate_limit_enabled=True,
        rate_limit_burst=2,
        rate_limit_per_hour=1.0,
    )
    loc = client.add_location()
    slot = client.add_slot(
        loc["location_id"], "2026-08-10T09:00:00Z", "2026-08-10T17:00:00Z", 10
    )
    voucher = client.issue_voucher()
    # Exhaust the rate budget.
    client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    limited = client.post("/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]})
    assert limited.status_code == 429
    server.stop()

    from tests.conftest import ApiClient

    revived = TracingServer(
        ServiceConfig(
            port=0,
            store_dir=str(store_dir),
            lab_credentials=server.config.lab_credentials,
            rate_limit_enabled=True,
            rate_limit_burst=2,
            rate_limit_per_hour=1.0,
            sweep_interval_seconds=3600.0,
        )
    ).start()
    try:
        fresh_client = ApiClient(revived.base_url, client.lab_id, client.lab_secret)
        # Vouchers and slots survived; the limiter state did not.
        resp = fresh_client.post(
            "/api/redeem", {"code": voucher["code"], "slot_id": slot["slot_id"]}
        )
        assert resp.status_code == 201
        assert revived.api.vouchers.get(voucher["code"].replace("-", "")).remaining_uses == 3
    finally:
        revived.stop()


def test_background_sweeper_erases_expired_vouchers(service_factory):
    from datetime import timedelta

    server, client = service_factory(
        sweep_interval_seconds=0.1, exhausted_grace=timedelta(0)
    )
    voucher = client.issue_voucher(ttl_days=0.000001)  # expires ~instantly
    canonical = voucher["code"].replace("-", "")
    deadline = time.time() + 5
    while time.time() < deadline:
        if server.api.vouchers.get(canonical) is None:
            break
        time.sleep(0.05)
    assert server.api.vouchers.get(canonical) is None
