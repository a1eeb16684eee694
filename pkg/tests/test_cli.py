import socket
import subprocess
import sys
import time
from datetime import timedelta

import pytest
import requests

from acdc.cli import main
from acdc.codes import normalize_and_check
from acdc.config import ServiceConfig
from acdc.errors import Exhausted
from acdc.labauth import LabRegistry
from acdc.service import TracingServer
from acdc.storage import FileStore
from acdc.timeutil import utcnow
from acdc.vouchers import VoucherLedger


def _write_sim_config(tmp_path, **overrides):
    values = dict(n_seeds=2, offspring_mean=1.5, horizon_days=10, rng_seed=4)
    values.update(overrides)
    path = tmp_path / "sim.ini"
    lines = ["[sim]"] + [f"{k} = {v}" for k, v in values.items()]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


# -- batch ---------------------------------------------------------------


def test_batch_writes_codes_and_checklist(tmp_path, capsys):
    out_dir = tmp_path / "batch"
    store_dir = tmp_path / "store"
    rc = main(
        ["batch", "--n", "100", "--cap", "6", "--out", str(out_dir), "--store-dir", str(store_dir)]
    )
    assert rc == 0
    printed = capsys.readouterr().out.strip().split("\n")
    assert len(printed) == 3

    codes_file = next(out_dir.glob("codes-*.txt"))
    codes = codes_file.read_text(encoding="utf-8").strip().split("\n")
    assert len(codes) == 100
    assert len(set(codes)) == 100
    for rendered in codes:
        normalize_and_check(rendered)  # format self-check

    checklist = next(out_dir.glob("checklist-*.txt"))
    lines = checklist.read_text(encoding="utf-8").strip().split("\n")
    assert len(lines) == 2 + 100  # title, header, one row per code

    csv_file = next(out_dir.glob("checklist-*.csv"))
    csv_lines = csv_file.read_text(encoding="utf-8").strip().split("\n")
    assert len(csv_lines) == 1 + 100
    assert csv_lines[0].startswith("code,use_1,")


def test_batch_checklist_shows_one_tally_box_per_use(tmp_path):
    out_dir = tmp_path / "batch"
    rc = main(
        ["batch", "--n", "1", "--cap", "6", "--out", str(out_dir), "--store-dir", str(tmp_path / "s")]
    )
    assert rc == 0
    checklist = next(out_dir.glob("checklist-*.txt"))
    row = checklist.read_text(encoding="utf-8").strip().split("\n")[-1]
    assert row.count("[ ]") == 6


def test_batch_codes_redeem_against_the_service_exactly_cap_times(tmp_path):
    store_dir = tmp_path / "store"
    out_dir = tmp_path / "batch"
    rc = main(
        ["batch", "--n", "2", "--cap", "3", "--out", str(out_dir), "--store-dir", str(store_dir)]
    )
    assert rc == 0
    codes_file = next(out_dir.glob("codes-*.txt"))
    rendered = codes_file.read_text(encoding="utf-8").strip().split("\n")[0]

    creds = tmp_path / "labs.creds"
    registry = LabRegistry()
    secret = registry.add("lab1")
    registry.save(creds)
    server = TracingServer(
        ServiceConfig(
            port=0,
            store_dir=str(store_dir),
            lab_credentials=str(creds),
            rate_limit_enabled=False,
            sweep_interval_seconds=3600.0,
        )
    ).start()
    try:
        from tests.conftest import ApiClient

        client = ApiClient(server.base_url, "lab1", secret)
        loc = client.add_location()
        slot = client.add_slot(
            loc["location_id"], "2026-08-10T09:00:00Z", "2026-08-10T17:00:00Z", 100
        )
        statuses = [
            client.post(
                "/api/redeem", {"code": rendered, "slot_id": slot["slot_id"]}
            ).status_code
            for _ in range(4)
        ]
        assert statuses == [201, 201, 201, 410]
    finally:
        server.stop()


def test_batch_requires_a_store(tmp_path, capsys):
    rc = main(["batch", "--n", "5", "--cap", "6", "--out", str(tmp_path / "b")])
    assert rc == 2
    assert "store" in capsys.readouterr().err


# -- sim -----------------------------------------------------------------


def test_sim_replicate_table(tmp_path, capsys):
    cfg = _write_sim_config(tmp_path)
    rc = main(["sim", "--config", str(cfg), "--replicates", "5"])
    assert rc == 0
    out = capsys.readouterr().out
    lines = out.strip().split("\n")
    assert lines[0].startswith("replicate\t")
    assert len(lines) == 1 + 5 + 3


def test_sim_sweep_rows(tmp_path, capsys):
    cfg = _write_sim_config(tmp_path)
    rc = main(
        ["sim", "--config", str(cfg), "--replicates", "4", "--sweep",
         "voucher_cap=1,2,3,4,5,6,7,8"]
    )
    assert rc == 0
    lines = capsys.readouterr().out.strip().split("\n")
    assert len(lines) == 1 + 8


def test_sim_output_is_byte_identical_across_runs(tmp_path, capsys):
    cfg = _write_sim_config(tmp_path)
    out_a = tmp_path / "a.tsv"
    out_b = tmp_path / "b.tsv"
    assert main(["sim", "--config", str(cfg), "--replicates", "6", "--out", str(out_a)]) == 0
    assert main(["sim", "--config", str(cfg), "--replicates", "6", "--out", str(out_b)]) == 0
    assert out_a.read_bytes() == out_b.read_bytes()


def test_sim_event_log(tmp_path, capsys):
    cfg = _write_sim_config(tmp_path, offspring_mean=2.0, p_recall=1.0, p_comply=1.0)
    log = tmp_path / "events.tsv"
    rc = main(
        ["sim", "--config", str(cfg), "--replicates", "1", "--event-log", str(log)]
    )
    assert rc == 0
    assert log.exists()
    assert "seed_diagnosed" in log.read_text(encoding="utf-8")


def test_sim_missing_config(tmp_path, capsys):
    missing = tmp_path / "nope.ini"
    rc = main(["sim", "--config", str(missing)])
    assert rc == 2
    assert str(missing) in capsys.readouterr().err


def test_sim_unknown_parameter_in_config(tmp_path, capsys):
    path = tmp_path / "sim.ini"
    path.write_text("[sim]\nwarp_factor = 9\n", encoding="utf-8")
    rc = main(["sim", "--config", str(path)])
    assert rc == 2
    assert "warp_factor" in capsys.readouterr().err


def test_sim_parse_error_reports_line(tmp_path, capsys):
    path = tmp_path / "sim.ini"
    path.write_text("[sim]\nn_seeds ===== what\nthis is not ini\n", encoding="utf-8")
    rc = main(["sim", "--config", str(path)])
    assert rc == 2
    err = capsys.readouterr().err
    assert "line" in err.lower()


def test_sim_bad_sweep_spec(tmp_path, capsys):
    cfg = _write_sim_config(tmp_path)
    assert main(["sim", "--config", str(cfg), "--sweep", "voucher_cap"]) == 2
    assert main(["sim", "--config", str(cfg), "--sweep", "warp=1,2"]) == 2


# -- admin ---------------------------------------------------------------


def test_admin_add_location_and_slots(tmp_path, capsys):
    store_dir = tmp_path / "store"
    rc = main(
        ["admin", "add-location", "--label", "North", "--address", "1 Main St",
         "--store-dir", str(store_dir)]
    )
    assert rc == 0
    location_id = capsys.readouterr().out.strip().split(": ")[1]

    csv_path = tmp_path / "slots.csv"
    csv_path.write_text(
        "location_id,window_start,window_end,capacity\n"
        + "\n".join(
            f"{location_id},2026-08-1{d}T09:00:00Z,2026-08-1{d}T12:00:00Z,5" for d in range(3)
        )
        + "\n",
        encoding="utf-8",
    )
    rc = main(["admin", "add-slots", "--file", str(csv_path), "--store-dir", str(store_dir)])
    assert rc == 0
    assert "slots added: 3" in capsys.readouterr().out

    slots = FileStore(store_dir / "slots.json")
    assert len(slots) == 3


def test_admin_add_slots_malformed_timestamp_names_row(tmp_path, capsys):
    store_dir = tmp_path / "store"
    main(
        ["admin", "add-location", "--label", "N", "--address", "A", "--store-dir", str(store_dir)]
    )
    location_id = capsys.readouterr().out.strip().split(": ")[1]
    csv_path = tmp_path / "slots.csv"
    csv_path.write_text(
        "location_id,window_start,window_end,capacity\n"
        f"{location_id},2026-08-10T09:00:00Z,2026-08-10T12:00:00Z,5\n"
        f"{location_id},not-a-time,2026-08-11T12:00:00Z,5\n",
        encoding="utf-8",
    )
    rc = main(["admin", "add-slots", "--file", str(csv_path), "--store-dir", str(store_dir)])
    assert rc == 2
    assert "row 3" in capsys.readouterr().err


def test_admin_add_lab_prints_secret_once_and_stores_hash(tmp_path, capsys):
    creds = tmp_path / "labs.creds"
    rc = main(["admin", "add-lab", "--lab-id", "north-lab", "--credentials", str(creds)])
    assert rc == 0
    out = capsys.readouterr().out
    secret = next(line.split(": ")[1] for line in out.splitlines() if line.startswith("secret"))
    stored = creds.read_text(encoding="utf-8")
    assert secret not in stored
    assert LabRegistry.load(creds).verify("north-lab", secret)


# -- serve ---------------------------------------------------------------


def test_serve_missing_config(tmp_path, capsys):
    missing = tmp_path / "service.ini"
    rc = main(["serve", "--config", str(missing)])
    assert rc == 2
    assert str(missing) in capsys.readouterr().err


def test_serve_port_already_bound(tmp_path, capsys):
    blocker = socket.socket()
    blocker.bind(("127.0.0.1", 0))
    port = blocker.getsockname()[1]
    cfg = tmp_path / "service.ini"
    cfg.write_text(f"[service]\nbind = 127.0.0.1:{port}\n", encoding="utf-8")
    try:
        rc = main(["serve", "--config", str(cfg)])
        assert rc == 1
        assert "cannot bind" in capsys.readouterr().err
    finally:
        blocker.close()


def test_serve_subprocess_answers_health(tmp_path):
    cfg = tmp_path / "service.ini"
    cfg.write_text("[service]\nbind = 127.0.0.1:0\n", encoding="utf-8")
    proc = subprocess.Popen(
        [sys.executable, "-m", "acdc.cli", "serve", "--config", str(cfg)],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
    )
    try:
        line = proc.stdout.readline().strip()
        assert line.startswith("listening on http://127.0.0.1:")
        base_url = line.split("listening on ")[1]
        deadline = time.time() + 10
        status = None
        while time.time() < deadline:
            try:
                status = requests.get(base_url + "/api/health", timeout=2).status_code
                break
            except requests.ConnectionError:
                time.sleep(0.1)
        assert status == 200
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_cli_registers_batch_codes_in_the_store(tmp_path):
    # The batch command and a later ledger open the same persisted records.
    store_dir = tmp_path / "store"
    main(["batch", "--n", "3", "--cap", "2", "--out", str(tmp_path / "b"), "--store-dir", str(store_dir)])
    ledger = VoucherLedger(FileStore(store_dir / "vouchers.json"))
    codes = [code for code, _ in ledger.store.items()]
    assert len(codes) == 3
    now = utcnow()
    ledger.redeem(codes[0], now)
    ledger.redeem(codes[0], now)
    with pytest.raises(Exhausted):
        ledger.redeem(codes[0], now)
