"""Service configuration: INI file with sane defaults for every knob.

Example::

    [service]
    bind = 127.0.0.1:8470
    store_dir = /var/lib/acdc
    lab_credentials = /etc/acdc/labs.creds
    sweep_interval_seconds = 60

    [vouchers]
    default_cap = 6
    ttl_days = 14
    exhausted_grace_hours = 48

    [confirmations]
    result_retention_days = 7
    stale_booking_grace_hours = 48

    [rate_limit]
    enabled = true
    requests_per_hour = 10
    burst = 10

Leaving ``store_dir`` unset runs fully in memory. The ACDC_STORE_DIR
environment variable overrides ``store_dir`` when set.
"""

from __future__ import annotations

import configparser
import os
from dataclasses import dataclass, field
from datetime import timedelta
from pathlib import Path

STORE_DIR_ENV = "ACDC_STORE_DIR"


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8470
    store_dir: str | None = None
    lab_credentials: str | None = None
    sweep_interval_seconds: float = 60.0
    default_cap: int = 6
    voucher_ttl: timedelta = timedelta(days=14)
    exhausted_grace: timedelta = timedelta(hours=48)
    result_retention: timedelta = timedelta(days=7)
    stale_booking_grace: timedelta = timedelta(hours=48)
    rate_limit_enabled: bool = True
    rate_limit_per_hour: float = 10.0
    rate_limit_burst: int = 10
    source_path: str | None = field(default=None, compare=False)

    @classmethod
    def from_file(cls, path: str | Path) -> "ServiceConfig":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        with path.open("r", encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))

        cfg = cls(source_path=str(path))
        if parser.has_section("service"):
            sec = parser["service"]
            bind = sec.get("bind", f"{cfg.host}:{cfg.port}")
            host, _, port = bind.rpartition(":")
            cfg.host = host or cfg.host
            cfg.port = int(port)
            cfg.store_dir = sec.get("store_dir", cfg.store_dir) or None
            cfg.lab_credentials = sec.get("lab_credentials", cfg.lab_credentials) or None
            cfg.sweep_interval_seconds = sec.getfloat(
                "sweep_interval_seconds", cfg.sweep_interval_seconds
            )
        if parser.has_section("vouchers"):
            sec = parser["vouchers"]
            cfg.default_cap = sec.getint("default_cap", cfg.default_cap)
            cfg.voucher_ttl = timedelta(days=sec.getfloat("ttl_days", 14))
            cfg.exhausted_grace = timedelta(hours=sec.getfloat("exhausted_grace_hours", 48))
        if parser.has_section("confirmations"):
            sec = parser["confirmations"]
            cfg.result_retention = timedelta(days=sec.getfloat("result_retention_days", 7))
            cfg.stale_booking_grace = timedelta(
                hours=sec.getfloat("stale_booking_grace_hours", 48)
            )
        if parser.has_section("rate_limit"):
            sec = parser["rate_limit"]
            cfg.rate_limit_enabled = sec.getboolean("enabled", cfg.rate_limit_enabled)
            cfg.rate_limit_per_hour = sec.getfloat("requests_per_hour", cfg.rate_limit_per_hour)
            cfg.rate_limit_burst = sec.getint("burst", cfg.rate_limit_burst)

        env_dir = os.environ.get(STORE_DIR_ENV)
        if env_dir:
            cfg.store_dir = env_dir

        if cfg.default_cap < 1:
            raise ValueError("default_cap must be at least 1")
        return cfg
