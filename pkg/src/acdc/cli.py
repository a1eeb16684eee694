"""Command-line entry point.

    acdc serve --config FILE
    acdc batch --n N --cap K --out DIR (--config FILE | --store-dir DIR)
    acdc sim --config FILE [--replicates R] [--sweep PARAM=v1,v2,...]
    acdc admin add-location --label L --address A (--config FILE | --store-dir DIR)
    acdc admin add-slots --file CSV (--config FILE | --store-dir DIR)
    acdc admin add-lab --lab-id ID (--config FILE | --credentials FILE)

Commands never prompt; exit status is 0 on success, 1 on operational
failure, 2 on bad usage or unreadable config.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import sys
from datetime import timedelta
from pathlib import Path

from . import sim
from .batch import make_batch, write_batch_files
from .booking import TestingFlow
from .config import STORE_DIR_ENV, ServiceConfig
from .errors import AcdcError, UnknownParameter
from .labauth import LabRegistry
from .service import TracingServer
from .storage import open_store
from .timeutil import parse_iso, utcnow
from .vouchers import VoucherLedger

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acdc",
        description="Anonymous capped-use testing vouchers: service, batches, simulator.",
        epilog=f"The {STORE_DIR_ENV} environment variable overrides the configured store directory.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="service config file (INI)")

    p_batch = sub.add_parser("batch", help="generate a paper voucher batch")
    p_batch.add_argument("--n", type=int, required=True, help="number of codes")
    p_batch.add_argument("--cap", type=int, default=6, help="uses per code (default 6)")
    p_batch.add_argument("--out", required=True, help="output directory")
    p_batch.add_argument("--ttl-days", type=float, default=14.0)
    p_batch.add_argument("--config", help="service config file (for the store)")
    p_batch.add_argument("--store-dir", help="store directory (overrides config)")

    p_sim = sub.add_parser("sim", help="run tracing simulations")
    p_sim.add_argument("--config", required=True, help="simulation config file (INI)")
    p_sim.add_argument("--replicates", type=int, default=100)
    p_sim.add_argument("--sweep", help="PARAM=v1,v2,... sweep instead of replicate table")
    p_sim.add_argument(
        "--mode", choices=("acdc", "app"), default="acdc", help="tracing process to score"
    )
    p_sim.add_argument("--out", help="also write the table to this file")
    p_sim.add_argument("--event-log", help="write replicate 0's event log to this file")

    p_admin = sub.add_parser("admin", help="administer stores and lab credentials")
    admin_sub = p_admin.add_subparsers(dest="admin_command", required=True)

    p_loc = admin_sub.add_parser("add-location", help="register a testing location")
    p_loc.add_argument("--label", required=True)
    p_loc.add_argument("--address", required=True)
    p_loc.add_argument("--config")
    p_loc.add_argument("--store-dir")

    p_slots = admin_sub.add_parser("add-slots", help="import slots from a CSV file")
    p_slots.add_argument(
        "--file",
        required=True,
        help="CSV with columns location_id,window_start,window_end,capacity",
    )
    p_slots.add_argument("--config")
    p_slots.add_argument("--store-dir")

    p_lab = admin_sub.add_parser("add-lab", help="register a lab; prints its secret once")
    p_lab.add_argument("--lab-id", required=True)
    p_lab.add_argument("--config")
    p_lab.add_argument("--credentials", help="credentials file (overrides config)")

    return parser


def _load_config(path: str | None) -> ServiceConfig | None:
    if path is None:
        return None
    return ServiceConfig.from_file(path)


def _store_dir(args, config: ServiceConfig | None) -> str:
    store_dir = getattr(args, "store_dir", None) or (config.store_dir if config else None)
    if not store_dir:
        raise AcdcError(
            "no store directory: pass --store-dir or a config with store_dir set"
        )
    return store_dir


def _cmd_serve(args) -> int:
    config = ServiceConfig.from_file(args.config)
    try:
        server = TracingServer(config)
    except OSError as exc:
        print(f"acdc serve: cannot bind {config.host}:{config.port}: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"listening on {server.base_url}", flush=True)
    server.serve_until_interrupt()
    return EXIT_OK


def _cmd_batch(args) -> int:
    config = _load_config(args.config)
    store = open_store(_store_dir(args, config), "vouchers")
    ledger = VoucherLedger(store)
    batch = make_batch(
        ledger, n=args.n, cap=args.cap, ttl=timedelta(days=args.ttl_days), now=utcnow()
    )
    paths = write_batch_files(batch, args.out)
    store.close()
    for path in paths:
        print(path)
    return EXIT_OK


def _parse_sweep(spec: str):
    param, _, raw = spec.partition("=")
    if not param or not raw:
        raise UnknownParameter("sweep spec must look like PARAM=v1,v2,...")
    cast = sim.config.parameter_parser(param)
    return param, [cast(v) for v in raw.split(",") if v != ""]


def _cmd_sim(args) -> int:
    config = sim.SimConfig.from_file(args.config)
    if args.sweep:
        param, values = _parse_sweep(args.sweep)
        rows = sim.sweep(param, values, config, n_replicates=args.replicates, mode=args.mode)
        table = sim.render_sweep_table(param, rows)
    else:
        result = sim.run_experiment(config, n_replicates=args.replicates, mode=args.mode)
        table = sim.render_replicates_table(result)
    sys.stdout.write(table)
    if args.out:
        Path(args.out).write_text(table, encoding="utf-8")
    if args.event_log:
        events: list[dict] = []
        tree = sim.generate_outbreak(config, config.rng_seed)
        runner = sim.run_acdc_tracing if args.mode == "acdc" else sim.run_app_tracing
        runner(tree, config, config.rng_seed, events=events)
        with Path(args.event_log).open("w", encoding="utf-8") as fh:
            for event in events:
                fh.write(f"{event['day']}\t{event['event']}\t{event['agent']}\n")
    return EXIT_OK


def _cmd_admin(args) -> int:
    if args.admin_command == "add-lab":
        config = _load_config(args.config)
        creds_path = args.credentials or (config.lab_credentials if config else None)
        if not creds_path:
            raise AcdcError("no credentials file: pass --credentials or set it in the config")
        registry = LabRegistry.load(creds_path) if Path(creds_path).exists() else LabRegistry()
        secret = registry.add(args.lab_id)
        registry.save(creds_path)
        # The secret exists in clear only on this one line of output.
        print(f"lab_id: {args.lab_id}")
        print(f"secret: {secret}")
        return EXIT_OK

    config = _load_config(args.config)
    store_dir = _store_dir(args, config)
    flow = TestingFlow(
        locations=open_store(store_dir, "locations"),
        slots=open_store(store_dir, "slots"),
        confirmations=open_store(store_dir, "confirmations"),
        vouchers=VoucherLedger(open_store(store_dir, "vouchers")),
    )

    if args.admin_command == "add-location":
        loc = flow.add_location(label=args.label, address=args.address)
        print(f"location_id: {loc.location_id}")
        return EXIT_OK

    if args.admin_command == "add-slots":
        created = 0
        with open(args.file, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            required = {"location_id", "window_start", "window_end", "capacity"}
            if reader.fieldnames is None or not required <= set(reader.fieldnames):
                raise AcdcError(
                    f"{args.file}: header must contain {', '.join(sorted(required))}"
                )
            for row_no, row in enumerate(reader, start=2):
                try:
                    window = (
                        parse_iso(row["window_start"]),
                        parse_iso(row["window_end"]),
                        int(row["capacity"]),
                    )
                except (ValueError, KeyError) as exc:
                    raise AcdcError(f"{args.file}: row {row_no}: {exc}") from exc
                flow.add_slots(row["location_id"], [window])
                created += 1
        print(f"slots added: {created}")
        return EXIT_OK

    raise AcdcError(f"unknown admin command {args.admin_command!r}")


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "serve": _cmd_serve,
        "batch": _cmd_batch,
        "sim": _cmd_sim,
        "admin": _cmd_admin,
    }
    try:
        return handlers[args.command](args)
    except FileNotFoundError as exc:
        print(f"acdc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except configparser.Error as exc:
        # configparser reports the offending line numbers in its message.
        print(f"acdc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (AcdcError, ValueError) as exc:
        print(f"acdc {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except KeyboardInterrupt:
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
