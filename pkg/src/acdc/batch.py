"""Paper voucher batches: pre-registered codes plus a printable checklist.

For deployments with no citizen-facing infrastructure at all, a batch of
codes can be printed, sealed in envelopes and handed out, while the testing
center keeps the matching checklist and ticks a box per use. The codes file
and the checklist are written separately so the envelopes and the checklist
can be handled by different people.
"""

from __future__ import annotations

import csv
import secrets
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

from .codes import render
from .vouchers import VoucherLedger


@dataclass
class PaperBatch:
    batch_id: str
    codes: list[str]  # canonical form; render() for display
    cap: int
    created_at: datetime

    def checklist_rows(self) -> list[dict]:
        return [
            {
                "code": render(code),
                "tally": "[ ] " * self.cap,
                "issued": "_" * 12,
            }
            for code in self.codes
        ]


def make_batch(
    ledger: VoucherLedger, n: int, cap: int, ttl: timedelta, now: datetime
) -> PaperBatch:
    """Issue ``n`` fresh vouchers with ``cap`` uses and collect their codes."""
    if n < 1:
        raise ValueError("batch size must be at least 1")
    codes = [ledger.issue(limit=cap, ttl=ttl, now=now).code for _ in range(n)]
    return PaperBatch(
        batch_id=secrets.token_hex(4), codes=codes, cap=cap, created_at=now
    )


def write_batch_files(batch: PaperBatch, out_dir: str | Path) -> list[Path]:
    """Write codes.txt, checklist.txt and checklist.csv; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    codes_path = out / f"codes-{batch.batch_id}.txt"
    codes_path.write_text(
        "".join(render(code) + "\n" for code in batch.codes), encoding="utf-8"
    )

    rows = batch.checklist_rows()
    text_path = out / f"checklist-{batch.batch_id}.txt"
    width = max(len(r["code"]) for r in rows)
    lines = [
        f"batch {batch.batch_id}: {len(batch.codes)} codes, up to {batch.cap} uses each",
        f"{'code':<{width}}  {'uses':<{len(rows[0]['tally'])}} issued",
    ]
    for r in rows:
        lines.append(f"{r['code']:<{width}}  {r['tally']} {r['issued']}")
    text_path.write_text("\n".join(lines) + "\n", encoding="utf-8")

    csv_path = out / f"checklist-{batch.batch_id}.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["code"] + [f"use_{i + 1}" for i in range(batch.cap)] + ["issued"]
        )
        for code in batch.codes:
            writer.writerow([render(code)] + [""] * batch.cap + [""])

    return [codes_path, text_path, csv_path]
