"""Capped-use voucher records: issue, redeem, erase, sweep.

A voucher is the only protocol state tied to a code. The persisted record
carries exactly five fields (code, remaining_uses, initial_limit,
expires_at, state) and nothing else, by design: no holder, no issuer, no
parent voucher. Redemption is a single atomic decrement-and-check under the
store lock, so for a voucher with limit k the number of successful
redemptions is exactly min(k, attempts) under any interleaving.

Exhausted records are kept for a grace period so that a late attempt gets a
distinct "exhausted" answer rather than "unknown"; when a record becomes
exhausted its expires_at is clamped to now + grace, which is the retention
deadline the sweeper enforces. After erasure (explicit or swept) the code
is indistinguishable from one that never existed.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta

from .codes import VOUCHER_POLICY, CodePolicy, generate_code
from .errors import Exhausted, Expired, NotFound, StorageUnavailable
from .storage import RecordStore
from .timeutil import iso, parse_iso

STATE_ACTIVE = "active"
STATE_EXHAUSTED = "exhausted"
STATE_ERASED = "erased"  # never persisted: erased records are removed

# The full persisted schema; the anonymity audit asserts equality with this.
VOUCHER_RECORD_FIELDS = frozenset(
    {"code", "remaining_uses", "initial_limit", "expires_at", "state"}
)

DEFAULT_TTL = timedelta(days=14)
DEFAULT_EXHAUSTED_GRACE = timedelta(hours=48)
COLLISION_RETRIES = 5


@dataclass
class VoucherRecord:
    code: str
    remaining_uses: int
    initial_limit: int
    expires_at: datetime
    state: str

    def to_record(self) -> dict:
        return {
            "code": self.code,
            "remaining_uses": self.remaining_uses,
            "initial_limit": self.initial_limit,
            "expires_at": iso(self.expires_at),
            "state": self.state,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "VoucherRecord":
        return cls(
            code=rec["code"],
            remaining_uses=rec["remaining_uses"],
            initial_limit=rec["initial_limit"],
            expires_at=parse_iso(rec["expires_at"]),
            state=rec["state"],
        )


@dataclass(frozen=True)
class RedemptionToken:
    """Proof of one consumed use; lives for one service transaction only."""

    voucher_code: str
    redeemed_at: datetime


class VoucherLedger:
    def __init__(
        self,
        store: RecordStore,
        policy: CodePolicy = VOUCHER_POLICY,
        exhausted_grace: timedelta = DEFAULT_EXHAUSTED_GRACE,
    ) -> None:
        policy.validate()
        self.store = store
        self.policy = policy
        self.exhausted_grace = exhausted_grace

    def issue(self, limit: int, ttl: timedelta, now: datetime) -> VoucherRecord:
        """Persist a fresh voucher with ``limit`` uses expiring at now + ttl."""
        if limit < 1:
            raise ValueError("voucher limit must be at least 1")
        with self.store.lock:
            code = self._fresh_code()
            record = VoucherRecord(
                code=code,
                remaining_uses=limit,
                initial_limit=limit,
                expires_at=now + ttl,
                state=STATE_ACTIVE,
            )
            self.store.put(code, record.to_record())
            return record

    def _fresh_code(self) -> str:
        for _ in range(COLLISION_RETRIES):
            code = generate_code(self.policy)
            if self.store.get(code) is None:
                return code
        raise StorageUnavailable("could not draw a non-colliding code")

    def get(self, code: str) -> VoucherRecord | None:
        rec = self.store.get(code)
        return VoucherRecord.from_record(rec) if rec is not None else None

    def redeem(self, code: str, now: datetime) -> RedemptionToken:
        """Atomically consume one use.

        Raises NotFound for unknown or erased codes (identical answers),
        Exhausted when no uses remain, Expired past the expiry timestamp.
        """
        with self.store.lock:
            rec = self.store.get(code)
            if rec is None:
                raise NotFound("no such voucher")
            record = VoucherRecord.from_record(rec)
            if record.remaining_uses <= 0:
                raise Exhausted("voucher has no remaining uses")
            if now >= record.expires_at:
                raise Expired("voucher has expired")
            record.remaining_uses -= 1
            if record.remaining_uses == 0:
                record.state = STATE_EXHAUSTED
                # Retention deadline for the sweeper; see module docstring.
                record.expires_at = min(record.expires_at, now + self.exhausted_grace)
            self.store.put(code, record.to_record())
            return RedemptionToken(voucher_code=code, redeemed_at=now)

    def compensate(self, token: RedemptionToken) -> None:
        """Give back the use consumed by ``token`` (booking failed downstream).

        A no-op when the voucher disappeared in the meantime; never raises.
        """
        with self.store.lock:
            rec = self.store.get(token.voucher_code)
            if rec is None:
                return
            record = VoucherRecord.from_record(rec)
            if record.remaining_uses >= record.initial_limit:
                return
            record.remaining_uses += 1
            record.state = STATE_ACTIVE
            self.store.put(token.voucher_code, record.to_record())

    def erase(self, code: str) -> None:
        """Remove every trace of the voucher."""
        if not self.store.delete(code):
            raise NotFound("no such voucher")

    def sweep_expired(self, now: datetime, grace: timedelta | None = None) -> int:
        """Erase exhausted records past their grace and expired records past
        ``grace``; returns how many were removed."""
        if grace is None:
            grace = self.exhausted_grace
        removed = 0
        with self.store.lock:
            for code, rec in self.store.items():
                record = VoucherRecord.from_record(rec)
                if record.state == STATE_EXHAUSTED:
                    # expires_at was clamped to exhaustion time + grace.
                    eligible = now >= record.expires_at
                else:
                    eligible = now >= record.expires_at + grace
                if eligible:
                    self.store.delete(code)
                    removed += 1
        return removed
