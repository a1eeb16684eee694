"""Anonymous test booking: slots, confirmation codes, results, chain vouchers.

A confirmation record is the receipt for one booking. It binds a
confirmation code to a slot and, later, to a result — and deliberately NOT
to the voucher that paid for it: once booked, nothing connects the booking
back to the voucher or to any person. On a positive result a fresh chain
voucher is issued and its code stored on the confirmation; that link points
forward only and dies when the confirmation is erased.

Booking is a two-step saga: the slot increment is atomic per slot, and when
it fails the voucher use consumed upstream is restored, so a full calendar
never costs anyone a voucher use.

Status machine: booked -> performed -> ready, then erasure; stale booked
records can be erased directly by the sweeper.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from datetime import datetime, timedelta

from .codes import CONFIRMATION_POLICY, CodePolicy, generate_code
from .errors import NotFound, SlotFull, StorageUnavailable, UnknownLocation, UnknownSlot, WrongState
from .storage import RecordStore
from .timeutil import iso, parse_iso
from .vouchers import COLLISION_RETRIES, RedemptionToken, VoucherLedger, VoucherRecord

STATUS_BOOKED = "booked"
STATUS_PERFORMED = "performed"
STATUS_READY = "ready"

RESULT_NEGATIVE = "negative"
RESULT_POSITIVE = "positive"
RESULT_INCONCLUSIVE = "inconclusive"
RESULTS = (RESULT_NEGATIVE, RESULT_POSITIVE, RESULT_INCONCLUSIVE)

DEFAULT_RESULT_RETENTION = timedelta(days=7)
DEFAULT_STALE_BOOKING_GRACE = timedelta(hours=48)

# Persisted schemas; the anonymity audit asserts exact equality with these.
LOCATION_RECORD_FIELDS = frozenset({"location_id", "label", "address"})
SLOT_RECORD_FIELDS = frozenset(
    {"slot_id", "location_id", "window_start", "window_end", "capacity", "booked"}
)
CONFIRMATION_RECORD_FIELDS = frozenset(
    {
        "confirmation_code",
        "slot_id",
        "status",
        "result",
        "chain_voucher",
        "created_at",
        "result_at",
    }
)


@dataclass
class TestingLocation:
    location_id: str
    label: str
    address: str

    def to_record(self) -> dict:
        return {"location_id": self.location_id, "label": self.label, "address": self.address}

    @classmethod
    def from_record(cls, rec: dict) -> "TestingLocation":
        return cls(rec["location_id"], rec["label"], rec["address"])


@dataclass
class AppointmentSlot:
    slot_id: str
    location_id: str
    window_start: datetime
    window_end: datetime
    capacity: int
    booked: int = 0

    def to_record(self) -> dict:
        return {
            "slot_id": self.slot_id,
            "location_id": self.location_id,
            "window_start": iso(self.window_start),
            "window_end": iso(self.window_end),
            "capacity": self.capacity,
            "booked": self.booked,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "AppointmentSlot":
        return cls(
            slot_id=rec["slot_id"],
            location_id=rec["location_id"],
            window_start=parse_iso(rec["window_start"]),
            window_end=parse_iso(rec["window_end"]),
            capacity=rec["capacity"],
            booked=rec["booked"],
        )


@dataclass
class ConfirmationRecord:
    confirmation_code: str
    slot_id: str
    status: str
    result: str | None = None
    chain_voucher: str | None = None
    created_at: datetime | None = None
    result_at: datetime | None = None

    def to_record(self) -> dict:
        return {
            "confirmation_code": self.confirmation_code,
            "slot_id": self.slot_id,
            "status": self.status,
            "result": self.result,
            "chain_voucher": self.chain_voucher,
            "created_at": iso(self.created_at) if self.created_at else None,
            "result_at": iso(self.result_at) if self.result_at else None,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ConfirmationRecord":
        return cls(
            confirmation_code=rec["confirmation_code"],
            slot_id=rec["slot_id"],
            status=rec["status"],
            result=rec["result"],
            chain_voucher=rec["chain_voucher"],
            created_at=parse_iso(rec["created_at"]) if rec["created_at"] else None,
            result_at=parse_iso(rec["result_at"]) if rec["result_at"] else None,
        )


@dataclass(frozen=True)
class LookupResult:
    """Answer to an anonymous result lookup: pending, or ready with payload."""

    status: str  # "pending" | "ready"
    result: str | None = None
    chain_voucher: str | None = None


@dataclass
class TestingFlow:
    __test__ = False  # keep pytest from collecting this as a test class

    locations: RecordStore
    slots: RecordStore
    confirmations: RecordStore
    vouchers: VoucherLedger
    confirmation_policy: CodePolicy = field(default=CONFIRMATION_POLICY)

    def add_location(self, label: str, address: str) -> TestingLocation:
        loc = TestingLocation(location_id=uuid.uuid4().hex[:12], label=label, address=address)
        self.locations.put(loc.location_id, loc.to_record())
        return loc

    def add_slots(
        self, location_id: str, windows: list[tuple[datetime, datetime, int]]
    ) -> list[AppointmentSlot]:
        """One slot per (window_start, window_end, capacity) triple."""
        if self.locations.get(location_id) is None:
            raise UnknownLocation("no such testing location")
        created = []
        for start, end, capacity in windows:
            if capacity < 0:
                raise ValueError("slot capacity must be non-negative")
            if start >= end:
                raise ValueError("slot window must have positive length")
            slot = AppointmentSlot(
                slot_id=uuid.uuid4().hex[:12],
                location_id=location_id,
                window_start=start,
                window_end=end,
                capacity=capacity,
            )
            self.slots.put(slot.slot_id, slot.to_record())
            created.append(slot)
        return created

    def get_location(self, location_id: str) -> TestingLocation | None:
        rec = self.locations.get(location_id)
        return TestingLocation.from_record(rec) if rec else None

    def get_slot(self, slot_id: str) -> AppointmentSlot | None:
        rec = self.slots.get(slot_id)
        return AppointmentSlot.from_record(rec) if rec else None

    def list_available(self, from_ts: datetime, to_ts: datetime) -> list[AppointmentSlot]:
        """Slots overlapping [from_ts, to_ts) with spare capacity, by start."""
        if from_ts > to_ts:
            raise ValueError("from must not be after to")
        out = []
        for _, rec in self.slots.items():
            slot = AppointmentSlot.from_record(rec)
            if slot.booked >= slot.capacity:
                continue
            if slot.window_start < to_ts and slot.window_end > from_ts:
                out.append(slot)
        out.sort(key=lambda s: (s.window_start, s.slot_id))
        return out

    def book(self, token: RedemptionToken, slot_id: str, now: datetime) -> ConfirmationRecord:
        """Take one place in the slot and mint a confirmation record.

        The record stores no reference to token.voucher_code. On any failure
        the voucher use behind ``token`` is restored before raising.
        """
        try:
            with self.slots.lock:
                rec = self.slots.get(slot_id)
                if rec is None:
                    raise UnknownSlot("no such appointment slot")
                slot = AppointmentSlot.from_record(rec)
                if slot.booked >= slot.capacity:
                    raise SlotFull("slot is booked to capacity")
                slot.booked += 1
                self.slots.put(slot_id, slot.to_record())
        except (UnknownSlot, SlotFull):
            self.vouchers.compensate(token)
            raise

        try:
            with self.confirmations.lock:
                code = self._fresh_confirmation_code()
                record = ConfirmationRecord(
                    confirmation_code=code,
                    slot_id=slot_id,
                    status=STATUS_BOOKED,
                    created_at=now,
                )
                self.confirmations.put(code, record.to_record())
                return record
        except StorageUnavailable:
            # Undo the slot increment and the voucher use.
            with self.slots.lock:
                rec = self.slots.get(slot_id)
                if rec is not None:
                    slot = AppointmentSlot.from_record(rec)
                    slot.booked = max(0, slot.booked - 1)
                    self.slots.put(slot_id, slot.to_record())
            self.vouchers.compensate(token)
            raise

    def _fresh_confirmation_code(self) -> str:
        for _ in range(COLLISION_RETRIES):
            code = generate_code(self.confirmation_policy)
            if self.confirmations.get(code) is None:
                return code
        raise StorageUnavailable("could not draw a non-colliding confirmation code")

    def _load(self, confirmation_code: str) -> ConfirmationRecord:
        rec = self.confirmations.get(confirmation_code)
        if rec is None:
            raise NotFound("no such confirmation")
        return ConfirmationRecord.from_record(rec)

    def mark_performed(self, confirmation_code: str, now: datetime) -> None:
        with self.confirmations.lock:
            record = self._load(confirmation_code)
            if record.status != STATUS_BOOKED:
                raise WrongState(f"cannot mark performed from status {record.status!r}")
            record.status = STATUS_PERFORMED
            self.confirmations.put(confirmation_code, record.to_record())

    def post_result(
        self,
        confirmation_code: str,
        result: str,
        now: datetime,
        chain_limit: int,
        chain_ttl: timedelta,
    ) -> None:
        """Record the lab result; a positive one gets a fresh chain voucher.

        The chain voucher is an ordinary voucher with no back-reference; the
        confirmation record holds the only pointer to it.
        """
        if result not in RESULTS:
            raise ValueError(f"result must be one of {RESULTS}")
        with self.confirmations.lock:
            record = self._load(confirmation_code)
            if record.status != STATUS_PERFORMED:
                raise WrongState(f"cannot post a result from status {record.status!r}")
            chain: VoucherRecord | None = None
            if result == RESULT_POSITIVE:
                chain = self.vouchers.issue(limit=chain_limit, ttl=chain_ttl, now=now)
            record.status = STATUS_READY
            record.result = result
            record.result_at = now
            record.chain_voucher = chain.code if chain else None
            self.confirmations.put(confirmation_code, record.to_record())

    def lookup(self, confirmation_code: str, now: datetime) -> LookupResult:
        """Anonymous result lookup; needs nothing but the code."""
        record = self._load(confirmation_code)
        if record.status in (STATUS_BOOKED, STATUS_PERFORMED):
            return LookupResult(status="pending")
        return LookupResult(
            status="ready", result=record.result, chain_voucher=record.chain_voucher
        )

    def erase_confirmation(self, confirmation_code: str) -> None:
        if not self.confirmations.delete(confirmation_code):
            raise NotFound("no such confirmation")

    def sweep_confirmations(
        self,
        now: datetime,
        result_retention: timedelta = DEFAULT_RESULT_RETENTION,
        stale_booking_grace: timedelta = DEFAULT_STALE_BOOKING_GRACE,
    ) -> int:
        """Erase delivered results past retention and bookings that outlived
        their slot window by the stale grace; returns how many."""
        removed = 0
        with self.confirmations.lock:
            for code, rec in self.confirmations.items():
                record = ConfirmationRecord.from_record(rec)
                if record.status == STATUS_READY and record.result_at is not None:
                    if now >= record.result_at + result_retention:
                        self.confirmations.delete(code)
                        removed += 1
                elif record.status == STATUS_BOOKED:
                    slot = self.get_slot(record.slot_id)
                    window_end = slot.window_end if slot else record.created_at
                    if window_end is not None and now >= window_end + stale_booking_grace:
                        self.confirmations.delete(code)
                        removed += 1
        return removed
