"""Domain errors shared across the voucher, booking and service layers.

Error classes carry no payload beyond the message; in particular they never
echo the code that triggered them, so responses built from them cannot leak
whether a code once existed.
"""


class AcdcError(Exception):
    """Base class for all domain errors."""


class PolicyTooWeak(AcdcError):
    """Code policy provides fewer than the required bits of entropy."""


class MalformedCode(AcdcError):
    """Input is not a code: wrong length or character outside the alphabet."""


class ChecksumMismatch(AcdcError):
    """Code is well-formed but its checksum character does not verify."""


class NotFound(AcdcError):
    """No live record for this key (never issued or already erased)."""


class Exhausted(AcdcError):
    """Voucher has no remaining uses."""


class Expired(AcdcError):
    """Voucher is past its expiry timestamp."""


class StorageUnavailable(AcdcError):
    """The backing store cannot accept the operation."""


class UnknownLocation(AcdcError):
    """No testing location with this id."""


class UnknownSlot(AcdcError):
    """No appointment slot with this id."""


class SlotFull(AcdcError):
    """Slot already booked to capacity."""


class WrongState(AcdcError):
    """Record is not in the status required by this transition."""


class InstanceTooLarge(AcdcError):
    """Exact enumeration is only supported for small fixed outbreaks."""


class UnknownParameter(AcdcError):
    """Sweep parameter is not a simulation config field."""
