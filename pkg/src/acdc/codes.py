"""Human-transcribable anonymous codes.

Codes use a Crockford-style base-32 alphabet (digits plus uppercase letters
with I, L, O and U removed), a 9-character random payload and one trailing
checksum character, rendered for humans as ``XXXXX-XXXXX``. The checksum is
a weighted sum modulo the alphabet size with odd position weights, so every
single-character substitution changes the sum by an odd multiple and is
detected.

Two namespaces share the format: voucher codes start with a letter,
confirmation codes start with a digit. A code from one namespace can never
validate under the other policy.
"""

from __future__ import annotations

import math
import secrets
from dataclasses import dataclass
from random import Random

from .errors import ChecksumMismatch, MalformedCode, PolicyTooWeak

ALPHABET = "0123456789ABCDEFGHJKMNPQRSTVWXYZ"

VOUCHER_FIRST_CHARS = "ABCDEFGHJKMNPQRSTVWXYZ"
CONFIRMATION_FIRST_CHARS = "0123456789"

MIN_ENTROPY_BITS = 40.0

# Transcription fixups for glyphs excluded from the alphabet.
_GLYPH_MAP = str.maketrans({"O": "0", "I": "1", "L": "1"})

_SEPARATORS = " -_."


@dataclass(frozen=True)
class CodePolicy:
    """Shape of a code: alphabet, payload length, checksum, namespace.

    ``first_chars`` restricts the leading payload character; it is how the
    voucher and confirmation namespaces stay disjoint.
    """

    alphabet: str = ALPHABET
    payload_length: int = 9
    checksum_enabled: bool = True
    first_chars: str | None = None

    @property
    def code_length(self) -> int:
        return self.payload_length + (1 if self.checksum_enabled else 0)

    def entropy_bits(self) -> float:
        first = len(self.first_chars) if self.first_chars else len(self.alphabet)
        return math.log2(first) + (self.payload_length - 1) * math.log2(len(self.alphabet))

    def validate(self) -> None:
        if self.payload_length < 1:
            raise PolicyTooWeak("payload_length must be at least 1")
        if len(set(self.alphabet)) != len(self.alphabet):
            raise PolicyTooWeak("alphabet has repeated characters")
        if self.first_chars is not None and not set(self.first_chars) <= set(self.alphabet):
            raise PolicyTooWeak("first_chars must be a subset of the alphabet")
        bits = self.entropy_bits()
        if bits < MIN_ENTROPY_BITS:
            raise PolicyTooWeak(
                f"payload entropy {bits:.1f} bits is below the {MIN_ENTROPY_BITS:.0f}-bit minimum"
            )


VOUCHER_POLICY = CodePolicy(first_chars=VOUCHER_FIRST_CHARS)
CONFIRMATION_POLICY = CodePolicy(first_chars=CONFIRMATION_FIRST_CHARS)


def checksum_char(payload: str, policy: CodePolicy = VOUCHER_POLICY) -> str:
    """Checksum over the payload: sum of odd-weighted character values mod 32.

    Odd weights are invertible modulo the alphabet size (a power of two), so
    any single substitution shifts the sum to a different residue.
    """
    base = len(policy.alphabet)
    total = 0
    for i, ch in enumerate(payload):
        total += (2 * i + 1) * policy.alphabet.index(ch)
    return policy.alphabet[total % base]


def generate_code(policy: CodePolicy = VOUCHER_POLICY, rng: Random | None = None) -> str:
    """Draw a fresh code under ``policy``; payload characters are uniform.

    ``rng`` defaults to the OS entropy source; pass a seeded ``Random`` only
    in tests.
    """
    policy.validate()
    choice = rng.choice if rng is not None else secrets.choice
    first_pool = policy.first_chars or policy.alphabet
    payload = choice(first_pool) + "".join(
        choice(policy.alphabet) for _ in range(policy.payload_length - 1)
    )
    if not policy.checksum_enabled:
        return payload
    return payload + checksum_char(payload, policy)


def render(code: str) -> str:
    """Display form: groups of five, hyphen-separated (``XXXXX-XXXXX``)."""
    return "-".join(code[i : i + 5] for i in range(0, len(code), 5))


def normalize(raw: str) -> str:
    """Case-fold, strip separators and map ambiguous glyphs. Idempotent."""
    out = raw.upper()
    for sep in _SEPARATORS:
        out = out.replace(sep, "")
    out = "".join(out.split())
    return out.translate(_GLYPH_MAP)


def normalize_and_check(raw: str, policy: CodePolicy = VOUCHER_POLICY) -> str:
    """Normalize user input and verify length, alphabet and checksum.

    Returns the canonical (unrendered) code. Raises ``MalformedCode`` when
    the input cannot be a code under this policy at all, ``ChecksumMismatch``
    when it is well-formed but fails the checksum.
    """
    code = normalize(raw)
    if len(code) != policy.code_length:
        raise MalformedCode(f"expected {policy.code_length} characters, got {len(code)}")
    if any(ch not in policy.alphabet for ch in code):
        raise MalformedCode("character outside the code alphabet")
    if policy.first_chars is not None and code[0] not in policy.first_chars:
        raise MalformedCode("code does not belong to this namespace")
    if policy.checksum_enabled:
        if checksum_char(code[:-1], policy) != code[-1]:
            raise ChecksumMismatch("checksum character does not verify")
    return code
