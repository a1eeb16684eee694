"""Shared-secret authentication for labs and admins.

Labs are the only authenticated parties in the system; citizens never are.
Secrets are high-entropy random strings handed out once; the credentials
file keeps ``lab_id:salt:sha256(salt || secret)`` per line, never the
secret itself. Verification is constant-time and answers identically for an
unknown lab and a wrong secret.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
from pathlib import Path


def _digest(salt: bytes, secret: str) -> bytes:
    return hashlib.sha256(salt + secret.encode("utf-8")).digest()


class LabRegistry:
    def __init__(self) -> None:
        self._entries: dict[str, tuple[bytes, bytes]] = {}  # lab_id -> (salt, digest)

    @classmethod
    def load(cls, path: str | Path) -> "LabRegistry":
        reg = cls()
        path = Path(path)
        if not path.exists():
            return reg
        for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split(":")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected lab_id:salt:hash")
            lab_id, salt_hex, digest_hex = parts
            reg._entries[lab_id] = (bytes.fromhex(salt_hex), bytes.fromhex(digest_hex))
        return reg

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [
            f"{lab_id}:{salt.hex()}:{digest.hex()}"
            for lab_id, (salt, digest) in sorted(self._entries.items())
        ]
        path.write_text("\n".join(lines) + ("\n" if lines else ""), encoding="utf-8")

    def add(self, lab_id: str) -> str:
        """Register a lab and return its secret — the only time it exists in clear."""
        if ":" in lab_id or not lab_id:
            raise ValueError("lab_id must be non-empty and contain no ':'")
        secret = secrets.token_urlsafe(24)
        salt = secrets.token_bytes(16)
        self._entries[lab_id] = (salt, _digest(salt, secret))
        return secret

    def verify(self, lab_id: str, secret: str) -> bool:
        entry = self._entries.get(lab_id)
        if entry is None:
            # Burn the same work as a real check so timing stays uniform.
            hmac.compare_digest(_digest(b"\x00" * 16, secret), b"\x00" * 32)
            return False
        salt, digest = entry
        return hmac.compare_digest(_digest(salt, secret), digest)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, lab_id: str) -> bool:
        return lab_id in self._entries
