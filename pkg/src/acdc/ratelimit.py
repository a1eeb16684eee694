"""Token-bucket throttling for code-bearing endpoints.

Codes carry ~45 bits of entropy, so guessing is only a concern if a client
can hammer the service; a small per-client bucket closes that off. Client
keys are truncated network prefixes, never full addresses, and live only in
memory.
"""

from __future__ import annotations

import ipaddress
import threading
from dataclasses import dataclass


@dataclass(frozen=True)
class RateDecision:
    allowed: bool
    retry_after: float = 0.0
    tokens_left: float = 0.0


class TokenBucketLimiter:
    """One bucket per client key: ``capacity`` tokens, steady refill.

    Decisions are a pure function of (stored state, now), so tests drive it
    with explicit clocks.
    """

    def __init__(self, capacity: int, refill_per_second: float) -> None:
        if capacity < 1 or refill_per_second <= 0:
            raise ValueError("capacity must be >= 1 and refill rate positive")
        self.capacity = capacity
        self.refill_per_second = refill_per_second
        self._buckets: dict[str, tuple[float, float]] = {}  # key -> (tokens, last_ts)
        self._lock = threading.Lock()

    def check(self, key: str, now: float) -> RateDecision:
        with self._lock:
            tokens, last = self._buckets.get(key, (float(self.capacity), now))
            tokens = min(self.capacity, tokens + max(0.0, now - last) * self.refill_per_second)
            if tokens >= 1.0:
                tokens -= 1.0
                self._buckets[key] = (tokens, now)
                return RateDecision(allowed=True, tokens_left=tokens)
            self._buckets[key] = (tokens, now)
            retry = (1.0 - tokens) / self.refill_per_second
            return RateDecision(allowed=False, retry_after=retry, tokens_left=tokens)

    def reset(self) -> None:
        with self._lock:
            self._buckets.clear()


def client_key(address: str) -> str:
    """Rate-limit key for a client address: /16 for IPv4, /48 for IPv6.

    The truncation is deliberate: the key is useful for throttling but too
    coarse to identify a household.
    """
    try:
        ip = ipaddress.ip_address(address)
    except ValueError:
        return "unparsed"
    prefix = 16 if ip.version == 4 else 48
    network = ipaddress.ip_network(f"{address}/{prefix}", strict=False)
    return str(network)
