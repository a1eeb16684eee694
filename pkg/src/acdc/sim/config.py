"""Simulation parameters.

Defaults follow the pilot framing: vouchers capped at 6 uses (the working
upper bound on the reproductive number), 70% chance an infected person
names any given true contact, 90% compliance among recipients, one day each
to book and to receive results. ``app_adoption`` only matters for the
app-tracing baseline, where an infection edge is traceable only when both
endpoints run the app.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from pathlib import Path

from ..errors import UnknownParameter

GENERATION_INTERVAL_DAYS = 5

DIRECTIONS = ("forward", "backward", "both")


@dataclass(frozen=True)
class SimConfig:
    n_seeds: int = 3
    offspring_mean: float = 2.5
    offspring_max: int = 6
    p_recall: float = 0.70
    p_comply: float = 0.90
    voucher_cap: int = 6
    test_sensitivity: float = 0.95
    test_specificity: float = 0.99
    result_delay_days: int = 1
    booking_delay_days: int = 1
    horizon_days: int = 25
    app_adoption: float = 0.6
    suspected_contacts_per_case: float = 1.0
    direction: str = "forward"
    rng_seed: int = 0

    def validate(self) -> None:
        probs = {
            "p_recall": self.p_recall,
            "p_comply": self.p_comply,
            "test_sensitivity": self.test_sensitivity,
            "test_specificity": self.test_specificity,
            "app_adoption": self.app_adoption,
        }
        for name, value in probs.items():
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {value}")
        if self.n_seeds < 1:
            raise ValueError("n_seeds must be at least 1")
        if not 0.0 <= self.offspring_mean <= 6.0:
            raise ValueError("offspring_mean must be in [0, 6]")
        if not 0 <= self.offspring_max <= 10:
            raise ValueError("offspring_max must be in [0, 10]")
        if self.voucher_cap < 1:
            raise ValueError("voucher_cap must be at least 1")
        if self.result_delay_days < 0 or self.booking_delay_days < 0:
            raise ValueError("delays must be non-negative")
        if self.horizon_days < 0:
            raise ValueError("horizon_days must be non-negative")
        if self.suspected_contacts_per_case < 0:
            raise ValueError("suspected_contacts_per_case must be non-negative")
        if self.direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")

    def replace(self, **changes) -> "SimConfig":
        if any(name not in _FIELD_TYPES for name in changes):
            unknown = [name for name in changes if name not in _FIELD_TYPES]
            raise UnknownParameter(f"unknown simulation parameter(s): {', '.join(unknown)}")
        cfg = dataclasses.replace(self, **changes)
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "SimConfig":
        """Read a ``[sim]`` section of ``key = value`` pairs."""
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"config file not found: {path}")
        parser = configparser.ConfigParser()
        with path.open("r", encoding="utf-8") as fh:
            parser.read_file(fh, source=str(path))
        if not parser.has_section("sim"):
            raise ValueError(f"{path}: missing [sim] section")
        values: dict = {}
        for key, raw in parser["sim"].items():
            if key not in _FIELD_TYPES:
                raise UnknownParameter(f"{path}: unknown simulation parameter {key!r}")
            values[key] = _FIELD_TYPES[key](raw)
        cfg = cls(**values)
        cfg.validate()
        return cfg


# Parser per config field, keyed off the dataclass annotations.
_PARSERS = {"int": int, "float": float, "str": str}
_FIELD_TYPES = {f.name: _PARSERS[str(f.type)] for f in dataclasses.fields(SimConfig)}


def parameter_parser(name: str):
    """Value parser for a config field; raises UnknownParameter otherwise."""
    if name not in _FIELD_TYPES:
        raise UnknownParameter(f"unknown simulation parameter {name!r}")
    return _FIELD_TYPES[name]
