"""Ground-truth transmission forests from a truncated branching process.

Each infected agent draws Poisson(offspring_mean) secondary cases, hard-
capped at offspring_max, and infects them one generation interval (5 days)
later. Generation stops at the horizon, so the forest is finite. The forest
is the ground truth that tracing runs are scored against; agents carry no
attributes beyond the tree structure and timing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from random import Random

from .config import GENERATION_INTERVAL_DAYS, SimConfig


@dataclass
class Person:
    id: int
    infector_id: int | None
    infection_day: int
    generation: int
    symptomatic: bool = True
    children: list[int] = field(default_factory=list)


@dataclass
class TransmissionTree:
    people: dict[int, Person]
    seed_ids: list[int]

    def __len__(self) -> int:
        return len(self.people)

    @property
    def non_seed_ids(self) -> list[int]:
        return [pid for pid, p in self.people.items() if p.infector_id is not None]

    def children_of(self, pid: int) -> list[int]:
        return self.people[pid].children

    def max_generation(self) -> int:
        return max((p.generation for p in self.people.values()), default=0)


def sample_poisson(rng: Random, mean: float) -> int:
    """Knuth inversion; exact and fast for the small means used here."""
    if mean <= 0:
        return 0
    threshold = math.exp(-mean)
    k = 0
    p = 1.0
    while True:
        p *= rng.random()
        if p <= threshold:
            return k
        k += 1


def capped_poisson_mean(mean: float, cap: int) -> float:
    """Analytic E[min(Poisson(mean), cap)]; the oracle for offspring draws."""
    if mean <= 0:
        return 0.0
    total = 0.0
    tail = 1.0  # P(X >= cap), updated as we subtract the head
    pmf = math.exp(-mean)
    for k in range(cap):
        total += k * pmf
        tail -= pmf
        pmf *= mean / (k + 1)
    return total + cap * tail


def generate_outbreak(config: SimConfig, seed: int) -> TransmissionTree:
    """Grow the forest generation by generation; deterministic given seed."""
    config.validate()
    rng = Random(f"outbreak:{seed}")
    people: dict[int, Person] = {}
    seed_ids = []
    next_id = 0
    frontier: list[int] = []
    for _ in range(config.n_seeds):
        person = Person(id=next_id, infector_id=None, infection_day=0, generation=0)
        people[next_id] = person
        seed_ids.append(next_id)
        frontier.append(next_id)
        next_id += 1

    while frontier:
        next_frontier: list[int] = []
        for parent_id in frontier:
            parent = people[parent_id]
            child_day = parent.infection_day + GENERATION_INTERVAL_DAYS
            if child_day > config.horizon_days:
                continue
            n_children = min(
                sample_poisson(rng, config.offspring_mean), config.offspring_max
            )
            for _ in range(n_children):
                child = Person(
                    id=next_id,
                    infector_id=parent_id,
                    infection_day=child_day,
                    generation=parent.generation + 1,
                )
                people[next_id] = child
                parent.children.append(next_id)
                next_frontier.append(next_id)
                next_id += 1
        frontier = next_frontier

    return TransmissionTree(people=people, seed_ids=seed_ids)
