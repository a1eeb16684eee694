"""Exact expected coverage for small fixed outbreaks, by enumeration.

This is the independent check on the Monte-Carlo tracer: for a forest of
known shape (every seed has the same number of children, every child the
same number of grandchildren) the distribution of "which contacts get a
code" is enumerable, and expected coverage follows by linearity from the
per-node detection probabilities. The enumeration walks every recall
pattern of a sibling group, every cap-sized keep-subset, and both branches
of the comply and test draws — it shares no code with the tracer.

Only forward tracing over depth <= 2 forests with deterministic offspring
counts up to 3 is supported; anything else raises InstanceTooLarge.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product

from ..errors import InstanceTooLarge
from .config import GENERATION_INTERVAL_DAYS, SimConfig
from .outbreak import Person, TransmissionTree

MAX_FIXED_OFFSPRING = 3


@dataclass(frozen=True)
class FixedOutbreak:
    """Deterministic forest shape: seeds, children each, grandchildren each."""

    n_seeds: int = 1
    children_per_seed: int = 1
    grandchildren_per_child: int = 0

    def validate(self) -> None:
        if self.n_seeds < 1:
            raise InstanceTooLarge("need at least one seed")
        if not 0 <= self.children_per_seed <= MAX_FIXED_OFFSPRING:
            raise InstanceTooLarge(
                f"children_per_seed must be in [0, {MAX_FIXED_OFFSPRING}]"
            )
        if not 0 <= self.grandchildren_per_child <= MAX_FIXED_OFFSPRING:
            raise InstanceTooLarge(
                f"grandchildren_per_child must be in [0, {MAX_FIXED_OFFSPRING}]"
            )
        if self.children_per_seed == 0 and self.grandchildren_per_child > 0:
            raise InstanceTooLarge("grandchildren require children")

    @property
    def non_seed_count(self) -> int:
        per_seed = self.children_per_seed * (1 + self.grandchildren_per_child)
        return self.n_seeds * per_seed

    def to_tree(self) -> TransmissionTree:
        """Materialize the shape as a transmission forest for the tracer."""
        self.validate()
        people: dict[int, Person] = {}
        seed_ids = []
        next_id = 0
        for _ in range(self.n_seeds):
            seed = Person(id=next_id, infector_id=None, infection_day=0, generation=0)
            people[next_id] = seed
            seed_ids.append(next_id)
            next_id += 1
        parents = list(seed_ids)
        for depth, count in ((1, self.children_per_seed), (2, self.grandchildren_per_child)):
            next_parents = []
            for parent_id in parents:
                for _ in range(count):
                    child = Person(
                        id=next_id,
                        infector_id=parent_id,
                        infection_day=people[parent_id].infection_day
                        + GENERATION_INTERVAL_DAYS,
                        generation=depth,
                    )
                    people[next_id] = child
                    people[parent_id].children.append(next_id)
                    next_parents.append(next_id)
                    next_id += 1
            parents = next_parents
        return TransmissionTree(people=people, seed_ids=seed_ids)


def _per_child_detection_prob(siblings: int, config: SimConfig) -> float:
    """P(a given child of a detected parent is itself detected).

    Enumerates recall bits for the whole sibling group, the uniform choice
    of which recalled contacts keep a code when the cap binds, and the
    comply/test outcomes of the focal child (index 0).
    """
    p, cap = config.p_recall, config.voucher_cap
    total = 0.0
    for bits in product((0, 1), repeat=siblings):
        weight = 1.0
        for bit in bits:
            weight *= p if bit else (1.0 - p)
        if weight == 0.0 or not bits[0]:
            continue
        recalled = [i for i, bit in enumerate(bits) if bit]
        if len(recalled) <= cap:
            keep_prob = 1.0
        else:
            subsets = list(combinations(recalled, cap))
            keep_prob = sum(1 for s in subsets if 0 in s) / len(subsets)
        for comply, tests_positive in product((0, 1), repeat=2):
            if not (comply and tests_positive):
                continue
            total += (
                weight
                * keep_prob
                * (config.p_comply if comply else 1.0 - config.p_comply)
                * (config.test_sensitivity if tests_positive else 1.0 - config.test_sensitivity)
            )
    return total


def exact_expected_coverage(shape: FixedOutbreak, config: SimConfig) -> float:
    """Exact E[detected non-seeds / all non-seeds] for the fixed shape."""
    shape.validate()
    config.validate()
    if config.direction != "forward":
        raise InstanceTooLarge("enumeration supports forward tracing only")
    if shape.non_seed_count == 0:
        raise InstanceTooLarge("no non-seed agents: coverage undefined")

    child_prob = _per_child_detection_prob(shape.children_per_seed, config)
    expected = shape.children_per_seed * child_prob
    if shape.grandchildren_per_child:
        grandchild_prob = child_prob * _per_child_detection_prob(
            shape.grandchildren_per_child, config
        )
        expected += shape.children_per_seed * shape.grandchildren_per_child * grandchild_prob
    # Every seed's subtree is independent and identically shaped, so the
    # expected fraction equals the per-seed expectation over per-seed count.
    per_seed_non_seeds = shape.children_per_seed * (1 + shape.grandchildren_per_child)
    return expected / per_seed_non_seeds
