"""Replay voucher tracing (or an app baseline) over a transmission forest.

Seeds enter the process already diagnosed, at symptom onset one generation
interval after their own infection. Every detected positive receives a
voucher and offers codes: forward to each true infectee they recall
(independent Bernoulli per contact), backward to their infector when the
direction switch says so, plus a Poisson number of suspected-but-uninfected
contacts that fill whatever is left of the voucher's cap. When more true
contacts are recalled than the cap allows, the cap-sized subset kept is
uniformly random. Recipients comply with a Bernoulli draw, wait out the
booking and result delays, and test with the configured sensitivity
(specificity for the uninfected); positives recurse.

Randomness discipline: every decision about an agent is a deterministic
hash of (seed, purpose, agent), independent of visit order. That makes runs
reproducible and gives monotone coupling under common random numbers:
raising p_recall only ever adds recalled contacts (their recall draws are
larger than all previously recalled ones, and selection keeps the cap
smallest draws, so selected sets are nested), and raising the cap, the
compliance, the sensitivity or the adoption rate can only turn more
decisions positive.

The app baseline replaces recall with adoption: an infection edge can carry
a notification only when both of its endpoints adopted the app. Detection
still starts from diagnosed seeds and flows along tree edges, so the
probability a first-generation case is reached is adoption squared.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from random import Random

from .config import GENERATION_INTERVAL_DAYS, SimConfig
from .outbreak import TransmissionTree, sample_poisson

RESULT_POSITIVE = "positive"
RESULT_NEGATIVE = "negative"

# Deterministic stop for degenerate configs where false-positive chains
# would branch forever (specificity near 0 with a high suspected-contact
# rate). Default parameters stay far below it.
MAX_EXTRA_AGENTS = 10_000


@dataclass
class AgentTrace:
    received_voucher_day: int | None = None
    tested_day: int | None = None
    test_result: str | None = None
    detected: bool = False


@dataclass
class TraceTotals:
    vouchers_issued: int = 0
    redemptions: int = 0
    tests_performed: int = 0
    true_positives: int = 0
    false_negatives: int = 0
    wasted_uses: int = 0


@dataclass
class TraceOutcome:
    agents: dict[int, AgentTrace]
    totals: TraceTotals
    events: list[dict] = field(default_factory=list)


def _uniform(seed: int, purpose: str, agent: object) -> float:
    """Stable per-(seed, purpose, agent) draw in [0, 1)."""
    digest = hashlib.sha256(f"{seed}|{purpose}|{agent}".encode()).digest()
    return int.from_bytes(digest[:8], "big") / 2**64


def _diagnosis_day(infection_day: int) -> int:
    return infection_day + GENERATION_INTERVAL_DAYS


def run_acdc_tracing(
    tree: TransmissionTree,
    config: SimConfig,
    seed: int,
    events: list[dict] | None = None,
) -> TraceOutcome:
    config.validate()
    forward = config.direction in ("forward", "both")
    backward = config.direction in ("backward", "both")
    agents = {pid: AgentTrace() for pid in tree.people}
    totals = TraceTotals()
    outcome = TraceOutcome(agents=agents, totals=totals, events=events if events is not None else [])
    log = events is not None

    offered: set[object] = set()
    extras_spawned = 0
    # Queue of (distributor key, is_infected_person, distribution day).
    queue: deque[tuple[object, bool, int]] = deque()

    for sid in tree.seed_ids:
        day = _diagnosis_day(tree.people[sid].infection_day)
        agents[sid].received_voucher_day = day
        offered.add(sid)
        totals.vouchers_issued += 1
        if log:
            outcome.events.append({"day": day, "event": "seed_diagnosed", "agent": sid})
        queue.append((sid, True, day))

    while queue:
        dist_key, is_person, day = queue.popleft()

        # Candidates the distributor can recall, with their recall draws.
        recalled: list[tuple[float, int]] = []
        if is_person:
            person = tree.people[dist_key]  # type: ignore[index]
            if forward:
                for child_id in person.children:
                    u = _uniform(seed, "recall", child_id)
                    if u < config.p_recall:
                        recalled.append((u, child_id))
            if backward and person.infector_id is not None:
                u = _uniform(seed, "recall_back", dist_key)
                if u < config.p_recall:
                    recalled.append((u, person.infector_id))
        # Keep the cap smallest recall draws: a uniform subset, and nested
        # both in the cap and in p_recall (see module docstring).
        recalled.sort()
        selected = [pid for _, pid in recalled[: config.voucher_cap]]

        budget = config.voucher_cap - len(selected)
        extras_rng = Random(f"{seed}:extras:{dist_key}")
        n_extras = min(
            sample_poisson(extras_rng, config.suspected_contacts_per_case), budget
        )
        if extras_spawned + n_extras > MAX_EXTRA_AGENTS:
            n_extras = max(0, MAX_EXTRA_AGENTS - extras_spawned)
        extras_spawned += n_extras

        for pid in selected:
            if pid in offered:
                continue
            offered.add(pid)
            person = tree.people[pid]
            received = max(day, person.infection_day)
            agents[pid].received_voucher_day = received
            if log:
                outcome.events.append({"day": received, "event": "code_received", "agent": pid})
            if _uniform(seed, "comply", pid) >= config.p_comply:
                continue
            totals.redemptions += 1
            tested = received + config.booking_delay_days
            agents[pid].tested_day = tested
            totals.tests_performed += 1
            if _uniform(seed, "test", pid) < config.test_sensitivity:
                agents[pid].test_result = RESULT_POSITIVE
                agents[pid].detected = True
                totals.true_positives += 1
                result_day = tested + config.result_delay_days
                totals.vouchers_issued += 1  # chain voucher
                if log:
                    outcome.events.append(
                        {"day": result_day, "event": "detected", "agent": pid}
                    )
                queue.append((pid, True, result_day))
            else:
                agents[pid].test_result = RESULT_NEGATIVE
                totals.false_negatives += 1

        for i in range(n_extras):
            xkey = f"{dist_key}/x{i}"
            if _uniform(seed, "comply", xkey) >= config.p_comply:
                continue
            totals.redemptions += 1
            totals.tests_performed += 1
            if _uniform(seed, "test", xkey) < 1.0 - config.test_specificity:
                # A false positive gets a chain voucher like any positive,
                # but has no true infectees to pass it to.
                result_day = day + config.booking_delay_days + config.result_delay_days
                totals.vouchers_issued += 1
                if log:
                    outcome.events.append(
                        {"day": result_day, "event": "false_positive", "agent": xkey}
                    )
                queue.append((xkey, False, result_day))

    totals.wasted_uses = totals.redemptions - totals.true_positives
    return outcome


def run_app_tracing(
    tree: TransmissionTree,
    config: SimConfig,
    seed: int,
    events: list[dict] | None = None,
) -> TraceOutcome:
    """App-adoption baseline: an edge notifies only if both endpoints adopt.

    Comply and test draws reuse the same per-agent purposes as the voucher
    run, so at full adoption the two processes detect identical sets.
    Voucher accounting fields stay zero — there are no vouchers here.
    """
    config.validate()
    agents = {pid: AgentTrace() for pid in tree.people}
    totals = TraceTotals()
    outcome = TraceOutcome(agents=agents, totals=totals, events=events if events is not None else [])
    log = events is not None

    def adopts(pid: int) -> bool:
        return _uniform(seed, "adopt", pid) < config.app_adoption

    queue: deque[tuple[int, int]] = deque()
    for sid in tree.seed_ids:
        day = _diagnosis_day(tree.people[sid].infection_day)
        if log:
            outcome.events.append({"day": day, "event": "seed_diagnosed", "agent": sid})
        queue.append((sid, day))

    while queue:
        pid, day = queue.popleft()
        if not adopts(pid):
            continue
        for child_id in tree.children_of(pid):
            if not adopts(child_id):
                continue
            child = tree.people[child_id]
            received = max(day, child.infection_day)
            agents[child_id].received_voucher_day = received
            if log:
                outcome.events.append(
                    {"day": received, "event": "notified", "agent": child_id}
                )
            if _uniform(seed, "comply", child_id) >= config.p_comply:
                continue
            tested = received + config.booking_delay_days
            agents[child_id].tested_day = tested
            totals.tests_performed += 1
            if _uniform(seed, "test", child_id) < config.test_sensitivity:
                agents[child_id].test_result = RESULT_POSITIVE
                agents[child_id].detected = True
                totals.true_positives += 1
                queue.append((child_id, tested + config.result_delay_days))
            else:
                agents[child_id].test_result = RESULT_NEGATIVE
                totals.false_negatives += 1

    return outcome
