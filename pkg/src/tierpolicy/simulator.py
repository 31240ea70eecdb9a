"""Epoch-driven trace replay over a SystemConfig, driven by the BPM."""

from __future__ import annotations

import csv
import io
import json
from array import array
from dataclasses import dataclass, field

from . import kernels
from .bpm import CounterSnapshot, PlacementMap, epoch_decisions, format_decision_log, map_task, place
from .costmodel import estimate_task_time, latency_table, migration_cost_ns
from .directive import PolicyDirective, check_directive
from .errors import AllocationInfeasibleError, OracleTooLargeError, SimulationInvariantError
from .system import SystemConfig
from .workload import Workload

ORACLE_MAX_ASSIGNMENTS = 10**6

EPOCH_FIELDS = (
    "epoch", "events", "access_latency_ns", "migration_count", "migrated_bytes", "migration_cost_ns",
)


@dataclass
class Metrics:
    total_access_latency_ns: int
    mean_access_latency_ns: float
    migration_count: int
    migrated_bytes: int
    migration_cost_ns: int
    events: int
    per_epoch: list[dict]
    tasks: dict[str, dict]
    makespan_sec: float
    final_placement: PlacementMap
    decision_log: str = ""
    seed: int = 0

    @property
    def total_cost_ns(self) -> int:
        return self.total_access_latency_ns + self.migration_cost_ns

    def to_dict(self) -> dict:
        return {
            "total_access_latency_ns": self.total_access_latency_ns,
            "mean_access_latency_ns": self.mean_access_latency_ns,
            "migration_count": self.migration_count,
            "migrated_bytes": self.migrated_bytes,
            "migration_cost_ns": self.migration_cost_ns,
            "total_cost_ns": self.total_cost_ns,
            "events": self.events,
            "per_epoch": [dict(e) for e in self.per_epoch],
            "tasks": {k: dict(v) for k, v in sorted(self.tasks.items())},
            "makespan_sec": self.makespan_sec,
            "final_placement": self.final_placement.to_dict(),
            "decision_log": self.decision_log,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def epoch_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=EPOCH_FIELDS, lineterminator="\n")
        writer.writeheader()
        for row in self.per_epoch:
            writer.writerow(row)
        return buf.getvalue()


def _trace_arrays(workload: Workload, page_ids):
    index = {p: i for i, p in enumerate(page_ids)}
    pages = array("q", [index[e.page_id] for e in workload.trace])
    ops = array("B", [1 if e.op == "write" else 0 for e in workload.trace])
    return index, pages, ops


def run_simulation(config: SystemConfig, directive: PolicyDirective, workload: Workload,
                   seed: int = 0) -> Metrics:
    """Replay ``workload`` under ``directive``.

    Latency of an access to a frequency-sensitive tier depends on whether the
    page was hot (touched at least the tier's threshold) in the previous
    epoch; nothing is hot in epoch 0.  Migrations are decided between epochs
    and charged to a separate migration ledger.
    """
    check_directive(directive, config)
    workload.check()
    placement = PlacementMap.for_config(config)
    log: list = []
    for hint in workload.manifest:
        for d in place(directive, hint, placement, workload.symbol_to_pages[hint.symbol]):
            log.append((None, d))

    page_ids = sorted(placement.page_tier)
    index, pages, ops = _trace_arrays(workload, page_ids)
    tier_index = {t.name: i for i, t in enumerate(config.tiers)}
    n = len(page_ids)
    page_tier = array("q", [tier_index[placement.page_tier[p]] for p in page_ids])
    prev = array("q", bytes(8 * n))
    page_latency = array("q", bytes(8 * n))
    table, thresholds = latency_table(config)

    length = config.epoch_length_events
    n_events = len(pages)
    n_epochs = -(-n_events // length)
    per_epoch = []
    total_latency = migrations = migration_cost = 0
    for k in range(n_epochs):
        start, stop = k * length, min((k + 1) * length, n_events)
        reads = array("q", bytes(8 * n))
        writes = array("q", bytes(8 * n))
        latency = kernels.charge_epoch(pages, ops, start, stop, page_tier, prev, reads, writes,
                                       table, thresholds, page_latency)
        entry = {"epoch": k, "events": stop - start, "access_latency_ns": latency,
                 "migration_count": 0, "migrated_bytes": 0, "migration_cost_ns": 0}
        if k + 1 < n_epochs:
            snapshot = CounterSnapshot(
                k,
                {page_ids[i]: (reads[i], writes[i]) for i in range(n) if reads[i] or writes[i]},
                dict(placement.occupancy),
            )
            for d in epoch_decisions(directive, snapshot, placement):
                cost = migration_cost_ns(config, config.tier(d.from_tier), config.tier(d.to_tier))
                placement.move(d.page, d.to_tier)
                page_tier[index[d.page]] = tier_index[d.to_tier]
                entry["migration_count"] += 1
                entry["migration_cost_ns"] += cost
                log.append((k, d))
            entry["migrated_bytes"] = entry["migration_count"] * config.page_size_bytes
            problems = placement.problems()
            if problems:
                raise SimulationInvariantError(f"after epoch {k}: " + "; ".join(problems))
        prev = array("q", [reads[i] + writes[i] for i in range(n)])
        total_latency += latency
        migrations += entry["migration_count"]
        migration_cost += entry["migration_cost_ns"]
        per_epoch.append(entry)

    tasks, load = {}, {}
    for task in workload.tasks:
        decision = map_task(directive, task, config.devices)
        seconds = estimate_task_time(task, config.device(decision.device))
        tasks[task.name] = {"device": decision.device, "estimated_time_sec": seconds}
        load[decision.device] = load.get(decision.device, 0.0) + seconds
        log.append((None, decision))

    return Metrics(
        total_access_latency_ns=total_latency,
        mean_access_latency_ns=total_latency / n_events if n_events else 0.0,
        migration_count=migrations,
        migrated_bytes=migrations * config.page_size_bytes,
        migration_cost_ns=migration_cost,
        events=n_events,
        per_epoch=per_epoch,
        tasks=tasks,
        makespan_sec=max(load.values(), default=0.0),
        final_placement=placement,
        decision_log=format_decision_log(log),
        seed=seed,
    )


def symbol_tier_costs(config: SystemConfig, workload: Workload) -> dict[str, list[int]]:
    """Total latency each symbol would incur, statically resident in each tier.

    Hotness depends only on a page's own access counts, so symbols are
    independent and one migration-free replay per tier suffices.
    """
    page_ids = sorted(p for pages in workload.symbol_to_pages.values() for p in pages)
    index, pages, ops = _trace_arrays(workload, page_ids)
    n = len(page_ids)
    table, thresholds = latency_table(config)
    length = config.epoch_length_events
    costs = {h.symbol: [] for h in workload.manifest}
    for t in range(len(config.tiers)):
        page_tier = array("q", [t]) * n
        prev = array("q", bytes(8 * n))
        page_latency = array("q", bytes(8 * n))
        for start in range(0, len(pages), length):
            reads = array("q", bytes(8 * n))
            writes = array("q", bytes(8 * n))
            kernels.charge_epoch(pages, ops, start, min(start + length, len(pages)), page_tier, prev,
                                 reads, writes, table, thresholds, page_latency)
            prev = array("q", [reads[i] + writes[i] for i in range(n)])
        for hint in workload.manifest:
            costs[hint.symbol].append(sum(page_latency[index[p]] for p in workload.symbol_to_pages[hint.symbol]))
    return costs


def static_oracle(config: SystemConfig, workload: Workload) -> tuple[PlacementMap, int]:
    """Best migration-free symbol-level placement, by exhaustive enumeration.

    Refuses instances with more than ``ORACLE_MAX_ASSIGNMENTS`` candidate
    assignments.  Ties resolve to the lexicographically smallest assignment
    (symbols in manifest order, tiers in declaration order).
    """
    workload.check()
    n_sym, n_tiers = len(workload.manifest), len(config.tiers)
    if n_tiers ** n_sym > ORACLE_MAX_ASSIGNMENTS:
        raise OracleTooLargeError(
            f"{n_tiers}^{n_sym} assignments exceed the oracle bound of {ORACLE_MAX_ASSIGNMENTS}"
        )
    costs = symbol_tier_costs(config, workload)
    flat = array("q")
    for hint in workload.manifest:
        flat.extend(costs[hint.symbol])
    sizes = array("q", [h.size_pages for h in workload.manifest])
    caps = array("q", [t.capacity_pages for t in config.tiers])
    choice, total = kernels.best_assignment(flat, sizes, caps, n_sym, n_tiers)
    if choice is None:
        raise AllocationInfeasibleError("no capacity-feasible static placement exists")
    placement = PlacementMap.for_config(config)
    for hint, t in zip(workload.manifest, choice):
        for page in workload.symbol_to_pages[hint.symbol]:
            placement.assign(page, config.tiers[t].name)
    return placement, total


def symbol_assignment(placement: PlacementMap, workload: Workload) -> dict[str, str]:
    """Collapse a page placement to symbol -> tier (first page decides)."""
    return {
        h.symbol: placement.page_tier[workload.symbol_to_pages[h.symbol][0]]
        for h in workload.manifest
    }
