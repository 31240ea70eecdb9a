"""Backend prediction model: executes a PolicyDirective at runtime.

The BPM is a deterministic rules engine.  It owns no state of its own; the
caller holds the :class:`PlacementMap` and feeds one :class:`CounterSnapshot`
per epoch boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .costmodel import exact_task_time
from .directive import Metric, PolicyDirective
from .errors import AllocationInfeasibleError, UnknownDeviceError
from .hints import AllocationHint, TaskProfile

__all__ = [
    "PlacementMap", "CounterSnapshot", "Place", "Migrate", "MapTask", "EpochDecisions",
    "place", "epoch_decisions", "map_task", "fastest_device", "TaskProfile",
    "format_decision_log", "parse_decision_log",
]


class PlacementMap:
    """Page -> tier mapping with per-tier occupancy bookkeeping."""

    def __init__(self, capacities: dict[str, int]):
        self.capacities = dict(capacities)
        self.page_tier: dict[int, str] = {}
        self.occupancy = {name: 0 for name in self.capacities}

    @classmethod
    def for_config(cls, config) -> "PlacementMap":
        return cls({t.name: t.capacity_pages for t in config.tiers})

    def free(self, tier: str) -> int:
        return self.capacities[tier] - self.occupancy[tier]

    def tier_of(self, page: int) -> str:
        return self.page_tier[page]

    def assign(self, page: int, tier: str) -> None:
        if page in self.page_tier:
            raise ValueError(f"page {page} is already placed in {self.page_tier[page]}")
        self.page_tier[page] = tier
        self.occupancy[tier] += 1

    def move(self, page: int, tier: str) -> None:
        old = self.page_tier[page]
        self.occupancy[old] -= 1
        self.occupancy[tier] += 1
        self.page_tier[page] = tier

    def pages_in(self, tier: str) -> list[int]:
        return sorted(p for p, t in self.page_tier.items() if t == tier)

    def problems(self) -> list[str]:
        out = []
        counted = {name: 0 for name in self.capacities}
        for page, tier in self.page_tier.items():
            if tier not in counted:
                out.append(f"page {page} sits in unknown tier {tier!r}")
                continue
            counted[tier] += 1
        for name, cap in self.capacities.items():
            if counted[name] != self.occupancy[name]:
                out.append(f"occupancy of {name} is {self.occupancy[name]}, mapping holds {counted[name]}")
            if self.occupancy[name] > cap:
                out.append(f"tier {name} holds {self.occupancy[name]} pages, capacity {cap}")
        return out

    def copy(self) -> "PlacementMap":
        dup = PlacementMap(self.capacities)
        dup.page_tier = dict(self.page_tier)
        dup.occupancy = dict(self.occupancy)
        return dup

    def to_dict(self) -> dict[str, str]:
        return {str(p): self.page_tier[p] for p in sorted(self.page_tier)}

    def __eq__(self, other):
        if not isinstance(other, PlacementMap):
            return NotImplemented
        return self.capacities == other.capacities and self.page_tier == other.page_tier

    def __repr__(self):
        return f"PlacementMap(occupancy={self.occupancy})"


@dataclass
class CounterSnapshot:
    epoch_index: int
    counters: dict[int, tuple[int, int]]  # page -> (reads, writes)
    occupancy: dict[str, int] = field(default_factory=dict)

    def metric(self, page: int, metric: Metric) -> int:
        reads, writes = self.counters.get(page, (0, 0))
        return writes if metric is Metric.WRITES else reads + writes


@dataclass(frozen=True)
class Place:
    page: int
    tier: str


@dataclass(frozen=True)
class Migrate:
    page: int
    from_tier: str
    to_tier: str
    reason: str

    def __post_init__(self):
        if self.from_tier == self.to_tier:
            raise ValueError(f"page {self.page}: migration from {self.from_tier} to itself")


@dataclass(frozen=True)
class MapTask:
    task: str
    device: str


class EpochDecisions(list):
    """Ordered Migrate decisions plus the number of proposals dropped per rule."""

    def __init__(self, items=(), truncated=None):
        super().__init__(items)
        self.truncated: dict[int, int] = dict(truncated or {})


def _ranked_tiers(directive: PolicyDirective, hint: AllocationHint):
    for rule in directive.placement_rules:
        if rule.when.matches(hint):
            yield from rule.tiers
            break
    catch_all = directive.catch_all
    if catch_all is not None:
        yield from catch_all.tiers


def place(directive: PolicyDirective, hint: AllocationHint, placement: PlacementMap,
          pages=None) -> list[Place]:
    """Place every page of ``hint`` in one tier and record it in ``placement``.

    The first tier of the matching rule with room for the whole variable wins;
    otherwise later ranks and then the catch-all rule are tried.  ``pages``
    defaults to fresh ids following the highest page already placed.
    """
    if pages is None:
        start = max(placement.page_tier, default=-1) + 1
        pages = range(start, start + hint.size_pages)
    pages = list(pages)
    for tier in _ranked_tiers(directive, hint):
        if tier in placement.capacities and placement.free(tier) >= len(pages):
            for page in pages:
                placement.assign(page, tier)
            return [Place(page, tier) for page in pages]
    raise AllocationInfeasibleError(
        f"no tier can hold {hint.symbol!r} ({len(pages)} pages)"
    )


def epoch_decisions(directive: PolicyDirective, snapshot: CounterSnapshot,
                    placement: PlacementMap) -> EpochDecisions:
    """Migration decisions for one epoch boundary.

    Each page appears at most once in the result, so a page promoted by one
    rule can never be demoted in the same list.
    """
    out = EpochDecisions()
    work = dict(placement.occupancy)
    caps = placement.capacities
    decided: set[int] = set()
    catch_all = directive.catch_all
    fallback = catch_all.tiers if catch_all is not None else ()

    for idx, rule in enumerate(directive.migration_rules):
        target = rule.target_tier
        dropped = 0
        resident = [p for p in placement.pages_in(target) if p not in decided]
        demote = [p for p in resident if snapshot.metric(p, rule.metric) <= rule.threshold_down]
        # coldest first, so a short destination still receives the least useful pages
        demote.sort(key=lambda p: (snapshot.metric(p, rule.metric), p))
        for page in demote:
            dest = next((t for t in fallback if t != target and work[t] < caps[t]), None)
            if dest is None:
                dropped += 1
                continue
            out.append(Migrate(page, target, dest, f"rule{idx}:demote"))
            work[target] -= 1
            work[dest] += 1
            decided.add(page)

        promote = [
            p for p in snapshot.counters
            if p not in decided
            and p in placement.page_tier
            and placement.page_tier[p] != target
            and snapshot.metric(p, rule.metric) >= rule.threshold_up
        ]
        promote.sort(key=lambda p: (-snapshot.metric(p, rule.metric), p))
        for page in promote:
            if work[target] >= caps[target]:
                dropped += 1
                continue
            source = placement.page_tier[page]
            out.append(Migrate(page, source, target, f"rule{idx}:promote"))
            work[source] -= 1
            work[target] += 1
            decided.add(page)
        if dropped:
            out.truncated[idx] = dropped
    return out


def fastest_device(task: TaskProfile, devices) -> str:
    """Device with the lowest estimated run time; ties go to the first declared."""
    best_name, best_time = None, None
    for dev in devices:
        t = exact_task_time(task, dev)
        if best_time is None or t < best_time:
            best_name, best_time = dev.name, t
    return best_name


def map_task(directive: PolicyDirective, task: TaskProfile, devices) -> MapTask:
    devices = list(devices)
    if not devices:
        raise UnknownDeviceError("no compute devices to map onto")
    names = {d.name for d in devices}
    for rule in directive.task_rules:
        if rule.when.matches(task):
            if rule.device is None:
                break
            if rule.device not in names:
                raise UnknownDeviceError(f"task rule names unknown device {rule.device!r}")
            return MapTask(task.name, rule.device)
    return MapTask(task.name, fastest_device(task, devices))


def format_decision_log(records) -> str:
    """One tab-separated line per ``(epoch, decision)``: epoch, variant, subject, source, target, reason."""
    lines = []
    for epoch, d in records:
        ep = "-" if epoch is None else str(epoch)
        if isinstance(d, Place):
            fields = ("place", str(d.page), "-", d.tier, "-")
        elif isinstance(d, Migrate):
            fields = ("migrate", str(d.page), d.from_tier, d.to_tier, d.reason)
        elif isinstance(d, MapTask):
            fields = ("map_task", d.task, "-", d.device, "-")
        else:
            raise TypeError(f"not a decision: {d!r}")
        lines.append("\t".join((ep,) + fields))
    return "".join(line + "\n" for line in lines)


def parse_decision_log(text: str) -> list:
    out = []
    for line in text.splitlines():
        if not line.strip():
            continue
        ep, variant, subject, source, target, reason = line.split("\t")
        epoch = None if ep == "-" else int(ep)
        if variant == "place":
            out.append((epoch, Place(int(subject), target)))
        elif variant == "migrate":
            out.append((epoch, Migrate(int(subject), source, target, reason)))
        elif variant == "map_task":
            out.append((epoch, MapTask(subject, target)))
        else:
            raise ValueError(f"unknown decision variant {variant!r}")
    return out
