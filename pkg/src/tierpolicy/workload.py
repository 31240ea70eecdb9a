"""Workloads: variable manifest, access trace, task profiles."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import NamedTuple

from .errors import ConfigError, UnknownKeyError, WorkloadError
from .hints import AccessClass, AccessPattern, Affinity, AllocationHint, TaskProfile
from .kvformat import format_section, parse_document


class AccessEvent(NamedTuple):
    seq_no: int
    page_id: int
    op: str  # "read" | "write"


@dataclass(frozen=True)
class GeneratorParams:
    epochs: int
    hot_symbols: tuple[str, ...] = ()
    hot_accesses_per_epoch: int = 0
    cold_accesses_per_epoch: int = 0
    write_fraction: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "hot_symbols", tuple(self.hot_symbols))
        if min(self.epochs, self.hot_accesses_per_epoch, self.cold_accesses_per_epoch) < 0:
            raise WorkloadError("generator counts must be non-negative")
        if not 0 <= self.write_fraction <= 1:
            raise WorkloadError("write_fraction must lie in [0, 1]")


@dataclass(frozen=True)
class Workload:
    manifest: tuple[AllocationHint, ...]
    trace: tuple[AccessEvent, ...] = ()
    tasks: tuple[TaskProfile, ...] = ()
    symbol_to_pages: dict[str, range] = field(default_factory=dict)
    # Set by the generator: events per generated epoch.
    events_per_epoch: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "manifest", tuple(self.manifest))
        object.__setattr__(self, "trace", tuple(self.trace))
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if not self.symbol_to_pages:
            object.__setattr__(self, "symbol_to_pages", sequential_layout(self.manifest))

    def problems(self) -> list[str]:
        out = []
        symbols = [h.symbol for h in self.manifest]
        if len(set(symbols)) != len(symbols):
            out.append("manifest declares a symbol twice")
        for hint in self.manifest:
            pages = self.symbol_to_pages.get(hint.symbol)
            if pages is None:
                out.append(f"symbol {hint.symbol!r} has no page range")
            elif len(pages) != hint.size_pages:
                out.append(f"symbol {hint.symbol!r} spans {len(pages)} pages, manifest says {hint.size_pages}")
        owner = {}
        for sym, pages in self.symbol_to_pages.items():
            for p in pages:
                if p in owner:
                    out.append(f"page {p} belongs to both {owner[p]!r} and {sym!r}")
                    break
                owner[p] = sym
        last = -1
        for ev in self.trace:
            if ev.seq_no <= last:
                out.append(f"seq_no {ev.seq_no} does not increase")
                break
            last = ev.seq_no
            if ev.page_id not in owner:
                out.append(f"trace page {ev.page_id} is not covered by any symbol")
                break
            if ev.op not in ("read", "write"):
                out.append(f"event {ev.seq_no}: unknown op {ev.op!r}")
                break
        return out

    def check(self) -> "Workload":
        problems = self.problems()
        if problems:
            raise WorkloadError("; ".join(problems))
        return self

    def with_trace(self, trace, events_per_epoch=None) -> "Workload":
        return Workload(self.manifest, tuple(trace), self.tasks, dict(self.symbol_to_pages), events_per_epoch)


def sequential_layout(manifest) -> dict[str, range]:
    layout, start = {}, 0
    for hint in manifest:
        layout[hint.symbol] = range(start, start + hint.size_pages)
        start += hint.size_pages
    return layout


_VARIABLE_KEYS = {"size_pages", "affinity", "access_class", "access_pattern", "first_page"}
_TASK_KEYS = {"total_work_ops", "parallel_fraction", "memory_bound", "pointer_chasing"}
_GENERATOR_KEYS = {"epochs", "hot_symbols", "hot_accesses_per_epoch", "cold_accesses_per_epoch", "write_fraction"}


@dataclass(frozen=True)
class WorkloadSpec:
    """Parsed workload manifest document."""

    manifest: tuple[AllocationHint, ...]
    tasks: tuple[TaskProfile, ...]
    symbol_to_pages: dict[str, range]
    generator: GeneratorParams | None = None

    def workload(self, trace=()) -> Workload:
        return Workload(self.manifest, tuple(trace), self.tasks, dict(self.symbol_to_pages)).check()


def parse_workload(text: str) -> WorkloadSpec:
    """Parse ``[variable ...]``, ``[task ...]`` and ``[generator]`` sections."""
    hints, tasks, generator = [], [], None
    layout, explicit, cursor = {}, False, 0
    seen = set()
    for sec in parse_document(text):
        if sec.kind in ("variable", "task"):
            if not sec.name:
                raise ConfigError(f"line {sec.line}: [{sec.kind}] section needs a name")
            if (sec.kind, sec.name) in seen:
                raise ConfigError(f"line {sec.line}: duplicate {sec.kind} {sec.name!r}")
            seen.add((sec.kind, sec.name))
        try:
            if sec.kind == "variable":
                sec.check_keys(_VARIABLE_KEYS)
                hint = AllocationHint(
                    symbol=sec.name,
                    size_pages=sec.int("size_pages"),
                    affinity=Affinity(sec.str("affinity", "none")),
                    access_class=AccessClass(sec.str("access_class", "unknown")),
                    access_pattern=AccessPattern(sec.str("access_pattern", "unknown")),
                )
                if sec.has("first_page"):
                    explicit = True
                    cursor = sec.int("first_page")
                layout[hint.symbol] = range(cursor, cursor + hint.size_pages)
                cursor += hint.size_pages
                hints.append(hint)
            elif sec.kind == "task":
                sec.check_keys(_TASK_KEYS)
                tasks.append(TaskProfile(
                    name=sec.name,
                    total_work_ops=sec.fraction("total_work_ops"),
                    parallel_fraction=sec.fraction("parallel_fraction"),
                    memory_bound=sec.bool("memory_bound", False),
                    pointer_chasing=sec.bool("pointer_chasing", False),
                ))
            elif sec.kind == "generator":
                sec.check_keys(_GENERATOR_KEYS)
                generator = GeneratorParams(
                    epochs=sec.int("epochs"),
                    hot_symbols=tuple(sec.list("hot_symbols", [])),
                    hot_accesses_per_epoch=sec.int("hot_accesses_per_epoch", 0),
                    cold_accesses_per_epoch=sec.int("cold_accesses_per_epoch", 0),
                    write_fraction=float(sec.str("write_fraction", "0")),
                )
            else:
                raise UnknownKeyError(f"line {sec.line}: unknown section kind {sec.kind!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"line {sec.line}: {sec.label}: {exc}") from None
    spec = WorkloadSpec(tuple(hints), tuple(tasks), layout, generator)
    if explicit:
        Workload(spec.manifest, (), spec.tasks, dict(layout)).check()
    return spec


def serialize_workload(spec: WorkloadSpec) -> str:
    parts = []
    for hint in spec.manifest:
        parts.append(format_section("variable", hint.symbol, {
            "size_pages": hint.size_pages,
            "affinity": hint.affinity,
            "access_class": hint.access_class,
            "access_pattern": hint.access_pattern,
            "first_page": spec.symbol_to_pages[hint.symbol].start,
        }))
    for task in spec.tasks:
        parts.append(format_section("task", task.name, {
            "total_work_ops": task.total_work_ops,
            "parallel_fraction": task.parallel_fraction,
            "memory_bound": task.memory_bound,
            "pointer_chasing": task.pointer_chasing,
        }))
    if spec.generator is not None:
        g = spec.generator
        parts.append(format_section("generator", None, {
            "epochs": g.epochs,
            "hot_symbols": list(g.hot_symbols) or None,
            "hot_accesses_per_epoch": g.hot_accesses_per_epoch,
            "cold_accesses_per_epoch": g.cold_accesses_per_epoch,
            "write_fraction": repr(g.write_fraction),
        }))
    return "\n".join(parts)


def generate_trace(manifest, params: GeneratorParams, seed: int,
                   symbol_to_pages=None, tasks=()) -> Workload:
    """Synthesize a trace with exact per-page access counts in every epoch.

    Every page of a hot symbol receives ``hot_accesses_per_epoch`` accesses
    per epoch and every other page ``cold_accesses_per_epoch``.  Within a
    page, ``round(count * write_fraction)`` of the accesses are writes.  The
    order inside an epoch is shuffled by a ``random.Random(seed)`` stream.
    """
    manifest = tuple(manifest)
    symbols = {h.symbol for h in manifest}
    unknown = [s for s in params.hot_symbols if s not in symbols]
    if unknown:
        raise WorkloadError(f"hot symbol(s) not in manifest: {', '.join(unknown)}")
    layout = dict(symbol_to_pages) if symbol_to_pages else sequential_layout(manifest)
    hot = set(params.hot_symbols)

    template: list[tuple[int, str]] = []
    for hint in manifest:
        count = params.hot_accesses_per_epoch if hint.symbol in hot else params.cold_accesses_per_epoch
        n_writes = int(count * params.write_fraction + 0.5)
        for page in layout[hint.symbol]:
            template.extend([(page, "write")] * n_writes)
            template.extend([(page, "read")] * (count - n_writes))

    rng = random.Random(seed)
    trace: list[AccessEvent] = []
    seq = 0
    for _ in range(params.epochs):
        epoch = list(template)
        rng.shuffle(epoch)
        for page, op in epoch:
            trace.append(AccessEvent(seq, page, op))
            seq += 1
    return Workload(manifest, tuple(trace), tuple(tasks), layout, len(template) or None)


def read_trace(text: str) -> list[AccessEvent]:
    """Parse a trace file: one ``seq_no,page_id,op`` record per line."""
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise WorkloadError(f"trace line {lineno}: expected seq_no,page_id,op")
        try:
            seq, page = int(parts[0]), int(parts[1])
        except ValueError:
            raise WorkloadError(f"trace line {lineno}: seq_no and page_id must be integers") from None
        op = {"r": "read", "w": "write"}.get(parts[2], parts[2])
        if op not in ("read", "write"):
            raise WorkloadError(f"trace line {lineno}: unknown op {parts[2]!r}")
        events.append(AccessEvent(seq, page, op))
    return events


def write_trace(events) -> str:
    return "".join(f"{e.seq_no},{e.page_id},{e.op}\n" for e in events)
