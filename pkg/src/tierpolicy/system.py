"""Heterogeneous system description: memory tiers, compute devices, globals."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import ConfigValidationError, DuplicateNameError, MissingFieldError, UnknownKeyError
from .kvformat import format_section, parse_document


class TierKind(str, Enum):
    UNIFORM = "uniform"
    FREQUENCY_SENSITIVE = "frequency-sensitive"


class DeviceKind(str, Enum):
    CPU = "cpu"
    GPU = "gpu"
    ACCELERATOR = "accelerator"


def round_half_up(value: Fraction) -> int:
    return int((value + Fraction(1, 2)) // 1)


@dataclass(frozen=True)
class MemoryTierSpec:
    """One memory tier.

    ``write_latency_ns`` holds the base write latency; the effective write
    latency of a uniform tier is ``write_latency_ns * write_penalty_factor``
    (see :attr:`effective_write_latency_ns`).  Frequency-sensitive tiers
    serve reads at ``hot_read_latency_ns`` or ``cold_read_latency_ns``
    depending on how often the page was touched in the previous epoch.
    """

    name: str
    kind: TierKind
    read_latency_ns: int
    write_latency_ns: int
    bandwidth_bytes_per_sec: int
    capacity_pages: int
    write_penalty_factor: Fraction = Fraction(1)
    hot_read_latency_ns: int | None = None
    cold_read_latency_ns: int | None = None
    hot_threshold_accesses_per_epoch: int | None = None
    attached_to: str | None = None
    description: str | None = None

    @property
    def frequency_sensitive(self) -> bool:
        return self.kind is TierKind.FREQUENCY_SENSITIVE

    @property
    def effective_write_latency_ns(self) -> int:
        return round_half_up(self.write_latency_ns * Fraction(self.write_penalty_factor))

    @property
    def expected_cold_latency_ns(self) -> int:
        if self.frequency_sensitive:
            return self.cold_read_latency_ns
        return self.read_latency_ns

    @property
    def expected_hot_latency_ns(self) -> int:
        if self.frequency_sensitive:
            return self.hot_read_latency_ns
        return self.read_latency_ns


@dataclass(frozen=True)
class ComputeDeviceSpec:
    name: str
    kind: DeviceKind
    core_count: int
    per_core_throughput_ops_per_sec: Fraction
    parallel_efficiency: Fraction = Fraction(1)
    description: str | None = None


@dataclass(frozen=True)
class SystemConfig:
    tiers: tuple[MemoryTierSpec, ...]
    devices: tuple[ComputeDeviceSpec, ...]
    page_size_bytes: int
    epoch_length_events: int
    migration_fixed_cost_ns: int = 0
    description: str | None = None

    def tier(self, name: str) -> MemoryTierSpec:
        for t in self.tiers:
            if t.name == name:
                return t
        raise KeyError(name)

    def device(self, name: str) -> ComputeDeviceSpec:
        for d in self.devices:
            if d.name == name:
                return d
        raise KeyError(name)

    @property
    def tier_names(self) -> list[str]:
        return [t.name for t in self.tiers]

    @property
    def device_names(self) -> list[str]:
        return [d.name for d in self.devices]

    def digest(self) -> str:
        return hashlib.sha256(serialize_config(self).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Violation:
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.subject}: {self.message}"


_SYSTEM_KEYS = {"page_size_bytes", "epoch_length_events", "migration_fixed_cost_ns", "description"}
_TIER_COMMON = {
    "kind", "read_latency_ns", "write_latency_ns", "write_penalty_factor",
    "bandwidth_bytes_per_sec", "capacity_pages", "attached_to", "description",
}
_TIER_FREQ = {"hot_read_latency_ns", "cold_read_latency_ns", "hot_threshold_accesses_per_epoch"}
_DEVICE_KEYS = {
    "kind", "core_count", "per_core_throughput_ops_per_sec", "parallel_efficiency", "description",
}


def _parse_tier(sec) -> MemoryTierSpec:
    try:
        kind = TierKind(sec.str("kind", "uniform"))
    except ValueError:
        raise UnknownKeyError(f"{sec.label}: unknown tier kind {sec.raw('kind')!r}") from None
    allowed = _TIER_COMMON | (_TIER_FREQ if kind is TierKind.FREQUENCY_SENSITIVE else set())
    sec.check_keys(allowed)
    if kind is TierKind.FREQUENCY_SENSITIVE:
        hot = sec.int("hot_read_latency_ns")
        cold = sec.int("cold_read_latency_ns")
        threshold = sec.int("hot_threshold_accesses_per_epoch")
        # Nominal read latency of a frequency-sensitive tier is its cold latency.
        read = sec.int("read_latency_ns", cold)
    else:
        hot = cold = threshold = None
        read = sec.int("read_latency_ns")
    return MemoryTierSpec(
        name=sec.name,
        kind=kind,
        read_latency_ns=read,
        write_latency_ns=sec.int("write_latency_ns", read),
        write_penalty_factor=sec.fraction("write_penalty_factor", Fraction(1)),
        bandwidth_bytes_per_sec=sec.int("bandwidth_bytes_per_sec"),
        capacity_pages=sec.int("capacity_pages"),
        hot_read_latency_ns=hot,
        cold_read_latency_ns=cold,
        hot_threshold_accesses_per_epoch=threshold,
        attached_to=sec.str("attached_to", None) if sec.has("attached_to") else None,
        description=sec.raw("description") if sec.has("description") else None,
    )


def _parse_device(sec) -> ComputeDeviceSpec:
    sec.check_keys(_DEVICE_KEYS)
    try:
        kind = DeviceKind(sec.raw("kind").lower())
    except ValueError:
        raise UnknownKeyError(f"{sec.label}: unknown device kind {sec.raw('kind')!r}") from None
    return ComputeDeviceSpec(
        name=sec.name,
        kind=kind,
        core_count=sec.int("core_count"),
        per_core_throughput_ops_per_sec=sec.fraction("per_core_throughput_ops_per_sec"),
        parallel_efficiency=sec.fraction("parallel_efficiency", Fraction(1)),
        description=sec.raw("description") if sec.has("description") else None,
    )


def parse_system_config(text: str) -> SystemConfig:
    """Parse a system description document.

    Raises ``ConfigSyntaxError`` (with line/column), ``UnknownKeyError``,
    ``MissingFieldError``, ``DuplicateNameError`` or, when the parsed values
    break an invariant, ``ConfigValidationError``.
    """
    sections = parse_document(text)
    system = None
    tiers: list[MemoryTierSpec] = []
    devices: list[ComputeDeviceSpec] = []
    seen: dict[tuple[str, str], int] = {}
    for sec in sections:
        if sec.kind == "system":
            if system is not None:
                raise DuplicateNameError(f"line {sec.line}: duplicate [system] section")
            if sec.name:
                raise UnknownKeyError(f"line {sec.line}: [system] takes no name")
            sec.check_keys(_SYSTEM_KEYS)
            system = sec
        elif sec.kind in ("tier", "device"):
            if not sec.name:
                raise MissingFieldError(f"line {sec.line}: [{sec.kind}] section needs a name")
            key = (sec.kind, sec.name)
            if key in seen:
                raise DuplicateNameError(
                    f"line {sec.line}: duplicate {sec.kind} name {sec.name!r} "
                    f"(first declared on line {seen[key]})"
                )
            seen[key] = sec.line
            if sec.kind == "tier":
                tiers.append(_parse_tier(sec))
            else:
                devices.append(_parse_device(sec))
        else:
            raise UnknownKeyError(f"line {sec.line}: unknown section kind {sec.kind!r}")

    if system is None:
        raise MissingFieldError("missing mandatory field 'page_size_bytes' ([system] section absent)")
    if not tiers:
        raise MissingFieldError("at least one [tier ...] section is required")
    if not devices:
        raise MissingFieldError("at least one [device ...] section is required")

    config = SystemConfig(
        tiers=tuple(tiers),
        devices=tuple(devices),
        page_size_bytes=system.int("page_size_bytes"),
        epoch_length_events=system.int("epoch_length_events"),
        migration_fixed_cost_ns=system.int("migration_fixed_cost_ns", 0),
        description=system.raw("description") if system.has("description") else None,
    )
    violations = validate_config(config)
    if violations:
        raise ConfigValidationError(violations)
    return config


def validate_config(config: SystemConfig) -> list[Violation]:
    """Return every invariant violation in ``config``; empty means valid."""
    out: list[Violation] = []
    if not config.tiers:
        out.append(Violation("system", "no memory tiers declared"))
    if not config.devices:
        out.append(Violation("system", "no compute devices declared"))
    if config.page_size_bytes <= 0:
        out.append(Violation("system", "page_size_bytes must be positive"))
    if config.epoch_length_events < 1:
        out.append(Violation("system", "epoch_length_events must be >= 1"))
    if config.migration_fixed_cost_ns < 0:
        out.append(Violation("system", "migration_fixed_cost_ns must be non-negative"))

    names = [t.name for t in config.tiers]
    for dup in sorted({n for n in names if names.count(n) > 1}):
        out.append(Violation(f"tier {dup}", "tier name is not unique"))
    dnames = [d.name for d in config.devices]
    for dup in sorted({n for n in dnames if dnames.count(n) > 1}):
        out.append(Violation(f"device {dup}", "device name is not unique"))

    for t in config.tiers:
        subject = f"tier {t.name}"
        for label in ("read_latency_ns", "write_latency_ns", "bandwidth_bytes_per_sec", "capacity_pages"):
            if getattr(t, label) is None or getattr(t, label) <= 0:
                out.append(Violation(subject, f"{label} must be positive"))
        if t.write_penalty_factor < 1:
            out.append(Violation(subject, "write_penalty_factor must be >= 1"))
        freq_fields = (t.hot_read_latency_ns, t.cold_read_latency_ns, t.hot_threshold_accesses_per_epoch)
        if t.frequency_sensitive:
            if any(v is None or v <= 0 for v in freq_fields):
                out.append(Violation(subject, "hot/cold latencies and hot threshold must be positive"))
            elif t.hot_read_latency_ns >= t.cold_read_latency_ns:
                out.append(Violation(subject, "hot_read_latency_ns must be below cold_read_latency_ns"))
        elif any(v is not None for v in freq_fields):
            out.append(Violation(subject, "uniform tier carries hot/cold fields"))
        if t.attached_to is not None and t.attached_to not in dnames:
            out.append(Violation(subject, f"attached_to names unknown device {t.attached_to!r}"))

    for d in config.devices:
        subject = f"device {d.name}"
        if d.core_count < 1:
            out.append(Violation(subject, "core_count must be >= 1"))
        if d.per_core_throughput_ops_per_sec <= 0:
            out.append(Violation(subject, "per_core_throughput_ops_per_sec must be positive"))
        if not (0 < d.parallel_efficiency <= 1):
            out.append(Violation(subject, "parallel_efficiency must lie in (0, 1]"))
    return out


def serialize_config(config: SystemConfig) -> str:
    """Canonical text form: [system], then tiers, then devices; keys sorted."""
    parts = [
        format_section("system", None, {
            "page_size_bytes": config.page_size_bytes,
            "epoch_length_events": config.epoch_length_events,
            "migration_fixed_cost_ns": config.migration_fixed_cost_ns,
            "description": config.description,
        })
    ]
    for t in config.tiers:
        parts.append(format_section("tier", t.name, {
            "kind": t.kind,
            "read_latency_ns": t.read_latency_ns,
            "write_latency_ns": t.write_latency_ns,
            "write_penalty_factor": t.write_penalty_factor,
            "bandwidth_bytes_per_sec": t.bandwidth_bytes_per_sec,
            "capacity_pages": t.capacity_pages,
            "hot_read_latency_ns": t.hot_read_latency_ns,
            "cold_read_latency_ns": t.cold_read_latency_ns,
            "hot_threshold_accesses_per_epoch": t.hot_threshold_accesses_per_epoch,
            "attached_to": t.attached_to,
            "description": t.description,
        }))
    for d in config.devices:
        parts.append(format_section("device", d.name, {
            "kind": d.kind,
            "core_count": d.core_count,
            "per_core_throughput_ops_per_sec": d.per_core_throughput_ops_per_sec,
            "parallel_efficiency": d.parallel_efficiency,
            "description": d.description,
        }))
    return "\n".join(parts)


def host_tiers(config: SystemConfig) -> list[MemoryTierSpec]:
    cpus = {d.name for d in config.devices if d.kind is DeviceKind.CPU}
    return [t for t in config.tiers if t.attached_to in cpus]


def device_tiers(config: SystemConfig) -> list[MemoryTierSpec]:
    others = {d.name for d in config.devices if d.kind is not DeviceKind.CPU}
    return [t for t in config.tiers if t.attached_to in others]
