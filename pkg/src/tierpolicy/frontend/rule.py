"""Deterministic rule compiler: SystemConfig (+ manifest) -> PolicyDirective."""

from __future__ import annotations

from ..directive import (
    HintPredicate, Metric, MigrationRule, PlacementRule, PolicyDirective, Provenance,
    TaskPredicate, TaskRule, check_directive,
)
from ..errors import ConfigValidationError
from ..hints import AccessClass, Affinity
from ..system import DeviceKind, SystemConfig, device_tiers, host_tiers, validate_config

FRONTEND_ID = "rule"


def _rank(tiers, key, order):
    return [t.name for t in sorted(tiers, key=lambda t: (key(t), order[t.name]))]


def _preferring(first, rest_ranking):
    head = list(first)
    return head + [name for name in rest_ranking if name not in head]


def compile_rule_directive(config: SystemConfig, manifest=None) -> PolicyDirective:
    """Compile a directive from tier/device parameters alone.

    Placement ranks tiers by expected access latency for each hint class:
    hot hints by hot latency, everything else by cold (or uniform) latency.
    Host/device affinity hints prefer tiers attached to CPU / non-CPU
    devices.  The closing catch-all ranks tiers by capacity, largest first.
    When ``manifest`` is given, rules no hint in it would match are omitted.
    """
    violations = validate_config(config)
    if violations:
        raise ConfigValidationError(violations)
    order = {t.name: i for i, t in enumerate(config.tiers)}
    by_cold = _rank(config.tiers, lambda t: t.expected_cold_latency_ns, order)
    by_hot = _rank(config.tiers, lambda t: t.expected_hot_latency_ns, order)
    by_capacity = _rank(config.tiers, lambda t: -t.capacity_pages, order)

    candidates: list[PlacementRule] = []
    migration: list[MigrationRule] = []
    if len(config.tiers) > 1:
        host = _rank(host_tiers(config), lambda t: t.expected_cold_latency_ns, order)
        device = _rank(device_tiers(config), lambda t: t.expected_cold_latency_ns, order)
        if host:
            candidates.append(PlacementRule(HintPredicate(affinity=[Affinity.HOST]), _preferring(host, by_cold)))
        if device:
            candidates.append(PlacementRule(HintPredicate(affinity=[Affinity.DEVICE]), _preferring(device, by_cold)))
        candidates.append(PlacementRule(HintPredicate(access_class=[AccessClass.HOT]), by_hot))
        candidates.append(PlacementRule(
            HintPredicate(access_class=[AccessClass.COLD, AccessClass.UNKNOWN]), by_cold))
        for tier in config.tiers:
            if tier.frequency_sensitive:
                up = tier.hot_threshold_accesses_per_epoch
                migration.append(MigrationRule(Metric.ACCESSES, up, up // 2, tier.name))

    if manifest is not None:
        hints = list(manifest)
        candidates = [r for r in candidates if any(r.when.matches(h) for h in hints)]
    placement = candidates + [PlacementRule(HintPredicate(), by_capacity)]

    tasks: list[TaskRule] = []
    cpus = [d for d in config.devices if d.kind is DeviceKind.CPU]
    if len(config.devices) > 1 and cpus:
        tasks.append(TaskRule(TaskPredicate(pointer_chasing=True), cpus[0].name))
        tasks.append(TaskRule(TaskPredicate(memory_bound=True), cpus[0].name))
    # Everything else: device with the lowest Amdahl-model run time.
    tasks.append(TaskRule(TaskPredicate(), None))

    directive = PolicyDirective(
        placement_rules=tuple(placement),
        migration_rules=tuple(migration),
        task_rules=tuple(tasks),
        provenance=Provenance(FRONTEND_ID, config.digest()),
    )
    return check_directive(directive, config)
