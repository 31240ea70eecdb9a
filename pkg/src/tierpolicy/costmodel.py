"""Analytic cost models: per-access latency, migration cost, task run time."""

from __future__ import annotations

from array import array
from fractions import Fraction

from .hints import TaskProfile
from .system import ComputeDeviceSpec, DeviceKind, MemoryTierSpec, SystemConfig, round_half_up

# Slowdown applied to pointer-chasing work on anything that is not a CPU.
IRREGULARITY_PENALTY = 8

READ, WRITE = 0, 1


def access_latency(tier: MemoryTierSpec, op, page_hot: bool = False) -> int:
    """Latency in ns of one access; ``page_hot`` only matters for frequency-sensitive tiers."""
    is_write = op in (WRITE, "write") or getattr(op, "value", None) == "write"
    if not tier.frequency_sensitive:
        return tier.effective_write_latency_ns if is_write else tier.read_latency_ns
    base = tier.hot_read_latency_ns if page_hot else tier.cold_read_latency_ns
    if is_write:
        return round_half_up(base * Fraction(tier.write_penalty_factor))
    return base


def latency_table(config: SystemConfig) -> tuple[array, array]:
    """Flattened ``[tier][op][hot]`` latency table plus per-tier hot thresholds."""
    table = array("q")
    thresholds = array("q")
    for tier in config.tiers:
        for op in (READ, WRITE):
            table.append(access_latency(tier, op, page_hot=False))
            table.append(access_latency(tier, op, page_hot=True))
        # Uniform tiers have identical hot/cold entries, so the threshold is moot.
        thresholds.append(tier.hot_threshold_accesses_per_epoch if tier.frequency_sensitive else 0)
    return table, thresholds


def migration_cost_ns(config: SystemConfig, source: MemoryTierSpec, target: MemoryTierSpec) -> int:
    bandwidth = min(source.bandwidth_bytes_per_sec, target.bandwidth_bytes_per_sec)
    transfer = round_half_up(Fraction(config.page_size_bytes * 10**9, bandwidth))
    return transfer + config.migration_fixed_cost_ns


def estimate_task_time(task: TaskProfile, device: ComputeDeviceSpec,
                       irregularity_penalty=IRREGULARITY_PENALTY) -> float:
    """Amdahl-style run time in seconds of ``task`` on ``device``."""
    return float(exact_task_time(task, device, irregularity_penalty))


def exact_task_time(task: TaskProfile, device: ComputeDeviceSpec,
                    irregularity_penalty=IRREGULARITY_PENALTY) -> Fraction:
    """:func:`estimate_task_time` as an exact rational, for comparisons."""
    work = Fraction(task.total_work_ops)
    p = Fraction(task.parallel_fraction)
    per_core = Fraction(device.per_core_throughput_ops_per_sec)
    serial = (1 - p) * work / per_core
    parallel = p * work / (per_core * device.core_count * Fraction(device.parallel_efficiency))
    total = serial + parallel
    if task.pointer_chasing and device.kind is not DeviceKind.CPU:
        total *= Fraction(irregularity_penalty)
    return total
