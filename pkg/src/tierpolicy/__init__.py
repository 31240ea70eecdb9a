"""Compile heterogeneous-system descriptions into OS policies and replay them.

A system description (memory tiers, compute devices) is compiled by a
frontend into a :class:`~tierpolicy.directive.PolicyDirective`; the BPM
executes that directive for page placement, epoch-boundary migration and
task-to-device mapping while the simulator replays an access trace.
"""

__version__ = "0.1.0"

from .bpm import CounterSnapshot, MapTask, Migrate, Place, PlacementMap, epoch_decisions, map_task, place
from .costmodel import access_latency, estimate_task_time
from .directive import PolicyDirective, validate_directive
from .hints import AllocationHint, TaskProfile
from .simulator import Metrics, run_simulation, static_oracle
from .system import ComputeDeviceSpec, MemoryTierSpec, SystemConfig, parse_system_config, validate_config
from .workload import AccessEvent, GeneratorParams, Workload, generate_trace

__all__ = [
    "CounterSnapshot", "MapTask", "Migrate", "Place", "PlacementMap", "epoch_decisions", "map_task",
    "place", "access_latency", "estimate_task_time", "PolicyDirective", "validate_directive",
    "AllocationHint", "TaskProfile", "Metrics", "run_simulation", "static_oracle",
    "ComputeDeviceSpec", "MemoryTierSpec", "SystemConfig", "parse_system_config", "validate_config",
    "AccessEvent", "GeneratorParams", "Workload", "generate_trace",
]
