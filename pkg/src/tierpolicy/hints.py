"""Program-side inputs to the policy: variable allocation hints and task profiles."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction


class Affinity(str, Enum):
    HOST = "host"
    DEVICE = "device"
    NONE = "none"


class AccessClass(str, Enum):
    HOT = "hot"
    COLD = "cold"
    UNKNOWN = "unknown"


class AccessPattern(str, Enum):
    SEQUENTIAL = "sequential"
    RANDOM = "random"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AllocationHint:
    symbol: str
    size_pages: int
    affinity: Affinity = Affinity.NONE
    access_class: AccessClass = AccessClass.UNKNOWN
    access_pattern: AccessPattern = AccessPattern.UNKNOWN

    def __post_init__(self):
        if self.size_pages < 1:
            raise ValueError(f"hint {self.symbol!r}: size_pages must be >= 1")
        object.__setattr__(self, "affinity", Affinity(self.affinity))
        object.__setattr__(self, "access_class", AccessClass(self.access_class))
        object.__setattr__(self, "access_pattern", AccessPattern(self.access_pattern))


@dataclass(frozen=True)
class TaskProfile:
    name: str
    total_work_ops: Fraction
    parallel_fraction: Fraction
    memory_bound: bool = False
    pointer_chasing: bool = False

    def __post_init__(self):
        object.__setattr__(self, "total_work_ops", Fraction(self.total_work_ops))
        object.__setattr__(self, "parallel_fraction", Fraction(self.parallel_fraction))
        if self.total_work_ops <= 0:
            raise ValueError(f"task {self.name!r}: total_work_ops must be positive")
        if not (0 <= self.parallel_fraction <= 1):
            raise ValueError(f"task {self.name!r}: parallel_fraction must lie in [0, 1]")


def render_hint(hint: AllocationHint) -> str:
    return (
        f"- {hint.symbol}: {hint.size_pages} page(s), affinity={hint.affinity.value}, "
        f"access={hint.access_class.value}, pattern={hint.access_pattern.value}"
    )


def render_task(task: TaskProfile) -> str:
    return (
        f"- {task.name}: work={float(task.total_work_ops):g} ops, "
        f"parallel_fraction={float(task.parallel_fraction):g}, "
        f"memory_bound={'yes' if task.memory_bound else 'no'}, "
        f"pointer_chasing={'yes' if task.pointer_chasing else 'no'}"
    )
