"""PolicyDirective: the typed contract between a frontend and the BPM.

A directive is plain data.  Predicates are conjunctions of field
constraints; an empty predicate matches everything (catch-all).  The JSON
form is canonical (sorted keys, compact separators) so that identical
directives serialize to identical bytes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from .errors import DirectiveError
from .hints import AccessClass, AccessPattern, Affinity, AllocationHint, TaskProfile

DIRECTIVE_VERSION = 1


class Metric(str, Enum):
    ACCESSES = "accesses_per_epoch"
    WRITES = "writes_per_epoch"


def _tuple_or_none(values, conv=str):
    if values is None:
        return None
    if isinstance(values, (str, Enum)):
        values = [values]
    return tuple(conv(v) for v in values)


@dataclass(frozen=True)
class HintPredicate:
    symbol: tuple[str, ...] | None = None
    affinity: tuple[Affinity, ...] | None = None
    access_class: tuple[AccessClass, ...] | None = None
    access_pattern: tuple[AccessPattern, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "symbol", _tuple_or_none(self.symbol))
        object.__setattr__(self, "affinity", _tuple_or_none(self.affinity, Affinity))
        object.__setattr__(self, "access_class", _tuple_or_none(self.access_class, AccessClass))
        object.__setattr__(self, "access_pattern", _tuple_or_none(self.access_pattern, AccessPattern))

    @property
    def is_catch_all(self) -> bool:
        return all(v is None for v in (self.symbol, self.affinity, self.access_class, self.access_pattern))

    def matches(self, hint: AllocationHint) -> bool:
        return (
            (self.symbol is None or hint.symbol in self.symbol)
            and (self.affinity is None or hint.affinity in self.affinity)
            and (self.access_class is None or hint.access_class in self.access_class)
            and (self.access_pattern is None or hint.access_pattern in self.access_pattern)
        )

    def to_dict(self) -> dict:
        out = {}
        for key in ("symbol", "affinity", "access_class", "access_pattern"):
            values = getattr(self, key)
            if values is not None:
                out[key] = [v.value if isinstance(v, Enum) else v for v in values]
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "HintPredicate":
        _reject_unknown(data, {"symbol", "affinity", "access_class", "access_pattern"}, "placement predicate")
        try:
            return cls(**{k: list(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            raise DirectiveError(f"bad placement predicate {data!r}: {exc}") from None


@dataclass(frozen=True)
class TaskPredicate:
    name: tuple[str, ...] | None = None
    memory_bound: bool | None = None
    pointer_chasing: bool | None = None
    min_parallel_fraction: Fraction | None = None
    max_parallel_fraction: Fraction | None = None

    def __post_init__(self):
        object.__setattr__(self, "name", _tuple_or_none(self.name))
        for key in ("min_parallel_fraction", "max_parallel_fraction"):
            value = getattr(self, key)
            if value is not None:
                object.__setattr__(self, key, Fraction(value))

    @property
    def is_catch_all(self) -> bool:
        return all(
            v is None
            for v in (self.name, self.memory_bound, self.pointer_chasing,
                      self.min_parallel_fraction, self.max_parallel_fraction)
        )

    def matches(self, task: TaskProfile) -> bool:
        if self.name is not None and task.name not in self.name:
            return False
        if self.memory_bound is not None and task.memory_bound != self.memory_bound:
            return False
        if self.pointer_chasing is not None and task.pointer_chasing != self.pointer_chasing:
            return False
        if self.min_parallel_fraction is not None and task.parallel_fraction < self.min_parallel_fraction:
            return False
        if self.max_parallel_fraction is not None and task.parallel_fraction > self.max_parallel_fraction:
            return False
        return True

    def to_dict(self) -> dict:
        out = {}
        if self.name is not None:
            out["name"] = list(self.name)
        if self.memory_bound is not None:
            out["memory_bound"] = self.memory_bound
        if self.pointer_chasing is not None:
            out["pointer_chasing"] = self.pointer_chasing
        if self.min_parallel_fraction is not None:
            out["min_parallel_fraction"] = str(self.min_parallel_fraction)
        if self.max_parallel_fraction is not None:
            out["max_parallel_fraction"] = str(self.max_parallel_fraction)
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "TaskPredicate":
        allowed = {"name", "memory_bound", "pointer_chasing", "min_parallel_fraction", "max_parallel_fraction"}
        _reject_unknown(data, allowed, "task predicate")
        for key in ("memory_bound", "pointer_chasing"):
            if key in data and not isinstance(data[key], bool):
                raise DirectiveError(f"task predicate {key} must be a boolean")
        try:
            return cls(**data)
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise DirectiveError(f"bad task predicate {data!r}: {exc}") from None


@dataclass(frozen=True)
class PlacementRule:
    when: HintPredicate
    tiers: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tiers", tuple(self.tiers))


@dataclass(frozen=True)
class MigrationRule:
    metric: Metric
    threshold_up: int
    threshold_down: int
    target_tier: str

    def __post_init__(self):
        object.__setattr__(self, "metric", Metric(self.metric))


@dataclass(frozen=True)
class TaskRule:
    """Map matching tasks to ``device``; ``None`` means fastest by estimate."""

    when: TaskPredicate
    device: str | None


@dataclass(frozen=True)
class Provenance:
    frontend_id: str
    description_digest: str


@dataclass(frozen=True)
class PolicyDirective:
    placement_rules: tuple[PlacementRule, ...]
    migration_rules: tuple[MigrationRule, ...] = ()
    task_rules: tuple[TaskRule, ...] = ()
    provenance: Provenance = field(default_factory=lambda: Provenance("manual", ""))
    version: int = DIRECTIVE_VERSION

    def __post_init__(self):
        object.__setattr__(self, "placement_rules", tuple(self.placement_rules))
        object.__setattr__(self, "migration_rules", tuple(self.migration_rules))
        object.__setattr__(self, "task_rules", tuple(self.task_rules))

    @property
    def catch_all(self) -> PlacementRule | None:
        if self.placement_rules and self.placement_rules[-1].when.is_catch_all:
            return self.placement_rules[-1]
        return None

    def to_dict(self) -> dict:
        return {
            "version": self.version,
            "placement_rules": [
                {"when": r.when.to_dict(), "tiers": list(r.tiers)} for r in self.placement_rules
            ],
            "migration_rules": [
                {
                    "metric": r.metric.value,
                    "threshold_up": r.threshold_up,
                    "threshold_down": r.threshold_down,
                    "target_tier": r.target_tier,
                }
                for r in self.migration_rules
            ],
            "task_rules": [{"when": r.when.to_dict(), "device": r.device} for r in self.task_rules],
            "provenance": {
                "frontend_id": self.provenance.frontend_id,
                "description_digest": self.provenance.description_digest,
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)

    @classmethod
    def from_dict(cls, data) -> "PolicyDirective":
        if not isinstance(data, dict):
            raise DirectiveError("directive must be a JSON object")
        _reject_unknown(data, {"version", "placement_rules", "migration_rules", "task_rules", "provenance"}, "directive")
        if "version" not in data:
            raise DirectiveError("directive is missing the mandatory 'version' field")
        if data["version"] != DIRECTIVE_VERSION:
            raise DirectiveError(f"unsupported directive version {data['version']!r}")
        try:
            placement = []
            for rule in data.get("placement_rules", []):
                _reject_unknown(rule, {"when", "tiers"}, "placement rule")
                placement.append(PlacementRule(HintPredicate.from_dict(rule.get("when", {})), _str_list(rule["tiers"])))
            migration = []
            for rule in data.get("migration_rules", []):
                _reject_unknown(rule, {"metric", "threshold_up", "threshold_down", "target_tier"}, "migration rule")
                for key in ("threshold_up", "threshold_down"):
                    if not isinstance(rule[key], int) or isinstance(rule[key], bool):
                        raise DirectiveError(f"migration rule {key} must be an integer")
                migration.append(MigrationRule(
                    metric=Metric(rule["metric"]),
                    threshold_up=rule["threshold_up"],
                    threshold_down=rule["threshold_down"],
                    target_tier=str(rule["target_tier"]),
                ))
            tasks = []
            for rule in data.get("task_rules", []):
                _reject_unknown(rule, {"when", "device"}, "task rule")
                device = rule.get("device")
                if device is not None and not isinstance(device, str):
                    raise DirectiveError("task rule device must be a string or null")
                tasks.append(TaskRule(TaskPredicate.from_dict(rule.get("when", {})), device))
            prov = data.get("provenance", {"frontend_id": "manual", "description_digest": ""})
            _reject_unknown(prov, {"frontend_id", "description_digest"}, "provenance")
            provenance = Provenance(str(prov["frontend_id"]), str(prov["description_digest"]))
        except KeyError as exc:
            raise DirectiveError(f"directive is missing field {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, DirectiveError):
                raise
            raise DirectiveError(str(exc)) from None
        return cls(tuple(placement), tuple(migration), tuple(tasks), provenance, data["version"])

    @classmethod
    def from_json(cls, text: str) -> "PolicyDirective":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DirectiveError(f"directive is not valid JSON: {exc}") from None
        return cls.from_dict(data)


def _str_list(values) -> tuple[str, ...]:
    if not isinstance(values, list) or not all(isinstance(v, str) for v in values):
        raise DirectiveError("tier list must be a list of strings")
    return tuple(values)


def _reject_unknown(data, allowed, what):
    if not isinstance(data, dict):
        raise DirectiveError(f"{what} must be a JSON object")
    extra = sorted(set(data) - set(allowed))
    if extra:
        raise DirectiveError(f"unknown field(s) in {what}: {', '.join(extra)}")


def validate_directive(directive: PolicyDirective, config) -> list[str]:
    """List problems that make ``directive`` unusable against ``config``."""
    problems = []
    tiers = set(config.tier_names)
    devices = set(config.device_names)
    if not directive.placement_rules:
        problems.append("no placement rules")
    elif directive.catch_all is None:
        problems.append("placement rules do not end with a catch-all rule")
    for i, rule in enumerate(directive.placement_rules):
        if not rule.tiers:
            problems.append(f"placement rule {i} ranks no tiers")
        for name in rule.tiers:
            if name not in tiers:
                problems.append(f"placement rule {i} references unknown tier {name!r}")
        if len(set(rule.tiers)) != len(rule.tiers):
            problems.append(f"placement rule {i} ranks a tier twice")
    for i, rule in enumerate(directive.migration_rules):
        if rule.threshold_up < 1:
            problems.append(f"migration rule {i}: threshold_up must be positive")
        if rule.threshold_down < 0:
            problems.append(f"migration rule {i}: threshold_down must be non-negative")
        if rule.threshold_down >= rule.threshold_up:
            problems.append(f"migration rule {i}: threshold_down must be below threshold_up")
        if rule.target_tier not in tiers:
            problems.append(f"migration rule {i} references unknown tier {rule.target_tier!r}")
    for i, rule in enumerate(directive.task_rules):
        if rule.device is not None and rule.device not in devices:
            problems.append(f"task rule {i} references unknown device {rule.device!r}")
    return problems


def check_directive(directive: PolicyDirective, config) -> PolicyDirective:
    problems = validate_directive(directive, config)
    if problems:
        raise DirectiveError("; ".join(problems))
    return directive


def without_migration(directive: PolicyDirective) -> PolicyDirective:
    return PolicyDirective(
        directive.placement_rules, (), directive.task_rules, directive.provenance, directive.version
    )
