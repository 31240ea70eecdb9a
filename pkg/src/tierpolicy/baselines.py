"""Reference placement policies, expressed as migration-free directives."""

from __future__ import annotations

import random

from .directive import HintPredicate, PlacementRule, PolicyDirective, Provenance
from .simulator import static_oracle, symbol_assignment
from .system import SystemConfig, TierKind

BASELINES = ("static-dram", "random", "first-touch", "hotness-oracle")


def dram_tier(config: SystemConfig) -> str:
    for t in config.tiers:
        if t.name.upper() == "DRAM":
            return t.name
    for t in config.tiers:
        if t.kind is TierKind.UNIFORM:
            return t.name
    return config.tiers[0].name


def _by_capacity(config):
    order = {t.name: i for i, t in enumerate(config.tiers)}
    return [t.name for t in sorted(config.tiers, key=lambda t: (-t.capacity_pages, order[t.name]))]


def pinned_directive(config: SystemConfig, assignment: dict[str, str], name: str,
                     base: PolicyDirective | None = None) -> PolicyDirective:
    """Directive that places each symbol in ``assignment`` in its given tier."""
    fallback = _by_capacity(config)
    rules = []
    for tier in config.tier_names:
        symbols = sorted(s for s, t in assignment.items() if t == tier)
        if symbols:
            rules.append(PlacementRule(HintPredicate(symbol=symbols), [tier] + [t for t in fallback if t != tier]))
    rules.append(PlacementRule(HintPredicate(), fallback))
    tasks = base.task_rules if base is not None else ()
    return PolicyDirective(tuple(rules), (), tasks, Provenance(name, config.digest()))


def static_dram(config, workload, seed, base=None) -> PolicyDirective:
    dram = dram_tier(config)
    ranking = [dram] + [t for t in _by_capacity(config) if t != dram]
    tasks = base.task_rules if base is not None else ()
    return PolicyDirective((PlacementRule(HintPredicate(), ranking),), (), tasks,
                           Provenance("static-dram", config.digest()))


def random_placement(config, workload, seed, base=None) -> PolicyDirective:
    rng = random.Random(seed)
    free = {t.name: t.capacity_pages for t in config.tiers}
    assignment = {}
    for hint in workload.manifest:
        fits = [name for name in config.tier_names if free[name] >= hint.size_pages]
        if not fits:
            continue
        tier = rng.choice(fits)
        free[tier] -= hint.size_pages
        assignment[hint.symbol] = tier
    return pinned_directive(config, assignment, "random", base)


def first_touch(config, workload, seed, base=None) -> PolicyDirective:
    """Symbols in order of first access take the lowest-latency tier that still fits."""
    first_seen = {}
    owner = {p: s for s, pages in workload.symbol_to_pages.items() for p in pages}
    for ev in workload.trace:
        first_seen.setdefault(owner[ev.page_id], ev.seq_no)
    position = {h.symbol: i for i, h in enumerate(workload.manifest)}
    ordered = sorted(workload.manifest,
                     key=lambda h: (h.symbol not in first_seen, first_seen.get(h.symbol, 0), position[h.symbol]))
    order = {t.name: i for i, t in enumerate(config.tiers)}
    ranking = sorted(config.tiers, key=lambda t: (t.expected_cold_latency_ns, order[t.name]))
    free = {t.name: t.capacity_pages for t in config.tiers}
    assignment = {}
    for hint in ordered:
        for t in ranking:
            if free[t.name] >= hint.size_pages:
                free[t.name] -= hint.size_pages
                assignment[hint.symbol] = t.name
                break
    return pinned_directive(config, assignment, "first-touch", base)


def hotness_oracle(config, workload, seed, base=None) -> PolicyDirective:
    placement, _ = static_oracle(config, workload)
    return pinned_directive(config, symbol_assignment(placement, workload), "hotness-oracle", base)


BUILDERS = {
    "static-dram": static_dram,
    "random": random_placement,
    "first-touch": first_touch,
    "hotness-oracle": hotness_oracle,
}


def baseline_directive(name: str, config, workload, seed: int, base=None) -> PolicyDirective:
    try:
        builder = BUILDERS[name]
    except KeyError:
        raise ValueError(f"unknown baseline {name!r}; choose from {', '.join(BASELINES)}") from None
    return builder(config, workload, seed, base)
