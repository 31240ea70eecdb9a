import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from tierpolicy.hints import AllocationHint
from tierpolicy.system import (
    ComputeDeviceSpec, DeviceKind, MemoryTierSpec, SystemConfig, TierKind, parse_system_config,
)
from tierpolicy.workload import AccessEvent, Workload

SCENARIOS = Path(__file__).resolve().parents[1] / "src" / "tierpolicy" / "scenarios"


def uniform_tier(name, latency=100, capacity=1000, write=None, penalty=1, bandwidth=10**10, attached_to=None):
    return MemoryTierSpec(
        name=name, kind=TierKind.UNIFORM, read_latency_ns=latency,
        write_latency_ns=latency if write is None else write, bandwidth_bytes_per_sec=bandwidth,
        capacity_pages=capacity, write_penalty_factor=Fraction(penalty), attached_to=attached_to,
    )


def rat_tier(name="RAT", hot=20, cold=300, threshold=100, capacity=1000, penalty=1, bandwidth=10**10):
    return MemoryTierSpec(
        name=name, kind=TierKind.FREQUENCY_SENSITIVE, read_latency_ns=cold, write_latency_ns=cold,
        bandwidth_bytes_per_sec=bandwidth, capacity_pages=capacity, write_penalty_factor=Fraction(penalty),
        hot_read_latency_ns=hot, cold_read_latency_ns=cold, hot_threshold_accesses_per_epoch=threshold,
    )


def cpu(name="CPU", cores=24, throughput=3 * 10**9, eff=Fraction(9, 10)):
    return ComputeDeviceSpec(name, DeviceKind.CPU, cores, Fraction(throughput), Fraction(eff))


def gpu(name="GPU", cores=8192, throughput=2 * 10**9, eff=Fraction(3, 4)):
    return ComputeDeviceSpec(name, DeviceKind.GPU, cores, Fraction(throughput), Fraction(eff))


def make_config(tiers, devices=None, epoch=10, fixed=0, page=4096):
    return SystemConfig(tuple(tiers), tuple(devices or [cpu()]), page, epoch, fixed)


def random_instance(rng: random.Random, max_symbols=6, n_tiers=2, max_epochs=10):
    """Small random (config, workload): <= max_symbols symbols, n_tiers tiers."""
    n_sym = rng.randint(1, max_symbols)
    hints = [AllocationHint(f"v{i}", rng.randint(1, 3)) for i in range(n_sym)]
    total_pages = sum(h.size_pages for h in hints)
    tiers = []
    for t in range(n_tiers):
        cap = rng.randint(1, total_pages)
        if t == 0:
            cap = total_pages  # keeps every instance feasible
        if rng.random() < 0.5:
            hot = rng.randint(5, 60)
            tiers.append(rat_tier(f"T{t}", hot=hot, cold=hot + rng.randint(1, 300),
                                  threshold=rng.randint(1, 6), capacity=cap, penalty=rng.choice([1, 2, Fraction(3, 2)])))
        else:
            tiers.append(uniform_tier(f"T{t}", latency=rng.randint(20, 300), capacity=cap,
                                      penalty=rng.choice([1, 2, Fraction(5, 2)])))
    epoch = rng.randint(3, 12)
    n_epochs = rng.randint(1, max_epochs)
    w = Workload(tuple(hints))
    pages = [p for r in w.symbol_to_pages.values() for p in r]
    weights = [rng.choice([1, 1, 8]) for _ in pages]
    trace = [
        AccessEvent(i, rng.choices(pages, weights)[0], rng.choice(["read", "read", "write"]))
        for i in range(epoch * n_epochs - rng.randint(0, epoch - 1))
    ]
    config = make_config(tiers, epoch=epoch, fixed=rng.randint(0, 500))
    return config, w.with_trace(trace)


@pytest.fixture
def exp_config():
    def load(name):
        return parse_system_config((SCENARIOS / name / "system.cfg").read_text())
    return load


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
