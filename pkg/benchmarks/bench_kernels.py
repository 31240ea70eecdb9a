"""Compare the compiled and pure-Python replay kernels.

    python benchmarks/bench_kernels.py [--events N] [--symbols S] [--repeat R]
"""

import argparse
import random
import timeit
from array import array

from tierpolicy import kernels


def replay_inputs(n_events, n_pages, n_tiers, seed=0):
    rng = random.Random(seed)
    pages = array("q", (rng.randrange(n_pages) for _ in range(n_events)))
    ops = array("B", (rng.random() < 0.2 for _ in range(n_events)))
    page_tier = array("q", (rng.randrange(n_tiers) for _ in range(n_pages)))
    prev = array("q", (rng.randrange(200) for _ in range(n_pages)))
    table = array("q", (rng.randint(20, 300) for _ in range(4 * n_tiers)))
    thresholds = array("q", [100] * n_tiers)
    return pages, ops, page_tier, prev, table, thresholds


def oracle_inputs(n_symbols, n_tiers, seed=0):
    rng = random.Random(seed)
    cost = array("q", (rng.randint(0, 10**6) for _ in range(n_symbols * n_tiers)))
    sizes = array("q", (rng.randint(1, 8) for _ in range(n_symbols)))
    caps = array("q", [4 * n_symbols] * n_tiers)
    return cost, sizes, caps


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--events", type=int, default=1_000_000)
    parser.add_argument("--pages", type=int, default=4096)
    parser.add_argument("--symbols", type=int, default=12)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    backends = kernels.backends()
    print(f"default backend: {kernels.BACKEND}; available: {', '.join(backends)}")
    pages, ops, page_tier, prev, table, thresholds = replay_inputs(args.events, args.pages, 2)
    cost, sizes, caps = oracle_inputs(args.symbols, 2)

    timings = {}
    for name, mod in backends.items():
        def replay():
            reads = array("q", bytes(8 * args.pages))
            writes = array("q", bytes(8 * args.pages))
            lat = array("q", bytes(8 * args.pages))
            return mod.charge_epoch(pages, ops, 0, len(pages), page_tier, prev, reads, writes,
                                    table, thresholds, lat)

        def oracle():
            return mod.best_assignment(cost, sizes, caps, args.symbols, 2)

        timings[name] = (min(timeit.repeat(replay, number=1, repeat=args.repeat)),
                         min(timeit.repeat(oracle, number=1, repeat=args.repeat)))
        # both backends must agree before their speed means anything
        assert replay() == backends["python"].charge_epoch(
            pages, ops, 0, len(pages), page_tier, prev, array("q", bytes(8 * args.pages)),
            array("q", bytes(8 * args.pages)), table, thresholds, array("q", bytes(8 * args.pages)))

    print(f"{'backend':<10}{'charge_epoch s':>16}{'best_assignment s':>20}")
    for name, (r, o) in timings.items():
        print(f"{name:<10}{r:>16.4f}{o:>20.4f}")
    if "cython" in timings:
        r0, o0 = timings["python"]
        r1, o1 = timings["cython"]
        print(f"speedup   {r0 / r1:>15.1f}x{o0 / o1:>19.1f}x")


if __name__ == "__main__":
    main()
