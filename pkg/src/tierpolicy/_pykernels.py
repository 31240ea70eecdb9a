"""Pure-Python replay kernels (fallback for the compiled extension)."""

from itertools import product


def charge_epoch(pages, ops, start, stop, page_tier, prev_counts, reads, writes,
                 table, thresholds, page_latency):
    total = 0
    for i in range(start, stop):
        p = pages[i]
        op = ops[i]
        t = page_tier[p]
        lat = table[t * 4 + op * 2 + (1 if prev_counts[p] >= thresholds[t] else 0)]
        total += lat
        page_latency[p] += lat
        if op:
            writes[p] += 1
        else:
            reads[p] += 1
    return total


def best_assignment(cost, sizes, capacities, n_symbols, n_tiers):
    if n_symbols == 0:
        return (), 0
    best, best_choice = -1, None
    for choice in product(range(n_tiers), repeat=n_symbols):
        used = [0] * n_tiers
        total = 0
        for s, t in enumerate(choice):
            used[t] += sizes[s]
            total += cost[s * n_tiers + t]
        if any(used[t] > capacities[t] for t in range(n_tiers)):
            continue
        if best < 0 or total < best:
            best, best_choice = total, choice
    if best_choice is None:
        return None, -1
    return best_choice, best
