# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled replay kernels; must stay behaviourally identical to _pykernels."""

from libc.stdlib cimport malloc, free


def charge_epoch(const long long[:] pages, const unsigned char[:] ops,
                 Py_ssize_t start, Py_ssize_t stop,
                 const long long[:] page_tier, const long long[:] prev_counts,
                 long long[:] reads, long long[:] writes,
                 const long long[:] table, const long long[:] thresholds,
                 long long[:] page_latency):
    cdef Py_ssize_t i
    cdef long long p, t, hot, lat, total = 0
    cdef unsigned char op
    for i in range(start, stop):
        p = pages[i]
        op = ops[i]
        t = page_tier[p]
        hot = 1 if prev_counts[p] >= thresholds[t] else 0
        lat = table[t * 4 + op * 2 + hot]
        total += lat
        page_latency[p] += lat
        if op:
            writes[p] += 1
        else:
            reads[p] += 1
    return total


def best_assignment(const long long[:] cost, const long long[:] sizes,
                    const long long[:] capacities, Py_ssize_t n_symbols, Py_ssize_t n_tiers):
    cdef long long *choice
    cdef long long *used
    cdef long long best = -1, total
    cdef Py_ssize_t s, t, k
    cdef bint feasible
    best_choice = None
    if n_symbols == 0:
        return (), 0
    choice = <long long *> malloc(n_symbols * sizeof(long long))
    used = <long long *> malloc(n_tiers * sizeof(long long))
    try:
        for s in range(n_symbols):
            choice[s] = 0
        while True:
            for t in range(n_tiers):
                used[t] = 0
            total = 0
            feasible = True
            for s in range(n_symbols):
                used[choice[s]] += sizes[s]
                total += cost[s * n_tiers + choice[s]]
            for t in range(n_tiers):
                if used[t] > capacities[t]:
                    feasible = False
                    break
            if feasible and (best < 0 or total < best):
                best = total
                best_choice = tuple([choice[k] for k in range(n_symbols)])
            # odometer: last symbol varies fastest, giving lexicographic order
            s = n_symbols - 1
            while s >= 0:
                choice[s] += 1
                if choice[s] < n_tiers:
                    break
                choice[s] = 0
                s -= 1
            if s < 0:
                break
    finally:
        free(choice)
        free(used)
    if best_choice is None:
        return None, -1
    return best_choice, best
