from array import array

import pytest
from hypothesis import given, settings, strategies as st

from tierpolicy import kernels

BACKENDS = kernels.backends()


def test_python_backend_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


@st.composite
def epochs(draw):
    n_pages = draw(st.integers(1, 8))
    n_tiers = draw(st.integers(1, 3))
    n = draw(st.integers(0, 60))
    pages = array("q", draw(st.lists(st.integers(0, n_pages - 1), min_size=n, max_size=n)))
    ops = array("B", draw(st.lists(st.integers(0, 1), min_size=n, max_size=n)))
    start = draw(st.integers(0, n))
    stop = draw(st.integers(start, n))
    page_tier = array("q", draw(st.lists(st.integers(0, n_tiers - 1), min_size=n_pages, max_size=n_pages)))
    prev = array("q", draw(st.lists(st.integers(0, 10), min_size=n_pages, max_size=n_pages)))
    table = array("q", draw(st.lists(st.integers(1, 1000), min_size=4 * n_tiers, max_size=4 * n_tiers)))
    thresholds = array("q", draw(st.lists(st.integers(0, 10), min_size=n_tiers, max_size=n_tiers)))
    return pages, ops, start, stop, page_tier, prev, table, thresholds, n_pages


@settings(max_examples=300, deadline=None)
@given(epochs())
def test_charge_epoch_backends_agree(case):
    pages, ops, start, stop, page_tier, prev, table, thresholds, n_pages = case
    results = []
    for mod in BACKENDS.values():
        reads, writes, lat = (array("q", [0] * n_pages) for _ in range(3))
        total = mod.charge_epoch(pages, ops, start, stop, page_tier, prev, reads, writes, table, thresholds, lat)
        results.append((total, list(reads), list(writes), list(lat)))
    assert all(r == results[0] for r in results)
    # naive check of the total
    expected = 0
    for i in range(start, stop):
        t = page_tier[pages[i]]
        expected += table[t * 4 + ops[i] * 2 + (prev[pages[i]] >= thresholds[t])]
    assert results[0][0] == expected


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 5), st.integers(1, 3), st.data())
def test_best_assignment_backends_agree(n_sym, n_tiers, data):
    cost = array("q", data.draw(st.lists(st.integers(0, 50), min_size=n_sym * n_tiers, max_size=n_sym * n_tiers)))
    sizes = array("q", data.draw(st.lists(st.integers(1, 3), min_size=n_sym, max_size=n_sym)))
    caps = array("q", data.draw(st.lists(st.integers(0, 8), min_size=n_tiers, max_size=n_tiers)))
    results = [mod.best_assignment(cost, sizes, caps, n_sym, n_tiers) for mod in BACKENDS.values()]
    assert all(tuple(r[0]) == tuple(results[0][0]) if r[0] is not None else results[0][0] is None for r in results)
    assert len({r[1] for r in results}) == 1


@pytest.mark.skipif("cython" not in BACKENDS, reason="compiled extension not built")
def test_default_backend_is_compiled_when_built(monkeypatch):
    import importlib
    monkeypatch.delenv("TIERPOLICY_PURE_PYTHON", raising=False)
    assert importlib.reload(kernels).BACKEND == "cython"
    monkeypatch.setenv("TIERPOLICY_PURE_PYTHON", "1")
    assert importlib.reload(kernels).BACKEND == "python"
    monkeypatch.delenv("TIERPOLICY_PURE_PYTHON")
    importlib.reload(kernels)
