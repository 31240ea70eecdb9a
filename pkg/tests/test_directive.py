import json

import pytest
from hypothesis import given, settings, strategies as st

from tierpolicy.directive import (
    HintPredicate, Metric, MigrationRule, PlacementRule, PolicyDirective, Provenance, TaskPredicate, TaskRule,
    validate_directive, without_migration,
)
from tierpolicy.errors import DirectiveError
from tierpolicy.hints import AccessClass, Affinity, AllocationHint, TaskProfile

from .conftest import cpu, gpu, make_config, rat_tier, uniform_tier


def sample():
    return PolicyDirective(
        (PlacementRule(HintPredicate(affinity=[Affinity.HOST]), ("DRAM", "RAT")),
         PlacementRule(HintPredicate(), ("DRAM", "RAT"))),
        (MigrationRule(Metric.ACCESSES, 100, 50, "RAT"),),
        (TaskRule(TaskPredicate(pointer_chasing=True), "CPU"), TaskRule(TaskPredicate(), None)),
        Provenance("rule", "ab" * 32),
    )


def test_json_round_trip():
    d = sample()
    assert PolicyDirective.from_json(d.to_json()) == d


def test_json_is_canonical():
    text = sample().to_json()
    assert text == json.dumps(json.loads(text), sort_keys=True, separators=(",", ":"))


def test_version_is_mandatory():
    data = sample().to_dict()
    del data["version"]
    with pytest.raises(DirectiveError, match="version"):
        PolicyDirective.from_dict(data)


@pytest.mark.parametrize("path", [(), ("placement_rules", 0), ("migration_rules", 0), ("task_rules", 0),
                                  ("provenance",), ("placement_rules", 0, "when")])
def test_unknown_fields_rejected(path):
    data = sample().to_dict()
    node = data
    for key in path:
        node = node[key]
    node["surprise"] = 1
    with pytest.raises(DirectiveError, match="surprise"):
        PolicyDirective.from_dict(data)


def test_bad_threshold_type():
    data = sample().to_dict()
    data["migration_rules"][0]["threshold_up"] = "100"
    with pytest.raises(DirectiveError):
        PolicyDirective.from_dict(data)


def test_bad_enum_value():
    data = sample().to_dict()
    data["placement_rules"][0]["when"]["affinity"] = ["sideways"]
    with pytest.raises(DirectiveError):
        PolicyDirective.from_dict(data)


def test_invalid_json():
    with pytest.raises(DirectiveError):
        PolicyDirective.from_json("{not json")


def test_validation_accepts_sample():
    config = make_config([uniform_tier("DRAM"), rat_tier()], [cpu(), gpu()])
    assert validate_directive(sample(), config) == []


def test_validation_problems():
    config = make_config([uniform_tier("DRAM")], [cpu()])
    d = PolicyDirective(
        (PlacementRule(HintPredicate(symbol=["x"]), ("FOO",)),),
        (MigrationRule(Metric.ACCESSES, 5, 5, "BAR"),),
        (TaskRule(TaskPredicate(), "TPU"),),
    )
    problems = validate_directive(d, config)
    text = " ".join(problems)
    assert "catch-all" in text
    assert "FOO" in text and "BAR" in text and "TPU" in text
    assert "below threshold_up" in text


def test_predicates_match():
    hint = AllocationHint("h_A", 2, Affinity.HOST, AccessClass.HOT)
    assert HintPredicate().matches(hint)
    assert HintPredicate(symbol=["h_A"]).matches(hint)
    assert not HintPredicate(affinity=[Affinity.DEVICE]).matches(hint)
    assert HintPredicate(affinity=["host"], access_class=["hot", "cold"]).matches(hint)
    task = TaskProfile("f", 10, 0.5)
    assert TaskPredicate(min_parallel_fraction="1/2").matches(task)
    assert not TaskPredicate(max_parallel_fraction="1/4").matches(task)
    assert not TaskPredicate(memory_bound=True).matches(task)


def test_without_migration():
    d = without_migration(sample())
    assert d.migration_rules == ()
    assert d.placement_rules == sample().placement_rules


tier_names = st.sampled_from(["DRAM", "RAT", "HBM"])


@st.composite
def directives(draw):
    def pred():
        return HintPredicate(
            symbol=draw(st.none() | st.lists(st.sampled_from(["a", "b", "priceArr"]), min_size=1, unique=True)),
            affinity=draw(st.none() | st.lists(st.sampled_from(list(Affinity)), min_size=1, unique=True)),
            access_class=draw(st.none() | st.lists(st.sampled_from(list(AccessClass)), min_size=1, unique=True)),
        )
    placement = [PlacementRule(pred(), draw(st.lists(tier_names, min_size=1, unique=True)))
                 for _ in range(draw(st.integers(0, 3)))]
    placement.append(PlacementRule(HintPredicate(), draw(st.permutations(["DRAM", "RAT", "HBM"]))))
    migration = []
    for _ in range(draw(st.integers(0, 2))):
        up = draw(st.integers(1, 10**6))
        migration.append(MigrationRule(draw(st.sampled_from(list(Metric))), up, draw(st.integers(0, up - 1)),
                                       draw(tier_names)))
    tasks = [TaskRule(TaskPredicate(
        name=draw(st.none() | st.lists(st.sampled_from(["Func_A", "Func_B"]), min_size=1, unique=True)),
        memory_bound=draw(st.none() | st.booleans()),
        min_parallel_fraction=draw(st.none() | st.fractions(0, 1, max_denominator=100)),
    ), draw(st.none() | st.sampled_from(["CPU", "GPU"]))) for _ in range(draw(st.integers(0, 3)))]
    return PolicyDirective(tuple(placement), tuple(migration), tuple(tasks),
                           Provenance(draw(st.sampled_from(["rule", "llm"])), draw(st.text("0123456789abcdef"))))


@settings(max_examples=200, deadline=None)
@given(directives())
def test_round_trip_property(d):
    text = d.to_json()
    back = PolicyDirective.from_json(text)
    assert back == d
    assert back.to_json() == text
