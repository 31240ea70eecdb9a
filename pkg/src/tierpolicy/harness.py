"""Scenario runner: compile, simulate, run baselines, evaluate verdicts, report."""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from . import __version__
from .baselines import baseline_directive
from .directive import PolicyDirective
from .errors import OracleTooLargeError, ScenarioError
from .frontend import HttpTransport, ReplayTransport, compile_llm_directive, compile_rule_directive
from .kvformat import parse_document
from .simulator import EPOCH_FIELDS, run_simulation, symbol_assignment
from .system import parse_system_config
from .costmodel import estimate_task_time
from .workload import generate_trace, parse_workload, read_trace

SCENARIO_IDS = ("exp1", "exp2", "exp3", "custom")
FRONTENDS = ("rule", "llm-live", "llm-replay")


def bundled_dir(scenario_id: str) -> Path:
    return Path(str(resources.files("tierpolicy") / "scenarios" / scenario_id))


@dataclass(frozen=True)
class Expectations:
    placement: dict[str, str] = field(default_factory=dict)
    tasks: dict[str, str] = field(default_factory=dict)
    beats: tuple[str, ...] = ()
    minimal_makespan: bool = False
    baselines: tuple[str, ...] = ()
    seed: int = 0


def parse_expectations(text: str) -> Expectations:
    placement, tasks, beats, minimal, baselines, seed = {}, {}, (), False, (), 0
    for sec in parse_document(text):
        if sec.kind == "scenario":
            sec.check_keys({"beats", "minimal_makespan", "baselines", "seed"})
            beats = tuple(sec.list("beats", []))
            minimal = sec.bool("minimal_makespan", False)
            baselines = tuple(sec.list("baselines", []))
            seed = sec.int("seed", 0)
        elif sec.kind == "expect" and sec.name == "placement":
            placement = dict(sec.entries)
        elif sec.kind == "expect" and sec.name == "tasks":
            tasks = dict(sec.entries)
        else:
            raise ScenarioError(f"line {sec.line}: unexpected section {sec.label}")
    return Expectations(placement, tasks, beats, minimal, baselines, seed)


@dataclass(frozen=True)
class ScenarioSpec:
    scenario_id: str
    config_path: Path
    workload_path: Path
    frontend: str = "rule"
    cassette_path: Path | None = None
    baselines: tuple[str, ...] = ()
    seed: int = 0
    expectations_path: Path | None = None
    trace_path: Path | None = None
    endpoint: str | None = None
    model: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "baselines", tuple(self.baselines))
        if self.scenario_id not in SCENARIO_IDS:
            raise ScenarioError(f"unknown scenario id {self.scenario_id!r}")
        if self.frontend not in FRONTENDS:
            raise ScenarioError(f"unknown frontend {self.frontend!r}")
        if self.frontend == "llm-replay" and self.cassette_path is None:
            raise ScenarioError("frontend llm-replay requires a cassette path")
        if self.frontend == "llm-live" and not (self.endpoint and self.model):
            raise ScenarioError("frontend llm-live requires an endpoint and a model")
        if len(set(self.baselines)) != len(self.baselines):
            raise ScenarioError("a baseline is requested twice")

    @classmethod
    def bundled(cls, scenario_id: str, frontend: str = "rule", baselines=None, seed=None,
                cassette_path=None, **kwargs) -> "ScenarioSpec":
        """Spec for one of the bundled experiment templates."""
        if scenario_id not in ("exp1", "exp2", "exp3"):
            raise ScenarioError(f"no bundled template for {scenario_id!r}")
        root = bundled_dir(scenario_id)
        expect = parse_expectations((root / "scenario.cfg").read_text(encoding="utf-8"))
        if cassette_path is None and frontend == "llm-replay":
            cassette_path = root / "cassette.json"
        return cls(
            scenario_id=scenario_id,
            config_path=root / "system.cfg",
            workload_path=root / "workload.cfg",
            frontend=frontend,
            cassette_path=cassette_path,
            baselines=expect.baselines if baselines is None else tuple(baselines),
            seed=expect.seed if seed is None else seed,
            expectations_path=root / "scenario.cfg",
            **kwargs,
        )


@dataclass
class Report:
    scenario_id: str
    frontend: str
    policies: dict[str, dict]
    verdicts: dict[str, dict]
    environment: dict
    directive: dict
    ranking: list[str] | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(v["passed"] for v in self.verdicts.values())

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "frontend": self.frontend,
            "policies": self.policies,
            "verdicts": self.verdicts,
            "environment": self.environment,
            "directive": self.directive,
            "ranking": self.ranking,
            "notes": list(self.notes),
            "passed": self.passed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Report":
        data = dict(data)
        data.pop("passed", None)
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def _digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _compile(spec: ScenarioSpec, config, description_text, workload):
    if spec.frontend == "rule":
        return compile_rule_directive(config, workload.manifest or None)
    if spec.frontend == "llm-replay":
        transport = ReplayTransport(spec.cassette_path)
    else:
        from .frontend import RecordingTransport
        transport = HttpTransport(spec.endpoint, spec.model)
        if spec.cassette_path is not None:
            transport = RecordingTransport(transport, spec.cassette_path)
    return compile_llm_directive(config, description_text, manifest=list(workload.manifest) or None,
                                 transport=transport, tasks=list(workload.tasks) or None)


def load_inputs(spec: ScenarioSpec):
    """Parse config and workload, generating the trace when needed."""
    description_text = Path(spec.config_path).read_text(encoding="utf-8")
    config = parse_system_config(description_text)
    wspec = parse_workload(Path(spec.workload_path).read_text(encoding="utf-8"))
    if spec.trace_path is not None:
        workload = wspec.workload(read_trace(Path(spec.trace_path).read_text(encoding="utf-8")))
    elif wspec.generator is not None:
        workload = generate_trace(wspec.manifest, wspec.generator, spec.seed,
                                  wspec.symbol_to_pages, wspec.tasks).check()
    else:
        workload = wspec.workload()
    if workload.events_per_epoch:
        # generated epochs and simulated epochs must coincide
        config = replace(config, epoch_length_events=workload.events_per_epoch)
    return description_text, config, workload


def _verdicts(expect: Expectations, config, workload, main, static_dram_metrics):
    verdicts = {}
    if expect.placement:
        final = main.final_placement
        wrong = {}
        for symbol, tier in sorted(expect.placement.items()):
            pages = workload.symbol_to_pages.get(symbol)
            if pages is None:
                raise ScenarioError(f"verdict needs symbol {symbol!r}, absent from the workload")
            got = sorted({final.page_tier[p] for p in pages})
            if got != [tier]:
                wrong[symbol] = got
        verdicts["placement"] = {
            "passed": not wrong,
            "detail": "all expected symbols placed" if not wrong else f"misplaced: {wrong}",
        }
    if expect.tasks:
        wrong = {}
        for task, device in sorted(expect.tasks.items()):
            if task not in main.tasks:
                raise ScenarioError(f"verdict needs task {task!r}, absent from the workload")
            if main.tasks[task]["device"] != device:
                wrong[task] = main.tasks[task]["device"]
        verdicts["task_mapping"] = {
            "passed": not wrong,
            "detail": "all expected tasks mapped" if not wrong else f"mismapped: {wrong}",
        }
    for other in expect.beats:
        if other != "static-dram":
            raise ScenarioError(f"unsupported dominance check against {other!r}")
        ours, theirs = main.mean_access_latency_ns, static_dram_metrics.mean_access_latency_ns
        verdicts[f"beats-{other}"] = {
            "passed": ours < theirs,
            "detail": f"mean access latency {ours!r} ns vs {theirs!r} ns",
        }
    if expect.minimal_makespan:
        best = minimal_makespan(config, workload.tasks)
        verdicts["minimal-makespan"] = {
            "passed": main.makespan_sec == best,
            "detail": f"chosen {main.makespan_sec!r} s, exhaustive minimum {best!r} s",
        }
    return verdicts


def minimal_makespan(config, tasks) -> float:
    """Exhaustive minimum makespan over every task -> device mapping."""
    best = None
    for mapping in itertools.product(config.devices, repeat=len(tasks)):
        load = {}
        for task, dev in zip(tasks, mapping):
            load[dev.name] = load.get(dev.name, 0.0) + estimate_task_time(task, dev)
        span = max(load.values(), default=0.0)
        if best is None or span < best:
            best = span
    return best if best is not None else 0.0


def run_scenario(spec: ScenarioSpec) -> Report:
    description_text, config, workload = load_inputs(spec)
    expect = (parse_expectations(Path(spec.expectations_path).read_text(encoding="utf-8"))
              if spec.expectations_path else Expectations())
    directive = _compile(spec, config, description_text, workload)
    main = run_simulation(config, directive, workload, spec.seed)
    policies = {spec.frontend: main.to_dict()}
    notes = []
    computed = {}
    for name in spec.baselines:
        try:
            bdir = baseline_directive(name, config, workload, spec.seed, directive)
        except OracleTooLargeError as exc:
            notes.append(f"{name} omitted: {exc}")
            continue
        computed[name] = run_simulation(config, bdir, workload, spec.seed)
        policies[name] = computed[name].to_dict()
    static = computed.get("static-dram")
    if static is None and "static-dram" in expect.beats:
        static = run_simulation(config, baseline_directive("static-dram", config, workload, spec.seed, directive),
                                workload, spec.seed)

    digests = {"config": _digest(spec.config_path), "workload": _digest(spec.workload_path)}
    if spec.cassette_path is not None and Path(spec.cassette_path).exists():
        digests["cassette"] = _digest(spec.cassette_path)
    if spec.trace_path is not None:
        digests["trace"] = _digest(spec.trace_path)
    if spec.expectations_path is not None:
        digests["expectations"] = _digest(spec.expectations_path)

    return Report(
        scenario_id=spec.scenario_id,
        frontend=spec.frontend,
        policies=policies,
        verdicts=_verdicts(expect, config, workload, main, static),
        environment={"seed": spec.seed, "tool_version": __version__, "input_digests": digests},
        directive=directive.to_dict(),
        notes=notes,
    )


def compare_policies(spec: ScenarioSpec) -> Report:
    """Run the main policy and every baseline, ranked by access latency + migration cost."""
    if len(spec.baselines) < 1:
        raise ScenarioError("comparison needs at least two policies (main policy plus one baseline)")
    report = run_scenario(spec)
    report.ranking = sorted(report.policies, key=lambda name: (report.policies[name]["total_cost_ns"], name))
    return report


def _csv(report: Report) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(("policy",) + EPOCH_FIELDS)
    for name in report.policies:
        for row in report.policies[name]["per_epoch"]:
            writer.writerow([name] + [row[f] for f in EPOCH_FIELDS])
    return buf.getvalue()


def _text(report: Report) -> str:
    lines = [f"scenario {report.scenario_id} (frontend {report.frontend}, seed {report.environment['seed']})", ""]
    header = f"{'policy':<16}{'mean lat ns':>14}{'total lat ns':>16}{'migrations':>12}{'migr cost ns':>14}{'makespan s':>14}"
    lines.append(header)
    lines.append("-" * len(header))
    names = report.ranking or list(report.policies)
    for name in names:
        m = report.policies[name]
        lines.append(
            f"{name:<16}{m['mean_access_latency_ns']:>14.2f}{m['total_access_latency_ns']:>16d}"
            f"{m['migration_count']:>12d}{m['migration_cost_ns']:>14d}{m['makespan_sec']:>14.4g}"
        )
    if report.verdicts:
        lines.append("")
        for check, v in report.verdicts.items():
            lines.append(f"[{'PASS' if v['passed'] else 'FAIL'}] {check}: {v['detail']}")
    for note in report.notes:
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def emit_report(report: Report, format: str = "json") -> str:
    if format == "json":
        return report.to_json() + "\n"
    if format == "csv":
        return _csv(report)
    if format == "text":
        return _text(report)
    raise ValueError(f"unknown report format {format!r}")


def directive_for(spec: ScenarioSpec) -> PolicyDirective:
    description_text, config, workload = load_inputs(spec)
    return _compile(spec, config, description_text, workload)
