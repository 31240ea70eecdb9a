"""Command-line entry point: ``tierpolicy {compile,sim,exp,compare,record}``."""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .baselines import BASELINES
from .directive import PolicyDirective
from .errors import TierPolicyError
from .frontend import (
    HttpTransport, RecordingTransport, ReplayTransport, compile_llm_directive, compile_rule_directive,
)
from .frontend.llm import TOKEN_ENV, placement_prompt, task_prompt
from .harness import ScenarioSpec, compare_policies, emit_report, run_scenario, bundled_dir
from .simulator import run_simulation
from .system import parse_system_config
from .workload import generate_trace, parse_workload, read_trace


def _write(text: str, out) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _baselines(text):
    if text is None:
        return None
    names = [b.strip() for b in text.split(",") if b.strip()]
    for name in names:
        if name not in BASELINES:
            raise argparse.ArgumentTypeError(f"unknown baseline {name!r}")
    return names


def _transport(args):
    if args.frontend == "llm-replay":
        if not args.cassette:
            raise TierPolicyError("--frontend llm-replay needs --cassette")
        return ReplayTransport(args.cassette)
    if not (args.endpoint and args.model):
        raise TierPolicyError("--frontend llm-live needs --endpoint and --model")
    live = HttpTransport(args.endpoint, args.model)
    return RecordingTransport(live, args.cassette) if args.cassette else live


def cmd_compile(args) -> int:
    text = Path(args.config).read_text(encoding="utf-8")
    config = parse_system_config(text)
    wspec = parse_workload(Path(args.manifest).read_text(encoding="utf-8")) if args.manifest else None
    if args.frontend == "rule":
        directive = compile_rule_directive(config, wspec.manifest if wspec else None)
    else:
        directive = compile_llm_directive(
            config, text,
            manifest=list(wspec.manifest) if wspec and wspec.manifest else None,
            transport=_transport(args),
            tasks=list(wspec.tasks) if wspec and wspec.tasks else None,
        )
    _write(directive.to_json() + "\n", args.out)
    return 0


def cmd_sim(args) -> int:
    config = parse_system_config(Path(args.config).read_text(encoding="utf-8"))
    wspec = parse_workload(Path(args.workload).read_text(encoding="utf-8"))
    if args.trace:
        workload = wspec.workload(read_trace(Path(args.trace).read_text(encoding="utf-8")))
    elif wspec.generator is not None:
        workload = generate_trace(wspec.manifest, wspec.generator, args.seed, wspec.symbol_to_pages, wspec.tasks)
        config = replace(config, epoch_length_events=workload.events_per_epoch or config.epoch_length_events)
    else:
        workload = wspec.workload()
    if args.epoch_events:
        config = replace(config, epoch_length_events=args.epoch_events)
    if args.directive:
        directive = PolicyDirective.from_json(Path(args.directive).read_text(encoding="utf-8"))
    else:
        directive = compile_rule_directive(config, workload.manifest or None)
    metrics = run_simulation(config, directive, workload, args.seed)
    _write(metrics.to_json() + "\n", args.out)
    if args.out:
        Path(args.out).with_suffix(".csv").write_text(metrics.epoch_csv(), encoding="utf-8")
    return 0


def _spec(args, baselines_default=None) -> ScenarioSpec:
    baselines = _baselines(args.baselines)
    if baselines is None and baselines_default is not None:
        baselines = baselines_default
    return ScenarioSpec.bundled(
        args.id, args.frontend, baselines=baselines, seed=args.seed,
        cassette_path=args.cassette, endpoint=args.endpoint, model=args.model,
    )


def cmd_exp(args) -> int:
    report = run_scenario(_spec(args))
    _write(emit_report(report, args.format), args.out)
    if args.out and args.format != "text":
        sys.stderr.write(emit_report(report, "text"))
    return 0 if report.passed else 1


def cmd_compare(args) -> int:
    report = compare_policies(_spec(args, baselines_default=list(BASELINES)))
    _write(emit_report(report, args.format), args.out)
    return 0 if report.passed else 1


def cmd_record(args) -> int:
    if args.config:
        description = Path(args.config).read_text(encoding="utf-8")
        wspec = parse_workload(Path(args.workload).read_text(encoding="utf-8")) if args.workload else None
    else:
        root = bundled_dir(args.id)
        description = (root / "system.cfg").read_text(encoding="utf-8")
        wspec = parse_workload((root / "workload.cfg").read_text(encoding="utf-8"))
    prompts = []
    if wspec is None or wspec.manifest:
        prompts.append(placement_prompt(description, wspec.manifest if wspec else ()))
    if wspec is not None and wspec.tasks:
        prompts.append(task_prompt(description, wspec.tasks))
    transport = RecordingTransport(HttpTransport(args.endpoint, args.model), args.cassette)
    for prompt in prompts:
        response = transport.complete(prompt)
        sys.stdout.write(response.rstrip() + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tierpolicy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def llm_flags(p):
        p.add_argument("--cassette", type=Path, help="cassette file (replay source / recording target)")
        p.add_argument("--endpoint", help="chat-completion base URL for llm-live")
        p.add_argument("--model", help="model name for llm-live")

    p = sub.add_parser("compile", help="system description -> directive JSON")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--manifest", type=Path, help="workload manifest with [variable]/[task] sections")
    p.add_argument("--frontend", choices=("rule", "llm-replay", "llm-live"), default="rule")
    llm_flags(p)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("sim", help="run one simulation, emit metrics JSON (+ per-epoch CSV)")
    p.add_argument("--config", required=True, type=Path)
    p.add_argument("--workload", required=True, type=Path)
    p.add_argument("--trace", type=Path, help="trace file; default is the workload's [generator]")
    p.add_argument("--directive", type=Path, help="directive JSON; default compiles with the rule frontend")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--epoch-events", type=int)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_sim)

    for name, func, help_text in (("exp", cmd_exp, "reproduce a bundled experiment"),
                                  ("compare", cmd_compare, "rank the policy against baselines")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--id", choices=("exp1", "exp2", "exp3"), default="exp2" if name == "compare" else None,
                       required=name == "exp")
        p.add_argument("--frontend", choices=("rule", "llm-replay", "llm-live"), default="rule")
        p.add_argument("--baselines", help=f"comma list from {', '.join(BASELINES)}")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=("json", "csv", "text"), default="json" if name == "exp" else "text")
        llm_flags(p)
        p.add_argument("--out", type=Path)
        p.set_defaults(func=func)

    p = sub.add_parser("record", help=f"query a live endpoint and record a cassette (token from ${TOKEN_ENV})")
    p.add_argument("--endpoint", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--cassette", required=True, type=Path)
    p.add_argument("--id", choices=("exp1", "exp2", "exp3"), default="exp2")
    p.add_argument("--config", type=Path, help="custom description instead of a bundled experiment")
    p.add_argument("--workload", type=Path)
    p.set_defaults(func=cmd_record)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (TierPolicyError, OSError, argparse.ArgumentTypeError) as exc:
        sys.stderr.write(f"tierpolicy {args.command}: error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
