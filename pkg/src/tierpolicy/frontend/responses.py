"""Turn LLM answers into directives or symbol/task assignments.

A fenced ```json block is parsed strictly.  Without one, free prose is
scanned for two kinds of statements:

* list form: ``... allocated in RAT: priceArr, avg, ...``
* sentence form: a subject identifier followed (in the same or a later
  sentence) by ``allocate in <memory>`` or ``run it on the <device>``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

from ..directive import PolicyDirective, validate_directive
from ..errors import DirectiveError, ResponseParseError, UnknownNameError
from ..system import DeviceKind, SystemConfig, device_tiers, host_tiers


@dataclass(frozen=True)
class PlacementAnswer:
    assignments: dict[str, str] = field(default_factory=dict)  # symbol -> tier


@dataclass(frozen=True)
class TaskAnswer:
    assignments: dict[str, str] = field(default_factory=dict)  # task -> device


_FENCE = re.compile(r"```[ \t]*(?:json)?[ \t]*\n(.*?)```", re.DOTALL | re.IGNORECASE)
_LIST = re.compile(
    r"allocat(?:e|ed)\s+(?:in|on|to|into)\s+(?:the\s+)?(?P<tier>[\w-]+)(?:\s+memor(?:y|ies))?\s*:\s*(?P<items>.+)",
    re.IGNORECASE,
)
_ALLOC = re.compile(
    r"allocat(?:e|ed)\s+(?:(?:it|them)\s+)?(?:in|on|to|into)\s+(?:the\s+)?(?P<tier>[\w-]+)",
    re.IGNORECASE,
)
_RUN = re.compile(r"\brun(?:\s+(?:it|them))?\s+on\s+(?:the\s+)?(?P<dev>[\w-]+)", re.IGNORECASE)
_SENTENCE_END = re.compile(r"(?<=[.!?;])\s+|\n+")
_IDENT = re.compile(r"\b[A-Za-z_]\w*\b")
# Identifier-looking words: snake_case, camelCase, or containing digits.
_CODE_NAME = re.compile(r"^(?:\w*_\w+|[a-z]+[A-Z]\w*|[A-Za-z]+\d\w*)$")


def resolve_tier(word: str, config: SystemConfig) -> str:
    for t in config.tiers:
        if t.name == word:
            return t.name
    low = word.lower()
    matches = [t.name for t in config.tiers if t.name.lower() == low]
    if not matches and low in ("host", "device"):
        matches = [t.name for t in (host_tiers(config) if low == "host" else device_tiers(config))]
    if len(matches) != 1:
        raise UnknownNameError(f"response names unknown memory {word!r}")
    return matches[0]


def resolve_device(word: str, config: SystemConfig) -> str:
    for d in config.devices:
        if d.name == word:
            return d.name
    low = word.lower()
    matches = [d.name for d in config.devices if d.name.lower() == low]
    if not matches:
        try:
            kind = DeviceKind(low)
        except ValueError:
            kind = None
        matches = [d.name for d in config.devices if d.kind is kind]
    if len(matches) != 1:
        raise UnknownNameError(f"response names unknown device {word!r}")
    return matches[0]


def _assign(target: dict, key: str, value: str) -> None:
    if target.get(key, value) != value:
        raise ResponseParseError(f"response assigns {key!r} to both {target[key]!r} and {value!r}")
    target[key] = value


def _strict(block: str, config: SystemConfig, names):
    try:
        data = json.loads(block)
    except json.JSONDecodeError as exc:
        raise ResponseParseError(f"fenced block is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ResponseParseError("fenced block must hold a JSON object")
    if "version" in data:
        try:
            directive = PolicyDirective.from_dict(data)
        except DirectiveError as exc:
            raise ResponseParseError(f"fenced directive rejected: {exc}") from None
        problems = validate_directive(directive, config)
        if problems:
            raise UnknownNameError("; ".join(problems))
        return directive
    if set(data) == {"placement"} and isinstance(data["placement"], dict):
        answer, valid, kind = PlacementAnswer(), set(config.tier_names), "memory"
    elif set(data) == {"tasks"} and isinstance(data["tasks"], dict):
        answer, valid, kind = TaskAnswer(), set(config.device_names), "device"
    else:
        raise ResponseParseError(f"fenced block has unexpected fields: {sorted(data)}")
    for key, value in next(iter(data.values())).items():
        if not isinstance(value, str):
            raise ResponseParseError(f"assignment for {key!r} must be a string")
        if value not in valid:
            raise UnknownNameError(f"response names unknown {kind} {value!r}")
        if names is not None and key not in names:
            raise UnknownNameError(f"response names unknown symbol {key!r}")
        answer.assignments[key] = value
    return answer


def _split_items(text: str) -> list[str]:
    text = re.split(r"\.\.\.|…|\betc\b|\n", text, maxsplit=1)[0]
    items = re.split(r",|\band\b", text)
    out = []
    for item in items:
        item = item.strip().strip(".\"'`*").strip()
        if item and _IDENT.fullmatch(item):
            out.append(item)
    return out


def _prose(text: str, config: SystemConfig, names):
    placement: dict[str, str] = {}
    tasks: dict[str, str] = {}
    reserved = {n.lower() for n in config.tier_names + config.device_names}

    def candidates(fragment):
        for token in _IDENT.findall(fragment):
            if names is not None:
                if token in names:
                    yield token
            elif token.lower() not in reserved and _CODE_NAME.match(token):
                yield token

    subject = None
    for sentence in _SENTENCE_END.split(text):
        m = _LIST.search(sentence)
        if m:
            tier = resolve_tier(m.group("tier"), config)
            for item in _split_items(m.group("items")):
                if names is not None and item not in names:
                    raise UnknownNameError(f"response names unknown symbol {item!r}")
                _assign(placement, item, tier)
            continue
        for m in sorted(list(_ALLOC.finditer(sentence)) + list(_RUN.finditer(sentence)),
                        key=lambda m: m.start()):
            before = list(candidates(sentence[: m.start()]))
            if before:
                subject = before[-1]
            if subject is None:
                continue
            if "tier" in m.groupdict():
                _assign(placement, subject, resolve_tier(m.group("tier"), config))
            else:
                _assign(tasks, subject, resolve_device(m.group("dev"), config))
        found = list(candidates(sentence))
        if found:
            subject = found[-1]
    return PlacementAnswer(placement), TaskAnswer(tasks)


def parse_llm_response(response_text: str, config: SystemConfig, names=None, expect=None):
    """Parse an LLM answer against ``config``.

    Returns a :class:`PolicyDirective`, :class:`PlacementAnswer` or
    :class:`TaskAnswer`.  ``names`` (optional) restricts which identifiers
    count as program symbols; ``expect`` ("placement" or "task_mapping")
    selects the answer kind when prose mentions both.
    """
    names = set(names) if names is not None else None
    text = response_text or ""
    block = _FENCE.search(text)
    if block:
        return _strict(block.group(1), config, names)
    placement, tasks = _prose(text, config, names)
    if expect == "placement":
        chosen = placement
    elif expect == "task_mapping":
        chosen = tasks
    else:
        chosen = placement if placement.assignments else tasks
    if not chosen.assignments:
        raise ResponseParseError("response contains neither a fenced block nor a recognizable assignment")
    return chosen
