"""LLM frontend: prompt transport, cassette record/replay, directive assembly."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import threading
import urllib.error
import urllib.request
from dataclasses import dataclass
from pathlib import Path

from ..directive import PlacementRule, PolicyDirective, Provenance, TaskPredicate, TaskRule, HintPredicate
from ..errors import CassetteMissError, DigestMismatchError, TransportError
from ..hints import render_hint, render_task
from .prompts import PLACEMENT, TASK_MAPPING, build_prompt
from .responses import PlacementAnswer, TaskAnswer, parse_llm_response
from .rule import compile_rule_directive

FRONTEND_ID = "llm"
TOKEN_ENV = "TIERPOLICY_LLM_TOKEN"


def prompt_digest(prompt_text: str) -> str:
    """SHA-256 hex digest of the UTF-8 prompt bytes (the cassette key)."""
    return hashlib.sha256(prompt_text.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LlmExchange:
    prompt_digest: str
    prompt_text: str
    response_text: str

    @classmethod
    def for_prompt(cls, prompt_text: str, response_text: str) -> "LlmExchange":
        return cls(prompt_digest(prompt_text), prompt_text, response_text)

    def to_dict(self) -> dict:
        return {"prompt_digest": self.prompt_digest, "prompt_text": self.prompt_text,
                "response_text": self.response_text}


_locks: dict[str, threading.Lock] = {}
_locks_guard = threading.Lock()


def _lock_for(path) -> threading.Lock:
    key = str(Path(path).resolve())
    with _locks_guard:
        return _locks.setdefault(key, threading.Lock())


def _read_cassette(path) -> list[LlmExchange]:
    path = Path(path)
    if not path.exists():
        return []
    data = json.loads(path.read_text(encoding="utf-8"))
    if not isinstance(data, list):
        raise TransportError(f"{path}: cassette must be a JSON array")
    out = []
    for entry in data:
        if set(entry) != {"prompt_digest", "prompt_text", "response_text"}:
            raise TransportError(f"{path}: malformed cassette entry")
        out.append(LlmExchange(entry["prompt_digest"], entry["prompt_text"], entry["response_text"]))
    return out


def load_cassette(path) -> list[LlmExchange]:
    with _lock_for(path):
        return _read_cassette(path)


def record_exchange(cassette_path, exchange: LlmExchange) -> list[LlmExchange]:
    """Append ``exchange`` (replacing any entry with the same digest) and rewrite the file."""
    if prompt_digest(exchange.prompt_text) != exchange.prompt_digest:
        raise DigestMismatchError(
            f"digest {exchange.prompt_digest} does not match the prompt text"
        )
    path = Path(cassette_path)
    with _lock_for(path):
        entries = _read_cassette(path)
        for i, old in enumerate(entries):
            if old.prompt_digest == exchange.prompt_digest:
                entries[i] = exchange
                break
        else:
            entries.append(exchange)
        text = json.dumps([e.to_dict() for e in entries], indent=2, sort_keys=True, ensure_ascii=False) + "\n"
        fd, tmp = tempfile.mkstemp(dir=path.parent if str(path.parent) else ".", prefix=".cassette-")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return entries


class ReplayTransport:
    """Serve responses from a cassette; unknown prompts raise CassetteMissError."""

    def __init__(self, cassette_path):
        self.cassette_path = Path(cassette_path)
        if not self.cassette_path.is_file():
            raise TransportError(f"cassette {self.cassette_path} does not exist")
        self._entries = {e.prompt_digest: e for e in load_cassette(self.cassette_path)}

    def complete(self, prompt: str) -> str:
        digest = prompt_digest(prompt)
        try:
            return self._entries[digest].response_text
        except KeyError:
            raise CassetteMissError(digest) from None


class HttpTransport:
    """Chat-completion style endpoint: POST ``{base_url}/chat/completions``."""

    def __init__(self, base_url: str, model: str, token_env: str = TOKEN_ENV, timeout: float = 120.0):
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.token_env = token_env
        self.timeout = timeout

    def complete(self, prompt: str) -> str:
        body = json.dumps({
            "model": self.model,
            "temperature": 0,
            "messages": [{"role": "user", "content": prompt}],
        }).encode("utf-8")
        headers = {"Content-Type": "application/json"}
        token = os.environ.get(self.token_env)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        req = urllib.request.Request(f"{self.base_url}/chat/completions", data=body, headers=headers)
        try:
            with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                raw = resp.read().decode("utf-8")
        except (urllib.error.URLError, OSError) as exc:
            raise TransportError(f"LLM endpoint request failed: {exc}") from exc
        if not raw.strip():
            return ""
        try:
            return json.loads(raw)["choices"][0]["message"]["content"] or ""
        except (ValueError, KeyError, IndexError, TypeError):
            raise TransportError("LLM endpoint returned an unexpected payload") from None


class RecordingTransport:
    """Forward to ``inner`` and record every exchange into a cassette."""

    def __init__(self, inner, cassette_path):
        self.inner = inner
        self.cassette_path = Path(cassette_path)

    def complete(self, prompt: str) -> str:
        response = self.inner.complete(prompt)
        record_exchange(self.cassette_path, LlmExchange.for_prompt(prompt, response))
        return response


def placement_prompt(description_text: str, manifest) -> str:
    return build_prompt(description_text, PLACEMENT, "\n".join(render_hint(h) for h in manifest))


def task_prompt(description_text: str, tasks) -> str:
    return build_prompt(description_text, TASK_MAPPING, "\n".join(render_task(t) for t in tasks))


def _merge(base: PolicyDirective, answers, config) -> PolicyDirective:
    placement = list(base.placement_rules)
    tasks = list(base.task_rules)
    fallback = base.catch_all.tiers
    for answer in answers:
        if isinstance(answer, PlacementAnswer):
            rules = []
            for tier in config.tier_names:
                symbols = sorted(s for s, t in answer.assignments.items() if t == tier)
                if symbols:
                    ranking = [tier] + [t for t in fallback if t != tier]
                    rules.append(PlacementRule(HintPredicate(symbol=symbols), ranking))
            placement = rules + placement
        elif isinstance(answer, TaskAnswer):
            rules = []
            for device in config.device_names:
                names = sorted(n for n, d in answer.assignments.items() if d == device)
                if names:
                    rules.append(TaskRule(TaskPredicate(name=names), device))
            tasks = rules + tasks
    return PolicyDirective(tuple(placement), base.migration_rules, tuple(tasks), base.provenance)


def compile_llm_directive(config, description_text: str, manifest=None, transport=None,
                          tasks=None) -> PolicyDirective:
    """Ask the LLM for placement (and/or task mapping) decisions and build a directive.

    Prose or ``{"placement"|"tasks": ...}`` answers become symbol/task rules
    layered over the rule-compiled directive for the same config, so
    migration thresholds and fallbacks still come from device parameters.
    An answer carrying a complete directive is used as is.
    """
    if transport is None:
        raise TransportError("compile_llm_directive needs a transport")
    requests = []
    if manifest:
        requests.append((placement_prompt(description_text, manifest), {h.symbol for h in manifest}, PLACEMENT))
    if tasks:
        requests.append((task_prompt(description_text, tasks), {t.name for t in tasks}, TASK_MAPPING))
    if not requests:
        requests.append((placement_prompt(description_text, []), None, PLACEMENT))

    provenance = Provenance(FRONTEND_ID, hashlib.sha256(description_text.encode("utf-8")).hexdigest())
    answers = []
    for prompt, names, kind in requests:
        parsed = parse_llm_response(transport.complete(prompt), config, names=names, expect=kind)
        if isinstance(parsed, PolicyDirective):
            return PolicyDirective(parsed.placement_rules, parsed.migration_rules, parsed.task_rules,
                                   provenance, parsed.version)
        answers.append(parsed)
    base = compile_rule_directive(config, manifest)
    merged = _merge(base, answers, config)
    return PolicyDirective(merged.placement_rules, merged.migration_rules, merged.task_rules, provenance)
