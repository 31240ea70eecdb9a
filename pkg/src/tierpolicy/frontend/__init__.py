"""Frontends: turn a system description into a PolicyDirective."""

from .llm import (
    HttpTransport,
    LlmExchange,
    RecordingTransport,
    ReplayTransport,
    compile_llm_directive,
    load_cassette,
    prompt_digest,
    record_exchange,
)
from .prompts import build_prompt
from .responses import PlacementAnswer, TaskAnswer, parse_llm_response
from .rule import compile_rule_directive

__all__ = [
    "HttpTransport", "LlmExchange", "RecordingTransport", "ReplayTransport",
    "compile_llm_directive", "load_cassette", "prompt_digest", "record_exchange",
    "build_prompt", "PlacementAnswer", "TaskAnswer", "parse_llm_response",
    "compile_rule_directive",
]
