"""Reader/writer for the sectioned ``key = value`` text dialect.

A document is a sequence of sections::

    # comment
    [system]
    page_size_bytes = 4096

    [tier DRAM]
    read_latency_ns = 100

A header names the entity kind and, optionally, the entity name.  Values are
raw strings; typing is left to the caller.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import ConfigError, ConfigSyntaxError, MissingFieldError, UnknownKeyError

_HEADER = re.compile(r"^\[\s*([A-Za-z][\w-]*)(?:\s+([^\s\]]+))?\s*\]$")
_KEY = re.compile(r"^[A-Za-z][\w.-]*$")


@dataclass
class Section:
    kind: str
    name: str | None
    line: int
    entries: dict[str, str] = field(default_factory=dict)
    key_lines: dict[str, int] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"[{self.kind} {self.name}]" if self.name else f"[{self.kind}]"

    def check_keys(self, allowed) -> None:
        for key in self.entries:
            if key not in allowed:
                raise UnknownKeyError(
                    f"line {self.key_lines[key]}: unknown key {key!r} in {self.label}"
                )

    def has(self, key: str) -> bool:
        return key in self.entries

    def raw(self, key: str) -> str:
        try:
            return self.entries[key]
        except KeyError:
            raise MissingFieldError(f"{self.label}: missing mandatory field {key!r}") from None

    def _convert(self, key, fn, what):
        text = self.raw(key)
        try:
            return fn(text)
        except (ValueError, ZeroDivisionError):
            raise ConfigError(
                f"line {self.key_lines[key]}: {self.label} {key} = {text!r} is not {what}"
            ) from None

    def int(self, key: str, default=None):
        if default is not None and key not in self.entries:
            return default
        return self._convert(key, int, "an integer")

    def fraction(self, key: str, default=None):
        if default is not None and key not in self.entries:
            return default
        return self._convert(key, Fraction, "a number")

    def bool(self, key: str, default=None):
        if default is not None and key not in self.entries:
            return default
        return self._convert(key, parse_bool, "a boolean")

    def str(self, key: str, default=None):
        if default is not None and key not in self.entries:
            return default
        return self.raw(key)

    def list(self, key: str, default=None):
        if default is not None and key not in self.entries:
            return default
        return split_list(self.raw(key))


def parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(text)


def split_list(text: str) -> list[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def parse_document(text: str) -> list[Section]:
    sections: list[Section] = []
    current: Section | None = None
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0]
        stripped = line.strip()
        if not stripped:
            continue
        indent = len(line) - len(line.lstrip())
        if stripped.startswith("["):
            m = _HEADER.match(stripped)
            if not m:
                raise ConfigSyntaxError("malformed section header", lineno, indent + 1)
            current = Section(kind=m.group(1).lower(), name=m.group(2), line=lineno)
            sections.append(current)
            continue
        if "=" not in stripped:
            raise ConfigSyntaxError("expected 'key = value'", lineno, indent + 1)
        if current is None:
            raise ConfigSyntaxError("key/value pair outside of any section", lineno, indent + 1)
        key, value = stripped.split("=", 1)
        key, value = key.strip(), value.strip()
        if not _KEY.match(key):
            raise ConfigSyntaxError(f"invalid key {key!r}", lineno, indent + 1)
        if not value:
            col = line.index("=") + 2
            raise ConfigSyntaxError(f"empty value for {key!r}", lineno, col)
        if key in current.entries:
            raise ConfigSyntaxError(f"duplicate key {key!r} in {current.label}", lineno, indent + 1)
        current.entries[key] = value
        current.key_lines[key] = lineno
    return sections


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def format_section(kind: str, name: str | None, entries: dict) -> str:
    header = f"[{kind} {name}]" if name else f"[{kind}]"
    lines = [header]
    for key in sorted(entries):
        value = entries[key]
        if value is None:
            continue
        lines.append(f"{key} = {format_value(value)}")
    return "\n".join(lines) + "\n"
