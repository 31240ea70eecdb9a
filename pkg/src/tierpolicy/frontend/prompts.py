"""Prompt construction for the LLM frontend."""

from __future__ import annotations

PLACEMENT = "placement"
TASK_MAPPING = "task_mapping"

_REQUESTS = {
    PLACEMENT: (
        "You manage the memory of this system. For the program whose variables are listed "
        "below, identify variables that should be allocated in each memory of the system.",
        "Program variables",
        'End your answer with a fenced ```json block of the form '
        '{"placement": {"<variable>": "<memory name>"}} covering every variable, '
        "using memory names exactly as written in the description.",
    ),
    TASK_MAPPING: (
        "You manage the compute devices of this system. To get the most performance out of it, "
        "where would you run the following functions?",
        "Functions",
        'End your answer with a fenced ```json block of the form '
        '{"tasks": {"<function>": "<device name>"}} covering every function, '
        "using device names exactly as written in the description.",
    ),
}


def build_prompt(config_text: str, scenario: str, manifest_or_tasks: str) -> str:
    """Assemble the prompt: description verbatim, decision request, answer format."""
    try:
        request, heading, answer_format = _REQUESTS[scenario]
    except KeyError:
        raise ValueError(f"unknown scenario {scenario!r}") from None
    return (
        "System description:\n"
        f"{config_text}\n\n"
        f"{request}\n\n"
        f"{heading}:\n{manifest_or_tasks.rstrip()}\n\n"
        f"{answer_format}\n"
    )
