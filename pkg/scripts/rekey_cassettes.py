"""Re-key the bundled cassettes after a prompt template change.

Each bundled cassette holds one exchange per prompt.  This keeps the recorded
response text and swaps in the prompt (and digest) the current templates
produce for the scenario's description and workload.
"""

import json
import sys

from tierpolicy.frontend.llm import LlmExchange, placement_prompt, record_exchange, task_prompt
from tierpolicy.harness import bundled_dir
from tierpolicy.workload import parse_workload


def main(ids):
    for exp in ids:
        root = bundled_dir(exp)
        cassette = root / "cassette.json"
        old = json.loads(cassette.read_text(encoding="utf-8"))
        desc = (root / "system.cfg").read_text(encoding="utf-8")
        spec = parse_workload((root / "workload.cfg").read_text(encoding="utf-8"))
        prompts = []
        if spec.manifest:
            prompts.append(placement_prompt(desc, spec.manifest))
        if spec.tasks:
            prompts.append(task_prompt(desc, spec.tasks))
        if len(prompts) != len(old):
            sys.exit(f"{exp}: cassette has {len(old)} entries, scenario needs {len(prompts)}")
        cassette.unlink()
        for prompt, entry in zip(prompts, old):
            record_exchange(cassette, LlmExchange.for_prompt(prompt, entry["response_text"]))
        print(f"{exp}: re-keyed {len(prompts)} exchange(s)")


if __name__ == "__main__":
    main(sys.argv[1:] or ["exp1", "exp2", "exp3"])
