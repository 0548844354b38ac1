"""Pin a behavioral difference on the rewrite level alone.

Two runs share the configuration, the seeded initial parameters, and the
probe sequence; they differ only in the law's private program counter.
Both laws install the same goals up to the first boundary, so the slot
parameters match bit for bit through step K and split at step K+1, the
first step whose descent target depends on the counter.

Run: python3 demos/03_witness.py
"""

import json
from pathlib import Path

from goalchase import LawState, config_from_json, divergence_witness

CONFIG = Path(__file__).parent / "configs" / "goal_switch.json"


def main():
    config = config_from_json(json.loads(CONFIG.read_text()))
    alt = LawState(cpair=config.law.program[0], program_counter=1)
    report = divergence_witness(config, alt)
    print(f"K = {config.K}, steps = {config.steps}")
    for key in (
        "verdict", "first_divergence_step", "final_deviation", "threshold",
    ):
        print(f"{key:>22}: {report[key]}")
    expected = config.K + 1
    print(f"\nfirst possible divergence is step {expected}: "
          f"{report['first_divergence_step'] == expected}")


if __name__ == "__main__":
    main()
