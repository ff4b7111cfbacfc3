"""Run every case of the bundled manifest and compare with the expected verdict."""

import json
import sys

from avagent import AgentConfig, verify
from avagent.cli import bundled_examples
from avagent.grid import load_scenario
from avagent.psl import parse_property


def main() -> int:
    files = bundled_examples()
    failures = 0
    for case in json.loads(files["manifest.json"].read_text())["cases"]:
        sc = load_scenario(files[case["scenario"]].read_text())
        f = parse_property(files[case["property"]].read_text())
        cfg = AgentConfig(sc.n, invert_damage=case["mutant"] == "invert-damage")
        v = verify(sc, f, cfg=cfg)
        ok = v.kind == case["expected"]
        failures += not ok
        print(f"{'ok  ' if ok else 'FAIL'} {case['scenario']:<16} {case['property']:<15} "
              f"mutant={case['mutant'] or '-':<13} {v.kind:<9} {v.stats['product states']:>6} product states"
              f"  {v.runtime:.2f} s")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
