"""Verify table1.scn against damage.psl, then the damage-inverting mutant, and print both reports."""

from avagent import AgentConfig, report, verify
from avagent.cli import bundled_examples
from avagent.grid import load_scenario
from avagent.psl import parse_property


def main() -> None:
    files = bundled_examples()
    scenario = load_scenario(files["table1.scn"].read_text())
    formula = parse_property(files["damage.psl"].read_text())
    for title, cfg in [("correct agent", None),
                       ("inverted damage preference", AgentConfig(scenario.n, invert_damage=True))]:
        print(f"== {title}")
        print(report(verify(scenario, formula, cfg=cfg)))
        print()


if __name__ == "__main__":
    main()
