"""Print a few seeded episodes of a bundled scenario (default: table1.scn)."""

import argparse

from avagent import simulate
from avagent.cli import bundled_examples
from avagent.grid import load_scenario


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("scenario", nargs="?", default="table1.scn")
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2])
    args = ap.parse_args()
    sc = load_scenario(bundled_examples()[args.scenario].read_text())
    for seed in args.seeds:
        trace = simulate(sc, seed=seed)
        print(f"-- seed {seed}: {trace.status}, {len(trace.steps)} steps")
        print(trace.render())


if __name__ == "__main__":
    main()
