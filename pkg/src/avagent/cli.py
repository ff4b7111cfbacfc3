"""Command line front end: ``avagent {verify,simulate,translate,replay}``.

Exit status: verify 0 holds / 1 violated / 3 bounded, replay 0 match /
1 divergence, simulate and translate 0; bad usage or input 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .agent import AgentConfig
from .buchi import translate
from .checker import DEFAULT_STEP_BOUND, replay, report, stats_block, verify
from .grid import ScenarioError, load_scenario
from .psl import Not, PSLError, parse_property, pretty, to_nnf
from .system import Trace, simulate

EXIT = {"holds": 0, "violated": 1, "bounded": 3}
USAGE_ERROR = 2


def bundled_examples() -> dict[str, Path]:
    """Scenario and property files shipped inside the package."""
    root = resources.files("avagent") / "scenarios"
    return {p.name: Path(str(p)) for p in sorted(root.iterdir(), key=lambda p: p.name)
            if p.name.endswith((".scn", ".psl", ".json"))}


def _resolve(path: str) -> Path:
    p = Path(path)
    if p.exists():
        return p
    bundled = bundled_examples()
    if p.name in bundled and p.parent == Path("."):
        return bundled[p.name]
    raise FileNotFoundError(f"no such file: {path}")


def _read(path: str) -> str:
    return _resolve(path).read_text(encoding="utf-8")


def _write(path: Optional[str], text: str) -> None:
    if path:
        Path(path).write_text(text + ("" if text.endswith("\n") else "\n"), encoding="utf-8")


def _cfg(scenario, mutant: Optional[str]) -> AgentConfig:
    return AgentConfig(scenario.n, invert_damage=mutant == "invert-damage")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="avagent", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="model check a property on a scenario")
    v.add_argument("--scenario", required=True)
    v.add_argument("--property", required=True)
    v.add_argument("--step-bound", type=int, default=DEFAULT_STEP_BOUND)
    v.add_argument("--mutant", choices=["invert-damage"])
    v.add_argument("--trace-out")
    v.add_argument("--stats-out")

    s = sub.add_parser("simulate", help="run one seeded episode")
    s.add_argument("--scenario", required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-steps", type=int, default=10_000)
    s.add_argument("--mutant", choices=["invert-damage"])
    s.add_argument("--trace-out")

    t = sub.add_parser("translate", help="print the Büchi automaton of a property")
    t.add_argument("--property", required=True)
    t.add_argument("--negate", action="store_true",
                   help="translate the negation (the automaton verify searches)")

    r = sub.add_parser("replay", help="re-execute a saved trace")
    r.add_argument("--scenario", required=True)
    r.add_argument("--trace", required=True)
    return ap


def _verify(args) -> int:
    scenario = load_scenario(_read(args.scenario))
    formula = parse_property(_read(args.property))
    v = verify(scenario, formula, args.step_bound, _cfg(scenario, args.mutant))
    print(report(v))
    _write(args.stats_out, stats_block(v))
    if v.counterexample is not None:
        _write(args.trace_out, v.counterexample.to_json())
    elif args.trace_out:
        _write(args.trace_out, v.to_json())
    return EXIT[v.kind]


def _simulate(args) -> int:
    scenario = load_scenario(_read(args.scenario))
    trace = simulate(scenario, args.seed, args.max_steps, _cfg(scenario, args.mutant))
    trace.meta["mutant"] = args.mutant == "invert-damage"
    print(trace.render())
    print(f"status: {trace.status}")
    _write(args.trace_out, trace.to_json())
    return 0


def _translate(args) -> int:
    f = parse_property(_read(args.property))
    target = to_nnf(Not(f)) if args.negate else to_nnf(f)
    print(f"# {pretty(target)}")
    print(translate(target).render())
    return 0


def _replay(args) -> int:
    scenario = load_scenario(_read(args.scenario))
    try:
        trace = Trace.from_json(_read(args.trace))
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ValueError(f"malformed trace file: {exc}") from exc
    result = replay(trace, scenario)
    if result:
        print(f"replay ok: {len(trace.steps)} steps reproduced")
        return 0
    print(f"replay diverged at step {result.step}: {result.reason}")
    return 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"verify": _verify, "simulate": _simulate,
               "translate": _translate, "replay": _replay}[args.command]
    try:
        return handler(args)
    except (OSError, ScenarioError, PSLError, ValueError) as exc:
        print(f"avagent: error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
