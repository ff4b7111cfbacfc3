"""Grid-world taxi agent, property language and LTL model checker."""

from .agent import AgentConfig, AgentState, deliberate, select_plan
from .buchi import accepts_lasso, translate
from .checker import Verdict, replay, report, verify
from .grid import Coordinate, Direction, DamageLevel, Scenario, load_scenario
from .psl import holds_on_lasso, parse_property, pretty, to_nnf
from .system import JointState, Trace, simulate, successors

__all__ = [
    "AgentConfig", "AgentState", "Coordinate", "DamageLevel", "Direction",
    "JointState", "Scenario", "Trace", "Verdict", "accepts_lasso", "deliberate",
    "holds_on_lasso", "load_scenario", "parse_property", "pretty", "replay",
    "report", "select_plan", "simulate", "successors", "to_nnf", "translate", "verify",
]
