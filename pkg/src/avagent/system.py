"""Joint agent + environment transition system, traces, and episode runs."""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import grid
from .agent import AgentConfig, AgentState, PlanInstance, absorb, deliberate
from .grid import Coordinate, Direction, EnvState, Percept, Scenario


@dataclass(frozen=True)
class JointState:
    env: EnvState
    agent: AgentState

    @cached_property
    def key(self) -> tuple:
        """Canonical, hash-seed independent description of the state."""
        e, a = self.env, self.agent
        return (
            tuple(e.pos), tuple(e.prev) if e.prev else None, e.ride_index,
            tuple((tuple(c), lv.value) for c, lv in e.damage),
            tuple((tuple(c), lv.value) for c, lv in e.damage_events),
            tuple(sorted(tuple(c) for c in e.cleared)),
            tuple(sorted(a.beliefs, key=repr)), a.goals,
            (a.last_action.name, a.last_action.args, a.last_action.intent)
            if a.last_action else None,
            a.halted,
        )

    @cached_property
    def digest(self) -> str:
        return hashlib.sha256(repr(self.key).encode()).hexdigest()[:16]

    @property
    def pending(self) -> Optional[str]:
        """Kind of branch point this state sits on, if any."""
        if self.agent.halted:
            return None
        if self.env.unresolved_neighbors():
            return "damage"
        return None

    # -- views used by property evaluation --------------------------------
    @cached_property
    def percepts(self) -> tuple[Percept, ...]:
        if self.pending:
            return ()
        return tuple(grid.perceive(self.env))

    @property
    def beliefs(self) -> frozenset:
        return self.agent.beliefs

    @property
    def goals(self) -> tuple:
        return self.agent.goals

    @property
    def intentions(self) -> tuple:
        return self.agent.goals[-1:]

    @property
    def last_action(self):
        return self.agent.last_action


@dataclass(frozen=True)
class Transition:
    label: str            # "step", "collided", "escaped", "damage ...", "stutter"
    target: JointState
    plan: Optional[PlanInstance] = None
    deliberated: Optional[AgentState] = None  # agent after belief update, before acting

    @property
    def action(self) -> str:
        if self.plan is None:
            return "classify" if self.label.startswith("damage") else self.label
        return self.plan.label


def initial_state(scenario: Scenario) -> JointState:
    return JointState(scenario.initial_state(), AgentState())


def execute(env: EnvState, plan: PlanInstance) -> list[tuple[str, EnvState, list[Percept]]]:
    """Apply an agent action to the environment; one entry per outcome."""
    act = plan.action
    if act is None:
        return [("step", env, [])]
    here = [Percept("at", (env.pos.x, env.pos.y))]
    if act.name == "localize":
        return [("step", env, here)]
    if act.name == "get_ride":
        ride, env2 = grid.next_ride(env)
        if ride is None:
            return [("step", env2, [Percept("no_rides_left")])]
        r = (ride.start.x, ride.start.y, ride.destination.x, ride.destination.y)
        return [("step", env2, [Percept("ride", r)])]
    if act.name == "compass":
        dirs = grid.compass(env.pos, Coordinate(*act.args))
        return [("step", env, [Percept("compass", (d.value,)) for d in sorted(dirs, key=lambda d: d.value)])]
    if act.name == "drive":
        intent = grid.DamageLevel(act.intent) if act.intent else None
        outcomes = grid.step_vehicle(env, Direction(act.args[0]), intent)
        return [("step" if lbl == "move" else lbl, e, [Percept("at", (e.pos.x, e.pos.y))])
                for lbl, e in outcomes]
    return [("step", env, [])]


def transitions(s: JointState, cfg: AgentConfig) -> list[Transition]:
    """All labelled successors of ``s``.

    Damage classification branches come first (3**k of them); a halted agent
    stutters; otherwise the agent deliberates once and the environment
    executes the chosen action (two outcomes for a deliberate collision).
    """
    if s.agent.halted:
        return [Transition("stutter", s)]
    branches = grid.damage_branches(s.env)
    if branches:
        return [Transition(lbl, JointState(e, s.agent)) for lbl, e in branches]
    thinking, plan = deliberate(s.agent, s.percepts, cfg)
    out = []
    for lbl, env, feedback in execute(s.env, plan):
        out.append(Transition(lbl, JointState(env, absorb(thinking, feedback)), plan, thinking))
    return out


def successors(s: JointState, cfg: AgentConfig) -> list[JointState]:
    return [t.target for t in transitions(s, cfg)]


# --------------------------------------------------------------------------
# traces

@dataclass
class TraceStep:
    state: Optional[JointState]
    digest: str
    pos: tuple
    action: str          # what happened on the way out of this state
    branch: str
    added: list = field(default_factory=list)
    goals: list = field(default_factory=list)
    valuation: dict = field(default_factory=dict)

    def line(self, k: int) -> str:
        beliefs = ", ".join(self.added)
        goals = ", ".join(self.goals)
        text = (f"step {k} | pos ({self.pos[0]},{self.pos[1]}) | action {self.action} "
                f"| +beliefs [{beliefs}] | goals [{goals}]")
        if self.branch not in ("step", ""):
            text += f" | branch {self.branch}"
        return text


@dataclass
class Trace:
    steps: list
    status: str = "halted"      # halted | bounded | lasso
    loop_start: Optional[int] = None
    meta: dict = field(default_factory=dict)

    @property
    def prefix(self) -> list:
        return self.steps if self.loop_start is None else self.steps[:self.loop_start]

    @property
    def loop(self) -> list:
        return [] if self.loop_start is None else self.steps[self.loop_start:]

    @property
    def actions(self) -> list[str]:
        return [s.action for s in self.steps]

    def render(self) -> str:
        lines = []
        for k, st in enumerate(self.steps):
            if k == self.loop_start:
                lines.append("-- loop --")
            lines.append(st.line(k))
        if self.loop_start is not None:
            lines.append(f"-- back to step {self.loop_start} --")
        return "\n".join(lines)

    def to_json(self) -> str:
        data = {
            "status": self.status, "loop_start": self.loop_start, "meta": self.meta,
            "steps": [{"k": k, "digest": s.digest, "pos": list(s.pos), "action": s.action,
                       "branch": s.branch, "beliefs_added": s.added, "goals": s.goals,
                       "valuation": s.valuation} for k, s in enumerate(self.steps)],
        }
        return json.dumps(data, indent=1, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Trace":
        data = json.loads(text)
        steps = [TraceStep(None, s["digest"], tuple(s["pos"]), s["action"], s["branch"],
                           s["beliefs_added"], s["goals"], s["valuation"])
                 for s in data["steps"]]
        return cls(steps, data["status"], data["loop_start"], data.get("meta", {}))


def _fmt_atom(atom: tuple) -> str:
    name, *args = atom
    return f"{name}({','.join(str(a) for a in args)})" if args else name


def make_step(s: JointState, t: Optional[Transition], valuation: Optional[dict] = None) -> TraceStep:
    if t is None:
        action, branch, added = "end", "", []
        goals = s.agent.goals
    else:
        action = t.action
        branch = t.label
        added = sorted(_fmt_atom(b) for b in t.target.agent.beliefs - s.agent.beliefs)
        goals = t.target.agent.goals
    return TraceStep(s, s.digest, tuple(s.env.pos), action, branch, added,
                     [_fmt_atom(g) for g in goals], dict(valuation or {}))


# --------------------------------------------------------------------------
# episodes

class SeededResolver:
    """Resolves branch points by sampling with the scenario's probabilities."""

    def __init__(self, seed: int):
        self.rng = random.Random(seed)

    def pick(self, s: JointState, options: list[Transition]) -> Transition:
        if len(options) == 1:
            return options[0]
        labels = [t.label for t in options]
        if labels == ["collided", "escaped"]:
            p = s.env.scenario.collision_model.collide
            return options[0] if self.rng.random() < p else options[1]
        env = grid.sample_damage(s.env, self.rng)
        for t in options:
            if t.target.env == env:
                return t
        raise AssertionError("sampled damage assignment not among branches")


def simulate(scenario: Scenario, seed: int = 0, max_steps: int = 10_000,
             cfg: Optional[AgentConfig] = None) -> Trace:
    cfg = cfg or AgentConfig(scenario.n)
    resolver = SeededResolver(seed)
    s = initial_state(scenario)
    steps = []
    for _ in range(max_steps):
        if s.agent.halted:
            steps.append(make_step(s, None))
            return Trace(steps, "halted", meta={"seed": seed})
        t = resolver.pick(s, transitions(s, cfg))
        steps.append(make_step(s, t))
        s = t.target
    steps.append(make_step(s, None))
    return Trace(steps, "halted" if s.agent.halted else "bounded", meta={"seed": seed})


def enumerate_traces(scenario: Scenario, max_steps: int = 10_000,
                     cfg: Optional[AgentConfig] = None) -> list[Trace]:
    """Every execution, cut where it halts, revisits a state, or hits the bound.

    A revisit closes a lasso (status ``lasso`` with ``loop_start`` set).
    """
    cfg = cfg or AgentConfig(scenario.n)
    out = []
    root = initial_state(scenario)
    # explicit stack of (state, remaining transitions, taken transition)
    path: list[JointState] = [root]
    on_path = {root: 0}
    taken: list[Transition] = []
    pending = [iter(transitions(root, cfg) if not root.agent.halted else [])]

    def emit(status, loop_start=None):
        steps = [make_step(path[i], taken[i]) for i in range(len(taken))]
        if status != "lasso":
            steps.append(make_step(path[-1], None))
        out.append(Trace(steps, status, loop_start))

    if root.agent.halted:
        emit("halted")
        return out
    while pending:
        t = next(pending[-1], None)
        if t is None:
            pending.pop()
            gone = path.pop()
            del on_path[gone]
            if taken:
                taken.pop()
            continue
        nxt = t.target
        taken.append(t)
        if nxt in on_path:
            emit("lasso", on_path[nxt])
            taken.pop()
            continue
        path.append(nxt)
        on_path[nxt] = len(path) - 1
        if nxt.agent.halted or len(taken) >= max_steps:
            emit("halted" if nxt.agent.halted else "bounded")
            path.pop()
            del on_path[nxt]
            taken.pop()
            continue
        pending.append(iter(transitions(nxt, cfg)))
    return out


def run_episode(scenario: Scenario, mode: str = "simulate", seed: int = 0,
                max_steps: int = 10_000, cfg: Optional[AgentConfig] = None):
    """``simulate`` returns one Trace; ``enumerate`` returns all of them."""
    if mode == "simulate":
        return simulate(scenario, seed, max_steps, cfg)
    if mode == "enumerate":
        return enumerate_traces(scenario, max_steps, cfg)
    raise ValueError(f"unknown mode {mode!r}")


def reachable(scenario: Scenario, cfg: Optional[AgentConfig] = None,
              limit: int = 1_000_000) -> dict[JointState, list[Transition]]:
    """Full reachable joint state graph (breadth first)."""
    cfg = cfg or AgentConfig(scenario.n)
    root = initial_state(scenario)
    graph = {}
    frontier = [root]
    seen = {root}
    while frontier:
        nxt = []
        for s in frontier:
            ts = transitions(s, cfg)
            graph[s] = ts
            for t in ts:
                if t.target not in seen:
                    seen.add(t.target)
                    nxt.append(t.target)
        if len(seen) > limit:
            raise RuntimeError(f"more than {limit} reachable states")
        frontier = nxt
    return graph
