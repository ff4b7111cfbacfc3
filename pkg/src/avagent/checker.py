"""Explicit-state LTL checking of the joint agent/environment system.

The negated property is translated to a Büchi automaton and an iterative
nested depth-first search looks for an accepting cycle in the product.
The product is built on the fly: a node is ``(JointState, automaton
state)`` and the automaton reads the valuation of the joint state being
entered.  Halted runs are stutter-extended, and a search path that reaches
``step_bound`` is cut with a self-loop and the verdict flagged as bounded.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from typing import Optional

from .agent import AgentConfig
from .buchi import Buchi, translate
from .grid import Scenario
from .psl import Formula, Modal, Not, atoms, eval_modal_atom, holds_on_lasso, pretty, to_nnf
from .system import JointState, Trace, Transition, initial_state, make_step, transitions

DEFAULT_STEP_BOUND = 10_000


class AgentView:
    """Read-only modal view of a joint state for atom evaluation.

    ``committed_action`` is the action the agent will execute next, which
    needs the deliberation step and hence the agent configuration.
    """

    def __init__(self, s: JointState, ts: list[Transition]):
        self.state = s
        self._ts = ts

    beliefs = property(lambda self: self.state.beliefs)
    goals = property(lambda self: self.state.goals)
    intentions = property(lambda self: self.state.intentions)
    last_action = property(lambda self: self.state.last_action)
    percepts = property(lambda self: self.state.percepts)

    @property
    def committed_action(self):
        for t in self._ts:
            if t.plan is not None:
                return t.plan.action
        return None


class JointSystem:
    """Memoised successor and valuation functions for one scenario/formula."""

    def __init__(self, scenario: Scenario, formula_atoms: list[Modal], cfg: AgentConfig):
        self.scenario = scenario
        self.cfg = cfg
        self.atoms = list(dict.fromkeys(formula_atoms))
        self._succ: dict = {}
        self._val: dict = {}

    def initial(self) -> JointState:
        return initial_state(self.scenario)

    def transitions(self, s: JointState) -> list[Transition]:
        ts = self._succ.get(s)
        if ts is None:
            ts = self._succ[s] = transitions(s, self.cfg)
        return ts

    def valuation(self, s: JointState) -> frozenset:
        v = self._val.get(s)
        if v is None:
            view = AgentView(s, self.transitions(s))
            v = self._val[s] = frozenset(m for m in self.atoms if eval_modal_atom(m, view))
        return v

    def valuation_dict(self, s: JointState) -> dict:
        v = self.valuation(s)
        return {pretty(m): m in v for m in self.atoms}

    @property
    def joint_states(self) -> int:
        return len(self._succ)

    def explored(self) -> dict:
        """Joint states whose successors were computed, with those successors."""
        return dict(self._succ)


@dataclass
class Verdict:
    holds: bool
    bounded: bool
    counterexample: Optional[Trace]
    stats: dict
    runtime: float = 0.0
    formula: str = ""
    system: Optional[JointSystem] = field(default=None, repr=False, compare=False)

    @property
    def kind(self) -> str:
        if not self.holds:
            return "violated"
        return "bounded" if self.bounded else "holds"

    def to_json(self) -> str:
        data = {"verdict": self.kind, "property": self.formula, "stats": self.stats,
                "runtime_seconds": round(self.runtime, 3),
                "trace": json.loads(self.counterexample.to_json()) if self.counterexample else None}
        return json.dumps(data, indent=1, sort_keys=True)


def _edges(sys_: JointSystem, a: Buchi, s: JointState, q, truncated: bool):
    """Product successors of ``(s, q)``: list of (transition, (s', q'))."""
    ts = [Transition("bound", s)] if truncated else sys_.transitions(s)
    out = []
    for t in ts:
        letter = sys_.valuation(t.target)
        for dst in a.successors(q, letter):
            out.append((t, (t.target, dst)))
    return out


def verify(scenario: Scenario, formula: Formula, step_bound: int = DEFAULT_STEP_BOUND,
           cfg: Optional[AgentConfig] = None) -> Verdict:
    cfg = cfg or AgentConfig(scenario.n)
    started = time.perf_counter()
    neg = to_nnf(Not(formula))
    aut = translate(neg)
    accepting = aut.accepting[0]
    sys_ = JointSystem(scenario, atoms(formula), cfg)
    s0 = sys_.initial()
    roots = [(s0, q) for q0 in aut.initial for q in aut.successors(q0, sys_.valuation(s0))]

    visited: set = set()
    flagged: set = set()
    cut_nodes: set = set()
    bounded = False
    max_depth = 0
    cycle = None

    # outer search: frames are [node, edge iterator, incoming transition]
    for root in roots:
        if root in visited or cycle:
            continue
        visited.add(root)
        stack = [[root, None, None]]
        on_stack = {root: 0}
        while stack and cycle is None:
            frame = stack[-1]
            node = frame[0]
            if frame[1] is None:
                if len(stack) >= step_bound and not node[0].agent.halted:
                    cut_nodes.add(node)
                    bounded = True
                frame[1] = iter(_edges(sys_, aut, node[0], node[1], node in cut_nodes))
                max_depth = max(max_depth, len(stack))
            step = next(frame[1], None)
            if step is not None:
                t, child = step
                if child not in visited:
                    visited.add(child)
                    on_stack[child] = len(stack)
                    stack.append([child, None, t])
                continue
            # post-order: seed an inner search from accepting nodes
            if node[1] in accepting and node not in cut_nodes:
                cycle = _inner(sys_, aut, stack, on_stack, flagged, cut_nodes)
                if cycle is not None:
                    break
            stack.pop()
            del on_stack[node]

    stats = {
        "product states": len(visited),
        "joint states": sys_.joint_states,
        "maximum search depth": max_depth,
        "buchi states": len(aut.states),
    }
    trace = None
    if cycle is not None:
        trace = _to_trace(sys_, *cycle)
        trace.meta.update({"property": pretty(formula), "mutant": cfg.invert_damage})
    return Verdict(holds=cycle is None, bounded=bounded and cycle is None, counterexample=trace,
                   stats=stats, runtime=time.perf_counter() - started, formula=pretty(formula),
                   system=sys_)


def _inner(sys_, aut, stack, on_stack, flagged, cut_nodes):
    """Second search from the seed on top of ``stack``.

    Reaching any node still on the outer stack closes a cycle through the
    seed.  Every node met here was already expanded by the outer search.
    Truncated nodes are skipped: once a path is cut it only stutters among
    cut nodes, and a cycle there says nothing about real executions.  Returns ``(path nodes, path transitions, loop index)`` or None.
    """
    seed = stack[-1][0]
    inner = [[seed, None, None]]
    while inner:
        frame = inner[-1]
        node = frame[0]
        if frame[1] is None:
            frame[1] = iter(_edges(sys_, aut, node[0], node[1], False))
        step = next(frame[1], None)
        if step is None:
            inner.pop()
            continue
        t, child = step
        if child in cut_nodes:
            continue
        if child in on_stack:
            j = on_stack[child]
            nodes = [f[0] for f in stack] + [f[0] for f in inner[1:]]
            trans = [f[2] for f in stack[1:]] + [f[2] for f in inner[1:]] + [t]
            return nodes, trans, j
        if child not in flagged:
            flagged.add(child)
            inner.append([child, None, t])
    return None


def _to_trace(sys_: JointSystem, nodes, trans, loop_start) -> Trace:
    steps = [make_step(n[0], t, sys_.valuation_dict(n[0])) for n, t in zip(nodes, trans)]
    return Trace(steps, "lasso", loop_start)


# --------------------------------------------------------------------------
# replay

@dataclass
class ReplayReport:
    ok: bool
    step: Optional[int] = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def replay(trace: Trace, scenario: Scenario, cfg: Optional[AgentConfig] = None) -> ReplayReport:
    """Re-run the recorded branch choices and compare every step.

    Checks the state digest, the action/branch taken and, where recorded,
    the valuation of each property atom.
    """
    if trace.loop_start is not None and not trace.loop:
        raise ValueError("malformed trace: empty loop")
    if not trace.steps:
        raise ValueError("malformed trace: no steps")
    cfg = cfg or AgentConfig(scenario.n, invert_damage=bool(trace.meta.get("mutant", False)))
    atom_names = sorted({k for st in trace.steps for k in st.valuation})
    formula_atoms = _parse_atoms(atom_names)
    sys_ = JointSystem(scenario, formula_atoms, cfg)
    s = sys_.initial()
    for k, st in enumerate(trace.steps):
        if s.digest != st.digest:
            return ReplayReport(False, k, f"state digest {s.digest} != recorded {st.digest}")
        if st.valuation and sys_.valuation_dict(s) != st.valuation:
            return ReplayReport(False, k, "atom valuation differs")
        if st.action == "end":
            if k != len(trace.steps) - 1:
                return ReplayReport(False, k, "end marker before last step")
            return ReplayReport(True)
        options = [Transition("bound", s)] if st.branch == "bound" else sys_.transitions(s)
        match = [t for t in options if t.label == st.branch and t.action == st.action]
        if not match:
            return ReplayReport(False, k, f"no transition {st.action!r} / {st.branch!r}")
        s = match[0].target
    if trace.loop_start is None:
        return ReplayReport(False, len(trace.steps), "trace neither ends nor loops")
    if s.digest != trace.steps[trace.loop_start].digest:
        return ReplayReport(False, len(trace.steps), "loop does not close")
    return ReplayReport(True)


def _parse_atoms(names: list[str]) -> list[Modal]:
    from .psl import parse_property
    out = []
    for name in names:
        f = parse_property(name)
        if isinstance(f, Modal):
            out.append(f)
    return out


# --------------------------------------------------------------------------
# reporting

def stats_block(v: Verdict) -> str:
    return "\n".join(f"{k}: {val}" for k, val in v.stats.items())


def report(v: Verdict) -> str:
    lines = [stats_block(v), f"runtime: {v.runtime:.2f} s"]
    match v.kind:
        case "holds":
            lines.append("PROPERTY HOLDS")
        case "bounded":
            lines.append("BOUNDED: search was cut at the step bound, result is not exhaustive")
            lines.append("PROPERTY HOLDS up to the bound")
        case "violated":
            lines.append("PROPERTY VIOLATED")
            lines.append("counterexample:")
            lines.append(v.counterexample.render())
    return "\n".join(lines)


# --------------------------------------------------------------------------
# brute force

class NotApplicable(Exception):
    pass


def _sccs_trivial(graph: dict) -> bool:
    """True when every strongly connected component is a single state."""
    index, low, on, stack, counter = {}, {}, set(), [], [0]
    for root in graph:
        if root in index:
            continue
        work = [(root, iter(graph[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on.add(root)
        while work:
            v, it = work[-1]
            w = next(it, None)
            if w is not None:
                if w not in index:
                    index[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on.add(w)
                    work.append((w, iter(graph[w])))
                elif w in on:
                    low[v] = min(low[v], index[w])
                continue
            work.pop()
            if work:
                low[work[-1][0]] = min(low[work[-1][0]], low[v])
            if low[v] == index[v]:
                size = 0
                while True:
                    w = stack.pop()
                    on.discard(w)
                    size += 1
                    if w == v:
                        break
                if size > 1:
                    return False
    return True


def brute_force_holds(scenario: Scenario, formula: Formula, cfg: Optional[AgentConfig] = None,
                      limit: int = 5_000) -> bool:
    """Check ``formula`` on every lasso of the joint graph, no automaton.

    Enumerates simple paths from the initial state; a path closes into a
    lasso at its first repeated state and each lasso word is evaluated with
    the direct lasso semantics.  This is exhaustive when all cycles of the
    joint graph are self-loops, which is checked up front.
    """
    cfg = cfg or AgentConfig(scenario.n)
    sys_ = JointSystem(scenario, atoms(formula), cfg)
    root = sys_.initial()
    graph, work = {}, [root]
    while work:
        s = work.pop()
        if s in graph:
            continue
        graph[s] = [t.target for t in sys_.transitions(s)]
        if len(graph) > limit:
            raise NotApplicable(f"more than {limit} joint states")
        work.extend(graph[s])
    if not _sccs_trivial(graph):
        raise NotApplicable("joint graph has cycles longer than one step")

    path, pos = [root], {root: 0}
    iters = [iter(graph[root])]
    while iters:
        nxt = next(iters[-1], None)
        if nxt is None:
            iters.pop()
            del pos[path.pop()]
            continue
        if nxt in pos:
            word = [sys_.valuation(s) for s in path]
            j = pos[nxt]
            if not holds_on_lasso(formula, word[:j], word[j:]):
                return False
            continue
        pos[nxt] = len(path)
        path.append(nxt)
        iters.append(iter(graph[nxt]))
    return True
