"""BDI-style taxi agent.

The agent keeps a belief base of ground atoms (tuples such as
``("at", 2, 1)`` or ``("obstacle", 1, 1, "low")``), a goal stack, and a
fixed library of guarded plan rules.  Each deliberation cycle it folds the
latest percepts into its beliefs, picks the first applicable rule (collision
rules first, then avoidance, navigation, and ride handling) and executes
exactly one action.

Navigation is a depth-first exploration toward the current target that
prefers compass directions.  The route memory follows the rule that leaving
a cell by ``d1`` and later coming back into it by the opposite direction
rules ``d1`` out from that cell for the same destination.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Callable, Iterable, Optional

from .grid import (
    PREFERENCE_ORDER, Coordinate, DamageLevel, Direction, Percept, Ride,
    direction_between,
)

ACTIONS = (
    "localize", "get_ride", "park", "refuse_ride", "compass", "drive",
    "no_further_from", "colide_obstacle", "recover",
)
PLAN_SETS = ("collision", "avoidance", "navigation", "ride")

# Percept-derived beliefs that only describe the current surroundings.
TRANSIENT = frozenset({"at", "obstacle_ahead", "obstacle_damage", "unavoidable_collision"})
# Per-leg route bookkeeping, reset whenever a new target is adopted.
LEG_MEMORY = frozenset({"left", "visited", "entered", "heading", "no_further_from"})


@dataclass(frozen=True)
class ActionRecord:
    name: str
    args: tuple = ()
    intent: Optional[str] = None

    def __post_init__(self):
        if self.name not in ACTIONS:
            raise ValueError(f"unknown action {self.name!r}")

    def atom(self) -> tuple:
        return (self.name, *self.args)

    def __str__(self) -> str:
        return f"{self.name}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class AgentConfig:
    n: int
    # developer switch: prefer the *most* damaging obstacle (negative control)
    invert_damage: bool = False


@dataclass(frozen=True)
class AgentState:
    beliefs: frozenset = frozenset()
    goals: tuple = ()
    last_action: Optional[ActionRecord] = None
    halted: bool = False

    def believes(self, *atom) -> bool:
        return tuple(atom) in self.beliefs

    def facts(self, predicate: str) -> tuple:
        return _index(self.beliefs).get(predicate, ())

    @property
    def position(self) -> Optional[Coordinate]:
        at = self.facts("at")
        return Coordinate(*at[0]) if at else None

    @property
    def ride(self) -> Optional[Ride]:
        r = self.facts("ride")
        if not r:
            return None
        sx, sy, dx, dy = r[0]
        return Ride(Coordinate(sx, sy), Coordinate(dx, dy))

    @property
    def target(self) -> Optional[Coordinate]:
        """Target of the innermost active movement goal."""
        for g in reversed(self.goals):
            if g[0] == "reach":
                return Coordinate(g[1], g[2])
        return None

    @property
    def route_memory(self) -> frozenset:
        return frozenset(
            (Coordinate(x, y), Direction(d), Coordinate(tx, ty))
            for x, y, d, tx, ty in self.facts("route_excluded"))

    def obstacles(self) -> dict[Coordinate, DamageLevel]:
        return {Coordinate(x, y): DamageLevel(lv) for x, y, lv in self.facts("obstacle")}


@lru_cache(maxsize=8192)
def _index(beliefs: frozenset) -> dict:
    idx: dict = {}
    for b in beliefs:
        idx.setdefault(b[0], []).append(b[1:])
    return {k: tuple(sorted(v)) for k, v in idx.items()}


def _with(a: AgentState, add: Iterable[tuple] = (), drop: Callable[[tuple], bool] = None) -> AgentState:
    b = a.beliefs
    if drop is not None:
        b = frozenset(x for x in b if not drop(x))
    return replace(a, beliefs=b | frozenset(add))


# --------------------------------------------------------------------------
# belief revision

def update_beliefs(a: AgentState, percepts: Iterable[Percept]) -> AgentState:
    """Replace the snapshot of the surroundings with ``percepts``.

    Obstacle sightings are also stored as persistent ``obstacle(X,Y,L)``
    beliefs, which are only dropped once the vehicle stands on that cell
    (i.e. the obstacle was cleared by a collision).
    """
    old = a.position
    added = []
    for p in percepts:
        if p.kind in TRANSIENT:
            added.append(p.atom())
        if p.kind == "obstacle_damage":
            x, y, _, level = p.args
            added.append(("obstacle", x, y, level))
    a = _with(a, added, drop=lambda b: b[0] in TRANSIENT)
    return _after_move(a, old)


def absorb(a: AgentState, feedback: Iterable[Percept]) -> AgentState:
    """Fold in the environment's direct answer to the last action."""
    for p in feedback:
        if p.kind == "at":
            old = a.position
            # a snapshot of the old surroundings says nothing about the new cell
            stale = old is not None and tuple(old) != p.args
            a = _with(a, [p.atom()], drop=lambda b: b[0] == "at" or (stale and b[0] in TRANSIENT))
            a = _after_move(a, old)
        elif p.kind == "compass":
            a = _with(a, [p.atom()])
        elif p.kind == "no_rides_left":
            a = _with(a, [p.atom()])
        elif p.kind == "ride":
            sx, sy, dx, dy = p.args
            a = _with(a, [("ride", sx, sy, dx, dy)])
            a = replace(a, goals=a.goals + (("complete_ride", sx, sy, dx, dy),))
            a = _start_leg(a, Coordinate(sx, sy))
    return a


def _after_move(a: AgentState, old: Optional[Coordinate]) -> AgentState:
    new = a.position
    if new is None or new == old:
        return a
    # standing on a cell proves it holds no obstacle (any more)
    a = _with(a, drop=lambda b: (b[0] in ("compass", "compass_at")
                                 or (b[0] == "obstacle" and b[1:3] == new)))
    d = direction_between(old, new) if old is not None else None
    dest = a.target
    if d is None or dest is None:
        return a
    return record_move(a, old, d, dest)


def record_move(a: AgentState, src: Coordinate, d: Direction, dest: Coordinate) -> AgentState:
    """Route bookkeeping for one move ``src --d--> src+d`` toward ``dest``."""
    new = d.apply(src)
    add = [("left", src.x, src.y, d.value), ("heading", d.value)]
    if a.believes("left", new.x, new.y, d.opposite.value):
        a = record_exclusion(a, new, d.opposite, dest)
    if not a.believes("visited", new.x, new.y):
        add += [("visited", new.x, new.y), ("entered", new.x, new.y, d.value)]
    return _with(a, add, drop=lambda b: b[0] == "heading")


def record_exclusion(a: AgentState, c: Coordinate, d1: Direction, dest: Coordinate) -> AgentState:
    """Forbid leaving ``c`` by ``d1`` again while heading for ``dest``."""
    return _with(a, [("route_excluded", c.x, c.y, d1.value, dest.x, dest.y)])


def _start_leg(a: AgentState, target: Coordinate) -> AgentState:
    pos = a.position
    a = _with(a, [("visited", pos.x, pos.y)] if pos is not None else [],
              drop=lambda b: b[0] in LEG_MEMORY or b[0] in ("compass", "compass_at"))
    return replace(a, goals=a.goals + (("reach", target.x, target.y),))


def _end_ride(a: AgentState) -> AgentState:
    goals = tuple(g for g in a.goals if g[0] not in ("complete_ride", "reach"))
    a = _with(a, drop=lambda b: b[0] in ("ride", "picked_up", "compass", "compass_at")
              or b[0] in LEG_MEMORY)
    return replace(a, goals=goals)


# --------------------------------------------------------------------------
# decision functions

def choose_collision_direction(a: AgentState, invert: bool = False) -> tuple[Direction, DamageLevel]:
    """Neighbouring obstacle with the least damage; ties broken N, E, S, W."""
    if not a.facts("unavoidable_collision"):
        raise ValueError("no unavoidable collision is believed")
    options = [(Direction(d), DamageLevel(lv)) for _, _, d, lv in a.facts("obstacle_damage")]
    if not options:
        raise ValueError("no neighbouring obstacle with a known damage level")
    sign = -1 if invert else 1
    return min(options, key=lambda o: (sign * o[1].rank, PREFERENCE_ORDER.index(o[0])))


@dataclass(frozen=True)
class NavChoice:
    direction: Direction
    kind: str  # compass | detour | opposite | backtrack
    dead_end: bool = False


def candidate_order(compass_dirs: frozenset, heading: Optional[Direction]) -> list[Direction]:
    """Compass directions (current axis first), then sideways, then away."""
    row_first = heading.is_row_move if heading is not None else True
    towards = sorted(compass_dirs, key=lambda d: (d.is_row_move != row_first,
                                                 PREFERENCE_ORDER.index(d)))
    sideways = [d for d in PREFERENCE_ORDER
                if d not in compass_dirs and d.opposite not in compass_dirs]
    away = [d for d in PREFERENCE_ORDER if d.opposite in compass_dirs]
    return towards + sideways + away


def choose_navigation_direction(a: AgentState, compass_dirs: frozenset, n: int) -> Optional[NavChoice]:
    """Next move toward the active target, or None if every option is spent."""
    pos, dest = a.position, a.target
    if pos is None or dest is None:
        raise ValueError("no active movement goal")
    blocked = a.obstacles()

    def open_(d: Direction) -> bool:
        t = d.apply(pos)
        return (0 <= t.x < n and 0 <= t.y < n
                and t not in blocked
                and not a.believes("no_further_from", t.x, t.y)
                and not a.believes("route_excluded", pos.x, pos.y, d.value, dest.x, dest.y)
                and not a.believes("left", pos.x, pos.y, d.value))

    heading = a.facts("heading")
    heading = Direction(heading[0][0]) if heading else None
    available = [d for d in PREFERENCE_ORDER if open_(d)]
    lone_exit = len(available) == 1
    for d in candidate_order(compass_dirs, heading):
        t = d.apply(pos)
        if open_(d) and not a.believes("visited", t.x, t.y):
            if d in compass_dirs:
                kind = "compass"
            elif d.opposite in compass_dirs:
                kind = "opposite"
            else:
                kind = "detour"
            return NavChoice(d, kind, dead_end=lone_exit)
    entered = a.facts("entered")
    for x, y, d in entered:
        if (x, y) == pos:
            back = Direction(d).opposite
            t = back.apply(pos)
            if (0 <= t.x < n and 0 <= t.y < n and t not in blocked
                    and not a.believes("left", pos.x, pos.y, back.value)):
                return NavChoice(back, "backtrack", dead_end=True)
    return None


# --------------------------------------------------------------------------
# plan library

@dataclass(frozen=True)
class PlanRule:
    name: str
    plan_set: str
    guard: Callable
    body: Callable


@dataclass(frozen=True)
class PlanInstance:
    rule: PlanRule
    action: Optional[ActionRecord]  # None only for the terminal halt plan

    @property
    def label(self) -> str:
        return str(self.action) if self.action is not None else "halt"


class _Ctx:
    """Per-cycle view used by guards; caches the navigation decision."""

    def __init__(self, a: AgentState, cfg: AgentConfig):
        self.a, self.cfg = a, cfg
        self._nav = ...

    @property
    def nav(self) -> Optional[NavChoice]:
        if self._nav is ...:
            self._nav = choose_navigation_direction(
                self.a, frozenset(Direction(d) for (d,) in self.a.facts("compass")), self.cfg.n)
        return self._nav

    def ride_viable(self) -> bool:
        ride = self.a.ride
        if ride is None:
            return False
        blocked = self.a.obstacles()
        return ride.start not in blocked and ride.destination not in blocked

    def moving(self) -> bool:
        """A reach goal is on top, we are not there yet, and the ride is viable."""
        a = self.a
        return (bool(a.goals) and a.goals[-1][0] == "reach"
                and a.position is not None and a.position != a.target
                and self.ride_viable())

    def steering(self) -> bool:
        pos = self.a.position
        return self.moving() and self.a.believes("compass_at", pos.x, pos.y)


def _recover(c: _Ctx):
    a = c.a
    a = replace(a, goals=tuple(g for g in a.goals if g[0] != "colide_obstacle"))
    a = _with(a, drop=lambda b: b[0] in ("recovering", "compass", "compass_at"))
    return a, ActionRecord("recover")


def _collide(c: _Ctx):
    _, d, level = c.a.goals[-1]
    a = replace(c.a, goals=c.a.goals[:-1])
    a = _with(a, [("recovering",)])
    return a, ActionRecord("drive", (d,), intent=level)


def _select_obstacle(c: _Ctx):
    d, level = choose_collision_direction(c.a, invert=c.cfg.invert_damage)
    a = replace(c.a, goals=c.a.goals + (("colide_obstacle", d.value, level.value),))
    return a, ActionRecord("colide_obstacle", (d.value, level.value))


def _mark_dead_end(c: _Ctx):
    pos = c.a.position
    return _with(c.a, [("no_further_from", pos.x, pos.y)]), ActionRecord("no_further_from", (pos.x, pos.y))


def _drive(c: _Ctx):
    return c.a, ActionRecord("drive", (c.nav.direction.value,))


def _ask_compass(c: _Ctx):
    pos, t = c.a.position, c.a.target
    return _with(c.a, [("compass_at", pos.x, pos.y)]), ActionRecord("compass", (t.x, t.y))


def _localize(c: _Ctx):
    return _with(c.a, [("localized",)]), ActionRecord("localize")


def _refuse(c: _Ctx):
    r = c.a.ride
    args = (r.start.x, r.start.y, r.destination.x, r.destination.y) if r else ()
    return _end_ride(c.a), ActionRecord("refuse_ride", args)


def _park(c: _Ctx):
    a = c.a
    pos = a.position
    a = replace(a, goals=a.goals[:-1])
    ride = a.ride
    if ride is not None and pos == ride.start and not a.believes("picked_up"):
        a = _start_leg(_with(a, [("picked_up",)]), ride.destination)
    elif ride is not None and pos == ride.destination:
        a = _end_ride(a)
    return a, ActionRecord("park", (pos.x, pos.y))


def _get_ride(c: _Ctx):
    return c.a, ActionRecord("get_ride")


def _halt(c: _Ctx):
    return replace(c.a, goals=(), halted=True), None


def _has_goal(a: AgentState, name: str) -> bool:
    return any(g[0] == name for g in a.goals)


PLAN_LIBRARY: tuple[PlanRule, ...] = (
    PlanRule("recover", "collision",
             lambda c: c.a.believes("recovering"), _recover),
    PlanRule("collide", "collision",
             lambda c: bool(c.a.goals) and c.a.goals[-1][0] == "colide_obstacle", _collide),
    PlanRule("select_obstacle", "collision",
             lambda c: (c.a.believes("localized") and bool(c.a.facts("unavoidable_collision"))
                        and bool(c.a.facts("obstacle_damage"))
                        and not _has_goal(c.a, "colide_obstacle")),
             _select_obstacle),
    PlanRule("mark_dead_end", "avoidance",
             lambda c: (c.steering() and c.nav is not None and c.nav.dead_end
                        and not c.a.believes("no_further_from", *c.a.position)),
             _mark_dead_end),
    PlanRule("avoid", "avoidance",
             lambda c: c.steering() and c.nav is not None and c.nav.kind != "compass", _drive),
    PlanRule("ask_compass", "navigation",
             lambda c: c.moving() and not c.steering(), _ask_compass),
    PlanRule("follow_compass", "navigation",
             lambda c: c.steering() and c.nav is not None and c.nav.kind == "compass", _drive),
    PlanRule("localize", "ride",
             lambda c: not c.a.believes("localized"), _localize),
    PlanRule("refuse_ride", "ride",
             lambda c: c.a.ride is not None and (not c.ride_viable()
                                                 or (c.steering() and c.nav is None)),
             _refuse),
    PlanRule("park", "ride",
             lambda c: (bool(c.a.goals) and c.a.goals[-1][0] == "reach"
                        and c.a.position == c.a.target), _park),
    PlanRule("get_ride", "ride",
             lambda c: c.a.ride is None and not c.a.believes("no_rides_left"), _get_ride),
    PlanRule("halt", "ride",
             lambda c: c.a.ride is None and c.a.believes("no_rides_left"), _halt),
)

_FALLBACK = PlanRule("give_up", "ride", lambda c: True,
                     lambda c: _refuse(c) if c.a.ride is not None else _halt(c))


def select_plan(a: AgentState, percepts: Iterable[Percept], cfg: AgentConfig) -> PlanInstance:
    """The plan instance the agent commits to after perceiving ``percepts``."""
    return deliberate(a, percepts, cfg)[1]


def deliberate(a: AgentState, percepts: Iterable[Percept],
               cfg: AgentConfig) -> tuple[AgentState, PlanInstance]:
    """One reasoning cycle: revise beliefs, select a plan, commit to its action."""
    if a.halted:
        raise ValueError("halted agent cannot deliberate")
    a = update_beliefs(a, percepts)
    ctx = _Ctx(a, cfg)
    for rule in PLAN_LIBRARY:
        if rule.guard(ctx):
            break
    else:
        rule = _FALLBACK
    new, action = rule.body(ctx)
    if action is not None:
        new = replace(new, last_action=action)
    return new, PlanInstance(rule, action)
