"""Static grid-world environment for the taxi agent.

The world is an ``n x n`` matrix of cells.  A cell ``(x, y)`` is addressed by
row ``x`` and column ``y``.  Moving north/south changes the row index, moving
east/west changes the column index.  Obstacles are static and carry a damage
level; obstacles declared with the ``any`` wildcard have their level decided
at a branch point when the vehicle first perceives them.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import NamedTuple, Optional


class ScenarioError(ValueError):
    """Malformed or invalid scenario file."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class MovementError(RuntimeError):
    """A drive that the environment refuses (off-grid, or into an obstacle)."""


class Coordinate(NamedTuple):
    x: int
    y: int

    def __str__(self) -> str:
        return f"({self.x},{self.y})"


class Direction(enum.Enum):
    NORTH = "north"
    SOUTH = "south"
    EAST = "east"
    WEST = "west"

    @property
    def delta(self) -> tuple[int, int]:
        return _DELTAS[self]

    @property
    def opposite(self) -> "Direction":
        return _OPPOSITE[self]

    @property
    def is_row_move(self) -> bool:
        return self in (Direction.NORTH, Direction.SOUTH)

    def apply(self, c: Coordinate) -> Coordinate:
        dx, dy = self.delta
        return Coordinate(c.x + dx, c.y + dy)

    def __str__(self) -> str:
        return self.value


_DELTAS = {
    Direction.NORTH: (1, 0),
    Direction.SOUTH: (-1, 0),
    Direction.EAST: (0, 1),
    Direction.WEST: (0, -1),
}
_OPPOSITE = {
    Direction.NORTH: Direction.SOUTH,
    Direction.SOUTH: Direction.NORTH,
    Direction.EAST: Direction.WEST,
    Direction.WEST: Direction.EAST,
}

# Order used when listing a cell's surroundings.
SCAN_ORDER = (Direction.NORTH, Direction.SOUTH, Direction.EAST, Direction.WEST)
# Order used by every agent-side tie-break.
PREFERENCE_ORDER = (Direction.NORTH, Direction.EAST, Direction.SOUTH, Direction.WEST)


def direction_between(a: Coordinate, b: Coordinate) -> Optional[Direction]:
    """The direction that moves ``a`` onto ``b``, or None if not adjacent."""
    for d in SCAN_ORDER:
        if d.apply(a) == b:
            return d
    return None


class DamageLevel(enum.Enum):
    LOW = "low"
    MODERATE = "moderate"
    HIGH = "high"

    @property
    def rank(self) -> int:
        return _RANK[self]

    def __lt__(self, other: "DamageLevel") -> bool:
        if not isinstance(other, DamageLevel):
            return NotImplemented
        return self.rank < other.rank

    def __str__(self) -> str:
        return self.value


_RANK = {DamageLevel.LOW: 0, DamageLevel.MODERATE: 1, DamageLevel.HIGH: 2}
ANY = "any"
# Branch points list alternatives in canonical (lexicographic) order of the
# level names, so the search visits them in a hash-seed independent order.
CANONICAL_LEVELS = tuple(sorted(DamageLevel, key=lambda lv: lv.value))


@dataclass(frozen=True)
class Obstacle:
    position: Coordinate
    damage: object  # DamageLevel or ANY


@dataclass(frozen=True)
class Ride:
    start: Coordinate
    destination: Coordinate

    def __str__(self) -> str:
        return f"{self.start}->{self.destination}"


@dataclass(frozen=True)
class CollisionModel:
    collide: float = 0.5
    low: float = 1 / 3
    moderate: float = 1 / 3
    high: float = 1 / 3

    @property
    def escape(self) -> float:
        return 1.0 - self.collide

    def level_weights(self) -> dict[DamageLevel, float]:
        return {DamageLevel.LOW: self.low, DamageLevel.MODERATE: self.moderate,
                DamageLevel.HIGH: self.high}


@dataclass(frozen=True)
class Scenario:
    n: int
    start: Coordinate
    rides: tuple[Ride, ...] = ()
    obstacles: tuple[Obstacle, ...] = ()
    collision_model: CollisionModel = CollisionModel()

    def __post_init__(self):
        validate(self)

    def in_bounds(self, c: Coordinate) -> bool:
        return 0 <= c.x < self.n and 0 <= c.y < self.n

    @cached_property
    def obstacle_map(self) -> dict[Coordinate, object]:
        return {o.position: o.damage for o in self.obstacles}

    def initial_state(self) -> "EnvState":
        resolved = tuple(sorted(
            (o.position, o.damage) for o in self.obstacles if o.damage != ANY))
        return EnvState(self, self.start, damage=resolved)


def validate(s: Scenario) -> None:
    if s.n < 1:
        raise ScenarioError(f"grid order must be positive, got {s.n}")
    if not s.in_bounds(s.start):
        raise ScenarioError(f"start {s.start} outside {s.n}x{s.n} grid")
    seen = set()
    for o in s.obstacles:
        if not s.in_bounds(o.position):
            raise ScenarioError(f"obstacle {o.position} out of bounds")
        if o.position in seen:
            raise ScenarioError(f"two obstacles at {o.position}")
        seen.add(o.position)
    if s.start in seen:
        raise ScenarioError(f"start {s.start} is occupied by an obstacle")
    for r in s.rides:
        for c in (r.start, r.destination):
            if not s.in_bounds(c):
                raise ScenarioError(f"ride endpoint {c} out of bounds")
        if r.start == r.destination:
            raise ScenarioError(f"ride {r} has identical endpoints")
    cm = s.collision_model
    for p in (cm.collide, cm.low, cm.moderate, cm.high):
        if not 0.0 <= p <= 1.0:
            raise ScenarioError(f"probability {p} outside [0, 1]")
    if abs(cm.low + cm.moderate + cm.high - 1.0) > 1e-9:
        raise ScenarioError("damage probabilities must sum to 1")


def load_scenario(text: str) -> Scenario:
    """Parse a scenario file.

    Directives, one per line (``#`` starts a comment)::

        grid <n>
        start <x> <y>
        ride <sx> <sy> <dx> <dy>
        obstacle <x> <y> <low|moderate|high|any>
        collision_prob <T>
        damage_prob <L> <M> <H>
    """
    n = start = None
    rides, obstacles = [], []
    collide = None
    levels = None
    arity = {"grid": 1, "start": 2, "ride": 4, "obstacle": 3,
             "collision_prob": 1, "damage_prob": 3}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *args = line.split()
        if head not in arity:
            raise ScenarioError(f"unknown directive {head!r}", lineno)
        if len(args) != arity[head]:
            raise ScenarioError(f"{head} expects {arity[head]} arguments", lineno)
        try:
            if head == "grid":
                if n is not None:
                    raise ScenarioError("grid given twice", lineno)
                n = int(args[0])
            elif head == "start":
                if start is not None:
                    raise ScenarioError("start given twice", lineno)
                start = Coordinate(int(args[0]), int(args[1]))
            elif head == "ride":
                sx, sy, dx, dy = map(int, args)
                rides.append(Ride(Coordinate(sx, sy), Coordinate(dx, dy)))
            elif head == "obstacle":
                label = args[2].lower()
                if label == ANY:
                    damage = ANY
                else:
                    try:
                        damage = DamageLevel(label)
                    except ValueError:
                        raise ScenarioError(f"unknown damage level {args[2]!r}", lineno)
                obstacles.append(Obstacle(Coordinate(int(args[0]), int(args[1])), damage))
            elif head == "collision_prob":
                collide = float(args[0])
            elif head == "damage_prob":
                levels = tuple(float(a) for a in args)
        except ScenarioError:
            raise
        except ValueError as exc:
            raise ScenarioError(f"bad number in {head}: {exc}", lineno)
    if n is None:
        raise ScenarioError("missing 'grid' directive")
    if start is None:
        raise ScenarioError("missing 'start' directive")
    cm = CollisionModel()
    if collide is not None:
        cm = replace(cm, collide=collide)
    if levels is not None:
        cm = replace(cm, low=levels[0], moderate=levels[1], high=levels[2])
    return Scenario(n, start, tuple(rides), tuple(obstacles), cm)


def dump_scenario(s: Scenario) -> str:
    lines = [f"grid {s.n}", f"start {s.start.x} {s.start.y}"]
    lines += [f"ride {r.start.x} {r.start.y} {r.destination.x} {r.destination.y}"
              for r in s.rides]
    lines += [f"obstacle {o.position.x} {o.position.y} {o.damage}" for o in s.obstacles]
    cm = s.collision_model
    lines.append(f"collision_prob {cm.collide!r}")
    lines.append(f"damage_prob {cm.low!r} {cm.moderate!r} {cm.high!r}")
    return "\n".join(lines) + "\n"


def neighbors(c: Coordinate, n: int) -> list[tuple[Direction, Coordinate]]:
    out = []
    for d in SCAN_ORDER:
        t = d.apply(c)
        if 0 <= t.x < n and 0 <= t.y < n:
            out.append((d, t))
    return out


def compass(src: Coordinate, dst: Coordinate) -> frozenset[Direction]:
    """Directions that bring ``src`` one step closer to ``dst``."""
    dirs = set()
    if dst.x > src.x:
        dirs.add(Direction.NORTH)
    elif dst.x < src.x:
        dirs.add(Direction.SOUTH)
    if dst.y > src.y:
        dirs.add(Direction.EAST)
    elif dst.y < src.y:
        dirs.add(Direction.WEST)
    return frozenset(dirs)


def manhattan(a: Coordinate, b: Coordinate) -> int:
    return abs(a.x - b.x) + abs(a.y - b.y)


@dataclass(frozen=True)
class Percept:
    """A single environment percept; ``atom()`` gives its ground-atom form."""
    kind: str
    args: tuple = ()

    def atom(self) -> tuple:
        return (self.kind, *self.args)

    def __str__(self) -> str:
        if not self.args:
            return self.kind
        return f"{self.kind}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class EnvState:
    scenario: Scenario = field(compare=False, repr=False)
    pos: Coordinate
    prev: Optional[Coordinate] = None
    ride_index: int = 0
    # resolved damage levels, sorted by coordinate
    damage: tuple = ()
    damage_events: tuple = ()
    cleared: frozenset = frozenset()

    @cached_property
    def _damage_map(self) -> dict:
        return dict(self.damage)

    def live_obstacle(self, c: Coordinate) -> bool:
        return c in self.scenario.obstacle_map and c not in self.cleared

    def level_at(self, c: Coordinate) -> Optional[DamageLevel]:
        return self._damage_map.get(c)

    @property
    def remaining_rides(self) -> tuple[Ride, ...]:
        return self.scenario.rides[self.ride_index:]

    def unresolved_neighbors(self) -> list[Coordinate]:
        return [c for _, c in neighbors(self.pos, self.scenario.n)
                if self.live_obstacle(c) and c not in self._damage_map]

    def with_damage(self, assignment: dict) -> "EnvState":
        merged = dict(self.damage)
        merged.update(assignment)
        return replace(self, damage=tuple(sorted(merged.items())))


def damage_branches(s: EnvState) -> list[tuple[str, EnvState]]:
    """Joint classification of all unresolved obstacles next to the vehicle.

    Returns ``[]`` when nothing needs resolving, otherwise ``3**k``
    alternatives for ``k`` unresolved neighbours, labelled e.g.
    ``damage (1,1)=low (2,0)=high``.
    """
    pending = sorted(s.unresolved_neighbors())
    if not pending:
        return []
    out = []
    for combo in itertools.product(CANONICAL_LEVELS, repeat=len(pending)):
        assignment = dict(zip(pending, combo))
        label = "damage " + " ".join(f"{c}={lv.value}" for c, lv in assignment.items())
        out.append((label, s.with_damage(assignment)))
    return out


def sample_damage(s: EnvState, rng) -> EnvState:
    pending = sorted(s.unresolved_neighbors())
    if not pending:
        return s
    weights = s.scenario.collision_model.level_weights()
    levels = list(weights)
    assignment = {c: rng.choices(levels, weights=[weights[lv] for lv in levels])[0]
                  for c in pending}
    return s.with_damage(assignment)


def is_unavoidable(s: EnvState) -> bool:
    """At least three live obstacles around the vehicle and no clean way out.

    Walls never count as obstacles.  A free neighbour is tolerated only if it
    is the cell the vehicle just came from, or if the vehicle has not moved
    yet (start of run).
    """
    blocked, free = 0, []
    for _, c in neighbors(s.pos, s.scenario.n):
        if s.live_obstacle(c):
            blocked += 1
        else:
            free.append(c)
    if blocked < 3:
        return False
    return all(s.prev is None or c == s.prev for c in free)


def perceive(s: EnvState) -> list[Percept]:
    if s.unresolved_neighbors():
        raise ValueError("perceive() called before damage resolution")
    out = [Percept("at", (s.pos.x, s.pos.y))]
    for d, c in neighbors(s.pos, s.scenario.n):
        if s.live_obstacle(c):
            out.append(Percept("obstacle_ahead", (d.value, c.x, c.y)))
            out.append(Percept("obstacle_damage", (c.x, c.y, d.value, s.level_at(c).value)))
    if is_unavoidable(s):
        out.append(Percept("unavoidable_collision", (s.pos.x, s.pos.y)))
    return out


def escape_cell(s: EnvState) -> Coordinate:
    """Where the vehicle ends up when it dodges an unavoidable collision."""
    free = [c for d, c in sorted(neighbors(s.pos, s.scenario.n),
                                 key=lambda dc: PREFERENCE_ORDER.index(dc[0]))
            if not s.live_obstacle(c)]
    fresh = [c for c in free if c != s.prev]
    if fresh:
        return fresh[0]
    if free:
        return free[0]
    # boxed in on every side: the manoeuvre amounts to braking in place
    return s.pos


def step_vehicle(s: EnvState, d: Direction,
                 collide_intent: Optional[DamageLevel] = None) -> list[tuple[str, EnvState]]:
    """Drive one cell.  Returns labelled successor states.

    A plain move yields one successor labelled ``move``.  Driving into an
    obstacle with ``collide_intent`` yields two: ``collided`` (damage logged,
    obstacle cleared, vehicle on the obstacle cell) and ``escaped``.
    """
    target = d.apply(s.pos)
    if not s.scenario.in_bounds(target):
        raise MovementError(f"drive {d} from {s.pos} leaves the grid")
    if not s.live_obstacle(target):
        return [("move", replace(s, pos=target, prev=s.pos))]
    if collide_intent is None:
        raise MovementError(f"drive {d} from {s.pos} hits obstacle at {target}")
    level = s.level_at(target)
    collided = replace(s, pos=target, prev=s.pos,
                       damage_events=s.damage_events + ((target, level),),
                       cleared=s.cleared | {target})
    dodge = escape_cell(s)
    escaped = replace(s, pos=dodge, prev=s.pos if dodge != s.pos else s.prev)
    return [("collided", collided), ("escaped", escaped)]


def next_ride(s: EnvState) -> tuple[Optional[Ride], EnvState]:
    if s.ride_index >= len(s.scenario.rides):
        return None, s
    return s.scenario.rides[s.ride_index], replace(s, ride_index=s.ride_index + 1)

