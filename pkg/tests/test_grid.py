import itertools
import random

import pytest
from hypothesis import given, strategies as st

from avagent.grid import (
    ANY, Coordinate as C, DamageLevel, Direction, MovementError, Ride, ScenarioError,
    damage_branches, dump_scenario, is_unavoidable, load_scenario, manhattan,
    neighbors, compass, next_ride, perceive, sample_damage, step_vehicle,
)

N, S, E, W = Direction.NORTH, Direction.SOUTH, Direction.EAST, Direction.WEST
LOW, MOD, HIGH = DamageLevel.LOW, DamageLevel.MODERATE, DamageLevel.HIGH

TABLE1 = "grid 5\nstart 2 1\nride 4 1 4 0\nobstacle 1 1 any\nobstacle 2 2 any\nobstacle 2 0 any\n"


def resolved_table1(levels):
    sc = load_scenario(TABLE1)
    return sc.initial_state().with_damage(dict(zip([C(1, 1), C(2, 2), C(2, 0)], levels)))


# -- loading -------------------------------------------------------------

def test_load_table1():
    sc = load_scenario(TABLE1)
    assert sc.n == 5 and sc.start == C(2, 1)
    assert sc.rides == (Ride(C(4, 1), C(4, 0)),)
    assert [o.position for o in sc.obstacles] == [C(1, 1), C(2, 2), C(2, 0)]
    assert all(o.damage == ANY for o in sc.obstacles)


def test_minimal_scenario():
    sc = load_scenario("grid 1\nstart 0 0\n")
    assert sc.rides == () and sc.obstacles == ()


@pytest.mark.parametrize("text, line", [
    ("grid 3\nstart 0 0\nobstacle 0 0 low\n", None),
    ("grid 3\nstart 0 0\nride 0 0 3 0\n", None),
    ("grid 3\nstart 0 0\ndamage_prob 0.5 0.5 0.5\n", None),
    ("grid 3\nstart 0 0\nobstacle 1 1 huge\n", 3),
    ("grid 3\nstart 0\n", 2),
    ("grid 3\nfly 1 1\n", 2),
    ("start 0 0\n", None),
])
def test_invalid_scenarios(text, line):
    with pytest.raises(ScenarioError) as info:
        load_scenario(text)
    if line is not None:
        assert info.value.line == line


def test_probabilities_within_tolerance():
    load_scenario("grid 2\nstart 0 0\ndamage_prob 0.2 0.3 0.5000000000001\n")


def test_dump_roundtrip():
    sc = load_scenario(TABLE1 + "collision_prob 0.25\n")
    assert load_scenario(dump_scenario(sc)) == sc


# -- geometry ------------------------------------------------------------

def test_neighbors_examples():
    assert neighbors(C(2, 1), 5) == [(N, C(3, 1)), (S, C(1, 1)), (E, C(2, 2)), (W, C(2, 0))]
    assert neighbors(C(0, 0), 5) == [(N, C(1, 0)), (E, C(0, 1))]
    assert neighbors(C(4, 4), 5) == [(S, C(3, 4)), (W, C(4, 3))]


@pytest.mark.parametrize("n", range(2, 7))
def test_neighbor_counts_exhaustive(n):
    for x, y in itertools.product(range(n), repeat=2):
        edges = (x in (0, n - 1)) + (y in (0, n - 1))
        assert len(neighbors(C(x, y), n)) == 4 - edges


def test_compass_examples():
    assert compass(C(2, 1), C(4, 1)) == {N}
    assert compass(C(4, 1), C(4, 0)) == {W}
    assert compass(C(3, 3), C(3, 3)) == set()


cells = st.builds(C, st.integers(0, 7), st.integers(0, 7))


@given(cells, cells)
def test_compass_reduces_distance(a, b):
    dirs = compass(a, b)
    assert len(dirs) <= 2 and (not dirs) == (a == b)
    for d in dirs:
        assert manhattan(d.apply(a), b) == manhattan(a, b) - 1
    others = set(Direction) - dirs
    assert all(manhattan(d.apply(a), b) == manhattan(a, b) + 1 for d in others)


@given(cells, cells, st.randoms())
def test_following_compass_reaches_in_manhattan_steps(a, b, rnd):
    pos, steps = a, 0
    while pos != b:
        pos = rnd.choice(sorted(compass(pos, b), key=lambda d: d.value)).apply(pos)
        steps += 1
    assert steps == manhattan(a, b)


# -- perception ----------------------------------------------------------

def test_perceive_table1_start():
    s = resolved_table1([LOW, HIGH, MOD])
    got = perceive(s)
    assert got[0].atom() == ("at", 2, 1)
    atoms = {p.atom() for p in got}
    assert {("obstacle_ahead", "south", 1, 1), ("obstacle_ahead", "east", 2, 2),
            ("obstacle_ahead", "west", 2, 0)} <= atoms
    assert {("obstacle_damage", 1, 1, "south", "low"), ("obstacle_damage", 2, 2, "east", "high"),
            ("obstacle_damage", 2, 0, "west", "moderate")} <= atoms
    assert ("unavoidable_collision", 2, 1) in atoms
    assert len(got) == 8
    assert perceive(s) == got


def test_perceive_empty_grid():
    s = load_scenario("grid 5\nstart 0 0\n").initial_state()
    assert [p.atom() for p in perceive(s)] == [("at", 0, 0)]


def test_perceive_away_from_obstacles():
    s = resolved_table1([LOW, LOW, LOW])
    (_, moved), = step_vehicle(s, N)
    assert [p.atom() for p in perceive(moved)] == [("at", 3, 1)]


def test_perceive_requires_resolution():
    with pytest.raises(ValueError):
        perceive(load_scenario(TABLE1).initial_state())


def test_unavoidable_cases():
    assert is_unavoidable(resolved_table1([LOW, LOW, LOW]))
    two = load_scenario("grid 5\nstart 2 2\nobstacle 1 2 low\nobstacle 3 2 low\n").initial_state()
    assert not is_unavoidable(two)
    corner = load_scenario("grid 5\nstart 0 0\nobstacle 1 0 low\nobstacle 0 1 low\n").initial_state()
    assert not is_unavoidable(corner)


def test_unavoidable_needs_previous_cell_when_moved():
    sc = load_scenario("grid 5\nstart 3 1\nobstacle 1 1 low\nobstacle 2 2 low\nobstacle 2 0 low\n")
    (_, s), = step_vehicle(sc.initial_state(), S)
    assert s.pos == C(2, 1) and s.prev == C(3, 1)
    assert is_unavoidable(s)
    # coming in from the north is fine; a second free cell would not be
    sc2 = load_scenario("grid 5\nstart 2 1\nobstacle 2 2 low\nobstacle 2 0 low\nobstacle 3 1 low\n")
    assert is_unavoidable(sc2.initial_state())
    (_, back), = step_vehicle(step_vehicle(sc2.initial_state(), S)[0][1], N)
    assert back.prev == C(1, 1) and is_unavoidable(back)


# -- movement ------------------------------------------------------------

def test_step_plain_move():
    s = resolved_table1([LOW, LOW, LOW])
    (label, t), = step_vehicle(s, N)
    assert label == "move" and t.pos == C(3, 1) and t.prev == C(2, 1)


def test_step_collision_branches():
    s = resolved_table1([LOW, HIGH, MOD])
    (l1, hit), (l2, dodge) = step_vehicle(s, S, LOW)
    assert (l1, l2) == ("collided", "escaped")
    assert hit.pos == C(1, 1) and hit.damage_events == ((C(1, 1), LOW),)
    assert not hit.live_obstacle(C(1, 1))
    assert dodge.pos == C(3, 1) and dodge.damage_events == ()


def test_step_errors():
    s = load_scenario("grid 5\nstart 0 0\n").initial_state()
    with pytest.raises(MovementError):
        step_vehicle(s, S)
    with pytest.raises(MovementError):
        step_vehicle(resolved_table1([LOW, LOW, LOW]), S)


@given(st.sampled_from(list(Direction)), st.sampled_from([LOW, MOD, HIGH]),
       st.lists(st.sampled_from([LOW, MOD, HIGH]), min_size=3, max_size=3))
def test_collision_outcomes_invariant(d, intent, levels):
    s = resolved_table1(levels)
    if d == N:
        return
    out = step_vehicle(s, d, intent)
    assert len(out) == 2
    assert len(out[0][1].damage_events) == 1 and out[1][1].damage_events == ()


def test_obstacles_static_without_collisions():
    from avagent.system import simulate
    sc = load_scenario("grid 5\nstart 0 0\nride 0 0 4 4\nobstacle 2 2 low\nobstacle 1 3 high\n")
    trace = simulate(sc, seed=1)
    for step in trace.steps:
        env = step.state.env
        assert {c for c in sc.obstacle_map if env.live_obstacle(c)} == set(sc.obstacle_map)


# -- rides and damage ----------------------------------------------------

def test_next_ride_fifo():
    sc = load_scenario("grid 5\nstart 0 0\nride 1 1 2 2\nride 3 3 0 0\n")
    s = sc.initial_state()
    r1, s = next_ride(s)
    r2, s = next_ride(s)
    r3, _ = next_ride(s)
    assert (r1, r2, r3) == (Ride(C(1, 1), C(2, 2)), Ride(C(3, 3), C(0, 0)), None)
    assert next_ride(load_scenario(TABLE1).initial_state())[0] == Ride(C(4, 1), C(4, 0))


def test_damage_branches_table1():
    branches = damage_branches(load_scenario(TABLE1).initial_state())
    assert len(branches) == 27
    assignments = {e.damage for _, e in branches}
    assert len(assignments) == 27
    assert damage_branches(branches[0][1]) == []


def test_sampled_damage_is_a_branch():
    s = load_scenario(TABLE1).initial_state()
    options = {e for _, e in damage_branches(s)}
    rng = random.Random(5)
    for _ in range(20):
        assert sample_damage(s, rng) in options
