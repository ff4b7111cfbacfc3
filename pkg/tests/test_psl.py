import random
from types import SimpleNamespace

import pytest
from hypothesis import given, settings, strategies as st

from avagent.agent import ActionRecord
from avagent.grid import Percept
from avagent.psl import (
    Always, And, Atom, Eventually, Implies, Modal, Not, Or, PSLError, PSLSyntaxError,
    Release, TrueF, UnknownAgentError, Until, atoms, eval_modal_atom, holds_on_lasso,
    is_nnf, parse_property, pretty, to_nnf,
)

from conftest import BUNDLED
from formulas import formulas, lasso_words, random_nnf, TWO_ATOMS

p = Modal("B", "vehicle", Atom("p"))
q = Modal("B", "vehicle", Atom("q"))


def test_parse_always_eventually():
    f = parse_property("[] <> B vehicle at(_,_)")
    assert f == Always(Eventually(Modal("B", "vehicle", Atom("at", ("_", "_")))))


def test_parse_damage_property_structure():
    f = parse_property(BUNDLED["damage.psl"].read_text())
    assert isinstance(f, Always) and isinstance(f.operand, And)
    first, second = f.operand.left, f.operand.right
    assert isinstance(first, Implies) and isinstance(second, Implies)
    assert isinstance(first.left, Eventually) and isinstance(first.right, Eventually)
    assert first.right.operand == parse_property("G vehicle colide_obstacle(_,low)")
    assert second.right.operand == parse_property("G vehicle colide_obstacle(_,moderate)")
    assert {pretty(m) for m in atoms(f)} == {
        "B vehicle unavoidable_collision(_,_)", "B vehicle obstacle_damage(_,_,_,low)",
        "B vehicle obstacle_damage(_,_,_,moderate)", "G vehicle colide_obstacle(_,low)",
        "G vehicle colide_obstacle(_,moderate)"}


def operator_depth(f):
    """Nesting depth of operators, with literals as leaves and flattened chains."""
    if isinstance(f, Modal) or (isinstance(f, Not) and isinstance(f.operand, Modal)):
        return 0
    children = [v for v in vars(f).values()]
    same = [c for c in children if type(c) is type(f) and isinstance(f, (And, Or))]
    other = [c for c in children if c not in same]
    return max([operator_depth(c) for c in same] + [1 + operator_depth(c) for c in other])


def test_damage_property_depth_five():
    assert operator_depth(parse_property(BUNDLED["damage.psl"].read_text())) == 5


@pytest.mark.parametrize("text", ["B vehicle", "B vehicle at(", "[] (B vehicle x", "B vehicle x &", "&"])
def test_syntax_errors(text):
    with pytest.raises(PSLSyntaxError):
        parse_property(text)


def test_unknown_modality_and_arity():
    with pytest.raises(PSLSyntaxError):
        parse_property("K vehicle at(1,2)")
    with pytest.raises(PSLError):
        parse_property("B vehicle at(1,2) & G vehicle at(1)")


def test_precedence_and_associativity():
    assert parse_property("B vehicle a | B vehicle b & B vehicle c") == \
        Or(Modal("B", "vehicle", Atom("a")), And(Modal("B", "vehicle", Atom("b")), Modal("B", "vehicle", Atom("c"))))
    assert parse_property("B vehicle a -> B vehicle b -> B vehicle c") == \
        Implies(Modal("B", "vehicle", Atom("a")), Implies(Modal("B", "vehicle", Atom("b")), Modal("B", "vehicle", Atom("c"))))
    assert parse_property("~ B vehicle a U B vehicle b") == Until(Not(Modal("B", "vehicle", Atom("a"))), Modal("B", "vehicle", Atom("b")))
    assert parse_property("P(seen(1)) & true") == And(Modal("P", None, Atom("seen", (1,))), TrueF())


def test_comments_and_newlines():
    assert parse_property("# heading\n[] # always\n B vehicle x\n") == Always(Modal("B", "vehicle", Atom("x")))


@settings(max_examples=200)
@given(formulas(max_leaves=8))
def test_pretty_roundtrip(f):
    assert parse_property(pretty(f)) == f


# -- negation normal form ------------------------------------------------

def test_nnf_examples():
    assert to_nnf(Not(Until(p, q))) == Release(Not(p), Not(q))
    assert to_nnf(Not(Not(p))) == p
    assert to_nnf(Not(Always(p))) == Eventually(Not(p))
    assert to_nnf(Implies(p, q)) == Or(Not(p), q)


@given(formulas())
def test_nnf_shape(f):
    g = to_nnf(f)
    assert is_nnf(g)
    assert to_nnf(g) == g


NNF_CASES = [random_nnf(random.Random(seed), depth=4) for seed in range(3)]
NNF_CASES += [parse_property(t) for t in [
    "~ ((B vehicle p(_) U ~ G vehicle q) -> [] <> G vehicle q)",
    "~ (<> B vehicle p(_) R (G vehicle q U B vehicle p(_)))",
]]


@pytest.mark.parametrize("f", [Not(c) if i < 3 else c for i, c in enumerate(NNF_CASES)], ids=pretty)
def test_nnf_equivalent_on_all_small_lassos(f):
    g = to_nnf(f)
    for prefix, loop in lasso_words(4, 3, TWO_ATOMS):
        assert holds_on_lasso(f, prefix, loop) == holds_on_lasso(g, prefix, loop)


# -- lasso semantics -------------------------------------------------------

def test_lasso_semantics_basics():
    P_, Q_ = frozenset({p}), frozenset({q})
    none = frozenset()
    assert holds_on_lasso(Eventually(p), [none, none], [none, P_])
    assert holds_on_lasso(Eventually(p), [P_], [none])
    assert not holds_on_lasso(Always(p), [none], [P_])
    assert holds_on_lasso(Until(p, q), [P_, P_], [Q_])
    assert not holds_on_lasso(Until(p, q), [P_], [P_])
    assert holds_on_lasso(Release(p, q), [], [Q_])
    assert holds_on_lasso(Always(Eventually(p)), [], [none, P_])
    with pytest.raises(ValueError):
        holds_on_lasso(p, [P_], [])


# -- modal atoms ------------------------------------------------------------

def view(**kw):
    base = dict(beliefs=frozenset(), goals=(), intentions=(), last_action=None,
                committed_action=None, percepts=())
    base.update(kw)
    return SimpleNamespace(**base)


def test_eval_belief_pattern():
    s = view(beliefs=frozenset({("obstacle", 1, 1, "low")}))
    assert eval_modal_atom(parse_property("B vehicle obstacle(_,_,low)"), s)
    assert not eval_modal_atom(parse_property("B vehicle obstacle(_,_,high)"), s)


def test_eval_goal_pattern():
    s = view(goals=(("colide_obstacle", "south", "low"),))
    assert eval_modal_atom(parse_property("G vehicle colide_obstacle(_,low)"), s)


def test_eval_empty_base():
    assert not eval_modal_atom(parse_property("B vehicle at(0,0)"), view())


def test_eval_actions_intentions_percepts():
    s = view(last_action=ActionRecord("drive", ("north",)),
             committed_action=ActionRecord("park", (4, 0)),
             intentions=(("reach", 4, 0),), goals=(("complete_ride", 4, 1, 4, 0), ("reach", 4, 0)),
             percepts=(Percept("at", (4, 0)),))
    for text, want in [("A vehicle drive(north)", True), ("A vehicle drive(south)", False),
                       ("ID vehicle park(_,_)", True), ("I vehicle reach(4,0)", True),
                       ("I vehicle complete_ride(_,_,_,_)", False),
                       ("G vehicle complete_ride(_,_,_,_)", True), ("P(at(4,_))", True)]:
        assert eval_modal_atom(parse_property(text), s) is want, text


def test_unknown_agent():
    with pytest.raises(UnknownAgentError):
        eval_modal_atom(parse_property("B truck at(0,0)"), view())


@given(st.sets(st.tuples(st.sampled_from(["at", "obstacle"]), st.integers(0, 3), st.integers(0, 3))))
def test_all_wildcard_matches_nonempty(beliefs):
    m = parse_property("B vehicle at(_,_)")
    assert eval_modal_atom(m, view(beliefs=frozenset(beliefs))) == any(b[0] == "at" for b in beliefs)
