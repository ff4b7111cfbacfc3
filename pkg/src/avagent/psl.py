"""Property language: LTL over agent modalities.

Concrete syntax (binary operators are right associative, loosest last)::

    phi ::= B ag f | G ag f | A ag f | I ag f | ID ag f | P(f)
          | true | false | ( phi )
          | ~ phi | [] phi | <> phi
          | phi U phi | phi R phi
          | phi & phi
          | phi | phi
          | phi -> phi

    f   ::= name | name(term, ...)        term ::= _ | integer | name

``B`` belief, ``G`` goal, ``A`` last action, ``I`` intention, ``ID``
intention to do (the committed next action), ``P`` percept.  Atom arguments
are constants or the wildcard ``_``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

AGENT = "vehicle"
MODALITIES = ("B", "G", "A", "I", "ID", "P")
WILDCARD = "_"


class PSLError(ValueError):
    pass


class PSLSyntaxError(PSLError):
    def __init__(self, message: str, pos: int):
        self.pos = pos
        super().__init__(f"{message} at position {pos}")


class UnknownAgentError(PSLError):
    pass


# --------------------------------------------------------------------------
# abstract syntax

class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Atom:
    name: str
    args: tuple = ()

    def matches(self, ground: Sequence) -> bool:
        """``ground`` is a tuple ``(name, arg, ...)``."""
        if len(ground) != len(self.args) + 1 or ground[0] != self.name:
            return False
        return all(p == WILDCARD or p == g for p, g in zip(self.args, ground[1:]))

    def __str__(self) -> str:
        if not self.args:
            return self.name
        return f"{self.name}({','.join(str(a) for a in self.args)})"


@dataclass(frozen=True)
class Modal(Formula):
    modality: str
    agent: Optional[str]
    atom: Atom


@dataclass(frozen=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True)
class FalseF(Formula):
    pass


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


_BINARY = {And: "&", Or: "|", Implies: "->", Until: "U", Release: "R"}
_UNARY = {Not: "~", Eventually: "<>", Always: "[]"}


def pretty(f: Formula) -> str:
    """Canonical single-line form; binary nodes are always parenthesised."""
    match f:
        case Modal("P", _, atom):
            return f"P({atom})"
        case Modal(m, ag, atom):
            return f"{m} {ag} {atom}"
        case TrueF():
            return "true"
        case FalseF():
            return "false"
        case Not(x) | Eventually(x) | Always(x):
            return f"{_UNARY[type(f)]} {pretty(x)}"
        case And(l, r) | Or(l, r) | Implies(l, r) | Until(l, r) | Release(l, r):
            return f"({pretty(l)} {_BINARY[type(f)]} {pretty(r)})"
    raise TypeError(f"not a formula: {f!r}")


def subformulas(f: Formula) -> list[Formula]:
    """Post-order list of distinct subformulas (children before parents)."""
    out: list[Formula] = []
    seen = set()

    def walk(g):
        if g in seen:
            return
        match g:
            case Not(x) | Eventually(x) | Always(x):
                walk(x)
            case And(l, r) | Or(l, r) | Implies(l, r) | Until(l, r) | Release(l, r):
                walk(l)
                walk(r)
        seen.add(g)
        out.append(g)

    walk(f)
    return out


def atoms(f: Formula) -> list[Modal]:
    return [g for g in subformulas(f) if isinstance(g, Modal)]


def temporal_count(f: Formula) -> int:
    match f:
        case Modal() | TrueF() | FalseF():
            return 0
        case Not(x):
            return temporal_count(x)
        case Eventually(x) | Always(x):
            return 1 + temporal_count(x)
        case Until(l, r) | Release(l, r):
            return 1 + temporal_count(l) + temporal_count(r)
        case And(l, r) | Or(l, r) | Implies(l, r):
            return temporal_count(l) + temporal_count(r)
    raise TypeError(f)


# --------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\[\]|<>|->|[&|~(),])|(\d+)|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise PSLSyntaxError(f"unexpected character {text[pos]!r}", pos)
        start = m.start(m.lastindex)
        if m.group(1):
            toks.append(("op", m.group(1), start))
        elif m.group(2):
            toks.append(("num", m.group(2), start))
        else:
            toks.append(("name", m.group(3), start))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def accept(self, value: str) -> bool:
        kind, v, _ = self.peek()
        if kind in ("op", "name") and v == value:
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            _, v, pos = self.peek()
            raise PSLSyntaxError(f"expected {value!r}, found {v or 'end of input'!r}", pos)

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        if self.accept("|"):
            return Or(left, self.disjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.temporal()
        if self.accept("&"):
            return And(left, self.conjunction())
        return left

    def temporal(self) -> Formula:
        left = self.unary()
        if self.accept("U"):
            return Until(left, self.temporal())
        if self.accept("R"):
            return Release(left, self.temporal())
        return left

    def unary(self) -> Formula:
        kind, v, pos = self.peek()
        if self.accept("~"):
            return Not(self.unary())
        if self.accept("[]"):
            return Always(self.unary())
        if self.accept("<>"):
            return Eventually(self.unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        if self.accept("true"):
            return TrueF()
        if self.accept("false"):
            return FalseF()
        if kind != "name":
            raise PSLSyntaxError(f"expected a formula, found {v or 'end of input'!r}", pos)
        self.take()
        if v == "P":
            if self.accept("("):
                atom = self.atom()
                self.expect(")")
            else:
                atom = self.atom()
            return Modal("P", None, atom)
        if v not in MODALITIES:
            raise PSLSyntaxError(f"unknown modality {v!r}", pos)
        kind, agent, apos = self.take()
        if kind != "name":
            raise PSLSyntaxError(f"expected agent name after {v}", apos)
        return Modal(v, agent, self.atom())

    def atom(self) -> Atom:
        kind, name, pos = self.take()
        if kind != "name" or name in ("U", "R"):
            raise PSLSyntaxError(f"expected an atom, found {name or 'end of input'!r}", pos)
        args = []
        if self.accept("("):
            args.append(self.term())
            while self.accept(","):
                args.append(self.term())
            self.expect(")")
        return Atom(name, tuple(args))

    def term(self):
        kind, v, pos = self.take()
        if kind == "num":
            return int(v)
        if kind == "name":
            return v
        raise PSLSyntaxError(f"expected a term, found {v or 'end of input'!r}", pos)


def parse_property(text: str) -> Formula:
    """Parse a property; ``#`` starts a comment and newlines are whitespace."""
    text = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    p = _Parser(text)
    f = p.formula()
    kind, v, pos = p.peek()
    if kind != "eof":
        raise PSLSyntaxError(f"unexpected {v!r}", pos)
    check_arity(f)
    return f


def check_arity(f: Formula) -> None:
    arity: dict[str, int] = {}
    for m in atoms(f):
        known = arity.setdefault(m.atom.name, len(m.atom.args))
        if known != len(m.atom.args):
            raise PSLError(f"predicate {m.atom.name!r} used with arities {known} "
                           f"and {len(m.atom.args)}")


# --------------------------------------------------------------------------
# negation normal form

def to_nnf(f: Formula) -> Formula:
    """Push negations onto modal atoms and remove implications."""
    match f:
        case Modal() | TrueF() | FalseF():
            return f
        case Not(x):
            return _negate(x)
        case Implies(l, r):
            return Or(_negate(l), to_nnf(r))
        case Eventually(x):
            return Eventually(to_nnf(x))
        case Always(x):
            return Always(to_nnf(x))
        case And(l, r) | Or(l, r) | Until(l, r) | Release(l, r):
            return type(f)(to_nnf(l), to_nnf(r))
    raise TypeError(f)


def _negate(f: Formula) -> Formula:
    match f:
        case Modal():
            return Not(f)
        case TrueF():
            return FalseF()
        case FalseF():
            return TrueF()
        case Not(x):
            return to_nnf(x)
        case Implies(l, r):
            return And(to_nnf(l), _negate(r))
        case And(l, r):
            return Or(_negate(l), _negate(r))
        case Or(l, r):
            return And(_negate(l), _negate(r))
        case Until(l, r):
            return Release(_negate(l), _negate(r))
        case Release(l, r):
            return Until(_negate(l), _negate(r))
        case Eventually(x):
            return Always(_negate(x))
        case Always(x):
            return Eventually(_negate(x))
    raise TypeError(f)


def is_nnf(f: Formula) -> bool:
    match f:
        case Modal() | TrueF() | FalseF():
            return True
        case Not(x):
            return isinstance(x, Modal)
        case Implies():
            return False
        case Eventually(x) | Always(x):
            return is_nnf(x)
        case And(l, r) | Or(l, r) | Until(l, r) | Release(l, r):
            return is_nnf(l) and is_nnf(r)
    raise TypeError(f)


# --------------------------------------------------------------------------
# state-level evaluation

def eval_modal_atom(m: Modal, state) -> bool:
    """Truth of one modal atom in ``state``.

    ``state`` exposes ``beliefs`` (ground atoms), ``goals`` and
    ``intentions`` (goal atoms), ``last_action`` and ``committed_action``
    (objects with ``atom()`` or None) and ``percepts`` (objects with
    ``atom()``).
    """
    if m.modality != "P" and m.agent != AGENT:
        raise UnknownAgentError(f"unknown agent {m.agent!r}; only {AGENT!r} exists")
    a = m.atom
    match m.modality:
        case "B":
            return any(a.matches(b) for b in state.beliefs)
        case "G":
            return any(a.matches(g) for g in state.goals)
        case "I":
            return any(a.matches(g) for g in state.intentions)
        case "A":
            act = state.last_action
            return act is not None and a.matches(act.atom())
        case "ID":
            act = state.committed_action
            return act is not None and a.matches(act.atom())
        case "P":
            return any(a.matches(p.atom()) for p in state.percepts)
    raise PSLError(f"unknown modality {m.modality!r}")


# --------------------------------------------------------------------------
# direct semantics on ultimately periodic words

def holds_on_lasso(f: Formula, prefix: Sequence, loop: Sequence) -> bool:
    """Evaluate ``f`` at position 0 of the word ``prefix . loop^omega``.

    Each letter is a collection of the modal atoms that are true there.
    Until/Release are solved as least/greatest fixpoints over the finite
    set of positions.
    """
    if not loop:
        raise ValueError("loop must be non-empty")
    letters = [frozenset(x) for x in list(prefix) + list(loop)]
    n = len(letters)
    back = len(prefix)
    nxt = [i + 1 if i + 1 < n else back for i in range(n)]
    memo: dict[Formula, list[bool]] = {}

    def fix(left, right, least: bool) -> list[bool]:
        val = [not least] * n
        changed = True
        while changed:
            changed = False
            for i in reversed(range(n)):
                if least:
                    v = right[i] or (left[i] and val[nxt[i]])
                else:
                    v = right[i] and (left[i] or val[nxt[i]])
                if v != val[i]:
                    val[i] = v
                    changed = True
        return val

    def sat(g: Formula) -> list[bool]:
        if g in memo:
            return memo[g]
        match g:
            case Modal():
                r = [g in letter for letter in letters]
            case TrueF():
                r = [True] * n
            case FalseF():
                r = [False] * n
            case Not(x):
                r = [not v for v in sat(x)]
            case And(l, rr):
                r = [p and q for p, q in zip(sat(l), sat(rr))]
            case Or(l, rr):
                r = [p or q for p, q in zip(sat(l), sat(rr))]
            case Implies(l, rr):
                r = [(not p) or q for p, q in zip(sat(l), sat(rr))]
            case Until(l, rr):
                r = fix(sat(l), sat(rr), least=True)
            case Release(l, rr):
                r = fix(sat(l), sat(rr), least=False)
            case Eventually(x):
                r = fix([True] * n, sat(x), least=True)
            case Always(x):
                r = fix([False] * n, sat(x), least=False)
            case _:
                raise TypeError(g)
        memo[g] = r
        return r

    return sat(f)[0]
