"""LTL to Büchi automata by on-the-fly tableau expansion.

Nodes are expanded in the style of Gerth, Peled, Vardi and Wolper: each
node carries the formulas still to process (``new``), the ones already
processed (``old``) and the obligations for the next position (``next``).
Finished nodes with identical ``old``/``next`` are merged.  The result is a
generalized automaton with one acceptance set per Until/Eventually
subformula, then degeneralized with a round-robin counter.

Transitions are labelled by a pair of atom sets that must be true/false in
the letter being read; the label of an edge is the literal content of its
target node.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .psl import (
    Always, And, Eventually, FalseF, Formula, Modal, Not, Or, Release, TrueF,
    Until, is_nnf, pretty, subformulas,
)


@dataclass(frozen=True)
class Label:
    pos: frozenset = frozenset()
    neg: frozenset = frozenset()

    def admits(self, letter) -> bool:
        return self.pos <= letter and not (self.neg & letter)

    def __str__(self) -> str:
        req = ",".join(sorted(pretty(a) for a in self.pos))
        forb = ",".join(sorted(pretty(a) for a in self.neg))
        return f"[req: {req} | forb: {forb}]"


@dataclass
class Buchi:
    states: list
    initial: list
    edges: dict                      # state -> list of (Label, state)
    accepting: tuple                 # tuple of frozensets (generalized)
    describe: dict = field(default_factory=dict)

    @property
    def is_generalized(self) -> bool:
        return len(self.accepting) != 1

    def successors(self, q, letter) -> list:
        return [dst for lab, dst in self.edges.get(q, ()) if lab.admits(letter)]

    def render(self) -> str:
        final = self.accepting[0] if len(self.accepting) == 1 else frozenset()
        lines = [f"states {len(self.states)} initial {','.join(map(str, self.initial))}"]
        for src in self.states:
            for lab, dst in self.edges.get(src, ()):
                acc = " {acc}" if dst in final else ""
                lines.append(f"{src} -> {dst} {lab}{acc}")
        return "\n".join(lines)


INIT = "init"


def _key(f: Formula) -> str:
    return pretty(f)


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Modal, TrueF, FalseF)) or (isinstance(f, Not) and isinstance(f.operand, Modal))


def _complement(f: Formula) -> Formula:
    return f.operand if isinstance(f, Not) else Not(f)


@dataclass
class _Node:
    incoming: set
    new: set
    old: set
    next: set

    def split(self, add_new=(), add_next=()) -> "_Node":
        return _Node(set(self.incoming), self.new | set(add_new), set(self.old),
                     self.next | set(add_next))


def translate_generalized(f: Formula) -> Buchi:
    if not is_nnf(f):
        raise ValueError("translate expects a formula in negation normal form")
    done: list[dict] = []
    index: dict = {}
    stack = [_Node({INIT}, {f}, set(), set())]
    while stack:
        nd = stack.pop()
        if not nd.new:
            key = (frozenset(nd.old), frozenset(nd.next))
            if key in index:
                done[index[key]]["incoming"] |= nd.incoming
                continue
            ident = len(done) + 1
            index[key] = len(done)
            done.append({"id": ident, "incoming": set(nd.incoming), "old": key[0], "next": key[1]})
            stack.append(_Node({ident}, set(nd.next), set(), set()))
            continue
        eta = min(nd.new, key=_key)
        nd.new.discard(eta)
        if eta in nd.old:
            stack.append(nd)
            continue
        if _is_literal(eta):
            if isinstance(eta, FalseF) or _complement(eta) in nd.old:
                continue
            nd.old.add(eta)
            stack.append(nd)
            continue
        nd.old.add(eta)
        match eta:
            case And(l, r):
                nd.new |= {l, r} - nd.old
                stack.append(nd)
            case Or(l, r):
                stack += [nd.split(add_new=[r]), nd.split(add_new=[l])]
            case Until(l, r):
                stack += [nd.split(add_new=[r]), nd.split(add_new=[l], add_next=[eta])]
            case Release(l, r):
                stack += [nd.split(add_new=[l, r]), nd.split(add_new=[r], add_next=[eta])]
            case Eventually(x):
                stack += [nd.split(add_new=[x]), nd.split(add_next=[eta])]
            case Always(x):
                stack.append(nd.split(add_new=[x], add_next=[eta]))
            case _:
                raise TypeError(eta)

    labels = {}
    for node in done:
        pos = frozenset(g for g in node["old"] if isinstance(g, Modal))
        neg = frozenset(g.operand for g in node["old"] if isinstance(g, Not))
        labels[node["id"]] = Label(pos, neg)
    states = [INIT] + [node["id"] for node in done]
    edges: dict = {q: [] for q in states}
    for node in done:
        for src in sorted(node["incoming"], key=str):
            edges[src].append((labels[node["id"]], node["id"]))
    for q in states:
        edges[q].sort(key=lambda e: e[1])
    accepting = []
    for g in subformulas(f):
        if isinstance(g, (Until, Eventually)):
            goal = g.right if isinstance(g, Until) else g.operand
            accepting.append(frozenset(node["id"] for node in done
                                       if g not in node["old"] or goal in node["old"]))
    describe = {node["id"]: "{" + ", ".join(sorted(map(_key, node["old"]))) + "}" for node in done}
    return Buchi(states, [INIT], edges, tuple(accepting), describe)


def degeneralize(g: Buchi) -> Buchi:
    """Counter construction; a single acceptance set comes out."""
    k = len(g.accepting)
    if k == 0:
        sets = (frozenset(g.states),)
        k = 1
    else:
        sets = g.accepting
    start = [(q, 0) for q in g.initial]
    numbering: dict = {}
    order = deque(start)
    for s in start:
        numbering[s] = len(numbering)
    edges: dict = {}
    while order:
        q, i = order.popleft()
        j = (i + 1) % k if q in sets[i] else i
        out = []
        for lab, dst in g.edges.get(q, ()):
            t = (dst, j)
            if t not in numbering:
                numbering[t] = len(numbering)
                order.append(t)
            out.append((lab, numbering[t]))
        edges[numbering[(q, i)]] = out
    accepting = frozenset(n for (q, i), n in numbering.items() if i == 0 and q in sets[0])
    states = sorted(numbering.values())
    describe = {n: f"{q}#{i}" for (q, i), n in numbering.items()}
    return Buchi(states, [numbering[s] for s in start], edges, (accepting,), describe)


def translate(f: Formula) -> Buchi:
    return degeneralize(translate_generalized(f))


# --------------------------------------------------------------------------
# acceptance of ultimately periodic words

def _as_single(a: Buchi) -> Buchi:
    return degeneralize(a) if a.is_generalized else a


def _recurrent(nodes: Iterable, succ, accepting) -> set:
    """Nodes from which an accepting node lying on a cycle is reachable."""
    nodes = list(nodes)
    graph = {v: succ(v) for v in nodes}
    on_cycle = set()
    for v in nodes:
        if not accepting(v):
            continue
        seen, work = set(), list(graph[v])
        while work:
            u = work.pop()
            if u == v:
                on_cycle.add(v)
                break
            if u in seen:
                continue
            seen.add(u)
            work.extend(graph[u])
    preds: dict = {v: [] for v in nodes}
    for v, outs in graph.items():
        for u in outs:
            preds[u].append(v)
    good, work = set(on_cycle), list(on_cycle)
    while work:
        u = work.pop()
        for p in preds[u]:
            if p not in good:
                good.add(p)
                work.append(p)
    return good


def accepting_from(a: Buchi, loop: Sequence) -> frozenset:
    """States from which ``loop^omega`` (read from its first letter) is accepted."""
    a = _as_single(a)
    letters = [frozenset(x) for x in loop]
    n = len(letters)
    nodes = [(q, i) for q in a.states for i in range(n)]

    def succ(v):
        q, i = v
        return [(d, (i + 1) % n) for d in a.successors(q, letters[i])]

    good = _recurrent(nodes, succ, lambda v: v[0] in a.accepting[0])
    return frozenset(q for q, i in good if i == 0)


def pre_image(a: Buchi, targets: frozenset, letter) -> frozenset:
    """States with a ``letter``-edge into ``targets``."""
    letter = frozenset(letter)
    return frozenset(q for q in a.states
                     if any(lab.admits(letter) and d in targets for lab, d in a.edges.get(q, ())))


def accepts_lasso(a: Buchi, prefix: Sequence, loop: Sequence) -> bool:
    """Does some run on ``prefix . loop^omega`` visit acceptance infinitely often?"""
    if not loop:
        raise ValueError("loop must be non-empty")
    a = _as_single(a)
    letters = [frozenset(x) for x in list(prefix) + list(loop)]
    n, back = len(letters), len(prefix)

    def succ(v):
        q, i = v
        j = i + 1 if i + 1 < n else back
        return [(d, j) for d in a.successors(q, letters[i])]

    start = [(q, 0) for q in a.initial]
    reach, work = set(start), list(start)
    while work:
        v = work.pop()
        for u in succ(v):
            if u not in reach:
                reach.add(u)
                work.append(u)
    good = _recurrent(reach, succ, lambda v: v[0] in a.accepting[0])
    return any(s in good for s in start)
