"""Hybrid network models, their indexical language, and the embedding into
term-modal logic.

A hybrid formula is evaluated at a world *and* an agent.  ``translate``
turns it into a term-modal formula whose single free "pivot" variable
stands for that agent; ``tml_image`` turns the model into a term-modal
model in which every agent has one rigid name.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .errors import PivotCollision, TermModalError
from .semantics import Evaluator, Model
from .syntax import (
    TOP, XSTAR_NAME, And, Const, Eq, Forall, Formula, Implies, Know, Net, Not, Pred,
    Signature, Var, substitute,
)

PIVOTS = ("x", "y")


class HybridFormula:
    __slots__ = ()

    def __str__(self):
        from .parsing import format_hybrid

        return format_hybrid(self)


@dataclass(frozen=True)
class HTop(HybridFormula):
    pass


@dataclass(frozen=True)
class Prop(HybridFormula):
    name: str


@dataclass(frozen=True)
class Nominal(HybridFormula):
    name: str


@dataclass(frozen=True)
class HNot(HybridFormula):
    body: HybridFormula


@dataclass(frozen=True)
class HAnd(HybridFormula):
    left: HybridFormula
    right: HybridFormula


@dataclass(frozen=True)
class At(HybridFormula):
    nominal: str
    body: HybridFormula


@dataclass(frozen=True)
class HKnow(HybridFormula):
    body: HybridFormula


@dataclass(frozen=True)
class Neighbor(HybridFormula):
    """"All my neighbors": ``body`` holds of every network neighbor."""

    body: HybridFormula


@dataclass(frozen=True)
class Univ(HybridFormula):
    """``body`` holds of every agent at the current world."""

    body: HybridFormula


HTOP = HTop()
HBOTTOM = HNot(HTOP)


def h_or(a, b):
    return HNot(HAnd(HNot(a), HNot(b)))


def h_implies(a, b):
    return HNot(HAnd(a, HNot(b)))


def h_iff(a, b):
    return HAnd(h_implies(a, b), h_implies(b, a))


def h_conj(fs):
    out = None
    for f in fs:
        out = f if out is None else HAnd(out, f)
    return HTOP if out is None else out


def h_disj(fs):
    out = None
    for f in fs:
        out = f if out is None else h_or(out, f)
    return HBOTTOM if out is None else out


def children(phi):
    if isinstance(phi, HAnd):
        return (phi.left, phi.right)
    body = getattr(phi, "body", None)
    return () if body is None else (body,)


def nominals_of(phi) -> frozenset:
    out = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Nominal):
            out.add(f.name)
        elif isinstance(f, At):
            out.add(f.nominal)
        stack.extend(children(f))
    return frozenset(out)


def props_of(phi) -> frozenset:
    out = set()
    stack = [phi]
    while stack:
        f = stack.pop()
        if isinstance(f, Prop):
            out.add(f.name)
        stack.extend(children(f))
    return frozenset(out)


def depth(phi) -> int:
    kids = children(phi)
    return 0 if not kids else 1 + max(depth(k) for k in kids)


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class HybridModel:
    """An epistemic network structure with nominals and a two-dimensional valuation.

    ``valuation[p]`` is the set of ``(world, agent)`` pairs where the
    indexical proposition ``p`` holds.
    """

    agents: tuple
    worlds: tuple
    networks: Mapping
    partitions: Mapping
    nominals: Mapping = field(default_factory=dict)
    valuation: Mapping = field(default_factory=dict)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "agents", tuple(self.agents))
        set_(self, "worlds", tuple(self.worlds))
        set_(self, "networks", {w: frozenset(tuple(e) for e in es) for w, es in self.networks.items()})
        set_(self, "partitions", {a: tuple(frozenset(b) for b in bs) for a, bs in self.partitions.items()})
        set_(self, "nominals", dict(self.nominals))
        set_(self, "valuation", {p: frozenset(tuple(x) for x in xs) for p, xs in self.valuation.items()})
        cells = {}
        for a, blocks in self.partitions.items():
            for block in blocks:
                for w in block:
                    cells.setdefault((a, w), block)
        set_(self, "_cells", cells)

    def cell(self, agent, world):
        return self._cells.get((agent, world), frozenset({world}))

    @cached_property
    def _succ(self):
        return {
            w: {a: tuple(b for (x, b) in sorted(self.networks.get(w, ())) if x == a) for a in self.agents}
            for w in self.worlds
        }

    def neighbors(self, world, agent):
        return self._succ[world][agent]

    def __eq__(self, other):
        if not isinstance(other, HybridModel):
            return NotImplemented
        return (
            self.agents == other.agents and self.worlds == other.worlds
            and self.networks == other.networks
            and {a: set(b) for a, b in self.partitions.items()}
            == {a: set(b) for a, b in other.partitions.items()}
            and self.nominals == other.nominals and self.valuation == other.valuation
        )

    __hash__ = object.__hash__


def validate_hybrid(hm: HybridModel) -> list:
    diags = []
    if not hm.agents:
        diags.append("agent domain is empty")
    if not hm.worlds:
        diags.append("world set is empty")
    worlds, agents = set(hm.worlds), set(hm.agents)
    for a in hm.agents:
        blocks = hm.partitions.get(a)
        if blocks is None:
            diags.append(f"agent {a} has no partition")
            continue
        seen = set()
        for block in blocks:
            for w in sorted(block):
                if w not in worlds:
                    diags.append(f"partition of {a} mentions unknown world {w}")
                elif w in seen:
                    diags.append(f"partition of {a} is not a partition: world {w} lies in overlapping cells")
                seen.add(w)
        for w in hm.worlds:
            if w not in seen:
                diags.append(f"partition of {a} does not cover world {w}")
    for i, a in hm.nominals.items():
        if a not in agents:
            diags.append(f"nominal {i} names unknown agent {a}")
        if i in PIVOTS or i == XSTAR_NAME:
            diags.append(f"nominal name {i} is reserved")
    for w, es in hm.networks.items():
        if w not in worlds:
            diags.append(f"network given for unknown world {w}")
        for a, b in sorted(es):
            if a not in agents or b not in agents:
                diags.append(f"network at {w} contains unknown pair ({a},{b})")
    for p, xs in hm.valuation.items():
        for w, a in sorted(xs):
            if w not in worlds or a not in agents:
                diags.append(f"valuation of {p} contains unknown point ({w},{a})")
    return diags


class HybridChecker:
    """Direct indexical satisfaction over a hybrid network model."""

    def __init__(self, model: HybridModel):
        self.model = model

    def holds(self, w, a, phi) -> bool:
        m = self.model
        if isinstance(phi, Prop):
            try:
                return (w, a) in m.valuation[phi.name]
            except KeyError:
                raise TermModalError(f"undeclared proposition {phi.name!r}") from None
        if isinstance(phi, Nominal):
            return self._named(phi.name) == a
        if isinstance(phi, HTop):
            return True
        if isinstance(phi, HNot):
            return not self.holds(w, a, phi.body)
        if isinstance(phi, HAnd):
            return self.holds(w, a, phi.left) and self.holds(w, a, phi.right)
        if isinstance(phi, At):
            return self.holds(w, self._named(phi.nominal), phi.body)
        if isinstance(phi, HKnow):
            return all(self.holds(v, a, phi.body) for v in m.cell(a, w))
        if isinstance(phi, Neighbor):
            return all(self.holds(w, b, phi.body) for b in m.neighbors(w, a))
        if isinstance(phi, Univ):
            return all(self.holds(w, b, phi.body) for b in m.agents)
        return self.holds_extra(w, a, phi)

    def holds_extra(self, w, a, phi) -> bool:
        raise TypeError(f"not a hybrid formula: {phi!r}")

    def _named(self, nominal):
        try:
            return self.model.nominals[nominal]
        except KeyError:
            raise TermModalError(f"undeclared nominal {nominal!r}") from None


def hybrid_satisfies(hm: HybridModel, w, a, phi) -> bool:
    if w not in hm.worlds or a not in hm.agents:
        raise TermModalError(f"({w},{a}) is not a point of the model")
    return HybridChecker(hm).holds(w, a, phi)


# ---------------------------------------------------------------------------
# Translation
# ---------------------------------------------------------------------------

def other_pivot(p):
    return "y" if p == "x" else "x"


class Translator:
    """Mutually recursive translations ``T_x`` and ``T_y``."""

    def translate(self, phi, pivot="x") -> Formula:
        if pivot not in PIVOTS:
            raise TermModalError(f"pivot must be 'x' or 'y', not {pivot!r}")
        clash = nominals_of(phi) & (set(PIVOTS) | {XSTAR_NAME})
        if clash:
            raise PivotCollision(f"pivot collision: formula mentions {sorted(clash)}")
        return self.tx(phi, pivot)

    def tx(self, phi, p) -> Formula:
        if isinstance(phi, Prop):
            return Pred(phi.name, Var(p))
        if isinstance(phi, Nominal):
            return Eq(Var(p), Var(phi.name))
        if isinstance(phi, HTop):
            return TOP
        if isinstance(phi, HNot):
            return Not(self.tx(phi.body, p))
        if isinstance(phi, HAnd):
            return And(self.tx(phi.left, p), self.tx(phi.right, p))
        if isinstance(phi, At):
            return substitute(self.tx(phi.body, p), p, Var(phi.nominal))
        if isinstance(phi, Neighbor):
            q = other_pivot(p)
            return Forall(q, Implies(Net(Var(p), Var(q)), self.tx(phi.body, q)))
        if isinstance(phi, HKnow):
            return Know(Var(p), self.tx(phi.body, p))
        if isinstance(phi, Univ):
            return Forall(p, self.tx(phi.body, p))
        return self.tx_extra(phi, p)

    def tx_extra(self, phi, p) -> Formula:
        raise TypeError(f"not a hybrid formula: {phi!r}")


def translate(phi, pivot="x") -> Formula:
    return Translator().translate(phi, pivot)


def default_constants(agents):
    """One rigid name per agent: agent ``a`` is named ``a_``."""
    return tuple(f"{a}_" for a in agents)


def tml_image(hm: HybridModel, constants=None) -> Model:
    """The term-modal image of ``hm``: same agents, worlds and partitions,
    constant ``constants[k]`` rigidly naming the k-th agent."""
    if constants is None:
        constants = default_constants(hm.agents)
    constants = tuple(constants)
    if len(constants) != len(hm.agents):
        raise TermModalError(
            f"agent count mismatch: {len(hm.agents)} agents but {len(constants)} constants"
        )
    naming = dict(zip(constants, hm.agents))
    props = tuple(hm.valuation)
    preds = {w: {p: set() for p in props} for w in hm.worlds}
    for p, points in hm.valuation.items():
        for w, a in points:
            preds[w][p].add(a)
    return Model(
        agents=hm.agents,
        worlds=hm.worlds,
        partitions=hm.partitions,
        constants={w: dict(naming) for w in hm.worlds},
        predicates=preds,
        network={w: hm.networks.get(w, ()) for w in hm.worlds},
        signature=Signature(constants, props),
    )


def nominal_valuation(hm: HybridModel) -> dict:
    """The term-modal valuation mapping each nominal-variable to its agent."""
    return dict(hm.nominals)


@dataclass
class Disagreement:
    formula: object
    world: str
    agent: str
    pivot: str
    hybrid: bool
    translated: bool

    def __str__(self):
        return (f"{self.formula} at ({self.world},{self.agent}) pivot {self.pivot}: "
                f"hybrid={self.hybrid} translated={self.translated}")


def check_prop1(hm: HybridModel, corpus, constants=None, pivots=PIVOTS) -> list:
    """Compare direct hybrid satisfaction with satisfaction of the translation
    on the image, at every world, agent and pivot.  Returns the disagreements."""
    image = tml_image(hm, constants)
    direct = HybridChecker(hm)
    ev = Evaluator()
    tr = Translator()
    base = nominal_valuation(hm)
    report = []
    for phi in corpus:
        for pivot in pivots:
            psi = tr.translate(phi, pivot)
            for w in hm.worlds:
                for a in hm.agents:
                    g = dict(base)
                    g[pivot] = a
                    lhs = direct.holds(w, a, phi)
                    rhs = ev.holds(image, w, g, psi)
                    if lhs != rhs:
                        report.append(Disagreement(phi, w, a, pivot, lhs, rhs))
    return report
