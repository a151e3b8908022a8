"""Action models with pre-, post- and edge-conditions, and product update."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import EmptyUpdate, NotEquivalence, TermModalError, UpdateUndefined
from .semantics import Evaluator, Model, PointedModel, partition_from_relation
from .syntax import (
    TOP, XSTAR, XSTAR_NAME, Const, Eq, Formula, Net, Not, Pred, Signature,
    free_variables, is_ground_atom,
)

#: Edge-condition used for distinct event pairs nobody specified.
DISTINGUISH = Not(Eq(XSTAR, XSTAR))
REFLEXIVE_EDGE = Eq(XSTAR, XSTAR)


@dataclass(frozen=True, eq=False)
class ActionModel:
    """An action model ``(E, Q, pre, post)``.

    ``pre`` defaults to ``TOP``; ``post[e]`` is a partial map from ground
    atoms to formulas, with unlisted atoms left unchanged; ``edges`` maps
    event pairs to edge-conditions.  Unlisted pairs ``(e, e)`` get
    ``xstar = xstar`` and unlisted distinct pairs get ``default_edge``.
    """

    name: str
    events: tuple
    pre: Mapping = field(default_factory=dict)
    post: Mapping = field(default_factory=dict)
    edges: Mapping = field(default_factory=dict)
    default_edge: Formula = DISTINGUISH

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(str(e) for e in self.events))
        object.__setattr__(self, "pre", {str(e): f for e, f in self.pre.items()})
        object.__setattr__(self, "post", {str(e): dict(p) for e, p in self.post.items()})
        object.__setattr__(self, "edges", {(str(a), str(b)): f for (a, b), f in self.edges.items()})

    def precondition(self, e) -> Formula:
        return self.pre.get(e, TOP)

    def postcondition(self, e) -> dict:
        return self.post.get(e, {})

    def edge(self, e, f) -> Formula:
        q = self.edges.get((e, f))
        if q is not None:
            return q
        return REFLEXIVE_EDGE if e == f else self.default_edge

    def conditions(self):
        for e in self.events:
            yield self.precondition(e)
            yield from self.postcondition(e).values()
            for f in self.events:
                yield self.edge(e, f)

    def condition_variables(self) -> frozenset:
        """Free variables (other than xstar) of all conditions."""
        out = set()
        for c in self.conditions():
            out |= free_variables(c)
        out.discard(XSTAR_NAME)
        return frozenset(out)

    def __eq__(self, other):
        if not isinstance(other, ActionModel):
            return NotImplemented
        return (
            self.name == other.name
            and self.events == other.events
            and all(self.precondition(e) == other.precondition(e) for e in self.events)
            and all(self.postcondition(e) == other.postcondition(e) for e in self.events)
            and all(self.edge(e, f) == other.edge(e, f) for e in self.events for f in self.events)
        )

    __hash__ = object.__hash__


@dataclass(frozen=True)
class PointedAction:
    action: ActionModel
    event: str

    def __post_init__(self):
        object.__setattr__(self, "event", str(self.event))
        if self.event not in self.action.events:
            raise TermModalError(f"{self.event!r} is not an event of {self.action.name!r}")


def identity_action(name="id", event="e") -> ActionModel:
    return ActionModel(name, (event,))


def validate_action(d: ActionModel, sig: Signature | None = None,
                    allow_free: frozenset = frozenset()) -> list:
    """Diagnostics for violations of the action-model invariants."""
    diags = []
    if not d.events:
        diags.append("action model has no events")
    if len(set(d.events)) != len(d.events):
        diags.append("duplicate event names")
    for e in d.events:
        fv = free_variables(d.precondition(e)) - allow_free
        if fv:
            diags.append(f"precondition of {e} has free variables {sorted(fv)}")
        for atom, f in d.postcondition(e).items():
            if not is_ground_atom(atom):
                diags.append(f"postcondition key {atom} of {e} is not a ground atom")
            elif isinstance(atom, Eq):
                diags.append(f"postcondition of {e} overrides equality atom {atom}")
            fv = free_variables(f) - allow_free
            if fv:
                diags.append(f"postcondition for {atom} at {e} has free variables {sorted(fv)}")
    for (e, f), q in d.edges.items():
        if e not in d.events or f not in d.events:
            diags.append(f"edge-condition for unknown event pair ({e},{f})")
        extra = free_variables(q) - {XSTAR_NAME} - allow_free
        if extra:
            diags.append(f"edge-condition ({e},{f}) has free variables other than xstar: {sorted(extra)}")
    if sig is not None:
        from .syntax import check_formula

        for c in d.conditions():
            for problem in check_formula(c, sig):
                diags.append(problem)
        for e in d.events:
            for atom in d.postcondition(e):
                for problem in check_formula(atom, sig):
                    diags.append(f"postcondition key {atom}: {problem}")
    return list(dict.fromkeys(diags))


def _pair_names(pairs):
    names = {(w, e): f"{w}{e}" for w, e in pairs}
    if len(set(names.values())) == len(names):
        return names
    return {(w, e): f"({w},{e})" for w, e in pairs}


def world_name(updated: Model, w, e) -> str:
    """Name of the pair ``(w, e)`` in a product-updated model."""
    name = updated._by_origin.get((w, e))
    if name is not None:
        return name
    raise UpdateUndefined(f"({w},{e}) is not a world of the updated model")


@dataclass
class Violation:
    agent: str
    worlds: tuple
    kind: str

    def __str__(self):
        return f"{self.kind} fails for agent {self.agent} at {self.worlds}"


def _relations(m: Model, d: ActionModel, g, ev: Evaluator):
    survivors = [
        (w, e) for w in m.worlds for e in d.events
        if ev.holds(m, w, g, d.precondition(e))
    ]
    names = _pair_names(survivors)
    rel = {}
    for i in m.agents:
        gi = dict(g)
        gi[XSTAR_NAME] = i
        pairs = set()
        edge_truth = {}
        for (w, e) in survivors:
            cell = m.cell(i, w)
            for (v, f) in survivors:
                if v not in cell:
                    continue
                key = (w, e, f)
                ok = edge_truth.get(key)
                if ok is None:
                    ok = edge_truth[key] = ev.holds(m, w, gi, d.edge(e, f))
                if ok:
                    pairs.add((names[(w, e)], names[(v, f)]))
        rel[i] = pairs
    return survivors, names, rel


def _closure_violations(worlds, rel):
    out = []
    for i, pairs in rel.items():
        for w in worlds:
            if (w, w) not in pairs:
                out.append(Violation(i, (w, w), "reflexivity"))
        for (u, v) in sorted(pairs):
            if (v, u) not in pairs:
                out.append(Violation(i, (u, v), "symmetry"))
        succ = {}
        for u, v in pairs:
            succ.setdefault(u, set()).add(v)
        for (u, v) in sorted(pairs):
            for z in sorted(succ.get(v, ())):
                if (u, z) not in pairs:
                    out.append(Violation(i, (u, v, z), "transitivity"))
    return out


def product_update(m: Model, d: ActionModel, g: Mapping | None = None,
                   evaluator: Evaluator | None = None) -> Model:
    """The product update ``m (x) d``.

    Conditions are evaluated under the valuation ``g`` (only relevant when
    conditions mention variables other than ``xstar``).  Raises
    :class:`EmptyUpdate` when no world survives and :class:`NotEquivalence`
    when an updated relation is not an equivalence.
    """
    ev = evaluator or Evaluator()
    g = dict(g or {})
    survivors, names, rel = _relations(m, d, g, ev)
    if not survivors:
        raise EmptyUpdate(d.name)
    worlds = [names[p] for p in survivors]
    partitions = {}
    bad = []
    for i in m.agents:
        blocks = partition_from_relation(worlds, rel[i])
        if blocks is None:
            bad.extend(_closure_violations(worlds, {i: rel[i]}))
        partitions[i] = blocks
    if bad:
        raise NotEquivalence(bad)

    constants, predicates, network = {}, {}, {}
    for (w, e) in survivors:
        name = names[(w, e)]
        constants[name] = dict(m.constants.get(w, {}))
        preds = {p: set(ext) for p, ext in m.predicates.get(w, {}).items()}
        net = set(m.network.get(w, ()))
        plus_p, minus_p, plus_n, minus_n = {}, {}, set(), set()
        for atom, f in d.postcondition(e).items():
            truth = ev.holds(m, w, g, f)
            if isinstance(atom, Pred):
                who = m.denotation(atom.term.name, w)
                (plus_p if truth else minus_p).setdefault(atom.pred, set()).add(who)
            elif isinstance(atom, Net):
                pair = (m.denotation(atom.left.name, w), m.denotation(atom.right.name, w))
                (plus_n if truth else minus_n).add(pair)
        for p in set(plus_p) | set(minus_p):
            preds[p] = (preds.get(p, set()) | plus_p.get(p, set())) - minus_p.get(p, set())
        predicates[name] = preds
        network[name] = (net | plus_n) - minus_n
    return Model(
        agents=m.agents,
        worlds=worlds,
        partitions=partitions,
        constants=constants,
        predicates=predicates,
        network=network,
        signature=m.signature,
        origin={names[p]: p for p in survivors},
    )


def applicable(pm: PointedModel, pa: PointedAction, g: Mapping | None = None,
               actions: Mapping | None = None) -> bool:
    """Whether the event's precondition holds at the actual world."""
    ev = Evaluator(actions)
    return ev.holds(pm.model, pm.actual, dict(g or {}), pa.action.precondition(pa.event))


def product_update_pointed(pm: PointedModel, pa: PointedAction, g: Mapping | None = None,
                           actions: Mapping | None = None) -> PointedModel:
    ev = Evaluator(actions)
    g = dict(g or {})
    if not ev.holds(pm.model, pm.actual, g, pa.action.precondition(pa.event)):
        raise UpdateUndefined(
            f"update undefined at actual world {pm.actual}: precondition of event "
            f"{pa.event} ({pa.action.precondition(pa.event)}) fails"
        )
    updated = product_update(pm.model, pa.action, g, evaluator=ev)
    return PointedModel(updated, world_name(updated, pm.actual, pa.event))


def validate_update(m: Model, d: ActionModel, g: Mapping | None = None,
                    actions: Mapping | None = None) -> list:
    """Closure violations (reflexivity, symmetry, transitivity) of ``m (x) d``."""
    ev = Evaluator(actions)
    survivors, names, rel = _relations(m, d, dict(g or {}), ev)
    return _closure_violations([names[p] for p in survivors], rel)
