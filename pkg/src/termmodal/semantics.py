"""Finite term-modal models with non-rigid constants, and satisfaction."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .errors import UnknownActionModel, UpdateUndefined, TermModalError
from .syntax import (
    ActionMod, And, Const, Eq, Forall, Formula, Know, Net, Not, Pred, Signature,
    Top, Var, free_variables,
)


def _freeze_partition(blocks):
    return tuple(frozenset(b) for b in blocks)


@dataclass(frozen=True, eq=False)
class Model:
    """A term-modal model ``(A, W, ~, I)``.

    ``partitions`` maps every agent to a partition of the worlds; the cell
    containing ``w`` is what the agent considers possible at ``w``.
    ``constants[w][c]`` is the agent named by ``c`` at ``w``,
    ``predicates[w][P]`` the extension of ``P`` at ``w`` and ``network[w]``
    the set of ordered pairs in ``N`` at ``w``.
    """

    agents: tuple
    worlds: tuple
    partitions: Mapping
    constants: Mapping
    predicates: Mapping
    network: Mapping
    signature: Signature = None
    # world -> (source world, event) for models produced by product update
    origin: Mapping = field(default=None, repr=False)

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "agents", tuple(self.agents))
        set_(self, "worlds", tuple(self.worlds))
        set_(self, "partitions", {a: _freeze_partition(bs) for a, bs in self.partitions.items()})
        set_(self, "constants", {w: dict(cs) for w, cs in self.constants.items()})
        set_(self, "predicates", {
            w: {p: frozenset(ext) for p, ext in ps.items()} for w, ps in self.predicates.items()
        })
        set_(self, "network", {w: frozenset(tuple(e) for e in es) for w, es in self.network.items()})
        if self.signature is None:
            consts, preds = {}, {}
            for w in self.worlds:
                consts.update(dict.fromkeys(self.constants.get(w, {})))
                preds.update(dict.fromkeys(self.predicates.get(w, {})))
            set_(self, "signature", Signature(tuple(consts), tuple(preds)))
        cells = {}
        for a, blocks in self.partitions.items():
            for block in blocks:
                for w in block:
                    cells.setdefault((a, w), block)
        set_(self, "_cells", cells)
        set_(self, "_by_origin", {p: w for w, p in (self.origin or {}).items()})

    def cell(self, agent, world) -> frozenset:
        """Worlds ``agent`` cannot distinguish from ``world``."""
        return self._cells.get((agent, world), frozenset({world}))

    def related(self, agent, w, v) -> bool:
        return v in self.cell(agent, w)

    def denotation(self, const, world):
        return self.constants[world][const]

    def extension_of(self, pred, world) -> frozenset:
        return self.predicates.get(world, {}).get(pred, frozenset())

    def __eq__(self, other):
        if not isinstance(other, Model):
            return NotImplemented
        return (
            self.agents == other.agents
            and self.worlds == other.worlds
            and {a: set(bs) for a, bs in self.partitions.items()}
            == {a: set(bs) for a, bs in other.partitions.items()}
            and self.constants == other.constants
            and _norm_preds(self) == _norm_preds(other)
            and self.network == other.network
        )

    __hash__ = object.__hash__


def _norm_preds(m):
    return {w: {p: e for p, e in m.predicates.get(w, {}).items() if e} for w in m.worlds}


@dataclass(frozen=True)
class PointedModel:
    model: Model
    actual: str

    def __post_init__(self):
        if self.actual not in self.model.worlds:
            raise TermModalError(f"actual world {self.actual!r} is not a world of the model")


def validate_model(m: Model) -> list:
    """Diagnostics for every violated model invariant (empty when valid)."""
    diags = []
    if not m.agents:
        diags.append("agent domain is empty")
    if not m.worlds:
        diags.append("world set is empty")
    if len(set(m.agents)) != len(m.agents):
        diags.append("duplicate agent names")
    if len(set(m.worlds)) != len(m.worlds):
        diags.append("duplicate world names")
    worlds, agents = set(m.worlds), set(m.agents)
    for a in m.agents:
        blocks = m.partitions.get(a)
        if blocks is None:
            diags.append(f"agent {a} has no partition")
            continue
        seen = {}
        for block in blocks:
            if not block:
                diags.append(f"partition of {a} has an empty cell")
            for w in sorted(block):
                if w not in worlds:
                    diags.append(f"partition of {a} mentions unknown world {w}")
                elif w in seen:
                    diags.append(f"partition of {a} is not a partition: world {w} lies in overlapping cells")
                seen[w] = block
        for w in m.worlds:
            if w not in seen:
                diags.append(f"partition of {a} does not cover world {w}")
    for a in m.partitions:
        if a not in agents:
            diags.append(f"partition given for unknown agent {a}")
    for w in m.worlds:
        denot = m.constants.get(w, {})
        for c in m.signature.constants:
            if c not in denot:
                diags.append(f"constant {c} undenoted at {w}")
            elif denot[c] not in agents:
                diags.append(f"constant {c} denotes unknown agent {denot[c]} at {w}")
        for p, ext in m.predicates.get(w, {}).items():
            for a in sorted(ext - agents):
                diags.append(f"predicate {p} at {w} contains unknown agent {a}")
        for a, b in sorted(m.network.get(w, frozenset())):
            if a not in agents or b not in agents:
                diags.append(f"network at {w} contains unknown pair ({a},{b})")
    for w in set(m.constants) | set(m.predicates) | set(m.network):
        if w not in worlds:
            diags.append(f"interpretation given for unknown world {w}")
    return diags


def extension(t, w, m: Model, g: Mapping | None = None):
    """The agent denoted by term ``t`` at world ``w`` under valuation ``g``."""
    if isinstance(t, Var):
        g = g or {}
        if t.name in g:
            return g[t.name]
        return m.agents[0]
    return m.constants[w][t.name]


class Evaluator:
    """Satisfaction checker bound to an action-model registry.

    Product updates triggered by action modalities are cached per model,
    so re-entering the same ``[action:event]`` box under a quantifier does
    not rebuild the updated model.
    """

    def __init__(self, actions: Mapping | None = None, strict: bool = False):
        # shared, not copied: a translator may register compiled actions later
        self.actions = actions if actions is not None else {}
        self.strict = strict
        self._updates = {}
        self._action_fv = {}

    def action(self, name):
        try:
            return self.actions[name]
        except KeyError:
            raise UnknownActionModel(name) from None

    def holds(self, m: Model, w, g: Mapping, phi: Formula) -> bool:
        if isinstance(phi, Pred):
            return extension(phi.term, w, m, g) in m.extension_of(phi.pred, w)
        if isinstance(phi, Net):
            pair = (extension(phi.left, w, m, g), extension(phi.right, w, m, g))
            return pair in m.network.get(w, ())
        if isinstance(phi, Eq):
            return extension(phi.left, w, m, g) == extension(phi.right, w, m, g)
        if isinstance(phi, Top):
            return True
        if isinstance(phi, Not):
            return not self.holds(m, w, g, phi.body)
        if isinstance(phi, And):
            return self.holds(m, w, g, phi.left) and self.holds(m, w, g, phi.right)
        if isinstance(phi, Know):
            a = extension(phi.agent, w, m, g)
            return all(self.holds(m, v, g, phi.body) for v in m.cell(a, w))
        if isinstance(phi, Forall):
            g2 = dict(g)
            for a in m.agents:
                g2[phi.var] = a
                if not self.holds(m, w, g2, phi.body):
                    return False
            return True
        if isinstance(phi, ActionMod):
            return self._holds_action(m, w, g, phi)
        raise TypeError(f"not a formula: {phi!r}")

    def _holds_action(self, m, w, g, phi):
        from .update import product_update, world_name

        d = self.action(phi.action)
        if phi.event not in d.events:
            raise TermModalError(f"action model {phi.action!r} has no event {phi.event!r}")
        if not self.holds(m, w, g, d.precondition(phi.event)):
            if self.strict:
                raise UpdateUndefined(
                    f"[{phi.action}:{phi.event}] undefined at {w}: precondition fails"
                )
            return True
        fv = self._action_fv.get(phi.action)
        if fv is None:
            fv = self._action_fv[phi.action] = d.condition_variables()
        key = (id(m), phi.action, tuple(sorted((x, g[x]) for x in fv if x in g)))
        hit = self._updates.get(key)
        if hit is None:
            hit = (m, product_update(m, d, g, evaluator=self))
            self._updates[key] = hit
        updated = hit[1]
        return self.holds(updated, world_name(updated, w, phi.event), g, phi.body)


def satisfies(m: Model, w, g: Mapping | None, phi: Formula, actions: Mapping | None = None,
              strict: bool = False) -> bool:
    """Whether ``m, w`` satisfies ``phi`` under variable valuation ``g``.

    ``actions`` maps action-model names to :class:`~termmodal.update.ActionModel`
    objects for resolving ``[action:event]`` boxes.  When the event's
    precondition fails the box is vacuously true, unless ``strict`` is set,
    in which case :class:`~termmodal.errors.UpdateUndefined` is raised.
    """
    if w not in m.worlds:
        raise TermModalError(f"unknown world {w!r}")
    return Evaluator(actions, strict).holds(m, w, dict(g or {}), phi)


def truth_set(m: Model, phi: Formula, g: Mapping | None = None, actions=None) -> list:
    """Worlds of ``m`` (in declaration order) where ``phi`` holds."""
    ev = Evaluator(actions)
    g = dict(g or {})
    return [w for w in m.worlds if ev.holds(m, w, g, phi)]


def is_closed(phi: Formula) -> bool:
    return not free_variables(phi)


def partition_from_relation(worlds, pairs):
    """Partition induced by an equivalence relation, or ``None`` if it is not one."""
    rel = {w: set() for w in worlds}
    for u, v in pairs:
        rel[u].add(v)
    for w in worlds:
        if w not in rel[w]:
            return None
        for v in rel[w]:
            if rel[v] != rel[w]:
                return None
    blocks, seen = [], set()
    for w in worlds:
        if w not in seen:
            block = frozenset(rel[w])
            blocks.append(block)
            seen |= block
    return tuple(blocks)


def close_edges(worlds, edges):
    """Reflexive-symmetric-transitive closure of an edge list, as a partition."""
    parent = {w: w for w in worlds}

    def find(w):
        while parent[w] != w:
            parent[w] = parent[parent[w]]
            w = parent[w]
        return w

    for u, v in edges:
        parent[find(u)] = find(v)
    groups = {}
    for w in worlds:
        groups.setdefault(find(w), []).append(w)
    return tuple(frozenset(ws) for ws in groups.values())
