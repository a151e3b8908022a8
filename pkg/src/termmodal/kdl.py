"""Knowledge, diffusion and learning: feature models, their two kinds of
update, and the compilation of those updates into action models.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping

from .errors import InconsistencyError, TermModalError, ValuationBlowup
from .hybrid import (
    HAnd, HNot, HybridChecker, HybridFormula, HybridModel, Prop, Translator, h_disj,
    h_or, tml_image,
)
from .semantics import Evaluator, Model, partition_from_relation
from .syntax import (
    TOP, XSTAR, And, Const, Eq, Forall, Implies, Know, Net, Not, Pred, Var, conj,
    exists_many, substitute,
)
from .update import ActionModel, PointedAction

STAR = "*"
EVENT_CAP_ENV = "TERMMODAL_EVENT_CAP"
DEFAULT_EVENT_CAP = 2 ** 16


def event_cap() -> int:
    raw = os.environ.get(EVENT_CAP_ENV)
    return int(raw) if raw else DEFAULT_EVENT_CAP


def feature_prop(feature, value) -> str:
    """Proposition name for "my ``feature`` has value ``value``"."""
    return f"{feature}_{value}"


@dataclass(frozen=True)
class FeatureSpace:
    """Features and their finite value sets, e.g. ``{"f": (0, 1)}``."""

    features: tuple

    def __init__(self, features):
        if isinstance(features, Mapping):
            features = features.items()
        object.__setattr__(self, "features", tuple((f, tuple(zs)) for f, zs in features))
        for f, zs in self.features:
            if not zs:
                raise TermModalError(f"feature {f} has no values")

    @property
    def names(self):
        return tuple(f for f, _ in self.features)

    def values(self, feature):
        return dict(self.features)[feature]

    def props(self):
        return [feature_prop(f, z) for f, zs in self.features for z in zs]


@dataclass(frozen=True, eq=False)
class KdlModel:
    """A hybrid network model whose valuation comes from functional features.

    ``values[w][a][f]`` is the value of feature ``f`` for agent ``a`` at
    world ``w``.
    """

    agents: tuple
    worlds: tuple
    networks: Mapping
    partitions: Mapping
    nominals: Mapping
    features: FeatureSpace
    values: Mapping

    @cached_property
    def hybrid(self) -> HybridModel:
        val = {p: set() for p in self.features.props()}
        for w in self.worlds:
            for a in self.agents:
                for f in self.features.names:
                    val[feature_prop(f, self.values[w][a][f])].add((w, a))
        return HybridModel(self.agents, self.worlds, self.networks, self.partitions,
                           self.nominals, val)

    @property
    def valuation(self):
        return self.hybrid.valuation

    def cell(self, agent, world):
        return self.hybrid.cell(agent, world)

    def replace(self, **changes) -> "KdlModel":
        fields = dict(agents=self.agents, worlds=self.worlds, networks=self.networks,
                      partitions=self.partitions, nominals=self.nominals,
                      features=self.features, values=self.values)
        fields.update(changes)
        return KdlModel(**fields)


def validate_kdl(km: KdlModel) -> list:
    """Diagnostics for a feature model, including the network axioms a
    knowledge-diffusion model must satisfy (irreflexive, symmetric,
    neighbors known)."""
    from .hybrid import validate_hybrid

    diags = []
    try:
        diags.extend(validate_hybrid(km.hybrid))
    except KeyError as exc:
        diags.append(f"missing feature value {exc}")
    for w in km.worlds:
        for a in km.agents:
            row = km.values.get(w, {}).get(a)
            if row is None:
                diags.append(f"no feature values for ({w},{a})")
                continue
            for f, zs in km.features.features:
                if f not in row:
                    diags.append(f"feature {f} has no value at ({w},{a})")
                elif row[f] not in zs:
                    diags.append(f"feature {f} has illegal value {row[f]!r} at ({w},{a})")
    if diags:
        return diags
    hm = km.hybrid
    for w in km.worlds:
        net = hm.networks.get(w, frozenset())
        for a, b in sorted(net):
            if a == b:
                diags.append(f"network at {w} is reflexive at {a}")
            if (b, a) not in net:
                diags.append(f"network at {w} is not symmetric: ({a},{b}) without ({b},{a})")
    for a in km.agents:
        for w in km.worlds:
            mine = set(hm.neighbors(w, a))
            for v in hm.cell(a, w):
                if set(hm.neighbors(v, a)) != mine:
                    diags.append(f"agent {a} does not know its neighbors: they differ between {w} and {v}")
    return list(dict.fromkeys(diags))


# ---------------------------------------------------------------------------
# Updates and the dynamic language
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DynamicTransformation:
    """Feature-changing update ``(Phi, post)``.

    ``post[k]`` maps features to the value set at points satisfying
    ``phi[k]``; unmentioned features are left alone (``STAR``).
    """

    phi: tuple
    post: tuple
    name: str = "d"

    def __init__(self, phi, post, name="d"):
        phi = tuple(phi)
        post = tuple(tuple(sorted((f, z) for f, z in dict(p).items() if z != STAR)) for p in post)
        if not phi:
            raise TermModalError("a dynamic transformation needs at least one formula")
        if len(post) != len(phi):
            raise TermModalError("post must give one feature map per formula")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "post", post)
        object.__setattr__(self, "name", name)

    def value(self, k, feature):
        return dict(self.post[k]).get(feature, STAR)


@dataclass(frozen=True)
class LearningUpdate:
    formulas: tuple
    name: str = "l"

    def __init__(self, formulas, name="l"):
        object.__setattr__(self, "formulas", tuple(formulas))
        object.__setattr__(self, "name", name)


@dataclass(frozen=True)
class Transform(HybridFormula):
    update: DynamicTransformation
    body: HybridFormula


@dataclass(frozen=True)
class Learn(HybridFormula):
    update: LearningUpdate
    body: HybridFormula


def dynamic(update, body):
    """``[update] body`` for either kind of update."""
    if isinstance(update, DynamicTransformation):
        return Transform(update, body)
    if isinstance(update, LearningUpdate):
        return Learn(update, body)
    raise TypeError(f"not an update: {update!r}")


class KdlChecker(HybridChecker):
    """Direct semantics of the dynamic language: ``[u]phi`` holds at
    ``(w, a)`` iff ``phi`` holds at ``(w, a)`` after applying ``u``."""

    def __init__(self, km: KdlModel):
        super().__init__(km.hybrid)
        self.kdl = km
        self._after = {}

    def after(self, update) -> "KdlChecker":
        nxt = self._after.get(update)
        if nxt is None:
            if isinstance(update, DynamicTransformation):
                km = apply_transformation(self.kdl, update, checker=self)
            else:
                km = apply_learning(self.kdl, update, checker=self)
            nxt = self._after[update] = KdlChecker(km)
        return nxt

    def holds_extra(self, w, a, phi):
        if isinstance(phi, (Transform, Learn)):
            return self.after(phi.update).holds(w, a, phi.body)
        return super().holds_extra(w, a, phi)


def kdl_satisfies(km: KdlModel, w, a, phi) -> bool:
    return KdlChecker(km).holds(w, a, phi)


def apply_transformation(km: KdlModel, d: DynamicTransformation, checker=None) -> KdlModel:
    """Set feature values wherever a member of ``d.phi`` holds."""
    checker = checker or KdlChecker(km)
    values = {}
    for w in km.worlds:
        values[w] = {}
        for a in km.agents:
            true = [k for k, f in enumerate(d.phi) if checker.holds(w, a, f)]
            if len(true) > 1:
                raise InconsistencyError(
                    f"Phi not pairwise inconsistent here: members {true} all hold at ({w},{a})"
                )
            row = dict(km.values[w][a])
            if true:
                for f in km.features.names:
                    z = d.value(true[0], f)
                    if z != STAR:
                        row[f] = z
            values[w][a] = row
    return km.replace(values=values)


def apply_learning(km: KdlModel, ell: LearningUpdate, checker=None) -> KdlModel:
    """Cut the links of agents whose neighbors differ on some formula of ``ell``."""
    checker = checker or KdlChecker(km)
    hm = km.hybrid
    profile = {
        (w, b): tuple(checker.holds(w, b, f) for f in ell.formulas)
        for w in km.worlds for b in km.agents
    }
    partitions = {}
    for a in km.agents:
        pairs = set()
        for w in km.worlds:
            nbrs = hm.neighbors(w, a)
            for v in hm.cell(a, w):
                if all(profile[(w, b)] == profile[(v, b)] for b in nbrs):
                    pairs.add((w, v))
        blocks = partition_from_relation(km.worlds, pairs)
        if blocks is None:
            raise TermModalError(
                f"learning update leaves agent {a} with a non-equivalence; "
                "the model's network is not known to its agents"
            )
        partitions[a] = blocks
    return km.replace(partitions=partitions)


# ---------------------------------------------------------------------------
# Compilation into action models
# ---------------------------------------------------------------------------

class DynamicTranslator(Translator):
    """Translation extended with the clauses for ``[d]`` and ``[l]``.

    Compiled action models are collected in ``registry`` under unique names
    so the translated formulas can be evaluated with
    :class:`~termmodal.semantics.Evaluator`.
    """

    def __init__(self, features: FeatureSpace, constants, registry=None, cap=None):
        self.features = features
        self.constants = tuple(constants)
        self.registry = {} if registry is None else registry
        self.cap = event_cap() if cap is None else cap
        self._compiled = {}

    def _register(self, base, action_factory):
        name = base
        k = 1
        while name in self.registry:
            k += 1
            name = f"{base}_{k}"
        action = action_factory(name)
        self.registry[name] = action
        return action

    def ground(self, phi):
        """``T_x(phi)`` with ``x`` replaced by each constant, in constant order."""
        t = self.tx(phi, "x")
        return [substitute(t, "x", Const(c)) for c in self.constants]

    def compile_transformation(self, d: DynamicTransformation) -> PointedAction:
        hit = self._compiled.get(d)
        if hit is not None:
            return hit
        event = f"e_{d.name}"
        post = {}
        for c in self.constants:
            for f, zs in self.features.features:
                setters = [d.phi[k] for k in range(len(d.phi)) if d.value(k, f) != STAR]
                for z in zs:
                    to_z = [d.phi[k] for k in range(len(d.phi)) if d.value(k, f) == z]
                    prop = Prop(feature_prop(f, z))
                    rhs = h_or(h_disj(to_z), HAnd(HNot(h_disj(setters)), prop))
                    atom = Pred(prop.name, Const(c))
                    post[atom] = substitute(self.tx(rhs, "x"), "x", Const(c))
        action = self._register(
            f"Delta_{d.name}",
            lambda name: ActionModel(name, (event,), pre={event: TOP}, post={event: post},
                                     edges={(event, event): TOP}),
        )
        pa = self._compiled[d] = PointedAction(action, event)
        return pa

    def compile_learning(self, ell: LearningUpdate) -> ActionModel:
        hit = self._compiled.get(ell)
        if hit is not None:
            return hit
        atoms = []          # distinct grounded formulas, in first-seen order
        owners = []         # owners[k]: constants whose grounding produced atoms[k]
        index = {}
        for phi in ell.formulas:
            for c, g in zip(self.constants, self.ground(phi)):
                k = index.get(g)
                if k is None:
                    k = index[g] = len(atoms)
                    atoms.append(g)
                    owners.append([])
                owners[k].append(c)
        n = len(atoms)
        if 2 ** n > self.cap:
            raise ValuationBlowup(n, self.cap)
        vals = list(itertools.product((1, 0), repeat=n))
        names = ["v" + "".join(map(str, v)) if n else "v" for v in vals]
        pre = {
            name: conj(a if bit else Not(a) for a, bit in zip(atoms, val))
            for name, val in zip(names, vals)
        }
        edges = {}
        for name, val in zip(names, vals):
            for name2, val2 in zip(names, vals):
                if name == name2:
                    edges[(name, name2)] = TOP
                    continue
                differ = {c for k in range(n) if val[k] != val2[k] for c in owners[k]}
                edges[(name, name2)] = conj(
                    Not(Net(XSTAR, Const(c))) for c in self.constants if c in differ
                )
        action = self._register(
            f"Delta_{ell.name}",
            lambda name: ActionModel(name, tuple(names), pre=pre, edges=edges),
        )
        self._compiled[ell] = action
        return action

    def tx_extra(self, phi, p):
        if isinstance(phi, Transform):
            pa = self.compile_transformation(phi.update)
            from .syntax import ActionMod

            return ActionMod(pa.action.name, pa.event, self.tx(phi.body, p))
        if isinstance(phi, Learn):
            from .syntax import ActionMod

            action = self.compile_learning(phi.update)
            body = self.tx(phi.body, p)
            return conj(
                Implies(action.precondition(e), ActionMod(action.name, e, body))
                for e in action.events
            )
        return super().tx_extra(phi, p)


def compile_transformation(d: DynamicTransformation, features: FeatureSpace, constants,
                           registry=None) -> PointedAction:
    return DynamicTranslator(features, constants, registry).compile_transformation(d)


def compile_learning(ell: LearningUpdate, features: FeatureSpace, constants, registry=None,
                     cap=None) -> ActionModel:
    return DynamicTranslator(features, constants, registry, cap).compile_learning(ell)


def translate_dynamic(phi, pivot, features: FeatureSpace, constants, registry=None):
    """Translate a dynamic formula; returns ``(formula, registry)``."""
    tr = DynamicTranslator(features, constants, registry)
    return tr.translate(phi, pivot), tr.registry


# ---------------------------------------------------------------------------
# Bounded morphisms
# ---------------------------------------------------------------------------

@dataclass
class MorphismViolation:
    condition: str
    detail: str

    def __str__(self):
        return f"{self.condition}: {self.detail}"


def bounded_morphism_check(m1: Model, m2: Model, b: Mapping) -> list:
    """Check that world map ``b`` from ``m1`` to ``m2`` is a bounded morphism.

    Condition ``atoms`` requires identical constant denotations, predicate
    extensions and networks at ``w`` and ``b[w]``; ``forth`` and ``back``
    are the usual zig-zag conditions for every agent's relation.
    """
    out = []
    if tuple(m1.agents) != tuple(m2.agents):
        out.append(MorphismViolation("domain", f"agent sets differ: {m1.agents} vs {m2.agents}"))
        return out
    w2 = set(m2.worlds)
    for w in m1.worlds:
        if w not in b:
            out.append(MorphismViolation("total", f"{w} is unmapped"))
        elif b[w] not in w2:
            out.append(MorphismViolation("total", f"{w} maps to unknown world {b[w]}"))
    if out:
        return out
    for w in m1.worlds:
        u = b[w]
        if m1.constants.get(w, {}) != m2.constants.get(u, {}):
            out.append(MorphismViolation("atoms", f"constant denotations differ at {w} / {u}"))
        preds = set(m1.predicates.get(w, {})) | set(m2.predicates.get(u, {}))
        for p in sorted(preds):
            if m1.extension_of(p, w) != m2.extension_of(p, u):
                out.append(MorphismViolation("atoms", f"extension of {p} differs at {w} / {u}"))
        if m1.network.get(w, frozenset()) != m2.network.get(u, frozenset()):
            out.append(MorphismViolation("atoms", f"network differs at {w} / {u}"))
    for a in m1.agents:
        for w in m1.worlds:
            for v in sorted(m1.cell(a, w)):
                if b[v] not in m2.cell(a, b[w]):
                    out.append(MorphismViolation("forth", f"{w} ~{a} {v} but not {b[w]} ~{a} {b[v]}"))
            images = {b[v] for v in m1.cell(a, w)}
            for u in sorted(m2.cell(a, b[w])):
                if u not in images:
                    out.append(MorphismViolation("back", f"{b[w]} ~{a} {u} has no preimage from {w}"))
    return out


def canonical_map(source: Model, updated: Model) -> dict:
    """Map each world ``w`` of ``source`` to the unique ``(w, e)`` surviving
    in ``updated`` (the map used in the embedding proofs)."""
    by_world = {}
    for name, (w, e) in updated.origin.items():
        by_world.setdefault(w, []).append(name)
    out = {}
    for w in source.worlds:
        hits = by_world.get(w, [])
        if len(hits) != 1:
            raise TermModalError(f"world {w} has {len(hits)} successors, expected exactly one")
        out[w] = hits[0]
    return out


# ---------------------------------------------------------------------------
# Static characterization
# ---------------------------------------------------------------------------

def default_constant_names(n):
    return tuple(f"a{i}_" for i in range(1, n + 1))


def generate_Fn(n: int, constants=None) -> list:
    """The four static axioms as ``(name, formula)`` pairs."""
    if n < 1:
        raise TermModalError("F_n needs n >= 1")
    cs = tuple(constants) if constants is not None else default_constant_names(n)
    if len(cs) != n:
        raise TermModalError(f"F_{n} needs exactly {n} constants, got {len(cs)}")
    xs = [f"x{i}" for i in range(1, n + 1)]
    parts = [Not(Eq(Var(xs[i]), Var(xs[j]))) for i in range(n) for j in range(n) if i != j]
    from .syntax import disj

    parts.append(Forall("y", disj(Eq(Var("y"), Var(x)) for x in xs)))
    parts += [Not(Eq(Const(cs[i]), Const(cs[j]))) for i in range(n) for j in range(n) if i != j]
    parts += [Eq(Var(xs[i]), Const(cs[i])) for i in range(n)]
    named = exists_many(xs, conj(parts))
    rig = conj(
        Forall("x", Implies(Eq(Const(c), Var("x")),
                            Forall("y", Know(Var("y"), Eq(Const(c), Var("x"))))))
        for c in cs
    )
    x, y = Var("x"), Var("y")
    from .syntax import Iff

    neigh = Forall("x", Forall("y", And(Not(Net(x, x)), Iff(Net(x, y), Net(y, x)))))
    know_neigh = Forall("x", Forall("y", Iff(Net(x, y), Know(x, Net(x, y)))))
    return [("Named", named), ("Rig", rig), ("Neigh", neigh), ("KnowNeigh", know_neigh)]


def check_characterization(m: Model, n: int | None = None) -> list:
    """Model-check every axiom at every world; returns failing ``(world, axiom)`` pairs."""
    cs = m.signature.constants
    n = len(cs) if n is None else n
    axioms = generate_Fn(n, cs)
    ev = Evaluator()
    return [(w, name) for name, ax in axioms for w in m.worlds if not ev.holds(m, w, {}, ax)]


def kdl_image(km: KdlModel, constants=None) -> Model:
    return tml_image(km.hybrid, constants)
