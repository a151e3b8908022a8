"""Randomized verification suites.

Each suite returns a :class:`SuiteReport`; ``ok`` is true iff no
counterexample was found.  Reports are deterministic for a given seed.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from . import generators as gen
from .hybrid import HybridChecker, check_prop1, nominal_valuation, tml_image
from .kdl import (
    DynamicTransformation, DynamicTranslator, KdlChecker, apply_learning, apply_transformation,
    bounded_morphism_check, canonical_map, check_characterization, dynamic, kdl_image,
)
from .semantics import Evaluator, Model, validate_model
from .syntax import Const, Implies, Know, Var, Forall, Not

DEFAULT_SEED = 20240601
SUITES = ("prop1", "prop2", "fn", "s5", "figures")


@dataclass
class SuiteReport:
    suite: str
    seed: int
    checks: int = 0
    counterexamples: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    models: list = field(default_factory=list, repr=False)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def add(self, item):
        self.counterexamples.append(item)

    def render(self, limit=20) -> str:
        head = (f"suite {self.suite}: seed={self.seed} checks={self.checks} "
                f"counterexamples={len(self.counterexamples)} -> {'PASS' if self.ok else 'FAIL'}")
        lines = [head] + [f"  {n}" for n in self.notes]
        lines += [f"  counterexample: {c}" for c in self.counterexamples[:limit]]
        if len(self.counterexamples) > limit:
            lines.append(f"  ... {len(self.counterexamples) - limit} more")
        return "\n".join(lines)


# ---------------------------------------------------------------------------

def suite_prop1(seed=DEFAULT_SEED, iterations=200, formulas=5, depth=4) -> SuiteReport:
    """Hybrid satisfaction versus satisfaction of the translation on the image."""
    rng = random.Random(seed)
    rep = SuiteReport("prop1", seed)
    for it in range(iterations):
        hm = gen.random_hybrid_model(rng)
        corpus = [gen.random_hybrid_formula(rng, depth) for _ in range(formulas)]
        for d in check_prop1(hm, corpus):
            rep.add(f"model #{it}: {d}")
        rep.checks += len(corpus) * 2 * len(hm.worlds) * len(hm.agents)
    return rep


def _prop2_instance(rng, km, update, formulas, depth, rep, label):
    """Check one KDL model against one update."""
    image = kdl_image(km)
    consts = image.signature.constants
    tr = DynamicTranslator(km.features, consts)
    g0 = nominal_valuation(km.hybrid)
    direct = KdlChecker(km)
    # (a) the canonical map is a bounded morphism
    if isinstance(update, DynamicTransformation):
        after = apply_transformation(km, update)
        pa = tr.compile_transformation(update)
        action = pa.action
    else:
        after = apply_learning(km, update)
        action = tr.compile_learning(update)
    ev = Evaluator(tr.registry)
    from .update import product_update

    updated = product_update(image, action, g0, evaluator=ev)
    target = kdl_image(after)
    b = canonical_map(image, updated)
    for v in bounded_morphism_check(target, updated, b):
        rep.add(f"{label}: bounded morphism: {v}")
    rep.checks += 1
    # (b) direct semantics of [u]phi versus the compiled translation
    props = tuple(km.features.props())
    noms = tuple(km.nominals)
    from .hybrid import HKnow, HNot, Neighbor, Prop

    # fixed probes of the updated valuation and relations, then random formulas
    corpus = [body for p in props for body in (Prop(p), HKnow(Prop(p)), HKnow(HNot(Prop(p))),
                                                 Neighbor(Prop(p)))]
    corpus += [gen.random_hybrid_formula(rng, depth, props, noms, updates=(update,))
               for _ in range(formulas)]
    for body in corpus:
        phi = dynamic(update, body)
        pivot = rng.choice(("x", "y"))
        psi = tr.translate(phi, pivot)
        for w in km.worlds:
            for a in km.agents:
                g = dict(g0)
                g[pivot] = a
                lhs = direct.holds(w, a, phi)
                rhs = ev.holds(image, w, g, psi)
                rep.checks += 1
                if lhs != rhs:
                    rep.add(f"{label}: {phi} at ({w},{a}) pivot {pivot}: direct={lhs} compiled={rhs}")


def suite_prop2(seed=DEFAULT_SEED, iterations=100, formulas=4, depth=3) -> SuiteReport:
    """Direct KDL dynamics versus compiled action models on the image."""
    rng = random.Random(seed)
    # formulas come from their own stream so the model sequence depends on the seed only
    frng = random.Random(seed * 7919 + 1)
    rep = SuiteReport("prop2", seed)
    for it in range(iterations):
        km = gen.random_kdl_model(rng)
        rep.models.append(km)
        noms = tuple(km.nominals)
        d = gen.random_transformation(rng, km.features, noms, name=f"d{it}")
        ell = gen.random_learning(rng, km.features, noms, size=0 if rng.random() < 0.15 else 1, name=f"l{it}")
        _prop2_instance(frng, km, d, formulas, depth, rep, f"model #{it} d")
        _prop2_instance(frng, km, ell, formulas, depth, rep, f"model #{it} l")
    rep.notes.append(f"{iterations} models, {2 * iterations * formulas} random dynamic formulas")
    return rep


# ---------------------------------------------------------------------------
# Characterization and its mutations
# ---------------------------------------------------------------------------

def _replace(m: Model, **kw) -> Model:
    fields = dict(agents=m.agents, worlds=m.worlds, partitions=m.partitions, constants=m.constants,
                  predicates=m.predicates, network=m.network, signature=m.signature)
    fields.update(kw)
    return Model(**fields)


def mutate_asymmetric(m: Model):
    """Drop one direction of an edge (b, a) throughout b's cell, so b still
    knows its neighbors but the network is no longer symmetric."""
    for w in m.worlds:
        for (a, b) in sorted(m.network.get(w, ())):
            if a != b:
                net = {v: set(es) for v, es in m.network.items()}
                for v in m.cell(b, w):
                    net[v].discard((b, a))
                return _replace(m, network=net)
    return None


def mutate_rigidity(m: Model):
    """Swap two constants' denotations at one world of a linked pair."""
    cs = m.signature.constants
    if len(cs) < 2:
        return None
    for a in m.agents:
        for w in m.worlds:
            if len(m.cell(a, w)) > 1:
                consts = {v: dict(d) for v, d in m.constants.items()}
                c1, c2 = cs[0], cs[1]
                consts[w][c1], consts[w][c2] = consts[w][c2], consts[w][c1]
                return _replace(m, constants=consts)
    return None


def mutate_know_neigh(m: Model):
    """Toggle a symmetric edge at a single world of a non-singleton cell."""
    for a in m.agents:
        for w in m.worlds:
            if len(m.cell(a, w)) > 1:
                b = next((x for x in m.agents if x != a), None)
                if b is None:
                    return None
                net = {v: set(es) for v, es in m.network.items()}
                pair = {(a, b), (b, a)}
                net[w] = net[w] - pair if (a, b) in net[w] else net[w] | pair
                return _replace(m, network=net)
    return None


MUTATIONS = (("asymmetric N", mutate_asymmetric, "Neigh"),
             ("broken weak rigidity", mutate_rigidity, "Rig"),
             ("broken KnowNeigh", mutate_know_neigh, "KnowNeigh"))


def suite_fn(seed=DEFAULT_SEED, iterations=100, models=None, mutate=None) -> SuiteReport:
    """Every image of a valid KDL model satisfies the four static axioms, and
    each targeted mutation falsifies exactly the corresponding axiom.

    By default the models are those of the prop2 suite for the same seed.
    With ``mutate`` (a mutation name) the mutated images themselves are
    checked, so every failing axiom is reported as a counterexample.
    """
    rep = SuiteReport("fn", seed)
    if models is None:
        models = suite_prop2(seed, iterations, formulas=0).models
    if mutate is not None:
        return _fn_mutated(rep, models, mutate)
    hits = {name: 0 for name, _, _ in MUTATIONS}
    for it, km in enumerate(models):
        image = kdl_image(km)
        fails = check_characterization(image)
        rep.checks += 1
        for w, ax in fails:
            rep.add(f"model #{it}: axiom {ax} fails at {w} on a valid image")
        for name, mutate, axiom in MUTATIONS:
            mutant = mutate(image)
            if mutant is None:
                continue
            failing = {ax for _, ax in check_characterization(mutant)}
            rep.checks += 1
            hits[name] += 1
            if failing != {axiom}:
                rep.add(f"model #{it}: mutation '{name}' falsified {sorted(failing)}, expected ['{axiom}']")
    for name, count in hits.items():
        rep.notes.append(f"mutation '{name}' applied to {count} models")
        if count == 0:
            rep.add(f"mutation '{name}' never applicable")
    return rep


def _fn_mutated(rep, models, name):
    table = {n: fn for n, fn, _ in MUTATIONS}
    if name not in table:
        raise ValueError(f"unknown mutation {name!r}; choose from {sorted(table)}")
    applied = 0
    for it, km in enumerate(models):
        mutant = table[name](kdl_image(km))
        if mutant is None:
            continue
        applied += 1
        rep.checks += 1
        for w, ax in check_characterization(mutant):
            rep.add(f"model #{it} ({name}): axiom {ax} fails at {w}")
    rep.notes.append(f"mutation '{name}' applied to {applied} models")
    return rep


# ---------------------------------------------------------------------------

def s5_schemata(t, phi):
    """The T, 4 and 5 instances for agent term ``t``."""
    k = Know(t, phi)
    return [("T", Implies(k, phi)), ("4", Implies(k, Know(t, k))),
            ("5", Implies(Not(k), Know(t, Not(k))))]


def locally_rigid(m: Model, c) -> bool:
    """Whether ``c`` names the same agent throughout that agent's cells."""
    return all(m.constants[v][c] == m.constants[w][c]
               for w in m.worlds for v in m.cell(m.constants[w][c], w))


def suite_s5(seed=DEFAULT_SEED, iterations=50, models=20, depth=3) -> SuiteReport:
    """T, 4 and 5 for random closed formulas at every world of random models.

    Variables are evaluated once, so every schema is checked universally
    closed.  A non-rigid constant may change its referent inside the
    modality, which makes 4 and 5 fail legitimately; constants are checked
    against T always and against 4 and 5 only where they are locally rigid.
    """
    rng = random.Random(seed)
    rep = SuiteReport("s5", seed)
    pool = []
    while len(pool) < models:
        m = gen.random_model(rng, rigid=len(pool) % 2 == 0)
        if not validate_model(m):
            pool.append(m)
    sig = pool[0].signature
    ev = Evaluator()
    for it in range(iterations):
        phi = gen.random_formula(rng, sig, depth)
        closed = [(f"{n}[forall z]", Forall("z", f)) for n, f in s5_schemata(Var("z"), phi)]
        for k, m in enumerate(pool):
            instances = list(closed)
            for c in sig.constants:
                for n, f in s5_schemata(Const(c), phi):
                    if n == "T" or locally_rigid(m, c):
                        instances.append((f"{n}[{c}]", f))
            for w in m.worlds:
                for name, f in instances:
                    rep.checks += 1
                    if not ev.holds(m, w, {}, f):
                        rep.add(f"formula #{it} schema {name} fails on model #{k} at {w}: {phi}")
    return rep


def suite_figures(seed=DEFAULT_SEED, iterations=None) -> SuiteReport:
    """Replay every shipped figure scenario."""
    from .scenario import fixture_scenarios, run_scenario

    rep = SuiteReport("figures", seed)
    for path in fixture_scenarios():
        tr = run_scenario(path)
        rep.checks += len(tr.lines)
        rep.notes.append(f"{path.parent.name}/{path.name}: {len(tr.lines)} steps, {tr.failures} failures")
        for line in tr.lines:
            if line.startswith("FAIL"):
                rep.add(f"{path.name}: {line[6:]}")
    return rep


def run_suite(name, seed=DEFAULT_SEED, iterations=None, mutate=None) -> SuiteReport:
    fn = {"prop1": suite_prop1, "prop2": suite_prop2, "fn": suite_fn, "s5": suite_s5,
          "figures": suite_figures}[name]
    kw = {"seed": seed}
    if iterations is not None and name != "figures":
        kw["iterations"] = iterations
    if mutate is not None:
        if name != "fn":
            raise ValueError("--mutate applies to the fn suite only")
        kw["mutate"] = mutate
    return fn(**kw)
