"""Seeded random models, formulas and updates for the differential suites."""
from __future__ import annotations

import random

from . import hybrid as h
from .kdl import STAR, DynamicTransformation, FeatureSpace, KdlModel, LearningUpdate, dynamic
from .semantics import Model, close_edges
from .syntax import (
    TOP, Const, Eq, Exists, Forall, Implies, Know, Net, Not, Or, Possible, Pred, Signature,
    Var, And,
)

NOMINAL_POOL = ("i", "j", "k")


def random_partition(rng: random.Random, worlds, merge_prob=0.5):
    """A random partition of ``worlds`` built by closing random links."""
    worlds = list(worlds)
    edges = [(u, v) for k, u in enumerate(worlds) for v in worlds[k + 1:] if rng.random() < merge_prob / 2]
    return list(close_edges(worlds, edges))


def agent_names(n):
    return tuple("abcdefgh"[k] for k in range(n))


def world_names(n):
    return tuple(f"w{k}" for k in range(1, n + 1))


# ---------------------------------------------------------------------------
# Term-modal models and closed formulas
# ---------------------------------------------------------------------------

def random_model(rng: random.Random, max_agents=3, max_worlds=4, constants=("c_", "d_"),
                 predicates=("P", "Q"), rigid=False) -> Model:
    """A valid model; constants are non-rigid unless ``rigid`` is set."""
    agents = agent_names(rng.randint(1, max_agents))
    worlds = world_names(rng.randint(1, max_worlds))
    fixed = {c: rng.choice(agents) for c in constants}
    return Model(
        agents=agents,
        worlds=worlds,
        partitions={a: random_partition(rng, worlds) for a in agents},
        constants={w: dict(fixed) if rigid else {c: rng.choice(agents) for c in constants}
                   for w in worlds},
        predicates={w: {p: {a for a in agents if rng.random() < 0.5} for p in predicates} for w in worlds},
        network={w: {(a, b) for a in agents for b in agents if rng.random() < 0.3} for w in worlds},
        signature=Signature(tuple(constants), tuple(predicates)),
    )


def random_formula(rng: random.Random, sig: Signature, depth=3, bound=()) -> object:
    """A random formula whose free variables are among ``bound``."""
    terms = [Const(c) for c in sig.constants] + [Var(x) for x in bound]
    if depth <= 0 or rng.random() < 0.25:
        kind = rng.choice(["pred", "net", "eq", "top"] if terms else ["top"])
        if kind == "pred" and sig.predicates:
            return Pred(rng.choice(sig.predicates), rng.choice(terms))
        if kind == "net":
            return Net(rng.choice(terms), rng.choice(terms))
        if kind == "eq":
            return Eq(rng.choice(terms), rng.choice(terms))
        return TOP
    op = rng.choice(["not", "and", "or", "imp", "know", "poss", "forall", "exists"])
    sub = lambda: random_formula(rng, sig, depth - 1, bound)
    if op == "not":
        return Not(sub())
    if op in ("and", "or", "imp"):
        return {"and": And, "or": Or, "imp": Implies}[op](sub(), sub())
    if op in ("know", "poss") and terms:
        return (Know if op == "know" else Possible)(rng.choice(terms), sub())
    var = f"x{len(bound) + 1}"
    body = random_formula(rng, sig, depth - 1, tuple(bound) + (var,))
    return Forall(var, body) if op == "forall" else Exists(var, body)


# ---------------------------------------------------------------------------
# Hybrid models and formulas
# ---------------------------------------------------------------------------

def random_hybrid_model(rng: random.Random, max_agents=4, max_worlds=5, props=("p", "q"),
                        nominals=("i", "j")) -> h.HybridModel:
    agents = agent_names(rng.randint(1, max_agents))
    worlds = world_names(rng.randint(1, max_worlds))
    points = [(w, a) for w in worlds for a in agents]
    return h.HybridModel(
        agents=agents,
        worlds=worlds,
        networks={w: {(a, b) for a in agents for b in agents if rng.random() < 0.35} for w in worlds},
        partitions={a: random_partition(rng, worlds) for a in agents},
        nominals={i: rng.choice(agents) for i in nominals},
        valuation={p: {pt for pt in points if rng.random() < 0.5} for p in props},
    )


def random_hybrid_formula(rng: random.Random, depth=4, props=("p", "q"), nominals=("i", "j"),
                          updates=()):
    """A random formula of the full hybrid language; with ``updates`` it may
    also contain dynamic modalities for those updates."""
    if depth <= 0 or rng.random() < 0.2:
        choices = [h.Prop(p) for p in props] + [h.Nominal(i) for i in nominals] + [h.HTOP]
        return rng.choice(choices)
    ops = ["not", "and", "or", "imp", "K", "N", "U"] + (["at"] if nominals else [])
    if updates:
        ops += ["dyn", "dyn"]
    op = rng.choice(ops)
    sub = lambda: random_hybrid_formula(rng, depth - 1, props, nominals, updates)
    if op == "not":
        return h.HNot(sub())
    if op == "and":
        return h.HAnd(sub(), sub())
    if op == "or":
        return h.h_or(sub(), sub())
    if op == "imp":
        return h.h_implies(sub(), sub())
    if op == "K":
        return h.HKnow(sub())
    if op == "N":
        return h.Neighbor(sub())
    if op == "U":
        return h.Univ(sub())
    if op == "at":
        return h.At(rng.choice(nominals), sub())
    return dynamic(rng.choice(updates), sub())


# ---------------------------------------------------------------------------
# KDL models and updates
# ---------------------------------------------------------------------------

def random_kdl_model(rng: random.Random, max_agents=3, max_worlds=4, max_features=2,
                     nominals=("i", "j"), edge_prob=0.5) -> KdlModel:
    """A KDL model whose network is irreflexive, symmetric and known to
    every agent.  Each undirected edge {a, b} is drawn once per block of the
    join of a's and b's partitions, so both endpoints know it."""
    agents = agent_names(rng.randint(1, max_agents))
    worlds = world_names(rng.randint(1, max_worlds))
    partitions = {a: random_partition(rng, worlds) for a in agents}
    nets = {w: set() for w in worlds}
    for k, a in enumerate(agents):
        for b in agents[k + 1:]:
            links = [(u, v) for blocks in (partitions[a], partitions[b]) for blk in blocks
                     for u in blk for v in blk]
            for block in close_edges(worlds, links):
                if rng.random() < edge_prob:
                    for w in block:
                        nets[w] |= {(a, b), (b, a)}
    features = FeatureSpace({f"f{k}": (0, 1) for k in range(1, rng.randint(1, max_features) + 1)})
    values = {w: {a: {f: rng.choice(zs) for f, zs in features.features} for a in agents} for w in worlds}
    return KdlModel(
        agents=agents,
        worlds=worlds,
        networks={w: frozenset(es) for w, es in nets.items()},
        partitions={a: tuple(bs) for a, bs in partitions.items()},
        nominals={i: rng.choice(agents) for i in nominals},
        features=features,
        values=values,
    )


def feature_props(fs: FeatureSpace):
    return tuple(fs.props())


def random_transformation(rng: random.Random, fs: FeatureSpace, nominals=("i", "j"), size=None,
                          depth=2, name="d") -> DynamicTransformation:
    """A transformation whose formulas are made pairwise inconsistent by
    construction: the k-th is ``!psi_1 & ... & !psi_{k-1} & psi_k``."""
    size = size or rng.randint(1, 2)
    raw = [random_hybrid_formula(rng, depth, feature_props(fs), nominals) for _ in range(size)]
    phis, earlier = [], []
    for psi in raw:
        phis.append(h.h_conj([h.HNot(e) for e in earlier] + [psi]))
        earlier.append(psi)
    post = [{f: rng.choice(tuple(zs) + (STAR,)) for f, zs in fs.features} for _ in phis]
    return DynamicTransformation(phis, post, name=name)


def random_learning(rng: random.Random, fs: FeatureSpace, nominals=("i", "j"), size=1, depth=2,
                    name="l") -> LearningUpdate:
    return LearningUpdate(
        [random_hybrid_formula(rng, depth, feature_props(fs), nominals) for _ in range(size)],
        name=name,
    )
