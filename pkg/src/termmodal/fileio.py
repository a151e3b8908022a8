"""YAML file formats for models, action models, hybrid/KDL models and updates.

Every loader accepts either a path or an already-parsed mapping and raises
:class:`~termmodal.errors.ModelError` (with one diagnostic per problem) or
:class:`~termmodal.errors.ParseError` on bad input.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Mapping

import yaml

from .errors import ModelError, ParseError, TermModalError
from .parsing import format_formula, parse_formula, parse_hybrid
from .semantics import Model, PointedModel, close_edges, validate_model
from .syntax import Eq, Signature, is_ground_atom
from .update import DISTINGUISH, REFLEXIVE_EDGE, ActionModel, validate_action

log = logging.getLogger(__name__)


def _read(src):
    """Return ``(mapping, source_name)`` for a path or an already-parsed mapping."""
    if isinstance(src, Mapping):
        return dict(src), "<data>"
    path = Path(src)
    try:
        text = path.read_text()
    except OSError as exc:
        raise TermModalError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line, col = (mark.line + 1, mark.column + 1) if mark else (1, 1)
        raise ParseError(f"invalid YAML: {getattr(exc, 'problem', exc)}", line, col, str(path)) from None
    if not isinstance(data, Mapping):
        raise ParseError("expected a mapping at top level", 1, 1, str(path))
    return dict(data), str(path)


def _names(xs):
    return [str(x) for x in (xs or [])]


def _per_world(spec, worlds, what):
    """Expand a block given either per world (mapping keyed by world) or once
    for all worlds (mapping keyed by ``"*"`` or a plain list)."""
    if spec is None:
        return {w: None for w in worlds}
    if not isinstance(spec, Mapping):
        return {w: spec for w in worlds}
    keys = {str(k) for k in spec}
    if keys <= set(worlds) | {"*"}:
        base = spec.get("*")
        return {w: spec.get(w, base) for w in worlds}
    unknown = sorted(keys - set(worlds) - {"*"})
    raise ModelError([f"{what} given for unknown world(s) {unknown}"], what)


def _partitions(data, agents, worlds, source):
    parts = {}
    given = data.get("partition") or {}
    edges = data.get("edges") or {}
    for a in agents:
        if a in given or str(a) in {str(k) for k in given}:
            blocks = given.get(a, given.get(str(a)))
            parts[a] = [frozenset(_names(b)) for b in blocks]
        elif a in edges:
            pairs = [tuple(_names(e)) for e in edges[a]]
            known = set(worlds)
            bad = [p for p in pairs if len(p) != 2 or not set(p) <= known]
            if bad:
                raise ModelError([f"bad edge for agent {a}: {list(bad[0])}"], source)
            parts[a] = list(close_edges(worlds, pairs))
            log.warning("%s: epistemic edges of agent %s closed to an equivalence relation", source, a)
        elif data.get("default_partition") == "total":
            parts[a] = [frozenset(worlds)]
        else:
            parts[a] = [frozenset({w}) for w in worlds]
    return parts


def load_model(src, validate: bool = True) -> PointedModel:
    """Load a term-modal model; returns it pointed at ``actual`` (default:
    the first world)."""
    data, source = _read(src)
    agents = _names(data.get("agents"))
    worlds = _names(data.get("worlds"))
    sig_block = data.get("signature") or {}
    rigid = {str(c): str(a) for c, a in (data.get("rigid") or {}).items()}
    consts_pw = _per_world(data.get("constants"), worlds, "constants")
    preds_pw = _per_world(data.get("predicates"), worlds, "predicates")
    net_pw = _per_world(data.get("network"), worlds, "network")
    constants, predicates, network = {}, {}, {}
    for w in worlds:
        cs = dict(rigid)
        cs.update({str(c): str(a) for c, a in (consts_pw[w] or {}).items()})
        constants[w] = cs
        predicates[w] = {str(p): set(_names(ext)) for p, ext in (preds_pw[w] or {}).items()}
        network[w] = {tuple(_names(e)) for e in (net_pw[w] or [])}
        bad = [e for e in network[w] if len(e) != 2]
        if bad:
            raise ModelError([f"network edge at {w} is not a pair: {list(bad[0])}"], source)
    if sig_block:
        sig = Signature(tuple(_names(sig_block.get("constants"))), tuple(_names(sig_block.get("predicates"))))
        for w in worlds:
            for p in sig.predicates:
                predicates[w].setdefault(p, set())
    else:
        sig = None
    m = Model(
        agents=agents,
        worlds=worlds,
        partitions=_partitions(data, agents, worlds, source),
        constants=constants,
        predicates=predicates,
        network=network,
        signature=sig,
    )
    if validate:
        diags = validate_model(m)
        if diags:
            raise ModelError(diags, f"model {source}")
    actual = str(data.get("actual", worlds[0] if worlds else ""))
    if actual not in m.worlds:
        raise ModelError([f"actual world {actual} is not a world"], f"model {source}")
    return PointedModel(m, actual)


def _formula(text, source, what):
    try:
        return parse_formula(str(text), source=f"{source} ({what})")
    except ParseError:
        raise


def load_action(src, sig: Signature | None = None) -> ActionModel:
    """Load an action model.  ``sig`` (typically the model's signature) is
    used to report undeclared symbols."""
    data, source = _read(src)
    events = _names(data.get("events"))
    name = str(data.get("name") or Path(source).stem)
    pre = {str(e): _formula(f, source, f"pre of {e}") for e, f in (data.get("pre") or {}).items()}
    post = {}
    for e, table in (data.get("post") or {}).items():
        entries = {}
        for atom_text, f in (table or {}).items():
            atom = _formula(atom_text, source, f"post key of {e}")
            if not is_ground_atom(atom) or isinstance(atom, Eq):
                raise ModelError([f"postcondition key {atom_text!r} of event {e} must be a ground P(c) or N(c,d) atom"],
                                 f"action {source}")
            entries[atom] = _formula(f, source, f"post of {e}")
        post[str(e)] = entries
    edges = {}
    for entry in data.get("edges") or []:
        if not isinstance(entry, (list, tuple)) or len(entry) != 3:
            raise ModelError([f"edge entry {entry!r} must be [event, event, condition]"], f"action {source}")
        e, f, q = entry
        edges[(str(e), str(f))] = _formula(q, source, f"edge {e},{f}")
    default = data.get("edge_default")
    d = ActionModel(
        name=name,
        events=events,
        pre=pre,
        post=post,
        edges=edges,
        default_edge=DISTINGUISH if default is None else _formula(default, source, "edge_default"),
    )
    diags = validate_action(d, sig)
    if diags:
        raise ModelError(diags, f"action {source}")
    return d


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------

def model_to_data(m: Model, actual=None) -> dict:
    out = {
        "signature": {"constants": list(m.signature.constants), "predicates": list(m.signature.predicates)},
        "agents": list(m.agents),
        "worlds": list(m.worlds),
    }
    if actual is not None:
        out["actual"] = actual
    order = {w: k for k, w in enumerate(m.worlds)}
    out["partition"] = {
        a: [sorted(b, key=order.get) for b in m.partitions.get(a, ())] for a in m.agents
    }
    out["constants"] = {w: dict(m.constants.get(w, {})) for w in m.worlds}
    agent_order = {a: k for k, a in enumerate(m.agents)}
    out["predicates"] = {
        w: {p: sorted(ext, key=agent_order.get) for p, ext in m.predicates.get(w, {}).items()}
        for w in m.worlds
    }
    out["network"] = {
        w: [list(e) for e in sorted(m.network.get(w, ()), key=lambda e: (agent_order.get(e[0]), agent_order.get(e[1])))]
        for w in m.worlds
    }
    return out


def dump_model(m: Model, actual=None) -> str:
    return yaml.safe_dump(model_to_data(m, actual), sort_keys=False, default_flow_style=None)


def action_to_data(d: ActionModel) -> dict:
    out = {"name": d.name, "events": list(d.events)}
    out["pre"] = {e: format_formula(d.precondition(e)) for e in d.events}
    posts = {e: {format_formula(a): format_formula(f) for a, f in d.postcondition(e).items()}
             for e in d.events if d.postcondition(e)}
    if posts:
        out["post"] = posts
    out["edge_default"] = format_formula(d.default_edge)
    edges = []
    for e in d.events:
        for f in d.events:
            q = d.edge(e, f)
            default = REFLEXIVE_EDGE if e == f else d.default_edge
            if q != default:
                edges.append([e, f, format_formula(q)])
    if edges:
        out["edges"] = edges
    return out


def dump_action(d: ActionModel) -> str:
    return yaml.safe_dump(action_to_data(d), sort_keys=False, default_flow_style=None)


# ---------------------------------------------------------------------------
# Hybrid and KDL models and updates
# ---------------------------------------------------------------------------

def _points(xs):
    return {tuple(_names(p)) for p in (xs or [])}


def load_hybrid(src):
    from .hybrid import HybridModel, validate_hybrid

    data, source = _read(src)
    agents, worlds = _names(data.get("agents")), _names(data.get("worlds"))
    net_pw = _per_world(data.get("network"), worlds, "network")
    hm = HybridModel(
        agents=agents,
        worlds=worlds,
        networks={w: _points(net_pw[w]) for w in worlds},
        partitions=_partitions(data, agents, worlds, source),
        nominals={str(i): str(a) for i, a in (data.get("nominals") or {}).items()},
        valuation={str(p): _points(xs) for p, xs in (data.get("valuation") or {}).items()},
    )
    diags = validate_hybrid(hm)
    if diags:
        raise ModelError(diags, f"hybrid model {source}")
    return hm


def load_kdl(src):
    """Load a KDL model: a hybrid model whose valuation is given by feature values."""
    from .kdl import FeatureSpace, KdlModel, validate_kdl

    data, source = _read(src)
    agents, worlds = _names(data.get("agents")), _names(data.get("worlds"))
    features = FeatureSpace({str(f): tuple(_names(zs)) for f, zs in (data.get("features") or {}).items()})
    net_pw = _per_world(data.get("network"), worlds, "network")
    vals_pw = _per_world(data.get("values"), worlds, "values")
    values = {}
    for w in worlds:
        table = vals_pw[w] or {}
        values[w] = {str(a): {str(f): str(z) for f, z in (row or {}).items()} for a, row in table.items()}
    km = KdlModel(
        agents=tuple(agents),
        worlds=tuple(worlds),
        networks={w: frozenset(_points(net_pw[w])) for w in worlds},
        partitions={a: tuple(bs) for a, bs in _partitions(data, agents, worlds, source).items()},
        nominals={str(i): str(a) for i, a in (data.get("nominals") or {}).items()},
        features=features,
        values=values,
    )
    diags = validate_kdl(km)
    if diags:
        raise ModelError(diags, f"KDL model {source}")
    return km


def load_update(src, nominals=None, known=None):
    """Load a dynamic transformation or learning update.

    ``known`` maps names of previously loaded updates, so formulas in this
    file may mention them as ``[name]``.
    """
    from .kdl import DynamicTransformation, LearningUpdate

    data, source = _read(src)
    kind = str(data.get("kind", "")).lower()
    name = str(data.get("name") or Path(source).stem)

    def hf(text, what):
        return parse_hybrid(str(text), nominals=nominals, updates=known, source=f"{source} ({what})")

    if kind in ("transformation", "d"):
        phis = data.get("phi") or []
        posts = data.get("post") or []
        if len(phis) != len(posts):
            raise ModelError(["phi and post must have the same length"], f"update {source}")
        return DynamicTransformation(
            [hf(p, f"phi[{k}]") for k, p in enumerate(phis)],
            [{str(f): str(z) for f, z in (row or {}).items()} for row in posts],
            name=name,
        )
    if kind in ("learning", "l"):
        return LearningUpdate([hf(p, f"formulas[{k}]") for k, p in enumerate(data.get("formulas") or [])], name=name)
    raise ModelError([f"unknown update kind {kind!r}; expected 'transformation' or 'learning'"], f"update {source}")


def update_features(src):
    """The optional ``features`` block of an update file."""
    from .kdl import FeatureSpace

    data, _ = _read(src)
    block = data.get("features")
    return None if block is None else FeatureSpace({str(f): tuple(_names(zs)) for f, zs in block.items()})
