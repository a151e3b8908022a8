"""Command-line interface: ``termmodal check|update|translate|verify|run``.

Exit codes: 0 success (everything satisfied), 1 a negative verdict
(falsified formula, inapplicable update, counterexample found), 2 error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import TermModalError
from .fileio import dump_model, load_action, load_kdl, load_model, load_update, update_features
from .parsing import format_formula, parse_formula, parse_hybrid
from .semantics import Evaluator, Model, PointedModel
from .update import PointedAction, identity_action, product_update, product_update_pointed

log = logging.getLogger("termmodal")

OK, NEGATIVE, ERROR = 0, 1, 2


def _split_names(text):
    return tuple(s.strip() for s in text.split(",") if s.strip()) if text else ()


def _named_files(specs, what):
    out = {}
    for spec in specs or ():
        name, sep, path = spec.partition("=")
        if not sep or not name or not path:
            raise TermModalError(f"--{what} expects NAME=FILE, got {spec!r}")
        out[name] = path
    return out


# ---------------------------------------------------------------------------
# check
# ---------------------------------------------------------------------------

def _formula_texts(args):
    texts = [(f, "<formula>") for f in args.formula or ()]
    for path in args.formula_file or ():
        for k, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if line:
                texts.append((line, f"{path}:{k}"))
    if not texts:
        raise TermModalError("no formulas given (use --formula or --formula-file)")
    return texts


def cmd_check(args, out) -> int:
    pm = load_model(args.model)
    sig = pm.model.signature
    actions = {}
    for name, path in _named_files(args.action, "action").items():
        d = load_action(path, sig)
        actions[name] = d
        if d.name != name:
            actions.setdefault(d.name, d)
    world = args.world or pm.actual
    if world not in pm.model.worlds:
        raise TermModalError(f"unknown world {world!r}")
    ev = Evaluator(actions, strict=args.strict_dynamic)
    code = OK
    for text, source in _formula_texts(args):
        phi = parse_formula(text, sig, source=source)
        verdict = ev.holds(pm.model, world, {}, phi)
        print(f"{'true ' if verdict else 'false'}  {world} |= {format_formula(phi)}", file=out)
        if not verdict:
            code = NEGATIVE
    return code


# ---------------------------------------------------------------------------
# update
# ---------------------------------------------------------------------------

def isomorphic_via_origin(before: Model, after: Model) -> list:
    """Differences between ``before`` and ``after`` under the map that sends
    each updated world to its origin; empty iff that map is an isomorphism."""
    back = {name: w for name, (w, _e) in after.origin.items()}
    diffs = []
    if sorted(back.values()) != sorted(before.worlds) or len(back) != len(after.worlds):
        diffs.append("world sets differ")
        return diffs
    for v, w in back.items():
        if after.constants[v] != before.constants[w]:
            diffs.append(f"constants differ at {v}")
        if {p: set(x) for p, x in after.predicates[v].items()} != \
                {p: set(x) for p, x in before.predicates[w].items()}:
            diffs.append(f"predicates differ at {v}")
        if set(after.network.get(v, ())) != set(before.network.get(w, ())):
            diffs.append(f"network differs at {v}")
    for a in before.agents:
        mapped = {frozenset(back[v] for v in block) for block in after.partitions[a]}
        if mapped != {frozenset(b) for b in before.partitions[a]}:
            diffs.append(f"partition of {a} differs")
    return diffs


def cmd_update(args, out) -> int:
    pm = load_model(args.model)
    if args.world:
        if args.world not in pm.model.worlds:
            raise TermModalError(f"unknown world {args.world!r}")
        pm = PointedModel(pm.model, args.world)
    if args.self_test:
        ident = identity_action()
        diffs = isomorphic_via_origin(pm.model, product_update(pm.model, ident))
        for d in diffs:
            print(f"self-test: {d}", file=out)
        print(f"self-test: identity update {'is' if not diffs else 'is NOT'} isomorphic", file=out)
        if diffs:
            return NEGATIVE
    if args.action is None:
        if args.self_test:
            return OK
        raise TermModalError("update needs an action model file")
    if args.event is None:
        raise TermModalError("--event is required")
    d = load_action(args.action, pm.model.signature)
    event = str(args.event)
    if event not in d.events:
        raise TermModalError(f"action {d.name!r} has no event {event!r}")
    ev = Evaluator({d.name: d})
    pre = d.precondition(event)
    if not ev.holds(pm.model, pm.actual, {}, pre):
        print(f"not applicable: precondition of event {event} fails at {pm.actual}: "
              f"{format_formula(pre)}", file=out)
        return NEGATIVE
    new = product_update_pointed(pm, PointedAction(d, event), actions={d.name: d})
    text = dump_model(new.model, new.actual)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.out}: {len(new.model.worlds)} worlds, actual {new.actual}", file=out)
    else:
        out.write(text)
    return OK


# ---------------------------------------------------------------------------
# translate
# ---------------------------------------------------------------------------

def cmd_translate(args, out) -> int:
    from .hybrid import Translator, default_constants
    from .kdl import DynamicTranslator, FeatureSpace

    nominals = set(_split_names(args.nominals))
    if args.hybrid_formula is not None:
        phi = parse_hybrid(args.hybrid_formula, nominals=nominals)
        print(format_formula(Translator().translate(phi, args.pivot)), file=out)
        return OK

    km = load_kdl(args.kdl_model) if args.kdl_model else None
    if km is not None:
        nominals |= set(km.nominals)
    known = {}
    features = km.features if km is not None else None
    for path in args.update or ():
        u = load_update(path, nominals=nominals, known=known)
        known[u.name] = u
        if features is None:
            features = update_features(path)
    if args.constants:
        constants = _split_names(args.constants)
    elif km is not None:
        constants = default_constants(km.agents)
    else:
        constants = ()
    phi = parse_hybrid(args.kdl_formula, nominals=nominals, updates=known)
    if known and (features is None or not constants):
        raise TermModalError("dynamic formulas need features (--kdl-model or a features block "
                             "in an update file) and constants (--constants or --kdl-model)")
    tr = DynamicTranslator(features or FeatureSpace({}), constants)
    psi = tr.translate(phi, args.pivot)
    print(format_formula(psi), file=out)
    if args.show_actions:
        from .fileio import dump_action

        for name, d in tr.registry.items():
            print(f"--- # action model {name}", file=out)
            out.write(dump_action(d))
    return OK


# ---------------------------------------------------------------------------
# verify / run
# ---------------------------------------------------------------------------

def cmd_verify(args, out) -> int:
    from .verify import run_suite

    try:
        rep = run_suite(args.suite, seed=args.seed, iterations=args.iterations, mutate=args.mutate)
    except ValueError as exc:
        raise TermModalError(str(exc)) from None
    print(rep.render(limit=args.limit), file=out)
    return OK if rep.ok else NEGATIVE


def cmd_run(args, out) -> int:
    from .scenario import run_scenario

    tr = run_scenario(args.scenario)
    if tr.lines:
        print(str(tr), file=out)
    return OK if tr.failures == 0 else NEGATIVE


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    from .verify import DEFAULT_SEED, MUTATIONS, SUITES

    p = argparse.ArgumentParser(prog="termmodal", description="Term-modal logic model checker.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="evaluate formulas at a world of a model")
    c.add_argument("model")
    c.add_argument("--world", help="defaults to the model's actual world")
    c.add_argument("--formula", action="append")
    c.add_argument("--formula-file", action="append")
    c.add_argument("--action", action="append", metavar="NAME=FILE",
                   help="action model available to [NAME:e] modalities")
    c.add_argument("--strict-dynamic", action="store_true",
                   help="error instead of vacuous truth when a precondition fails")
    c.set_defaults(func=cmd_check)

    u = sub.add_parser("update", help="pointed product update")
    u.add_argument("model")
    u.add_argument("action", nargs="?")
    u.add_argument("--event")
    u.add_argument("--world", help="actual world (defaults to the model's)")
    u.add_argument("--out", help="write the updated model here instead of stdout")
    u.add_argument("--self-test", action="store_true",
                   help="check that the identity update yields an isomorphic model")
    u.set_defaults(func=cmd_update)

    t = sub.add_parser("translate", help="translate a hybrid or KDL formula")
    g = t.add_mutually_exclusive_group(required=True)
    g.add_argument("--hybrid-formula")
    g.add_argument("--kdl-formula")
    t.add_argument("--pivot", choices=("x", "y"), default="x")
    t.add_argument("--nominals", help="comma-separated agent nominals")
    t.add_argument("--update", action="append", help="transformation or learning update file")
    t.add_argument("--kdl-model", help="supplies features, nominals and constants")
    t.add_argument("--constants", help="comma-separated constants, one per agent")
    t.add_argument("--show-actions", action="store_true", help="also print compiled action models")
    t.set_defaults(func=cmd_translate)

    v = sub.add_parser("verify", help="run a randomized verification suite")
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--iterations", type=int)
    v.add_argument("--mutate", choices=[n for n, _, _ in MUTATIONS],
                   help="fn suite: check mutated images instead of valid ones")
    v.add_argument("--limit", type=int, default=20, help="counterexamples to print")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("run", help="run a scenario script")
    r.add_argument("scenario")
    r.set_defaults(func=cmd_run)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return ERROR if exc.code else OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args, out)
    except (TermModalError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
