"""Scenario scripts: a starting model, named action models and a list of
steps that update the current pointed model and assert facts about it.

Step kinds (one key each)::

    update:       {action: NAME, event: E}
    check:        {formula: F, world: W, expect: true|false}
    worlds:       N  or  [w1, w2, ...]
    network:      {world: W, equals: [[a, b], ...]}
    linked:       {agent: A, worlds: [w, v], expect: true|false}
    expect_error: {update: {...}} or {check: {...}}, optional world: W

``world`` defaults to the current actual world.  ``expect_error`` with
``world`` runs its step as if ``W`` were actual, without changing state.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import TermModalError
from .fileio import _read, load_action, load_model
from .parsing import parse_formula
from .semantics import Evaluator, PointedModel
from .update import PointedAction, product_update_pointed


@dataclass
class Transcript:
    lines: list = field(default_factory=list)
    failures: int = 0

    def ok(self, msg):
        self.lines.append(f"ok    {msg}")

    def fail(self, msg):
        self.failures += 1
        self.lines.append(f"FAIL  {msg}")

    def __str__(self):
        return "\n".join(self.lines)


class StepError(TermModalError):
    pass


class Scenario:
    def __init__(self, pm: PointedModel, actions: dict, steps: list, name="scenario"):
        self.start = pm
        self.actions = actions
        self.steps = steps
        self.name = name

    @classmethod
    def load(cls, path) -> "Scenario":
        data, source = _read(path)
        base = Path(source).parent if source != "<data>" else Path(".")
        steps = data.get("steps") or []
        if not data.get("model"):
            if steps:
                raise StepError(f"{source}: scenario has steps but no model")
            return cls(None, {}, [], Path(source).stem)
        pm = load_model(base / str(data["model"]))
        actions = {}
        for name, file in (data.get("actions") or {}).items():
            d = load_action(base / str(file), pm.model.signature)
            actions[str(name)] = d
        return cls(pm, actions, list(steps), Path(source).stem)

    def run(self) -> Transcript:
        tr = Transcript()
        pm = self.start
        for k, step in enumerate(self.steps, 1):
            if not isinstance(step, dict) or len(step) != 1:
                raise StepError(f"step {k}: expected a single-key mapping, got {step!r}")
            kind = next(iter(step))
            handler = getattr(self, f"_step_{kind}", None)
            if handler is None:
                raise StepError(f"step {k}: unknown step kind {kind!r}")
            pm = handler(pm, step[kind], tr, step) or pm
        return tr

    # -- steps -----------------------------------------------------------

    def _pointed(self, pm, world):
        return pm if world is None else PointedModel(pm.model, str(world))

    def _step_update(self, pm, spec, tr, _step):
        d = self._action(spec["action"])
        pa = PointedAction(d, str(spec["event"]))
        new = product_update_pointed(pm, pa, actions=self.actions)
        tr.ok(f"update [{d.name}:{pa.event}] at {pm.actual} -> {new.actual}; "
              f"{len(new.model.worlds)} worlds")
        return new

    def _step_check(self, pm, spec, tr, _step):
        world = str(spec.get("world", pm.actual))
        if world not in pm.model.worlds:
            raise StepError(f"unknown world {world!r}")
        phi = parse_formula(str(spec["formula"]), pm.model.signature)
        got = Evaluator(self.actions).holds(pm.model, world, {}, phi)
        expect = bool(spec.get("expect", True))
        msg = f"{world} |= {spec['formula']} is {got}"
        (tr.ok if got == expect else tr.fail)(msg if got == expect else f"{msg}, expected {expect}")

    def _step_worlds(self, pm, spec, tr, _step):
        worlds = list(pm.model.worlds)
        if isinstance(spec, int):
            good = len(worlds) == spec
            msg = f"{len(worlds)} worlds"
            (tr.ok if good else tr.fail)(msg if good else f"{msg}, expected {spec}")
        else:
            want = [str(w) for w in spec]
            good = sorted(worlds) == sorted(want)
            msg = f"worlds {worlds}"
            (tr.ok if good else tr.fail)(msg if good else f"{msg}, expected {want}")

    def _step_network(self, pm, spec, tr, _step):
        world = str(spec.get("world", pm.actual))
        got = set(pm.model.network.get(world, ()))
        want = {tuple(str(x) for x in e) for e in spec.get("equals", [])}
        msg = f"network at {world} = {sorted(got)}"
        (tr.ok if got == want else tr.fail)(msg if got == want else f"{msg}, expected {sorted(want)}")

    def _step_linked(self, pm, spec, tr, _step):
        agent = str(spec["agent"])
        w, v = (str(x) for x in spec["worlds"])
        for x in (w, v):
            if x not in pm.model.worlds:
                raise StepError(f"unknown world {x!r}")
        got = pm.model.related(agent, w, v)
        expect = bool(spec.get("expect", True))
        msg = f"{w} ~{agent} {v} is {got}"
        (tr.ok if got == expect else tr.fail)(msg if got == expect else f"{msg}, expected {expect}")

    def _step_expect_error(self, pm, spec, tr, step):
        world = spec.get("world")
        inner = {k: v for k, v in spec.items() if k != "world"}
        if len(inner) != 1:
            raise StepError("expect_error needs exactly one inner step")
        kind, body = next(iter(inner.items()))
        handler = getattr(self, f"_step_{kind}", None)
        if handler is None:
            raise StepError(f"unknown step kind {kind!r}")
        scratch = Transcript()
        try:
            handler(self._pointed(pm, world), body, scratch, inner)
        except TermModalError as exc:
            tr.ok(f"expected error: {exc}")
            return None
        tr.fail(f"{kind} at {world or pm.actual} succeeded, expected an error")
        return None

    def _action(self, name):
        try:
            return self.actions[str(name)]
        except KeyError:
            raise StepError(f"unknown action model: {name!r}") from None


def run_scenario(path) -> Transcript:
    return Scenario.load(path).run()


def fixture_dir() -> Path:
    return Path(__file__).parent / "fixtures"


def fixture_scenarios() -> list:
    return sorted(fixture_dir().glob("*/*.scenario"))
