"""Acceptance criteria 1 to 10, one check each.

Run under pytest, or directly (``python3 tests/test_acceptance.py``) to print
one PASS/FAIL line per criterion.
"""
import sys
import time

import pytest

from termmodal.fileio import load_action, load_model
from termmodal.parsing import parse_formula
from termmodal.scenario import fixture_dir
from termmodal.semantics import Evaluator
from termmodal.update import PointedAction, product_update_pointed
from termmodal.verify import suite_fn, suite_prop1, suite_prop2, suite_s5

SEED = 20240601


def _holds(pm, text, world=None, actions=None):
    phi = parse_formula(text, pm.model.signature)
    return Evaluator(actions).holds(pm.model, world or pm.actual, {}, phi)


def _server():
    base = fixture_dir() / "server_error"
    pm = load_model(base / "office.model")
    sig = pm.model.signature
    acts = {n: load_action(base / f"{n}.action", sig) for n in ("log", "dedicto", "dere", "fired")}
    return pm, acts


def _step(pm, action, event):
    return product_update_pointed(pm, PointedAction(action, event))


def check_1():
    pm, _ = _server()
    assert pm.actual == "u"
    assert _holds(pm, "forall x. !K[x] exists y. M(y)")
    assert not _holds(pm, "K[a_] M(c_)")


def check_2():
    pm, acts = _server()
    after = _step(pm, acts["log"], "3")
    m = after.model
    assert sorted(m.worlds) == sorted(["w1", "v2", "u3", "v4", "u4"])
    assert after.actual == "u3"
    assert m.related("b", "w1", "v2")
    assert m.related("a", "v4", "u4")
    assert not m.related("a", "w1", "v2")
    assert _holds(after, "K[a_] M(c_)")


def _after_dedicto():
    pm, acts = _server()
    return _step(_step(pm, acts["log"], "3"), acts["dedicto"], "e"), acts


def check_3():
    pm, _ = _after_dedicto()
    assert len(pm.model.worlds) == 4 and pm.actual == "u3e"
    for text in ("forall x. K[x] exists y. M(y)",
                 "exists x. K[a_] M(x)",
                 "forall x. (exists y. N(y,x) -> <K[x]> !exists z. K[a_] M(z))"):
        assert _holds(pm, text), text


def _after_dere():
    pm, acts = _after_dedicto()
    return _step(pm, acts["dere"], "sigma"), acts


def check_4():
    pm, _ = _after_dere()
    assert len(pm.model.worlds) == 2
    assert _holds(pm, "forall x. K[x] exists y. K[a_] M(y)")
    assert _holds(pm, "forall x. ((x = b_ | x = c_) -> !exists z. K[x] M(z))")


def check_5():
    pm, acts = _after_dere()
    fired = _step(pm, acts["fired"], "dagger")
    assert set(fired.model.network[fired.actual]) == {("a", "c")}


def check_6():
    base = fixture_dir() / "thieves"
    pm = load_model(base / "heist.model")
    sig = pm.model.signature
    criminal = load_action(base / "criminal.action", sig)
    reveal = load_action(base / "reveal.action", sig)
    assert pm.actual == "w1"
    assert _holds(pm, "!exists x. K[c_](x = t_)")
    pm = _step(pm, criminal, "e")
    assert _holds(pm, "forall x. (N(t_,x) -> K[t_] N(t_,x))")
    assert _holds(pm, "K[c_] exists x. (x != t_ & x != b_ & N(t_,x))")
    assert not _holds(pm, "exists x. K[c_] (x != t_ & x != b_ & N(t_,x))")
    pm = _step(pm, reveal, "sigma")
    assert len(pm.model.worlds) == 2


def _suite_ok(rep):
    assert rep.ok, rep.render(limit=5)
    return rep


def check_7():
    rep = _suite_ok(suite_prop1(SEED, iterations=200))
    assert rep.checks > 0


def check_8():
    rep = _suite_ok(suite_prop2(SEED, iterations=100))
    assert len(rep.models) == 100
    # 100 models, two updates each, 4 random formulas per update
    assert any("800 random dynamic formulas" in n for n in rep.notes), rep.notes


def check_9():
    rep = _suite_ok(suite_fn(SEED, iterations=100))
    for note in rep.notes:
        assert not note.endswith(" 0 models"), note


def check_10():
    rep = _suite_ok(suite_s5(SEED, iterations=50))
    assert rep.checks > 0


CHECKS = {n: globals()[f"check_{n}"] for n in range(1, 11)}


@pytest.mark.parametrize("n", sorted(CHECKS))
def test_criterion(n, request):
    request.node.add_marker(pytest.mark.criterion(n))
    CHECKS[n]()


def main() -> int:
    failed = 0
    for n, fn in CHECKS.items():
        start = time.perf_counter()
        try:
            fn()
            verdict = "PASS"
        except AssertionError as exc:
            verdict = f"FAIL ({exc})" if str(exc) else "FAIL"
            failed += 1
        print(f"criterion {n:2d}: {verdict}  [{time.perf_counter() - start:.1f}s]")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
