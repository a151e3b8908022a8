import random

import pytest

from termmodal import generators as gen
from termmodal.errors import InconsistencyError, ValuationBlowup
from termmodal.hybrid import HTOP, HNot, Neighbor, Prop, nominal_valuation
from termmodal.kdl import (
    STAR, DynamicTransformation, DynamicTranslator, FeatureSpace, KdlChecker, KdlModel,
    LearningUpdate, apply_learning, apply_transformation, bounded_morphism_check, canonical_map,
    check_characterization, compile_learning, compile_transformation, dynamic, generate_Fn,
    kdl_image, translate_dynamic, validate_kdl,
)
from termmodal.semantics import Evaluator
from termmodal.syntax import (
    TOP, ActionMod, And, Const, Eq, Exists, Forall, Iff, Know, Net, Not, Pred, Var, XSTAR,
)
from termmodal.update import product_update
from termmodal.verify import mutate_asymmetric, mutate_rigidity

F = FeatureSpace({"f": (0, 1)})


def chain(fa=1, fb=0):
    """One world, agents a and b linked, binary feature f."""
    return KdlModel(agents=("a", "b"), worlds=("w",), networks={"w": {("a", "b"), ("b", "a")}},
                    partitions={"a": [{"w"}], "b": [{"w"}]}, nominals={"i": "a"}, features=F,
                    values={"w": {"a": {"f": fa}, "b": {"f": fb}}})


def two_worlds():
    """a's only neighbor b has f=1 at w and f=0 at v; a cannot tell w from v."""
    return KdlModel(
        agents=("a", "b", "c"), worlds=("w", "v"),
        networks={w: {("a", "b"), ("b", "a")} for w in ("w", "v")},
        partitions={"a": [{"w", "v"}], "b": [{"w", "v"}], "c": [{"w", "v"}]},
        nominals={}, features=F,
        values={"w": {"a": {"f": 0}, "b": {"f": 1}, "c": {"f": 0}},
                "v": {"a": {"f": 0}, "b": {"f": 0}, "c": {"f": 0}}})


ADOPT = DynamicTransformation([Neighbor(Prop("f_1"))], [{"f": 1}], name="adopt")


def test_models_are_valid():
    assert validate_kdl(chain()) == []
    assert validate_kdl(two_worlds()) == []


def test_all_star_is_identity():
    km = chain()
    d = DynamicTransformation([HTOP], [{"f": STAR}])
    assert apply_transformation(km, d).values == km.values


def test_adoption():
    after = apply_transformation(chain(), ADOPT)
    assert after.values["w"]["b"]["f"] == 1
    assert after.values["w"]["a"]["f"] == 1


def test_transformation_keeps_valuation_functional():
    rng = random.Random(3)
    for _ in range(30):
        km = gen.random_kdl_model(rng)
        d = gen.random_transformation(rng, km.features, tuple(km.nominals))
        after = apply_transformation(km, d)
        for w in after.worlds:
            for a in after.agents:
                held = [p for p in after.features.props() if (w, a) in after.valuation[p]]
                assert len(held) == len(after.features.names)


def test_overlapping_phi_rejected():
    d = DynamicTransformation([HTOP, Prop("f_1")], [{"f": 0}, {"f": 1}])
    with pytest.raises(InconsistencyError):
        apply_transformation(chain(), d)


def test_empty_learning_keeps_links():
    km = two_worlds()
    after = apply_learning(km, LearningUpdate([]))
    assert all(after.cell(a, w) == km.cell(a, w) for a in km.agents for w in km.worlds)


def test_learning_cuts_only_observers_of_a_difference():
    after = apply_learning(two_worlds(), LearningUpdate([Prop("f_1")]))
    assert not after.cell("a", "w") >= {"v"}
    assert after.cell("b", "w") == {"w", "v"}   # b's neighbor a agrees across w, v
    assert after.cell("c", "w") == {"w", "v"}   # no neighbors


def test_compiled_transformation_shape():
    pa = compile_transformation(ADOPT, F, ("a_", "b_"))
    assert len(pa.action.events) == 1 and pa.event == "e_adopt"


def test_all_star_compiled_post_is_equivalent_to_atom():
    km = two_worlds()
    image = kdl_image(km)
    pa = compile_transformation(DynamicTransformation([HTOP], [{}]), F, image.signature.constants)
    ev = Evaluator()
    for atom, post in pa.action.postcondition(pa.event).items():
        for w in image.worlds:
            assert ev.holds(image, w, {}, post) == ev.holds(image, w, {}, atom)


def _canonical_ok(km, update):
    image = kdl_image(km)
    tr = DynamicTranslator(km.features, image.signature.constants)
    if isinstance(update, DynamicTransformation):
        action, after = tr.compile_transformation(update).action, apply_transformation(km, update)
    else:
        action, after = tr.compile_learning(update), apply_learning(km, update)
    updated = product_update(image, action, nominal_valuation(km.hybrid), evaluator=Evaluator(tr.registry))
    return bounded_morphism_check(kdl_image(after), updated, canonical_map(image, updated))


def test_adoption_matches_compiled_update():
    assert _canonical_ok(chain(), ADOPT) == []
    assert _canonical_ok(two_worlds(), LearningUpdate([Prop("f_1")])) == []


def test_empty_learning_compiles_to_one_trivial_event():
    d = compile_learning(LearningUpdate([]), F, ("a_", "b_"))
    assert len(d.events) == 1 and d.precondition(d.events[0]) == TOP
    assert _canonical_ok(two_worlds(), LearningUpdate([])) == []


def test_learning_event_count_and_edge():
    d = compile_learning(LearningUpdate([Prop("f_1")]), F, ("a1_", "a2_"))
    assert len(d.events) == 4
    assert d.edge("v11", "v01") == Not(Net(XSTAR, Const("a1_")))


def test_valuation_cap(monkeypatch):
    monkeypatch.setenv("TERMMODAL_EVENT_CAP", "8")
    with pytest.raises(ValuationBlowup):
        compile_learning(LearningUpdate([Prop("f_1")]), F, ("a_", "b_", "c_", "d_"))


def test_dynamic_translation():
    psi, reg = translate_dynamic(dynamic(ADOPT, Prop("p")), "x", F, ("a_", "b_"))
    assert psi == ActionMod("Delta_adopt", "e_adopt", Pred("p", Var("x")))
    assert "Delta_adopt" in reg


def test_learning_box_top_is_valid_and_nesting_agrees():
    km = two_worlds()
    image = kdl_image(km)
    ell = LearningUpdate([Prop("f_1")])
    tr = DynamicTranslator(F, image.signature.constants)
    ev = Evaluator(tr.registry)
    top = tr.translate(dynamic(ell, HTOP), "x")
    nested = dynamic(ADOPT, dynamic(ell, Prop("f_1")))
    psi = tr.translate(nested, "y")
    direct = KdlChecker(km)
    for w in km.worlds:
        for a in km.agents:
            assert ev.holds(image, w, {"x": a}, top)
            assert ev.holds(image, w, {"y": a}, psi) == direct.holds(w, a, nested)


def test_identity_map_and_collapsing_map():
    image = kdl_image(two_worlds())
    assert bounded_morphism_check(image, image, {w: w for w in image.worlds}) == []
    bad = bounded_morphism_check(image, image, {"w": "v", "v": "v"})
    assert any(v.condition == "atoms" for v in bad)


def test_fn_formulas():
    axioms = dict(generate_Fn(1, ("c1_",)))
    assert axioms["Named"] == Exists("x1", And(Forall("y", Eq(Var("y"), Var("x1"))),
                                               Eq(Var("x1"), Const("c1_"))))
    x, y = Var("x"), Var("y")
    assert axioms["Neigh"] == Forall("x", Forall("y", And(Not(Net(x, x)), Iff(Net(x, y), Net(y, x)))))
    assert axioms["KnowNeigh"] == Forall("x", Forall("y", Iff(Net(x, y), Know(x, Net(x, y)))))


def test_characterization_and_mutations():
    image = kdl_image(two_worlds())
    assert check_characterization(image) == []
    assert {ax for _, ax in check_characterization(mutate_asymmetric(image))} == {"Neigh"}
    assert {ax for _, ax in check_characterization(mutate_rigidity(image))} == {"Rig"}
