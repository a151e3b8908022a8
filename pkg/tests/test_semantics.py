import pytest

from termmodal.fileio import load_model
from termmodal.parsing import parse_formula
from termmodal.semantics import Model, extension, partition_from_relation, satisfies, validate_model
from termmodal.syntax import Const, Eq, Var


@pytest.fixture
def office(fixtures):
    return load_model(fixtures / "server_error" / "office.model")


@pytest.fixture
def heist(fixtures):
    return load_model(fixtures / "thieves" / "heist.model")


def _sat(pm, text, world=None):
    return satisfies(pm.model, world or pm.actual, {}, parse_formula(text, pm.model.signature))


def test_fixtures_are_valid(office, heist):
    assert validate_model(office.model) == []
    assert validate_model(heist.model) == []


def test_missing_denotation_reported(office):
    m = office.model
    consts = {w: dict(d) for w, d in m.constants.items()}
    del consts["w"]["a_"]
    bad = Model(m.agents, m.worlds, m.partitions, consts, m.predicates, m.network, m.signature)
    assert "constant a_ undenoted at w" in validate_model(bad)


def test_overlapping_cells_reported(office):
    m = office.model
    parts = dict(m.partitions)
    parts["a"] = [{"w", "v"}, {"v", "u"}]
    bad = Model(m.agents, m.worlds, parts, m.constants, m.predicates, m.network, m.signature)
    assert any("overlapping" in d for d in validate_model(bad))


def test_extension_clauses(heist):
    m = heist.model
    assert extension(Var("x"), "w1", m, {"x": "h"}) == "h"
    assert extension(Const("t_"), "w4", m) == "b"
    assert extension(Const("t_"), "w1", m) == "t"


def test_server_and_cop_queries(office, heist):
    assert _sat(office, "forall x. !K[x] exists y. M(y)")
    assert not _sat(office, "K[a_] M(c_)")
    assert _sat(heist, "!exists x. K[c_](x = t_)")


def test_identity_always_true(heist):
    for w in heist.model.worlds:
        assert satisfies(heist.model, w, {}, Eq(Const("t_"), Const("t_")))


def test_de_dicto_de_re_gap():
    m = Model(agents=("o", "a", "b"), worlds=("w1", "w2"),
              partitions={"o": [{"w1", "w2"}], "a": [{"w1"}, {"w2"}], "b": [{"w1"}, {"w2"}]},
              constants={"w1": {}, "w2": {}},
              predicates={"w1": {"P": {"a"}}, "w2": {"P": {"b"}}},
              network={"w1": set(), "w2": set()})
    sig = m.signature
    assert satisfies(m, "w1", {"o": "o"}, parse_formula("K[o] exists x. P(x)", sig))
    assert not satisfies(m, "w1", {"o": "o"}, parse_formula("exists x. K[o] P(x)", sig))


def test_partition_from_relation():
    assert partition_from_relation(["a", "b"], {("a", "a"), ("b", "b"), ("a", "b")}) is None
    blocks = partition_from_relation(["a", "b", "c"], {("a", "a"), ("b", "b"), ("c", "c"),
                                                       ("a", "b"), ("b", "a")})
    assert {frozenset(b) for b in blocks} == {frozenset("ab"), frozenset("c")}
