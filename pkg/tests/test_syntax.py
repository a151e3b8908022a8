import random

import pytest
from hypothesis import given, settings, strategies as st

from termmodal import generators as gen
from termmodal.errors import ParseError, SignatureError
from termmodal.parsing import format_formula, parse_formula
from termmodal.syntax import (
    XSTAR, Const, Eq, Exists, Forall, Implies, Know, Net, Pred, Signature, Var, check_formula,
    free_variables, ground_atoms, substitute,
)

SIG = Signature(("c_", "d_"), ("P", "Q"))


def test_substitute_not_free_is_identity():
    phi = Pred("P", Var("y"))
    assert substitute(phi, "x", Const("c_")) is phi


def test_substitute_into_modality_index():
    phi = Know(Var("x"), Pred("P", Var("x")))
    assert substitute(phi, "x", Const("a_")) == Know(Const("a_"), Pred("P", Const("a_")))


def test_substitute_avoids_capture():
    phi = Forall("y", Net(Var("x"), Var("y")))
    out = substitute(phi, "x", Var("y"))
    assert free_variables(out) == {"y"}
    assert isinstance(out, Forall) and out.var != "y"
    assert out.body == Net(Var("y"), Var(out.var))


def test_free_variables_examples():
    assert free_variables(Exists("x", Know(Const("a_"), Net(Const("a_"), Var("x"))))) == frozenset()
    assert free_variables(Exists("x", Net(Var("x"), XSTAR))) == {"xstar"}
    x, y = Var("x"), Var("y")
    assert free_variables(Implies(Net(x, y), Know(x, Net(x, y)))) == {"x", "y"}


def test_ground_atom_counts():
    assert ground_atoms(Signature(("a_",), ("M",))) == [
        Pred("M", Const("a_")), Net(Const("a_"), Const("a_")), Eq(Const("a_"), Const("a_"))]
    assert len(ground_atoms(Signature(("a_", "b_", "c_"), ("M",)))) == 21
    assert ground_atoms(Signature((), ("M",))) == []


def test_signature_rejects_clashes():
    with pytest.raises(SignatureError):
        Signature(("P",), ("P",))
    with pytest.raises(SignatureError):
        Signature(("xstar",), ())


def test_bound_xstar_is_reported():
    assert check_formula(Forall("xstar", Pred("P", XSTAR)), SIG)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(0, 4))
def test_substitution_removes_free_occurrence(seed, depth):
    rng = random.Random(seed)
    body = gen.random_formula(rng, SIG, depth, bound=("x", "y"))
    for t in (Const("c_"), Var("y")):
        out = substitute(body, "x", t)
        assert "x" not in free_variables(out)
        expected = (free_variables(body) - {"x"}) | (
            {t.name} if isinstance(t, Var) and "x" in free_variables(body) else set())
        assert free_variables(out) == expected


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(0, 5))
def test_print_parse_round_trip(seed, depth):
    phi = gen.random_formula(random.Random(seed), SIG, depth)
    assert parse_formula(format_formula(phi), SIG) == phi


def test_parse_error_position_at_eof():
    with pytest.raises(ParseError) as err:
        parse_formula("forall x. (")
    assert err.value.line == 1 and err.value.column == 12
