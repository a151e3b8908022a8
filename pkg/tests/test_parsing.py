import pytest

from termmodal.errors import ParseError
from termmodal.hybrid import At, HKnow, HNot, Neighbor, Nominal, Prop, Univ, h_implies
from termmodal.parsing import format_formula, format_hybrid, parse_formula, parse_hybrid, tokenize
from termmodal.syntax import (
    TOP, ActionMod, And, Const, Eq, Exists, Forall, Implies, Know, Net, Not, Or, Possible, Pred,
    Signature, Var,
)

SIG = Signature(("a_", "b_", "c_", "t_"), ("M",))


def test_cop_query():
    phi = parse_formula("!exists x. K[c_](x = t_)", SIG)
    assert phi == Not(Exists("x", Know(Const("c_"), Eq(Var("x"), Const("t_")))))


def test_precedence():
    p, q, r = (Pred("M", Const(c)) for c in ("a_", "b_", "c_"))
    assert parse_formula("M(a_) | M(b_) & M(c_)", SIG) == Or(p, And(q, r))
    assert parse_formula("M(a_) -> M(b_) -> M(c_)", SIG) == Implies(p, Implies(q, r))
    assert parse_formula("!M(a_) & M(b_)", SIG) == And(Not(p), q)


def test_binders_scope_to_end():
    phi = parse_formula("forall x. M(x) & N(x, a_)", SIG)
    assert phi == Forall("x", And(Pred("M", Var("x")), Net(Var("x"), Const("a_"))))
    assert parse_formula("(forall x. M(x)) & M(a_)", SIG) == And(Forall("x", Pred("M", Var("x"))),
                                                                 Pred("M", Const("a_")))


def test_sugar_round_trips():
    for text in ("<K[a_]> M(b_)", "a_ != b_", "exists x. M(x) <-> false", "[log:3] true",
                 "forall x. (exists y. N(y,x) -> <K[x]> !exists z. K[a_] M(z))",
                 "!K[x] exists y. M(y)"):
        phi = parse_formula(text, SIG)
        assert parse_formula(format_formula(phi), SIG) == phi


def test_possible_and_action():
    assert parse_formula("<K[a_]> true", SIG) == Possible(Const("a_"), TOP)
    assert parse_formula("[dere:sigma] M(a_)", SIG) == ActionMod("dere", "sigma", Pred("M", Const("a_")))


def test_undeclared_identifiers():
    with pytest.raises(ParseError, match="undeclared constant z_") as err:
        parse_formula("M(z_)", SIG)
    assert err.value.column == 3
    with pytest.raises(ParseError, match="undeclared"):
        parse_formula("Q(a_)", SIG)


def test_lexical_error_has_position():
    with pytest.raises(ParseError) as err:
        parse_formula("M(a_) $ M(b_)", SIG)
    assert err.value.column == 7


def test_comments_are_skipped():
    assert [t.text for t in tokenize("true # trailing")][:1] == ["true"]


def test_hybrid_parse_and_print():
    phi = parse_hybrid("K @i p -> N !U q", nominals={"i"})
    assert phi == h_implies(HKnow(At("i", Prop("p"))), Neighbor(HNot(Univ(Prop("q")))))
    assert parse_hybrid(format_hybrid(phi), nominals={"i"}) == phi
    assert parse_hybrid("i", nominals={"i"}) == Nominal("i")
    assert parse_hybrid("f = 1") == Prop("f_1")
