"""Terms and formulas of the dynamic term-modal language.

Formulas are immutable trees built from a small set of primitive node
classes.  Disjunction, implication, the existential quantifier and the
dual of knowledge are not nodes of their own: the helper constructors
``Or``, ``Implies``, ``Iff``, ``Exists`` and ``Possible`` expand them into
primitives, so every consumer of the tree only deals with the primitive
cases.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union

from .errors import SignatureError

#: Name of the reserved free variable of edge-conditions.
XSTAR_NAME = "xstar"


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Const:
    name: str

    def __str__(self):
        return self.name


Term = Union[Var, Const]

XSTAR = Var(XSTAR_NAME)


class Formula:
    """Base class of formula nodes."""

    __slots__ = ()

    def __str__(self):
        from .parsing import format_formula

        return format_formula(self)

    # Operator sugar keeps test fixtures readable.
    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __rshift__(self, other):
        return Implies(self, other)


@dataclass(frozen=True, repr=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Pred(Formula):
    pred: str
    term: Term


@dataclass(frozen=True)
class Net(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Eq(Formula):
    left: Term
    right: Term


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Know(Formula):
    agent: Term
    body: Formula


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula


@dataclass(frozen=True)
class ActionMod(Formula):
    """``[action:event] body``; the action is referenced by registry name."""

    action: str
    event: str
    body: Formula


TOP = Top()
BOTTOM = Not(TOP)

ATOM_TYPES = (Pred, Net, Eq)


def Or(left, right):
    return Not(And(Not(left), Not(right)))


def Implies(left, right):
    return Not(And(left, Not(right)))


def Iff(left, right):
    return And(Implies(left, right), Implies(right, left))


def Exists(var, body):
    return Not(Forall(var, Not(body)))


def Possible(agent, body):
    """The dual of knowledge: ``agent`` considers ``body`` possible."""
    return Not(Know(agent, Not(body)))


def Neq(left, right):
    return Not(Eq(left, right))


def conj(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; the empty conjunction is ``TOP``."""
    result = None
    for f in formulas:
        result = f if result is None else And(result, f)
    return TOP if result is None else result


def disj(formulas: Iterable[Formula]) -> Formula:
    """Left-nested disjunction; the empty disjunction is ``BOTTOM``."""
    result = None
    for f in formulas:
        result = f if result is None else Or(result, f)
    return BOTTOM if result is None else result


def forall_many(names, body):
    for name in reversed(list(names)):
        body = Forall(name, body)
    return body


def exists_many(names, body):
    for name in reversed(list(names)):
        body = Exists(name, body)
    return body


# ---------------------------------------------------------------------------
# Signature
# ---------------------------------------------------------------------------

_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_']*\Z")


def is_constant_name(name: str) -> bool:
    """Constants are spelled with a trailing underscore (``a_``)."""
    return name.endswith("_")


@dataclass(frozen=True)
class Signature:
    """Constants and unary predicates of a term-modal language.

    The network symbol ``N`` and equality are always present.  Variables
    are every other well-formed identifier; :meth:`fresh_variable` draws
    new ones on demand.
    """

    constants: tuple = ()
    predicates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "constants", tuple(dict.fromkeys(self.constants)))
        object.__setattr__(self, "predicates", tuple(dict.fromkeys(self.predicates)))
        clash = set(self.constants) & set(self.predicates)
        if clash:
            raise SignatureError(f"names used both as constant and predicate: {sorted(clash)}")
        for name in self.constants + self.predicates:
            if not _IDENT.match(name):
                raise SignatureError(f"ill-formed identifier {name!r}")
        for name in self.predicates:
            if name in ("N", "K") or is_constant_name(name):
                raise SignatureError(f"reserved or constant-like predicate name {name!r}")
        if XSTAR_NAME in self.constants or XSTAR_NAME in self.predicates:
            raise SignatureError(f"{XSTAR_NAME!r} is reserved for edge-conditions")

    def is_variable(self, name: str) -> bool:
        return name not in self.constants and name not in self.predicates

    def merge(self, other: "Signature") -> "Signature":
        return Signature(self.constants + other.constants, self.predicates + other.predicates)

    def fresh_variable(self, avoid: Iterable[str], base: str = "v") -> str:
        return fresh_name(base, set(avoid) | set(self.constants) | set(self.predicates))


def fresh_name(base: str, avoid) -> str:
    stem = base.rstrip("0123456789") or "v"
    for k in itertools.count(1):
        candidate = f"{stem}{k}"
        if candidate not in avoid and candidate != XSTAR_NAME:
            return candidate
    raise AssertionError("unreachable")


# ---------------------------------------------------------------------------
# Structural operations
# ---------------------------------------------------------------------------

def terms_of(phi: Formula) -> Iterator[Term]:
    if isinstance(phi, Pred):
        yield phi.term
    elif isinstance(phi, (Net, Eq)):
        yield phi.left
        yield phi.right


def free_variables(phi: Formula) -> frozenset:
    """Names of variables with at least one free occurrence in ``phi``."""
    if isinstance(phi, ATOM_TYPES):
        return frozenset(t.name for t in terms_of(phi) if isinstance(t, Var))
    if isinstance(phi, Top):
        return frozenset()
    if isinstance(phi, Not):
        return free_variables(phi.body)
    if isinstance(phi, And):
        return free_variables(phi.left) | free_variables(phi.right)
    if isinstance(phi, Know):
        own = {phi.agent.name} if isinstance(phi.agent, Var) else set()
        return free_variables(phi.body) | own
    if isinstance(phi, Forall):
        return free_variables(phi.body) - {phi.var}
    if isinstance(phi, ActionMod):
        return free_variables(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def all_variables(phi: Formula) -> frozenset:
    """Every variable name occurring in ``phi``, bound or free."""
    if isinstance(phi, ATOM_TYPES):
        return frozenset(t.name for t in terms_of(phi) if isinstance(t, Var))
    if isinstance(phi, Top):
        return frozenset()
    if isinstance(phi, Not):
        return all_variables(phi.body)
    if isinstance(phi, And):
        return all_variables(phi.left) | all_variables(phi.right)
    if isinstance(phi, Know):
        own = {phi.agent.name} if isinstance(phi.agent, Var) else set()
        return all_variables(phi.body) | own
    if isinstance(phi, Forall):
        return all_variables(phi.body) | {phi.var}
    if isinstance(phi, ActionMod):
        return all_variables(phi.body)
    raise TypeError(f"not a formula: {phi!r}")


def constants_of(phi: Formula) -> frozenset:
    if isinstance(phi, ATOM_TYPES):
        return frozenset(t.name for t in terms_of(phi) if isinstance(t, Const))
    if isinstance(phi, Top):
        return frozenset()
    if isinstance(phi, (Not, Forall, ActionMod)):
        return constants_of(phi.body)
    if isinstance(phi, And):
        return constants_of(phi.left) | constants_of(phi.right)
    if isinstance(phi, Know):
        own = {phi.agent.name} if isinstance(phi.agent, Const) else set()
        return constants_of(phi.body) | own
    raise TypeError(f"not a formula: {phi!r}")


def predicates_of(phi: Formula) -> frozenset:
    if isinstance(phi, Pred):
        return frozenset({phi.pred})
    if isinstance(phi, (Net, Eq, Top)):
        return frozenset()
    if isinstance(phi, (Not, Forall, ActionMod, Know)):
        return predicates_of(phi.body)
    if isinstance(phi, And):
        return predicates_of(phi.left) | predicates_of(phi.right)
    raise TypeError(f"not a formula: {phi!r}")


def action_refs(phi: Formula) -> frozenset:
    """Names of action models referenced by ``phi``."""
    if isinstance(phi, ActionMod):
        return action_refs(phi.body) | {phi.action}
    if isinstance(phi, (Not, Forall, Know)):
        return action_refs(phi.body)
    if isinstance(phi, And):
        return action_refs(phi.left) | action_refs(phi.right)
    return frozenset()


def _sub_term(term, x, t):
    return t if isinstance(term, Var) and term.name == x else term


def substitute(phi: Formula, x: str, t: Term, sig: Signature | None = None) -> Formula:
    """Replace the free occurrences of variable ``x`` by term ``t``.

    Bound variables that would capture ``t`` are renamed to fresh ones.
    """
    if isinstance(x, Var):
        x = x.name
    if x not in free_variables(phi):
        return phi
    return _substitute(phi, x, t, sig or Signature())


def _substitute(phi, x, t, sig):
    if isinstance(phi, Pred):
        return Pred(phi.pred, _sub_term(phi.term, x, t))
    if isinstance(phi, Net):
        return Net(_sub_term(phi.left, x, t), _sub_term(phi.right, x, t))
    if isinstance(phi, Eq):
        return Eq(_sub_term(phi.left, x, t), _sub_term(phi.right, x, t))
    if isinstance(phi, Top):
        return phi
    if isinstance(phi, Not):
        return Not(_substitute(phi.body, x, t, sig))
    if isinstance(phi, And):
        return And(_substitute(phi.left, x, t, sig), _substitute(phi.right, x, t, sig))
    if isinstance(phi, Know):
        return Know(_sub_term(phi.agent, x, t), _substitute(phi.body, x, t, sig))
    if isinstance(phi, ActionMod):
        return ActionMod(phi.action, phi.event, _substitute(phi.body, x, t, sig))
    if isinstance(phi, Forall):
        y, body = phi.var, phi.body
        if y == x or x not in free_variables(body):
            return phi
        if isinstance(t, Var) and t.name == y:
            z = sig.fresh_variable(all_variables(body) | {x, y}, base=y)
            body = _substitute(body, y, Var(z), sig)
            y = z
        return Forall(y, _substitute(body, x, t, sig))
    raise TypeError(f"not a formula: {phi!r}")


def rename_bound(phi: Formula, old: str, new: str) -> Formula:
    """Alpha-rename every binder of ``old`` to ``new`` (assumes ``new`` fresh)."""
    if isinstance(phi, ATOM_TYPES) or isinstance(phi, Top):
        return phi
    if isinstance(phi, Not):
        return Not(rename_bound(phi.body, old, new))
    if isinstance(phi, And):
        return And(rename_bound(phi.left, old, new), rename_bound(phi.right, old, new))
    if isinstance(phi, Know):
        return Know(phi.agent, rename_bound(phi.body, old, new))
    if isinstance(phi, ActionMod):
        return ActionMod(phi.action, phi.event, rename_bound(phi.body, old, new))
    if isinstance(phi, Forall):
        body = rename_bound(phi.body, old, new)
        if phi.var == old:
            return Forall(new, substitute(body, old, Var(new)))
        return Forall(phi.var, body)
    raise TypeError(f"not a formula: {phi!r}")


def size(phi: Formula) -> int:
    if isinstance(phi, ATOM_TYPES) or isinstance(phi, Top):
        return 1
    if isinstance(phi, And):
        return 1 + size(phi.left) + size(phi.right)
    return 1 + size(phi.body)


def is_modal_free(phi: Formula) -> bool:
    if isinstance(phi, (Know, ActionMod)):
        return False
    if isinstance(phi, ATOM_TYPES) or isinstance(phi, Top):
        return True
    if isinstance(phi, And):
        return is_modal_free(phi.left) and is_modal_free(phi.right)
    return is_modal_free(phi.body)


def binds(phi: Formula, name: str) -> bool:
    if isinstance(phi, Forall):
        return phi.var == name or binds(phi.body, name)
    if isinstance(phi, And):
        return binds(phi.left, name) or binds(phi.right, name)
    if isinstance(phi, (Not, Know, ActionMod)):
        return binds(phi.body, name)
    return False


def check_formula(phi: Formula, sig: Signature) -> list:
    """Return problems with ``phi`` relative to ``sig`` (empty when fine)."""
    problems = []
    if binds(phi, XSTAR_NAME):
        problems.append(f"{XSTAR_NAME} may not be bound by a quantifier")
    for c in sorted(constants_of(phi)):
        if c not in sig.constants:
            problems.append(f"undeclared constant {c}")
    for p in sorted(predicates_of(phi)):
        if p not in sig.predicates:
            problems.append(f"undeclared predicate {p}")
    for v in sorted(all_variables(phi)):
        if not sig.is_variable(v):
            problems.append(f"{v} is declared as a constant or predicate, not a variable")
    return problems


# ---------------------------------------------------------------------------
# Ground atoms
# ---------------------------------------------------------------------------

def is_ground_atom(phi: Formula) -> bool:
    return isinstance(phi, ATOM_TYPES) and all(isinstance(t, Const) for t in terms_of(phi))


def ground_atoms(sig: Signature) -> list:
    """All ground atoms of ``sig``: P(c), then N(c,d), then c = d."""
    cs = [Const(c) for c in sig.constants]
    atoms = [Pred(p, c) for p in sig.predicates for c in cs]
    atoms += [Net(c, d) for c in cs for d in cs]
    atoms += [Eq(c, d) for c in cs for d in cs]
    return atoms
