"""Concrete ASCII syntax for term-modal and hybrid/KDL formulas.

Term-modal grammar, loosest first::

    iff     := imp ("<->" imp)*            left-associative
    imp     := or ("->" imp)?              right-associative
    or      := and ("|" and)*
    and     := unary ("&" unary)*
    unary   := "!" unary | binder | atom | "(" iff ")"
    binder  := ("forall" | "exists") VAR "." iff
             | "K[" term "]" iff | "<K[" term "]>" iff
             | "[" NAME ":" EVENT "]" iff
    atom    := "true" | "false" | PRED "(" term ")" | "N(" term "," term ")"
             | term ("=" | "!=") term

A binder's scope extends to the end of the enclosing parenthesis.  The
hybrid grammar has the same binary layer but its modal operators
(``!``, ``K``, ``N``, ``U``, ``@i``, ``[update]``) bind tightly.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ParseError
from .syntax import (
    TOP, ActionMod, And, Const, Eq, Exists, Forall, Formula, Iff, Implies, Know, Net, Not,
    Or, Possible, Pred, Signature, Top, Var, is_constant_name,
)

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<op><->|->|!=|<K\[|\]>|[()\[\],.:!&|=<>@])
  | (?P<ident>[A-Za-z][A-Za-z0-9_']*)
  | (?P<num>[0-9]+)
    """,
    re.VERBOSE,
)

KEYWORDS = frozenset({"forall", "exists", "true", "false"})


@dataclass(frozen=True)
class Token:
    kind: str       # "op", "ident", "num" or "eof"
    text: str
    line: int
    col: int


def tokenize(text: str, source: str = "<formula>") -> list:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1, source)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rindex("\n") + 1
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Stream:
    def __init__(self, text, source):
        self.tokens = tokenize(text, source)
        self.i = 0
        self.source = source

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k=1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def at(self, text) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def error(self, msg, tok=None):
        tok = tok or self.tok
        where = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise ParseError(f"{msg} (at {where})", tok.line, tok.col, self.source)

    def take(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text) -> Token:
        if not self.at(text):
            self.error(f"expected {text!r}")
        return self.take()

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "ident":
            self.error(f"expected {what}")
        return self.take()

    def name_or_num(self, what) -> str:
        if self.tok.kind not in ("ident", "num"):
            self.error(f"expected {what}")
        return self.take().text

    def done(self):
        if self.tok.kind != "eof":
            self.error("unexpected trailing input")


class _BinaryLayer:
    """Shared precedence climbing for ``<->``, ``->``, ``|`` and ``&``."""

    def formula(self):
        left = self.imp()
        while self.s.at("<->"):
            self.s.take()
            left = self.mk_iff(left, self.imp())
        return left

    def imp(self):
        left = self.disj()
        if self.s.at("->"):
            self.s.take()
            return self.mk_imp(left, self.imp())
        return left

    def disj(self):
        left = self.conj()
        while self.s.at("|"):
            self.s.take()
            left = self.mk_or(left, self.conj())
        return left

    def conj(self):
        left = self.unary()
        while self.s.at("&"):
            self.s.take()
            left = self.mk_and(left, self.unary())
        return left


class _TmlParser(_BinaryLayer):
    mk_iff = staticmethod(Iff)
    mk_imp = staticmethod(Implies)
    mk_or = staticmethod(Or)
    mk_and = staticmethod(And)

    def __init__(self, text, sig: Signature | None, source):
        self.s = _Stream(text, source)
        self.sig = sig

    def parse(self) -> Formula:
        f = self.formula()
        self.s.done()
        return f

    def unary(self):
        s = self.s
        t = s.tok
        if s.at("!"):
            s.take()
            return Not(self.unary())
        if s.at("("):
            s.take()
            f = self.formula()
            s.expect(")")
            return f
        if t.kind == "ident" and t.text in ("forall", "exists"):
            s.take()
            var = self.variable_name()
            s.expect(".")
            body = self.formula()
            return Forall(var, body) if t.text == "forall" else Exists(var, body)
        if t.kind == "ident" and t.text == "K" and s.peek().text == "[":
            s.take()
            s.take()
            agent = self.term()
            s.expect("]")
            return Know(agent, self.formula())
        if s.at("<K["):
            s.take()
            agent = self.term()
            s.expect("]>")
            return Possible(agent, self.formula())
        if s.at("["):
            s.take()
            action = s.ident("action model name").text
            s.expect(":")
            event = s.name_or_num("event name")
            s.expect("]")
            return ActionMod(action, event, self.formula())
        return self.atom()

    def atom(self):
        s = self.s
        t = s.tok
        if t.kind == "ident" and t.text == "true":
            s.take()
            return TOP
        if t.kind == "ident" and t.text == "false":
            s.take()
            return Not(TOP)
        if t.kind == "ident" and s.peek().text == "(" and s.peek().kind == "op":
            s.take()
            s.take()
            if t.text == "N":
                left = self.term()
                s.expect(",")
                right = self.term()
                s.expect(")")
                return Net(left, right)
            if t.text in KEYWORDS or t.text == "K":
                s.error("keyword used as predicate", t)
            if self.sig is not None and t.text not in self.sig.predicates:
                s.error(f"undeclared predicate {t.text}", t)
            if self.sig is None and is_constant_name(t.text):
                s.error(f"{t.text} is a constant, not a predicate", t)
            arg = self.term()
            s.expect(")")
            return Pred(t.text, arg)
        if t.kind == "eof":
            s.error("unexpected end of input, expected a formula")
        left = self.term()
        if s.at("="):
            s.take()
            return Eq(left, self.term())
        if s.at("!="):
            s.take()
            return Not(Eq(left, self.term()))
        s.error("expected '=' or '!=' after term")

    def variable_name(self) -> str:
        t = self.s.ident("variable")
        if t.text in KEYWORDS or t.text in ("K", "N"):
            self.s.error("keyword used as variable", t)
        if self.sig is not None and not self.sig.is_variable(t.text):
            self.s.error(f"{t.text} is declared as a constant or predicate, not a variable", t)
        if self.sig is None and is_constant_name(t.text):
            self.s.error(f"{t.text} is a constant and cannot be bound", t)
        return t.text

    def term(self):
        t = self.s.ident("term")
        name = t.text
        if name in KEYWORDS or name in ("K", "N"):
            self.s.error("keyword used as term", t)
        if self.sig is not None:
            if name in self.sig.constants:
                return Const(name)
            if name in self.sig.predicates:
                self.s.error(f"{name} is a predicate, not a term", t)
            if is_constant_name(name):
                self.s.error(f"undeclared constant {name}", t)
            return Var(name)
        return Const(name) if is_constant_name(name) else Var(name)


def parse_formula(text: str, sig: Signature | None = None, source: str = "<formula>") -> Formula:
    """Parse a term-modal formula.

    Without ``sig``, identifiers ending in ``_`` are constants and every
    other term identifier is a variable.  With ``sig``, undeclared
    constants and predicates are errors.
    """
    return _TmlParser(text, sig, source).parse()


def parse_term(text: str, sig: Signature | None = None, source: str = "<term>"):
    p = _TmlParser(text, sig, source)
    t = p.term()
    p.s.done()
    return t


# ---------------------------------------------------------------------------
# Printing
# ---------------------------------------------------------------------------

# precedence levels: higher binds tighter
_IFF, _IMP, _OR, _AND, _UNARY = 1, 2, 3, 4, 5


def _match_or(phi):
    if isinstance(phi, Not) and isinstance(phi.body, And):
        a, b = phi.body.left, phi.body.right
        if isinstance(a, Not) and isinstance(b, Not):
            return a.body, b.body
    return None


def _match_imp(phi):
    if isinstance(phi, Not) and isinstance(phi.body, And) and isinstance(phi.body.right, Not):
        return phi.body.left, phi.body.right.body
    return None


def _match_iff(phi):
    if isinstance(phi, And):
        l, r = _match_imp(phi.left), _match_imp(phi.right)
        if l and r and l[0] == r[1] and l[1] == r[0]:
            return l
    return None


def _sugared(phi):
    """Whether a negation prints as sugar (``exists``, ``|``, ``!=``, ...)."""
    b = phi.body
    return (isinstance(b, (Top, Eq)) or (isinstance(b, Forall) and isinstance(b.body, Not))
            or _match_imp(phi) is not None)


def _binary(op, level, left, right, assoc):
    """Combine two printed operands ``(text, level, open)``."""
    ls, ll, lo = left
    rs, rl, ro = right
    if lo or ll < level or (ll == level and assoc == "right"):
        ls = f"({ls})"
    if rl < level or (rl == level and assoc == "left"):
        rs, ro = f"({rs})", False
    return f"{ls} {op} {rs}", level, ro


def _fmt(phi):
    """Return ``(text, level, open)`` where ``open`` means the text ends in a
    binder whose scope would swallow anything appended to it."""
    if isinstance(phi, Top):
        return "true", _UNARY, False
    if isinstance(phi, Pred):
        return f"{phi.pred}({phi.term})", _UNARY, False
    if isinstance(phi, Net):
        return f"N({phi.left},{phi.right})", _UNARY, False
    if isinstance(phi, Eq):
        return f"{phi.left} = {phi.right}", _UNARY, False
    if isinstance(phi, Know):
        return f"K[{phi.agent}] " + _fmt(phi.body)[0], _UNARY, True
    if isinstance(phi, Forall):
        return f"forall {phi.var}. " + _fmt(phi.body)[0], _UNARY, True
    if isinstance(phi, ActionMod):
        return f"[{phi.action}:{phi.event}] " + _fmt(phi.body)[0], _UNARY, True
    iff = _match_iff(phi)
    if iff:
        return _binary("<->", _IFF, _fmt(iff[0]), _fmt(iff[1]), "left")
    if isinstance(phi, And):
        return _binary("&", _AND, _fmt(phi.left), _fmt(phi.right), "left")
    if isinstance(phi, Not):
        body = phi.body
        if isinstance(body, Top):
            return "false", _UNARY, False
        if isinstance(body, Eq):
            return f"{body.left} != {body.right}", _UNARY, False
        if isinstance(body, Forall) and isinstance(body.body, Not):
            return f"exists {body.var}. " + _fmt(body.body.body)[0], _UNARY, True
        if isinstance(body, Know) and isinstance(body.body, Not) and not _sugared(body.body):
            return f"<K[{body.agent}]> " + _fmt(body.body.body)[0], _UNARY, True
        pair = _match_or(phi)
        if pair:
            return _binary("|", _OR, _fmt(pair[0]), _fmt(pair[1]), "left")
        pair = _match_imp(phi)
        if pair:
            return _binary("->", _IMP, _fmt(pair[0]), _fmt(pair[1]), "right")
        text, level, open_ = _fmt(body)
        if level < _UNARY:
            return f"!({text})", _UNARY, False
        return f"!{text}", _UNARY, open_
    raise TypeError(f"not a formula: {phi!r}")


def format_formula(phi: Formula) -> str:
    """Print ``phi`` in the concrete syntax accepted by :func:`parse_formula`."""
    return _fmt(phi)[0]


# ---------------------------------------------------------------------------
# Hybrid / KDL formulas
# ---------------------------------------------------------------------------

class _HybridParser(_BinaryLayer):
    def __init__(self, text, nominals, updates, source):
        from . import hybrid as h

        self.h = h
        self.s = _Stream(text, source)
        self.nominals = None if nominals is None else frozenset(nominals)
        self.updates = updates
        self.mk_iff = h.h_iff
        self.mk_imp = h.h_implies
        self.mk_or = h.h_or
        self.mk_and = h.HAnd

    def parse(self):
        f = self.formula()
        self.s.done()
        return f

    def unary(self):
        h, s = self.h, self.s
        t = s.tok
        if s.at("!"):
            s.take()
            return h.HNot(self.unary())
        if s.at("("):
            s.take()
            f = self.formula()
            s.expect(")")
            return f
        if s.at("@"):
            s.take()
            nom = s.ident("nominal").text
            if self.nominals is not None and nom not in self.nominals:
                s.error(f"undeclared nominal {nom}")
            return h.At(nom, self.unary())
        if s.at("["):
            s.take()
            name = s.ident("update name")
            s.expect("]")
            if self.updates is None or name.text not in self.updates:
                s.error(f"unknown update {name.text}", name)
            from .kdl import dynamic

            return dynamic(self.updates[name.text], self.unary())
        if t.kind == "ident" and t.text in ("K", "N", "U"):
            s.take()
            cls = {"K": h.HKnow, "N": h.Neighbor, "U": h.Univ}[t.text]
            return cls(self.unary())
        if t.kind == "ident":
            s.take()
            if t.text == "true":
                return h.HTOP
            if t.text == "false":
                return h.HBOTTOM
            if s.at("="):
                s.take()
                value = s.name_or_num("feature value")
                return h.Prop(f"{t.text}_{value}")
            if self.nominals is not None and t.text in self.nominals:
                return h.Nominal(t.text)
            return h.Prop(t.text)
        s.error("expected a hybrid formula")


def parse_hybrid(text: str, nominals=None, updates=None, source: str = "<formula>"):
    """Parse a hybrid (or, with ``updates``, KDL) formula.

    Identifiers listed in ``nominals`` are nominals; other identifiers are
    propositions.  ``f = z`` abbreviates the feature proposition ``f_z``.
    ``updates`` maps names usable in ``[name]`` to transformations or
    learning updates.
    """
    return _HybridParser(text, nominals, updates, source).parse()


def _hmatch_or(phi, h):
    if isinstance(phi, h.HNot) and isinstance(phi.body, h.HAnd):
        a, b = phi.body.left, phi.body.right
        if isinstance(a, h.HNot) and isinstance(b, h.HNot):
            return a.body, b.body
    return None


def _hmatch_imp(phi, h):
    if isinstance(phi, h.HNot) and isinstance(phi.body, h.HAnd) and isinstance(phi.body.right, h.HNot):
        return phi.body.left, phi.body.right.body
    return None


def _hfmt(phi):
    from . import hybrid as h
    from . import kdl

    if isinstance(phi, h.HTop):
        return "true", _UNARY
    if isinstance(phi, (h.Prop, h.Nominal)):
        return phi.name, _UNARY
    prefix = None
    if isinstance(phi, h.HKnow):
        prefix = "K "
    elif isinstance(phi, h.Neighbor):
        prefix = "N "
    elif isinstance(phi, h.Univ):
        prefix = "U "
    elif isinstance(phi, h.At):
        prefix = f"@{phi.nominal} "
    elif isinstance(phi, (kdl.Transform, kdl.Learn)):
        prefix = f"[{phi.update.name}] "
    if prefix is not None:
        text, level = _hfmt(phi.body)
        return prefix + (text if level == _UNARY else f"({text})"), _UNARY
    if isinstance(phi, h.HAnd):
        l, r = _hmatch_imp(phi.left, h), _hmatch_imp(phi.right, h)
        if l and r and l[0] == r[1] and l[1] == r[0]:
            return _hbin("<->", _IFF, _hfmt(l[0]), _hfmt(l[1]), "left")
        return _hbin("&", _AND, _hfmt(phi.left), _hfmt(phi.right), "left")
    if isinstance(phi, h.HNot):
        if isinstance(phi.body, h.HTop):
            return "false", _UNARY
        pair = _hmatch_or(phi, h)
        if pair:
            return _hbin("|", _OR, _hfmt(pair[0]), _hfmt(pair[1]), "left")
        pair = _hmatch_imp(phi, h)
        if pair:
            return _hbin("->", _IMP, _hfmt(pair[0]), _hfmt(pair[1]), "right")
        text, level = _hfmt(phi.body)
        return "!" + (text if level == _UNARY else f"({text})"), _UNARY
    raise TypeError(f"not a hybrid formula: {phi!r}")


def _hbin(op, level, left, right, assoc):
    text, _, _ = _binary(op, level, (*left, False), (*right, False), assoc)
    return text, level


def format_hybrid(phi) -> str:
    return _hfmt(phi)[0]
