"""InqLTL formulas: AST, parser, derived operators, fragment classification, printer.

Core node kinds are ``bot``, ``top``, atoms, Boolean disjunction ``|``,
conjunction ``&``, intuitionistic implication ``->``, and the temporal
operators ``X``, ``U``, ``R``.  Negation ``!f`` is stored as ``f -> bot``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence


class Kind(Enum):
    BOT = "bot"
    TOP = "top"
    ATOM = "atom"
    BDIS = "|"
    CONJ = "&"
    IMPL = "->"
    NEXT = "X"
    UNTIL = "U"
    RELEASE = "R"


_BINARY = (Kind.BDIS, Kind.CONJ, Kind.IMPL, Kind.UNTIL, Kind.RELEASE)


class Formula:
    """Immutable InqLTL formula node.

    Equality and hashing are structural; ``span`` (source offsets) is carried
    for diagnostics only and ignored by comparisons.
    """

    __slots__ = ("kind", "children", "name", "span", "_hash", "_size")

    def __init__(self, kind: Kind, children: tuple = (), name: Optional[str] = None,
                 span: Optional[tuple[int, int]] = None):
        self.kind = kind
        self.children = tuple(children)
        self.name = name
        self.span = span
        self._hash = hash((kind, name, self.children))
        self._size = 1 + sum(c._size for c in self.children)

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Formula) or self._hash != other._hash:
            return False
        return (self.kind is other.kind and self.name == other.name
                and self.children == other.children)

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Formula({pretty(self)!r})"

    def __str__(self):
        return pretty(self)

    @property
    def size(self) -> int:
        return self._size

    @property
    def lhs(self) -> Formula:
        return self.children[0]

    @property
    def rhs(self) -> Formula:
        return self.children[1]

    @property
    def sub(self) -> Formula:
        return self.children[0]

    def is_negation(self) -> bool:
        return self.kind is Kind.IMPL and self.children[1].kind is Kind.BOT

    def subformulas(self) -> Iterator[Formula]:
        """Pre-order traversal (with repetitions for shared subtrees)."""
        stack = [self]
        while stack:
            f = stack.pop()
            yield f
            stack.extend(reversed(f.children))

    def atoms(self) -> set[str]:
        return {f.name for f in self.subformulas() if f.kind is Kind.ATOM}


# -- constructors ------------------------------------------------------------

BOT = Formula(Kind.BOT)
TOP = Formula(Kind.TOP)


def atom(name: str) -> Formula:
    return Formula(Kind.ATOM, name=name)


def bdis(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.BDIS, (a, b))


def conj(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.CONJ, (a, b))


def impl(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.IMPL, (a, b))


def neg(a: Formula) -> Formula:
    return Formula(Kind.IMPL, (a, BOT))


def nxt(a: Formula) -> Formula:
    return Formula(Kind.NEXT, (a,))


def until(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.UNTIL, (a, b))


def release(a: Formula, b: Formula) -> Formula:
    return Formula(Kind.RELEASE, (a, b))


def eventually(a: Formula) -> Formula:
    return until(TOP, a)


def always(a: Formula) -> Formula:
    return release(BOT, a)


def big_conj(fs: Iterable[Formula]) -> Formula:
    fs = list(fs)
    if not fs:
        return TOP
    out = fs[0]
    for f in fs[1:]:
        out = conj(out, f)
    return out


def uniform(p: Formula) -> Formula:
    """``p | !p``: the team agrees on ``p`` at the current position."""
    return bdis(p, neg(p))


def card1(ap: Sequence[str]) -> Formula:
    return big_conj(always(uniform(atom(p))) for p in ap)


def dep(args: Sequence[Formula], target: Formula) -> Formula:
    def determined(f):
        return bdis(neg(f), neg(neg(f)))
    return impl(big_conj(determined(a) for a in args), determined(target))


# -- parsing ----------------------------------------------------------------

class FormulaSyntaxError(ValueError):
    """Raised on malformed formula text; ``pos`` is a character offset."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} at position {pos}")
        self.pos = pos


KEYWORDS = frozenset({"bot", "top", "X", "F", "G", "U", "R", "A", "A1", "card1", "dep"})
_UNARY = ("X", "F", "G", "!", "A", "A1")

_TOKEN_RE = re.compile(r"\s*(?:(->)|([!&|();,])|([A-Za-z_][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos >= len(text):
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos)
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("<eof>", len(text)))
    return tokens


@dataclass(frozen=True)
class Surface:
    """Parse tree before derived operators are expanded."""

    op: str
    args: tuple = ()
    name: Optional[str] = None
    span: tuple[int, int] = (0, 0)
    # for dep(...): number of determining arguments before ';'
    split: int = 0


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def advance(self) -> tuple[str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, tok: str) -> int:
        got, pos = self.advance()
        if got != tok:
            where = "end of input" if got == "<eof>" else repr(got)
            raise FormulaSyntaxError(f"expected {tok!r}, found {where}", pos)
        return pos

    def parse(self) -> Surface:
        s = self.implication()
        if self.peek() != "<eof>":
            raise FormulaSyntaxError(f"unexpected {self.peek()!r}", self.pos())
        return s

    def implication(self) -> Surface:
        start = self.pos()
        lhs = self.disjunction()
        if self.peek() == "->":
            self.advance()
            rhs = self.implication()
            return Surface("->", (lhs, rhs), span=(start, rhs.span[1]))
        return lhs

    def _left_assoc(self, op: str, below) -> Surface:
        start = self.pos()
        lhs = below()
        while self.peek() == op:
            self.advance()
            rhs = below()
            lhs = Surface(op, (lhs, rhs), span=(start, rhs.span[1]))
        return lhs

    def disjunction(self) -> Surface:
        return self._left_assoc("|", self.conjunction)

    def conjunction(self) -> Surface:
        return self._left_assoc("&", self.temporal)

    def temporal(self) -> Surface:
        start = self.pos()
        lhs = self.unary()
        if self.peek() in ("U", "R"):
            op, _ = self.advance()
            rhs = self.temporal()
            return Surface(op, (lhs, rhs), span=(start, rhs.span[1]))
        return lhs

    def unary(self) -> Surface:
        tok, start = self.tokens[self.i]
        if tok in _UNARY:
            self.advance()
            sub = self.unary()
            return Surface(tok, (sub,), span=(start, sub.span[1]))
        return self.primary()

    def primary(self) -> Surface:
        tok, start = self.advance()
        end = start + len(tok)
        if tok == "(":
            inner = self.implication()
            close = self.expect(")")
            return Surface(inner.op, inner.args, inner.name, (start, close + 1), inner.split)
        if tok in ("bot", "top", "card1"):
            return Surface(tok, span=(start, end))
        if tok == "dep":
            return self.dep_args(start)
        if tok == "<eof>":
            raise FormulaSyntaxError("unexpected end of input", start)
        if tok in KEYWORDS:
            raise FormulaSyntaxError(f"keyword {tok!r} cannot start an operand", start)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", tok):
            if self.peek() == "(":
                raise FormulaSyntaxError(f"unknown operator {tok!r}", start)
            return Surface("atom", name=tok, span=(start, end))
        raise FormulaSyntaxError(f"unexpected {tok!r}", start)

    def dep_args(self, start: int) -> Surface:
        self.expect("(")
        determining: list[Surface] = []
        if self.peek() != ";":
            determining.append(self.implication())
            while self.peek() == ",":
                self.advance()
                determining.append(self.implication())
        if self.peek() != ";":
            raise FormulaSyntaxError("dep(...) expects 'dep(f1,...,fn; g)'", self.pos())
        self.advance()
        if self.peek() in (")", "<eof>"):
            raise FormulaSyntaxError("dep(...) has an empty target slot", self.pos())
        target = self.implication()
        if self.peek() != ")":
            raise FormulaSyntaxError("dep(...) takes exactly one target after ';'", self.pos())
        close = self.expect(")")
        return Surface("dep", tuple(determining) + (target,), span=(start, close + 1),
                       split=len(determining))


def parse_surface(text: str) -> Surface:
    return _Parser(text).parse()


def expand_sugar(s: Surface, ap: Optional[Sequence[str]] = None) -> Formula:
    """Map a surface tree to the core grammar.

    ``F f`` becomes ``top U f``, ``G f`` becomes ``bot R f``, ``!f`` becomes
    ``f -> bot``, ``A f`` becomes ``top -> f`` and ``A1 f`` becomes ``!!f``.
    ``card1`` needs the proposition alphabet ``ap``.
    """
    op = s.op
    args = [expand_sugar(a, ap) for a in s.args]
    if op == "atom":
        f = atom(s.name)
    elif op == "bot":
        f = BOT
    elif op == "top":
        f = TOP
    elif op == "card1":
        if ap is None:
            raise FormulaSyntaxError("card1 needs a proposition alphabet", s.span[0])
        f = card1(ap)
    elif op == "dep":
        if len(args) < 1:
            raise FormulaSyntaxError("dep(...) has an empty target slot", s.span[0])
        f = dep(args[:s.split], args[s.split])
    elif op == "!":
        f = neg(args[0])
    elif op == "X":
        f = nxt(args[0])
    elif op == "F":
        f = eventually(args[0])
    elif op == "G":
        f = always(args[0])
    elif op == "A":
        f = impl(TOP, args[0])
    elif op == "A1":
        f = neg(neg(args[0]))
    elif op in ("|", "&", "->", "U", "R"):
        f = Formula(Kind("|" if op == "|" else op), tuple(args))
    else:
        raise FormulaSyntaxError(f"unknown operator {op!r}", s.span[0])
    return Formula(f.kind, f.children, f.name, s.span)


def parse(text: str, ap: Optional[Sequence[str]] = None) -> Formula:
    """Parse ``text`` into a core formula with all derived operators expanded."""
    return expand_sugar(parse_surface(text), ap)


# -- fragments --------------------------------------------------------------

@dataclass(frozen=True)
class FragmentReport:
    is_positive: bool
    is_left_positive: bool
    implication_depth: int
    offending: Optional[Formula] = None
    reason: Optional[str] = None

    def describe(self) -> str:
        if self.is_positive:
            frag = "positive"
        elif self.is_left_positive:
            frag = "left-positive"
        else:
            frag = "not left-positive"
        return f"{frag}, k={self.implication_depth}"

    def as_dict(self) -> dict:
        d = {"positive": self.is_positive, "left_positive": self.is_left_positive,
             "implication_depth": self.implication_depth}
        if self.offending is not None:
            d["offending"] = pretty(self.offending)
            d["offending_span"] = list(self.offending.span) if self.offending.span else None
            d["reason"] = self.reason
        return d


def is_positive(f: Formula) -> bool:
    k = f.kind
    if k in (Kind.BOT, Kind.TOP, Kind.ATOM):
        return True
    if k is Kind.IMPL:
        return f.is_negation() and f.lhs.kind is Kind.ATOM
    return all(is_positive(c) for c in f.children)


def is_flat(f: Formula) -> bool:
    """Syntactic sufficient condition for ``f`` to hold on a team iff it holds
    on each of its traces (so ``!!f`` is equivalent to ``f``)."""
    k = f.kind
    if k in (Kind.BOT, Kind.TOP, Kind.ATOM):
        return True
    if k is Kind.IMPL:
        return f.is_negation()
    if k in (Kind.CONJ, Kind.NEXT):
        return all(is_flat(c) for c in f.children)
    if k is Kind.RELEASE:
        return f.lhs.kind is Kind.BOT and is_flat(f.rhs)
    return False


def drop_flat_double_negations(f: Formula) -> Formula:
    """Rewrite ``!!g`` to ``g`` wherever ``g`` is flat; an equivalence on all teams.

    This is what makes ``!!p`` (and so the dependence-atom encoding over
    propositional arguments) count as a positive antecedent.
    """
    if not f.children:
        return f
    kids = tuple(drop_flat_double_negations(c) for c in f.children)
    g = f if kids == f.children else Formula(f.kind, kids, f.name, f.span)
    if g.is_negation() and g.lhs.is_negation() and is_flat(g.lhs.lhs):
        return g.lhs.lhs
    return g


def _left_positive_violation(f: Formula) -> Optional[Formula]:
    """First non-positive implication antecedent in ``f`` (None if left-positive).

    Antecedents are judged after :func:`drop_flat_double_negations`.
    """
    k = f.kind
    if k in (Kind.BOT, Kind.TOP, Kind.ATOM):
        return None
    if k is Kind.IMPL:
        if f.is_negation():
            return None
        if not is_positive(drop_flat_double_negations(f.lhs)):
            return f.lhs
        return _left_positive_violation(f.rhs)
    for c in f.children:
        bad = _left_positive_violation(c)
        if bad is not None:
            return bad
    return None


def implication_depth(f: Formula) -> int:
    if f.kind is Kind.IMPL:
        if f.is_negation():
            return implication_depth(f.lhs)
        return 1 + max(implication_depth(f.lhs), implication_depth(f.rhs))
    return max((implication_depth(c) for c in f.children), default=0)


def classify(f: Formula) -> FragmentReport:
    positive = is_positive(f)
    bad = None if positive else _left_positive_violation(f)
    reason = None
    if bad is not None:
        reason = f"antecedent {pretty(bad)} is not positive"
    return FragmentReport(positive, bad is None, implication_depth(f), bad, reason)


# -- printing ---------------------------------------------------------------

_LEVEL = {Kind.IMPL: 1, Kind.BDIS: 2, Kind.CONJ: 3, Kind.UNTIL: 4, Kind.RELEASE: 4}
_ATOMIC_LEVEL = 6
_UNARY_LEVEL = 5


def _level(f: Formula) -> int:
    if f.is_negation():
        return _UNARY_LEVEL
    if f.kind in _LEVEL:
        if f.kind is Kind.UNTIL and f.lhs.kind is Kind.TOP:
            return _UNARY_LEVEL
        if f.kind is Kind.RELEASE and f.lhs.kind is Kind.BOT:
            return _UNARY_LEVEL
        return _LEVEL[f.kind]
    if f.kind is Kind.NEXT:
        return _UNARY_LEVEL
    return _ATOMIC_LEVEL


def pretty(f: Formula) -> str:
    """Render ``f`` in the ASCII grammar; ``parse(pretty(f)) == f``."""
    k = f.kind
    if k is Kind.BOT:
        return "bot"
    if k is Kind.TOP:
        return "top"
    if k is Kind.ATOM:
        return f.name
    if _level(f) == _UNARY_LEVEL:
        if f.is_negation():
            op, operand = "!", f.lhs
        elif k is Kind.NEXT:
            op, operand = "X ", f.sub
        elif k is Kind.UNTIL:
            op, operand = "F ", f.rhs
        else:
            op, operand = "G ", f.rhs
        body = pretty(operand)
        if _level(operand) < _UNARY_LEVEL:
            body = f"({body})"
        return op + body
    lvl = _LEVEL[k]
    right_assoc = k in (Kind.IMPL, Kind.UNTIL, Kind.RELEASE)
    left, right = pretty(f.lhs), pretty(f.rhs)
    ll, rl = _level(f.lhs), _level(f.rhs)
    if ll < lvl or (right_assoc and ll == lvl):
        left = f"({left})"
    if rl < lvl or (not right_assoc and rl == lvl):
        right = f"({right})"
    return f"{left} {k.value} {right}"


# -- classical reading --------------------------------------------------------

def collapse(f: Formula) -> Formula:
    """Singleton-team reading of ``f`` as an LTL formula in negation normal form.

    The result uses ``bot``/``top``, atoms, negated atoms (``!p``), ``|`` read
    classically, ``&``, ``X``, ``U`` and ``R``.
    """
    return _nnf(f, True)


def _nnf(f: Formula, positive: bool) -> Formula:
    k = f.kind
    if k is Kind.BOT:
        return BOT if positive else TOP
    if k is Kind.TOP:
        return TOP if positive else BOT
    if k is Kind.ATOM:
        return f if positive else neg(f)
    if k is Kind.IMPL:
        # a -> b  ==  !a | b
        if positive:
            return _or(_nnf(f.lhs, False), _nnf(f.rhs, True))
        return _and(_nnf(f.lhs, True), _nnf(f.rhs, False))
    if k is Kind.BDIS:
        a, b = _nnf(f.lhs, positive), _nnf(f.rhs, positive)
        return _or(a, b) if positive else _and(a, b)
    if k is Kind.CONJ:
        a, b = _nnf(f.lhs, positive), _nnf(f.rhs, positive)
        return _and(a, b) if positive else _or(a, b)
    if k is Kind.NEXT:
        return nxt(_nnf(f.sub, positive))
    a, b = _nnf(f.lhs, positive), _nnf(f.rhs, positive)
    if k is Kind.UNTIL:
        return until(a, b) if positive else release(a, b)
    return release(a, b) if positive else until(a, b)


def _or(a: Formula, b: Formula) -> Formula:
    if a.kind is Kind.TOP or b.kind is Kind.TOP:
        return TOP
    if a.kind is Kind.BOT:
        return b
    if b.kind is Kind.BOT:
        return a
    return bdis(a, b)


def _and(a: Formula, b: Formula) -> Formula:
    if a.kind is Kind.BOT or b.kind is Kind.BOT:
        return BOT
    if a.kind is Kind.TOP:
        return b
    if b.kind is Kind.TOP:
        return a
    return conj(a, b)
