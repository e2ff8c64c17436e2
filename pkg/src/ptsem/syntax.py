"""Formulas, sequents, parsing and printing.

Concrete syntax (plain ASCII):

    formula := imp
    imp     := or ('->' imp)?          right associative
    or      := and ('|' and)*          left associative
    and     := neg ('&' neg)*          left associative
    neg     := '~' neg | atom
    atom    := 'bot' | IDENT | '(' formula ')'

`~f` is sugar for `f -> bot`; it is not a constructor.  Precedence is
`~` > `&` > `|` > `->`.  Atom names match ``[a-z][a-zA-Z0-9_]*``; the
name ``bot`` is reserved for falsum.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator, Union

ATOM_NAME_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")


class FormulaSyntaxError(ValueError):
    """Raised on malformed formula or sequent text; carries a byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


@dataclass(frozen=True, order=True)
class Atom:
    """An atomic proposition, identified by name."""

    name: str

    def __post_init__(self):
        if not ATOM_NAME_RE.match(self.name):
            raise ValueError(f"bad atom name {self.name!r}")
        if self.name == "bot":
            raise ValueError("'bot' is reserved for falsum")

    def __str__(self) -> str:
        return self.name


class Formula:
    """Base class of formula nodes.  Instances are immutable trees."""

    __slots__ = ()

    def __str__(self) -> str:
        return print_formula(self)


@dataclass(frozen=True)
class Bot(Formula):
    __slots__ = ()

    def __repr__(self):
        return "Bot()"


@dataclass(frozen=True)
class AtomRef(Formula):
    atom: Atom

    def __repr__(self):
        return f"AtomRef({self.atom.name})"


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("&", self.left, self.right)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("|", self.left, self.right)))

    def __hash__(self):
        return self._hash


@dataclass(frozen=True)
class Imp(Formula):
    left: Formula
    right: Formula
    _hash: int = field(init=False, repr=False, compare=False, default=0)

    def __post_init__(self):
        object.__setattr__(self, "_hash", hash(("->", self.left, self.right)))

    def __hash__(self):
        return self._hash


BOT = Bot()


def atom(name: str) -> AtomRef:
    return AtomRef(Atom(name))


def neg(f: Formula) -> Imp:
    """The abbreviation ~f, stored as f -> bot."""
    return Imp(f, BOT)


@dataclass(frozen=True)
class Sequent:
    """A context (set of formulas) paired with an extract formula."""

    context: frozenset[Formula]
    extract: Formula

    def __str__(self) -> str:
        return print_sequent(self)


def sequent(context, extract: Formula) -> Sequent:
    return Sequent(frozenset(context), extract)


# ----------------------------------------------------------------------
# Lexer / parser
# ----------------------------------------------------------------------

_TOKEN_RE = re.compile(r"\s*(->|[&|~():,]|[a-z][a-zA-Z0-9_]*)")


def _byte_offset(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            at = len(text) - len(stripped)
            raise FormulaSyntaxError(
                f"unknown token {stripped[0]!r}", _byte_offset(text, at)
            )
        tokens.append((m.group(1), _byte_offset(text, m.start(1))))
        pos = m.end()
    tokens.append(("", _byte_offset(text, len(text))))  # end marker
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def offset(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def expect(self, tok: str):
        if self.peek() != tok:
            raise FormulaSyntaxError(
                f"expected {tok!r}, found {self.peek() or 'end of input'!r}",
                self.offset(),
            )
        self.take()

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Imp(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.negation()
        while self.peek() == "&":
            self.take()
            f = And(f, self.negation())
        return f

    def negation(self) -> Formula:
        if self.peek() == "~":
            self.take()
            return neg(self.negation())
        return self.atomic()

    def atomic(self) -> Formula:
        tok = self.peek()
        if tok == "(":
            self.take()
            f = self.formula()
            self.expect(")")
            return f
        if tok == "bot":
            self.take()
            return BOT
        if ATOM_NAME_RE.match(tok):
            self.take()
            return AtomRef(Atom(tok))
        raise FormulaSyntaxError(
            f"expected a formula, found {tok or 'end of input'!r}", self.offset()
        )


def parse_formula(text: str) -> Formula:
    """Parse concrete formula syntax; raises FormulaSyntaxError with offset."""
    if not text.strip():
        raise FormulaSyntaxError("empty formula", 0)
    p = _Parser(text)
    f = p.formula()
    if p.peek() != "":
        raise FormulaSyntaxError(f"trailing input {p.peek()!r}", p.offset())
    return f


def parse_sequent(text: str) -> Sequent:
    """Parse ``"f1, f2 : g"``; the left side may be empty."""
    if text.count(":") != 1:
        raise FormulaSyntaxError("a sequent needs exactly one ':'", 0)
    left, right = text.split(":")
    ctx = []
    for part in left.split(","):
        if part.strip():
            ctx.append(parse_formula(part))
    if not right.strip():
        raise FormulaSyntaxError("missing extract formula", _byte_offset(text, len(text)))
    return Sequent(frozenset(ctx), parse_formula(right))


# ----------------------------------------------------------------------
# Printing
# ----------------------------------------------------------------------

_LEVEL_IMP = 1
_LEVEL_OR = 2
_LEVEL_AND = 3
_LEVEL_NEG = 4


def _render(f: Formula, minimum: int) -> str:
    if isinstance(f, Bot):
        return "bot"
    if isinstance(f, AtomRef):
        return f.atom.name
    if isinstance(f, Imp) and f.right == BOT:
        body = "~" + _render(f.left, _LEVEL_NEG)
        return body if _LEVEL_NEG >= minimum else f"({body})"
    if isinstance(f, Imp):
        body = f"{_render(f.left, _LEVEL_IMP + 1)} -> {_render(f.right, _LEVEL_IMP)}"
        level = _LEVEL_IMP
    elif isinstance(f, Or):
        body = f"{_render(f.left, _LEVEL_OR)} | {_render(f.right, _LEVEL_OR + 1)}"
        level = _LEVEL_OR
    elif isinstance(f, And):
        body = f"{_render(f.left, _LEVEL_AND)} & {_render(f.right, _LEVEL_AND + 1)}"
        level = _LEVEL_AND
    else:
        raise TypeError(f"not a formula: {f!r}")
    return body if level >= minimum else f"({body})"


def print_formula(f: Formula) -> str:
    """Minimal-parenthesis rendering; `~` preferred for `-> bot`."""
    return _render(f, 0)


def print_sequent(s: Sequent) -> str:
    ctx = ", ".join(sorted(print_formula(f) for f in s.context))
    return f"{ctx} : {print_formula(s.extract)}" if ctx else f": {print_formula(s.extract)}"


# ----------------------------------------------------------------------
# Context and alphabet bookkeeping
# ----------------------------------------------------------------------

def conjoin(gamma) -> Formula:
    """Right-nested conjunction of a context in sorted-by-print order.

    conjoin({}) is bot -> bot, a unit supported in every base, so the
    support clause for nonempty contexts reads uniformly on empty ones.
    """
    items = sorted(gamma, key=print_formula)
    if not items:
        return Imp(BOT, BOT)
    f = items[-1]
    for g in reversed(items[:-1]):
        f = And(g, f)
    return f


def atoms_of(x: Union[Formula, Sequent]) -> frozenset[Atom]:
    """Exactly the atoms occurring in a formula or sequent."""
    if isinstance(x, Sequent):
        acc = atoms_of(x.extract)
        for f in x.context:
            acc |= atoms_of(f)
        return acc
    if isinstance(x, AtomRef):
        return frozenset({x.atom})
    if isinstance(x, Bot):
        return frozenset()
    return atoms_of(x.left) | atoms_of(x.right)


def depth(f: Formula) -> int:
    """Tree depth with leaves at depth 1."""
    if isinstance(f, (AtomRef, Bot)):
        return 1
    return 1 + max(depth(f.left), depth(f.right))


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (And, Or, Imp)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


@lru_cache(maxsize=None)
def enumerate_formulas(atoms: frozenset[Atom], max_depth: int,
                       include_bot: bool = True) -> tuple[Formula, ...]:
    """All formulas over the given atoms up to depth, deterministically ordered."""
    leaves: list[Formula] = [AtomRef(a) for a in sorted(atoms)]
    if include_bot:
        leaves.append(BOT)
    layers = [tuple(leaves)]
    for _ in range(max_depth - 1):
        prev = [f for layer in layers for f in layer]
        new = []
        for op in (And, Or, Imp):
            for a in prev:
                for b in prev:
                    f = op(a, b)
                    if depth(f) == len(layers) + 1:
                        new.append(f)
        layers.append(tuple(new))
    return tuple(f for layer in layers for f in layer)
