"""Typed assertion expressions: construction, parsing, printing and evaluation.

An assertion is a tree over boolean and numeric program variables. Numeric
nodes are ``+ - * / %`` and constants, comparisons map two numbers to a
boolean, and the boolean connectives are ``&& || ^ -> <=>`` plus ``!``.

Grammar, lowest precedence first::

    implies  := equiv ('->' implies)?          right associative
    equiv    := or ('<=>' or)*
    or       := xor ('||' xor)*
    xor      := and ('^' and)*
    and      := not ('&&' not)*
    not      := '!' not | cmp
    cmp      := add (('=='|'!='|'<'|'<='|'>'|'>=') add)?
    add      := mul (('+'|'-') mul)*
    mul      := neg (('*'|'/'|'%') neg)*
    neg      := '-' neg | atom
    atom     := IDENT | NUMBER | 'true' | 'false' | '(' implies ')'

``-c`` is sugar for ``(0 - c)``; ``true``/``false`` are sugar for
``(0 == 0)``/``(0 != 0)`` so every tree prints back to something that parses
to the same tree.
"""

from __future__ import annotations

import math
import re
from typing import Iterator, Mapping, Sequence

BOOL = "boolean"
NUM = "number"

ARITH_OPS = ("+", "-", "*", "/", "%")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
CONNECTIVES = ("&&", "||", "^", "->", "<=>")

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")


class ExprError(ValueError):
    """Base class for assertion-language errors."""


class ParseError(ExprError):
    def __init__(self, message: str, text: str = "", pos: int = -1):
        self.pos = pos
        self.text = text
        if pos >= 0:
            message = f"{message} at position {pos}"
        super().__init__(message)


class UnknownIdentifier(ExprError):
    pass


class TypeCheckError(ExprError):
    pass


class EvalError(ArithmeticError):
    """Division or modulo by zero during evaluation."""


class Signature:
    """Ordered, typed variable set an assertion may refer to.

    >>> sig = Signature([("x", "number"), ("flag", "boolean")])
    >>> sig.type_of("flag")
    'boolean'
    """

    __slots__ = ("entries", "_index")

    def __init__(self, entries: Sequence[tuple[str, str]]):
        entries = tuple((str(n), str(t)) for n, t in entries)
        index = {}
        for i, (name, typ) in enumerate(entries):
            if not IDENT_RE.match(name):
                raise ValueError(f"invalid identifier {name!r}")
            if typ not in (BOOL, NUM):
                raise ValueError(f"invalid type {typ!r} for {name!r}")
            if name in index:
                raise ValueError(f"duplicate identifier {name!r}")
            index[name] = i
        self.entries = entries
        self._index = index

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.entries]

    def index(self, name: str) -> int:
        return self._index[name]

    def type_of(self, name: str) -> str:
        return self.entries[self._index[name]][1]

    def variables(self, typ: str) -> list[str]:
        return [n for n, t in self.entries if t == typ]

    def __contains__(self, name) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Signature) and self.entries == other.entries

    def __hash__(self) -> int:
        return hash(self.entries)

    def __repr__(self) -> str:
        return f"Signature({list(self.entries)!r})"

    def to_json(self) -> list[dict]:
        return [{"name": n, "type": t} for n, t in self.entries]

    @classmethod
    def from_json(cls, data) -> "Signature":
        return cls([(d["name"], d["type"]) for d in data])


class Expr:
    """Immutable, typed expression node.

    Build nodes with :func:`var`, :func:`const`, :func:`not_` and
    :func:`binary`; construction type-checks the children.
    """

    __slots__ = ("op", "args", "name", "value", "type", "size", "depth", "_hash")

    def __init__(self, op, args=(), name=None, value=None, type_=None):
        self.op = op
        self.args = args
        self.name = name
        self.value = value
        self.type = type_
        self.size = 1 + sum(a.size for a in args)
        self.depth = 1 + max((a.depth for a in args), default=0)
        self._hash = hash((op, name, value, type_, args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, Expr) or self._hash != other._hash:
            return False
        return (
            self.op == other.op
            and self.name == other.name
            and self.value == other.value
            and self.type == other.type
            and self.args == other.args
        )

    def __repr__(self) -> str:
        return f"Expr({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)

    def __reduce__(self):
        return (_rebuild, (self.op, self.args, self.name, self.value, self.type))


def _rebuild(op, args, name, value, type_):
    return Expr(op, args, name, value, type_)


def var(name: str, type_: str) -> Expr:
    if type_ not in (BOOL, NUM):
        raise TypeCheckError(f"unknown type {type_!r}")
    return Expr("var", (), name=name, type_=type_)


def const(value: float) -> Expr:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise ValueError(f"constants must be finite and non-negative, got {value}")
    return Expr("const", (), value=value, type_=NUM)


def not_(arg: Expr) -> Expr:
    if arg.type != BOOL:
        raise TypeCheckError("operand of '!' must be boolean")
    return Expr("!", (arg,), type_=BOOL)


def binary(op: str, left: Expr, right: Expr) -> Expr:
    if op in ARITH_OPS or op in COMPARE_OPS:
        if left.type != NUM or right.type != NUM:
            raise TypeCheckError(f"operands of {op!r} must be numeric")
        return Expr(op, (left, right), type_=NUM if op in ARITH_OPS else BOOL)
    if op in CONNECTIVES:
        if left.type != BOOL or right.type != BOOL:
            raise TypeCheckError(f"operands of {op!r} must be boolean")
        return Expr(op, (left, right), type_=BOOL)
    raise TypeCheckError(f"unknown operator {op!r}")


def and_(left: Expr, right: Expr) -> Expr:
    return binary("&&", left, right)


TRUE = binary("==", const(0), const(0))
FALSE = binary("!=", const(0), const(0))


# --------------------------------------------------------------------------
# measures and traversal

def size(e: Expr) -> int:
    return e.size


def depth(e: Expr) -> int:
    return e.depth


def subtrees(e: Expr) -> Iterator[tuple[tuple[int, ...], Expr]]:
    """Yield ``(path, node)`` in preorder; a path is a tuple of child indices."""
    stack = [((), e)]
    while stack:
        path, node = stack.pop()
        yield path, node
        for i in range(len(node.args) - 1, -1, -1):
            stack.append((path + (i,), node.args[i]))


def replace_at(e: Expr, path: Sequence[int], new: Expr) -> Expr:
    if not path:
        return new
    i = path[0]
    args = list(e.args)
    args[i] = replace_at(args[i], path[1:], new)
    if e.op == "!":
        return not_(args[0])
    return binary(e.op, args[0], args[1])


def variables_of(e: Expr) -> set[str]:
    return {node.name for _, node in subtrees(e) if node.op == "var"}


def conjuncts(e: Expr) -> list[Expr]:
    """Split at top-level ``&&`` nodes, left to right."""
    if e.op == "&&":
        return conjuncts(e.args[0]) + conjuncts(e.args[1])
    return [e]


def conjoin(parts: Sequence[Expr]) -> Expr:
    result = parts[0]
    for part in parts[1:]:
        result = and_(result, part)
    return result


# --------------------------------------------------------------------------
# printing

def format_number(value: float) -> str:
    if value.is_integer() and abs(value) < 1e16:
        return str(int(value))
    return repr(value)


def to_text(e: Expr) -> str:
    """Canonical, fully parenthesised text; ``parse(to_text(e))`` gives back ``e``."""
    if e.op == "var":
        return e.name
    if e.op == "const":
        return format_number(e.value)
    if e.op == "!":
        return "!" + to_text(e.args[0])
    return f"({to_text(e.args[0])} {e.op} {to_text(e.args[1])})"


# --------------------------------------------------------------------------
# parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<op><=>|->|&&|\|\||==|!=|<=|>=|[-+*/%<>!^()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, sig: Signature):
        self.text = text
        self.sig = sig
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def accept(self, *ops) -> str | None:
        kind, value, _ = self.tok
        if kind == "op" and value in ops:
            self.i += 1
            return value
        return None

    def fail(self, message: str):
        raise ParseError(message, self.text, self.tok[2])

    def build(self, op, left, right, pos):
        try:
            return binary(op, left, right)
        except TypeCheckError as exc:
            raise TypeCheckError(f"{exc} at position {pos}") from None

    def parse(self) -> Expr:
        e = self.implies()
        if self.tok[0] != "end":
            self.fail(f"unexpected token {self.tok[1]!r}")
        return e

    def implies(self):
        left = self.equiv()
        pos = self.tok[2]
        if self.accept("->"):
            return self.build("->", left, self.implies(), pos)
        return left

    def _left_assoc(self, ops, sub):
        left = sub()
        while True:
            pos = self.tok[2]
            op = self.accept(*ops)
            if op is None:
                return left
            left = self.build(op, left, sub(), pos)

    def equiv(self):
        return self._left_assoc(("<=>",), self.or_)

    def or_(self):
        return self._left_assoc(("||",), self.xor)

    def xor(self):
        return self._left_assoc(("^",), self.and_)

    def and_(self):
        return self._left_assoc(("&&",), self.not_)

    def not_(self):
        pos = self.tok[2]
        if self.accept("!"):
            arg = self.not_()
            if arg.type != BOOL:
                raise TypeCheckError(f"operand of '!' must be boolean at position {pos}")
            return not_(arg)
        return self.cmp()

    def cmp(self):
        left = self.add()
        pos = self.tok[2]
        op = self.accept(*COMPARE_OPS)
        if op is None:
            return left
        return self.build(op, left, self.add(), pos)

    def add(self):
        return self._left_assoc(("+", "-"), self.mul)

    def mul(self):
        return self._left_assoc(("*", "/", "%"), self.neg)

    def neg(self):
        pos = self.tok[2]
        if self.accept("-"):
            return self.build("-", const(0), self.neg(), pos)
        return self.atom()

    def atom(self):
        kind, value, pos = self.tok
        if kind == "num":
            self.i += 1
            v = float(value)
            if not math.isfinite(v):
                raise ParseError(f"number out of range {value!r}", self.text, pos)
            return const(v)
        if kind == "ident":
            self.i += 1
            if value == "true":
                return TRUE
            if value == "false":
                return FALSE
            if value not in self.sig:
                raise UnknownIdentifier(f"unknown identifier {value!r} at position {pos}")
            return var(value, self.sig.type_of(value))
        if self.accept("("):
            e = self.implies()
            if not self.accept(")"):
                self.fail("expected ')'")
            return e
        if kind == "end":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {value!r}")


def parse(text: str, sig: Signature, *, boolean: bool = True) -> Expr:
    """Parse assertion text over ``sig``.

    Raises :class:`ParseError`, :class:`UnknownIdentifier` or
    :class:`TypeCheckError`. With ``boolean`` set (the default) the root must
    be boolean-typed.
    """
    e = _Parser(text, sig).parse()
    if boolean and e.type != BOOL:
        raise TypeCheckError("assertion must be boolean-typed")
    return e


# --------------------------------------------------------------------------
# evaluation

def evaluate(e: Expr, state: Mapping[str, object], sig: Signature | None = None,
             digits: int = 9) -> bool:
    """Evaluate ``e`` on one state; raises :class:`EvalError` on x/0 or x%0.

    Unbound variables raise ``KeyError`` before any evaluation happens.
    """
    from . import kernel

    names = sorted(variables_of(e)) if sig is None else sig.names
    missing = [n for n in variables_of(e) if n not in state]
    if missing:
        raise KeyError(f"unbound variables: {', '.join(sorted(missing))}")
    if sig is None:
        sig = Signature([(n, BOOL if isinstance(state[n], bool) else NUM) for n in names])
    row = [[float(state[n]) if n in state else 0.0 for n in sig.names]]
    outcome = kernel.run(kernel.compile_expr(e, sig), row, digits)[0]
    if outcome == kernel.ERROR:
        raise EvalError("division or modulo by zero")
    return bool(outcome == kernel.PASS)
