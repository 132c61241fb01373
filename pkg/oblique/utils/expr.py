"""Scalar expression language for coefficients given in scenario files.

Grammar, lowest to highest precedence::

    expr    := term (('+' | '-') term)*
    term    := power (('*' | '/') power)*
    power   := unary ('^' power)?          # right associative
    unary   := '-' unary | atom
    atom    := NUMBER | NAME | NAME '(' args ')' | '(' expr ')'

Unary minus binds tighter than ``^``, so ``-2^2`` is 4; write ``-(t^2)`` or
``-1*t^2`` for the negated power. A minus directly on a literal folds into the
literal, so ``-2`` parses to the number -2.0.
"""

import logging
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, FrozenSet, Iterable, List, Mapping, Tuple, Union

from oblique.core.errors import EvaluationError, ExpressionSyntaxError


logger = logging.getLogger(__name__)

INTEGER_EXPONENT_TOL = 1e-12


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Node", ...]


Node = Union[Num, Var, Neg, BinOp, Call]


def _checked(fn: Callable[..., float]) -> Callable[..., float]:
    def wrapper(*args: float) -> float:
        try:
            return fn(*args)
        except OverflowError:
            return math.inf

    wrapper.__name__ = fn.__name__
    return wrapper


def _log(x: float) -> float:
    if x <= 0.0:
        raise EvaluationError(f"log of non-positive value {x!r}")
    return math.log(x)


def _sqrt(x: float) -> float:
    if x < 0.0:
        raise EvaluationError(f"sqrt of negative value {x!r}")
    return math.sqrt(x)


def real_power(base: float, exponent: float) -> float:
    """Real power; negative bases need an integer exponent."""
    if base == 0.0 and exponent < 0.0:
        raise EvaluationError("0 raised to a negative power")
    if base < 0.0:
        k = round(exponent)
        if abs(exponent - k) > INTEGER_EXPONENT_TOL:
            raise EvaluationError(
                f"negative base {base!r} with non-integer exponent {exponent!r}"
            )
        try:
            return base**k
        except OverflowError:
            return -math.inf if k % 2 else math.inf
    try:
        return base**exponent
    except OverflowError:
        return math.inf


def _divide(a: float, b: float) -> float:
    if b == 0.0:
        raise EvaluationError("division by zero")
    return a / b


BUILTINS: Dict[str, Tuple[int, Callable[..., float]]] = {
    "exp": (1, _checked(math.exp)),
    "log": (1, _log),
    "abs": (1, abs),
    "sqrt": (1, _sqrt),
    "min": (2, min),
    "max": (2, max),
    "pow": (2, real_power),
}

_BINARY: Dict[str, Callable[[float, float], float]] = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
    "/": _divide,
    "^": real_power,
}

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^(),−])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def _byte_offset(src: str, index: int) -> int:
    return len(src[:index].encode("utf-8"))


def tokenize(src: str) -> List[Token]:
    tokens: List[Token] = []
    pos = 0
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ExpressionSyntaxError(
                f"unexpected character {src[pos]!r}", _byte_offset(src, pos)
            )
        kind = m.lastgroup
        if kind != "ws":
            text = "-" if m.group() == "−" else m.group()
            tokens.append(Token(kind, text, _byte_offset(src, pos)))
        pos = m.end()
    tokens.append(Token("end", "", _byte_offset(src, len(src))))
    return tokens


class _Parser:
    def __init__(self, src: str, allowed_vars: FrozenSet[str]):
        self.tokens = tokenize(src)
        self.allowed = allowed_vars
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _accept(self, text: str) -> bool:
        tok = self.current
        if tok.kind == "op" and tok.text == text:
            self.pos += 1
            return True
        return False

    def _expect(self, text: str) -> None:
        if not self._accept(text):
            tok = self.current
            found = tok.text or "end of input"
            raise ExpressionSyntaxError(f"expected {text!r}, found {found!r}", tok.offset)

    def parse(self) -> Node:
        node = self.expr()
        tok = self.current
        if tok.kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {tok.text!r}", tok.offset)
        return node

    def expr(self) -> Node:
        node = self.term()
        while self.current.kind == "op" and self.current.text in "+-":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.power()
        while self.current.kind == "op" and self.current.text in "*/":
            op = self.current.text
            self.pos += 1
            node = BinOp(op, node, self.power())
        return node

    def power(self) -> Node:
        base = self.unary()
        if self._accept("^"):
            return BinOp("^", base, self.power())
        return base

    def unary(self) -> Node:
        if self._accept("-"):
            operand = self.unary()
            if isinstance(operand, Num):
                return Num(-operand.value)
            return Neg(operand)
        return self.atom()

    def atom(self) -> Node:
        tok = self.current
        if tok.kind == "num":
            self.pos += 1
            value = float(tok.text)
            if not math.isfinite(value):
                raise ExpressionSyntaxError(f"numeric literal {tok.text!r} is out of range", tok.offset)
            return Num(value)
        if tok.kind == "name":
            self.pos += 1
            if self._accept("("):
                return self._call(tok)
            if tok.text not in self.allowed:
                raise ExpressionSyntaxError(f"unknown identifier {tok.text!r}", tok.offset)
            return Var(tok.text)
        if self._accept("("):
            node = self.expr()
            self._expect(")")
            return node
        found = tok.text or "end of input"
        raise ExpressionSyntaxError(f"unexpected {found!r}", tok.offset)

    def _call(self, name: Token) -> Node:
        if name.text not in BUILTINS:
            raise ExpressionSyntaxError(f"unknown function {name.text!r}", name.offset)
        args: List[Node] = []
        if not self._accept(")"):
            args.append(self.expr())
            while self._accept(","):
                args.append(self.expr())
            self._expect(")")
        arity = BUILTINS[name.text][0]
        if len(args) != arity:
            raise ExpressionSyntaxError(
                f"{name.text} expects {arity} argument(s), got {len(args)}", name.offset
            )
        return Call(name.text, tuple(args))


Env = Mapping[str, float]


def _compile(node: Node) -> Callable[[Env], float]:
    if isinstance(node, Num):
        value = node.value
        return lambda env: value
    if isinstance(node, Var):
        name = node.name

        def lookup(env: Env) -> float:
            try:
                return env[name]
            except KeyError:
                raise EvaluationError(f"no binding for variable {name!r}") from None

        return lookup
    if isinstance(node, Neg):
        inner = _compile(node.operand)
        return lambda env: -inner(env)
    if isinstance(node, BinOp):
        fn = _BINARY[node.op]
        left, right = _compile(node.left), _compile(node.right)
        return lambda env: fn(left(env), right(env))
    fn = BUILTINS[node.name][1]
    args = tuple(_compile(a) for a in node.args)
    if len(args) == 1:
        (only,) = args
        return lambda env: fn(only(env))
    first, second = args
    return lambda env: fn(first(env), second(env))


def _variables(node: Node) -> FrozenSet[str]:
    if isinstance(node, Var):
        return frozenset([node.name])
    if isinstance(node, Neg):
        return _variables(node.operand)
    if isinstance(node, BinOp):
        return _variables(node.left) | _variables(node.right)
    if isinstance(node, Call):
        return frozenset().union(*(_variables(a) for a in node.args))
    return frozenset()


def to_source(node: Node) -> str:
    """Print fully parenthesized source that parses back to ``node``."""
    if isinstance(node, Num):
        return repr(float(node.value))
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Neg):
        return f"(-{to_source(node.operand)})"
    if isinstance(node, BinOp):
        return f"({to_source(node.left)} {node.op} {to_source(node.right)})"
    return f"{node.name}({', '.join(to_source(a) for a in node.args)})"


@dataclass(frozen=True)
class Expression:
    source: str
    ast: Node
    variables: FrozenSet[str]
    _fn: Callable[[Env], float] = field(repr=False, compare=False)

    def evaluate(self, bindings: Env) -> float:
        return float(self._fn(bindings))

    def bind(self, *names: str) -> Callable[..., float]:
        """Positional callable, e.g. ``bind("t", "v")(2.0, 1.0)``."""
        fn = self._fn

        def call(*values: float) -> float:
            return float(fn(dict(zip(names, values))))

        return call

    def __str__(self) -> str:
        return to_source(self.ast)


def parse(src: str, allowed_vars: Iterable[str]) -> Expression:
    if not src or not src.strip():
        raise ExpressionSyntaxError("empty expression", 0)
    allowed = frozenset(allowed_vars)
    ast = _Parser(src, allowed).parse()
    return Expression(src, ast, _variables(ast), _compile(ast))


def evaluate(e: Expression, bindings: Env) -> float:
    return e.evaluate(bindings)
