"""
Recursive descent compiler for nonlinearity expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := base ('^' factor)?
    base   := number | 'u' | '(' expr ')' | func '(' expr ')' | '-' base
    func   := exp | log | sin | cos | sqrt

The result is a vectorised numpy evaluator of the single variable u.
"""
import re

import numpy as np

from src.errors import ExpressionSyntaxError

FUNCTIONS = {
    "exp": np.exp,
    "log": np.log,
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}

_TOKEN = re.compile(
    r"\s*(?:(?P<number>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*/^()]))"
)


def tokenize(text):
    """
    Splits an expression into (kind, value, position) tokens.

    Raises:
        ExpressionSyntaxError: An unknown character is found.
    """
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        match = _TOKEN.match(text, pos)
        if match is None:
            offset = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionSyntaxError(f"unexpected character {text[offset]!r}", offset)
        kind = match.lastgroup
        start = match.start(kind)
        tokens.append((kind, match.group(kind), start))
        pos = match.end()
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.index = 0

    @property
    def current(self):
        return self.tokens[self.index]

    def advance(self):
        token = self.current
        self.index += 1
        return token

    def expect(self, value):
        kind, text, pos = self.current
        if text != value:
            found = "end of input" if kind == "end" else repr(text)
            raise ExpressionSyntaxError(f"expected {value!r}, found {found}", pos)
        return self.advance()

    def parse(self):
        node = self.expr()
        kind, text, pos = self.current
        if kind != "end":
            raise ExpressionSyntaxError(f"unexpected token {text!r}", pos)
        return node

    def expr(self):
        node = self.term()
        while self.current[1] in ("+", "-"):
            op = self.advance()[1]
            rhs = self.term()
            node = _binary(np.add if op == "+" else np.subtract, node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.current[1] in ("*", "/"):
            op = self.advance()[1]
            rhs = self.factor()
            node = _binary(np.multiply if op == "*" else np.divide, node, rhs)
        return node

    def factor(self):
        node = self.base()
        if self.current[1] == "^":
            self.advance()
            exponent = self.factor()
            node = _binary(np.power, node, exponent)
        return node

    def base(self):
        kind, text, pos = self.current
        if kind == "number":
            self.advance()
            value = float(text)
            return lambda u: np.full_like(u, value)
        if kind == "name":
            self.advance()
            if text == "u":
                return lambda u: u
            if text in FUNCTIONS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                func = FUNCTIONS[text]
                return lambda u: func(inner(u))
            raise ExpressionSyntaxError(f"unknown name {text!r}", pos)
        if text == "(":
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        if text == "-":
            self.advance()
            inner = self.base()
            return lambda u: np.negative(inner(u))
        found = "end of input" if kind == "end" else repr(text)
        raise ExpressionSyntaxError(f"expected a number, 'u', a function or '(', found {found}", pos)


def _binary(op, lhs, rhs):
    return lambda u: op(lhs(u), rhs(u))


def compile_expression(text):
    """
    Compiles an expression in u into a numpy evaluator.

    Args:
        text (str): Expression source, e.g. "u^2*(1+sin(u))".

    Returns:
        callable: Evaluator accepting scalars or arrays and returning float arrays.

    Raises:
        ExpressionSyntaxError: The text does not match the grammar; carries the offset.
    """
    node = _Parser(text).parse()

    def evaluate(u):
        u = np.asarray(u, dtype=float)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            result = np.asarray(node(u), dtype=float)
        return result if result.ndim else float(result)

    evaluate.source = text
    return evaluate
