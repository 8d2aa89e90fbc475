"""Propositional instantiation: valuations, variable flips, formula evaluation.

Formula text syntax (used by the CLI): variables are identifiers, operators
are ``!`` (not), ``&`` (and), ``|`` (or), ``->`` (implies, right
associative), plus parentheses, with precedence ``!`` > ``&`` > ``|`` >
``->``.
"""

from __future__ import annotations

import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass

from .core import Endomorphism
from .errors import ParseError, UnboundVariableError, UnknownCellError

# --------------------------------------------------------------------------
# Structures


class Valuation:
    """A total map from a fixed variable set to truth values."""

    __slots__ = ("_assignment",)

    def __init__(self, assignment: Mapping[str, bool]):
        self._assignment = dict(assignment)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(self._assignment)

    def value(self, variable: str) -> bool:
        try:
            return self._assignment[variable]
        except KeyError:
            raise UnboundVariableError(f"variable {variable!r} not in valuation") from None

    def __getitem__(self, variable: str) -> bool:
        return self.value(variable)

    # Generic structure interface used by the repair engine.
    def cell_value(self, cell) -> bool:
        return self.value(cell)

    def with_cell(self, cell, value: bool) -> "Valuation":
        if cell not in self._assignment:
            raise UnknownCellError(f"valuation has no variable {cell!r}")
        patched = dict(self._assignment)
        patched[cell] = bool(value)
        return Valuation(patched)

    def as_dict(self) -> dict[str, bool]:
        return dict(self._assignment)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Valuation) and self._assignment == other._assignment

    def __hash__(self) -> int:
        return hash(frozenset(self._assignment.items()))

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{k}={'T' if v else 'F'}" for k, v in sorted(self._assignment.items())
        )
        return f"Valuation({inner})"


# --------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "PropFormula"


@dataclass(frozen=True)
class And:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class Or:
    left: "PropFormula"
    right: "PropFormula"


@dataclass(frozen=True)
class Implies:
    left: "PropFormula"
    right: "PropFormula"


PropFormula = Var | Not | And | Or | Implies


def variables_of(formula: PropFormula) -> frozenset[str]:
    if isinstance(formula, Var):
        return frozenset((formula.name,))
    if isinstance(formula, Not):
        return variables_of(formula.operand)
    return variables_of(formula.left) | variables_of(formula.right)


def eval_prop(formula: PropFormula, valuation: Valuation) -> bool:
    """Standard truth-table semantics."""
    if isinstance(formula, Var):
        return valuation.value(formula.name)
    if isinstance(formula, Not):
        return not eval_prop(formula.operand, valuation)
    if isinstance(formula, And):
        return eval_prop(formula.left, valuation) and eval_prop(formula.right, valuation)
    if isinstance(formula, Or):
        return eval_prop(formula.left, valuation) or eval_prop(formula.right, valuation)
    if isinstance(formula, Implies):
        return (not eval_prop(formula.left, valuation)) or eval_prop(formula.right, valuation)
    raise TypeError(f"not a propositional formula: {formula!r}")


# --------------------------------------------------------------------------
# Endomorphisms


class VarFlip(Endomorphism):
    """Set one variable to a fixed truth value, leaving the rest unchanged."""

    def __init__(self, variable: str, value: bool):
        self.variable = variable
        self.value = bool(value)
        self.key = f"{variable}:={'T' if value else 'F'}"

    @property
    def writes(self):
        return ((self.variable, self.value),)


def prop_endo_pool(variables: Iterable[str]) -> list[VarFlip]:
    """Both flips for every variable: 2 * |X| endomorphisms."""
    pool = []
    for var in sorted(set(variables)):
        pool.append(VarFlip(var, True))
        pool.append(VarFlip(var, False))
    return pool


# --------------------------------------------------------------------------
# Parser

_TOKEN_RE = re.compile(r"\s*(->|[!&|()]|[A-Za-z_][A-Za-z0-9_]*)")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens: list[tuple[str, int]] = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None or not match.group(1):
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = len(text) - len(stripped) + 1
            raise ParseError(f"unexpected character {stripped[0]!r}", line=1, column=col)
        tokens.append((match.group(1), match.start(1) + 1))
        pos = match.end()
    return tokens


class _PropParser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    def peek(self) -> str | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def advance(self) -> str:
        token, _ = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str) -> ParseError:
        col = self.tokens[self.pos][1] if self.pos < len(self.tokens) else len(self.tokens) + 1
        return ParseError(message, line=1, column=col)

    def parse(self) -> PropFormula:
        formula = self.implies()
        if self.peek() is not None:
            raise self.error(f"unexpected token {self.peek()!r}")
        return formula

    def implies(self) -> PropFormula:
        left = self.disjunction()
        if self.peek() == "->":
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> PropFormula:
        node = self.conjunction()
        while self.peek() == "|":
            self.advance()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> PropFormula:
        node = self.unary()
        while self.peek() == "&":
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> PropFormula:
        token = self.peek()
        if token == "!":
            self.advance()
            return Not(self.unary())
        if token == "(":
            self.advance()
            node = self.implies()
            if self.peek() != ")":
                raise self.error("expected ')'")
            self.advance()
            return node
        if token is None:
            raise self.error("unexpected end of formula")
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            self.advance()
            return Var(token)
        raise self.error(f"unexpected token {token!r}")


def parse_prop(text: str) -> PropFormula:
    """Parse formula text into an AST."""
    return _PropParser(text).parse()
