"""Finite-domain first-order logic over named sorts and total function tables.

Predicates are the special case of functions whose image is the two-element
boolean domain.  Structures are Interpretations (a tuple of tables); point
endomorphisms rewrite one table cell, and macro endomorphisms group several
point updates into one atomic, coarser-grained change (colour changes, edge
changes, displacements).

Formula text syntax: ``forall x in A (...)``, ``exists x in A (...)``,
connectives ``! & | ->``, comparisons ``= != < <= > >=``, application
``f(x,y)`` and the sugar ``x.f`` for ``f(x)``.  A quantifier's body extends
as far right as possible; parenthesize to limit its scope.
"""

from __future__ import annotations

import itertools
import json
import re
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Any, Optional

from .core import Endomorphism
from .errors import (
    EvalError,
    IllDefinedTransformationError,
    ParseError,
    SchemaError,
    SortMismatchError,
    UnboundVariableError,
    UnknownCellError,
)

Atom = Any  # sort elements: ints, strings, or bools

BOOL_IMAGE = "bool"


def atom_str(value: Atom) -> str:
    if isinstance(value, bool):
        return "T" if value else "F"
    return str(value)


# --------------------------------------------------------------------------
# Structures


@dataclass(frozen=True)
class Sort:
    """A named finite element set; list order doubles as the sort's order.

    Open sorts skip image-membership validation, for domains (pixel values)
    where writes may introduce values observed only after a repair.
    """

    name: str
    elements: tuple[Atom, ...]
    open: bool = False

    def __post_init__(self) -> None:
        if len(set(self.elements)) != len(self.elements):
            raise SchemaError(f"sort {self.name!r} has duplicate elements")

    def __contains__(self, value: Atom) -> bool:
        return value in self.elements

    def index(self, value: Atom) -> int:
        return self.elements.index(value)


class FunctionTable:
    """A total map from an argument-sort product to an image sort."""

    __slots__ = ("name", "arg_sorts", "image", "table")

    def __init__(
        self,
        name: str,
        arg_sorts: Sequence[str],
        image: str,
        table: Mapping[tuple[Atom, ...], Atom],
    ):
        self.name = name
        self.arg_sorts = tuple(arg_sorts)
        self.image = image
        self.table = dict(table)

    @property
    def is_predicate(self) -> bool:
        return self.image == BOOL_IMAGE

    def value(self, args: tuple[Atom, ...]) -> Atom:
        try:
            return self.table[args]
        except KeyError:
            raise SortMismatchError(
                f"{self.name}{args!r} is outside the function's domain"
            ) from None

    def replace(self, args: tuple[Atom, ...], value: Atom) -> "FunctionTable":
        patched = dict(self.table)
        patched[args] = value
        return FunctionTable(self.name, self.arg_sorts, self.image, patched)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, FunctionTable)
            and self.name == other.name
            and self.arg_sorts == other.arg_sorts
            and self.image == other.image
            and self.table == other.table
        )

    def __repr__(self) -> str:
        args = ", ".join(self.arg_sorts)
        return f"<FunctionTable {self.name}: ({args}) -> {self.image}, {len(self.table)} rows>"


class Interpretation:
    """Named sorts plus total function tables: one finite structure."""

    __slots__ = ("sorts", "functions")

    def __init__(self, sorts: Mapping[str, Sort], functions: Mapping[str, FunctionTable]):
        self.sorts = dict(sorts)
        self.functions = dict(functions)
        self._validate()

    def _validate(self) -> None:
        for fn in self.functions.values():
            for sort_name in fn.arg_sorts:
                if sort_name not in self.sorts:
                    raise SchemaError(
                        f"function {fn.name!r} uses undeclared sort {sort_name!r}"
                    )
            if fn.image != BOOL_IMAGE and fn.image not in self.sorts:
                raise SchemaError(
                    f"function {fn.name!r} uses undeclared image sort {fn.image!r}"
                )
            domain = [self.sorts[s].elements for s in fn.arg_sorts]
            expected = set(itertools.product(*domain))
            actual = set(fn.table)
            if actual != expected:
                missing = expected - actual
                extra = actual - expected
                detail = []
                if missing:
                    detail.append(f"{len(missing)} missing rows (e.g. {sorted(missing, key=repr)[0]})")
                if extra:
                    detail.append(f"{len(extra)} rows outside the domain (e.g. {sorted(extra, key=repr)[0]})")
                raise SchemaError(
                    f"function {fn.name!r} is not total over its domain: " + "; ".join(detail)
                )
            self._check_image_values(fn)

    def _check_image_values(self, fn: FunctionTable) -> None:
        if fn.image == BOOL_IMAGE:
            for args, value in fn.table.items():
                if not isinstance(value, bool):
                    raise SchemaError(
                        f"predicate {fn.name!r} has non-boolean value {value!r} at {args!r}"
                    )
        else:
            image_sort = self.sorts[fn.image]
            if image_sort.open:
                return
            for args, value in fn.table.items():
                if value not in image_sort:
                    raise SchemaError(
                        f"function {fn.name!r} value {value!r} at {args!r} "
                        f"is not in sort {fn.image!r}"
                    )

    def value(self, function: str, args: tuple[Atom, ...]) -> Atom:
        try:
            fn = self.functions[function]
        except KeyError:
            raise EvalError(f"unknown function {function!r}") from None
        return fn.value(args)

    # Generic structure interface used by the repair engine.
    def cell_value(self, cell) -> Atom:
        function, args = cell
        return self.value(function, args)

    def with_cell(self, cell, value: Atom) -> "Interpretation":
        function, args = cell
        fn = self.functions.get(function)
        if fn is None:
            raise UnknownCellError(f"no function {function!r} in interpretation")
        if args not in fn.table:
            raise UnknownCellError(f"{function}{args!r} is outside the table")
        if fn.image == BOOL_IMAGE:
            if not isinstance(value, bool):
                raise UnknownCellError(f"predicate {function!r} takes boolean values")
        else:
            image_sort = self.sorts[fn.image]
            if not image_sort.open and value not in image_sort:
                raise UnknownCellError(
                    f"value {value!r} is not in sort {fn.image!r} for function {function!r}"
                )
        patched = dict(self.functions)
        patched[function] = fn.replace(args, value)
        clone = Interpretation.__new__(Interpretation)
        clone.sorts = self.sorts
        clone.functions = patched
        return clone

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Interpretation)
            and self.sorts == other.sorts
            and self.functions == other.functions
        )

    def __repr__(self) -> str:
        return (
            f"<Interpretation sorts={sorted(self.sorts)} "
            f"functions={sorted(self.functions)}>"
        )


# --------------------------------------------------------------------------
# Formulas and terms


@dataclass(frozen=True)
class TVar:
    name: str


@dataclass(frozen=True)
class TConst:
    value: Atom


@dataclass(frozen=True)
class TApp:
    function: str
    args: tuple["Term", ...]


Term = TVar | TConst | TApp


@dataclass(frozen=True)
class Forall:
    var: str
    sort: str
    body: "FolFormula"


@dataclass(frozen=True)
class Exists:
    var: str
    sort: str
    body: "FolFormula"


@dataclass(frozen=True)
class Not:
    operand: "FolFormula"


@dataclass(frozen=True)
class And:
    left: "FolFormula"
    right: "FolFormula"


@dataclass(frozen=True)
class Or:
    left: "FolFormula"
    right: "FolFormula"


@dataclass(frozen=True)
class Implies:
    left: "FolFormula"
    right: "FolFormula"


@dataclass(frozen=True)
class Cmp:
    op: str  # = != < <= > >=
    left: Term
    right: Term


@dataclass(frozen=True)
class Holds:
    """A bare boolean-valued term used as an atom, e.g. p(x,y)."""

    term: Term


FolFormula = Forall | Exists | Not | And | Or | Implies | Cmp | Holds

_ORDER_OPS = {"<", "<=", ">", ">="}


def _resolve_identifier(name: str, interp: Interpretation, env: Mapping[str, Atom]) -> Atom:
    if name in env:
        return env[name]
    for sort in interp.sorts.values():
        if name in sort.elements:
            return name
    raise UnboundVariableError(f"unbound variable {name!r}")


def _eval_term(term: Term, interp: Interpretation, env: Mapping[str, Atom]) -> Atom:
    if isinstance(term, TVar):
        return _resolve_identifier(term.name, interp, env)
    if isinstance(term, TConst):
        return term.value
    if isinstance(term, TApp):
        args = tuple(_eval_term(a, interp, env) for a in term.args)
        return interp.value(term.function, args)
    raise TypeError(f"not a term: {term!r}")


def _compare(op: str, left: Atom, right: Atom, interp: Interpretation) -> bool:
    if op == "=":
        return left == right
    if op == "!=":
        return left != right
    if op in _ORDER_OPS:
        if type(left) is int and type(right) is int:
            a, b = left, right
        else:
            common = next(
                (s for s in interp.sorts.values() if left in s and right in s),
                None,
            )
            if common is None:
                raise SortMismatchError(
                    f"cannot order {left!r} and {right!r}: no common ordered sort"
                )
            a, b = common.index(left), common.index(right)
        if op == "<":
            return a < b
        if op == "<=":
            return a <= b
        if op == ">":
            return a > b
        return a >= b
    raise EvalError(f"unknown comparison operator {op!r}")


def eval_fol(
    formula: FolFormula,
    interp: Interpretation,
    env: Optional[Mapping[str, Atom]] = None,
) -> bool:
    """Evaluate a closed (or env-bound) formula against an interpretation.

    Quantifiers expand over their sort's elements; the empty sort makes a
    universal vacuously true and an existential false.
    """
    env = env or {}
    if isinstance(formula, Forall):
        sort = interp.sorts.get(formula.sort)
        if sort is None:
            raise EvalError(f"unknown sort {formula.sort!r}")
        return all(
            eval_fol(formula.body, interp, {**env, formula.var: el})
            for el in sort.elements
        )
    if isinstance(formula, Exists):
        sort = interp.sorts.get(formula.sort)
        if sort is None:
            raise EvalError(f"unknown sort {formula.sort!r}")
        return any(
            eval_fol(formula.body, interp, {**env, formula.var: el})
            for el in sort.elements
        )
    if isinstance(formula, Not):
        return not eval_fol(formula.operand, interp, env)
    if isinstance(formula, And):
        return eval_fol(formula.left, interp, env) and eval_fol(formula.right, interp, env)
    if isinstance(formula, Or):
        return eval_fol(formula.left, interp, env) or eval_fol(formula.right, interp, env)
    if isinstance(formula, Implies):
        return (not eval_fol(formula.left, interp, env)) or eval_fol(
            formula.right, interp, env
        )
    if isinstance(formula, Cmp):
        left = _eval_term(formula.left, interp, env)
        right = _eval_term(formula.right, interp, env)
        return _compare(formula.op, left, right, interp)
    if isinstance(formula, Holds):
        value = _eval_term(formula.term, interp, env)
        if not isinstance(value, bool):
            raise SortMismatchError(
                f"term {formula.term!r} is used as an atom but has value {value!r}"
            )
        return value
    raise TypeError(f"not a formula: {formula!r}")


# --------------------------------------------------------------------------
# Endomorphisms


class PointUpdate(Endomorphism):
    """Rewrite a single table cell: one function, one argument tuple."""

    def __init__(self, function: str, args: tuple[Atom, ...], value: Atom):
        self.function = function
        self.args = tuple(args)
        self.value = value
        rendered = ",".join(atom_str(a) for a in self.args)
        self.key = f"{function}({rendered}):={atom_str(value)}"

    @property
    def writes(self):
        return (((self.function, self.args), self.value),)


class MacroEndomorphism(Endomorphism):
    """A named atomic group of point updates with disjoint footprints."""

    def __init__(self, name: str, members: Iterable[PointUpdate]):
        members = tuple(sorted(members, key=lambda m: m.key))
        seen: set = set()
        for m in members:
            for cell, _ in m.writes:
                if cell in seen:
                    raise IllDefinedTransformationError(
                        f"macro {name!r} has overlapping member footprints at {cell!r}"
                    )
                seen.add(cell)
        self.name = name
        self.members = members
        self.key = f"{name}[{'|'.join(m.key for m in members)}]"

    @property
    def writes(self):
        return tuple(w for m in self.members for w in m.writes)


def macro_endo(name: str, updates: Iterable[PointUpdate]) -> MacroEndomorphism:
    """Bundle point updates into one atomic endomorphism."""
    return MacroEndomorphism(name, updates)


def fol_endo_pool(
    interp: Interpretation,
    functions: Optional[Iterable[str]] = None,
) -> list[PointUpdate]:
    """One point update per (function, argument tuple, image value).

    For a k-ary predicate over an n-element sort this contributes 2*n^k
    endomorphisms.  ``functions`` restricts the pool to the named tables
    (an empty iterable yields an empty pool).
    """
    if functions is None:
        names = sorted(interp.functions)
    else:
        names = sorted(functions)
    pool: list[PointUpdate] = []
    for name in names:
        fn = interp.functions.get(name)
        if fn is None:
            raise EvalError(f"unknown function {name!r}")
        if fn.image == BOOL_IMAGE:
            image_values: tuple[Atom, ...] = (True, False)
        else:
            image_values = interp.sorts[fn.image].elements
        domain = [interp.sorts[s].elements for s in fn.arg_sorts]
        for args in itertools.product(*domain):
            for value in image_values:
                pool.append(PointUpdate(name, args, value))
    return pool


def colour_change_pool(
    vertices: Sort,
    colour_preds: Sequence[str],
) -> list[MacroEndomorphism]:
    """Per vertex and colour: set that colour, clear the two others."""
    if len(colour_preds) != 3:
        raise ValueError("colour_change_pool needs exactly three colour predicates")
    pool = []
    for x in vertices.elements:
        for i, chosen in enumerate(colour_preds):
            updates = [PointUpdate(chosen, (x,), True)]
            for j, other in enumerate(colour_preds):
                if j != i:
                    updates.append(PointUpdate(other, (x,), False))
            pool.append(MacroEndomorphism(f"colour({atom_str(x)}):={chosen}", updates))
    return pool


def edge_change_pool(vertices: Sort, adjacency: str) -> list[MacroEndomorphism]:
    """Per unordered vertex pair and truth value: set both directions at once.

    Diagonal pairs produce singleton macros.
    """
    pool = []
    elements = vertices.elements
    for i, x in enumerate(elements):
        for y in elements[i:]:
            for b in (True, False):
                updates = [PointUpdate(adjacency, (x, y), b)]
                if x != y:
                    updates.append(PointUpdate(adjacency, (y, x), b))
                name = f"edge({atom_str(x)},{atom_str(y)}):={atom_str(b)}"
                pool.append(MacroEndomorphism(name, updates))
    return pool


# --------------------------------------------------------------------------
# Text syntax

_KEYWORDS = {"forall", "exists", "in", "true", "false"}

_FOL_TOKEN_RE = re.compile(
    r"(->|!=|<=|>=|[!&|()=<>,.]|\d+|[A-Za-z_][A-Za-z0-9_]*)"
)


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize_fol(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line = 1
    line_start = 0
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        match = _FOL_TOKEN_RE.match(text, pos)
        if match is None:
            raise ParseError(
                f"unexpected character {ch!r}", line=line, column=pos - line_start + 1
            )
        tokens.append(_Token(match.group(1), line, match.start(1) - line_start + 1))
        pos = match.end()
    return tokens


class _FolParser:
    def __init__(self, text: str):
        self.tokens = _tokenize_fol(text)
        self.pos = 0

    def peek(self) -> Optional[str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos].text
        return None

    def advance(self) -> str:
        token = self.tokens[self.pos]
        self.pos += 1
        return token.text

    def expect(self, text: str) -> None:
        if self.peek() != text:
            raise self.error(f"expected {text!r}")
        self.advance()

    def error(self, message: str) -> ParseError:
        if self.pos < len(self.tokens):
            tok = self.tokens[self.pos]
            return ParseError(f"{message}, got {tok.text!r}", tok.line, tok.column)
        last = self.tokens[-1] if self.tokens else None
        line = last.line if last else 1
        col = (last.column + len(last.text)) if last else 1
        return ParseError(f"{message} at end of input", line, col)

    def parse(self) -> FolFormula:
        formula = self.formula()
        if self.peek() is not None:
            raise self.error("unexpected trailing input")
        return formula

    def formula(self) -> FolFormula:
        left = self.disjunction()
        if self.peek() == "->":
            self.advance()
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> FolFormula:
        node = self.conjunction()
        while self.peek() == "|":
            self.advance()
            node = Or(node, self.conjunction())
        return node

    def conjunction(self) -> FolFormula:
        node = self.unary()
        while self.peek() == "&":
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> FolFormula:
        token = self.peek()
        if token == "!":
            self.advance()
            return Not(self.unary())
        if token in ("forall", "exists"):
            kind = self.advance()
            var = self.identifier("quantified variable")
            if var in _KEYWORDS:
                raise self.error(f"{var!r} is reserved")
            self.expect("in")
            sort = self.identifier("sort name")
            body = self.formula()
            return Forall(var, sort, body) if kind == "forall" else Exists(var, sort, body)
        return self.atom()

    def identifier(self, what: str) -> str:
        token = self.peek()
        if token is None or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            raise self.error(f"expected {what}")
        return self.advance()

    def atom(self) -> FolFormula:
        if self.peek() == "(":
            self.advance()
            node = self.formula()
            self.expect(")")
            return node
        left = self.term()
        op = self.peek()
        if op in ("=", "!=", "<", "<=", ">", ">="):
            self.advance()
            right = self.term()
            return Cmp(op, left, right)
        return Holds(left)

    def term(self) -> Term:
        token = self.peek()
        if token is None:
            raise self.error("expected a term")
        if token.isdigit():
            self.advance()
            node: Term = TConst(int(token))
        elif token == "true":
            self.advance()
            node = TConst(True)
        elif token == "false":
            self.advance()
            node = TConst(False)
        elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            name = self.advance()
            if name in _KEYWORDS:
                raise self.error(f"{name!r} is reserved")
            if self.peek() == "(":
                self.advance()
                args = [self.term()]
                while self.peek() == ",":
                    self.advance()
                    args.append(self.term())
                self.expect(")")
                node = TApp(name, tuple(args))
            else:
                node = TVar(name)
        else:
            raise self.error("expected a term")
        while self.peek() == ".":
            self.advance()
            fn = self.identifier("function name after '.'")
            node = TApp(fn, (node,))
        return node


def parse_fol(text: str) -> FolFormula:
    """Parse formula text into an AST."""
    return _FolParser(text).parse()


# --------------------------------------------------------------------------
# Instance files


def load_instance(source: str | bytes | Mapping) -> tuple[Interpretation, Optional[FolFormula]]:
    """Build an interpretation (and optional formula) from the JSON shape.

    ``{"sorts": {name: [elements]}, "functions": [{"name", "args", "image",
    "table"}], "formula": text}``.  Table rows are ``[arg..., value]``;
    unlisted rows default to false for predicates and are an error for
    non-predicate functions.
    """
    if isinstance(source, (str, bytes)):
        try:
            data = json.loads(source)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    else:
        data = source
    if not isinstance(data, Mapping):
        raise SchemaError("instance must be a JSON object")
    raw_sorts = data.get("sorts")
    if not isinstance(raw_sorts, Mapping):
        raise SchemaError("missing or invalid 'sorts' object", path="sorts")
    sorts: dict[str, Sort] = {}
    for name, elements in raw_sorts.items():
        if not isinstance(elements, list):
            raise SchemaError("sort elements must be a list", path=f"sorts.{name}")
        sorts[name] = Sort(name, tuple(elements))
    raw_functions = data.get("functions")
    if not isinstance(raw_functions, list):
        raise SchemaError("missing or invalid 'functions' list", path="functions")
    functions: dict[str, FunctionTable] = {}
    for idx, raw in enumerate(raw_functions):
        path = f"functions[{idx}]"
        if not isinstance(raw, Mapping):
            raise SchemaError("function entry must be an object", path=path)
        name = raw.get("name")
        if not isinstance(name, str) or not name:
            raise SchemaError("function needs a non-empty 'name'", path=path)
        if name in functions:
            raise SchemaError(f"duplicate function {name!r}", path=path)
        args = raw.get("args")
        if not isinstance(args, list) or not all(isinstance(a, str) for a in args):
            raise SchemaError("'args' must be a list of sort names", path=path)
        image = raw.get("image", BOOL_IMAGE)
        if not isinstance(image, str):
            raise SchemaError("'image' must be a sort name or 'bool'", path=path)
        for sort_name in args:
            if sort_name not in sorts:
                raise SchemaError(f"unknown sort {sort_name!r}", path=path)
        if image != BOOL_IMAGE and image not in sorts:
            raise SchemaError(f"unknown image sort {image!r}", path=path)
        rows = raw.get("table", [])
        if not isinstance(rows, list):
            raise SchemaError("'table' must be a list of rows", path=path)
        table: dict[tuple[Atom, ...], Atom] = {}
        arity = len(args)
        for ridx, row in enumerate(rows):
            rpath = f"{path}.table[{ridx}]"
            if not isinstance(row, list) or len(row) != arity + 1:
                raise SchemaError(
                    f"row must be a list of {arity} argument(s) plus a value", path=rpath
                )
            key = tuple(row[:arity])
            for pos, (sort_name, value) in enumerate(zip(args, key)):
                if value not in sorts[sort_name].elements:
                    raise SchemaError(
                        f"argument {value!r} (position {pos}) not in sort {sort_name!r}",
                        path=rpath,
                    )
            if key in table:
                raise SchemaError(f"duplicate row for arguments {key!r}", path=rpath)
            table[key] = row[arity]
        domain = [sorts[s].elements for s in args]
        for key in itertools.product(*domain):
            if key not in table:
                if image == BOOL_IMAGE:
                    table[key] = False
                else:
                    raise SchemaError(
                        f"function {name!r} is missing a row for {key!r} "
                        "(non-predicate tables must be total)",
                        path=path,
                    )
        functions[name] = FunctionTable(name, args, image, table)
    interp = Interpretation(sorts, functions)
    formula_text = data.get("formula")
    formula = None
    if formula_text is not None:
        if not isinstance(formula_text, str):
            raise SchemaError("'formula' must be a string", path="formula")
        formula = parse_fol(formula_text)
    return interp, formula
