"""Web-layout domain: snapshots, selectors, the assertion DSL, and verdicts.

A snapshot is a tree of elements with integer pixel boxes (left/top/width/
height stored; right/bottom derived, which makes "move preserves size"
structural).  Assertions are written in an English-like DSL::

    For each $x in $(#menu li) (
      For each $y in $(#menu li) (
        $x's left equals $y's left
      )
    ).

Evaluation produces a three-valued verdict carrying two witness forests, one
explaining truth and one explaining falsehood.  For repair search, a snapshot
plus an assertion translate into a finite first-order interpretation (tables
left/right/top/bottom/width/height over the matched elements) so the generic
engine and its pools apply unchanged.
"""

from __future__ import annotations

import json
import math
import re
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from enum import Enum
from typing import Any, Optional, Union

from . import fol
from .core import Transformation, is_well_defined
from .errors import (
    EvalError,
    IllDefinedTransformationError,
    ParseError,
    SchemaError,
    UnboundVariableError,
)

ATTRIBUTES = ("left", "right", "top", "bottom", "width", "height")


# --------------------------------------------------------------------------
# Snapshots


@dataclass(frozen=True)
class Box:
    left: int
    top: int
    width: int
    height: int

    @property
    def right(self) -> int:
        return self.left + self.width

    @property
    def bottom(self) -> int:
        return self.top + self.height


@dataclass(frozen=True)
class ElementNode:
    elem_id: str
    tag: str
    id_attr: Optional[str]
    classes: frozenset[str]
    box: Box
    text: Optional[str]
    children: tuple["ElementNode", ...]

    def attr(self, name: str) -> int:
        if name not in ATTRIBUTES:
            raise EvalError(f"unknown element attribute {name!r}")
        return getattr(self.box, name)


class DomSnapshot:
    """An immutable element tree with a pre-order element index."""

    __slots__ = ("root", "meta", "_by_id", "_order")

    def __init__(self, root: ElementNode, meta: Optional[Mapping[str, Any]] = None):
        self.root = root
        self.meta = dict(meta or {})
        order: list[ElementNode] = []
        stack = [root]
        while stack:
            node = stack.pop()
            order.append(node)
            stack.extend(reversed(node.children))
        self._order = tuple(order)
        self._by_id = {node.elem_id: node for node in order}
        if len(self._by_id) != len(order):
            raise SchemaError("duplicate element ids in snapshot")

    def nodes(self) -> tuple[ElementNode, ...]:
        """All elements in document (pre-order) order."""
        return self._order

    def element(self, elem_id: str) -> ElementNode:
        try:
            return self._by_id[elem_id]
        except KeyError:
            raise SchemaError(f"no element with id {elem_id!r}") from None

    def __contains__(self, elem_id: str) -> bool:
        return elem_id in self._by_id

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, DomSnapshot)
            and self.root == other.root
            and self.meta == other.meta
        )

    def __repr__(self) -> str:
        return f"<DomSnapshot {len(self._order)} elements>"

    def to_json_dict(self) -> dict:
        def encode(node: ElementNode) -> dict:
            out: dict[str, Any] = {"tag": node.tag}
            if node.id_attr is not None:
                out["id"] = node.id_attr
            out["classes"] = sorted(node.classes)
            out["box"] = {
                "left": node.box.left,
                "top": node.box.top,
                "width": node.box.width,
                "height": node.box.height,
            }
            if node.text is not None:
                out["text"] = node.text
            out["children"] = [encode(c) for c in node.children]
            return out

        return {"meta": dict(self.meta), "root": encode(self.root)}


def _round_half_up(value: float) -> int:
    return math.floor(value + 0.5)


def _coerce_px(value: Any, path: str, rounded: list[bool]) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(f"box value must be a number, got {value!r}", path=path)
    if isinstance(value, int):
        return value
    as_int = _round_half_up(value)
    if as_int != value:
        rounded[0] = True
    return as_int


def _build_node(data: Any, elem_id: str, path: str, rounded: list[bool]) -> ElementNode:
    if not isinstance(data, Mapping):
        raise SchemaError("node must be an object", path=path)
    tag = data.get("tag")
    if not isinstance(tag, str) or not tag:
        raise SchemaError("missing or empty 'tag'", path=path)
    id_attr = data.get("id")
    if id_attr is not None and not isinstance(id_attr, str):
        raise SchemaError("'id' must be a string", path=path)
    classes = data.get("classes", [])
    if not isinstance(classes, list) or not all(isinstance(c, str) for c in classes):
        raise SchemaError("'classes' must be a list of strings", path=path)
    box_data = data.get("box")
    if not isinstance(box_data, Mapping):
        raise SchemaError("missing 'box' object", path=path)
    missing = [k for k in ("left", "top", "width", "height") if k not in box_data]
    if missing:
        raise SchemaError(f"box is missing {missing}", path=path)
    box = Box(
        left=_coerce_px(box_data["left"], f"{path}.box.left", rounded),
        top=_coerce_px(box_data["top"], f"{path}.box.top", rounded),
        width=_coerce_px(box_data["width"], f"{path}.box.width", rounded),
        height=_coerce_px(box_data["height"], f"{path}.box.height", rounded),
    )
    if box.width < 0:
        raise SchemaError(f"negative width {box.width}", path=path)
    if box.height < 0:
        raise SchemaError(f"negative height {box.height}", path=path)
    text = data.get("text")
    if text is not None and not isinstance(text, str):
        raise SchemaError("'text' must be a string", path=path)
    raw_children = data.get("children", [])
    if not isinstance(raw_children, list):
        raise SchemaError("'children' must be a list", path=path)
    children = tuple(
        _build_node(child, f"{elem_id}.{i}", f"{path}.children[{i}]", rounded)
        for i, child in enumerate(raw_children)
    )
    return ElementNode(
        elem_id=elem_id,
        tag=tag,
        id_attr=id_attr,
        classes=frozenset(classes),
        box=box,
        text=text,
        children=children,
    )


def ingest_snapshot(document: Union[str, bytes, Mapping]) -> DomSnapshot:
    """Parse and validate a snapshot file; element ids are pre-order paths.

    Non-integer pixel values are rounded half-up and the rounding is recorded
    in the snapshot's meta.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}") from None
    else:
        data = document
    if not isinstance(data, Mapping):
        raise SchemaError("snapshot must be a JSON object")
    meta = data.get("meta", {})
    if not isinstance(meta, Mapping):
        raise SchemaError("'meta' must be an object", path="meta")
    if "root" not in data:
        raise SchemaError("missing 'root' node")
    rounded = [False]
    root = _build_node(data["root"], "0", "root", rounded)
    meta = dict(meta)
    if rounded[0]:
        meta["pixel_rounding"] = "half-up"
    return DomSnapshot(root, meta)


# --------------------------------------------------------------------------
# Selectors


@dataclass(frozen=True)
class SimpleFilter:
    tag: Optional[str] = None
    elem_id: Optional[str] = None
    classes: frozenset[str] = frozenset()

    def matches(self, node: ElementNode) -> bool:
        if self.tag is not None and node.tag != self.tag:
            return False
        if self.elem_id is not None and node.id_attr != self.elem_id:
            return False
        return self.classes <= node.classes

    def to_text(self) -> str:
        parts = [self.tag or ""]
        if self.elem_id is not None:
            parts.append(f"#{self.elem_id}")
        parts.extend(f".{c}" for c in sorted(self.classes))
        return "".join(parts)


@dataclass(frozen=True)
class Selector:
    """A chain of simple filters joined by descendant (' ') or child ('>')."""

    parts: tuple[tuple[str, SimpleFilter], ...]  # first combinator is ""

    def to_text(self) -> str:
        out: list[str] = []
        for combinator, simple in self.parts:
            if combinator == ">":
                out.append(" > ")
            elif combinator == " ":
                out.append(" ")
            out.append(simple.to_text())
        return "".join(out)


_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_-]*")


def parse_selector(text: str) -> Selector:
    """Parse the documented selector subset: tag, #id, .class, compounds,
    descendant and child combinators."""
    pos = 0
    n = len(text)
    parts: list[tuple[str, SimpleFilter]] = []
    pending_combinator: Optional[str] = None

    def read_ident(after: str) -> str:
        nonlocal pos
        match = _IDENT_RE.match(text, pos)
        if match is None:
            raise ParseError(f"expected identifier after {after!r}", line=1, column=pos + 1)
        pos = match.end()
        return match.group(0)

    while pos < n:
        ch = text[pos]
        if ch.isspace():
            sp = pos
            while pos < n and text[pos].isspace():
                pos += 1
            if pos < n and parts and pending_combinator is None:
                pending_combinator = " "
            continue
        if ch == ">":
            if not parts:
                raise ParseError("selector cannot start with a combinator", line=1, column=pos + 1)
            if pending_combinator == ">":
                raise ParseError("duplicate combinator", line=1, column=pos + 1)
            pending_combinator = ">"
            pos += 1
            continue
        if ch in "+~,*[":
            raise ParseError(f"unsupported combinator or syntax {ch!r}", line=1, column=pos + 1)
        # Start of a compound.
        tag: Optional[str] = None
        elem_id: Optional[str] = None
        classes: set[str] = set()
        matched = False
        if _IDENT_RE.match(text, pos):
            tag = read_ident("tag")
            matched = True
        while pos < n and text[pos] in "#.":
            marker = text[pos]
            pos += 1
            name = read_ident(marker)
            if marker == "#":
                if elem_id is not None:
                    raise ParseError("compound has two #id filters", line=1, column=pos)
                elem_id = name
            else:
                classes.add(name)
            matched = True
        if not matched:
            raise ParseError(f"unexpected character {ch!r}", line=1, column=pos + 1)
        combinator = pending_combinator if parts else ""
        parts.append((combinator or "", SimpleFilter(tag, elem_id, frozenset(classes))))
        pending_combinator = None
    if pending_combinator == ">":
        raise ParseError("selector ends with a combinator", line=1, column=n)
    if not parts:
        raise ParseError("empty selector", line=1, column=1)
    return Selector(tuple(parts))


def _match_prefix(
    ancestors: tuple[ElementNode, ...],
    parts: tuple[tuple[str, SimpleFilter], ...],
    index: int,
    combinator: str,
) -> bool:
    # parts[index] must match an ancestor related to the already-matched
    # compound on its right by `combinator`.
    if index < 0:
        return True
    if combinator == ">":
        if not ancestors:
            return False
        parent = ancestors[-1]
        if parts[index][1].matches(parent):
            return _match_prefix(ancestors[:-1], parts, index - 1, parts[index][0])
        return False
    for j in range(len(ancestors) - 1, -1, -1):
        if parts[index][1].matches(ancestors[j]):
            if _match_prefix(ancestors[:j], parts, index - 1, parts[index][0]):
                return True
    return False


def matches_selector(
    node: ElementNode, ancestors: tuple[ElementNode, ...], selector: Selector
) -> bool:
    parts = selector.parts
    if not parts[-1][1].matches(node):
        return False
    return _match_prefix(ancestors, parts, len(parts) - 2, parts[-1][0])


def select(snapshot: DomSnapshot, selector: Selector) -> list[ElementNode]:
    """All elements matching the selector, in document order."""
    out: list[ElementNode] = []

    def walk(node: ElementNode, ancestors: tuple[ElementNode, ...]) -> None:
        if matches_selector(node, ancestors, selector):
            out.append(node)
        for child in node.children:
            walk(child, ancestors + (node,))

    walk(snapshot.root, ())
    return out


# --------------------------------------------------------------------------
# Assertion DSL


@dataclass(frozen=True)
class Attr:
    var: str
    prop: str


@dataclass(frozen=True)
class Cmp:
    op: str  # "=", ">", "<"
    left: Attr
    right: Union[Attr, int]


@dataclass(frozen=True)
class Not:
    operand: "LayoutSpec"


@dataclass(frozen=True)
class And:
    left: "LayoutSpec"
    right: "LayoutSpec"


@dataclass(frozen=True)
class Or:
    left: "LayoutSpec"
    right: "LayoutSpec"


@dataclass(frozen=True)
class IfThen:
    condition: "LayoutSpec"
    consequence: "LayoutSpec"


@dataclass(frozen=True)
class ForEach:
    var: str
    selector: Selector
    body: "LayoutSpec"


@dataclass(frozen=True)
class ExistsIn:
    var: str
    selector: Selector
    body: "LayoutSpec"


LayoutSpec = Cmp | Not | And | Or | IfThen | ForEach | ExistsIn


@dataclass(frozen=True)
class _SpecToken:
    kind: str  # WORD VAR SELECTOR POSS LPAREN RPAREN INT STOP
    text: str
    line: int
    column: int


def _tokenize_spec(text: str) -> list[_SpecToken]:
    tokens: list[_SpecToken] = []
    line = 1
    line_start = 0
    pos = 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        col = pos - line_start + 1
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        if ch == "$":
            if text.startswith("$(", pos):
                end = text.find(")", pos)
                if end == -1:
                    raise ParseError("unterminated selector", line, col)
                tokens.append(_SpecToken("SELECTOR", text[pos + 2 : end], line, col))
                pos = end + 1
                continue
            match = _IDENT_RE.match(text, pos + 1)
            if match is None:
                raise ParseError("expected variable name after '$'", line, col)
            tokens.append(_SpecToken("VAR", match.group(0), line, col))
            pos = match.end()
            continue
        if ch == "'":
            if text.startswith("'s", pos):
                tokens.append(_SpecToken("POSS", "'s", line, col))
                pos += 2
                continue
            raise ParseError("expected 's after apostrophe", line, col)
        if ch == "(":
            tokens.append(_SpecToken("LPAREN", "(", line, col))
            pos += 1
            continue
        if ch == ")":
            tokens.append(_SpecToken("RPAREN", ")", line, col))
            pos += 1
            continue
        if ch == ".":
            tokens.append(_SpecToken("STOP", ".", line, col))
            pos += 1
            continue
        if ch.isdigit() or (ch == "-" and pos + 1 < n and text[pos + 1].isdigit()):
            start = pos
            pos += 1
            while pos < n and text[pos].isdigit():
                pos += 1
            tokens.append(_SpecToken("INT", text[start:pos], line, col))
            continue
        if ch.isalpha():
            start = pos
            while pos < n and text[pos].isalpha():
                pos += 1
            tokens.append(_SpecToken("WORD", text[start:pos], line, col))
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    return tokens


class _SpecParser:
    def __init__(self, text: str):
        self.tokens = _tokenize_spec(text)
        self.pos = 0
        self.scopes: list[str] = []

    def peek(self, offset: int = 0) -> Optional[_SpecToken]:
        index = self.pos + offset
        if index < len(self.tokens):
            return self.tokens[index]
        return None

    def advance(self) -> _SpecToken:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def error(self, message: str) -> ParseError:
        token = self.peek()
        if token is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = (last.column + len(last.text)) if last else 1
            return ParseError(f"{message} at end of input", line, col)
        return ParseError(f"{message}, got {token.text!r}", token.line, token.column)

    def at_word(self, *words: str) -> bool:
        for i, word in enumerate(words):
            token = self.peek(i)
            if token is None or token.kind != "WORD" or token.text.lower() != word:
                return False
        return True

    def eat_words(self, *words: str) -> None:
        for word in words:
            if not self.at_word(word):
                raise self.error(f"expected {word!r}")
            self.advance()

    def parse(self) -> LayoutSpec:
        statements: list[LayoutSpec] = []
        while self.peek() is not None:
            statements.append(self.formula())
            if self.peek() is None or self.peek().kind != "STOP":
                raise self.error("expected '.' terminating the statement")
            self.advance()
        if not statements:
            raise ParseError("empty specification", 1, 1)
        spec = statements[0]
        for extra in statements[1:]:
            spec = And(spec, extra)
        return spec

    def formula(self) -> LayoutSpec:
        node = self.conjunct()
        while self.at_word("or"):
            self.advance()
            node = Or(node, self.conjunct())
        return node

    def conjunct(self) -> LayoutSpec:
        node = self.unary()
        while self.at_word("and"):
            self.advance()
            node = And(node, self.unary())
        return node

    def unary(self) -> LayoutSpec:
        if self.at_word("not"):
            self.advance()
            return Not(self.unary())
        if self.at_word("for", "each"):
            return self.for_each()
        if self.at_word("there", "exists"):
            return self.there_exists()
        if self.at_word("if"):
            self.advance()
            condition = self.formula()
            self.eat_words("then")
            consequence = self.formula()
            return IfThen(condition, consequence)
        return self.atom()

    def quant_header(self) -> tuple[str, Selector]:
        token = self.peek()
        if token is None or token.kind != "VAR":
            raise self.error("expected a $variable")
        var = self.advance().text
        self.eat_words("in")
        token = self.peek()
        if token is None or token.kind != "SELECTOR":
            raise self.error("expected a $(selector)")
        sel_token = self.advance()
        try:
            selector = parse_selector(sel_token.text)
        except ParseError as exc:
            raise ParseError(
                f"invalid selector {sel_token.text!r}: {exc}", sel_token.line, sel_token.column
            ) from None
        return var, selector

    def for_each(self) -> LayoutSpec:
        self.eat_words("for", "each")
        var, selector = self.quant_header()
        body = self.paren_body(var)
        return ForEach(var, selector, body)

    def there_exists(self) -> LayoutSpec:
        self.eat_words("there", "exists")
        var, selector = self.quant_header()
        self.eat_words("such", "that")
        body = self.paren_body(var)
        return ExistsIn(var, selector, body)

    def paren_body(self, var: str) -> LayoutSpec:
        token = self.peek()
        if token is None or token.kind != "LPAREN":
            raise self.error("expected '(' opening the quantifier body")
        self.advance()
        self.scopes.append(var)
        body = self.formula()
        self.scopes.pop()
        token = self.peek()
        if token is None or token.kind != "RPAREN":
            raise self.error("expected ')' closing the quantifier body")
        self.advance()
        return body

    def atom(self) -> LayoutSpec:
        token = self.peek()
        if token is not None and token.kind == "LPAREN":
            self.advance()
            node = self.formula()
            closing = self.peek()
            if closing is None or closing.kind != "RPAREN":
                raise self.error("expected ')'")
            self.advance()
            return node
        return self.ground()

    def attr_ref(self) -> Attr:
        token = self.peek()
        if token is None or token.kind != "VAR":
            raise self.error("expected a $variable")
        var_token = self.advance()
        if var_token.text not in self.scopes:
            raise ParseError(
                f"unbound variable ${var_token.text}", var_token.line, var_token.column
            )
        token = self.peek()
        if token is None or token.kind != "POSS":
            raise self.error("expected 's after the variable")
        self.advance()
        token = self.peek()
        if token is None or token.kind != "WORD" or token.text not in ATTRIBUTES:
            raise self.error(f"expected an attribute name {ATTRIBUTES}")
        prop = self.advance().text
        return Attr(var_token.text, prop)

    def comparison_op(self) -> str:
        if self.at_word("equals"):
            self.advance()
            return "="
        if self.at_word("greater", "than"):
            self.advance()
            self.advance()
            return ">"
        if self.at_word("less", "than"):
            self.advance()
            self.advance()
            return "<"
        raise self.error("expected 'equals', 'greater than', or 'less than'")

    def ground(self) -> LayoutSpec:
        left = self.attr_ref()
        op = self.comparison_op()
        token = self.peek()
        if token is not None and token.kind == "INT":
            self.advance()
            return Cmp(op, left, int(token.text))
        return Cmp(op, left, self.attr_ref())


def parse_spec(text: str) -> LayoutSpec:
    """Parse a specification file (one or more '.'-terminated statements)."""
    return _SpecParser(text).parse()


# --------------------------------------------------------------------------
# Verdicts and witnesses


class TruthValue(Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "?"


_NEGATION = {
    TruthValue.TRUE: TruthValue.FALSE,
    TruthValue.FALSE: TruthValue.TRUE,
    TruthValue.UNKNOWN: TruthValue.UNKNOWN,
}


class _EmptyElement:
    _instance: Optional["_EmptyElement"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "v_empty"


V_EMPTY = _EmptyElement()


@dataclass(frozen=True)
class WitnessNode:
    element: Any
    children: tuple["WitnessNode", ...] = ()


Witness = tuple[WitnessNode, ...]


def witness_elements(forest: Witness) -> set:
    """All elements referenced anywhere in the forest."""
    out: set = set()
    stack = list(forest)
    while stack:
        node = stack.pop()
        out.add(node.element)
        stack.extend(node.children)
    return out


def attach(forest: Witness, element: Any, subforest: Witness) -> Witness:
    """Add (element, subforest) as a new tree; an empty-element root is
    flattened away, splicing the subforest's trees in directly."""
    if element is V_EMPTY:
        return forest + subforest
    return forest + (WitnessNode(element, subforest),)


@dataclass(frozen=True)
class Verdict:
    value: TruthValue
    w_true: Witness = ()
    w_false: Witness = ()


def verdict_and(verdict: Verdict, element: Any, other: Verdict) -> Verdict:
    """Fold ``other`` into ``verdict`` conjunctively, rooting the imported
    witness at ``element``."""
    if other.value is TruthValue.FALSE:
        return Verdict(
            TruthValue.FALSE,
            verdict.w_true,
            attach(verdict.w_false, element, other.w_false),
        )
    if verdict.value is not TruthValue.FALSE and other.value is TruthValue.UNKNOWN:
        return Verdict(
            TruthValue.UNKNOWN,
            attach(verdict.w_true, element, other.w_true),
            verdict.w_false,
        )
    if verdict.value is not TruthValue.FALSE and other.value is TruthValue.TRUE:
        return Verdict(
            verdict.value,
            attach(verdict.w_true, element, other.w_true),
            verdict.w_false,
        )
    return verdict


def verdict_or(verdict: Verdict, element: Any, other: Verdict) -> Verdict:
    """Dual of verdict_and: truth and falsehood swap roles."""
    if other.value is TruthValue.TRUE:
        return Verdict(
            TruthValue.TRUE,
            attach(verdict.w_true, element, other.w_true),
            verdict.w_false,
        )
    if verdict.value is not TruthValue.TRUE and other.value is TruthValue.UNKNOWN:
        return Verdict(
            TruthValue.UNKNOWN,
            verdict.w_true,
            attach(verdict.w_false, element, other.w_false),
        )
    if verdict.value is not TruthValue.TRUE and other.value is TruthValue.FALSE:
        return Verdict(
            verdict.value,
            verdict.w_true,
            attach(verdict.w_false, element, other.w_false),
        )
    return verdict


def verdict_not(verdict: Verdict, element: Any = V_EMPTY) -> Verdict:
    """Flip the truth value and swap the witness forests."""
    return Verdict(_NEGATION[verdict.value], verdict.w_false, verdict.w_true)


# --------------------------------------------------------------------------
# Evaluation


def _cmp_ints(op: str, a: int, b: int) -> bool:
    if op == "=":
        return a == b
    if op == ">":
        return a > b
    if op == "<":
        return a < b
    raise EvalError(f"unknown comparison {op!r}")


def omega(snapshot: DomSnapshot, spec: LayoutSpec) -> Verdict:
    """Compute the verdict (value plus witness forests) of a closed spec."""
    return _omega(snapshot, spec, {})


def _omega(snapshot: DomSnapshot, spec: LayoutSpec, env: dict[str, ElementNode]) -> Verdict:
    if isinstance(spec, Cmp):
        left_node = env.get(spec.left.var)
        if left_node is None:
            raise UnboundVariableError(f"unbound variable ${spec.left.var}")
        left_value = left_node.attr(spec.left.prop)
        if isinstance(spec.right, Attr):
            right_node = env.get(spec.right.var)
            if right_node is None:
                raise UnboundVariableError(f"unbound variable ${spec.right.var}")
            right_value = right_node.attr(spec.right.prop)
            if left_node.elem_id == right_node.elem_id:
                operands: Witness = (WitnessNode(left_node.elem_id),)
            else:
                operands = (
                    WitnessNode(left_node.elem_id),
                    WitnessNode(right_node.elem_id),
                )
        else:
            right_value = spec.right
            operands = (WitnessNode(left_node.elem_id),)
        if _cmp_ints(spec.op, left_value, right_value):
            return Verdict(TruthValue.TRUE, operands, ())
        return Verdict(TruthValue.FALSE, (), operands)
    if isinstance(spec, Not):
        return verdict_not(_omega(snapshot, spec.operand, env), V_EMPTY)
    if isinstance(spec, And):
        acc = Verdict(TruthValue.TRUE)
        acc = verdict_and(acc, V_EMPTY, _omega(snapshot, spec.left, env))
        return verdict_and(acc, V_EMPTY, _omega(snapshot, spec.right, env))
    if isinstance(spec, Or):
        acc = Verdict(TruthValue.FALSE)
        acc = verdict_or(acc, V_EMPTY, _omega(snapshot, spec.left, env))
        return verdict_or(acc, V_EMPTY, _omega(snapshot, spec.right, env))
    if isinstance(spec, IfThen):
        acc = Verdict(TruthValue.FALSE)
        acc = verdict_or(
            acc, V_EMPTY, verdict_not(_omega(snapshot, spec.condition, env), V_EMPTY)
        )
        return verdict_or(acc, V_EMPTY, _omega(snapshot, spec.consequence, env))
    if isinstance(spec, ForEach):
        acc = Verdict(TruthValue.TRUE)
        for node in select(snapshot, spec.selector):
            inner = _omega(snapshot, spec.body, {**env, spec.var: node})
            acc = verdict_and(acc, node.elem_id, inner)
        return acc
    if isinstance(spec, ExistsIn):
        acc = Verdict(TruthValue.FALSE)
        for node in select(snapshot, spec.selector):
            inner = _omega(snapshot, spec.body, {**env, spec.var: node})
            acc = verdict_or(acc, node.elem_id, inner)
        return acc
    raise TypeError(f"not a layout spec: {spec!r}")


# --------------------------------------------------------------------------
# Translation to first-order structures


def _collect_selectors(spec: LayoutSpec, out: dict[str, Selector]) -> None:
    if isinstance(spec, (ForEach, ExistsIn)):
        out.setdefault(spec.selector.to_text(), spec.selector)
        _collect_selectors(spec.body, out)
    elif isinstance(spec, (And, Or)):
        _collect_selectors(spec.left, out)
        _collect_selectors(spec.right, out)
    elif isinstance(spec, IfThen):
        _collect_selectors(spec.condition, out)
        _collect_selectors(spec.consequence, out)
    elif isinstance(spec, Not):
        _collect_selectors(spec.operand, out)


def _sel_sort_name(selector: Selector) -> str:
    return f"$({selector.to_text()})"


def _translate(spec: LayoutSpec) -> fol.FolFormula:
    if isinstance(spec, ForEach):
        return fol.Forall(spec.var, _sel_sort_name(spec.selector), _translate(spec.body))
    if isinstance(spec, ExistsIn):
        return fol.Exists(spec.var, _sel_sort_name(spec.selector), _translate(spec.body))
    if isinstance(spec, And):
        return fol.And(_translate(spec.left), _translate(spec.right))
    if isinstance(spec, Or):
        return fol.Or(_translate(spec.left), _translate(spec.right))
    if isinstance(spec, IfThen):
        return fol.Implies(_translate(spec.condition), _translate(spec.consequence))
    if isinstance(spec, Not):
        return fol.Not(_translate(spec.operand))
    if isinstance(spec, Cmp):
        left = fol.TApp(spec.left.prop, (fol.TVar(spec.left.var),))
        if isinstance(spec.right, Attr):
            right: fol.Term = fol.TApp(spec.right.prop, (fol.TVar(spec.right.var),))
        else:
            right = fol.TConst(spec.right)
        return fol.Cmp(spec.op, left, right)
    raise TypeError(f"not a layout spec: {spec!r}")


ELEMENT_SORT = "elem"
PIXEL_SORT = "px"


def to_interpretation(
    snapshot: DomSnapshot,
    spec: LayoutSpec,
    extra_values: Iterable[int] = (),
) -> tuple[fol.Interpretation, fol.FolFormula]:
    """Translate a snapshot plus spec into tables + a first-order formula.

    The element sort holds every element matched by any selector in the
    spec, with one sub-sort per distinct selector for quantification.  The
    pixel sort is open: it collects all observed attribute values plus any
    caller-supplied candidates, so repairs may write values no element
    currently has.
    """
    selectors: dict[str, Selector] = {}
    _collect_selectors(spec, selectors)
    matches = {text: select(snapshot, sel) for text, sel in selectors.items()}
    matched_ids = {node.elem_id for nodes in matches.values() for node in nodes}
    elements = tuple(
        node for node in snapshot.nodes() if node.elem_id in matched_ids
    )
    pixel_values: set[int] = set(int(v) for v in extra_values)
    for node in elements:
        for attr in ATTRIBUTES:
            pixel_values.add(node.attr(attr))
    sorts: dict[str, fol.Sort] = {
        ELEMENT_SORT: fol.Sort(ELEMENT_SORT, tuple(n.elem_id for n in elements)),
        PIXEL_SORT: fol.Sort(PIXEL_SORT, tuple(sorted(pixel_values)), open=True),
    }
    for text, sel in selectors.items():
        sorts[_sel_sort_name(sel)] = fol.Sort(
            _sel_sort_name(sel), tuple(n.elem_id for n in matches[text])
        )
    functions = {
        attr: fol.FunctionTable(
            attr,
            (ELEMENT_SORT,),
            PIXEL_SORT,
            {(n.elem_id,): n.attr(attr) for n in elements},
        )
        for attr in ATTRIBUTES
    }
    return fol.Interpretation(sorts, functions), _translate(spec)


# --------------------------------------------------------------------------
# Candidate values and layout pools


def candidate_values(snapshot: DomSnapshot, axis: str, policy: str = "observed") -> list[int]:
    """Pixel values a repair may move (or resize) elements to.

    Policies: ``observed`` (every left/top value in the snapshot),
    ``grid:<step>`` (observed plus multiples of the step spanning the page),
    ``list:<v1,v2,...>`` (observed plus the explicit values).
    """
    if axis not in ("h", "v"):
        raise ValueError(f"axis must be 'h' or 'v', got {axis!r}")
    base_attr = "left" if axis == "h" else "top"
    extent_attr = "right" if axis == "h" else "bottom"
    observed = {node.attr(base_attr) for node in snapshot.nodes()}
    values = set(observed)
    if policy == "observed":
        pass
    elif policy.startswith("grid:"):
        try:
            step = int(policy.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"invalid grid step in {policy!r}") from None
        if step <= 0:
            raise ValueError("grid step must be positive")
        extent = max((node.attr(extent_attr) for node in snapshot.nodes()), default=0)
        values.update(range(0, extent + 1, step))
    elif policy.startswith("list:"):
        listed = policy.split(":", 1)[1]
        try:
            values.update(int(v) for v in listed.split(",") if v.strip() != "")
        except ValueError:
            raise ValueError(f"invalid value list in {policy!r}") from None
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return sorted(values)


def candidate_sizes(snapshot: DomSnapshot, axis: str, policy: str = "observed") -> list[int]:
    """Companion of candidate_values for resize pools: observes widths
    (resp. heights) instead of coordinates, with the same policy grammar."""
    if axis not in ("h", "v"):
        raise ValueError(f"axis must be 'h' or 'v', got {axis!r}")
    attr = "width" if axis == "h" else "height"
    values = {node.attr(attr) for node in snapshot.nodes()}
    if policy == "observed":
        pass
    elif policy.startswith("grid:"):
        try:
            step = int(policy.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"invalid grid step in {policy!r}") from None
        if step <= 0:
            raise ValueError("grid step must be positive")
        extent = max(values, default=0)
        values.update(range(0, extent + 1, step))
    elif policy.startswith("list:"):
        listed = policy.split(":", 1)[1]
        try:
            values.update(int(v) for v in listed.split(",") if v.strip() != "")
        except ValueError:
            raise ValueError(f"invalid value list in {policy!r}") from None
    else:
        raise ValueError(f"unknown policy {policy!r}")
    return sorted(v for v in values if v >= 0)


def _resolve_elements(
    snapshot: DomSnapshot, elements: Iterable[Union[ElementNode, str]]
) -> list[ElementNode]:
    resolved = []
    for item in elements:
        if isinstance(item, ElementNode):
            resolved.append(item)
        else:
            resolved.append(snapshot.element(item))
    return resolved


def displacement_pool(
    snapshot: DomSnapshot,
    elements: Iterable[Union[ElementNode, str]],
    axis: str,
    values: Iterable[int],
) -> list[fol.MacroEndomorphism]:
    """Size-preserving moves: set left (resp. top) and shift right (resp.
    bottom) by the same delta, one macro per element and target value.

    Macros targeting an element's current coordinate are omitted.
    """
    if axis not in ("h", "v"):
        raise ValueError(f"axis must be 'h' or 'v', got {axis!r}")
    pool = []
    for node in _resolve_elements(snapshot, elements):
        for value in sorted(set(values)):
            if axis == "h":
                if value == node.box.left:
                    continue
                updates = [
                    fol.PointUpdate("left", (node.elem_id,), value),
                    fol.PointUpdate("right", (node.elem_id,), value + node.box.width),
                ]
                name = f"move-h({node.elem_id}):={value}"
            else:
                if value == node.box.top:
                    continue
                updates = [
                    fol.PointUpdate("top", (node.elem_id,), value),
                    fol.PointUpdate("bottom", (node.elem_id,), value + node.box.height),
                ]
                name = f"move-v({node.elem_id}):={value}"
            pool.append(fol.MacroEndomorphism(name, updates))
    return pool


def resize_pool(
    snapshot: DomSnapshot,
    elements: Iterable[Union[ElementNode, str]],
    axis: str,
    values: Iterable[int],
) -> list[fol.MacroEndomorphism]:
    """Origin-preserving resizes: set width (resp. height) and move right
    (resp. bottom) accordingly; left/top never change."""
    if axis not in ("h", "v"):
        raise ValueError(f"axis must be 'h' or 'v', got {axis!r}")
    pool = []
    for node in _resolve_elements(snapshot, elements):
        for value in sorted(set(values)):
            if value < 0:
                continue
            if axis == "h":
                if value == node.box.width:
                    continue
                updates = [
                    fol.PointUpdate("width", (node.elem_id,), value),
                    fol.PointUpdate("right", (node.elem_id,), node.box.left + value),
                ]
                name = f"resize-h({node.elem_id}):={value}"
            else:
                if value == node.box.height:
                    continue
                updates = [
                    fol.PointUpdate("height", (node.elem_id,), value),
                    fol.PointUpdate("bottom", (node.elem_id,), node.box.top + value),
                ]
                name = f"resize-v({node.elem_id}):={value}"
            pool.append(fol.MacroEndomorphism(name, updates))
    return pool


def point_pool(
    snapshot: DomSnapshot,
    elements: Iterable[Union[ElementNode, str]],
    h_values: Iterable[int],
    v_values: Iterable[int],
) -> list[fol.PointUpdate]:
    """Uncoordinated single-cell writes over all six attribute tables.

    The crude fine-grained pool: each attribute of each element may be set
    independently to any candidate value on its axis.  Displacement and
    resize macros are usually the better choice.
    """
    h_vals = sorted(set(h_values))
    v_vals = sorted(set(v_values))
    pool = []
    for node in _resolve_elements(snapshot, elements):
        for attr in ("left", "right", "width"):
            for value in h_vals:
                if value == node.attr(attr):
                    continue
                if attr == "width" and value < 0:
                    continue
                pool.append(fol.PointUpdate(attr, (node.elem_id,), value))
        for attr in ("top", "bottom", "height"):
            for value in v_vals:
                if value == node.attr(attr):
                    continue
                if attr == "height" and value < 0:
                    continue
                pool.append(fol.PointUpdate(attr, (node.elem_id,), value))
    return pool


# --------------------------------------------------------------------------
# Applying repairs back onto snapshots


def apply_to_snapshot(snapshot: DomSnapshot, transformation: Transformation) -> DomSnapshot:
    """Patch element boxes according to a transformation over the six
    attribute tables, reconciling derived attributes.

    Writes come in the coordinated groups the pools emit (left+right,
    width+right, ...); inconsistent triples are rejected.
    """
    if not is_well_defined(transformation):
        raise IllDefinedTransformationError(
            f"transformation {transformation!r} has overlapping members"
        )
    patches: dict[str, dict[str, int]] = {}
    for endo in transformation:
        for cell, value in endo.writes:
            function, args = cell
            if function not in ATTRIBUTES or len(args) != 1:
                raise EvalError(f"cell {cell!r} does not address an element attribute")
            elem_id = args[0]
            if elem_id not in snapshot:
                raise SchemaError(f"no element with id {elem_id!r}")
            patches.setdefault(elem_id, {})[function] = int(value)

    def solve_axis(
        box_start: int, box_size: int, start: Optional[int], end: Optional[int], size: Optional[int]
    ) -> tuple[int, int]:
        if start is not None and end is not None and size is not None:
            if end != start + size:
                raise ValueError("inconsistent writes: start + size != end")
        new_start = start
        if new_start is None:
            if end is not None:
                new_start = end - (size if size is not None else box_size)
            else:
                new_start = box_start
        new_size = size
        if new_size is None:
            new_size = (end - new_start) if end is not None else box_size
        if new_size < 0:
            raise ValueError(f"patch yields negative size {new_size}")
        return new_start, new_size

    def rebuild(node: ElementNode) -> ElementNode:
        children = tuple(rebuild(c) for c in node.children)
        patch = patches.get(node.elem_id)
        box = node.box
        if patch:
            left, width = solve_axis(
                box.left, box.width, patch.get("left"), patch.get("right"), patch.get("width")
            )
            top, height = solve_axis(
                box.top, box.height, patch.get("top"), patch.get("bottom"), patch.get("height")
            )
            box = Box(left, top, width, height)
        if patch or children != node.children:
            return ElementNode(
                node.elem_id, node.tag, node.id_attr, node.classes, box, node.text, children
            )
        return node

    return DomSnapshot(rebuild(snapshot.root), snapshot.meta)
