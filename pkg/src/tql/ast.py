"""Abstract syntax for the query language, one node class per production.

All nodes are frozen dataclasses with structural equality, so parser tests
can compare whole trees directly.  ``pretty_print`` emits concrete syntax
with minimal parentheses that reparses to an equal tree.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterator, Optional, Union as _U

from .values import ARITHMETIC_OPS, COMPARISON_OPS, Value

# words the lexer claims for itself; they can never be identifiers
RESERVED_WORDS = frozenset(
    {
        "SELECT", "FILTER", "UNION", "DIFF", "PROD", "JOIN",
        "AND", "OR", "NAND", "NOT",
        "SRC", "COL", "COL*", "SIML", "PFKEY", "FORALL", "EXISTS",
    }
)

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(s: str) -> bool:
    return bool(_IDENT_RE.match(s)) and s not in RESERVED_WORDS


def _check_ident(s: str) -> None:
    if not is_identifier(s):
        raise ValueError(f"invalid identifier: {s!r}")


def _check_name(s: str, what: str) -> None:
    if not isinstance(s, str) or not s:
        raise ValueError(f"{what} must be a nonempty string")


# --- expressions ------------------------------------------------------------


@dataclass(frozen=True)
class Lit:
    value: Value

    def __post_init__(self) -> None:
        v = self.value
        if isinstance(v, bool) or not isinstance(v, (int, float, str)):
            raise ValueError(f"literal must be a number or a string, got {v!r}")
        if isinstance(v, float) and not math.isfinite(v):
            raise ValueError("numeric literals must be finite")


@dataclass(frozen=True)
class Attr:
    ident: str
    column: str

    def __post_init__(self) -> None:
        _check_ident(self.ident)
        _check_name(self.column, "attribute column")


@dataclass(frozen=True)
class BinOp:
    left: "Expr"
    op: str
    right: "Expr"

    def __post_init__(self) -> None:
        if self.op not in ARITHMETIC_OPS:
            raise ValueError(f"unknown arithmetic operator: {self.op!r}")


Expr = _U[Lit, Attr, BinOp]


# --- row predicates ---------------------------------------------------------


@dataclass(frozen=True)
class Cmp:
    left: Expr
    op: str
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in COMPARISON_OPS:
            raise ValueError(f"unknown comparison operator: {self.op!r}")


@dataclass(frozen=True)
class PredNot:
    operand: "RowPred"


@dataclass(frozen=True)
class PredAnd:
    left: "RowPred"
    right: "RowPred"


@dataclass(frozen=True)
class PredOr:
    left: "RowPred"
    right: "RowPred"


RowPred = _U[Cmp, PredNot, PredAnd, PredOr]


# --- signatures -------------------------------------------------------------


@dataclass(frozen=True)
class Src:
    source: str

    def __post_init__(self) -> None:
        _check_name(self.source, "SRC name")


@dataclass(frozen=True)
class Col:
    name: str

    def __post_init__(self) -> None:
        _check_name(self.name, "COL name")


@dataclass(frozen=True)
class ColStar:
    needle: str

    def __post_init__(self) -> None:
        _check_name(self.needle, "COL* keyword")


@dataclass(frozen=True)
class Siml:
    ident: str

    def __post_init__(self) -> None:
        _check_ident(self.ident)


@dataclass(frozen=True)
class PfKey:
    ident: str

    def __post_init__(self) -> None:
        _check_ident(self.ident)


@dataclass(frozen=True)
class Forall:
    predicate: RowPred


@dataclass(frozen=True)
class Exists:
    predicate: RowPred


PropExpr = _U[Src, Col, ColStar, Siml, PfKey, Forall, Exists]


@dataclass(frozen=True)
class SigNot:
    operand: "Signature"


@dataclass(frozen=True)
class SigAnd:
    left: "Signature"
    right: "Signature"


@dataclass(frozen=True)
class SigOr:
    left: "Signature"
    right: "Signature"


Signature = _U[Src, Col, ColStar, Siml, PfKey, Forall, Exists, SigNot, SigAnd, SigOr]


# --- collection expressions -------------------------------------------------


@dataclass(frozen=True)
class Ident:
    name: str

    def __post_init__(self) -> None:
        _check_ident(self.name)


@dataclass(frozen=True)
class Assign:
    name: str
    value: "CollectionExpr"

    def __post_init__(self) -> None:
        _check_ident(self.name)


@dataclass(frozen=True)
class Restrict:
    base: "CollectionExpr"
    signature: Signature


@dataclass(frozen=True)
class CollAnd:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class CollOr:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class CollNand:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class Select:
    columns: tuple[str, ...]
    source: "CollectionExpr"

    def __post_init__(self) -> None:
        if not self.columns:
            raise ValueError("SELECT needs at least one column")
        for c in self.columns:
            _check_name(c, "SELECT column")


@dataclass(frozen=True)
class Filter:
    predicate: RowPred
    source: "CollectionExpr"


@dataclass(frozen=True)
class Union:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class Diff:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class Prod:
    left: "CollectionExpr"
    right: "CollectionExpr"


@dataclass(frozen=True)
class Join:
    predicate: Optional[RowPred]
    left: "CollectionExpr"
    right: "CollectionExpr"


FuncExpr = _U[Select, Filter, Union, Diff, Prod, Join]
CollectionExpr = _U[Ident, Assign, Restrict, CollAnd, CollOr, CollNand, FuncExpr]


@dataclass(frozen=True)
class QueryAst:
    statements: tuple[CollectionExpr, ...]

    def __post_init__(self) -> None:
        if not self.statements:
            raise ValueError("a query needs at least one statement")


_KINDS = {
    Ident: "ident", Assign: "assign", Restrict: "restrict",
    CollAnd: "and", CollOr: "or", CollNand: "nand",
    Select: "select", Filter: "filter",
    Union: "union", Diff: "diff", Prod: "prod", Join: "join",
}


def node_kind(node: CollectionExpr) -> str:
    return _KINDS[type(node)]


def child_collections(node: CollectionExpr) -> tuple["CollectionExpr", ...]:
    """Collection-typed children in positional order (the path scheme every
    analysis pass shares)."""
    match node:
        case Ident():
            return ()
        case Assign(_, value):
            return (value,)
        case Restrict(base, _):
            return (base,)
        case Select(_, source) | Filter(_, source):
            return (source,)
        case CollAnd(l, r) | CollOr(l, r) | CollNand(l, r):
            return (l, r)
        case Union(l, r) | Diff(l, r) | Prod(l, r):
            return (l, r)
        case Join(_, l, r):
            return (l, r)
    raise TypeError(f"not a collection expression: {node!r}")


def walk_collections(q: QueryAst) -> Iterator[tuple[tuple[int, ...], CollectionExpr]]:
    """Preorder walk over every collection node, yielding (path, node).
    A path starts with the statement index and appends child positions."""

    def rec(node: CollectionExpr, path: tuple[int, ...]) -> Iterator:
        yield path, node
        for i, child in enumerate(child_collections(node)):
            yield from rec(child, path + (i,))

    for i, stmt in enumerate(q.statements):
        yield from rec(stmt, (i,))


def path_label(path: tuple[int, ...], node: CollectionExpr) -> str:
    return ".".join(map(str, path)) + ":" + node_kind(node)


def walk_pred_attrs(pred: RowPred) -> Iterator[Attr]:
    """Every attribute reference in a row predicate, left to right."""

    def from_expr(e: Expr) -> Iterator[Attr]:
        match e:
            case Attr():
                yield e
            case BinOp(l, _, r):
                yield from from_expr(l)
                yield from from_expr(r)
            case _:
                pass

    match pred:
        case Cmp(l, _, r):
            yield from from_expr(l)
            yield from from_expr(r)
        case PredNot(p):
            yield from walk_pred_attrs(p)
        case PredAnd(l, r) | PredOr(l, r):
            yield from walk_pred_attrs(l)
            yield from walk_pred_attrs(r)


def pred_columns(pred: RowPred) -> tuple[str, ...]:
    """Columns a predicate reads, deduplicated, in a stable order.  In a
    single-table context every identifier resolves to the candidate table,
    so all of them count."""
    return tuple(dict.fromkeys(a.column for a in walk_pred_attrs(pred)))


def root_ident(node: CollectionExpr) -> Optional[str]:
    """The syntactic identifier an operand is rooted at, if any: a bare
    name, a restricted name, or an assignment target."""
    match node:
        case Ident(name):
            return name
        case Assign(name, _):
            return name
        case Restrict(base, _):
            return root_ident(base)
        case _:
            return None


def join_requirements(
    pred: RowPred, left_root: Optional[str], right_root: Optional[str]
) -> tuple[tuple[str, ...], tuple[str, ...], tuple[str, ...]]:
    """Split a join predicate's attribute columns by operand.

    Returns (left columns, right columns, unresolvable identifiers).  An
    identifier matching both roots (a self-join on one name) is ambiguous
    and lands in the unresolvable bucket, never in a requirement.
    """
    left: dict[str, None] = {}
    right: dict[str, None] = {}
    loose: dict[str, None] = {}
    ambiguous = left_root is not None and left_root == right_root
    for a in walk_pred_attrs(pred):
        if not ambiguous and a.ident == left_root:
            left[a.column] = None
        elif not ambiguous and a.ident == right_root:
            right[a.column] = None
        else:
            loose[a.ident] = None
    return tuple(left), tuple(right), tuple(loose)


# --- pretty printing --------------------------------------------------------
#
# Levels (higher binds tighter): assignment 0, OR 1, AND/NAND 2, function
# application 3, signature application 4, atoms 5.  A node is parenthesized
# whenever its own level is below what its context requires.


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _name_or_quote(s: str) -> str:
    return s if is_identifier(s) else _quote(s)


def format_expr(node: Expr, min_level: int = 0) -> str:
    match node:
        case Lit(v):
            if isinstance(v, str):
                return _quote(v)
            text = repr(v)
            level = 3
        case Attr(ident, column):
            return f"{ident}[{_quote(column)}]"
        case BinOp(l, op, r):
            if op in ("+", "-"):
                text, level = f"{format_expr(l, 1)} {op} {format_expr(r, 2)}", 1
            else:
                text, level = f"{format_expr(l, 2)} {op} {format_expr(r, 3)}", 2
        case _:
            raise TypeError(f"not an expression: {node!r}")
    return f"({text})" if level < min_level else text


def format_rowpred(node: RowPred, min_level: int = 0) -> str:
    match node:
        case Cmp(l, op, r):
            text, level = f"{format_expr(l)} {op} {format_expr(r)}", 4
        case PredNot(p):
            text, level = f"NOT {format_rowpred(p, 3)}", 3
        case PredAnd(l, r):
            text, level = f"{format_rowpred(l, 2)} AND {format_rowpred(r, 3)}", 2
        case PredOr(l, r):
            text, level = f"{format_rowpred(l, 1)} OR {format_rowpred(r, 2)}", 1
        case _:
            raise TypeError(f"not a row predicate: {node!r}")
    return f"({text})" if level < min_level else text


def format_signature(node: Signature, min_level: int = 0) -> str:
    match node:
        case Src(s):
            text, level = f"SRC[{_name_or_quote(s)}]", 4
        case Col(s):
            text, level = f"COL[{_quote(s)}]", 4
        case ColStar(s):
            text, level = f"COL*[{_quote(s)}]", 4
        case Siml(ident):
            text, level = f"SIML[{ident}]", 4
        case PfKey(ident):
            text, level = f"PFKEY[{ident}]", 4
        case Forall(p):
            text, level = f"FORALL[{format_rowpred(p)}]", 4
        case Exists(p):
            text, level = f"EXISTS[{format_rowpred(p)}]", 4
        case SigNot(s):
            text, level = f"NOT {format_signature(s, 3)}", 3
        case SigAnd(l, r):
            text, level = f"{format_signature(l, 2)} AND {format_signature(r, 3)}", 2
        case SigOr(l, r):
            text, level = f"{format_signature(l, 1)} OR {format_signature(r, 2)}", 1
        case _:
            raise TypeError(f"not a signature: {node!r}")
    return f"({text})" if level < min_level else text


def format_collection(node: CollectionExpr, min_level: int = 0) -> str:
    match node:
        case Ident(name):
            text, level = name, 5
        case Assign(name, value):
            text, level = f"{name} = {format_collection(value)}", 0
        case Restrict(base, sig):
            text, level = f"{format_collection(base, 4)} : {{{format_signature(sig)}}}", 4
        case CollAnd(l, r):
            text, level = f"{format_collection(l, 2)} AND {format_collection(r, 3)}", 2
        case CollNand(l, r):
            text, level = f"{format_collection(l, 2)} NAND {format_collection(r, 3)}", 2
        case CollOr(l, r):
            text, level = f"{format_collection(l, 1)} OR {format_collection(r, 2)}", 1
        case Select(cols, src):
            inner = ", ".join(_quote(c) for c in cols)
            text, level = f"SELECT[{inner}] {format_collection(src, 3)}", 3
        case Filter(pred, src):
            text, level = f"FILTER[{format_rowpred(pred)}] {format_collection(src, 3)}", 3
        case Union(l, r):
            text, level = f"UNION {format_collection(l, 3)} {format_collection(r, 3)}", 3
        case Diff(l, r):
            text, level = f"DIFF {format_collection(l, 3)} {format_collection(r, 3)}", 3
        case Prod(l, r):
            text, level = f"PROD {format_collection(l, 3)} {format_collection(r, 3)}", 3
        case Join(pred, l, r):
            head = "JOIN" if pred is None else f"JOIN[{format_rowpred(pred)}]"
            text, level = f"{head} {format_collection(l, 3)} {format_collection(r, 3)}", 3
        case _:
            raise TypeError(f"not a collection expression: {node!r}")
    return f"({text})" if level < min_level else text


def pretty_print(ast: QueryAst) -> str:
    """Concrete syntax for a whole query; reparses to an equal tree."""
    return "\n".join(format_collection(s) + ";" for s in ast.statements)
