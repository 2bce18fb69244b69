"""Seeded random generators shared by the property and acceptance tests.

Everything takes an explicit ``random.Random`` so a single integer seed
reproduces any failure.  Column names draw from a small pool on purpose:
collisions are what make union compatibility, natural joins, and name
qualification interesting.
"""

import random
import string

from tql.ast import (
    Assign,
    Attr,
    BinOp,
    Cmp,
    Col,
    CollAnd,
    CollNand,
    CollOr,
    ColStar,
    Diff,
    Exists,
    Filter,
    Forall,
    Ident,
    Join,
    Lit,
    PfKey,
    PredAnd,
    PredNot,
    PredOr,
    Prod,
    QueryAst,
    Restrict,
    Select,
    SigAnd,
    SigNot,
    SigOr,
    Siml,
    Src,
    Union,
    is_identifier,
)
from tql.tables import Column, ColumnType, Schema, Table
from tql.values import COMPARISON_OPS

NAME_POOL = ("a", "b", "c", "nm", "gdp", "city", "year", "k")
TEXT_POOL = ("x", "y", "z", "NYC", "LA", "", "gdp", "Ann Arbor")
IDENT_POOL = ("Q", "A", "B", "S", "T", "data_1")


def rand_value(rng: random.Random, ctype: ColumnType):
    if rng.random() < 0.15:
        return None
    if ctype is ColumnType.NUMERIC:
        if rng.random() < 0.5:
            return rng.randint(-5, 9)
        return round(rng.uniform(-4.0, 9.0), 2)
    return rng.choice(TEXT_POOL)


def rand_table(
    rng: random.Random,
    *,
    max_cols: int = 5,
    max_rows: int = 8,
    name: str = "g",
) -> Table:
    n_cols = rng.randint(1, max_cols)
    names = rng.sample(NAME_POOL, n_cols)
    cols = tuple(
        Column(n, rng.choice((ColumnType.NUMERIC, ColumnType.TEXT))) for n in names
    )
    rows = [
        tuple(rand_value(rng, c.ctype) for c in cols)
        for _ in range(rng.randint(0, max_rows))
    ]
    return Table.base(name, Schema(cols), rows)


def rand_compatible_pair(rng: random.Random) -> tuple[Table, Table]:
    """Two tables over the same columns, the second with a shuffled column
    order, so union/diff exercise reordering rather than trivially failing."""
    left = rand_table(rng, name="g0")
    perm = list(range(len(left.schema)))
    rng.shuffle(perm)
    cols = tuple(left.schema.columns[i] for i in perm)
    rows = [
        tuple(rand_value(rng, c.ctype) for c in cols)
        for _ in range(rng.randint(0, 8))
    ]
    return left, Table.base("g1", Schema(cols), rows)


def rand_expr(rng: random.Random, depth: int = 2):
    if depth <= 0 or rng.random() < 0.45:
        r = rng.random()
        if r < 0.35:
            return Lit(rng.randint(-9, 9))
        if r < 0.55:
            return Lit(round(rng.uniform(-9, 9), 2))
        if r < 0.7:
            return Lit(rng.choice([t for t in TEXT_POOL if t]))
        return Attr(rng.choice(IDENT_POOL), rng.choice(NAME_POOL))
    op = rng.choice(("+", "-", "*", "/"))
    return BinOp(rand_expr(rng, depth - 1), op, rand_expr(rng, depth - 1))


def rand_pred(rng: random.Random, depth: int = 2):
    if depth <= 0 or rng.random() < 0.5:
        return Cmp(rand_expr(rng, 1), rng.choice(COMPARISON_OPS), rand_expr(rng, 1))
    r = rng.random()
    if r < 0.3:
        return PredNot(rand_pred(rng, depth - 1))
    if r < 0.65:
        return PredAnd(rand_pred(rng, depth - 1), rand_pred(rng, depth - 1))
    return PredOr(rand_pred(rng, depth - 1), rand_pred(rng, depth - 1))


def rand_prop(rng: random.Random, *, relationships: bool = True):
    choices = ["src", "col", "colstar", "forall", "exists"]
    if relationships:
        choices += ["siml", "pfkey"]
    kind = rng.choice(choices)
    if kind == "src":
        return Src(rng.choice(("cities_gdp", "world_gdp", "t0", "has space")))
    if kind == "col":
        return Col(rng.choice(NAME_POOL))
    if kind == "colstar":
        return ColStar(rng.choice(("gdp", "d", "city", "GDP")))
    if kind == "siml":
        return Siml(rng.choice(IDENT_POOL))
    if kind == "pfkey":
        return PfKey(rng.choice(IDENT_POOL))
    if kind == "forall":
        return Forall(rand_pred(rng, 1))
    return Exists(rand_pred(rng, 1))


def rand_signature(rng: random.Random, depth: int = 2, *, relationships: bool = True):
    if depth <= 0 or rng.random() < 0.45:
        return rand_prop(rng, relationships=relationships)
    r = rng.random()
    if r < 0.3:
        return SigNot(rand_signature(rng, depth - 1, relationships=relationships))
    if r < 0.65:
        return SigAnd(
            rand_signature(rng, depth - 1, relationships=relationships),
            rand_signature(rng, depth - 1, relationships=relationships),
        )
    return SigOr(
        rand_signature(rng, depth - 1, relationships=relationships),
        rand_signature(rng, depth - 1, relationships=relationships),
    )


def rand_collection(rng: random.Random, depth: int = 3):
    if depth <= 0 or rng.random() < 0.3:
        return Ident(rng.choice(IDENT_POOL))
    kind = rng.choice(
        (
            "assign", "restrict", "and", "or", "nand",
            "select", "filter", "union", "diff", "prod", "join", "joinp",
        )
    )
    sub = depth - 1
    if kind == "assign":
        return Assign(rng.choice(IDENT_POOL), rand_collection(rng, sub))
    if kind == "restrict":
        return Restrict(rand_collection(rng, sub), rand_signature(rng, 2))
    if kind == "and":
        return CollAnd(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "or":
        return CollOr(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "nand":
        return CollNand(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "select":
        k = rng.randint(1, 3)
        return Select(tuple(rng.sample(NAME_POOL, k)), rand_collection(rng, sub))
    if kind == "filter":
        return Filter(rand_pred(rng, 2), rand_collection(rng, sub))
    if kind == "union":
        return Union(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "diff":
        return Diff(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "prod":
        return Prod(rand_collection(rng, sub), rand_collection(rng, sub))
    if kind == "join":
        return Join(None, rand_collection(rng, sub), rand_collection(rng, sub))
    return Join(rand_pred(rng, 2), rand_collection(rng, sub), rand_collection(rng, sub))


def rand_query(rng: random.Random, max_statements: int = 3) -> QueryAst:
    n = rng.randint(1, max_statements)
    return QueryAst(tuple(rand_collection(rng, 3) for _ in range(n)))


def rand_identifier(rng: random.Random) -> str:
    while True:
        first = rng.choice(string.ascii_letters + "_")
        rest = "".join(
            rng.choice(string.ascii_letters + string.digits + "_")
            for _ in range(rng.randint(0, 6))
        )
        if is_identifier(first + rest):
            return first + rest
