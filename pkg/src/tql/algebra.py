"""Relational algebra lifted from tables to collections of tables.

Collections are finite sets of Tables under content-hash identity.  Unary and
binary table functions are partial: returning None means "undefined here",
and lifted application simply drops undefined cases instead of raising.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Optional, Sequence

from .tables import Column, Schema, Table
from .values import Value, compare

TableFn1 = Callable[[Table], Optional[Table]]
TableFn2 = Callable[[Table, Table], Optional[Table]]


class ResourceLimitError(RuntimeError):
    """An evaluation step exceeded a configured budget."""


class Collection:
    """A set of tables, deduplicated by content hash.

    Iteration follows first-insertion order, which keeps evaluation
    deterministic without imposing a global sort on every operation.
    """

    __slots__ = ("_by_hash",)

    def __init__(self, tables: Iterable[Table] = ()) -> None:
        by_hash: dict[str, Table] = {}
        for t in tables:
            by_hash.setdefault(t.content_hash, t)
        self._by_hash = by_hash

    @property
    def members(self) -> tuple[Table, ...]:
        return tuple(self._by_hash.values())

    def sorted_members(self) -> list[Table]:
        """Members in canonical (hash) order, for seeded sampling."""
        return sorted(self._by_hash.values(), key=lambda t: t.content_hash)

    def hashes(self) -> frozenset[str]:
        return frozenset(self._by_hash)

    def __len__(self) -> int:
        return len(self._by_hash)

    def __iter__(self) -> Iterator[Table]:
        return iter(self._by_hash.values())

    def __contains__(self, t: Table) -> bool:
        return t.content_hash in self._by_hash

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Collection):
            return NotImplemented
        return self._by_hash.keys() == other._by_hash.keys()

    def __repr__(self) -> str:
        return f"Collection({len(self._by_hash)} tables)"


def coll_union(c0: Collection, c1: Collection) -> Collection:
    return Collection(list(c0) + list(c1))


def coll_intersect(c0: Collection, c1: Collection) -> Collection:
    return Collection(t for t in c0 if t in c1)


def coll_diff(c0: Collection, c1: Collection) -> Collection:
    return Collection(t for t in c0 if t not in c1)


def restrict(c: Collection, p: Callable[[Table], bool]) -> Collection:
    return Collection(t for t in c if p(t))


def lift_unary(f: TableFn1, c: Collection) -> Collection:
    out = []
    for t in c:
        r = f(t)
        if r is not None:
            out.append(r)
    return Collection(out)


def lift_binary(
    g: TableFn2,
    c0: Collection,
    c1: Collection,
    *,
    pair_budget: Optional[int] = None,
    label: str = "binary operation",
) -> Collection:
    total = len(c0) * len(c1)
    if pair_budget is not None and total > pair_budget:
        raise ResourceLimitError(
            f"{label}: {total} operand pairs exceed the pair budget of {pair_budget}"
        )
    out = []
    for t0 in c0:
        for t1 in c1:
            r = g(t0, t1)
            if r is not None:
                out.append(r)
    return Collection(out)


# ---------------------------------------------------------------------------
# table-level operators (partial functions: None = undefined)


def project(t: Table, cols: Sequence[str]) -> Optional[Table]:
    """Projection onto the listed columns, in listed order.

    Undefined when a column is missing or the list repeats a name (a
    repeated name would break schema uniqueness).
    """
    if len(set(cols)) != len(cols):
        return None
    idx = []
    for c in cols:
        i = t.schema.index_of(c)
        if i is None:
            return None
        idx.append(i)
    schema = Schema(tuple(t.schema.columns[i] for i in idx))
    rows = (tuple(r[i] for i in idx) for r in t.rows)
    return Table.derived(schema, rows, t.provenance)


def row_filter(
    t: Table,
    pred: Callable[[tuple[Value, ...]], bool],
    required: Sequence[str] = (),
) -> Optional[Table]:
    """Selection by a row predicate.

    ``required`` lists columns the predicate statically resolves against this
    table; the operation is undefined when one is absent, mirroring the
    constraints pushed down by inference.  Identifiers the predicate could
    not resolve at all are the caller's concern (they evaluate false per
    row with a warning).
    """
    for c in required:
        if not t.schema.has(c):
            return None
    rows = tuple(r for r in t.rows if pred(r))
    return Table.derived(t.schema, rows, t.provenance)


def _union_reorder(t0: Table, t1: Table) -> Optional[list[int]]:
    """Indexes realigning t1's columns to t0's order, or None if the schemas
    are not union-compatible (same name/type multiset)."""
    m0 = {c.name: c.ctype for c in t0.schema.columns}
    m1 = {c.name: c.ctype for c in t1.schema.columns}
    if m0 != m1:
        return None
    return [t1.schema.index_of(c.name) for c in t0.schema.columns]  # type: ignore[misc]


def t_union(t0: Table, t1: Table) -> Optional[Table]:
    order = _union_reorder(t0, t1)
    if order is None:
        return None
    right = (tuple(r[i] for i in order) for r in t1.rows)
    return Table.derived(t0.schema, t0.rows + tuple(right), t0.provenance | t1.provenance)


def t_diff(t0: Table, t1: Table) -> Optional[Table]:
    order = _union_reorder(t0, t1)
    if order is None:
        return None
    gone = {tuple(r[i] for i in order) for r in t1.rows}
    rows = tuple(r for r in t0.rows if r not in gone)
    return Table.derived(t0.schema, rows, t0.provenance | t1.provenance)


def _qualifier(t: Table) -> str:
    return t.name if t.name is not None else "+".join(sorted(t.provenance))


def product_columns(t0: Table, t1: Table) -> list[Column]:
    """Output schema of a product: colliding names get a qualifier prefix,
    and any residual duplicate gets a numeric suffix.  Pure schema
    arithmetic, shared with the pruning prechecks."""
    shared = set(t0.schema.names) & set(t1.schema.names)
    q0, q1 = _qualifier(t0), _qualifier(t1)
    candidates = [
        (f"{q0}.{c.name}" if c.name in shared else c.name, c.ctype) for c in t0.schema.columns
    ] + [
        (f"{q1}.{c.name}" if c.name in shared else c.name, c.ctype) for c in t1.schema.columns
    ]
    seen: dict[str, int] = {}
    out = []
    for name, ctype in candidates:
        if name not in seen:
            seen[name] = 1
            final = name
        else:
            seen[name] += 1
            final = f"{name}.{seen[name]}"
            while final in seen:
                seen[name] += 1
                final = f"{name}.{seen[name]}"
            seen[final] = 1
        out.append(Column(final, ctype))
    return out


def t_product(t0: Table, t1: Table, *, row_limit: Optional[int] = None) -> Optional[Table]:
    if row_limit is not None and len(t0.rows) * len(t1.rows) > row_limit:
        raise ResourceLimitError(
            f"product of {len(t0.rows)}x{len(t1.rows)} rows exceeds the row limit of {row_limit}"
        )
    schema = Schema(tuple(product_columns(t0, t1)))
    rows = (r0 + r1 for r0 in t0.rows for r1 in t1.rows)
    return Table.derived(schema, rows, t0.provenance | t1.provenance)


def natural_join_columns(t0: Table, t1: Table) -> Optional[list[Column]]:
    """Output schema of a natural join, or None when no column is shared."""
    shared = [c.name for c in t0.schema.columns if t1.schema.has(c.name)]
    if not shared:
        return None
    rest = [c for c in t1.schema.columns if c.name not in set(shared)]
    return list(t0.schema.columns) + rest


def t_join(
    t0: Table,
    t1: Table,
    pred: Optional[Callable[[tuple[Value, ...], tuple[Value, ...]], bool]] = None,
    *,
    required_left: Sequence[str] = (),
    required_right: Sequence[str] = (),
    row_limit: Optional[int] = None,
) -> Optional[Table]:
    """Theta join (product then filter) when pred is given, else natural join
    on every shared column name (undefined without one)."""
    if pred is None:
        return _natural_join(t0, t1, row_limit=row_limit)
    for c in required_left:
        if not t0.schema.has(c):
            return None
    for c in required_right:
        if not t1.schema.has(c):
            return None
    base = t_product(t0, t1, row_limit=row_limit)
    assert base is not None
    n0 = len(t0.schema)
    rows = tuple(r for r in base.rows if pred(r[:n0], r[n0:]))
    return Table.derived(base.schema, rows, base.provenance)


def _natural_join(t0: Table, t1: Table, *, row_limit: Optional[int] = None) -> Optional[Table]:
    cols = natural_join_columns(t0, t1)
    if cols is None:
        return None
    if row_limit is not None and len(t0.rows) * len(t1.rows) > row_limit:
        raise ResourceLimitError(
            f"join of {len(t0.rows)}x{len(t1.rows)} rows exceeds the row limit of {row_limit}"
        )
    shared = [c.name for c in t0.schema.columns if t1.schema.has(c.name)]
    li = [t0.schema.index_of(n) for n in shared]
    ri = [t1.schema.index_of(n) for n in shared]
    rest = [i for i, c in enumerate(t1.schema.columns) if c.name not in set(shared)]

    # hash join; a null key never matches anything, same as comparison rules
    index: dict[tuple, list[tuple]] = {}
    for r1 in t1.rows:
        key = tuple(r1[i] for i in ri)
        if any(k is None for k in key):
            continue
        index.setdefault(key, []).append(r1)
    out = []
    for r0 in t0.rows:
        key = tuple(r0[i] for i in li)
        if any(k is None for k in key):
            continue
        for r1 in index.get(key, ()):
            if all(compare(r0[a], "=", r1[b]) for a, b in zip(li, ri)):
                out.append(r0 + tuple(r1[i] for i in rest))
    return Table.derived(Schema(tuple(cols)), out, t0.provenance | t1.provenance)
