"""A from-scratch textbook relational algebra used as the reference
implementation in differential tests.

Deliberately shares no code with the package's algebra module: relations
are (columns, row set) pairs, operators follow the standard definitions,
and value comparison is re-stated here from the documented rules.  The
only package import is the Table type it is compared against.
"""

from dataclasses import dataclass
from typing import Callable, Optional

from tql.tables import Table


@dataclass
class ORel:
    cols: list[tuple[str, str]]  # (name, "numeric" | "text")
    rows: set[tuple]
    qualifier: str


def from_table(t: Table) -> ORel:
    return ORel(
        [(c.name, c.ctype.value) for c in t.schema.columns],
        set(t.rows),
        t.display_name,
    )


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def compare(a, op: str, b) -> bool:
    if a is None or b is None:
        return False
    if _is_num(a) and _is_num(b):
        pass
    elif isinstance(a, str) and isinstance(b, str):
        pass
    else:
        return False
    if op == "=":
        return a == b
    if op == "!=":
        return a != b
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    if op == ">=":
        return a >= b
    raise ValueError(op)


def project(r: ORel, names: list[str]) -> Optional[ORel]:
    if len(set(names)) != len(names):
        return None
    positions = []
    for n in names:
        hits = [i for i, (cn, _) in enumerate(r.cols) if cn == n]
        if not hits:
            return None
        positions.append(hits[0])
    return ORel(
        [r.cols[i] for i in positions],
        {tuple(row[i] for i in positions) for row in r.rows},
        r.qualifier,
    )


def select(r: ORel, pred: Callable[[dict], bool]) -> ORel:
    keep = set()
    for row in r.rows:
        as_dict = {name: row[i] for i, (name, _) in enumerate(r.cols)}
        if pred(as_dict):
            keep.add(row)
    return ORel(list(r.cols), keep, r.qualifier)


def _compatible(a: ORel, b: ORel) -> Optional[list[int]]:
    """Positions of a's columns within b, when the name->type maps agree."""
    if dict(a.cols) != dict(b.cols):
        return None
    names_b = [n for n, _ in b.cols]
    return [names_b.index(n) for n, _ in a.cols]

def union(a: ORel, b: ORel) -> Optional[ORel]:
    order = _compatible(a, b)
    if order is None:
        return None
    reordered = {tuple(row[i] for i in order) for row in b.rows}
    return ORel(list(a.cols), a.rows | reordered, a.qualifier)


def diff(a: ORel, b: ORel) -> Optional[ORel]:
    order = _compatible(a, b)
    if order is None:
        return None
    reordered = {tuple(row[i] for i in order) for row in b.rows}
    return ORel(list(a.cols), a.rows - reordered, a.qualifier)


def product(a: ORel, b: ORel) -> ORel:
    shared = {n for n, _ in a.cols} & {n for n, _ in b.cols}
    combined: list[tuple[str, str]] = []
    for side, qual in ((a, a.qualifier), (b, b.qualifier)):
        for n, ty in side.cols:
            combined.append((f"{qual}.{n}" if n in shared else n, ty))
    # any names still colliding (e.g. a self-product) take the first free
    # spot among n, n.2, n.3, ...
    final: list[tuple[str, str]] = []
    taken: set[str] = set()
    for n, ty in combined:
        candidate, k = n, 1
        while candidate in taken:
            k += 1
            candidate = f"{n}.{k}"
        taken.add(candidate)
        final.append((candidate, ty))
    rows = {ra + rb for ra in a.rows for rb in b.rows}
    return ORel(final, rows, a.qualifier)


def matches(expected: Optional[ORel], actual: Optional[Table]) -> bool:
    """Structural equality between an oracle relation and an engine table:
    same (name, type) column set, same rows keyed by column name."""
    if expected is None or actual is None:
        return expected is None and actual is None
    engine_cols = {(c.name, c.ctype.value) for c in actual.schema.columns}
    if set(expected.cols) != engine_cols:
        return False
    names = [n for n, _ in expected.cols]
    expected_rows = {frozenset(zip(names, row)) for row in expected.rows}
    actual_names = [c.name for c in actual.schema.columns]
    actual_rows = {frozenset(zip(actual_names, row)) for row in actual.rows}
    return expected_rows == actual_rows
