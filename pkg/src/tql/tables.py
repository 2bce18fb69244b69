"""In-memory relations: typed schemas, provenance, and content-hash identity.

A Table is equal to another exactly when their canonical forms match, where
the canonical form sorts columns by name and rows by value.  Physical layout
(row order, column order) and labels (table name, provenance) do not affect
identity, which is what lets collections behave as honest sets of tables.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Optional, Sequence

from .values import Value, canonical_token, sort_key


class ColumnType(Enum):
    NUMERIC = "numeric"
    TEXT = "text"


class SchemaError(ValueError):
    """A schema or row set violates a structural invariant."""


@dataclass(frozen=True)
class Column:
    name: str
    ctype: ColumnType


@dataclass(frozen=True)
class Schema:
    columns: tuple[Column, ...]

    def __post_init__(self) -> None:
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise SchemaError(f"duplicate column names: {dupes}")

    @classmethod
    def of(cls, *pairs: tuple[str, ColumnType]) -> "Schema":
        return cls(tuple(Column(n, t) for n, t in pairs))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def index_of(self, name: str) -> Optional[int]:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        return None

    def has(self, name: str) -> bool:
        return self.index_of(name) is not None

    def type_of(self, name: str) -> Optional[ColumnType]:
        i = self.index_of(name)
        return None if i is None else self.columns[i].ctype

    def __len__(self) -> int:
        return len(self.columns)

    def __iter__(self) -> Iterator[Column]:
        return iter(self.columns)


@dataclass(frozen=True, eq=False)
class Table:
    """A duplicate-free relation with a name, provenance, schema, and rows.

    Equality and hashing go through ``content_hash``; two tables with the
    same cells under any row/column permutation compare equal even when
    their names differ.
    """

    name: Optional[str]
    provenance: frozenset[str]
    schema: Schema
    rows: tuple[tuple[Value, ...], ...]
    content_hash: str = field(init=False, repr=False)

    def __post_init__(self) -> None:
        if not self.provenance:
            raise SchemaError("provenance must be nonempty")
        arity = len(self.schema)
        normalized = []
        for r in self.rows:
            t = tuple(r)
            if len(t) != arity:
                raise SchemaError(f"row arity {len(t)} does not match schema arity {arity}")
            normalized.append(t)
        # set semantics: keep first occurrence of each distinct row
        deduped = tuple(dict.fromkeys(normalized))
        object.__setattr__(self, "rows", deduped)
        object.__setattr__(self, "content_hash", _content_hash(self.schema, deduped))

    @classmethod
    def base(cls, name: str, schema: Schema, rows: Iterable[Sequence[Value]]) -> "Table":
        return cls(name, frozenset({name}), schema, tuple(tuple(r) for r in rows))

    @classmethod
    def derived(
        cls,
        schema: Schema,
        rows: Iterable[Sequence[Value]],
        provenance: frozenset[str],
        name: Optional[str] = None,
    ) -> "Table":
        return cls(name, provenance, schema, tuple(tuple(r) for r in rows))

    @property
    def display_name(self) -> str:
        return self.name if self.name is not None else "+".join(sorted(self.provenance))

    @property
    def column_names(self) -> tuple[str, ...]:
        return self.schema.names

    def column_values(self, name: str) -> list[Value]:
        i = self.schema.index_of(name)
        if i is None:
            raise KeyError(name)
        return [r[i] for r in self.rows]

    def canonical_rows(self) -> list[tuple[Value, ...]]:
        """Rows in a layout-independent order (for previews and export)."""
        return sorted(self.rows, key=lambda r: tuple(sort_key(v) for v in r))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Table):
            return NotImplemented
        return self.content_hash == other.content_hash

    def __hash__(self) -> int:
        return int(self.content_hash[:16], 16)

    def __repr__(self) -> str:
        return f"Table({self.display_name!r}, {len(self.schema)} cols, {len(self.rows)} rows)"


def _content_hash(schema: Schema, rows: tuple[tuple[Value, ...], ...]) -> str:
    order = sorted(range(len(schema.columns)), key=lambda i: schema.columns[i].name)
    cols = [[schema.columns[i].name, schema.columns[i].ctype.value] for i in order]
    body = sorted([canonical_token(r[i]) for i in order] for r in rows)
    blob = json.dumps([cols, body], ensure_ascii=False, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8", "surrogatepass")).hexdigest()
