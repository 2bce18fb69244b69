"""CSV ingestion and discovery metadata.

A catalog is the universe of base tables plus per-column statistics
(distinct value sets, key-candidate flags) that similarity scoring and
primary/foreign-key detection run on.  Statistics for derived tables are
computed on demand so the catalog itself stays immutable after load.
"""

from __future__ import annotations

import csv
import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .algebra import Collection
from .tables import Column, ColumnType, Schema, Table
from .values import Value


class CatalogError(Exception):
    """The catalog root is unusable (missing, unreadable, not a directory)."""


@dataclass(frozen=True)
class IngestConfig:
    delimiter: str = ","
    # utf-8-sig reads plain UTF-8 and quietly drops a byte-order mark
    encoding: str = "utf-8-sig"


@dataclass(frozen=True)
class ColumnStats:
    distinct: frozenset[Value]
    non_null_count: int

    @property
    def is_key_candidate(self) -> bool:
        # all non-null values distinct, and at least one of them
        return self.non_null_count > 0 and self.non_null_count == len(self.distinct)


def column_stats(t: Table) -> tuple[ColumnStats, ...]:
    out = []
    for i in range(len(t.schema)):
        vals = [r[i] for r in t.rows if r[i] is not None]
        out.append(ColumnStats(frozenset(vals), len(vals)))
    return tuple(out)


@dataclass
class Catalog:
    universe: Collection
    by_name: dict[str, Table]
    warnings: list[str] = field(default_factory=list)
    root: Optional[str] = None
    _stats: dict[str, tuple[ColumnStats, ...]] = field(default_factory=dict)

    def names(self) -> list[str]:
        return sorted(self.by_name)

    def table(self, name: str) -> Optional[Table]:
        return self.by_name.get(name)

    def stats_for(self, t: Table) -> tuple[ColumnStats, ...]:
        cached = self._stats.get(t.content_hash)
        return cached if cached is not None else column_stats(t)

    def content_hash(self) -> str:
        """Hash of the whole universe, for load-determinism checks."""
        digest = hashlib.sha256()
        for name in self.names():
            digest.update(name.encode("utf-8"))
            digest.update(self.by_name[name].content_hash.encode("ascii"))
        return digest.hexdigest()


class _MalformedFile(ValueError):
    pass


_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?\Z")


def parse_number(cell: str) -> Optional[Value]:
    """The one numeric-cell rule: int when it looks integral, float when it
    looks fractional, None when it is not a (finite) number at all."""
    s = cell.strip()
    if _INT_RE.match(s):
        return int(s)
    if _FLOAT_RE.match(s):
        v = float(s)
        return v if math.isfinite(v) else None
    return None


def _ingest_csv(path: Path, config: IngestConfig) -> Table:
    try:
        with open(path, newline="", encoding=config.encoding) as f:
            raw = list(csv.reader(f, delimiter=config.delimiter))
    except UnicodeDecodeError as e:
        raise _MalformedFile(f"not decodable as {config.encoding}: {e}") from None
    except csv.Error as e:
        raise _MalformedFile(f"csv parse failure: {e}") from None
    if not raw:
        raise _MalformedFile("empty file (missing header row)")
    header = raw[0]
    if not header or any(h.strip() == "" for h in header):
        raise _MalformedFile("header row has an empty column name")
    if len(set(header)) != len(header):
        raise _MalformedFile("header row repeats a column name")
    body = raw[1:]
    for k, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise _MalformedFile(f"row {k} has {len(row)} cells, expected {len(header)}")

    types = []
    for i in range(len(header)):
        cells = [row[i] for row in body if row[i].strip() != ""]
        numeric = all(parse_number(c) is not None for c in cells)
        types.append(ColumnType.NUMERIC if numeric else ColumnType.TEXT)

    rows = []
    for row in body:
        out: list[Value] = []
        for i, cell in enumerate(row):
            if cell.strip() == "":
                out.append(None)
            elif types[i] is ColumnType.NUMERIC:
                out.append(parse_number(cell))
            else:
                out.append(cell)
        rows.append(tuple(out))

    schema = Schema(tuple(Column(h, t) for h, t in zip(header, types)))
    return Table.base(path.stem, schema, rows)


def load_catalog(root, config: Optional[IngestConfig] = None) -> Catalog:
    """Ingest every readable ``*.csv`` in root (non-recursive, name order).

    A malformed file is skipped with a recorded warning; an unusable root is
    fatal.  Two files with identical content would collide under table
    identity, so the later one is skipped with a warning too.
    """
    config = config or IngestConfig()
    p = Path(root)
    if not p.is_dir():
        raise CatalogError(f"catalog root is not a readable directory: {root}")
    tables: list[Table] = []
    by_name: dict[str, Table] = {}
    seen_hashes: dict[str, str] = {}
    warnings: list[str] = []
    for f in sorted(p.glob("*.csv")):
        try:
            t = _ingest_csv(f, config)
        except _MalformedFile as e:
            warnings.append(f"skipped {f.name}: {e}")
            continue
        except OSError as e:
            warnings.append(f"skipped {f.name}: {e}")
            continue
        if t.content_hash in seen_hashes:
            warnings.append(
                f"skipped {f.name}: identical content to {seen_hashes[t.content_hash]}"
            )
            continue
        seen_hashes[t.content_hash] = f.name
        tables.append(t)
        by_name[t.name] = t  # type: ignore[index]
    stats = {t.content_hash: column_stats(t) for t in tables}
    return Catalog(Collection(tables), by_name, warnings, str(root), stats)


def _jaccard(a: frozenset, b: frozenset) -> float:
    if not a and not b:
        return 1.0  # two all-null columns agree perfectly
    union = len(a | b)
    return len(a & b) / union


def _direction(from_stats, to_stats) -> float:
    best_sum = 0.0
    for cs in from_stats:
        best = 0.0
        for ct in to_stats:
            j = _jaccard(cs.distinct, ct.distinct)
            if j > best:
                best = j
        best_sum += best
    return best_sum / len(from_stats)


def table_similarity(a: Table, b: Table, catalog: Catalog) -> float:
    """Symmetric column-content similarity in [0, 1]: each side averages the
    best Jaccard match of its columns against the other side's columns."""
    sa = catalog.stats_for(a)
    sb = catalog.stats_for(b)
    if not sa or not sb:
        return 0.0
    return (_direction(sa, sb) + _direction(sb, sa)) / 2


def find_pf_key(t: Table, candidate: Table, catalog: Catalog) -> Optional[tuple[str, str]]:
    """First (foreign column of t, key column of candidate) pair where the
    key column's non-null values are unique and t's column values form a
    nonempty subset of them.  Candidate key columns are tried in column
    order, then t's columns."""
    cand_stats = catalog.stats_for(candidate)
    t_stats = catalog.stats_for(t)
    for j, ks in enumerate(cand_stats):
        if not ks.is_key_candidate:
            continue
        for i, fs in enumerate(t_stats):
            if fs.distinct and fs.distinct <= ks.distinct:
                return (t.schema.columns[i].name, candidate.schema.columns[j].name)
    return None
