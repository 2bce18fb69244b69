"""Static analysis of query trees: necessary conditions a table must meet
to contribute to a node's result.

The engine consults these annotations to skip catalog tables (and operand
pairs) that provably cannot matter.  Every rule here is a *necessary*
condition on tables flowing upward, so pruning by it never changes the
final result; that equivalence is what the engine test suite checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

from .algebra import Collection, restrict
from .ast import (
    Assign,
    Col,
    CollAnd,
    CollNand,
    CollOr,
    ColStar,
    CollectionExpr,
    Diff,
    Filter,
    Ident,
    Join,
    Prod,
    PropExpr,
    QueryAst,
    Restrict,
    Select,
    SigAnd,
    Signature,
    Src,
    Union as CollUnion,
    child_collections,
    join_requirements,
    path_label,
    pred_columns,
    root_ident,
)
from .tables import Table


@dataclass(frozen=True, order=True)
class ColumnConstraint:
    """A column the table must provide: by exact name, or as a
    case-insensitive substring of some column name (the COL* form)."""

    name: str
    kind: str = "exact"  # "exact" | "contains"

    def __post_init__(self) -> None:
        if self.kind not in ("exact", "contains"):
            raise ValueError(f"bad column constraint kind: {self.kind!r}")

    def holds_for(self, names: Iterable[str]) -> bool:
        if self.kind == "exact":
            return self.name in names
        needle = self.name.lower()
        return any(needle in n.lower() for n in names)


@dataclass(frozen=True, order=True)
class SourceConstraint:
    """A name the table's provenance set must contain."""

    name: str

    def holds_for(self, provenance: frozenset[str]) -> bool:
        return self.name in provenance


PairCheck = Union[ColumnConstraint, SourceConstraint]


@dataclass(frozen=True)
class ConstraintSet:
    """What must be true of any table that matters at one tree node."""

    required_columns: frozenset[ColumnConstraint] = frozenset()
    required_sources: frozenset[str] = frozenset()
    # checks against the *combined* output of a binary node, testable per
    # operand pair before the node runs
    pair_constraints: tuple[PairCheck, ...] = ()
    provably_empty: bool = False

    def merged(self, other: "ConstraintSet") -> "ConstraintSet":
        pairs = self.pair_constraints + tuple(
            p for p in other.pair_constraints if p not in self.pair_constraints
        )
        return ConstraintSet(
            self.required_columns | other.required_columns,
            self.required_sources | other.required_sources,
            pairs,
            self.provably_empty or other.provably_empty,
        )

    def is_trivial(self) -> bool:
        return (
            not self.required_columns
            and not self.required_sources
            and not self.pair_constraints
            and not self.provably_empty
        )

    def table_satisfies(self, t: Table) -> bool:
        """Leaf test: does this catalog table meet every per-table
        requirement?  Pair constraints are deliberately not consulted;
        they only make sense for a combined pair."""
        names = t.schema.names
        return all(c.holds_for(names) for c in self.required_columns) and all(
            s in t.provenance for s in self.required_sources
        )

    def describe(self) -> str:
        parts: list[str] = []
        if self.provably_empty:
            parts.append("provably empty")
        for c in sorted(self.required_columns):
            verb = "column" if c.kind == "exact" else "column containing"
            parts.append(f"requires {verb} {c.name!r}")
        for s in sorted(self.required_sources):
            parts.append(f"requires source {s!r}")
        for p in self.pair_constraints:
            if isinstance(p, SourceConstraint):
                parts.append(f"pair requires source {p.name!r}")
            else:
                verb = "column" if p.kind == "exact" else "column containing"
                parts.append(f"pair requires {verb} {p.name!r}")
        return "; ".join(parts) if parts else "no constraints"


EMPTY_CONSTRAINTS = ConstraintSet()


@dataclass
class AnnotatedAst:
    """A query plus, per collection node (keyed by tree path), the
    conditions any table must satisfy to survive past that node."""

    query: QueryAst
    constraints: dict[tuple[int, ...], ConstraintSet] = field(default_factory=dict)

    def at(self, path: tuple[int, ...]) -> ConstraintSet:
        return self.constraints.get(path, EMPTY_CONSTRAINTS)


def _signature_fragments(
    sig: Signature,
) -> tuple[frozenset[ColumnConstraint], frozenset[str]]:
    """Column/source requirements implied by a signature.

    Only top-level conjuncts count: anything under NOT or OR is not a
    necessary condition.  SIML/PFKEY/FORALL/EXISTS inspect table contents,
    so they never prune.
    """
    cols: set[ColumnConstraint] = set()
    srcs: set[str] = set()

    def conjuncts(s: Signature) -> Iterable[PropExpr]:
        if isinstance(s, SigAnd):
            yield from conjuncts(s.left)
            yield from conjuncts(s.right)
        else:
            yield s  # type: ignore[misc]

    for prop in conjuncts(sig):
        match prop:
            case Col(name):
                cols.add(ColumnConstraint(name, "exact"))
            case ColStar(name):
                cols.add(ColumnConstraint(name, "contains"))
            case Src(name):
                srcs.add(name)
            case _:
                pass
    return frozenset(cols), frozenset(srcs)


def _as_pair_checks(
    cols: frozenset[ColumnConstraint], srcs: frozenset[str]
) -> tuple[PairCheck, ...]:
    return tuple(sorted(cols)) + tuple(SourceConstraint(s) for s in sorted(srcs))


class _Analysis:
    def __init__(self) -> None:
        self.constraints: dict[tuple[int, ...], ConstraintSet] = {}

    def add(self, path: tuple[int, ...], cs: ConstraintSet) -> None:
        if cs.is_trivial():
            return
        self.constraints[path] = self.constraints.get(path, EMPTY_CONSTRAINTS).merged(cs)

    def push(
        self,
        node: CollectionExpr,
        path: tuple[int, ...],
        cols: frozenset[ColumnConstraint],
        srcs: frozenset[str],
    ) -> None:
        """Attach requirements where they can act.

        At identifier-rooted nodes they prune catalog lookups directly; on
        binary combiners over two collections they become pair checks; at
        set operators and table functions they stay as node-level facts
        usable only for refutation.  The push follows restriction chains
        but stops at an assignment: the bound value is shared, so it must
        not be narrowed for one consumer's sake.
        """
        if not cols and not srcs:
            return
        match node:
            case Ident() | Assign():
                self.add(path, ConstraintSet(cols, srcs))
            case Restrict(base, _):
                self.add(path, ConstraintSet(cols, srcs))
                self.push(base, path + (0,), cols, srcs)
            case Prod() | Join():
                self.add(
                    path, ConstraintSet(pair_constraints=_as_pair_checks(cols, srcs))
                )
            case _:
                # refutation only; never crosses UNION/DIFF or the
                # collection combinators
                self.add(path, ConstraintSet(cols, srcs))

    # -- downward pass ----------------------------------------------------

    def visit(self, node: CollectionExpr, path: tuple[int, ...]) -> None:
        match node:
            case Select(columns, source):
                self.push(
                    source,
                    path + (0,),
                    frozenset(ColumnConstraint(c, "exact") for c in columns),
                    frozenset(),
                )
            case Filter(predicate, source):
                self.push(
                    source,
                    path + (0,),
                    frozenset(
                        ColumnConstraint(c, "exact") for c in pred_columns(predicate)
                    ),
                    frozenset(),
                )
            case Join(predicate, left, right) if predicate is not None:
                lcols, rcols, _ = join_requirements(
                    predicate, root_ident(left), root_ident(right)
                )
                self.push(
                    left,
                    path + (0,),
                    frozenset(ColumnConstraint(c, "exact") for c in lcols),
                    frozenset(),
                )
                self.push(
                    right,
                    path + (1,),
                    frozenset(ColumnConstraint(c, "exact") for c in rcols),
                    frozenset(),
                )
            case Restrict(base, signature):
                cols, srcs = _signature_fragments(signature)
                self.push(base, path + (0,), cols, srcs)
            case _:
                pass
        for i, child in enumerate(child_collections(node)):
            self.visit(child, path + (i,))

    # -- upward pass ------------------------------------------------------

    def known_columns(self, node: CollectionExpr) -> Optional[frozenset[str]]:
        """The exact column-name set every member of this node's value
        must have, when that is statically determined."""
        match node:
            case Select(columns, _):
                return frozenset(columns)
            case Restrict(base, _) | Assign(_, base) | Filter(_, base):
                return self.known_columns(base)
            case CollUnion(left, right) | Diff(left, right):
                # either operand pins the shape: the table function is
                # defined only on identically-named schemas
                return self.known_columns(left) or self.known_columns(right)
            case CollNand(left, _):
                return self.known_columns(left)
            case CollAnd(left, right) | CollOr(left, right):
                k0, k1 = self.known_columns(left), self.known_columns(right)
                if k0 is not None and k1 is not None and k0 == k1:
                    return k0
                return None
            case _:
                return None

    def sweep_empty(self, node: CollectionExpr, path: tuple[int, ...]) -> bool:
        kids = child_collections(node)
        child_empty = [
            self.sweep_empty(c, path + (i,)) for i, c in enumerate(kids)
        ]
        empty = self.at(path).provably_empty
        if not empty:
            match node:
                case CollOr():
                    empty = all(child_empty)
                case CollAnd():
                    empty = any(child_empty)
                case CollNand():
                    empty = child_empty[0]
                case _ if kids:
                    # every table function is undefined without operands
                    empty = any(child_empty)
                case _:
                    pass
        if not empty:
            known = self.known_columns(node)
            cs = self.at(path)
            if known is not None and not all(
                c.holds_for(known) for c in cs.required_columns
            ):
                empty = True
        if empty and not self.at(path).provably_empty:
            self.add(path, ConstraintSet(provably_empty=True))
        return empty

    def at(self, path: tuple[int, ...]) -> ConstraintSet:
        return self.constraints.get(path, EMPTY_CONSTRAINTS)


def derive_constraints(query: QueryAst) -> AnnotatedAst:
    """Annotate every collection node with conditions a table must meet
    to influence the query's results."""
    a = _Analysis()
    for i, stmt in enumerate(query.statements):
        a.visit(stmt, (i,))
    for i, stmt in enumerate(query.statements):
        a.sweep_empty(stmt, (i,))
    return AnnotatedAst(query, a.constraints)


def prune(universe: Collection, cs: ConstraintSet) -> Collection:
    """Drop universe tables that cannot satisfy a leaf's constraints."""
    if cs.provably_empty:
        return Collection()
    if not cs.required_columns and not cs.required_sources:
        return universe
    return restrict(universe, cs.table_satisfies)


def pair_satisfiable(
    checks: Sequence[PairCheck],
    combined_columns: Optional[Sequence[str]],
    combined_provenance: frozenset[str],
) -> bool:
    """Test a prospective operand pair against a node's pair constraints,
    given the column names its output *would* have.  ``None`` columns
    means the operation is undefined for the pair; the check passes and
    the operation itself discards the pair."""
    if combined_columns is None:
        return True
    for check in checks:
        if isinstance(check, SourceConstraint):
            if not check.holds_for(combined_provenance):
                return False
        elif not check.holds_for(combined_columns):
            return False
    return True


def explain_lines(annotated: AnnotatedAst) -> list[str]:
    """One line per collection node, preorder, for the --explain flag."""
    lines: list[str] = []

    def walk(node: CollectionExpr, path: tuple[int, ...]) -> None:
        lines.append(f"{path_label(path, node)}  {annotated.at(path).describe()}")
        for i, child in enumerate(child_collections(node)):
            walk(child, path + (i,))

    for i, stmt in enumerate(annotated.query.statements):
        walk(stmt, (i,))
    return lines
