"""Query evaluation over a catalog.

Collections are evaluated bottom-up against an environment of named
collections; an unbound name denotes the whole catalog, bound lazily so
repeated mentions agree.  Row predicates and signatures are plain
recursive interpreters over the AST.

The same evaluator serves both execution strategies.  In sampling mode it
draws one member per identifier occurrence instead of using the full
collection, but only where that is sound: never under the right side of a
NAND (where shrinking an operand can grow the result) and never inside an
assignment's right-hand side (the binding is shared by later consumers).
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Callable, Optional

from .algebra import (
    Collection,
    coll_diff,
    coll_intersect,
    coll_union,
    lift_binary,
    lift_unary,
    natural_join_columns,
    product_columns,
    project,
    restrict,
    row_filter,
    t_diff,
    t_join,
    t_product,
    t_union,
)
from .ast import (
    Assign,
    Attr,
    BinOp,
    Cmp,
    Col,
    CollAnd,
    CollNand,
    CollOr,
    ColStar,
    CollectionExpr,
    Diff,
    Exists,
    Expr,
    Filter,
    Forall,
    FuncExpr,
    Ident,
    Join,
    Lit,
    PfKey,
    PredAnd,
    PredNot,
    PredOr,
    Prod,
    PropExpr,
    QueryAst,
    Restrict,
    RowPred,
    Select,
    SigAnd,
    Signature,
    SigNot,
    SigOr,
    Siml,
    Src,
    Union as FnUnion,
    child_collections,
    join_requirements,
    path_label,
    pred_columns,
    root_ident,
)
from .catalog import Catalog, find_pf_key, table_similarity
from .infer import EMPTY_CONSTRAINTS, AnnotatedAst, ConstraintSet, pair_satisfiable, prune
from .tables import Table
from .values import Value, arith, compare

if TYPE_CHECKING:
    from .engine import EngineConfig

MissingHook = Optional[Callable[[str, str], None]]


@dataclass
class RowBinding:
    """Resolves ``ident["col"]`` while a predicate runs over a row.

    Single-operand contexts (FILTER, FORALL, EXISTS) fill the anonymous
    slot, and any identifier resolves there.  Join contexts name each
    operand; identifiers matching neither stay unresolved.
    """

    anonymous: Optional[tuple[Table, tuple[Value, ...]]] = None
    named: dict[str, tuple[Table, tuple[Value, ...]]] = field(default_factory=dict)

    @classmethod
    def single(cls, t: Table, row: tuple[Value, ...]) -> "RowBinding":
        return cls(anonymous=(t, row))

    def lookup(self, ident: str, column: str) -> tuple[bool, Value]:
        entry = self.anonymous if self.anonymous is not None else self.named.get(ident)
        if entry is None:
            return False, None
        t, row = entry
        i = t.schema.index_of(column)
        if i is None:
            return False, None
        return True, row[i]


def eval_expr(e: Expr, b: RowBinding, missing: MissingHook = None) -> Value:
    """A literal, attribute lookup, or arithmetic tree over one row.

    An attribute that does not resolve yields Null (so the enclosing
    comparison is false) and reports through ``missing``.
    """
    match e:
        case Lit(v):
            return v
        case Attr(ident, column):
            ok, v = b.lookup(ident, column)
            if not ok and missing is not None:
                missing(ident, column)
            return v
        case BinOp(left, op, right):
            return arith(eval_expr(left, b, missing), op, eval_expr(right, b, missing))
        case _:  # pragma: no cover
            raise TypeError(f"not an expression node: {e!r}")


def eval_rowpred(p: RowPred, b: RowBinding, missing: MissingHook = None) -> bool:
    match p:
        case Cmp(left, op, right):
            return compare(eval_expr(left, b, missing), op, eval_expr(right, b, missing))
        case PredNot(inner):
            return not eval_rowpred(inner, b, missing)
        case PredAnd(left, right):
            return eval_rowpred(left, b, missing) and eval_rowpred(right, b, missing)
        case PredOr(left, right):
            return eval_rowpred(left, b, missing) or eval_rowpred(right, b, missing)
        case _:  # pragma: no cover
            raise TypeError(f"not a predicate node: {p!r}")


def _contains_assign(node: CollectionExpr) -> bool:
    if isinstance(node, Assign):
        return True
    return any(_contains_assign(c) for c in child_collections(node))


class Evaluator:
    """One query's evaluation state: environment, counters, warnings.

    ``annotated`` enables constraint-based pruning; without it every node
    sees its full operand collections.  ``sampling`` (with an ``rng``)
    turns identifier leaves into single uniform draws where sound.
    """

    def __init__(
        self,
        catalog: Catalog,
        config: "EngineConfig",
        *,
        env: Optional[dict[str, Collection]] = None,
        annotated: Optional[AnnotatedAst] = None,
        sampling: bool = False,
        rng: Optional[random.Random] = None,
    ) -> None:
        self.catalog = catalog
        self.config = config
        self.env: dict[str, Collection] = env if env is not None else {}
        self.annotated = annotated
        self.sampling = sampling
        self.rng = rng
        self.counters: dict[str, int] = {}
        self.warnings: list[str] = []
        self.draws = 0
        self._warned: set[tuple[str, str]] = set()
        self._no_sampling_depth = 0

    # -- bookkeeping --------------------------------------------------------

    def warn(self, key: tuple[str, str], message: str) -> None:
        if key not in self._warned:
            self._warned.add(key)
            self.warnings.append(message)

    def _count(self, label: str, metric: str, amount: int) -> None:
        key = f"{label}.{metric}"
        self.counters[key] = self.counters.get(key, 0) + amount

    def _attr_missing(self, ident: str, column: str) -> None:
        self.warn(
            ("attr", ident),
            f'attribute {ident}["{column}"] did not resolve;'
            " its comparisons evaluate false",
        )

    def _lookup(self, name: str) -> Collection:
        # a fresh name means the whole catalog, remembered so every
        # mention within the query denotes the same collection
        if name not in self.env:
            self.env[name] = self.catalog.universe
        return self.env[name]

    def _constraints_at(self, path: tuple[int, ...]) -> ConstraintSet:
        if self.annotated is None:
            return EMPTY_CONSTRAINTS
        return self.annotated.at(path)

    # -- collection evaluation ----------------------------------------------

    def eval_query(self, q: QueryAst) -> Collection:
        result = Collection()
        for i, stmt in enumerate(q.statements):
            result = self.eval_collection(stmt, (i,))
        return result

    def eval_collection(
        self, c: CollectionExpr, path: tuple[int, ...], polarity: bool = True
    ) -> Collection:
        cs = self._constraints_at(path)
        if cs.provably_empty and not _contains_assign(c):
            # nothing here can reach the result; skipping is safe only
            # when no binding would be lost
            self._count(path_label(path, c), "skipped", 1)
            return Collection()
        match c:
            case Ident(name):
                coll = self._lookup(name)
                label = path_label(path, c)
                self._count(label, "considered", len(coll))
                if cs.required_columns or cs.required_sources:
                    kept = prune(coll, cs)
                    self._count(label, "pruned", len(coll) - len(kept))
                    coll = kept
                if (
                    self.sampling
                    and polarity
                    and self._no_sampling_depth == 0
                    and self.rng is not None
                    and len(coll) > 0
                ):
                    self.draws += 1
                    return Collection([self.rng.choice(coll.sorted_members())])
                return coll
            case Assign(name, value):
                self._no_sampling_depth += 1
                try:
                    coll = self.eval_collection(value, path + (0,), True)
                finally:
                    self._no_sampling_depth -= 1
                self.env[name] = coll
                return coll
            case Restrict(base, signature):
                coll = self.eval_collection(base, path + (0,), polarity)
                self._count(path_label(path, c), "considered", len(coll))
                return restrict(coll, lambda t: self.eval_signature(signature, t))
            case CollAnd(left, right):
                return coll_intersect(
                    self.eval_collection(left, path + (0,), polarity),
                    self.eval_collection(right, path + (1,), polarity),
                )
            case CollOr(left, right):
                return coll_union(
                    self.eval_collection(left, path + (0,), polarity),
                    self.eval_collection(right, path + (1,), polarity),
                )
            case CollNand(left, right):
                # sampling the subtracted side would shrink it and could
                # grow the difference, so polarity flips there
                return coll_diff(
                    self.eval_collection(left, path + (0,), polarity),
                    self.eval_collection(right, path + (1,), not polarity),
                )
            case _:
                return self.eval_func(c, path, polarity)

    def eval_func(
        self, f: FuncExpr, path: tuple[int, ...], polarity: bool = True
    ) -> Collection:
        match f:
            case Select(columns, source):
                coll = self.eval_collection(source, path + (0,), polarity)
                return lift_unary(lambda t: project(t, columns), coll)
            case Filter(predicate, source):
                coll = self.eval_collection(source, path + (0,), polarity)
                required = pred_columns(predicate)

                def filt(t: Table) -> Optional[Table]:
                    return row_filter(
                        t,
                        lambda row: eval_rowpred(
                            predicate, RowBinding.single(t, row), self._attr_missing
                        ),
                        required,
                    )

                return lift_unary(filt, coll)
            case FnUnion():
                return self._binary(f, path, polarity, t_union)
            case Diff():
                return self._binary(f, path, polarity, t_diff)
            case Prod():
                return self._binary(
                    f,
                    path,
                    polarity,
                    lambda a, b: t_product(
                        a, b, row_limit=self.config.max_rows_per_table
                    ),
                    pair_columns=lambda a, b: [c.name for c in product_columns(a, b)],
                )
            case Join(predicate, left, right):
                if predicate is None:
                    return self._binary(
                        f,
                        path,
                        polarity,
                        lambda a, b: t_join(
                            a, b, row_limit=self.config.max_rows_per_table
                        ),
                        pair_columns=_natural_names,
                    )
                root_l, root_r = root_ident(left), root_ident(right)
                req_l, req_r, loose = join_requirements(predicate, root_l, root_r)
                for ident in loose:
                    self.warn(
                        ("attr", ident),
                        f'identifier "{ident}" in a join predicate names'
                        " neither operand; its comparisons evaluate false",
                    )

                def theta(a: Table, b: Table) -> Optional[Table]:
                    scope = RowBinding()
                    if root_l is not None and root_l != root_r:
                        scope.named[root_l] = (a, ())
                    if root_r is not None and root_l != root_r:
                        scope.named[root_r] = (b, ())

                    def pred(ra: tuple, rb: tuple) -> bool:
                        if root_l in scope.named:
                            scope.named[root_l] = (a, ra)
                        if root_r in scope.named:
                            scope.named[root_r] = (b, rb)
                        return eval_rowpred(predicate, scope, self._attr_missing)

                    return t_join(
                        a,
                        b,
                        pred,
                        required_left=req_l,
                        required_right=req_r,
                        row_limit=self.config.max_rows_per_table,
                    )

                return self._binary(
                    f,
                    path,
                    polarity,
                    theta,
                    pair_columns=lambda a, b: [c.name for c in product_columns(a, b)],
                )
            case _:  # pragma: no cover
                raise TypeError(f"not a function node: {f!r}")

    def _binary(
        self,
        node: FuncExpr,
        path: tuple[int, ...],
        polarity: bool,
        g: Callable[[Table, Table], Optional[Table]],
        pair_columns: Optional[Callable[[Table, Table], Optional[list[str]]]] = None,
    ) -> Collection:
        left, right = child_collections(node)
        c0 = self.eval_collection(left, path + (0,), polarity)
        c1 = self.eval_collection(right, path + (1,), polarity)
        label = path_label(path, node)
        self._count(label, "pairs", len(c0) * len(c1))
        checks = self._constraints_at(path).pair_constraints
        apply = g
        if checks and pair_columns is not None:

            def apply(a: Table, b: Table) -> Optional[Table]:
                if not pair_satisfiable(
                    checks, pair_columns(a, b), a.provenance | b.provenance
                ):
                    self._count(label, "pairs_pruned", 1)
                    return None
                return g(a, b)

        return lift_binary(
            apply, c0, c1, pair_budget=self.config.pair_budget, label=label
        )

    # -- signatures -----------------------------------------------------------

    def eval_signature(self, s: Signature, t: Table) -> bool:
        match s:
            case SigNot(inner):
                return not self.eval_signature(inner, t)
            case SigAnd(left, right):
                return self.eval_signature(left, t) and self.eval_signature(right, t)
            case SigOr(left, right):
                return self.eval_signature(left, t) or self.eval_signature(right, t)
            case _:
                return self.eval_prop(s, t)

    def eval_prop(self, p: PropExpr, t: Table) -> bool:
        match p:
            case Src(name):
                return name in t.provenance
            case Col(name):
                return t.schema.has(name)
            case ColStar(name):
                needle = name.lower()
                return any(needle in c.name.lower() for c in t.schema.columns)
            case Siml(ident):
                others = self._lookup(ident)
                return any(
                    table_similarity(t, u, self.catalog) >= self.config.siml_threshold
                    for u in others
                )
            case PfKey(ident):
                others = self._lookup(ident)
                return any(find_pf_key(t, u, self.catalog) is not None for u in others)
            case Forall(predicate):
                return all(
                    eval_rowpred(
                        predicate, RowBinding.single(t, row), self._attr_missing
                    )
                    for row in t.rows
                )
            case Exists(predicate):
                return any(
                    eval_rowpred(
                        predicate, RowBinding.single(t, row), self._attr_missing
                    )
                    for row in t.rows
                )
            case _:  # pragma: no cover
                raise TypeError(f"not a property node: {p!r}")


def _natural_names(a: Table, b: Table) -> Optional[list[str]]:
    cols = natural_join_columns(a, b)
    return None if cols is None else [c.name for c in cols]


def eval_query(
    q: QueryAst,
    catalog: Catalog,
    config: "EngineConfig",
    *,
    env: Optional[dict[str, Collection]] = None,
    annotated: Optional[AnnotatedAst] = None,
) -> Collection:
    """Evaluate a parsed query and return the last statement's value."""
    return Evaluator(catalog, config, env=env, annotated=annotated).eval_query(q)
