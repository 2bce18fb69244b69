"""Execution strategies over a catalog.

``run_naive`` evaluates exhaustively and is the ground truth every other
path is tested against.  ``run_sampler`` trades completeness for bounded
work: it repeatedly re-evaluates the final statement with each identifier
occurrence collapsed to one uniformly drawn table, keeping the distinct
results it stumbles on.  Both honor the same constraint-based pruning.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Iterator, Optional

from .algebra import Collection
from .ast import (
    CollectionExpr,
    PropExpr,
    QueryAst,
    Restrict,
    SigAnd,
    Signature,
    SigNot,
    SigOr,
    child_collections,
)
from .catalog import Catalog
from .eval import Evaluator
from .infer import derive_constraints
from .tables import Table

_STRATEGIES = ("naive", "sampler")


@dataclass
class EngineConfig:
    """Knobs shared by both strategies.

    ``pair_budget`` caps operand pairs per binary node; crossing it is an
    error, not silent truncation.  ``result_budget``/``attempt_budget``
    bound the sampler only.  ``max_rows_per_table`` guards row blowup in
    products and joins.
    """

    strategy: str = "naive"
    pair_budget: int = 10**6
    result_budget: int = 10
    attempt_budget: int = 10**4
    rng_seed: int = 0
    siml_threshold: float = 0.5
    max_rows_per_table: int = 10**6
    prune_enabled: bool = True

    def __post_init__(self) -> None:
        if self.strategy not in _STRATEGIES:
            raise ValueError(f"unknown strategy: {self.strategy!r}")
        for name in ("pair_budget", "result_budget", "attempt_budget", "max_rows_per_table"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must fit in 64 bits")
        if not 0.0 <= self.siml_threshold <= 1.0:
            raise ValueError("siml_threshold must be within [0, 1]")


@dataclass
class QueryReport:
    """Everything one run produced: the result collection, the same
    tables in presentation order, and the run's bookkeeping."""

    result: Collection
    tables: list[Table]
    counters: dict[str, int]
    warnings: list[str]
    elapsed_ms: float
    strategy: str


def _signature_props(s: Signature) -> Iterator[PropExpr]:
    match s:
        case SigNot(inner):
            yield from _signature_props(inner)
        case SigAnd(left, right) | SigOr(left, right):
            yield from _signature_props(left)
            yield from _signature_props(right)
        case _:
            yield s  # type: ignore[misc]


def _statement_props(stmt: CollectionExpr) -> list[PropExpr]:
    """Property leaves of every signature mentioned in one statement."""
    props: list[PropExpr] = []

    def walk(node: CollectionExpr) -> None:
        if isinstance(node, Restrict):
            props.extend(_signature_props(node.signature))
        for child in child_collections(node):
            walk(child)

    walk(stmt)
    return props


def _rank(q: QueryAst, result: Collection, ev: Evaluator) -> list[Table]:
    """Naive presentation order: tables satisfying more of the query's
    property constraints first, names as tiebreak."""
    props = _statement_props(q.statements[-1])

    def key(t: Table) -> tuple:
        score = sum(1 for p in props if ev.eval_prop(p, t))
        return (-score, t.display_name, t.content_hash)

    return sorted(result.members, key=key)


def run_naive(
    q: QueryAst,
    catalog: Catalog,
    config: EngineConfig,
    *,
    env: Optional[dict[str, Collection]] = None,
) -> QueryReport:
    annotated = derive_constraints(q) if config.prune_enabled else None
    ev = Evaluator(catalog, config, env=env, annotated=annotated)
    start = time.perf_counter()
    result = ev.eval_query(q)
    elapsed = (time.perf_counter() - start) * 1000.0
    return QueryReport(
        result, _rank(q, result, ev), ev.counters, ev.warnings, elapsed, "naive"
    )


def run_sampler(
    q: QueryAst,
    catalog: Catalog,
    config: EngineConfig,
    *,
    env: Optional[dict[str, Collection]] = None,
) -> QueryReport:
    annotated = derive_constraints(q) if config.prune_enabled else None
    rng = random.Random(config.rng_seed)
    ev = Evaluator(catalog, config, env=env, annotated=annotated, sampling=True, rng=rng)
    start = time.perf_counter()

    # earlier statements exist to set up bindings; they run once, in full
    ev.sampling = False
    for i, stmt in enumerate(q.statements[:-1]):
        ev.eval_collection(stmt, (i,))
    ev.sampling = True

    last_index = len(q.statements) - 1
    last = q.statements[last_index]
    found: dict[str, Table] = {}
    attempts = 0
    first_hit = 0
    while len(found) < config.result_budget and attempts < config.attempt_budget:
        attempts += 1
        draws_before = ev.draws
        for t in ev.eval_collection(last, (last_index,)):
            if t.content_hash not in found:
                found[t.content_hash] = t
                if first_hit == 0:
                    first_hit = attempts
        if ev.draws == draws_before:
            # nothing was sampled, so every further attempt would repeat
            # this one verbatim
            break

    tables = list(found.values())[: config.result_budget]
    counters = dict(ev.counters)
    counters["sampler.attempts"] = attempts
    counters["sampler.results_found"] = len(tables)
    counters["sampler.attempts_to_first_result"] = first_hit
    warnings = list(ev.warnings)
    if attempts >= config.attempt_budget and not found:
        warnings.append(
            f"sampler used all {config.attempt_budget} attempts without a result"
        )
    elapsed = (time.perf_counter() - start) * 1000.0
    return QueryReport(Collection(tables), tables, counters, warnings, elapsed, "sampler")


def run_query(
    q: QueryAst,
    catalog: Catalog,
    config: EngineConfig,
    *,
    env: Optional[dict[str, Collection]] = None,
) -> QueryReport:
    if config.strategy == "sampler":
        return run_sampler(q, catalog, config, env=env)
    return run_naive(q, catalog, config, env=env)
