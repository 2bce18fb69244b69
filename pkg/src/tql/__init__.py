"""TQL: query a directory of CSV tables as collections of tables.

The usual flow is ``load_catalog`` then ``parse_source`` then ``run_query``;
everything else is the machinery underneath, exported for direct use.
"""

from .algebra import (
    Collection,
    ResourceLimitError,
    coll_diff,
    coll_intersect,
    coll_union,
    lift_binary,
    lift_unary,
    project,
    restrict,
    row_filter,
    t_diff,
    t_join,
    t_product,
    t_union,
)
from .ast import QueryAst, pretty_print
from .catalog import (
    Catalog,
    CatalogError,
    IngestConfig,
    find_pf_key,
    load_catalog,
    table_similarity,
)
from .cli import export_table, main, render_report, repl
from .engine import EngineConfig, QueryReport, run_naive, run_query, run_sampler
from .eval import Evaluator, RowBinding, eval_expr, eval_query, eval_rowpred
from .infer import (
    AnnotatedAst,
    ConstraintSet,
    derive_constraints,
    explain_lines,
    prune,
)
from .parser import ParseError, lex, parse, parse_source
from .tables import Column, ColumnType, Schema, SchemaError, Table
from .values import Value, arith, compare

__all__ = [
    "AnnotatedAst",
    "Catalog",
    "CatalogError",
    "Collection",
    "Column",
    "ColumnType",
    "ConstraintSet",
    "EngineConfig",
    "Evaluator",
    "IngestConfig",
    "ParseError",
    "QueryAst",
    "QueryReport",
    "ResourceLimitError",
    "RowBinding",
    "Schema",
    "SchemaError",
    "Table",
    "Value",
    "arith",
    "coll_diff",
    "coll_intersect",
    "coll_union",
    "compare",
    "derive_constraints",
    "eval_expr",
    "eval_query",
    "eval_rowpred",
    "explain_lines",
    "export_table",
    "find_pf_key",
    "lex",
    "lift_binary",
    "lift_unary",
    "load_catalog",
    "main",
    "parse",
    "parse_source",
    "pretty_print",
    "project",
    "prune",
    "render_report",
    "repl",
    "restrict",
    "row_filter",
    "run_naive",
    "run_query",
    "run_sampler",
    "t_diff",
    "t_join",
    "t_product",
    "t_union",
    "table_similarity",
]
