"""Command-line front end: batch queries, an interactive session, result
rendering, and CSV export.

Exit codes: 0 success (an empty result is success), 1 query parse error,
2 catalog or input error, 3 resource limit hit, 4 export failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path
from typing import IO, Optional

from .algebra import Collection, ResourceLimitError
from .catalog import Catalog, CatalogError, load_catalog
from .engine import EngineConfig, QueryReport, run_query
from .infer import derive_constraints, explain_lines
from .parser import ParseError, parse_source
from .tables import Table
from .values import Value

_PREVIEW_ROWS = 5


# -- rendering ---------------------------------------------------------------


def _cell_csv(v: Value) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _cell_text(v: Value) -> str:
    if v is None:
        return "NULL"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def export_table(t: Table, path: str) -> None:
    """Write a result table as CSV in the ingest dialect.  Loading the file
    back yields the same content hash, except for an all-numeric-looking
    text column, which would re-type as numeric."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(t.schema.names)
        for row in t.canonical_rows():
            w.writerow([_cell_csv(v) for v in row])


def _table_view(t: Table) -> dict:
    return {
        "name": t.display_name,
        "provenance": sorted(t.provenance),
        "columns": [{"name": c.name, "type": c.ctype.value} for c in t.schema.columns],
        "row_count": len(t.rows),
        "preview": [list(r) for r in t.canonical_rows()[:_PREVIEW_ROWS]],
        "content_hash": t.content_hash,
    }


def render_report(
    report: QueryReport,
    as_json: bool,
    *,
    explain: Optional[list[str]] = None,
    show_timings: bool = False,
) -> str:
    """Stable text or JSON rendering.  Timing is reported only on request
    so that identical runs stay byte-identical."""
    if as_json:
        obj: dict = {
            "strategy": report.strategy,
            "results": [_table_view(t) for t in report.tables],
            "counters": {k: report.counters[k] for k in sorted(report.counters)},
            "warnings": list(report.warnings),
            "elapsed_ms": round(report.elapsed_ms, 3) if show_timings else None,
        }
        if explain is not None:
            obj["explain"] = list(explain)
        return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"

    lines: list[str] = []
    if explain:
        lines.append("constraints:")
        lines.extend("  " + e for e in explain)
        lines.append("")
    n = len(report.tables)
    lines.append("0 tables found" if n == 0 else f"{n} table{'s' * (n != 1)} found")
    for i, t in enumerate(report.tables):
        lines.append("")
        lines.append(f"[{i}] {t.display_name}  ({len(t.rows)} rows)")
        lines.append("    source: " + ", ".join(sorted(t.provenance)))
        lines.append(
            "    columns: "
            + ", ".join(f"{c.name}:{c.ctype.value}" for c in t.schema.columns)
        )
        for row in t.canonical_rows()[:_PREVIEW_ROWS]:
            lines.append("    " + " | ".join(_cell_text(v) for v in row))
        if len(t.rows) > _PREVIEW_ROWS:
            lines.append(f"    ... {len(t.rows) - _PREVIEW_ROWS} more rows")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    if show_timings:
        lines.append(f"elapsed: {report.elapsed_ms:.1f} ms")
    return "\n".join(lines) + "\n"


# -- interactive session -----------------------------------------------------


def _coerce_setting(current: object, raw: str) -> object:
    if isinstance(current, bool):
        low = raw.lower()
        if low in ("1", "true", "on", "yes"):
            return True
        if low in ("0", "false", "off", "no"):
            return False
        raise ValueError(f"expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def _run_command(
    stripped: str,
    catalog: Catalog,
    config: EngineConfig,
    env: dict[str, Collection],
    out: IO[str],
) -> Optional[int]:
    """Handle one ``:`` command; a returned int ends the session."""
    parts = stripped.split()
    cmd = parts[0]
    if cmd == ":quit":
        return 0
    if cmd == ":tables":
        for name in catalog.names():
            t = catalog.table(name)
            assert t is not None
            out.write(f"{name}  ({len(t.rows)} rows, {len(t.schema)} columns)\n")
        return None
    if cmd == ":schema":
        if len(parts) != 2:
            out.write("usage: :schema <table>\n")
            return None
        t = catalog.table(parts[1])
        if t is None:
            out.write(f"no such table: {parts[1]}\n")
            return None
        for c in t.schema.columns:
            out.write(f"{c.name}: {c.ctype.value}\n")
        return None
    if cmd == ":set":
        if len(parts) != 3:
            out.write("usage: :set <key> <value>\n")
            return None
        key, raw = parts[1], parts[2]
        if key not in {f.name for f in dataclasses.fields(EngineConfig)}:
            out.write(f"unknown setting: {key}\n")
            return None
        try:
            value = _coerce_setting(getattr(config, key), raw)
            # rebuild to rerun the config invariants before mutating
            dataclasses.replace(config, **{key: value})
        except (TypeError, ValueError) as e:
            out.write(f"bad value for {key}: {e}\n")
            return None
        setattr(config, key, value)
        out.write(f"{key} = {value}\n")
        return None
    if cmd == ":reset":
        env.clear()
        out.write("environment cleared\n")
        return None
    out.write(f"unknown command: {cmd}\n")
    return None


def _execute(
    text: str,
    catalog: Catalog,
    config: EngineConfig,
    env: dict[str, Collection],
    out: IO[str],
) -> None:
    try:
        q = parse_source(text)
    except ParseError as e:
        out.write(f"parse error: {e}\n")
        return
    try:
        report = run_query(q, catalog, config, env=env)
    except ResourceLimitError as e:
        out.write(f"resource limit: {e}\n")
        return
    out.write(render_report(report, False))


def repl(
    catalog: Catalog,
    config: EngineConfig,
    in_stream: IO[str],
    out_stream: IO[str],
) -> int:
    """Read statements (terminated by ``;``) and commands until EOF or
    ``:quit``.  Name bindings persist across inputs."""
    env: dict[str, Collection] = {}
    buffer: list[str] = []
    while True:
        out_stream.write("tql> " if not buffer else "...> ")
        out_stream.flush()
        line = in_stream.readline()
        if line == "":
            out_stream.write("\n")
            return 0
        stripped = line.strip()
        if not buffer:
            if not stripped:
                continue
            if stripped.startswith(":"):
                code = _run_command(stripped, catalog, config, env, out_stream)
                if code is not None:
                    return code
                continue
        buffer.append(line)
        if stripped.endswith(";"):
            text = "".join(buffer)
            buffer = []
            _execute(text, catalog, config, env, out_stream)


# -- batch entry point ---------------------------------------------------------


def main(argv: Optional[list[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="tql",
        description="Search a directory of CSV tables with TQL queries.",
    )
    ap.add_argument("--catalog", required=True, metavar="DIR", help="directory of *.csv files")
    ap.add_argument("--engine", choices=("naive", "sampler"), default="naive")
    ap.add_argument("--seed", type=int, default=0, help="sampler RNG seed")
    ap.add_argument("--k", type=int, default=10, help="max sampler results")
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--query", metavar="TEXT", help="query text to run")
    src.add_argument("--file", metavar="PATH", help="file with query text to run")
    ap.add_argument("--json", action="store_true", help="machine-readable report")
    ap.add_argument("--explain", action="store_true", help="show derived constraints")
    ap.add_argument(
        "--export",
        nargs=2,
        metavar=("INDEX", "PATH"),
        help="write result table INDEX to PATH as CSV",
    )
    ap.add_argument("--timings", action="store_true", help="include wall time in the report")
    ap.add_argument("--pair-budget", type=int, default=EngineConfig.pair_budget)
    ap.add_argument("--no-prune", action="store_true", help="disable constraint pruning")
    args = ap.parse_args(argv)

    try:
        config = EngineConfig(
            strategy=args.engine,
            rng_seed=args.seed,
            result_budget=args.k,
            pair_budget=args.pair_budget,
            prune_enabled=not args.no_prune,
        )
    except ValueError as e:
        ap.error(str(e))

    try:
        catalog = load_catalog(args.catalog)
    except CatalogError as e:
        print(f"catalog error: {e}", file=sys.stderr)
        return 2
    for w in catalog.warnings:
        print(f"warning: {w}", file=sys.stderr)

    if args.query is not None:
        query_text = args.query
    elif args.file is not None:
        try:
            query_text = Path(args.file).read_text(encoding="utf-8")
        except OSError as e:
            print(f"cannot read query file: {e}", file=sys.stderr)
            return 2
    else:
        return repl(catalog, config, sys.stdin, sys.stdout)

    try:
        q = parse_source(query_text)
    except ParseError as e:
        print(f"parse error: {e}", file=sys.stderr)
        return 1
    explain = explain_lines(derive_constraints(q)) if args.explain else None
    try:
        report = run_query(q, catalog, config)
    except ResourceLimitError as e:
        print(f"resource limit: {e}", file=sys.stderr)
        return 3
    sys.stdout.write(render_report(report, args.json, explain=explain, show_timings=args.timings))

    if args.export:
        index_text, path = args.export
        try:
            index = int(index_text)
        except ValueError:
            print(f"export index must be an integer, got {index_text!r}", file=sys.stderr)
            return 4
        if not 0 <= index < len(report.tables):
            print(
                f"export index {index} out of range ({len(report.tables)} results)",
                file=sys.stderr,
            )
            return 4
        try:
            export_table(report.tables[index], path)
        except OSError as e:
            print(f"export failed: {e}", file=sys.stderr)
            return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
