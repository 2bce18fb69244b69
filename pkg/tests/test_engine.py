import pytest

from tql.algebra import Collection
from tql.engine import EngineConfig, run_naive, run_query, run_sampler
from tql.parser import parse_source
from tql.tables import ColumnType, Schema, Table

N = ColumnType.NUMERIC
T = ColumnType.TEXT


def naive(catalog, text, **kw):
    return run_naive(parse_source(text), catalog, EngineConfig(**kw))


def sampled(catalog, text, **kw):
    kw.setdefault("strategy", "sampler")
    return run_sampler(parse_source(text), catalog, EngineConfig(**kw))


# -- config validation -----------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(strategy="turbo")
    with pytest.raises(ValueError):
        EngineConfig(pair_budget=0)
    with pytest.raises(ValueError):
        EngineConfig(rng_seed=-1)
    with pytest.raises(ValueError):
        EngineConfig(siml_threshold=1.5)
    EngineConfig(strategy="sampler", rng_seed=2**64 - 1)


# -- naive runs -------------------------------------------------------------------


def test_naive_column_search(catalog):
    rep = naive(catalog, 'Q : {COL*["gdp"]};')
    assert {t.name for t in rep.tables} == {"cities_gdp", "gdp_growth", "world_gdp"}
    assert rep.strategy == "naive"
    assert rep.elapsed_ms >= 0


def test_presentation_order_puts_richer_matches_first(catalog):
    # tables satisfying both properties outrank single-property ones
    rep = naive(catalog, 'Q : {COL*["gdp"] OR COL["country"]};')
    names = [t.name for t in rep.tables]
    assert "world_gdp" in names and "gdp_growth" in names
    two_prop = {"world_gdp", "gdp_growth"}  # gdp-ish column AND a country column
    assert set(names[:2]) == two_prop
    # ties break by display name
    rest = names[2:]
    assert rest == sorted(rest)


def test_pair_counter_is_exact(catalog):
    three = Collection(catalog.universe.members[:3])
    four = Collection(catalog.universe.members[3:7])
    rep = run_naive(
        parse_source("JOIN A B;"),
        catalog,
        EngineConfig(),
        env={"A": three, "B": four},
    )
    assert rep.counters["0:join.pairs"] == 12


def test_pruning_never_changes_results(catalog):
    queries = [
        'Q : {COL*["gdp"]};',
        'SELECT["country"] A;',
        '(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};',
        'FILTER[t["population"] > 1000] A;',
    ]
    for q in queries:
        on = naive(catalog, q, prune_enabled=True)
        off = naive(catalog, q, prune_enabled=False)
        assert on.result == off.result, q


def test_pruning_reduces_considered_pairs(catalog):
    q = '(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};'
    on = naive(catalog, q, prune_enabled=True)
    off = naive(catalog, q, prune_enabled=False)
    assert on.counters["0.0:join.pairs"] == off.counters["0.0:join.pairs"] == 441
    assert on.counters.get("0.0:join.pairs_pruned", 0) > 0
    assert off.counters.get("0.0:join.pairs_pruned", 0) == 0


def test_provably_empty_statement_is_skipped(catalog):
    rep = naive(catalog, 'SELECT["x"] SELECT["y"] A;')
    assert rep.result == Collection()
    assert rep.counters.get("0:select.skipped") == 1
    # the identifier leaf was never enumerated
    assert "0.0.0:ident.considered" not in rep.counters


def test_assignments_are_never_skipped(catalog):
    # the inner binding must survive even though the outer result is empty
    rep = naive(catalog, 'SELECT["x"] SELECT["y"] (X = A : {SRC[cities_gdp]}); X;')
    assert len(rep.result) == 1
    assert rep.result.members[0].name == "cities_gdp"


# -- sampler runs ------------------------------------------------------------------


def test_sampler_is_deterministic_per_seed(catalog):
    q = 'Q : {COL*["gdp"]};'
    a = sampled(catalog, q, rng_seed=7, result_budget=2, attempt_budget=50)
    b = sampled(catalog, q, rng_seed=7, result_budget=2, attempt_budget=50)
    assert [t.content_hash for t in a.tables] == [t.content_hash for t in b.tables]
    assert a.counters == b.counters


def test_sampler_results_are_a_subset_of_naive(catalog):
    q = 'Q : {COL*["gdp"]};'
    exhaustive = {t.content_hash for t in naive(catalog, q).tables}
    for seed in range(12):
        rep = sampled(catalog, q, rng_seed=seed, result_budget=3, attempt_budget=60)
        assert {t.content_hash for t in rep.tables} <= exhaustive


def test_sampler_respects_result_budget(catalog):
    rep = sampled(catalog, "A;", result_budget=4, attempt_budget=100)
    assert len(rep.tables) <= 4
    assert rep.counters["sampler.results_found"] == len(rep.tables)


def test_sampler_reports_exhaustion(catalog):
    rep = sampled(
        catalog, 'Q : {COL["no_such_column"]};', attempt_budget=8, prune_enabled=False
    )
    assert rep.tables == []
    assert rep.counters["sampler.attempts"] == 8
    assert rep.counters["sampler.attempts_to_first_result"] == 0
    assert any("attempts without a result" in w for w in rep.warnings)


def test_sampler_stops_early_when_nothing_is_drawn(catalog):
    # pruning empties the leaf outright; one attempt proves all would repeat
    rep = sampled(catalog, 'Q : {COL["no_such_column"]};', attempt_budget=8)
    assert rep.tables == []
    assert rep.counters["sampler.attempts"] == 1
    assert rep.warnings == []


def test_sampler_pruning_speeds_discovery(catalog):
    # with pruning the leaf collapses to the three matching tables, so the
    # first draw always hits; unpruned it needs 21/3 attempts on average
    q = 'Q : {COL*["gdp"]};'
    on = sampled(catalog, q, rng_seed=3, result_budget=1, attempt_budget=200)
    assert on.counters["sampler.attempts_to_first_result"] == 1
    off = sampled(
        catalog, q, rng_seed=3, result_budget=1, attempt_budget=200, prune_enabled=False
    )
    assert off.counters["sampler.attempts_to_first_result"] >= 1


def test_sampler_finds_joinable_pair(catalog):
    q = '(JOIN S T) : {COL*["obesity"] AND COL*["social media"]};'
    rep = sampled(catalog, q, rng_seed=7, result_budget=1, attempt_budget=300)
    assert len(rep.tables) == 1
    assert rep.tables[0].provenance == frozenset({"obesity_stats", "social_media_usage"})


def test_sampler_earlier_statements_run_in_full(catalog):
    q = 'X = A : {SRC[cities_gdp] OR SRC[cities_population]}; X;'
    rep = sampled(catalog, q, rng_seed=1, result_budget=2, attempt_budget=50)
    # the binding held both tables; sampling applies only to the final statement
    assert {t.name for t in rep.tables} == {"cities_gdp", "cities_population"}


def test_run_query_dispatches(catalog):
    q = parse_source("A;")
    assert run_query(q, catalog, EngineConfig()).strategy == "naive"
    assert (
        run_query(q, catalog, EngineConfig(strategy="sampler", attempt_budget=30)).strategy
        == "sampler"
    )
