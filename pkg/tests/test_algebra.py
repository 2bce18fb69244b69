import random

import pytest

import ra_oracle as ora
from gen import rand_compatible_pair, rand_table
from tql.algebra import (
    Collection,
    ResourceLimitError,
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
from tql.tables import ColumnType, Schema, Table
from tql.values import compare

N = ColumnType.NUMERIC
T = ColumnType.TEXT


def tbl(name, cols, rows):
    return Table.base(name, Schema.of(*cols), rows)


GDP = tbl("cities_gdp", (("nm", T), ("gdp", N)), (("NYC", 1.7), ("LA", 1.0), ("SF", 0.6)))
POP = tbl("cities_population", (("nm", T), ("population", N)), (("NYC", 8), ("LA", 4), ("Phoenix", 2)))


# -- collections -------------------------------------------------------------


def test_collection_dedups_by_content():
    renamed = Table.base("other", GDP.schema, GDP.rows)
    c = Collection([GDP, renamed, POP])
    assert len(c) == 2


def test_set_laws():
    a, b = Collection([GDP]), Collection([GDP, POP])
    assert coll_union(a, a) == a
    assert coll_union(a, b) == coll_union(b, a)
    assert coll_intersect(a, b) == a
    assert coll_diff(a, a) == Collection()
    assert coll_diff(b, a) == Collection([POP])
    assert coll_union(a, Collection()) == a


def test_restrict():
    c = Collection([GDP, POP])
    assert restrict(Collection(), lambda t: True) == Collection()
    assert restrict(c, lambda t: True) == c
    assert restrict(c, lambda t: t.schema.has("gdp")) == Collection([GDP])


def test_lift_unary_partiality_and_size():
    c = Collection([GDP, POP])
    assert lift_unary(lambda t: t, c) == c
    assert lift_unary(lambda t: None, c) == Collection()
    out = lift_unary(lambda t: project(t, ["gdp"]), c)
    assert len(out) <= len(c)
    assert len(out) == 1


def test_lift_binary_singleton_closure():
    out = lift_binary(t_product, Collection([GDP]), Collection([POP]))
    assert len(out) == 1
    assert out.members[0] == t_product(GDP, POP)
    assert lift_binary(t_union, Collection([GDP]), Collection([POP])) == Collection()


def test_lift_binary_budget():
    c = Collection([GDP, POP])
    with pytest.raises(ResourceLimitError, match="pair budget"):
        lift_binary(t_product, c, c, pair_budget=3, label="0:prod")
    # at the limit is fine
    lift_binary(t_product, c, c, pair_budget=4)


def test_lift_binary_empty_operand():
    assert lift_binary(t_product, Collection(), Collection([GDP])) == Collection()


# -- table-level operators ----------------------------------------------------


def test_project_basics():
    p = project(GDP, ["gdp"])
    assert p is not None and p.schema.names == ("gdp",)
    assert project(GDP, ["missing"]) is None
    assert project(GDP, ["gdp", "gdp"]) is None
    assert project(project(GDP, ["gdp"]), ["gdp"]) == project(GDP, ["gdp"])


def test_project_dedups_rows():
    t = tbl("t", (("a", N), ("b", N)), ((1, 1), (1, 2)))
    p = project(t, ["a"])
    assert p is not None and p.rows == ((1,),)


def test_row_filter_total_by_default():
    kept = row_filter(GDP, lambda r: compare(r[1], ">", 0.9))
    assert kept is not None and len(kept.rows) == 2
    none_kept = row_filter(GDP, lambda r: False)
    assert none_kept is not None and none_kept.rows == ()


def test_row_filter_required_columns_make_it_partial():
    assert row_filter(GDP, lambda r: True, required=("population",)) is None
    assert row_filter(GDP, lambda r: True, required=("gdp",)) is not None


def test_union_compat_reorders_right():
    flipped = tbl("f", (("gdp", N), ("nm", T)), ((0.2, "Austin"),))
    u = t_union(GDP, flipped)
    assert u is not None
    assert u.schema.names == ("nm", "gdp")
    assert ("Austin", 0.2) in u.rows
    assert u.provenance == frozenset({"cities_gdp", "f"})


def test_union_requires_same_names_and_types():
    assert t_union(GDP, POP) is None
    retyped = tbl("r", (("nm", T), ("gdp", T)), (("NYC", "big"),))
    assert t_union(GDP, retyped) is None


def test_union_of_identical_is_same_table():
    assert t_union(GDP, GDP) == GDP


def test_diff():
    other = tbl("o", (("nm", T), ("gdp", N)), (("NYC", 1.7),))
    d = t_diff(GDP, other)
    assert d is not None and len(d.rows) == 2
    empty = t_diff(GDP, GDP)
    assert empty is not None and empty.rows == ()
    assert t_diff(GDP, POP) is None


def test_product_qualifies_shared_names():
    p = t_product(GDP, POP)
    assert p is not None
    assert p.schema.names == ("cities_gdp.nm", "gdp", "cities_population.nm", "population")
    assert len(p.rows) == 9
    assert p.provenance == frozenset({"cities_gdp", "cities_population"})


def test_self_product_suffixes_residual_collisions():
    p = t_product(GDP, GDP)
    assert p is not None
    names = p.schema.names
    assert len(set(names)) == len(names)
    assert names == ("cities_gdp.nm", "cities_gdp.gdp", "cities_gdp.nm.2", "cities_gdp.gdp.2")


def test_product_row_limit():
    with pytest.raises(ResourceLimitError, match="row limit"):
        t_product(GDP, POP, row_limit=8)


def test_natural_join():
    j = t_join(GDP, POP)
    assert j is not None
    assert j.schema.names == ("nm", "gdp", "population")
    assert set(j.rows) == {("NYC", 1.7, 8), ("LA", 1.0, 4)}
    assert natural_join_columns(GDP, tbl("x", (("k", N),), ((1,),))) is None
    assert t_join(GDP, tbl("x", (("k", N),), ((1,),))) is None


def test_natural_join_null_keys_never_match():
    a = tbl("a", (("k", N), ("v", N)), ((None, 1), (2, 2)))
    b = tbl("b", (("k", N), ("w", N)), ((None, 10), (2, 20)))
    j = t_join(a, b)
    assert j is not None
    assert set(j.rows) == {(2, 2, 20)}


def test_theta_join_equals_filter_of_product():
    pred = lambda ra, rb: compare(ra[0], "=", rb[0])
    j = t_join(GDP, POP, pred)
    assert j is not None
    p = t_product(GDP, POP)
    assert p is not None
    expected = {r for r in p.rows if compare(r[0], "=", r[2])}
    assert set(j.rows) == expected
    assert j.schema == p.schema


def test_theta_join_required_columns():
    pred = lambda ra, rb: True
    assert t_join(GDP, POP, pred, required_left=("gdp",), required_right=("population",)) is not None
    assert t_join(GDP, POP, pred, required_left=("population",)) is None
    assert t_join(GDP, POP, pred, required_right=("gdp",)) is None


# -- seeded differential spot-check (the full sweep is in the acceptance suite)


def test_operators_match_oracle_spot():
    rng = random.Random(2024)
    for i in range(60):
        t0 = rand_table(rng, name=f"s{i}")
        t1 = rand_table(rng, name=f"s{i}x" if rng.random() < 0.7 else f"s{i}")
        o0, o1 = ora.from_table(t0), ora.from_table(t1)
        assert ora.matches(ora.product(o0, o1), t_product(t0, t1))
        cols = [c.name for c in t0.schema.columns][:2]
        assert ora.matches(ora.project(o0, cols), project(t0, cols))
        u0, u1 = rand_compatible_pair(rng)
        assert ora.matches(
            ora.union(ora.from_table(u0), ora.from_table(u1)), t_union(u0, u1)
        )
        assert ora.matches(
            ora.diff(ora.from_table(u0), ora.from_table(u1)), t_diff(u0, u1)
        )
