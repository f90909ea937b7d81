"""Exact enumeration, boxes, histograms, and hyperbola sums."""

from fractions import Fraction
from types import SimpleNamespace

import pytest

from toricount import counting, heights
from toricount.counting import (
    ExactLog, FTable, Region, WallCollisionError, anticanonical_region,
    build_box_decomposition, coordinate_bounds, count_anticanonical,
    count_bad_slab, count_box, count_cone_box, count_translated_polyhedron,
    enumerate_region, hyperbola_sum, nu_neg_cone, partition_first_coordinate,
    region_from_json, tabulate_f)
from toricount.errors import BudgetError, CoprimalityError, DegenerateInputError

from conftest import BUILTIN_NAMES, get_lattice
from naive_oracle import naive_count, sign_class_count


# -- exact logarithmic arithmetic -------------------------------------------


def test_exactlog_basic():
    x = ExactLog({Fraction(8): Fraction(1, 3)})
    assert x.exp_floor() == 2
    assert x.sign() > 0
    assert ExactLog.zero().exp_floor() == 1
    assert ExactLog.zero().sign() == 0
    assert ExactLog({Fraction(1, 2): 1}).exp_floor() == 0


def test_exactlog_combine_collapses_equal_bases():
    b = ExactLog({Fraction(100): Fraction(1)})
    z = b.combine(b, Fraction(-1))
    assert z.terms == {}
    assert z.exp_floor() == 1
    y = b.combine(ExactLog({Fraction(100): Fraction(1, 2)}))
    assert y.terms == {Fraction(100): Fraction(3, 2)}
    assert y.exp_floor() == 1000


def test_exactlog_cmp():
    a = ExactLog({Fraction(2): 3})     # log 8
    b = ExactLog({Fraction(3): 2})     # log 9
    assert a.cmp(b) < 0
    assert b.cmp(a) > 0
    assert a.cmp(ExactLog({Fraction(8): 1})) == 0


def test_exactlog_scaled_and_fraction_powers():
    a = ExactLog({Fraction(9, 4): 1}).scaled(Fraction(1, 2))  # log(3/2)
    assert a.exp_floor() == 1
    assert a.scaled(-1).exp_floor() == 0
    with pytest.raises(DegenerateInputError):
        ExactLog({Fraction(-2): 1})


# -- regions -----------------------------------------------------------------


def test_region_contains_reference():
    lat = get_lattice("P1")
    region = anticanonical_region(lat)
    assert region.contains((Fraction(3),), 9)
    assert not region.contains((Fraction(3),), 8)
    half = Region([((Fraction(1, 2),), 1, Fraction(1, 2))])  # H^(1/2) <= B^(1/2)
    assert half.contains((Fraction(9),), 9)
    assert not half.contains((Fraction(10),), 9)


def test_region_facets_and_dedupe():
    region = Region([((1, 1), 1, 1)], facets=[(1, -1), (1, -1), (0, 1)])
    assert region.facets == ((1, -1), (0, 1))
    assert region.contains((3, 2), 100)
    assert not region.contains((2, 3), 100)   # violates h1 >= h2


def test_region_cone_generators_to_facets():
    region = Region([((1, 1), 1, 1)], cone_generators=[[1, 0], [1, 1]])
    # facets of cone{(1,0),(1,1)}: y2 >= 0 and y1 - y2 >= 0
    assert set(region.facets) == {(0, 1), (1, -1)}


def test_region_rejects_nonpositive_gamma():
    with pytest.raises(DegenerateInputError):
        Region([((1,), 0, 1)])


def test_region_from_json_shapes():
    region = region_from_json({
        "constraints": [{"class": [2, 2], "gamma": "1", "s": "1"}],
        "cone": {"generators": [[1, 0], [0, 1]]},
    })
    assert region.constraints[0].cls == (2, 2)
    assert region.constraints[0].s == 1
    assert len(region.facets) == 2
    region2 = region_from_json({"constraints": [{"class": [1]}],
                                "facets": [[1]]})
    assert region2.constraints[0].gamma == 1
    assert region2.constraints[0].s == 0
    assert region2.facets == ((1,),)


def test_region_from_json_errors():
    with pytest.raises(DegenerateInputError):
        region_from_json({"cone": {}})
    with pytest.raises(DegenerateInputError):
        region_from_json({"constraints": [{"class": [1], "gamma": 1.5}]})


# -- coordinate bounds -------------------------------------------------------


def test_coordinate_bounds_projective():
    p1 = get_lattice("P1")
    assert coordinate_bounds(p1, anticanonical_region(p1), 100) == [10, 10]
    p2 = get_lattice("P2")
    assert coordinate_bounds(p2, anticanonical_region(p2), 1000) == [10, 10, 10]
    assert coordinate_bounds(p2, anticanonical_region(p2), 999) == [9, 9, 9]


def test_coordinate_bounds_products_and_f1():
    pp = get_lattice("P1xP1")
    assert coordinate_bounds(pp, anticanonical_region(pp), 100) == [10] * 4
    f1 = get_lattice("F1")
    assert coordinate_bounds(f1, anticanonical_region(f1), 1000) == \
        [10, 31, 10, 31]


def test_coordinate_bounds_unbounded_region():
    pp = get_lattice("P1xP1")
    with pytest.raises(DegenerateInputError):
        coordinate_bounds(pp, Region([((1, 0), 1, 1)]), 100)


def test_coordinate_bounds_empty_region():
    p1 = get_lattice("P1")
    region = Region([((2,), Fraction(1, 2), 0)])
    assert coordinate_bounds(p1, region, 1) == [0, 0]
    res = enumerate_region(p1, region, 1)
    assert res.count == 0 and res.visited == 0


def test_coordinate_bounds_rejects_nonpositive_B():
    p1 = get_lattice("P1")
    with pytest.raises(DegenerateInputError):
        coordinate_bounds(p1, anticanonical_region(p1), 0)


# -- enumeration -------------------------------------------------------------


def test_p1_frozen_counts():
    lat = get_lattice("P1")
    region = anticanonical_region(lat)
    assert enumerate_region(lat, region, 100).count == 126
    assert enumerate_region(lat, region, 1).count == 2
    assert enumerate_region(lat, region, Fraction(1, 2)).count == 0


def test_f1_count_and_callbacks_agree():
    lat = get_lattice("F1")
    region = anticanonical_region(lat)
    plain = enumerate_region(lat, region, 50)
    assert plain.count == 268

    ev = heights._evaluator(lat)
    seen = []

    def cb(coords, hvals):
        assert ev.is_canonical(coords)
        mh = heights.multi_height(lat, coords)
        assert tuple(Fraction(h) for h in hvals) == mh.values
        assert region.contains(mh.values, 50)
        seen.append(tuple(coords))

    res_cb = enumerate_region(lat, region, 50, callback=cb)
    assert res_cb.count == 268
    assert len(seen) == 268
    assert len(set(seen)) == 268

    weights = []

    def tcb(mags, hvals, weight):
        assert all(m >= 1 for m in mags)
        weights.append(weight)

    res_t = enumerate_region(lat, region, 50, tuple_callback=tcb)
    assert res_t.count == 268
    assert sum(weights) == 268
    assert set(weights) == {2 ** (lat.fan.n_rays - lat.rank)}


def test_tuple_weight_matches_sign_class_count():
    lat = get_lattice("P1xP1")
    assert sign_class_count(lat) == 2 ** (lat.fan.n_rays - lat.rank)


@pytest.mark.parametrize("name,B", [("P1", 200), ("P2", 200),
                                    ("P1xP1", 200), ("F1", 200)])
def test_oracle_equivalence_small(name, B):
    lat = get_lattice(name)
    region = anticanonical_region(lat)
    fast = enumerate_region(lat, region, B).count
    assert fast == naive_count(lat, region, B)


def test_oracle_equivalence_cone_restricted():
    lat = get_lattice("P1xP1")
    region = anticanonical_region(lat, cone_generators=[[1, 0], [1, 1]])
    fast = enumerate_region(lat, region, 100).count
    assert fast == naive_count(lat, region, 100)
    full = enumerate_region(lat, anticanonical_region(lat), 100).count
    assert 0 < fast < full


def test_oracle_equivalence_general_region():
    lat = get_lattice("F1")
    region = Region([((1, 0), 4, 0), ((0, 1), 1, 1)])
    fast = enumerate_region(lat, region, 30).count
    assert fast == naive_count(lat, region, 30)


def test_monotone_in_B():
    for name in ("P1", "F1"):
        lat = get_lattice(name)
        region = anticanonical_region(lat)
        counts = [enumerate_region(lat, region, b).count
                  for b in (10, 50, 100, 200)]
        assert counts == sorted(counts)
        assert counts[0] > 0


def test_budget_dynamic():
    lat = get_lattice("P1")
    with pytest.raises(BudgetError):
        enumerate_region(lat, anticanonical_region(lat), 10 ** 6, budget=100)


def test_budget_static_precheck():
    lat = get_lattice("F1")
    # neither constraint class is nef, so no pruning is available and the
    # candidate box size check fires before any enumeration
    region = Region([((1, -1), 2, 0), ((-1, 2), 4, 0)])
    with pytest.raises(BudgetError) as exc:
        enumerate_region(lat, region, 1, budget=10)
    assert "candidate box" in str(exc.value)


def test_first_range_partition():
    lat = get_lattice("P1xP1")
    region = anticanonical_region(lat)
    B = 1000
    full = enumerate_region(lat, region, B).count
    assert full == 10372
    ranges = partition_first_coordinate(lat, region, B, 4)
    assert ranges[0][0] == 1
    assert ranges[-1][1] == coordinate_bounds(lat, region, B)[0]
    total = sum(enumerate_region(lat, region, B, first_range=r).count
                for r in ranges)
    assert total == full


def test_partition_empty_region():
    lat = get_lattice("P1")
    region = Region([((2,), Fraction(1, 2), 0)])
    assert partition_first_coordinate(lat, region, 1, 3) == [(1, 0)]


# -- direct vs inclusion-exclusion -------------------------------------------


@pytest.mark.parametrize("name,B,expected", [("P2", 300, 724),
                                             ("F1", 100, 540),
                                             ("P1xP1", 200, 1732)])
def test_direct_equals_inclusion_exclusion(name, B, expected):
    lat = get_lattice(name)
    direct = count_anticanonical(lat, B, mode="direct")
    ie = count_anticanonical(lat, B, mode="inclusion_exclusion")
    assert direct["count"] == expected
    assert ie["count"] == expected
    if name == "P1xP1":
        assert ie["pieces"] >= 1


def test_inclusion_exclusion_custom_split():
    lat = get_lattice("P1xP1")
    split = SimpleNamespace(cones=[[(1, 0), (1, 1)], [(1, 1), (0, 1)]])
    direct = count_anticanonical(lat, 500, mode="direct")["count"]
    ie = count_anticanonical(lat, 500, mode="inclusion_exclusion",
                             decomposition=split)
    assert ie["count"] == direct
    assert len(ie["terms"]) == 3


def test_count_anticanonical_rejects_unknown_mode():
    lat = get_lattice("P1")
    with pytest.raises(DegenerateInputError):
        count_anticanonical(lat, 10, mode="sideways")


# -- translated polyhedra and boxes ------------------------------------------


def test_translated_polyhedron_p1():
    lat = get_lattice("P1")
    out = count_translated_polyhedron(lat, [[(1, 2)]], [Fraction(1, 2)],
                                      10 ** 4, tau=2.0)
    assert out["count"] == 36912
    assert out["nu"] == Fraction(3, 2)
    assert out["exponent"] == 1
    assert out["prediction"] == pytest.approx(3.0 * 10 ** 4)
    assert out["ratio"] == pytest.approx(36912 / 3e4)


def test_translated_polyhedron_validation():
    lat = get_lattice("P1")
    with pytest.raises(DegenerateInputError):
        count_translated_polyhedron(lat, [[(1, 2)]], [0], 100)
    with pytest.raises(DegenerateInputError):
        count_translated_polyhedron(lat, [[(2, 1)]], [Fraction(1, 2)], 100)
    with pytest.raises(DegenerateInputError):
        count_translated_polyhedron(lat, [[(0, 2)]], [Fraction(1, 2)], 100)


def test_translated_polyhedron_union_adds():
    lat = get_lattice("P1")
    u = [Fraction(1, 2)]
    both = count_translated_polyhedron(lat, [[(1, 2)], [(2, 4)]], u, 400)
    lo = count_translated_polyhedron(lat, [[(1, 2)]], u, 400)
    hi = count_translated_polyhedron(lat, [[(2, 4)]], u, 400)
    assert both["count"] == lo["count"] + hi["count"]
    assert both["nu"] == lo["nu"] + hi["nu"]


def test_count_box_frozen():
    lat = get_lattice("P1xP1")
    out = count_box(lat, [[1, 0], [0, 1]], [1, 1], [2, 2], [10, 10], tau=1.0)
    assert out["count"] == 160000
    assert out["nu"] == Fraction(9, 4)
    assert list(out["exponents"]) == [2, 2]
    assert out["ratio"] == pytest.approx(160000 / (2.25 * 10 ** 4))


def test_count_box_is_product_on_p1xp1():
    pp = get_lattice("P1xP1")
    p1 = get_lattice("P1")
    out = count_box(pp, [[1, 0], [0, 1]], [1, 1], [2, 2], [10, 10])
    region = Region([((1,), 20, 0), ((-1,), Fraction(1, 10), 0)])
    per_factor = enumerate_region(p1, region, 1).count
    assert out["count"] == per_factor ** 2


def test_count_box_validation():
    lat = get_lattice("P1xP1")
    with pytest.raises(DegenerateInputError):
        count_box(lat, [[1, 0], [0, 1]], [2, 1], [2, 2], [10, 10])
    with pytest.raises(DegenerateInputError):
        count_box(lat, [[1, 0], [0, 1]], [1, 1], [2, 2], [10, Fraction(1, 2)])
    with pytest.raises(DegenerateInputError):
        count_box(lat, [[1, 0], [2, 0]], [1, 1], [2, 2], [10, 10])
    with pytest.raises(DegenerateInputError):
        count_box(lat, [[1, 0], [0, -1]], [1, 1], [2, 2], [10, 10])


def test_nu_neg_cone_values():
    lat = get_lattice("P1xP1")
    assert nu_neg_cone(lat, [[1, 0], [0, 1]]) == Fraction(1, 4)
    assert nu_neg_cone(lat, [[1, -1], [0, 1]]) == Fraction(1, 8)
    with pytest.raises(DegenerateInputError):
        nu_neg_cone(lat, [[1, -1], [0, -1]])


# -- box decompositions and histograms ----------------------------------------


def test_box_decomposition_walls_and_locate():
    lat = get_lattice("P1")
    decomp = build_box_decomposition(lat, [[1]], ratios=[Fraction(2)])
    assert decomp.kept((8,)) == (4,)
    assert decomp.walls(8, 0, 3) == [8, 4, 2, 1]
    assert decomp.locate((8,), (8,)) == (1,)     # outer wall is closed
    assert decomp.locate((5,), (8,)) == (1,)
    assert decomp.locate((3,), (8,)) == (2,)
    with pytest.raises(WallCollisionError):
        decomp.locate((4,), (8,))                # internal wall hit
    with pytest.raises(WallCollisionError):
        decomp.locate((1,), (8,))                # 1 = 8 r^-3 is a wall too
    with pytest.raises(DegenerateInputError):
        decomp.locate((9,), (8,))


def test_box_decomposition_validation():
    lat = get_lattice("P1xP1")
    with pytest.raises(DegenerateInputError):
        build_box_decomposition(lat, [[1, 0], [0, 1]], ratios=[1, 2])
    with pytest.raises(DegenerateInputError):
        build_box_decomposition(lat, [[1, 0], [0, -1]])
    d1 = build_box_decomposition(lat, [[1, 0], [0, 1]], seed=0)
    d2 = build_box_decomposition(lat, [[1, 0], [0, 1]], seed=0)
    assert d1.ratios == d2.ratios
    assert all(r > 1 for r in d1.ratios)


def test_cone_box_histogram_consistency():
    lat = get_lattice("P1xP1")
    out = count_cone_box(lat, [[1, 0], [0, 1]], (20, 20), seed=7)
    assert out["count"] == 260100
    assert out["histogram_total"] == out["count"]
    assert out["empty_boxes_ok"]
    assert out["redraws"] == 0
    assert out["tail"]["ok"]
    assert out["nu_neg"] == Fraction(1, 4)
    assert sum(out["histogram"].values()) == out["count"]
    assert all(cnt > 0 for cnt in out["histogram"].values())
    kept = out["kept"]
    assert all(len(n) == 2 and n <= kept for n in out["histogram"])


def test_cone_box_wall_collision_redraw():
    lat = get_lattice("P1xP1")
    bad = build_box_decomposition(lat, [[1, 0], [0, 1]],
                                  ratios=[Fraction(20, 7), Fraction(19, 6)])
    out = count_cone_box(lat, [[1, 0], [0, 1]], (20, 20), seed=0,
                         decomposition=bad)
    assert out["redraws"] >= 1
    assert out["count"] == 260100
    assert out["histogram_total"] == out["count"]


def test_cone_box_below_one_is_empty():
    lat = get_lattice("P1xP1")
    out = count_cone_box(lat, [[1, 0], [0, 1]], (Fraction(1, 2), 20))
    assert out["count"] == 0
    assert out["empty_boxes_ok"]


def test_cone_box_rejects_cone_outside_dual_effective():
    lat = get_lattice("P1xP1")
    with pytest.raises(DegenerateInputError):
        count_cone_box(lat, [[1, 1], [0, -1]], (10, 10))


def test_bad_slab_is_dominated():
    lat = get_lattice("P1xP1")
    decomp = build_box_decomposition(lat, [[1, -1], [0, 1]], seed=3)
    b_vec = (8, 8)
    n_vec = (1, 1)
    slab = count_bad_slab(lat, decomp, b_vec, 0, n_vec)
    box = enumerate_region(
        lat, counting._box_region(decomp, b_vec, n_vec), 1).count
    assert 0 <= slab["count"] <= box
    assert slab["k"] == 0 and slab["n"] == (1, 1)
    assert slab["bound_shape"] > 0
    if slab["count"]:
        assert slab["fitted_C"] == pytest.approx(
            slab["count"] / slab["bound_shape"])


# -- f tables and hyperbola sums ----------------------------------------------


def test_hyperbola_three_way_p1():
    lat = get_lattice("P1")
    floor_t, ceil_t = tabulate_f(lat, [[1]], [200])
    assert floor_t.variant == "floor" and ceil_t.variant == "ceil"
    direct = enumerate_region(lat, anticanonical_region(lat), 10 ** 4).count
    assert direct == 12174
    s_floor = hyperbola_sum(floor_t, [[2]], 10 ** 4)
    s_ceil = hyperbola_sum(ceil_t, [[2]], 10 ** 4)
    assert s_floor == s_ceil == direct
    # same domain written with a fractional exponent
    assert hyperbola_sum(floor_t, [[Fraction(1, 2)]], 10) == direct


def test_hyperbola_sandwich_f1():
    lat = get_lattice("F1")
    floor_t, ceil_t = tabulate_f(lat, [[1, 0], [0, 1]], [7, 16])
    for B in (50, 100, 200):
        direct = enumerate_region(lat, anticanonical_region(lat), B).count
        s_floor = hyperbola_sum(floor_t, [[3, 2]], B)
        s_ceil = hyperbola_sum(ceil_t, [[3, 2]], B)
        assert s_ceil <= direct <= s_floor


def test_ftable_mass():
    lat = get_lattice("P1")
    floor_t, _ = tabulate_f(lat, [[1]], [50])
    assert floor_t.mass((50,)) == sum(floor_t.data.values())
    assert floor_t.mass((10,)) == \
        enumerate_region(lat, anticanonical_region(lat), 100).count
    with pytest.raises(DegenerateInputError):
        floor_t.mass((51,))


def test_hyperbola_sum_validation():
    lat = get_lattice("P1")
    floor_t, _ = tabulate_f(lat, [[1]], [50])
    with pytest.raises(DegenerateInputError):
        hyperbola_sum(floor_t, [[-1]], 10)
    with pytest.raises(DegenerateInputError):
        hyperbola_sum(floor_t, [[1]], 300)      # cap exceeds the table
    with pytest.raises(DegenerateInputError):
        hyperbola_sum(floor_t, [[1, 1]], 10)    # rank mismatch
    pp = get_lattice("P1xP1")
    fl, _ = tabulate_f(pp, [[1, 0], [0, 1]], [5, 5])
    with pytest.raises(DegenerateInputError):
        hyperbola_sum(fl, [[1, 0]], 4)          # unbounded second coordinate


def test_tabulate_extra_constraints_restrict():
    lat = get_lattice("P1")
    full, _ = tabulate_f(lat, [[1]], [50])
    low, _ = tabulate_f(lat, [[1]], [50],
                        extra_constraints=[((2,), 100, 0)])
    assert sum(low.data.values()) == \
        enumerate_region(lat, anticanonical_region(lat), 100).count
    assert sum(low.data.values()) < sum(full.data.values())
