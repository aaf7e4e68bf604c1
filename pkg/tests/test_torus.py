"""Mapping torus construction, frozen against hand-computed complexes."""

from fractions import Fraction

import pytest

from freebycyclic.errors import (InvariantViolation, NotACycleError)
from freebycyclic.folding import decompose
from freebycyclic.graphs import Graph, GraphMap
from freebycyclic.torus import (build_torus, skew_loop, skew_passage,
                                torus_dot, torus_json, torus_tikz, validate)
from freebycyclic.graphs import load_map_file

import os

EXAMPLES = os.path.join(os.path.dirname(__file__), os.pardir, "examples")


def rose_map(images: dict[str, str]) -> GraphMap:
    rose = Graph.rose(sorted(images), vertex="v")
    return GraphMap.from_strings(rose, {"v": "v"}, images)


@pytest.fixture(scope="module")
def bundled_torus():
    mapfile = load_map_file(os.path.join(EXAMPLES, "phi_f3.map"))
    return build_torus(decompose(mapfile.gmap))


F = Fraction


def test_zero_cells(bundled_torus):
    names = [c.name for c in bundled_torus.zero_cells]
    assert names == ["black.0", "blue.0", "red.0", "c@1.1", "a@3.2", "a@2.3"]


def test_verticals(bundled_torus):
    table = {v.name: (v.start, v.end, v.span) for v in bundled_torus.verticals}
    assert table == {
        "up:red.0": ("red.0", "c@1.1", 1),
        "up:c@1.1": ("c@1.1", "a@2.3", 2),
        "up:a@2.3": ("a@2.3", "black.0", 1),
        "up:black.0": ("black.0", "blue.0", 4),
        "up:blue.0": ("blue.0", "a@3.2", 2),
        "up:a@3.2": ("a@3.2", "red.0", 2),
    }


def test_one_vertical_per_zero_cell(bundled_torus):
    starts = [v.start for v in bundled_torus.verticals]
    assert sorted(starts) == sorted(c.name for c in bundled_torus.zero_cells)


def test_skews(bundled_torus):
    table = {s.name: (s.bottom, s.top, s.kind, s.rise, s.edge)
             for s in bundled_torus.skews}
    assert table == {
        "skew1": ("blue.0", "c@1.1", "strict", 1, "b"),
        "skew2": ("c@1.1", "a@3.2", "strict", 1, "a_4"),
        "skew3": ("a@3.2", "a@2.3", "strict", 1, "a_3"),
        "skew4": ("a@2.3", "blue.0", "strict", 1, "a_2"),
    }


def test_trapezoid_sides(bundled_torus):
    table = {t.name: (t.left, t.right) for t in bundled_torus.trapezoids}
    assert table == {
        "trap1": (("up:blue.0",), ("up:c@1.1",)),
        "trap2": (("up:c@1.1", "up:a@2.3", "up:black.0"),
                  ("up:a@3.2", "up:red.0", "up:c@1.1")),
        "trap3": (("up:a@3.2", "up:red.0"),
                  ("up:a@2.3", "up:black.0", "up:blue.0")),
        "trap4": (("up:a@2.3", "up:black.0"),
                  ("up:blue.0", "up:a@3.2", "up:red.0")),
    }


def test_trapezoid_tops(bundled_torus):
    tops = {t.name: [(p.skew, p.sign, p.x_lo, p.x_hi) for p in t.top]
            for t in bundled_torus.trapezoids}
    assert tops["trap1"] == [("skew3", 1, F(0), F(1))]
    assert tops["trap2"] == [("skew4", -1, F(0), F(1))]
    assert tops["trap4"] == [("skew1", 1, F(0), F(1))]
    assert tops["trap3"] == [
        ("skew2", 1, F(0), F(1, 4)),
        ("skew3", 1, F(1, 4), F(1, 2)),
        ("skew4", 1, F(1, 2), F(3, 4)),
        ("skew1", 1, F(3, 4), F(7, 8)),
        ("skew2", 1, F(7, 8), F(1)),
    ]


def test_trapezoid_corners(bundled_torus):
    corners = {t.name: t.corners for t in bundled_torus.trapezoids}
    assert corners["trap1"] == ()
    assert corners["trap2"] == ()
    assert corners["trap4"] == ()
    assert corners["trap3"] == (
        (F(1, 4), "a@3.2"), (F(1, 2), "a@2.3"),
        (F(3, 4), "blue.0"), (F(7, 8), "c@1.1"))


def test_euler_characteristic(bundled_torus):
    assert len(bundled_torus.zero_cells) == 6
    assert len(bundled_torus.verticals) == 6
    assert len(bundled_torus.skews) == 4
    assert len(bundled_torus.trapezoids) == 4
    assert bundled_torus.euler_characteristic() == 0


def test_base_cover(bundled_torus):
    cover = bundled_torus.base_cover
    assert set(cover) == {"a", "b", "c", "d", "e"}
    assert cover["a"] == ("trap3", F(0), F(1), -1)
    assert cover["b"] == ("trap4", F(0), F(1), -1)
    assert cover["c"] == ("trap3", F(3, 4), F(1), -1)
    assert cover["d"] == ("trap4", F(0), F(1), -1)
    assert cover["e"] == ("trap2", F(0), F(1), -1)


def test_boundary_one(bundled_torus):
    d1 = bundled_torus.boundary_one()
    assert d1["up:red.0"] == {"c@1.1": 1, "red.0": -1}
    assert d1["skew4"] == {"blue.0": 1, "a@2.3": -1}


def test_boundary_two_row(bundled_torus):
    d2 = bundled_torus.boundary_two()
    assert d2["trap1"] == {"skew1": 1, "up:c@1.1": 1,
                           "skew3": -1, "up:blue.0": -1}
    # bottom and a top copy of skew3 cancel in trap3
    assert d2["trap3"] == {"skew1": -1, "skew2": -2, "skew4": -1,
                           "up:a@2.3": 1, "up:black.0": 1, "up:blue.0": 1,
                           "up:a@3.2": -1, "up:red.0": -1}


def test_boundary_of_boundary_vanishes(bundled_torus):
    d1 = bundled_torus.boundary_one()
    d2 = bundled_torus.boundary_two()
    for row in d2.values():
        acc: dict[str, int] = {}
        for one_cell, coef in row.items():
            for zero_cell, inc in d1[one_cell].items():
                acc[zero_cell] = acc.get(zero_cell, 0) + coef * inc
        assert not any(acc.values())


def test_skew_loop(bundled_torus):
    assert skew_loop(bundled_torus) == {
        "skew1": 1, "skew2": 1, "skew3": 1, "skew4": 1}


def test_skew_passage(bundled_torus):
    half = F(1, 2)
    assert skew_passage(bundled_torus, "skew1", half) == ("skew", "skew3", half)
    assert skew_passage(bundled_torus, "skew4", half) == ("skew", "skew1", half)
    assert skew_passage(bundled_torus, "skew2", F(1, 3)) == \
        ("skew", "skew4", F(2, 3))
    assert skew_passage(bundled_torus, "skew3", F(1, 8)) == \
        ("skew", "skew2", half)
    assert skew_passage(bundled_torus, "skew3", F(13, 16)) == \
        ("skew", "skew1", half)
    assert skew_passage(bundled_torus, "skew3", F(15, 16)) == \
        ("skew", "skew2", half)
    assert skew_passage(bundled_torus, "skew3", half) == \
        ("cell", "a@2.3", None)
    assert skew_passage(bundled_torus, "skew3", F(7, 8)) == \
        ("cell", "c@1.1", None)
    with pytest.raises(InvariantViolation):
        skew_passage(bundled_torus, "skew1", F(0))


def test_doubling_torus():
    torus = build_torus(decompose(rose_map({"a": "aa"})))
    assert [c.name for c in torus.zero_cells] == ["v.0"]
    assert [(v.name, v.start, v.end, v.span) for v in torus.verticals] == \
        [("up:v.0", "v.0", "v.0", 1)]
    (skew,) = torus.skews
    assert (skew.name, skew.kind, skew.rise) == ("skew1", "offset", 0)
    assert skew.bottom == skew.top == "v.0"
    (trap,) = torus.trapezoids
    assert trap.left == trap.right == ("up:v.0",)
    assert [(p.skew, p.sign, p.x_lo, p.x_hi) for p in trap.top] == \
        [("skew1", 1, F(0), F(1, 2)), ("skew1", 1, F(1, 2), F(1))]
    assert trap.corners == ((F(1, 2), "v.0"),)
    assert torus.euler_characteristic() == 0
    assert skew_loop(torus) == {"skew1": 1}
    assert skew_passage(torus, "skew1", F(1, 4)) == ("skew", "skew1", F(1, 2))
    assert skew_passage(torus, "skew1", F(1, 2)) == ("cell", "v.0", None)


def test_golden_torus_smoke():
    torus = build_torus(decompose(rose_map({"a": "ab", "b": "a"})))
    assert [c.name for c in torus.zero_cells] == ["v.0"]
    assert len(torus.verticals) == 1
    assert len(torus.skews) == 1
    assert len(torus.trapezoids) == 1
    assert torus.euler_characteristic() == 0
    (trap,) = torus.trapezoids
    assert trap.right == ("up:v.0", "up:v.0")
    validate(torus)


def test_no_folds_rejected():
    rose = Graph.rose(["a", "b"], vertex="v")
    identity = GraphMap.identity(rose)
    with pytest.raises(InvariantViolation):
        build_torus(decompose(identity))


def test_validate_catches_missing_top_piece(bundled_torus):
    mapfile = load_map_file(os.path.join(EXAMPLES, "phi_f3.map"))
    torus = build_torus(decompose(mapfile.gmap))
    trap = torus.trap_by_name["trap3"]
    trap.top = trap.top[:-1]
    with pytest.raises(InvariantViolation) as err:
        validate(torus)
    assert "skew2" in str(err.value)
    assert "degree" in str(err.value)


def test_validate_catches_dangling_vertical():
    torus = build_torus(decompose(rose_map({"a": "aa"})))
    trap = torus.trap_by_name["trap1"]
    trap.left = ()
    with pytest.raises(InvariantViolation) as err:
        validate(torus)
    assert "dangling" in str(err.value)


def test_skew_chain_failure_detected():
    torus = build_torus(decompose(rose_map({"a": "ab", "b": "a"})))
    torus.skews[0].top = "phantom"
    with pytest.raises(NotACycleError):
        skew_loop(torus)


def test_json_export(bundled_torus):
    blob = torus_json(bundled_torus)
    assert blob["euler_characteristic"] == 0
    assert len(blob["zero_cells"]) == 6
    trap3 = next(t for t in blob["trapezoids"] if t["name"] == "trap3")
    assert trap3["corners"][1] == {"x": "1/2", "cell": "a@2.3"}
    import json
    json.dumps(blob)


def test_dot_export(bundled_torus):
    dot = torus_dot(bundled_torus)
    assert dot.startswith("digraph")
    assert dot.count("->") == 10
    assert '"blue.0" -> "c@1.1" [label="skew1", style=dashed];' in dot


def test_tikz_export(bundled_torus):
    tikz = torus_tikz(bundled_torus)
    assert tikz.startswith("\\begin{tikzpicture}")
    assert tikz.rstrip().endswith("\\end{tikzpicture}")
    assert tikz.count("\\node") == 6
    assert tikz.count("\\draw") == 10
