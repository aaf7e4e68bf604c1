"""Graph layer: paths, composition, subdivision, trees, markings, file format."""

from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from freebycyclic import graphs as G
from freebycyclic import words as W
from freebycyclic.errors import (DisconnectedGraphError, InputParseError,
                                 InvariantViolation, MarkingError)
from freebycyclic.words import FreeGroupMap

EXAMPLES = Path(__file__).resolve().parents[1] / "examples"

ROSE2 = G.Graph.rose(("a", "b"))
ROSE3 = G.Graph.rose(("a", "b", "c"))


@pytest.fixture(scope="module")
def bundled():
    return G.load_map_file(EXAMPLES / "phi_f3.map")


def w(text, names=("a", "b", "c", "d", "e")):
    return W.parse_word(text, names)


# -- structure ---------------------------------------------------------------

def test_bundled_file_shape(bundled):
    g = bundled.graph
    assert sorted(g.vertices) == ["black", "blue", "red"]
    assert sorted(g.edge_names) == ["a", "b", "c", "d", "e"]
    assert G.rank(g) == 3
    assert bundled.marked is not None
    assert bundled.marked.basepoint == "red"
    assert bundled.assumptions == frozenset({"ageometric", "fully-irreducible"})


def test_rank_and_disconnected():
    assert G.rank(ROSE3) == 3
    theta = G.Graph(("u", "v"), (("x", "u", "v"), ("y", "u", "v"), ("z", "u", "v")))
    assert G.rank(theta) == 2
    disc = G.Graph(("u", "v"), (("x", "u", "u"),))
    with pytest.raises(DisconnectedGraphError):
        G.rank(disc)


def test_directions(bundled):
    g = bundled.graph
    assert g.directions("blue") == (("b", -1), ("c", 1), ("c", -1), ("d", 1))
    assert g.valence("blue") == 4
    assert g.valence("red") == 3


def test_check_path(bundled):
    g = bundled.graph
    assert G.check_path(g, w("ea")) == ("red", "red")
    assert G.check_path(g, w("cdae")) == ("blue", "black")
    assert G.is_path(g, w("ab"))        # black -> red -> blue
    assert not G.is_path(g, w("ba"))    # blue != black between b and a
    with pytest.raises(InvariantViolation):
        G.check_path(g, w("ba"))


def test_map_validation(bundled):
    f = bundled.gmap
    assert f.vertex_map == {"red": "black", "black": "blue", "blue": "red"}
    assert f.edge_images["a"] == w("cdae")
    with pytest.raises(InvariantViolation):
        G.GraphMap.from_strings(bundled.graph, dict(f.vertex_map),
                                {**{e: W.format_word(f.edge_images[e])
                                    for e in bundled.graph.edge_names},
                                 "a": "ea"})  # ea runs red->red, not blue->black


def test_direction_image(bundled):
    f = bundled.gmap
    assert f.direction_image(("a", 1)) == ("c", 1)
    assert f.direction_image(("a", -1)) == ("e", -1)
    assert f.direction_image(("e", 1)) == ("d", -1)


# -- composition (no tightening) --------------------------------------------

def test_compose_does_not_tighten():
    g = G.GraphMap.from_strings(ROSE2, {"v": "v"}, {"a": "ab", "b": "b"})
    h = G.GraphMap.from_strings(ROSE2, {"v": "v"}, {"a": "aB", "b": "b"})
    hg = G.compose(h, g)
    # h(g(a)) = h(ab) = aB . b  -- left unreduced, with a cancelling pair
    assert hg.edge_images["a"] == w("aBb", ("a", "b"))
    assert G.tighten(hg.edge_images["a"]) == w("a", ("a", "b"))


def test_compose_associative_shape(bundled):
    f = bundled.gmap
    lhs = G.compose(G.compose(f, f), f)
    rhs = G.compose(f, G.compose(f, f))
    assert lhs.edge_images == rhs.edge_images


# -- subdivision -------------------------------------------------------------

def test_subdivision_bundled(bundled):
    sub = G.subdivide_at_preimages(bundled.gmap)
    assert len(sub.graph.edges) == 9      # image lengths 4+1+2+1+1
    assert len(sub.graph.vertices) == 7   # 3 original + 3 on a + 1 on c
    assert {v for v in sub.graph.vertices} >= {"a@1", "a@2", "a@3", "c@1"}
    # every subdivided edge maps over exactly one edge
    assert all(len(img) == 1 for img in sub.relabeled.edge_images.values())
    # relabeled . inclusion reproduces the original map on every edge
    recomposed = G.compose(sub.relabeled, sub.inclusion)
    assert recomposed.edge_images == bundled.gmap.edge_images
    assert recomposed.vertex_map == bundled.gmap.vertex_map


def test_subdivision_identity_is_noop():
    ident = G.GraphMap.identity(ROSE3)
    sub = G.subdivide_at_preimages(ident)
    assert sub.graph == ROSE3
    assert sub.relabeled.edge_images == ident.edge_images


# -- spanning trees ----------------------------------------------------------

def test_spanning_tree_deterministic(bundled):
    tree = G.spanning_tree(bundled.graph)
    assert tree.root == "black"
    assert tree.tree_edges == frozenset({"a", "d"})
    assert tree.path("red", "blue") == (("a", -1), ("d", -1))


def test_spanning_tree_disconnected():
    disc = G.Graph(("u", "v"), (("x", "u", "u"),))
    with pytest.raises(DisconnectedGraphError):
        G.spanning_tree(disc)


def test_collapse_word(bundled):
    tree = G.spanning_tree(bundled.graph)
    assert G.collapse_word(tree, w("ea")) == w("e")
    assert G.collapse_word(tree, w("bdE")) == (("b", 1), ("e", -1))


# -- map_to_automorphism -----------------------------------------------------

def test_identity_gives_literal_identity(bundled):
    result = G.map_to_automorphism(bundled.marked, G.GraphMap.identity(bundled.graph))
    ident = FreeGroupMap.identity(bundled.marked.generators)
    assert result.same_images(ident)


def test_bundled_transcription_gives_phi_outer_class(bundled):
    """Transcription validation: the bundled map represents the target outer
    automorphism a->ca, b->ab, c->Bab in the bundled marking."""
    result = G.map_to_automorphism(bundled.marked, bundled.gmap)
    phi = FreeGroupMap.from_strings(("a", "b", "c"),
                                    {"a": "ca", "b": "ab", "c": "Bab"})
    z = W.outer_equal(result, phi)
    assert z is not None
    assert result.provenance["spanning_tree"] == ["a", "d"]
    assert result.provenance["basepoint"] == "red"
    assert result.invertibility == "automorphism (inverse computed)"


def test_marking_failure_raises():
    rose = ROSE2
    marked = G.MarkedGraph(rose, "v", ("x", "y"),
                           {"x": w("aa", ("a", "b")), "y": w("b", ("a", "b"))})
    with pytest.raises(MarkingError):
        G.map_to_automorphism(marked, G.GraphMap.identity(rose))


# -- file format -------------------------------------------------------------

def test_parse_errors():
    with pytest.raises(InputParseError):
        G.parse_map_text("vertices v\nedge a v\n")  # malformed edge line
    with pytest.raises(InputParseError):
        G.parse_map_text("banana split\n")
    with pytest.raises(InputParseError):
        G.parse_map_text("vertices v\nedge a v v\nvmap v v\nemap a q\n")


def test_format_roundtrip(bundled):
    text = G.format_map_file(bundled)
    again = G.parse_map_text(text)
    assert again.graph == bundled.graph
    assert again.gmap.edge_images == bundled.gmap.edge_images
    assert again.marked.marking_words == bundled.marked.marking_words
    assert again.assumptions == bundled.assumptions


# -- tighten laws on paths (acceptance criterion support) --------------------

@given(st.lists(st.tuples(st.sampled_from(("a", "b", "c")),
                          st.sampled_from((1, -1))), max_size=30).map(tuple))
@settings(max_examples=200)
def test_tighten_laws_on_rose(word):
    t = G.tighten(word)
    assert G.tighten(t) == t
    assert len(t) <= len(word)
    assert G.tighten(W.concat(word, W.inverse(word))) == ()


def test_tighten_preserves_path_endpoints(bundled):
    g = bundled.graph
    # a wandering loop at red with backtracks, tightening to ea
    word = w("eE") + w("bB") + w("ea")
    assert G.is_path(g, word)
    t = G.tighten(word)
    assert G.is_path(g, t)
    assert G.check_path(g, t) == G.check_path(g, word)