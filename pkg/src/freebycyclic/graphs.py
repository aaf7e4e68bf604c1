"""Finite graphs with named oriented edges, edge paths, graph maps, markings.

A *direction* at a vertex is a letter ``(name, sign)`` whose initial vertex is
that vertex; an *edge path* is a word of letters whose consecutive endpoints
match.  Tightening an edge path is exactly free reduction, which preserves the
path property and its endpoints.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import (DisconnectedGraphError, InputParseError,
                     InvariantViolation, MarkingError)
from .words import (FreeGroupMap, Letter, Word, concat, format_word, inverse,
                    greedy_nielsen_inverse, parse_word, reduce_word)


@dataclass(frozen=True)
class Graph:
    """A finite graph: vertex names plus ``(name, init, term)`` oriented edges."""

    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise InvariantViolation("duplicate vertex names")
        names = [e[0] for e in self.edges]
        if len(set(names)) != len(names):
            raise InvariantViolation("duplicate edge names")
        vset = set(self.vertices)
        for name, init, term in self.edges:
            if init not in vset or term not in vset:
                raise InvariantViolation(f"edge {name!r} has unknown endpoint")
        object.__setattr__(self, "_ends",
                           {name: (init, term) for name, init, term in self.edges})

    @classmethod
    def rose(cls, edge_names: Sequence[str], vertex: str = "v") -> "Graph":
        return cls((vertex,), tuple((n, vertex, vertex) for n in edge_names))

    @property
    def edge_names(self) -> tuple[str, ...]:
        return tuple(e[0] for e in self.edges)

    def has_edge(self, name: str) -> bool:
        return name in self._ends

    def init_of(self, lt: Letter) -> str:
        init, term = self._ends[lt[0]]
        return init if lt[1] > 0 else term

    def term_of(self, lt: Letter) -> str:
        init, term = self._ends[lt[0]]
        return term if lt[1] > 0 else init

    def directions(self, vertex: str) -> tuple[Letter, ...]:
        """All directions based at ``vertex``, sorted by (edge name, forward first)."""
        out = []
        for name, init, term in self.edges:
            if init == vertex:
                out.append((name, 1))
            if term == vertex:
                out.append((name, -1))
        return tuple(sorted(out, key=lambda lt: (lt[0], -lt[1])))

    def all_directions(self) -> tuple[Letter, ...]:
        out = []
        for name, _, _ in self.edges:
            out.append((name, 1))
            out.append((name, -1))
        return tuple(sorted(out, key=lambda lt: (lt[0], -lt[1])))

    def valence(self, vertex: str) -> int:
        return len(self.directions(vertex))

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {self.vertices[0]}
        frontier = [self.vertices[0]]
        while frontier:
            v = frontier.pop()
            for name, init, term in self.edges:
                for a, b in ((init, term), (term, init)):
                    if a == v and b not in seen:
                        seen.add(b)
                        frontier.append(b)
        return len(seen) == len(self.vertices)


def rank(graph: Graph) -> int:
    """First Betti number |E| - |V| + 1 of a connected graph."""
    if not graph.is_connected():
        raise DisconnectedGraphError(
            "rank is only defined here for connected graphs")
    return len(graph.edges) - len(graph.vertices) + 1


# ---------------------------------------------------------------------------
# paths


def check_path(graph: Graph, word: Iterable[Letter]) -> tuple[str, str]:
    """Validate an edge path and return its (initial, terminal) vertices."""
    word = tuple(word)
    if not word:
        raise InvariantViolation("an empty path has no endpoints")
    for lt in word:
        if not graph.has_edge(lt[0]):
            raise InvariantViolation(f"unknown edge {lt[0]!r} in path")
    for cur, nxt in zip(word, word[1:]):
        if graph.term_of(cur) != graph.init_of(nxt):
            raise InvariantViolation(
                f"path breaks between {cur!r} and {nxt!r}: "
                f"{graph.term_of(cur)!r} != {graph.init_of(nxt)!r}")
    return graph.init_of(word[0]), graph.term_of(word[-1])


def is_path(graph: Graph, word: Iterable[Letter]) -> bool:
    try:
        check_path(graph, word)
        return True
    except InvariantViolation:
        return False


#: Tightening an edge path is free reduction.
tighten = reduce_word


# ---------------------------------------------------------------------------
# graph maps


@dataclass
class GraphMap:
    """A map of graphs sending vertices to vertices and edges to edge paths."""

    domain: Graph
    codomain: Graph
    vertex_map: dict[str, str]
    edge_images: dict[str, Word]

    def __post_init__(self) -> None:
        for v in self.domain.vertices:
            if v not in self.vertex_map:
                raise InvariantViolation(f"vertex {v!r} has no image")
            if self.vertex_map[v] not in self.codomain.vertices:
                raise InvariantViolation(f"vertex image {self.vertex_map[v]!r} unknown")
        for name, init, term in self.domain.edges:
            if name not in self.edge_images:
                raise InvariantViolation(f"edge {name!r} has no image")
            img = tuple(self.edge_images[name])
            self.edge_images[name] = img
            want = (self.vertex_map[init], self.vertex_map[term])
            if img:
                got = check_path(self.codomain, img)
            else:
                got = (want[0], want[0])
            if got != want:
                raise InvariantViolation(
                    f"image of edge {name!r} runs {got} but vertex images need {want}")

    @classmethod
    def identity(cls, graph: Graph) -> "GraphMap":
        return cls(graph, graph, {v: v for v in graph.vertices},
                   {name: ((name, 1),) for name in graph.edge_names})

    @classmethod
    def from_strings(cls, graph: Graph, vertex_map: Mapping[str, str],
                     images: Mapping[str, str],
                     codomain: Optional[Graph] = None) -> "GraphMap":
        cod = codomain if codomain is not None else graph
        return cls(graph, cod, dict(vertex_map),
                   {e: parse_word(images[e], cod.edge_names) for e in graph.edge_names})

    @property
    def is_self_map(self) -> bool:
        return self.domain == self.codomain

    def vertex_image(self, v: str) -> str:
        return self.vertex_map[v]

    def apply_path(self, word: Iterable[Letter]) -> Word:
        """Image of an edge path, concatenated without tightening."""
        out: list[Letter] = []
        for name, sign in word:
            img = self.edge_images[name]
            out.extend(img if sign > 0 else inverse(img))
        return tuple(out)

    def apply_tight(self, word: Iterable[Letter]) -> Word:
        return reduce_word(self.apply_path(word))

    def direction_image(self, lt: Letter) -> Letter:
        """First letter of the image of the direction ``lt`` (image must be nonempty)."""
        name, sign = lt
        img = self.edge_images[name]
        if not img:
            raise InvariantViolation(f"edge {name!r} has empty image")
        return img[0] if sign > 0 else (img[-1][0], -img[-1][1])

    def iterate_tight(self, word: Iterable[Letter], n: int) -> Word:
        out = tuple(word)
        for _ in range(n):
            out = self.apply_tight(out)
        return out


def compose(f: GraphMap, g: GraphMap) -> GraphMap:
    """Return f ∘ g (apply ``g`` first); images concatenate without tightening."""
    if g.codomain != f.domain:
        raise InvariantViolation("composition requires g.codomain == f.domain")
    return GraphMap(g.domain, f.codomain,
                    {v: f.vertex_map[g.vertex_map[v]] for v in g.domain.vertices},
                    {e: f.apply_path(g.edge_images[e]) for e in g.domain.edge_names})


# ---------------------------------------------------------------------------
# subdivision at image preimages


@dataclass
class Subdivision:
    """Result of subdividing a self-map so every edge maps over a single edge.

    ``graph`` is the subdivided graph; ``relabeled`` maps it to the original
    graph one edge at a time (its images are single letters, the labels);
    ``inclusion`` is the subdivision homeomorphism from the original graph,
    so that ``relabeled ∘ inclusion`` equals the original map.
    """

    graph: Graph
    relabeled: GraphMap
    inclusion: GraphMap


def subdivide_at_preimages(f: GraphMap) -> Subdivision:
    if not f.is_self_map:
        raise InvariantViolation("subdivision expects a graph self-map")
    g = f.domain
    vertices = list(g.vertices)
    vset = set(vertices)
    edges: list[tuple[str, str, str]] = []
    labels: dict[str, Word] = {}
    inclusion_images: dict[str, Word] = {}
    new_vertex_map: dict[str, str] = dict(f.vertex_map)

    for name, init, term in g.edges:
        img = f.edge_images[name]
        if not img:
            raise InvariantViolation(
                f"cannot subdivide: edge {name!r} has empty image")
        L = len(img)
        if L == 1:
            edges.append((name, init, term))
            labels[name] = (img[0],)
            inclusion_images[name] = ((name, 1),)
            continue
        piece_names = [f"{name}_{i}" for i in range(1, L + 1)]
        inner = [f"{name}@{i}" for i in range(1, L)]
        for v in inner:
            if v in vset:
                raise InvariantViolation(f"subdivision vertex name clash: {v!r}")
            vset.add(v)
            vertices.append(v)
        stops = [init] + inner + [term]
        for i, piece in enumerate(piece_names):
            edges.append((piece, stops[i], stops[i + 1]))
            labels[piece] = (img[i],)
        for i, v in enumerate(inner, start=1):
            new_vertex_map[v] = g.term_of(img[i - 1])
        inclusion_images[name] = tuple((p, 1) for p in piece_names)

    graph0 = Graph(tuple(vertices), tuple(edges))
    relabeled = GraphMap(graph0, g, new_vertex_map, labels)
    inclusion = GraphMap(g, graph0, {v: v for v in g.vertices}, inclusion_images)
    return Subdivision(graph0, relabeled, inclusion)


# ---------------------------------------------------------------------------
# spanning trees and collapse


@dataclass
class SpanningTree:
    root: str
    tree_edges: frozenset[str]
    #: vertex -> path (word) from root to the vertex, inside the tree
    root_paths: dict[str, Word]

    def path(self, u: str, v: str) -> Word:
        return reduce_word(concat(inverse(self.root_paths[u]), self.root_paths[v]))


def spanning_tree(graph: Graph, root: Optional[str] = None) -> SpanningTree:
    """Breadth-first spanning tree; root defaults to the least vertex name and
    neighbours are explored in direction order, so the result is deterministic."""
    if not graph.vertices:
        raise InvariantViolation("empty graph has no spanning tree")
    if root is None:
        root = min(graph.vertices)
    seen: dict[str, Word] = {root: ()}
    tree: set[str] = set()
    frontier = [root]
    while frontier:
        nxt: list[str] = []
        for v in frontier:
            for lt in graph.directions(v):
                w = graph.term_of(lt)
                if w not in seen:
                    seen[w] = seen[v] + (lt,)
                    tree.add(lt[0])
                    nxt.append(w)
        frontier = nxt
    if len(seen) != len(graph.vertices):
        raise DisconnectedGraphError("graph is not connected")
    return SpanningTree(root, frozenset(tree), seen)


def collapse_word(tree: SpanningTree, word: Iterable[Letter]) -> Word:
    """Image of a path under collapsing the spanning tree: drop tree letters."""
    return reduce_word(lt for lt in word if lt[0] not in tree.tree_edges)


# ---------------------------------------------------------------------------
# markings


@dataclass
class MarkedGraph:
    """A graph with a rose marking: loops at a basepoint, one per generator."""

    graph: Graph
    basepoint: str
    generators: tuple[str, ...]
    marking_words: dict[str, Word]

    def __post_init__(self) -> None:
        if self.basepoint not in self.graph.vertices:
            raise InvariantViolation(f"unknown basepoint {self.basepoint!r}")
        for gname in self.generators:
            word = tuple(self.marking_words[gname])
            self.marking_words[gname] = word
            init, term = check_path(self.graph, word)
            if init != self.basepoint or term != self.basepoint:
                raise InvariantViolation(
                    f"marking word for {gname!r} is not a loop at the basepoint")

    def marking_word(self, gname: str) -> Word:
        return self.marking_words[gname]


def marking_change_of_basis(marked: MarkedGraph,
                            tree: Optional[SpanningTree] = None
                            ) -> tuple[SpanningTree, tuple[str, ...], FreeGroupMap]:
    """The word-level map μ = (collapse tree) ∘ (marking) from the marking
    generators to the non-tree edges.  A marking is a homotopy equivalence
    exactly when μ is an automorphism-like change of basis."""
    if tree is None:
        tree = spanning_tree(marked.graph)
    nontree = tuple(sorted(n for n in marked.graph.edge_names
                           if n not in tree.tree_edges))
    mu = FreeGroupMap(marked.generators, nontree,
                      tuple(collapse_word(tree, marked.marking_word(g))
                            for g in marked.generators))
    return tree, nontree, mu


def map_to_automorphism(marked: MarkedGraph, f: GraphMap) -> FreeGroupMap:
    """Read off the outer automorphism represented by a self-map of a marked
    graph: collapse a deterministic spanning tree, push the marking through,
    and convert back to the marking generators.

    The result is well defined up to conjugacy; the provenance field records
    the spanning tree and basepoint so reruns are reproducible.
    """
    if not f.is_self_map or f.domain != marked.graph:
        raise InvariantViolation("expected a self-map of the marked graph")
    tree, nontree, mu = marking_change_of_basis(marked)
    mu_inv = greedy_nielsen_inverse(mu)
    if mu_inv is None:
        raise MarkingError(
            "marking fails homotopy-inverse word check: the collapsed marking "
            "words do not greedily reduce to a basis of the free group on the "
            "non-tree edges")
    psi = FreeGroupMap(
        marked.generators, nontree,
        tuple(collapse_word(tree, f.apply_path(marked.marking_word(g)))
              for g in marked.generators))
    images = tuple(mu_inv.apply(psi.image(g)) for g in marked.generators)
    result = FreeGroupMap(marked.generators, marked.generators, images,
                          provenance={
                              "spanning_tree": sorted(tree.tree_edges),
                              "tree_root": tree.root,
                              "basepoint": marked.basepoint,
                              "collapse_basis": list(nontree),
                          })
    if greedy_nielsen_inverse(result) is not None:
        result.invertibility = "automorphism (inverse computed)"
    return result


# ---------------------------------------------------------------------------
# text format


@dataclass
class MapFile:
    """Parsed contents of a ``.map`` file."""

    graph: Graph
    gmap: GraphMap
    marked: Optional[MarkedGraph]
    assumptions: frozenset[str]


def parse_map_text(text: str) -> MapFile:
    """Parse the marked-graph-with-map text format.

    Lines (``#`` comments and blanks ignored)::

        vertices <name>...
        edge <name> <init> <term>
        vmap <vertex> <image vertex>
        emap <edge> <image word>
        marking basepoint <vertex>
        marking <generator> <loop word>
        assume <flag>
    """
    vertices: list[str] = []
    edges: list[tuple[str, str, str]] = []
    vmap: dict[str, str] = {}
    emap_raw: dict[str, str] = {}
    basepoint: Optional[str] = None
    marking_raw: list[tuple[str, str]] = []
    assumptions: set[str] = set()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind, args = parts[0], parts[1:]
        try:
            if kind == "vertices":
                vertices.extend(args)
            elif kind == "edge":
                name, init, term = args
                edges.append((name, init, term))
            elif kind == "vmap":
                v, image = args
                vmap[v] = image
            elif kind == "emap":
                name = args[0]
                emap_raw[name] = " ".join(args[1:])
            elif kind == "marking":
                if args[0] == "basepoint":
                    (_, basepoint) = args
                else:
                    marking_raw.append((args[0], " ".join(args[1:])))
            elif kind == "assume":
                (flag,) = args
                assumptions.add(flag)
            else:
                raise InputParseError(f"line {lineno}: unknown directive {kind!r}")
        except (ValueError, IndexError) as exc:
            raise InputParseError(f"line {lineno}: malformed {kind!r} line") from exc

    try:
        graph = Graph(tuple(vertices), tuple(edges))
        gmap = GraphMap.from_strings(graph, vmap, emap_raw)
    except (InvariantViolation, KeyError) as exc:
        raise InputParseError(f"inconsistent map data: {exc}") from exc

    marked = None
    if marking_raw:
        if basepoint is None:
            raise InputParseError("marking words given without a basepoint")
        try:
            marked = MarkedGraph(
                graph, basepoint, tuple(g for g, _ in marking_raw),
                {g: parse_word(w, graph.edge_names) for g, w in marking_raw})
        except InvariantViolation as exc:
            raise InputParseError(f"invalid marking: {exc}") from exc
    return MapFile(graph, gmap, marked, frozenset(assumptions))


def load_map_file(path: str | Path) -> MapFile:
    return parse_map_text(Path(path).read_text(encoding="utf-8"))


def format_map_file(mapfile: MapFile) -> str:
    """Serialize back to the text format (used by generators and tests)."""
    g = mapfile.graph
    lines = ["vertices " + " ".join(g.vertices)]
    lines += [f"edge {n} {i} {t}" for n, i, t in g.edges]
    lines += [f"vmap {v} {mapfile.gmap.vertex_map[v]}" for v in g.vertices]
    lines += [f"emap {n} {format_word(mapfile.gmap.edge_images[n])}"
              for n in g.edge_names]
    if mapfile.marked is not None:
        m = mapfile.marked
        lines.append(f"marking basepoint {m.basepoint}")
        lines += [f"marking {gen} {format_word(m.marking_word(gen))}"
                  for gen in m.generators]
    for flag in sorted(mapfile.assumptions):
        lines.append(f"assume {flag}")
    return "\n".join(lines) + "\n"
