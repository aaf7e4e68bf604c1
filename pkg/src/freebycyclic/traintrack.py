"""Train track structure of graph self-maps.

Directions, turns, illegal turns, the single-step train track test, the
crossing (transition) matrix with its irreducibility/expansion tests and
eigenmetric, taken turns, stable Whitehead data at principal vertices, the
rotationless index, a bounded periodic-Nielsen-path search, and the lone
axis verdict.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .errors import (InvariantViolation, MissingAssumptionError,
                     NotExpandingError, NotIrreducibleError)
from .graphs import Graph, GraphMap, rank as graph_rank, tighten
from .words import Letter, Word, format_word, inverse, inverse_letter

#: A turn is an unordered pair of distinct directions at a common vertex.
Turn = frozenset  # frozenset[Letter] of size 2


def make_turn(d1: Letter, d2: Letter) -> Turn:
    return frozenset((d1, d2))


def turn_sort_key(turn: Turn):
    return tuple(sorted(turn))


def format_direction(d: Letter) -> str:
    return format_word((d,))


def format_turn(turn: Turn) -> str:
    return "{" + ", ".join(format_direction(d) for d in sorted(turn)) + "}"


def direction_map(f: GraphMap) -> dict[Letter, Letter]:
    """The derivative: each direction to the first direction of its image."""
    return {d: f.direction_image(d) for d in f.domain.all_directions()}


def _stable_images(f: GraphMap) -> dict[Letter, Letter]:
    """Image of each direction under Df iterated #directions times.

    Two directions merge under some iterate exactly when they merge within
    #directions steps, so equality of these stabilized images decides
    illegality of a turn.
    """
    dmap = direction_map(f)
    n = len(dmap)
    stable = {d: d for d in dmap}
    for _ in range(n):
        stable = {d: dmap[s] for d, s in stable.items()}
    return stable


def periodic_directions(f: GraphMap) -> frozenset[Letter]:
    """Directions lying on a cycle of the direction map."""
    dmap = direction_map(f)
    n = len(dmap)
    # d is periodic iff Df^n! ... iff some iterate <= n returns to d.
    out = set()
    for d in dmap:
        cur = d
        for _ in range(n):
            cur = dmap[cur]
            if cur == d:
                out.add(d)
                break
    return frozenset(out)


def all_turns(graph: Graph) -> tuple[Turn, ...]:
    turns = []
    for v in graph.vertices:
        dirs = graph.directions(v)
        for i in range(len(dirs)):
            for j in range(i + 1, len(dirs)):
                turns.append(make_turn(dirs[i], dirs[j]))
    return tuple(sorted(set(turns), key=turn_sort_key))


def illegal_turns(f: GraphMap) -> tuple[Turn, ...]:
    """Turns whose two directions are eventually identified by the direction map."""
    stable = _stable_images(f)
    out = [t for t in all_turns(f.domain)
           if len({stable[d] for d in t}) == 1]
    return tuple(sorted(out, key=turn_sort_key))


def crossed_turns_of_path(word: Word) -> list[tuple[int, Turn]]:
    """(position, turn) pairs crossed by a tight-or-not edge path.

    Position ``i`` (1-based) is the turn between letters ``i`` and ``i+1``;
    a degenerate crossing (immediate backtrack) yields a size-1 frozenset.
    """
    out = []
    for i in range(1, len(word)):
        out.append((i, frozenset((inverse_letter(word[i - 1]), word[i]))))
    return out


def is_train_track(f: GraphMap) -> tuple[bool, Optional[tuple[str, int]]]:
    """Single-step test: no edge image crosses an illegal or degenerate turn.

    Returns ``(True, None)`` or ``(False, (edge, position))`` where position
    is the 1-based index of the offending turn inside the edge's image word.
    """
    bad = set(illegal_turns(f))
    for name in f.domain.edge_names:
        for pos, turn in crossed_turns_of_path(f.edge_images[name]):
            if len(turn) == 1 or turn in bad:
                return False, (name, pos)
    return True, None


# ---------------------------------------------------------------------------
# transition matrix


@dataclass
class TransitionMatrix:
    edges: tuple[str, ...]
    rows: tuple[tuple[int, ...], ...]

    def row_sum(self, i: int) -> int:
        return sum(self.rows[i])

    def __getitem__(self, ij: tuple[int, int]) -> int:
        return self.rows[ij[0]][ij[1]]

    def matmul(self, other: "TransitionMatrix") -> "TransitionMatrix":
        if self.edges != other.edges:
            raise InvariantViolation("matrix edge bases differ")
        n = len(self.edges)
        rows = tuple(
            tuple(sum(self.rows[i][k] * other.rows[k][j] for k in range(n))
                  for j in range(n))
            for i in range(n))
        return TransitionMatrix(self.edges, rows)


def transition_matrix(f: GraphMap) -> TransitionMatrix:
    """Entry (i, j): how often the image of edge i crosses edge j (either way)."""
    edges = tuple(sorted(f.domain.edge_names))
    index = {e: i for i, e in enumerate(edges)}
    rows = []
    for e in edges:
        row = [0] * len(edges)
        for name, _sign in f.edge_images[e]:
            row[index[name]] += 1
        rows.append(tuple(row))
    return TransitionMatrix(edges, tuple(rows))


def is_irreducible(matrix: TransitionMatrix) -> bool:
    """The crossing digraph (arc i -> j iff entry > 0) is strongly connected."""
    n = len(matrix.edges)
    if n == 0:
        return False

    def reach(start: int, transpose: bool) -> set[int]:
        seen = {start}
        stack = [start]
        while stack:
            i = stack.pop()
            for j in range(n):
                val = matrix.rows[j][i] if transpose else matrix.rows[i][j]
                if val and j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    return len(reach(0, False)) == n and len(reach(0, True)) == n


def is_expanding(matrix: TransitionMatrix) -> bool:
    """Irreducible with some edge image crossing at least two edges."""
    return is_irreducible(matrix) and any(
        matrix.row_sum(i) >= 2 for i in range(len(matrix.edges)))


@dataclass
class EigenMetric:
    edges: tuple[str, ...]
    lengths: dict[str, float]
    stretch: float
    residual: float
    iterations: int


def eigen_metric(f: GraphMap, tol: float = 1e-12,
                 max_iterations: int = 200_000) -> EigenMetric:
    """Edge lengths scaled by the expansion factor under the map.

    Power iteration on (A + I) applied to the crossing matrix A; the lengths
    are the positive right eigenvector normalized to total length 1 and the
    certified residual max_i |(A l)_i - stretch * l_i| is at most 1e-10.
    """
    matrix = transition_matrix(f)
    if not is_irreducible(matrix):
        raise NotIrreducibleError("crossing matrix is not irreducible")
    if not is_expanding(matrix):
        raise NotExpandingError("crossing matrix is irreducible but not expanding")
    n = len(matrix.edges)
    x = [1.0 / n] * n

    def apply_a(vec: list[float]) -> list[float]:
        return [sum(matrix.rows[i][j] * vec[j] for j in range(n)) for i in range(n)]

    stretch = 0.0
    residual = float("inf")
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        ax = apply_a(x)
        y = [ax[i] + x[i] for i in range(n)]
        total = sum(y)
        x = [v / total for v in y]
        ax = apply_a(x)
        num = sum(ax[i] * x[i] for i in range(n))
        den = sum(x[i] * x[i] for i in range(n))
        stretch = num / den
        residual = max(abs(ax[i] - stretch * x[i]) for i in range(n))
        if residual <= tol:
            break
    if residual > 1e-10:
        raise InvariantViolation(
            f"eigenmetric did not certify: residual {residual:g} > 1e-10")
    total = sum(x)
    x = [v / total for v in x]
    return EigenMetric(matrix.edges, dict(zip(matrix.edges, x)),
                       stretch, residual, iterations)


# ---------------------------------------------------------------------------
# taken turns and Whitehead data


def taken_turns(f: GraphMap) -> tuple[Turn, ...]:
    """Least set of turns containing all turns crossed by edge images and
    closed under the direction map."""
    dmap = direction_map(f)
    taken: set[Turn] = set()
    frontier: list[Turn] = []
    for name in f.domain.edge_names:
        for _pos, turn in crossed_turns_of_path(f.edge_images[name]):
            if len(turn) == 2 and turn not in taken:
                taken.add(turn)
                frontier.append(turn)
    while frontier:
        turn = frontier.pop()
        image = frozenset(dmap[d] for d in turn)
        if len(image) == 2 and image not in taken:
            taken.add(image)
            frontier.append(image)
    return tuple(sorted(taken, key=turn_sort_key))


@dataclass
class WhiteheadData:
    """Local, stable, and ideal Whitehead graphs of a train track map."""

    #: vertex -> (directions at the vertex, taken turns at the vertex)
    local: dict[str, tuple[tuple[Letter, ...], tuple[Turn, ...]]]
    #: vertex -> (periodic directions, taken turns between periodic directions)
    stable: dict[str, tuple[tuple[Letter, ...], tuple[Turn, ...]]]
    #: vertices with at least three periodic directions
    principal_vertices: tuple[str, ...]
    #: connected components of the ideal graph: (vertex, nodes, edges)
    components: tuple[tuple[str, tuple[Letter, ...], tuple[Turn, ...]], ...]


def whitehead_data(f: GraphMap) -> WhiteheadData:
    graph = f.domain
    periodic = periodic_directions(f)
    taken = set(taken_turns(f))
    local = {}
    stable = {}
    for v in graph.vertices:
        dirs = graph.directions(v)
        turns_v = tuple(t for t in sorted(taken, key=turn_sort_key)
                        if all(d in dirs for d in t))
        local[v] = (dirs, turns_v)
        pdirs = tuple(d for d in dirs if d in periodic)
        pturns = tuple(t for t in turns_v if all(d in periodic for d in t))
        stable[v] = (pdirs, pturns)
    principal = tuple(v for v in sorted(graph.vertices)
                      if len(stable[v][0]) >= 3)
    components = []
    for v in principal:
        pdirs, pturns = stable[v]
        adj = {d: set() for d in pdirs}
        for t in pturns:
            d1, d2 = sorted(t)
            adj[d1].add(d2)
            adj[d2].add(d1)
        seen: set[Letter] = set()
        for d in pdirs:
            if d in seen:
                continue
            comp = {d}
            stack = [d]
            while stack:
                cur = stack.pop()
                for nxt in adj[cur]:
                    if nxt not in comp:
                        comp.add(nxt)
                        stack.append(nxt)
            seen |= comp
            nodes = tuple(sorted(comp))
            edges = tuple(t for t in pturns if all(x in comp for x in t))
            components.append((v, nodes, edges))
    return WhiteheadData(local, stable, principal, tuple(components))


def ideal_whitehead(f: GraphMap, *, no_pnp: bool) -> WhiteheadData:
    """Stable Whitehead graphs over the principal vertices.

    The disjoint-union-over-principal-vertices description is only valid in
    the absence of periodic Nielsen paths, which this operation cannot decide
    internally; the caller must assert it (for instance from nielsen_search
    bounds plus external knowledge).
    """
    if not no_pnp:
        raise MissingAssumptionError(
            "ideal Whitehead graph computation needs the no-periodic-Nielsen-"
            "path hypothesis; run nielsen_search and pass no_pnp=True if "
            "justified")
    return whitehead_data(f)


def rotationless_index(wd: WhiteheadData) -> Fraction:
    """Sum over ideal components of (1 - nodes/2), as an exact rational."""
    return sum((1 - Fraction(len(nodes), 2) for _v, nodes, _e in wd.components),
               Fraction(0))


def _has_cut_vertex(nodes: Sequence[Letter], edges: Sequence[Turn]) -> bool:
    if len(nodes) <= 2:
        return False
    nodeset = list(nodes)
    for removed in nodeset:
        remaining = [n for n in nodeset if n != removed]
        if not remaining:
            continue
        adj = {n: set() for n in remaining}
        for t in edges:
            if removed in t:
                continue
            d1, d2 = sorted(t)
            adj[d1].add(d2)
            adj[d2].add(d1)
        seen = {remaining[0]}
        stack = [remaining[0]]
        while stack:
            cur = stack.pop()
            for nxt in adj[cur]:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        if len(seen) != len(remaining):
            return True
    return False


# ---------------------------------------------------------------------------
# bounded periodic Nielsen path search


@dataclass
class NielsenReport:
    """Outcome of the bounded search for periodic Nielsen paths.

    ``found`` lists tight vertex-to-vertex paths p (as words) with
    tighten(f^p(path)) == path for some period <= max_period and length
    <= max_len, each tagged with its minimal period.  ``exhaustive`` is False
    only if an enumeration cap was hit.
    """

    found: tuple[tuple[Word, int], ...]
    max_len: int
    max_period: int
    exhaustive: bool
    method: str
    note: str

    @property
    def none_up_to_bounds(self) -> bool:
        return not self.found and self.exhaustive


def _orbit_period(f: GraphMap, path: Word, max_period: int,
                  growth_cap: int = 100_000) -> Optional[int]:
    cur = path
    for p in range(1, max_period + 1):
        cur = f.apply_tight(cur)
        if len(cur) > growth_cap:
            return None
        if cur == path:
            return p
    return None


def _ray_prefix(f: GraphMap, period: int, d: Letter, length: int) -> Word:
    """Prefix of the expanding fixed ray of a Df^period-fixed direction.

    Repeatedly applies the map ``period`` times, truncating to ``length``
    letters; for a fixed direction each round extends the previous prefix, so
    the loop stops at stabilization or once ``length`` letters are available.
    """
    word: Word = (d,)
    for _round in range(4 * length * period + 16):
        if len(word) >= length:
            break
        nxt = word
        for _ in range(period):
            grown: list[Letter] = []
            for lt in nxt:
                img = f.edge_images[lt[0]]
                grown.extend(img if lt[1] > 0 else inverse(img))
                if len(grown) >= length:
                    break
            nxt = tuple(grown[:length])
        if nxt == word:
            break  # no growth: the ray is eventually this finite path
        word = nxt
    return word[:length]


def _power_image(f: GraphMap, word: Word, period: int) -> Word:
    out = word
    for _ in range(period):
        out = f.apply_path(out)
    return out


def _eigenray_search(f: GraphMap, max_len: int, max_period: int
                     ) -> list[tuple[Word, int]]:
    dmap = direction_map(f)
    found: dict[Word, int] = {}
    for period in range(1, max_period + 1):
        fixed = []
        for d in dmap:
            cur = d
            for _ in range(period):
                cur = dmap[cur]
            if cur == d:
                fixed.append(d)
        if not fixed:
            continue
        rays = {d: _ray_prefix(f, period, d, max_len) for d in fixed}
        halves: list[tuple[Letter, Word, Word]] = []  # (dir, prefix, overflow)
        for d in fixed:
            ray = rays[d]
            for a in range(1, min(len(ray), max_len - 1) + 1):
                sigma = ray[:a]
                image = tighten(_power_image(f, sigma, period))
                if image[:a] != sigma:
                    continue
                halves.append((d, sigma, image[a:]))
        graph = f.domain
        inps: list[Word] = []
        for _d1, s1, o1 in halves:
            for _d2, s2, o2 in halves:
                if o1 != o2:
                    continue
                if len(s1) + len(s2) > max_len:
                    continue
                if graph.term_of(s1[-1]) != graph.term_of(s2[-1]):
                    continue  # halves must meet at a common junction vertex
                rho = s1 + inverse(s2)
                if len(tighten(rho)) != len(rho):
                    continue
                inps.append(rho)
        # assemble concatenations of verified indivisible pieces
        verified: set[Word] = set()
        for rho in inps:
            p = _orbit_period(f, rho, max_period)
            if p is not None:
                verified.add(rho)
                found.setdefault(rho, p)
        frontier = list(verified)
        closed: set[Word] = set(verified)
        while frontier:
            base = frontier.pop()
            for piece in verified:
                if graph.term_of(base[-1]) != graph.init_of(piece[0]):
                    continue
                combo = base + piece
                if len(combo) > max_len or len(tighten(combo)) != len(combo):
                    continue
                if combo in closed:
                    continue
                closed.add(combo)
                p = _orbit_period(f, combo, max_period)
                if p is not None:
                    found.setdefault(combo, p)
                    frontier.append(combo)
    return sorted(found.items(), key=lambda kv: (len(kv[0]), kv[0]))


def _enumeration_search(f: GraphMap, max_len: int, max_period: int,
                        candidate_cap: int = 200_000, found_cap: int = 500
                        ) -> tuple[list[tuple[Word, int]], bool]:
    graph = f.domain
    found: list[tuple[Word, int]] = []
    examined = 0
    stack: list[Word] = [ (d,) for d in
                          sorted(graph.all_directions(), key=lambda x: (x[0], -x[1])) ]
    stack.reverse()
    truncated = False
    while stack:
        path = stack.pop()
        examined += 1
        if examined > candidate_cap or len(found) >= found_cap:
            truncated = True
            break
        p = _orbit_period(f, path, max_period)
        if p is not None:
            found.append((path, p))
        if len(path) < max_len:
            last = path[-1]
            for d in reversed(graph.directions(graph.term_of(last))):
                if d == inverse_letter(last):
                    continue
                stack.append(path + (d,))
    found.sort(key=lambda kv: (len(kv[0]), kv[0]))
    return found, truncated


def nielsen_search(f: GraphMap, max_len: int = 10, max_period: int = 6
                   ) -> NielsenReport:
    """Bounded search for periodic Nielsen paths.

    Semidecision: reports all tight vertex-to-vertex paths of length at most
    ``max_len`` whose tightened f^p-image returns to the path for some
    p <= ``max_period``, or "none up to bounds".  For expanding irreducible
    train track maps the search is driven by fixed directions of iterated
    direction maps (legal paths stretch strictly, and every indivisible
    periodic Nielsen path splits into two legal eigenray prefixes with equal
    overflow); otherwise it falls back to capped direct enumeration.
    """
    matrix = transition_matrix(f)
    tt, _ = is_train_track(f)
    if tt and is_expanding(matrix):
        found = _eigenray_search(f, max_len, max_period)
        return NielsenReport(tuple(found), max_len, max_period, True,
                             "eigenray",
                             "complete within bounds for expanding irreducible "
                             "train track maps")
    found, truncated = _enumeration_search(f, max_len, max_period)
    note = "direct enumeration"
    if truncated:
        note += " (cap reached; listing truncated)"
    return NielsenReport(tuple(found), max_len, max_period, not truncated,
                         "enumeration", note)


# ---------------------------------------------------------------------------
# lone axis verdict


@dataclass
class Verdict:
    verdict: str  # "yes" | "no" | "inconclusive"
    reason: str
    assumptions: tuple[str, ...]
    data: dict


def lone_axis_check(f: GraphMap, *, assume_ageometric: bool = False,
                    assume_fully_irreducible: bool = False,
                    nielsen_len: int = 10, nielsen_period: int = 6) -> Verdict:
    """Decide whether the represented outer class has a unique axis direction.

    yes: index equals 3/2 - rank and no ideal component has a cut vertex
    (under the recorded assumptions); no: at least two illegal turns, or the
    index/cut-vertex test fails; inconclusive: hypotheses unavailable.
    """
    matrix = transition_matrix(f)
    tt, witness = is_train_track(f)
    data: dict = {}
    if not tt:
        return Verdict("inconclusive",
                       f"not a train track map (witness {witness})", (), data)
    if not is_expanding(matrix):
        return Verdict("inconclusive",
                       "crossing matrix is not expanding irreducible", (), data)

    bad = illegal_turns(f)
    data["illegal_turns"] = [format_turn(t) for t in bad]
    if len(bad) >= 2:
        return Verdict("no", "at least 2 illegal turns", (), data)

    assumptions = []
    missing = []
    if assume_ageometric:
        assumptions.append("ageometric (assumed)")
    else:
        missing.append("ageometric")
    if assume_fully_irreducible:
        assumptions.append("fully irreducible (assumed)")
    else:
        missing.append("fully irreducible")
    if missing:
        return Verdict("inconclusive",
                       "unverifiable hypotheses not asserted: " + ", ".join(missing),
                       tuple(assumptions), data)

    report = nielsen_search(f, nielsen_len, nielsen_period)
    if report.found or not report.exhaustive:
        return Verdict("inconclusive",
                       "periodic Nielsen paths not excluded within bounds "
                       f"(len {nielsen_len}, period {nielsen_period})",
                       tuple(assumptions), data)
    assumptions.append(
        f"no periodic Nielsen paths up to length {nielsen_len}, "
        f"period {nielsen_period} (searched)")

    wd = whitehead_data(f)
    index = rotationless_index(wd)
    n = graph_rank(f.domain)
    data["index"] = str(index)
    data["rank"] = n
    data["ideal_components"] = [
        {"vertex": v, "nodes": [format_direction(d) for d in nodes],
         "edges": [format_turn(t) for t in edges]}
        for v, nodes, edges in wd.components]
    if index != Fraction(3, 2) - n:
        return Verdict("no",
                       f"index {index} differs from 3/2 - rank = {Fraction(3, 2) - n}",
                       tuple(assumptions), data)
    for v, nodes, edges in wd.components:
        if _has_cut_vertex(nodes, edges):
            return Verdict("no", f"ideal component at vertex {v} has a cut vertex",
                           tuple(assumptions), data)
    return Verdict("yes",
                   "index equals 3/2 - rank and no ideal component has a cut vertex",
                   tuple(assumptions), data)


# ---------------------------------------------------------------------------
# exports


def whitehead_dot(wd: WhiteheadData, which: str = "ideal") -> str:
    """DOT rendering of the local, stable, or ideal Whitehead graphs."""
    lines = [f"graph whitehead_{which} {{"]
    if which == "ideal":
        for i, (v, nodes, edges) in enumerate(wd.components):
            lines.append(f'  subgraph cluster_{i} {{ label="{v}#{i}";')
            for d in nodes:
                lines.append(f'    "{v}#{i}:{format_direction(d)}";')
            for t in edges:
                d1, d2 = sorted(t)
                lines.append(f'    "{v}#{i}:{format_direction(d1)}" -- '
                             f'"{v}#{i}:{format_direction(d2)}";')
            lines.append("  }")
    else:
        source = wd.local if which == "local" else wd.stable
        for j, v in enumerate(sorted(source)):
            dirs, turns = source[v]
            lines.append(f'  subgraph cluster_{j} {{ label="{v}";')
            for d in dirs:
                lines.append(f'    "{v}:{format_direction(d)}";')
            for t in turns:
                d1, d2 = sorted(t)
                lines.append(f'    "{v}:{format_direction(d1)}" -- '
                             f'"{v}:{format_direction(d2)}";')
            lines.append("  }")
    lines.append("}")
    return "\n".join(lines) + "\n"


def traintrack_report(f: GraphMap, *, assume_ageometric: bool = False,
                      assume_fully_irreducible: bool = False,
                      nielsen_len: int = 10, nielsen_period: int = 6) -> dict:
    """JSON-ready summary used by the command line interface."""
    matrix = transition_matrix(f)
    tt, witness = is_train_track(f)
    report: dict = {
        "edges": list(matrix.edges),
        "transition_matrix": [list(r) for r in matrix.rows],
        "train_track": tt,
        "train_track_witness": list(witness) if witness else None,
        "irreducible": is_irreducible(matrix),
        "expanding": is_expanding(matrix),
        "illegal_turns": [format_turn(t) for t in illegal_turns(f)],
    }
    if report["expanding"] and tt:
        metric = eigen_metric(f)
        report["stretch"] = metric.stretch
        report["eigen_residual"] = metric.residual
        report["lengths"] = {e: metric.lengths[e] for e in metric.edges}
        ns = nielsen_search(f, nielsen_len, nielsen_period)
        report["nielsen_paths"] = {
            "found": [[format_word(p), per] for p, per in ns.found],
            "exhaustive": ns.exhaustive,
            "method": ns.method,
            "max_len": ns.max_len,
            "max_period": ns.max_period,
        }
        if ns.none_up_to_bounds:
            wd = whitehead_data(f)
            report["ideal_components"] = [
                {"vertex": v, "nodes": [format_direction(d) for d in nodes],
                 "edges": [format_turn(t) for t in edges]}
                for v, nodes, edges in wd.components]
            report["rotationless_index"] = str(rotationless_index(wd))
    verdict = lone_axis_check(f, assume_ageometric=assume_ageometric,
                              assume_fully_irreducible=assume_fully_irreducible,
                              nielsen_len=nielsen_len,
                              nielsen_period=nielsen_period)
    report["lone_axis"] = {
        "verdict": verdict.verdict,
        "reason": verdict.reason,
        "assumptions": list(verdict.assumptions),
    }
    return report
