"""Folded mapping torus as a complex of trapezoids.

The fold sequence of a graph self-map stacks its stages into a solid torus
cell structure: 0-cells are base vertices and fold events, 1-cells are
vertical flow segments between 0-cells plus one diagonal "skew" per fold,
and 2-cells are trapezoids, one above each skew, swept out by flowing the
folded edge upward until every horizontal slice has crossed another skew.
Heights count fold windows; wrapping through the terminal isomorphism
returns flow to the base level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import (InvariantViolation, IterationBudgetError, NotACycleError)
from .folding import FoldSequence
from .words import Letter


@dataclass(frozen=True)
class ZeroCell:
    name: str
    vertex: str
    stage: int


@dataclass
class Vertical:
    name: str
    start: str
    end: str
    span: int                              # fold windows crossed
    trace: tuple[tuple[str, int], ...]     # (vertex, stage) entering each window


@dataclass
class SkewCell:
    name: str
    index: int
    kind: str            # "strict" | "offset"
    bottom: str          # coordinate-0 endpoint (fold vertex end)
    top: str             # coordinate-1 endpoint (merged end)
    rise: int            # 1 for strict folds, 0 for head-to-tail folds
    edge: str            # surviving edge name in the post-fold stage
    direction: Letter    # kept direction in the pre-fold stage


@dataclass
class TopPiece:
    skew: str
    sign: int
    x_lo: Fraction
    x_hi: Fraction


@dataclass
class Trapezoid:
    name: str
    bottom: str                                  # skew name
    left: tuple[str, ...]                        # vertical names, bottom-up
    right: tuple[str, ...]
    top: tuple[TopPiece, ...]                    # left to right, contiguous
    corners: tuple[tuple[Fraction, str], ...]    # interior break -> 0-cell


@dataclass
class TrapComplex:
    folds: FoldSequence
    zero_cells: tuple[ZeroCell, ...]
    verticals: tuple[Vertical, ...]
    skews: tuple[SkewCell, ...]
    trapezoids: tuple[Trapezoid, ...]
    base_cover: dict[str, tuple[str, Fraction, Fraction, int]]
    # base edge -> (trapezoid, x_lo, x_hi, sign) of its unique level-0 crossing

    def __post_init__(self):
        self.cell_by_name = {c.name: c for c in self.zero_cells}
        self.vertical_from = {v.start: v for v in self.verticals}
        self.vertical_by_name = {v.name: v for v in self.verticals}
        self.skew_by_name = {s.name: s for s in self.skews}
        self.trap_by_name = {t.name: t for t in self.trapezoids}
        self.trap_above = {t.bottom: t for t in self.trapezoids}

    @property
    def one_cell_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.verticals) + \
            tuple(s.name for s in self.skews)

    def euler_characteristic(self) -> int:
        return len(self.zero_cells) - len(self.one_cell_names) \
            + len(self.trapezoids)

    def boundary_one(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for v in self.verticals:
            row: dict[str, int] = {}
            row[v.end] = row.get(v.end, 0) + 1
            row[v.start] = row.get(v.start, 0) - 1
            out[v.name] = {c: x for c, x in row.items() if x}
        for s in self.skews:
            row = {}
            row[s.top] = row.get(s.top, 0) + 1
            row[s.bottom] = row.get(s.bottom, 0) - 1
            out[s.name] = {c: x for c, x in row.items() if x}
        return out

    def boundary_two(self) -> dict[str, dict[str, int]]:
        out: dict[str, dict[str, int]] = {}
        for t in self.trapezoids:
            row: dict[str, int] = {}

            def add(cell: str, coef: int):
                row[cell] = row.get(cell, 0) + coef

            add(t.bottom, 1)
            for name in t.right:
                add(name, 1)
            for piece in t.top:
                add(piece.skew, -piece.sign)
            for name in t.left:
                add(name, -1)
            out[t.name] = {c: x for c, x in row.items() if x}
        return out


def _fold_window(seq: FoldSequence, j: int):
    """(kept direction, dropped direction) of fold j (1-based)."""
    record = seq.folds[j - 1]
    return record.kept, record.dropped


def build_torus(seq: FoldSequence, max_steps: int = 200_000) -> TrapComplex:
    k = seq.fold_count
    if k == 0:
        raise InvariantViolation(
            "the map folds to an isomorphism with no folds; the torus "
            "construction needs at least one fold window")
    codomain = seq.original.codomain
    h_vmap = seq.final_iso.vertex_map

    def norm(vertex: str, stage: int) -> tuple[str, int]:
        if stage == k:
            return (h_vmap[vertex], 0)
        return (vertex, stage)

    def cell_name(vs: tuple[str, int]) -> str:
        return f"{vs[0]}.{vs[1]}"

    # ---- skew cells
    skews: list[SkewCell] = []
    for record in seq.folds:
        i = record.index
        prev = seq.stages[i - 1].graph
        q = seq.maps[i - 1]
        keep = record.kept
        if record.kind == "strict":
            bottom = (record.vertex, i - 1)
            top = norm(q.vertex_map[prev.term_of(keep)], i)
            rise = 1
        else:
            bottom = norm(q.vertex_map[prev.init_of(keep)], i)
            top = norm(q.vertex_map[prev.term_of(keep)], i)
            rise = 0
        skews.append(SkewCell(f"skew{i}", i, record.kind, cell_name(bottom),
                              cell_name(top), rise, keep[0], keep))

    # ---- zero cells: base vertices plus skew endpoints
    cell_set: dict[tuple[str, int], str] = {}
    for v in codomain.vertices:
        cell_set[(v, 0)] = cell_name((v, 0))
    for s in skews:
        for endpoint in (s.bottom, s.top):
            vertex, stage = endpoint.rsplit(".", 1)
            cell_set[(vertex, int(stage))] = endpoint
    zero_cells = tuple(ZeroCell(name, vs[0], vs[1])
                       for vs, name in sorted(cell_set.items(),
                                              key=lambda kv: (kv[0][1], kv[0][0])))

    # ---- verticals: walk each 0-cell upward to the next 0-cell
    def walk_vertex(vertex: str, stage: int):
        """((vertex, stage) entering each crossed window, then the end cell)."""
        cur, st = vertex, stage
        trace = []
        for _ in range(k + 1):
            trace.append((cur, st))
            cur = seq.maps[st].vertex_map[cur]
            st += 1
            if st == k:
                cur, st = h_vmap[cur], 0
            if (cur, st) in cell_set:
                return trace, (cur, st)
        raise InvariantViolation(
            f"vertical walk from {vertex}.{stage} did not close")

    verticals = []
    for cell in zero_cells:
        trace, end = walk_vertex(cell.vertex, cell.stage)
        verticals.append(Vertical(f"up:{cell.name}", cell.name,
                                  cell_set[end], len(trace), tuple(trace)))
    vertical_from = {v.start: v for v in verticals}

    # endpoint of skew cells with their window heights, for corner matching
    def piece_endpoints(skew: SkewCell, sign: int, h_enter: int):
        if skew.rise == 1:
            lo_cell, lo_h = skew.bottom, h_enter
            hi_cell, hi_h = skew.top, h_enter + 1
        else:
            lo_cell = skew.bottom
            hi_cell = skew.top
            lo_h = hi_h = h_enter + 1
        if sign > 0:
            return (lo_cell, lo_h), (hi_cell, hi_h)
        return (hi_cell, hi_h), (lo_cell, lo_h)

    skew_by_index = {s.index: s for s in skews}
    pieces_of_base = {
        name: seq.subdivision.inclusion.edge_images[name]
        for name in codomain.edge_names
    }

    # ---- sweep one trapezoid per skew
    base_cover: dict[str, tuple[str, Fraction, Fraction, int]] = {}
    trapezoids: list[Trapezoid] = []
    steps = 0
    for skew in skews:
        i = skew.index
        entries = [(skew.edge, skew.direction[1], Fraction(0), Fraction(1), i, 0)]
        hits: list[tuple[Fraction, Fraction, SkewCell, int, int]] = []
        while entries:
            edge, sign, x_lo, x_hi, stage, height = entries.pop()
            steps += 1
            if steps > max_steps:
                raise IterationBudgetError(
                    f"trapezoid sweep for {skew.name} exceeded {max_steps} steps "
                    "(the flow has an invariant circle missing every skew?)")
            if stage == k:
                base_letter = seq.final_iso.edge_images[edge][0]
                base_edge = base_letter[0]
                new_sign = sign * base_letter[1]
                if base_edge in base_cover:
                    raise InvariantViolation(
                        f"base edge {base_edge} crossed twice at the base level")
                base_cover[base_edge] = (f"trap{i}", x_lo, x_hi, new_sign)
                pieces = pieces_of_base[base_edge]
                m = len(pieces)
                width = (x_hi - x_lo) / m
                for t, (piece_name, piece_sign) in enumerate(pieces):
                    if piece_sign != 1:
                        raise InvariantViolation("subdivision piece reversed")
                    slot = t if new_sign > 0 else m - 1 - t
                    entries.append((piece_name, new_sign,
                                    x_lo + slot * width,
                                    x_lo + (slot + 1) * width, 0, height))
                continue
            j = stage + 1
            keep, drop = _fold_window(seq, j)
            if edge == keep[0]:
                hits.append((x_lo, x_hi, skew_by_index[j], sign * keep[1], height))
            elif edge == drop[0]:
                hits.append((x_lo, x_hi, skew_by_index[j], sign * drop[1], height))
            else:
                entries.append((edge, sign, x_lo, x_hi, j, height + 1))

        hits.sort(key=lambda hit: hit[0])
        if not hits or hits[0][0] != 0 or hits[-1][1] != 1 or any(
                hits[a][1] != hits[a + 1][0] for a in range(len(hits) - 1)):
            raise InvariantViolation(
                f"top of trap{i} does not tile the interval: "
                f"{[(str(a), str(b)) for a, b, *_ in hits]}")
        top = []
        corners = []
        prev_end: Optional[tuple[str, int]] = None
        for x_lo, x_hi, hit_skew, sign, h_enter in hits:
            start, end = piece_endpoints(hit_skew, sign, h_enter)
            if prev_end is not None:
                if prev_end != start:
                    raise InvariantViolation(
                        f"top corner mismatch in trap{i} at x={x_lo}: "
                        f"{prev_end} vs {start}")
                corners.append((x_lo, start[0]))
            top.append(TopPiece(hit_skew.name, sign, x_lo, x_hi))
            prev_end = end

        def walk_chain(cell: str, height: int, target: tuple[str, int],
                       label: str) -> tuple[str, ...]:
            chain = []
            cur, cur_h = cell, height
            while (cur, cur_h) != target:
                if cur_h > target[1]:
                    raise InvariantViolation(
                        f"{label} side of trap{i} overshot its corner: "
                        f"{(cur, cur_h)} beyond {target}")
                vert = vertical_from[cur]
                chain.append(vert.name)
                cur, cur_h = vert.end, cur_h + vert.span
            return tuple(chain)

        first_start, _ = piece_endpoints(skew_by_index[hits[0][2].index],
                                         hits[0][3], hits[0][4])
        _, last_end = piece_endpoints(skew_by_index[hits[-1][2].index],
                                      hits[-1][3], hits[-1][4])
        bottom_h = -1 if skew.rise == 1 else 0
        left = walk_chain(skew.bottom, bottom_h, first_start, "left")
        right = walk_chain(skew.top, 0, last_end, "right")
        trapezoids.append(Trapezoid(f"trap{i}", skew.name, left, right,
                                    tuple(top), tuple(corners)))

    missing = sorted(set(codomain.edge_names) - set(base_cover))
    if missing:
        raise InvariantViolation(
            f"base edges never crossed at the base level: {missing}")

    complex_ = TrapComplex(seq, zero_cells, tuple(verticals), tuple(skews),
                           tuple(trapezoids), base_cover)
    validate(complex_)
    return complex_


# ---------------------------------------------------------------------------
# validation


def validate(complex_: TrapComplex) -> None:
    problems: list[str] = []
    chi = complex_.euler_characteristic()
    if chi != 0:
        problems.append(f"Euler characteristic {chi} != 0")

    for cell in complex_.zero_cells:
        if cell.name not in complex_.vertical_from:
            problems.append(f"0-cell {cell.name} starts no vertical")

    # every skew: one trapezoid bottom and exactly two top appearances
    bottom_count = {s.name: 0 for s in complex_.skews}
    top_count = {s.name: 0 for s in complex_.skews}
    side_count = {v.name: 0 for v in complex_.verticals}
    for trap in complex_.trapezoids:
        bottom_count[trap.bottom] += 1
        for piece in trap.top:
            top_count[piece.skew] += 1
        for name in trap.left + trap.right:
            side_count[name] += 1
    for s in complex_.skews:
        degree = bottom_count[s.name] + top_count[s.name]
        if bottom_count[s.name] != 1 or top_count[s.name] != 2:
            problems.append(
                f"skew {s.name} has degree {degree} "
                f"({bottom_count[s.name]} bottom, {top_count[s.name]} top), "
                "expected 1 bottom + 2 top")
    for v in complex_.verticals:
        if side_count[v.name] < 2:
            problems.append(
                f"vertical {v.name} borders only {side_count[v.name]} "
                "trapezoid sides (dangling)")

    # boundary of a boundary vanishes
    d1 = complex_.boundary_one()
    d2 = complex_.boundary_two()
    for trap_name, row in d2.items():
        acc: dict[str, int] = {}
        for one_cell, coef in row.items():
            for zero_cell, inc in d1[one_cell].items():
                acc[zero_cell] = acc.get(zero_cell, 0) + coef * inc
        if any(acc.values()):
            problems.append(f"boundary of {trap_name} is not a cycle: {acc}")

    for edge, cover in complex_.base_cover.items():
        if not (0 <= cover[1] < cover[2] <= 1):
            problems.append(f"base cover of {edge} has a bad interval")

    if problems:
        raise InvariantViolation(
            "mapping torus validation failed:\n  " + "\n  ".join(problems))


# ---------------------------------------------------------------------------
# derived structure


def skew_loop(complex_: TrapComplex) -> dict[str, int]:
    """The 1-cycle crossing every skew once; raises if it fails to close."""
    chain = {s.name: 1 for s in complex_.skews}
    boundary: dict[str, int] = {}
    d1 = complex_.boundary_one()
    for name, coef in chain.items():
        for cell, inc in d1[name].items():
            boundary[cell] = boundary.get(cell, 0) + coef * inc
    if any(boundary.values()):
        raise NotACycleError(
            f"the skew chain has boundary {sorted(boundary.items())}")
    return chain


def skew_passage(complex_: TrapComplex, skew_name: str, x: Fraction
                 ) -> tuple[str, object, Optional[Fraction]]:
    """Flow a skew interior point up through the trapezoid above it.

    Returns ("skew", name, position) when the flow lands on the interior of
    another skew, or ("cell", name, None) when it exits exactly at a top
    corner 0-cell.  Requires 0 < x < 1.
    """
    if not 0 < x < 1:
        raise InvariantViolation("skew passage requires an interior point")
    trap = complex_.trap_above[skew_name]
    for x_break, cell in trap.corners:
        if x == x_break:
            return "cell", cell, None
    for piece in trap.top:
        if piece.x_lo < x < piece.x_hi:
            y = (x - piece.x_lo) / (piece.x_hi - piece.x_lo)
            if piece.sign < 0:
                y = 1 - y
            return "skew", piece.skew, y
    raise InvariantViolation(f"no top piece of {trap.name} contains x={x}")


# ---------------------------------------------------------------------------
# exports


def torus_json(complex_: TrapComplex) -> dict:
    return {
        "zero_cells": [{"name": c.name, "vertex": c.vertex, "stage": c.stage}
                       for c in complex_.zero_cells],
        "verticals": [{"name": v.name, "start": v.start, "end": v.end,
                       "span": v.span} for v in complex_.verticals],
        "skews": [{"name": s.name, "kind": s.kind, "bottom": s.bottom,
                   "top": s.top, "rise": s.rise, "edge": s.edge}
                  for s in complex_.skews],
        "trapezoids": [{
            "name": t.name,
            "bottom": t.bottom,
            "left": list(t.left),
            "right": list(t.right),
            "top": [{"skew": p.skew, "sign": p.sign,
                     "x_lo": str(p.x_lo), "x_hi": str(p.x_hi)}
                    for p in t.top],
            "corners": [{"x": str(x), "cell": cell} for x, cell in t.corners],
        } for t in complex_.trapezoids],
        "base_cover": {edge: {"trapezoid": trap, "x_lo": str(lo),
                              "x_hi": str(hi), "sign": sign}
                       for edge, (trap, lo, hi, sign)
                       in sorted(complex_.base_cover.items())},
        "euler_characteristic": complex_.euler_characteristic(),
    }


def torus_dot(complex_: TrapComplex) -> str:
    lines = ["digraph mapping_torus {"]
    for c in complex_.zero_cells:
        lines.append(f'  "{c.name}";')
    for v in complex_.verticals:
        lines.append(f'  "{v.start}" -> "{v.end}" [label="{v.name}"];')
    for s in complex_.skews:
        lines.append(f'  "{s.bottom}" -> "{s.top}" '
                     f'[label="{s.name}", style=dashed];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def torus_tikz(complex_: TrapComplex) -> str:
    """A schematic picture: 0-cells on a stage grid, verticals and skews."""
    coords: dict[str, tuple[int, int]] = {}
    by_stage: dict[int, list[str]] = {}
    for c in complex_.zero_cells:
        by_stage.setdefault(c.stage, []).append(c.name)
    for stage in sorted(by_stage):
        for slot, name in enumerate(sorted(by_stage[stage])):
            coords[name] = (2 * slot, 2 * stage)
    lines = ["\\begin{tikzpicture}[every node/.style={font=\\small}]"]
    for name, (x, y) in sorted(coords.items()):
        safe = name.replace("@", "&")
        lines.append(f"  \\node[draw, circle, inner sep=1pt] "
                     f"({_tikz_id(name)}) at ({x},{y}) {{{safe}}};")
    for v in complex_.verticals:
        lines.append(f"  \\draw[->] ({_tikz_id(v.start)}) -- "
                     f"({_tikz_id(v.end)});")
    for s in complex_.skews:
        lines.append(f"  \\draw[->, dashed] ({_tikz_id(s.bottom)}) -- "
                     f"({_tikz_id(s.top)});")
    lines.append("\\end{tikzpicture}")
    return "\n".join(lines) + "\n"


def _tikz_id(name: str) -> str:
    return name.replace("@", "-at-").replace(".", "-").replace(":", "-")
