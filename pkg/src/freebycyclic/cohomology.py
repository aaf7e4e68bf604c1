"""First (co)homology of a trapezoid complex and its positivity calculus.

Chains and cochains are sparse ``dict[str, value]`` maps keyed by cell name;
values are integers or :class:`~fractions.Fraction`.  All computations are
exact.  The module provides:

* :func:`h1` — rank, torsion, an integral cycle basis, and a dual cocycle
  basis of the first homology;
* :func:`dual_basis` — cocycles dual to user-supplied cycles;
* :func:`cone_membership` — a strictly positive representative of a class,
  or a certifying nonnegative cycle that pairs nonpositively with it;
* :func:`integral_cocycle` — the lexicographically least integral
  representative bounded below cellwise, found by exact coboundary search;
* :func:`fiber_cocycle` / :func:`line_family_cocycle` — crossing data of
  the level circle near height zero and of its spun relatives;
* :func:`discreteness_cone` — an integer scale certifying a neighbourhood
  of classes with controlled crossing counts;
* :func:`axis_dim_lower_bound` — skew crossing count of an integral
  witness and the induced dimension bound;
* :func:`delta_lengths` — exact volume-preserving length perturbation
  supported on turns at trivalent vertices.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from .errors import (
    ConeInfeasibleError,
    InvariantViolation,
    NonIntegralClassError,
    NotACycleError,
    TurnDataError,
)
from .graphs import Graph, GraphMap, spanning_tree
from .linalg import (
    integer_nullspace,
    mat_mul,
    minimum_of_coordinate,
    rational_solve,
    smith_normal_form,
    solve_integer,
    solve_inequalities,
)
from .torus import TrapComplex, skew_loop

#: Sparse (co)chain: cell name to coefficient; absent cells carry zero.
Chain = dict


# ---------------------------------------------------------------------------
# boundary matrices in fixed cell orders


@dataclass
class ChainData:
    """Boundary matrices of a trapezoid complex in fixed cell orders.

    ``d1`` has one row per 0-cell and one column per 1-cell; ``d2`` has one
    row per 1-cell and one column per 2-cell.
    """

    zero_cells: tuple[str, ...]
    one_cells: tuple[str, ...]
    two_cells: tuple[str, ...]
    d1: list[list[int]]
    d2: list[list[int]]

    def __post_init__(self):
        self.zero_index = {c: i for i, c in enumerate(self.zero_cells)}
        self.one_index = {c: i for i, c in enumerate(self.one_cells)}


def chain_data(complex_: TrapComplex) -> ChainData:
    zero = tuple(c.name for c in complex_.zero_cells)
    one = complex_.one_cell_names
    two = tuple(t.name for t in complex_.trapezoids)
    b1 = complex_.boundary_one()
    b2 = complex_.boundary_two()
    d1 = [[b1[e].get(v, 0) for e in one] for v in zero]
    d2 = [[b2[t].get(e, 0) for t in two] for e in one]
    if two and any(x != 0 for row in mat_mul(d1, d2) for x in row):
        raise InvariantViolation("boundary of a boundary is nonzero")
    return ChainData(zero, one, two, d1, d2)


def boundary(complex_: TrapComplex, chain: Mapping) -> Chain:
    """Boundary of a 1-chain as a sparse 0-chain."""
    b1 = complex_.boundary_one()
    out: Chain = {}
    for cell, coef in chain.items():
        if cell not in b1:
            raise InvariantViolation(f"unknown 1-cell {cell!r}")
        for v, inc in b1[cell].items():
            out[v] = out.get(v, 0) + coef * inc
    return {v: c for v, c in out.items() if c != 0}


def is_cycle(complex_: TrapComplex, chain: Mapping) -> bool:
    return not boundary(complex_, chain)


def is_cocycle(complex_: TrapComplex, z: Mapping) -> bool:
    """Whether ``z`` vanishes on the boundary of every 2-cell."""
    for row in complex_.boundary_two().values():
        if sum(z.get(e, 0) * coef for e, coef in row.items()) != 0:
            return False
    return True


def coboundary(complex_: TrapComplex, potential: Mapping) -> Chain:
    """The 1-cochain ``e -> sum of potential over the boundary of e``."""
    b1 = complex_.boundary_one()
    out: Chain = {}
    for e, row in b1.items():
        val = sum(Fraction(potential.get(v, 0)) * inc for v, inc in row.items())
        if val != 0:
            out[e] = val
    return out


def evaluate(complex_: TrapComplex, z: Mapping, chain: Mapping) -> Fraction:
    """Pairing of a cocycle with a 1-cycle.

    The chain must be a cycle (else the value would depend on the chosen
    cochain representative) and ``z`` must be a cocycle (else it would
    depend on the chosen cycle representative).
    """
    if not is_cocycle(complex_, z):
        raise InvariantViolation("cochain is not a cocycle")
    bad = boundary(complex_, chain)
    if bad:
        raise NotACycleError(f"chain has nonzero boundary {bad!r}")
    return sum((Fraction(z.get(e, 0)) * coef for e, coef in chain.items()),
               Fraction(0))


# ---------------------------------------------------------------------------
# first homology


@dataclass
class H1Data:
    """Free rank, torsion divisors, integral cycle basis, and dual cocycles.

    ``duals[i]`` pairs to 1 with ``cycles[i]`` and to 0 with the others.
    When some basis class evaluates to 1 on the loop formed by the skew
    1-cells, that class is placed last.
    """

    rank: int
    torsion: tuple[int, ...]
    cycles: tuple[Chain, ...]
    duals: tuple[Chain, ...]


def _unimodular_inverse(u: list[list[int]]) -> list[list[int]]:
    n = len(u)
    cols = []
    for j in range(n):
        rhs = [1 if i == j else 0 for i in range(n)]
        sol = solve_integer(u, rhs)
        if sol is None:
            raise InvariantViolation("matrix is not unimodular")
        cols.append(sol)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def _dual_system(data: ChainData, cycles: Sequence[Chain]
                 ) -> tuple[list[list[int]], int]:
    """Rows expressing 'is a cocycle' plus one pairing row per cycle."""
    n1 = len(data.one_cells)
    rows = [[data.d2[e][t] for e in range(n1)] for t in range(len(data.two_cells))]
    for cyc in cycles:
        rows.append([cyc.get(e, 0) for e in data.one_cells])
    return rows, len(data.two_cells)


def _solve_dual(data: ChainData, cycles: Sequence[Chain], which: int) -> Chain:
    rows, n_cocycle = _dual_system(data, cycles)
    rhs = [0] * n_cocycle + [1 if i == which else 0 for i in range(len(cycles))]
    sol = solve_integer(rows, rhs)
    if sol is None:
        frac = rational_solve(rows, rhs)
        if frac is None:
            raise InvariantViolation(
                "cycles do not admit a dual cocycle basis")
        sol = frac
    return {e: sol[i] for i, e in enumerate(data.one_cells) if sol[i] != 0}


def h1(complex_: TrapComplex) -> H1Data:
    """First homology from the Smith normal form of the boundary pair."""
    data = chain_data(complex_)
    n1 = len(data.one_cells)
    kernel = integer_nullspace(data.d1)
    dim_ker = len(kernel)
    kmat = [[kernel[j][i] for j in range(dim_ker)] for i in range(n1)]

    if data.two_cells:
        ycols = []
        for t in range(len(data.two_cells)):
            col = [data.d2[e][t] for e in range(n1)]
            y = solve_integer(kmat, col)
            if y is None:
                raise InvariantViolation(
                    "2-cell boundary is not a cycle")
            ycols.append(y)
        ymat = [[ycols[t][j] for t in range(len(ycols))] for j in range(dim_ker)]
        snf = smith_normal_form(ymat)
        r = snf.rank
        torsion = tuple(abs(d) for d in snf.diagonal[:r] if abs(d) > 1)
        winv = _unimodular_inverse(snf.u)
        free_coords = [[winv[i][j] for i in range(dim_ker)]
                       for j in range(r, dim_ker)]
    else:
        torsion = ()
        free_coords = [[1 if i == j else 0 for i in range(dim_ker)]
                       for j in range(dim_ker)]

    cycles: list[Chain] = []
    for coords in free_coords:
        vec = [sum(kmat[i][j] * coords[j] for j in range(dim_ker))
               for i in range(n1)]
        cycles.append({e: vec[i] for i, e in enumerate(data.one_cells)
                       if vec[i] != 0})
    duals = [_solve_dual(data, cycles, i) for i in range(len(cycles))]

    try:
        loop = skew_loop(complex_)
    except NotACycleError:
        loop = None
    if loop is not None:
        for i in range(len(duals)):
            pairing = sum(Fraction(duals[i].get(e, 0)) * c
                          for e, c in loop.items())
            if pairing == 1 and i != len(duals) - 1:
                cycles.append(cycles.pop(i))
                duals.append(duals.pop(i))
                break

    return H1Data(len(cycles), torsion, tuple(cycles), tuple(duals))


def dual_basis(complex_: TrapComplex, cycles: Sequence[Mapping]
               ) -> tuple[Chain, ...]:
    """Cocycles pairing as the identity matrix with the given cycles.

    Each input must be a cycle and the family must be independent in
    rational homology and of full rank there.
    """
    data = chain_data(complex_)
    normalized = []
    for cyc in cycles:
        bad = boundary(complex_, cyc)
        if bad:
            raise NotACycleError(f"chain has nonzero boundary {bad!r}")
        normalized.append(dict(cyc))
    return tuple(_solve_dual(data, normalized, i)
                 for i in range(len(normalized)))


def cycle_coordinates(complex_: TrapComplex, chain: Mapping,
                      cycles: Sequence[Mapping], duals: Sequence[Mapping]
                      ) -> tuple[Fraction, ...]:
    """Coordinates of a cycle in a homology basis, verified exactly.

    The coordinates are read off with the dual cocycles; the difference
    between the chain and the coordinate combination of basis cycles is
    then checked to bound a rational 2-chain.
    """
    coords = tuple(evaluate(complex_, z, chain) for z in duals)
    data = chain_data(complex_)
    diff = dict(chain)
    for coef, cyc in zip(coords, cycles):
        for e, c in cyc.items():
            diff[e] = diff.get(e, 0) - coef * c
    rhs = [Fraction(diff.get(e, 0)) for e in data.one_cells]
    if any(rhs):
        if not data.two_cells or rational_solve(data.d2, rhs) is None:
            raise InvariantViolation(
                "cycle is not the coordinate combination of the basis "
                "modulo boundaries")
    return coords


# ---------------------------------------------------------------------------
# positive cone


@dataclass
class ConeWitness:
    """A strictly positive cocycle representative and the shift reaching it.

    ``values`` equals the queried cocycle plus the coboundary of
    ``potential`` and is positive on every 1-cell.
    """

    values: Chain
    potential: dict


def cone_membership(complex_: TrapComplex, z: Mapping) -> ConeWitness:
    """Strictly positive representative of the class of ``z``.

    Raises :class:`ConeInfeasibleError` carrying a certificate when no
    representative is positive: a nonnegative cycle supported on the
    1-cells whose pairing with the class is nonpositive.
    """
    if not is_cocycle(complex_, z):
        raise InvariantViolation("cochain is not a cocycle")
    data = chain_data(complex_)
    n0 = len(data.zero_cells)
    rows = []
    for j, e in enumerate(data.one_cells):
        coeffs = [data.d1[i][j] for i in range(n0)]
        rows.append((coeffs, Fraction(z.get(e, 0)), True))
    status, payload = solve_inequalities(rows)
    if status == "feasible":
        potential = {v: payload[i] for i, v in enumerate(data.zero_cells)}
        witness = dict_sum(z, coboundary(complex_, potential))
        if any(val <= 0 for val in witness.values()) \
                or len(witness) != len(data.one_cells):
            raise InvariantViolation("positivity witness failed verification")
        return ConeWitness(witness, potential)
    certificate: Chain = {data.one_cells[idx]: lam
                          for idx, lam in payload.items() if lam != 0}
    bad = boundary(complex_, certificate)
    pairing = sum(Fraction(z.get(e, 0)) * lam
                  for e, lam in certificate.items())
    if bad or pairing > 0 or any(lam < 0 for lam in certificate.values()):
        raise InvariantViolation("infeasibility certificate failed verification")
    raise ConeInfeasibleError(
        f"class has no positive representative; the nonnegative cycle "
        f"{certificate!r} pairs to {pairing} with it",
        certificate=certificate)


def dict_sum(*chains: Mapping) -> Chain:
    out: Chain = {}
    for ch in chains:
        for e, c in ch.items():
            out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def dict_scale(scalar, chain: Mapping) -> Chain:
    return {e: scalar * c for e, c in chain.items() if scalar * c != 0}


def integral_cocycle(complex_: TrapComplex, z: Mapping,
                     minimum: int = 0) -> Chain:
    """Least integral representative of the class of ``z``, cellwise.

    Searches coboundary shifts exactly: cell values are minimized one at a
    time in the 1-cell order subject to every value staying at least
    ``minimum``, each minimum being fixed before the next cell is
    considered.  Raises :class:`ConeInfeasibleError` when no representative
    clears the bound and :class:`NonIntegralClassError` when a minimized
    value is fractional — the result is never rounded.
    """
    if not is_cocycle(complex_, z):
        raise InvariantViolation("cochain is not a cocycle")
    data = chain_data(complex_)
    n0 = len(data.zero_cells)

    def cell_rows(fixed: dict) -> list:
        rows = []
        for j, e in enumerate(data.one_cells):
            coeffs = [Fraction(data.d1[i][j]) for i in range(n0)] + [Fraction(0)]
            base = Fraction(z.get(e, 0))
            if e in fixed:
                rows.append((coeffs, base - fixed[e], False))
                rows.append(([-c for c in coeffs], fixed[e] - base, False))
            else:
                rows.append((coeffs, base - minimum, False))
        return rows

    status, payload = solve_inequalities(cell_rows({}))
    if status != "feasible":
        certificate: Chain = {}
        for idx, lam in payload.items():
            e = data.one_cells[idx]
            certificate[e] = certificate.get(e, 0) + lam
        certificate = {e: lam for e, lam in certificate.items() if lam != 0}
        raise ConeInfeasibleError(
            f"no representative is at least {minimum} on every 1-cell",
            certificate=certificate)

    fixed: dict = {}
    for j, e in enumerate(data.one_cells):
        rows = cell_rows(fixed)
        coeffs = [Fraction(data.d1[i][j]) for i in range(n0)] + [Fraction(-1)]
        base = Fraction(z.get(e, 0))
        rows.append((coeffs, base, False))
        rows.append(([-c for c in coeffs], -base, False))
        low = minimum_of_coordinate(rows, n0)
        if low is None:
            raise InvariantViolation(
                f"value on {e!r} is unbounded below despite the cellwise bound")
        if low.denominator != 1:
            raise NonIntegralClassError(
                f"least value on {e!r} is the fraction {low}; "
                f"the class has no integral representative of this shape")
        fixed[e] = low
    return {e: int(v) for e, v in fixed.items() if v != 0}


# ---------------------------------------------------------------------------
# geometric cocycles of the level circle


def fiber_cocycle(complex_: TrapComplex) -> Chain:
    """Crossing counts of the level circle just above the base graph.

    The circle crosses exactly the verticals based at height zero and the
    skew 1-cell spanning the first height window.
    """
    z: Chain = {}
    cell = {c.name: c for c in complex_.zero_cells}
    for vert in complex_.verticals:
        if cell[vert.start].stage == 0:
            z[vert.name] = 1
    for skew in complex_.skews:
        if skew.kind == "strict" and skew.index == 1:
            z[skew.name] = 1
    if not is_cocycle(complex_, z):
        raise InvariantViolation("level-circle crossing data is not a cocycle")
    return z


def line_family_cocycle(complex_: TrapComplex, k: int) -> Chain:
    """Crossing data of the level circle spun ``k`` times.

    The spun copy adds, per turn of spinning, one crossing on the vertical
    that continues the flow out of the first skew's bottom vertical and one
    on the vertical flowing into that skew's bottom 0-cell.
    """
    if k < 0:
        raise InvariantViolation("spinning count must be nonnegative")
    z = dict(fiber_cocycle(complex_))
    if k:
        first = min(s.name for s in complex_.skews)
        bottom = complex_.skew_by_name[first].bottom
        at_bottom = complex_.vertical_from[bottom]
        succ = complex_.vertical_from[at_bottom.end]
        into = [v for v in complex_.verticals if v.end == bottom]
        if len(into) != 1:
            raise InvariantViolation(
                "spinning needs a unique vertical flowing into the first "
                "skew's bottom 0-cell")
        for name in (succ.name, into[0].name):
            z[name] = z.get(name, 0) + k
    if not is_cocycle(complex_, z) or any(v < 0 for v in z.values()):
        raise InvariantViolation("spun crossing data failed verification")
    return z


# ---------------------------------------------------------------------------
# discreteness scale


@dataclass
class DiscretenessCone:
    """Integer scale and corner data for a controlled neighbourhood.

    Classes ``scale * [base] + sum of signs * [others]`` keep positive
    crossings on every 1-cell, and on the reported skew cell the crossing
    count stays above ``margin``.
    """

    scale: int
    skew: str
    margin: int
    corners: tuple[tuple[int, ...], ...]


def discreteness_cone(complex_: TrapComplex, z_base: Mapping,
                      others: Sequence[Mapping], k: int) -> DiscretenessCone:
    """Smallest integer scale clearing both crossing bounds.

    ``z_base`` must be strictly positive on every 1-cell.  The scale ``M``
    is minimal with ``M * z_base(e) > sum of |z_i(e)|`` for every 1-cell
    and ``M * z_base(d) - sum of |z_i(d)| > k + 2`` for some skew cell
    ``d``; every skew cell is tried and the best is reported.
    """
    if not is_cocycle(complex_, z_base):
        raise InvariantViolation("base cochain is not a cocycle")
    for other in others:
        if not is_cocycle(complex_, other):
            raise InvariantViolation("perturbing cochain is not a cocycle")
    one_cells = complex_.one_cell_names
    base = {e: Fraction(z_base.get(e, 0)) for e in one_cells}
    if any(v <= 0 for v in base.values()):
        raise InvariantViolation(
            "base cocycle must be strictly positive on every 1-cell")
    spread = {e: sum(abs(Fraction(other.get(e, 0))) for other in others)
              for e in one_cells}

    def least_above(bound: Fraction, unit: Fraction) -> int:
        ratio = bound / unit
        return int(ratio) + 1 if ratio.denominator == 1 else \
            int(ratio // 1) + 1

    cellwise = max(least_above(spread[e], base[e]) for e in one_cells)
    margin = k + 2
    best: Optional[tuple[int, str]] = None
    for skew in sorted(s.name for s in complex_.skews):
        need = max(cellwise, least_above(spread[skew] + margin, base[skew]))
        if best is None or need < best[0]:
            best = (need, skew)
    if best is None:
        raise InvariantViolation("complex has no skew cells")
    scale, chosen = best
    signs = [()]
    for _ in others:
        signs = [s + (eps,) for s in signs for eps in (1, -1)]
    corners = tuple((scale,) + s for s in signs)
    return DiscretenessCone(scale, chosen, margin, corners)


# ---------------------------------------------------------------------------
# crossing counts of integral witnesses


@dataclass
class AxisBound:
    """Skew crossing count of an integral witness and the derived bound."""

    crossings: int
    lower_bound: int


def axis_dim_lower_bound(complex_: TrapComplex, z: Mapping) -> AxisBound:
    """Dimension bound from the skew crossings of an integral witness.

    The witness must be an integral nonnegative cocycle; the bound is the
    total crossing count of the skew cells less two, floored at zero.
    """
    if not is_cocycle(complex_, z):
        raise InvariantViolation("cochain is not a cocycle")
    for e, val in z.items():
        if Fraction(val).denominator != 1:
            raise NonIntegralClassError(
                f"witness value on {e!r} is the fraction {val}")
        if val < 0:
            raise InvariantViolation(
                f"witness value on {e!r} is negative")
    crossings = sum(int(z.get(s.name, 0)) for s in complex_.skews)
    return AxisBound(crossings, max(0, crossings - 2))


# ---------------------------------------------------------------------------
# length perturbation along turns


def delta_lengths(graph: Graph, lengths: Mapping[str, float],
                  turns: Sequence[frozenset], weights: Sequence[Fraction]
                  ) -> dict[str, float]:
    """Volume-preserving length change supported near chosen turns.

    Each turn must sit at its own trivalent vertex and must not consist of
    the two ends of a single loop.  Per turn the two turn edges lose and
    the remaining edge gains, loops are left untouched, and the result is
    rescaled to total length one; the total weight must stay below one.
    """
    if len(turns) != len(weights):
        raise TurnDataError("one weight is needed per turn")
    total = sum(Fraction(w) for w in weights)
    if total >= 1:
        raise TurnDataError("total perturbation weight must be below one")
    is_loop = {name: init == term for name, init, term in graph.edges}
    seen_vertices = set()
    deltas: list[dict[str, int]] = []
    for turn in turns:
        if len(turn) != 2:
            raise TurnDataError("a turn is a pair of distinct directions")
        d1, d2 = sorted(turn)
        if d1[0] == d2[0]:
            raise TurnDataError(
                f"turn at edge {d1[0]!r} uses both ends of one loop")
        v = graph.init_of(d1)
        if graph.init_of(d2) != v:
            raise TurnDataError("turn directions are based at different vertices")
        if v in seen_vertices:
            raise TurnDataError(f"vertex {v!r} carries more than one turn")
        seen_vertices.add(v)
        dirs = graph.directions(v)
        if len(dirs) != 3:
            raise TurnDataError(f"vertex {v!r} is not trivalent")
        if d1 not in dirs or d2 not in dirs:
            raise TurnDataError(f"turn directions are not based at {v!r}")
        (third,) = [d for d in dirs if d not in (d1, d2)]
        delta: dict[str, int] = {}
        for direction, change in ((d1, -1), (d2, -1), (third, 1)):
            name = direction[0]
            delta[name] = 0 if is_loop[name] else change
        if sum(delta.values()) != -1:
            raise InvariantViolation("length change does not sum to minus one")
        deltas.append(delta)
    shrink = 1 - total
    out = {}
    for name in graph.edge_names:
        moved = Fraction(lengths[name]) + sum(
            w * delta.get(name, 0) for w, delta in zip(weights, deltas))
        out[name] = float(moved / shrink)
    return out


# ---------------------------------------------------------------------------
# abelianized rank oracle


def graph_h1_action(f: GraphMap) -> list[list[int]]:
    """Matrix of the induced map on graph homology in a non-tree-edge basis.

    Row ``i`` lists the signed occurrences of each non-tree edge in the
    image of the loop carried by non-tree edge ``i``.
    """
    if not f.is_self_map:
        raise InvariantViolation("homology action needs a self map")
    tree = spanning_tree(f.domain)
    free = [name for name in f.domain.edge_names
            if name not in tree.tree_edges]
    index = {name: i for i, name in enumerate(free)}
    rows = []
    for name in free:
        loop = tree.path(tree.root, f.domain.init_of((name, 1))) \
            + ((name, 1),) \
            + tree.path(f.domain.term_of((name, 1)), tree.root)
        counts = [0] * len(free)
        for lt in f.apply_path(loop):
            if lt[0] in index:
                counts[index[lt[0]]] += lt[1]
        rows.append(counts)
    return rows


def mapping_torus_h1_rank(f: GraphMap) -> int:
    """Abelianization rank of the group presented by the map and a stable letter."""
    action = graph_h1_action(f)
    n = len(action)
    shifted = [[action[i][j] - (1 if i == j else 0) for j in range(n)]
               for i in range(n)]
    rank = smith_normal_form(shifted).rank if n else 0
    return 1 + n - rank
