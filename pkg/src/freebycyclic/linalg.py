"""Exact linear algebra over the integers and rationals.

Hand-rolled on purpose: every consumer in this package needs exact answers
(integral cohomology, cone membership certificates, lexicographically least
integral solutions), so everything here works with Python ints and Fractions
and returns witnesses that the callers re-verify.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import InvariantViolation

IntMatrix = list[list[int]]
FracVector = tuple[Fraction, ...]


def identity_matrix(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> IntMatrix:
    rows, inner, cols = len(a), len(b), len(b[0]) if b else 0
    return [[sum(a[i][k] * b[k][j] for k in range(inner)) for j in range(cols)]
            for i in range(rows)]


def transpose(a: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*a)] if a else []


# ---------------------------------------------------------------------------
# Smith normal form


@dataclass
class SmithForm:
    """U @ A @ V == D with U, V unimodular and D diagonal, d_i | d_{i+1}."""

    u: IntMatrix
    d: IntMatrix
    v: IntMatrix

    @property
    def diagonal(self) -> tuple[int, ...]:
        return tuple(self.d[i][i] for i in range(min(len(self.d),
                                                     len(self.d[0]) if self.d else 0)))

    @property
    def rank(self) -> int:
        return sum(1 for x in self.diagonal if x != 0)


def smith_normal_form(matrix: Sequence[Sequence[int]]) -> SmithForm:
    a = [list(map(int, row)) for row in matrix]
    m = len(a)
    n = len(a[0]) if a else 0
    u = identity_matrix(m)
    v = identity_matrix(n)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, factor):
        for k in range(n):
            a[dst][k] += factor * a[src][k]
        for k in range(m):
            u[dst][k] += factor * u[src][k]

    def add_col(src, dst, factor):
        for row in a:
            row[dst] += factor * row[src]
        for row in v:
            row[dst] += factor * row[src]

    def negate_row(i):
        a[i] = [-x for x in a[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    while t < min(m, n):
        # find the nonzero entry of least magnitude in the working block
        pivot = None
        for i in range(t, m):
            for j in range(t, n):
                if a[i][j] != 0 and (pivot is None or
                                     abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        if a[t][t] < 0:
            negate_row(t)
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, m):
                if a[i][t] % a[t][t] != 0:
                    add_row(t, i, -(a[i][t] // a[t][t]))
                    swap_rows(t, i)
                    if a[t][t] < 0:
                        negate_row(t)
                    dirty = True
                elif a[i][t] != 0:
                    add_row(t, i, -(a[i][t] // a[t][t]))
            for j in range(t + 1, n):
                if a[t][j] % a[t][t] != 0:
                    add_col(t, j, -(a[t][j] // a[t][t]))
                    swap_cols(t, j)
                    if a[t][t] < 0:
                        negate_row(t)
                    dirty = True
                elif a[t][j] != 0:
                    add_col(t, j, -(a[t][j] // a[t][t]))
        # divisibility of the remaining block by the pivot
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if a[i][j] % a[t][t] != 0:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            add_row(offender, t, 1)
            continue  # redo the clearing at the same t
        t += 1

    return SmithForm(u, a, v)


def integer_rank(matrix: Sequence[Sequence[int]]) -> int:
    if not matrix or not matrix[0]:
        return 0
    return smith_normal_form(matrix).rank


def solve_integer(matrix: Sequence[Sequence[int]], rhs: Sequence[int]
                  ) -> Optional[tuple[int, ...]]:
    """Some integral x with A x = b, or None."""
    if not matrix:
        return ()
    m, n = len(matrix), len(matrix[0])
    snf = smith_normal_form(matrix)
    ub = [sum(snf.u[i][k] * rhs[k] for k in range(m)) for i in range(m)]
    y = [0] * n
    for i in range(m):
        d = snf.d[i][i] if i < min(m, n) else 0
        if d == 0:
            if ub[i] != 0:
                return None
        else:
            if ub[i] % d != 0:
                return None
            if i < n:
                y[i] = ub[i] // d
    x = [sum(snf.v[i][k] * y[k] for k in range(n)) for i in range(n)]
    return tuple(x)


def integer_nullspace(matrix: Sequence[Sequence[int]]) -> list[tuple[int, ...]]:
    """Basis of the integer kernel (columns of V beyond the rank)."""
    if not matrix or not matrix[0]:
        n = len(matrix[0]) if matrix else 0
        return [tuple(1 if i == j else 0 for i in range(n)) for j in range(n)]
    snf = smith_normal_form(matrix)
    n = len(matrix[0])
    r = snf.rank
    return [tuple(snf.v[i][j] for i in range(n)) for j in range(r, n)]


# ---------------------------------------------------------------------------
# rational elimination


def rational_solve(matrix: Sequence[Sequence], rhs: Sequence
                   ) -> Optional[FracVector]:
    """Some rational x with A x = b, or None."""
    m = len(matrix)
    n = len(matrix[0]) if matrix else 0
    aug = [[Fraction(matrix[i][j]) for j in range(n)] + [Fraction(rhs[i])]
           for i in range(m)]
    pivots = []
    row = 0
    for col in range(n):
        sel = next((r for r in range(row, m) if aug[r][col] != 0), None)
        if sel is None:
            continue
        aug[row], aug[sel] = aug[sel], aug[row]
        inv = 1 / aug[row][col]
        aug[row] = [x * inv for x in aug[row]]
        for r in range(m):
            if r != row and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[row])]
        pivots.append(col)
        row += 1
        if row == m:
            break
    for r in range(row, m):
        if aug[r][n] != 0:
            return None
    x = [Fraction(0)] * n
    for r, col in enumerate(pivots):
        x[col] = aug[r][n]
    return tuple(x)


def rational_rank(matrix: Sequence[Sequence]) -> int:
    m = len(matrix)
    n = len(matrix[0]) if matrix else 0
    rows = [[Fraction(matrix[i][j]) for j in range(n)] for i in range(m)]
    rank = 0
    for col in range(n):
        sel = next((r for r in range(rank, m) if rows[r][col] != 0), None)
        if sel is None:
            continue
        rows[rank], rows[sel] = rows[sel], rows[rank]
        inv = 1 / rows[rank][col]
        rows[rank] = [x * inv for x in rows[rank]]
        for r in range(m):
            if r != rank and rows[r][col] != 0:
                factor = rows[r][col]
                rows[r] = [x - factor * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# Fourier-Motzkin with provenance


@dataclass
class Inequality:
    """sum(coeffs * x) + const >= 0, strict when ``strict``.

    ``provenance`` expresses the row as a nonnegative combination of the
    original input rows (by index), enabling Farkas certificates.
    """

    coeffs: FracVector
    const: Fraction
    strict: bool
    provenance: dict[int, Fraction]


def _combine(pos: Inequality, neg: Inequality, k: int) -> Inequality:
    """Eliminate variable k from a row with positive and one with negative
    coefficient; the result is implied with multipliers (−neg_k, pos_k)."""
    a, b = pos.coeffs[k], neg.coeffs[k]
    mult_pos, mult_neg = -b, a  # both positive
    coeffs = tuple(mult_pos * p + mult_neg * q
                   for p, q in zip(pos.coeffs, neg.coeffs))
    const = mult_pos * pos.const + mult_neg * neg.const
    prov: dict[int, Fraction] = {}
    for idx, lam in pos.provenance.items():
        prov[idx] = prov.get(idx, Fraction(0)) + mult_pos * lam
    for idx, lam in neg.provenance.items():
        prov[idx] = prov.get(idx, Fraction(0)) + mult_neg * lam
    return Inequality(coeffs, const, pos.strict or neg.strict, prov)


FeasibleResult = tuple[str, object]


def solve_inequalities(rows: Sequence[tuple[Sequence, object, bool]]
                       ) -> FeasibleResult:
    """Decide {x : every (coeffs, const, strict) row holds}.

    Returns ("feasible", point) with an exact rational point satisfying all
    rows, or ("infeasible", certificate) where certificate maps input row
    indices to nonnegative multipliers whose combination has zero
    coefficients and a contradictory constant term.
    """
    n = max((len(c) for c, _k, _s in rows), default=0)
    system = [Inequality(tuple(Fraction(x) for x in list(coeffs) + [0] * (n - len(coeffs))),
                         Fraction(const), strict, {i: Fraction(1)})
              for i, (coeffs, const, strict) in enumerate(rows)]

    stages: list[list[Inequality]] = []  # rows with variable k present, per k
    for k in range(n - 1, -1, -1):
        pos = [r for r in system if r.coeffs[k] > 0]
        neg = [r for r in system if r.coeffs[k] < 0]
        zero = [r for r in system if r.coeffs[k] == 0]
        stages.append(pos + neg)
        new = zero
        for p in pos:
            for q in neg:
                new.append(_combine(p, q, k))
        system = _prune(new)
        contradiction = _find_contradiction(system)
        if contradiction is not None:
            return "infeasible", contradiction.provenance

    contradiction = _find_contradiction(system)
    if contradiction is not None:
        return "infeasible", contradiction.provenance

    # back-substitute: stages were recorded for k = n-1 .. 0
    x: list[Fraction] = [Fraction(0)] * n
    for k in range(n):
        bounds = stages[n - 1 - k]
        lower: Optional[tuple[Fraction, bool]] = None
        upper: Optional[tuple[Fraction, bool]] = None
        for r in bounds:
            # variables above k were already eliminated when this stage was
            # recorded, so only the assigned lower-index variables contribute
            rest = r.const + sum(r.coeffs[j] * x[j] for j in range(n)
                                 if j != k and r.coeffs[j] != 0)
            # r.coeffs[k] * x_k + rest >= 0
            if r.coeffs[k] > 0:
                bound = -rest / r.coeffs[k]
                if lower is None or bound > lower[0] or \
                        (bound == lower[0] and r.strict):
                    lower = (bound, r.strict)
            else:
                bound = -rest / r.coeffs[k]
                if upper is None or bound < upper[0] or \
                        (bound == upper[0] and r.strict):
                    upper = (bound, r.strict)
        if lower is None and upper is None:
            x[k] = Fraction(0)
        elif lower is None:
            x[k] = upper[0] - 1
        elif upper is None:
            x[k] = lower[0] if not lower[1] else lower[0] + 1
        else:
            if lower[0] == upper[0]:
                x[k] = lower[0]  # closed on both sides (FM guarantees order)
            else:
                x[k] = (lower[0] + upper[0]) / 2
    # exact verification before returning
    for coeffs, const, strict in rows:
        val = sum(Fraction(c) * xi for c, xi in zip(coeffs, x)) + Fraction(const)
        if val < 0 or (strict and val == 0):
            raise InvariantViolation("back-substitution produced an invalid point")
    return "feasible", tuple(x)


def _find_contradiction(system: list[Inequality]) -> Optional[Inequality]:
    for r in system:
        if all(c == 0 for c in r.coeffs):
            if r.const < 0 or (r.strict and r.const == 0):
                return r
    return None


def _prune(system: list[Inequality]) -> list[Inequality]:
    """Drop tautologies and duplicate rows (contradictions are kept)."""
    out = []
    seen = set()
    for r in system:
        if all(c == 0 for c in r.coeffs) and (
                r.const > 0 or (r.const == 0 and not r.strict)):
            continue
        key = (r.coeffs, r.const, r.strict)
        if key in seen:
            continue
        seen.add(key)
        out.append(r)
    return out


def minimum_of_coordinate(rows: Sequence[tuple[Sequence, object, bool]],
                          target: int) -> Optional[Fraction]:
    """Greatest lower bound of x_target over the (closed) feasible region.

    Only meaningful for systems of non-strict rows; returns None when
    unbounded below.  Feasibility must be checked separately.
    """
    n = max((len(c) for c, _k, _s in rows), default=0)
    system = [Inequality(tuple(Fraction(x) for x in list(coeffs) + [0] * (n - len(coeffs))),
                         Fraction(const), strict, {i: Fraction(1)})
              for i, (coeffs, const, strict) in enumerate(rows)]
    for k in range(n):
        if k == target:
            continue
        pos = [r for r in system if r.coeffs[k] > 0]
        neg = [r for r in system if r.coeffs[k] < 0]
        zero = [r for r in system if r.coeffs[k] == 0]
        system = _prune(zero + [_combine(p, q, k) for p in pos for q in neg])
    best: Optional[Fraction] = None
    for r in system:
        if r.coeffs[target] > 0:
            bound = -r.const / r.coeffs[target]
            if best is None or bound > best:
                best = bound
    return best


def lexmin_nonnegative(equalities: Sequence[tuple[Sequence, object]],
                       n: int) -> Optional[tuple[Fraction, ...]]:
    """Lexicographically least x >= 0 with A x = b, by repeated minimization.

    Returns None when infeasible.  Each coordinate minimum is attained
    because the region is closed.
    """
    rows: list[tuple[list, object, bool]] = []
    for coeffs, const in equalities:
        coeffs = list(coeffs) + [0] * (n - len(coeffs))
        rows.append((coeffs, -Fraction(const), False))
        rows.append(([-c for c in coeffs], Fraction(const), False))
    for j in range(n):
        unit = [Fraction(0)] * n
        unit[j] = Fraction(1)
        rows.append((unit, Fraction(0), False))
    status, _ = solve_inequalities(rows)
    if status != "feasible":
        return None
    fixed: list[Fraction] = []
    for j in range(n):
        low = minimum_of_coordinate(rows, j)
        value = Fraction(0) if low is None else max(low, Fraction(0))
        fixed.append(value)
        unit = [Fraction(0)] * n
        unit[j] = Fraction(1)
        rows.append((unit, -value, False))
        rows.append(([-c for c in unit], value, False))
    status, point = solve_inequalities(rows)
    if status != "feasible":
        raise InvariantViolation("lexmin fixing lost feasibility")
    return tuple(fixed)
