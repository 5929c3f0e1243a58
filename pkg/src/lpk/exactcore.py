"""Exact rational and lattice arithmetic.

Everything here works over ``int`` and ``fractions.Fraction``; nothing is ever
rounded.  The module provides primitive vectors, small dense linear algebra,
Smith and Hermite normal forms, an exact two-phase simplex method and the
enumeration of lattice points in the fundamental parallelepiped of a cone.
"""
from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

Rat = Fraction
Vector = tuple[int, ...]
Matrix = list[list]

_RAT_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class DomainError(ValueError):
    """Raised when an operation is called outside its domain."""


def parse_rat(text) -> Fraction:
    """Parse ``"p/q"`` or ``"p"`` (or an int/Fraction) into a Fraction.

    Decimal notation is rejected on purpose: it would silently introduce
    binary or decimal rounding into an otherwise exact pipeline.
    """
    if isinstance(text, bool):
        raise DomainError(f"not a rational: {text!r}")
    if isinstance(text, (int, Fraction)):
        return Fraction(text)
    if not isinstance(text, str):
        raise DomainError(f"not a rational: {text!r}")
    m = _RAT_RE.match(text)
    if not m:
        raise DomainError(f"malformed rational {text!r} (use integers or p/q)")
    num = int(m.group(1))
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise DomainError(f"zero denominator in {text!r}")
    return Fraction(num, den)


def format_rat(x) -> str:
    """Inverse of :func:`parse_rat`; integers print without a denominator."""
    if x == math.inf:
        return "inf"
    if x == -math.inf:
        return "-inf"
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def primitive(v: Iterable[int]) -> Vector:
    """Return ``v`` divided by the gcd of its coordinates."""
    v = tuple(int(c) for c in v)
    g = math.gcd(*v) if v else 0
    if g == 0:
        raise DomainError("the zero vector has no primitive direction")
    return tuple(c // g for c in v)


def is_primitive(v: Sequence[int]) -> bool:
    return math.gcd(*v) == 1 if v else False


def gcd_of(v: Iterable[int]) -> int:
    return math.gcd(*v)


def lcm_of(values: Iterable[int]) -> int:
    out = 1
    for x in values:
        out = out * x // math.gcd(out, x)
    return out


def dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def matvec(M: Sequence[Sequence], v: Sequence) -> tuple:
    return tuple(sum(a * b for a, b in zip(row, v)) for row in M)


def matmul(A: Sequence[Sequence], B: Sequence[Sequence]) -> Matrix:
    cols = list(zip(*B))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in A]


def transpose(M: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*M)]


def identity(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def det(M: Sequence[Sequence]) -> Fraction | int:
    """Exact determinant; Bareiss elimination keeps integer input integral."""
    n = len(M)
    if n == 0:
        return 1
    if any(len(row) != n for row in M):
        raise DomainError("determinant of a non-square matrix")
    integral = all(isinstance(x, int) for row in M for x in row)
    A = [list(row) for row in M]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if A[i][k] != 0), None)
            if swap is None:
                return 0
            A[k], A[swap] = A[swap], A[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = A[i][j] * A[k][k] - A[i][k] * A[k][j]
                A[i][j] = num // prev if integral else num / prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def rref(M: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over the rationals, with pivot columns."""
    A = [[Fraction(x) for x in row] for row in M]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if A[i][c] != 0), None)
        if p is None:
            continue
        A[r], A[p] = A[p], A[r]
        inv = 1 / A[r][c]
        A[r] = [x * inv for x in A[r]]
        for i in range(rows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [x - f * y for x, y in zip(A[i], A[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return A, pivots


def rank(M: Sequence[Sequence]) -> int:
    if not M or not M[0]:
        return 0
    return len(rref(M)[1])


def solve(A: Sequence[Sequence], b: Sequence) -> tuple[Fraction, ...] | None:
    """One rational solution of ``A x = b`` (free variables set to 0), or None."""
    if not A:
        return None if any(x != 0 for x in b) else ()
    ncols = len(A[0])
    aug = [list(row) + [bi] for row, bi in zip(A, b)]
    R, piv = rref(aug)
    if ncols in piv:
        return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(piv):
        x[c] = R[i][ncols]
    return tuple(x)


def nullspace(A: Sequence[Sequence], ncols: int | None = None) -> list[tuple[Fraction, ...]]:
    """Rational basis of ``{x : A x = 0}``."""
    if not A:
        n = ncols or 0
        return [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n)]
    n = len(A[0])
    R, piv = rref(A)
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [Fraction(0)] * n
        x[f] = Fraction(1)
        for i, c in enumerate(piv):
            x[c] = -R[i][f]
        basis.append(tuple(x))
    return basis


def inverse(M: Sequence[Sequence]) -> Matrix:
    n = len(M)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(M)]
    R, piv = rref(aug)
    if piv[:n] != list(range(n)):
        raise DomainError("matrix is singular")
    return [row[n:] for row in R]


def adjugate(M: Sequence[Sequence[int]]) -> Matrix:
    """Integer adjugate, so that ``adj(M) @ M = det(M) * I``."""
    n = len(M)
    if n == 1:
        return [[1]]
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(M) if k != i]
            adj[j][i] = (-1) ** (i + j) * det(minor)
    return adj


# ---------------------------------------------------------------- normal forms

def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, D, V)`` with ``U @ M @ V == D``.

    ``U`` and ``V`` are unimodular and ``D`` is diagonal with non-negative
    entries, each dividing the next.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    A = [[int(x) for x in row] for row in M]
    U = identity(m)
    V = identity(n)

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for row in A:
            row[i], row[j] = row[j], row[i]
        for row in V:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, f):  # row dst += f * row src
        A[dst] = [a + f * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + f * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, f):  # col dst += f * col src
        for row in A:
            row[dst] += f * row[src]
        for row in V:
            row[dst] += f * row[src]

    for t in range(min(m, n)):
        while True:
            entries = [(abs(A[i][j]), i, j) for i in range(t, m) for j in range(t, n) if A[i][j] != 0]
            if not entries:
                return U, A, V
            _, pi, pj = min(entries)
            swap_rows(t, pi)
            swap_cols(t, pj)
            p = A[t][t]
            done = True
            for i in range(t + 1, m):
                if A[i][t]:
                    add_row(t, i, -(A[i][t] // p))
                    if A[i][t]:
                        done = False
            for j in range(t + 1, n):
                if A[t][j]:
                    add_col(t, j, -(A[t][j] // p))
                    if A[t][j]:
                        done = False
            if not done:
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if A[i][j] % p), None)
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
    return U, A, V


def invariant_factors(M: Sequence[Sequence[int]]) -> list[int]:
    _, D, _ = smith_normal_form(M)
    return [D[i][i] for i in range(min(len(D), len(D[0]) if D else 0)) if D[i][i] != 0]


def hermite_normal_form(M: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix]:
    """Row-style Hermite form: returns ``(H, U)`` with ``U @ M == H``.

    ``H`` is in row echelon form with positive pivots and entries above each
    pivot reduced into ``[0, pivot)``; zero rows come last.
    """
    m = len(M)
    n = len(M[0]) if m else 0
    A = [[int(x) for x in row] for row in M]
    U = identity(m)
    r = 0
    for c in range(n):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if A[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: (abs(A[i][c]), i))
            A[r], A[p] = A[p], A[r]
            U[r], U[p] = U[p], U[r]
            clean = True
            for i in range(r + 1, m):
                if A[i][c]:
                    q = A[i][c] // A[r][c]
                    A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                    U[i] = [a - q * b for a, b in zip(U[i], U[r])]
                    if A[i][c]:
                        clean = False
            if clean:
                break
        if A[r][c] == 0:
            continue
        if A[r][c] < 0:
            A[r] = [-x for x in A[r]]
            U[r] = [-x for x in U[r]]
        for i in range(r):
            q = A[i][c] // A[r][c]
            if q:
                A[i] = [a - q * b for a, b in zip(A[i], A[r])]
                U[i] = [a - q * b for a, b in zip(U[i], U[r])]
        r += 1
    return A, U


def saturation_basis(vectors: Sequence[Sequence[int]], n: int) -> tuple[Matrix, int]:
    """Unimodular ``U`` sending ``span(vectors) ∩ Z^n`` onto ``Z^k x 0``.

    Returns ``(U, k)``; the coordinates ``(U v)[k:]`` give the projection to
    the quotient lattice ``Z^n / (Z^n ∩ span)``.
    """
    if not vectors:
        return identity(n), 0
    cols = transpose(vectors)
    U, D, _ = smith_normal_form(cols)
    k = sum(1 for i in range(min(len(D), len(D[0]))) if D[i][i] != 0)
    return U, k


# ---------------------------------------------------------------- box points

def box_points(rays: Sequence[Sequence[int]], relative_interior: bool = True) -> list[Vector]:
    """Lattice points of the fundamental parallelepiped of a simplicial cone.

    With ``relative_interior`` the points are ``sum c_i u_i`` with every
    ``c_i`` in ``(0, 1]``; otherwise every ``c_i`` in ``[0, 1]`` and the origin
    is excluded.  The group ``Z^n ∩ span / sum Z u_i`` is enumerated through a
    Smith form of the generator matrix, so the work is proportional to the
    multiplicity.  Output is sorted.
    """
    rays = [tuple(int(x) for x in u) for u in rays]
    k = len(rays)
    if k == 0:
        return []
    n = len(rays[0])
    if rank(rays) != k:
        raise DomainError("box_points needs linearly independent generators")
    cols = transpose(rays)  # n x k
    _, D, V = smith_normal_form(cols)
    d = [D[i][i] for i in range(k)]
    # coordinates (in the generator basis) of the class generators Uinv e_i
    gens = []
    for i in range(k):
        if d[i] > 1:
            gens.append((d[i], [Fraction(V[j][i], d[i]) for j in range(k)]))
    points = set()
    for ks in itertools.product(*[range(di) for di, _ in gens]):
        coords = [Fraction(0)] * k
        for t, (_, g) in zip(ks, gens):
            if t:
                coords = [c + t * x for c, x in zip(coords, g)]
        frac = [c - math.floor(c) for c in coords]
        zero = [i for i, c in enumerate(frac) if c == 0]
        if relative_interior:
            variants = [[c if c != 0 else Fraction(1) for c in frac]]
        else:
            variants = []
            for mask in itertools.product((0, 1), repeat=len(zero)):
                f = list(frac)
                for i, bit in zip(zero, mask):
                    f[i] = Fraction(bit)
                if any(f):
                    variants.append(f)
        for f in variants:
            p = tuple(sum(f[i] * rays[i][j] for i in range(k)) for j in range(n))
            points.add(tuple(int(x) for x in p))
    return sorted(points)


def cone_multiplicity(rays: Sequence[Sequence[int]]) -> int:
    """Index of ``sum Z u_i`` in the saturated lattice of its span."""
    if not rays:
        return 1
    f = invariant_factors(transpose(rays))
    if len(f) != len(rays):
        raise DomainError("dependent rays")
    out = 1
    for x in f:
        out *= x
    return out


# ---------------------------------------------------------------- linear programming

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class LinearProgram:
    """``minimize c.x`` subject to ``A_ub x <= b_ub`` and ``A_eq x = b_eq``.

    ``nonneg`` is either one flag for all variables or one flag per variable;
    variables with a false flag are free.
    """
    objective: tuple
    A_ub: tuple = ()
    b_ub: tuple = ()
    A_eq: tuple = ()
    b_eq: tuple = ()
    nonneg: bool | tuple = True

    def __post_init__(self):
        n = len(self.objective)
        for row in list(self.A_ub) + list(self.A_eq):
            if len(row) != n:
                raise DomainError("constraint row length does not match objective")
        if len(self.A_ub) != len(self.b_ub) or len(self.A_eq) != len(self.b_eq):
            raise DomainError("constraint matrix and right-hand side disagree")
        if not isinstance(self.nonneg, bool) and len(self.nonneg) != n:
            raise DomainError("nonneg flags do not match variable count")

    def flags(self) -> tuple[bool, ...]:
        if isinstance(self.nonneg, bool):
            return (self.nonneg,) * len(self.objective)
        return tuple(self.nonneg)


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Fraction | None = None
    x: tuple[Fraction, ...] | None = None
    active: tuple[int, ...] = ()

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.T = [list(r) + [b] for r, b in zip(rows, rhs)]
        self.basis = list(basis)
        self.ncols = len(rows[0]) if rows else 0

    def pivot(self, r, c, obj):
        T = self.T
        pr = T[r]
        inv = 1 / pr[c]
        pr = [x * inv for x in pr]
        T[r] = pr
        for i, row in enumerate(T):
            if i != r and row[c] != 0:
                f = row[c]
                T[i] = [a - f * b for a, b in zip(row, pr)]
        if obj[c] != 0:
            f = obj[c]
            obj[:] = [a - f * b for a, b in zip(obj, pr)]
        self.basis[r] = c

    def objective_row(self, cost):
        obj = [Fraction(x) for x in cost] + [Fraction(0)]
        for i, b in enumerate(self.basis):
            cb = obj[b]
            if cb != 0:
                obj = [a - cb * x for a, x in zip(obj, self.T[i])]
        return obj

    def run(self, obj, allowed) -> bool:
        """Bland's rule; returns False if the objective is unbounded."""
        while True:
            enter = next((j for j in allowed if obj[j] < 0), None)
            if enter is None:
                return True
            best = None
            for i, row in enumerate(self.T):
                a = row[enter]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return False
            self.pivot(best[1], enter, obj)

    def values(self, ncols):
        x = [Fraction(0)] * ncols
        for i, b in enumerate(self.basis):
            if b < ncols:
                x[b] = self.T[i][-1]
        return x


def lp_solve(prog: LinearProgram) -> LPResult:
    """Exact two-phase simplex with Bland's rule.

    Ties between optimal vertices are broken deterministically: among the
    optimal solutions the last variable is minimized first, then the one
    before it, and so on.  Directions along which such a secondary
    minimization is unbounded are skipped.
    """
    n = len(prog.objective)
    flags = prog.flags()
    # column layout: for every variable a "+" column, plus a "-" column for free ones
    colmap: list[tuple[int, int]] = []
    for j in range(n):
        colmap.append((j, 1))
        if not flags[j]:
            colmap.append((j, -1))
    nstruct = len(colmap)
    m_ub = len(prog.A_ub)
    m_eq = len(prog.A_eq)
    ncols = nstruct + m_ub
    rows, rhs = [], []
    for i, (row, b) in enumerate(zip(prog.A_ub, prog.b_ub)):
        r = [Fraction(row[j]) * s for j, s in colmap] + [Fraction(int(k == i)) for k in range(m_ub)]
        rows.append(r)
        rhs.append(Fraction(b))
    for row, b in zip(prog.A_eq, prog.b_eq):
        rows.append([Fraction(row[j]) * s for j, s in colmap] + [Fraction(0)] * m_ub)
        rhs.append(Fraction(b))
    m = len(rows)
    for i in range(m):
        if rhs[i] < 0:
            rows[i] = [-x for x in rows[i]]
            rhs[i] = -rhs[i]
    # artificials
    full = [r + [Fraction(int(k == i)) for k in range(m)] for i, r in enumerate(rows)]
    tab = _Tableau(full, rhs, [ncols + i for i in range(m)]) if m else None

    def finish(x_cols):
        x = [Fraction(0)] * n
        for c, (j, s) in enumerate(colmap):
            x[j] += s * x_cols[c]
        value = sum(Fraction(cj) * xj for cj, xj in zip(prog.objective, x))
        active = tuple(
            i for i, (row, b) in enumerate(zip(prog.A_ub, prog.b_ub))
            if sum(Fraction(a) * xj for a, xj in zip(row, x)) == Fraction(b)
        )
        return LPResult(OPTIMAL, value, tuple(x), active)

    cost = [Fraction(prog.objective[j]) * s for j, s in colmap] + [Fraction(0)] * m_ub
    if m == 0:
        # no constraints: bounded iff every column has non-negative cost
        if any(c < 0 for c in cost):
            return LPResult(UNBOUNDED)
        return finish([Fraction(0)] * ncols)

    phase1 = [Fraction(0)] * ncols + [Fraction(1)] * m
    obj = tab.objective_row(phase1)
    tab.run(obj, range(ncols + m))
    if -obj[-1] > 0:
        return LPResult(INFEASIBLE)
    # drive artificials out of the basis
    i = 0
    while i < len(tab.T):
        if tab.basis[i] >= ncols:
            c = next((j for j in range(ncols) if tab.T[i][j] != 0), None)
            if c is None:
                del tab.T[i]
                del tab.basis[i]
                continue
            tab.pivot(i, c, obj)
        i += 1
    for row in tab.T:
        del row[ncols:ncols + m]
    allowed = list(range(ncols))
    obj = tab.objective_row(cost)
    if not tab.run(obj, allowed):
        return LPResult(UNBOUNDED)
    basic = set(tab.basis)
    nonbasic = [j for j in allowed if j not in basic]
    if all(obj[j] > 0 for j in nonbasic):
        return finish(tab.values(ncols))
    allowed = [j for j in allowed if obj[j] == 0 or j in basic]
    for var in reversed(range(n)):
        sec = [Fraction(0)] * ncols
        for c, (j, s) in enumerate(colmap):
            if j == var:
                sec[c] = Fraction(s)
        sobj = tab.objective_row(sec)
        if tab.run(sobj, allowed):
            basic = set(tab.basis)
            allowed = [j for j in allowed if sobj[j] == 0 or j in basic]
    return finish(tab.values(ncols))
