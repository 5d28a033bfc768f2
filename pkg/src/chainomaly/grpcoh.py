"""Exact finite group cohomology with circle-group coefficients.

Phases are exact rationals in [0,1) representing exp(2*pi*i*q), so cocycle
and coboundary identities are checked with integer arithmetic, never floats.
Cohomology groups are classified through the integer bar complex: a phase
n-cocycle is lifted to rationals, its integer coboundary is a degree-(n+1)
integer cocycle, and that cocycle is projected onto the invariant-factor
decomposition computed by exact column reduction and Smith normal form.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from .errors import (
    DegreeCap,
    EvaluatorDomain,
    InvariantViolation,
    MatrixCap,
    NotACocycle,
    SnapFailure,
    ValidationError,
)

DEFAULT_MAX_DEGREE = 3
DEFAULT_MATRIX_CAP = 16 ** 5  # bound on |G|^(n+2)


@dataclass(frozen=True)
class FiniteGroup:
    """Multiplication-table group; element 0 is the identity."""

    table: tuple[tuple[int, ...], ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        t = tuple(tuple(int(x) for x in row) for row in self.table)
        object.__setattr__(self, "table", t)
        n = len(t)
        if any(len(row) != n for row in t):
            raise ValidationError("multiplication table is not square")
        if any(not 0 <= x < n for row in t for x in row):
            raise ValidationError("table entries out of range")
        if any(t[0][a] != a or t[a][0] != a for a in range(n)):
            raise ValidationError("element 0 is not an identity")
        for a in range(n):
            if not any(t[a][b] == 0 for b in range(n)):
                raise ValidationError(f"element {a} has no inverse")
        for a in range(n):
            for b in range(n):
                tab = t[a][b]
                for c in range(n):
                    if t[tab][c] != t[a][t[b][c]]:
                        raise ValidationError(f"associativity fails at ({a},{b},{c})")
        if self.names is not None:
            nm = tuple(str(s) for s in self.names)
            if len(nm) != n:
                raise ValidationError("names length does not match order")
            object.__setattr__(self, "names", nm)
        inv = tuple(next(b for b in range(n) if t[a][b] == 0) for a in range(n))
        object.__setattr__(self, "_inv", inv)

    @property
    def order(self) -> int:
        return len(self.table)

    def mul(self, a: int, b: int) -> int:
        return self.table[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def elements(self) -> range:
        return range(self.order)

    def name(self, a: int) -> str:
        return self.names[a] if self.names else str(a)

    @classmethod
    def cyclic(cls, n: int, names: tuple[str, ...] | None = None) -> "FiniteGroup":
        if n < 1:
            raise ValidationError("cyclic group order must be >= 1")
        table = tuple(tuple((a + b) % n for b in range(n)) for a in range(n))
        return cls(table, names)

    @classmethod
    def trivial(cls) -> "FiniteGroup":
        return cls.cyclic(1)

    @classmethod
    def direct_product(cls, g1: "FiniteGroup", g2: "FiniteGroup") -> "FiniteGroup":
        n1, n2 = g1.order, g2.order

        def idx(a, b):
            return a * n2 + b

        table = tuple(
            tuple(
                idx(g1.mul(a1, b1), g2.mul(a2, b2))
                for b1 in range(n1)
                for b2 in range(n2)
            )
            for a1 in range(n1)
            for a2 in range(n2)
        )
        names = tuple(
            f"({g1.name(a1)},{g2.name(a2)})" for a1 in range(n1) for a2 in range(n2)
        )
        return cls(table, names)

    def relabeled(self, perm: tuple[int, ...]) -> "FiniteGroup":
        """Apply a permutation of labels fixing the identity."""
        if perm[0] != 0:
            raise ValidationError("relabeling must fix the identity")
        n = self.order
        inv = [0] * n
        for i, p in enumerate(perm):
            inv[p] = i
        table = tuple(
            tuple(perm[self.mul(inv[a], inv[b])] for b in range(n)) for a in range(n)
        )
        return FiniteGroup(table)


def _frac_mod1(q: Fraction) -> Fraction:
    return q - (q.numerator // q.denominator)


def _tuple_index(t: tuple[int, ...], n: int) -> int:
    i = 0
    for g in t:
        i = i * n + g
    return i


def _all_tuples(n: int, k: int):
    return itertools.product(range(n), repeat=k)


def _faces(group: FiniteGroup, t: tuple[int, ...]) -> list[tuple[int, ...]]:
    """Faces d_0..d_m of an m-tuple (inhomogeneous bar convention)."""
    m = len(t)
    out = [t[1:]]
    for i in range(1, m):
        out.append(t[: i - 1] + (group.mul(t[i - 1], t[i]),) + t[i + 1:])
    out.append(t[:-1])
    return out


@dataclass(frozen=True)
class PhaseCochain:
    """Map from G^degree to Q/Z, stored as exact fractions in [0,1)."""

    group: FiniteGroup
    degree: int
    values: tuple[Fraction, ...]

    def __post_init__(self):
        n = self.group.order
        if len(self.values) != n ** self.degree:
            raise ValidationError("cochain table has the wrong size")
        vals = tuple(_frac_mod1(Fraction(v)) for v in self.values)
        object.__setattr__(self, "values", vals)

    @classmethod
    def zero(cls, group: FiniteGroup, degree: int) -> "PhaseCochain":
        return cls(group, degree, (Fraction(0),) * group.order ** degree)

    @classmethod
    def from_function(cls, group: FiniteGroup, degree: int, fn) -> "PhaseCochain":
        n = group.order
        return cls(group, degree, tuple(fn(*t) for t in _all_tuples(n, degree)))

    def at(self, *t: int) -> Fraction:
        return self.values[_tuple_index(t, self.group.order)]

    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)

    def __add__(self, other: "PhaseCochain") -> "PhaseCochain":
        if (self.group, self.degree) != (other.group, other.degree):
            raise ValidationError("cochain mismatch")
        return PhaseCochain(
            self.group,
            self.degree,
            tuple(a + b for a, b in zip(self.values, other.values)),
        )

    def __neg__(self) -> "PhaseCochain":
        return PhaseCochain(self.group, self.degree, tuple(-v for v in self.values))

    def __sub__(self, other: "PhaseCochain") -> "PhaseCochain":
        return self + (-other)

    def format_lines(self) -> list[str]:
        """Dump format: one line "g1,...,gk → p/q" per tuple."""
        n = self.group.order
        out = []
        for t in _all_tuples(n, self.degree):
            v = self.values[_tuple_index(t, n)]
            key = ",".join(self.group.name(g) for g in t)
            out.append(f"{key} → {v.numerator}/{v.denominator}")
        return out


def coboundary(f: PhaseCochain, max_degree: int = DEFAULT_MAX_DEGREE) -> PhaseCochain:
    """Alternating-sum coboundary, one degree up, exact."""
    if f.degree > max_degree:
        raise DegreeCap(f"coboundary capped at degree {max_degree}")
    G = f.group
    n = G.order
    k = f.degree
    vals = []
    for t in _all_tuples(n, k + 1):
        acc = Fraction(0)
        for i, face in enumerate(_faces(G, t)):
            v = f.values[_tuple_index(face, n)]
            acc += v if i % 2 == 0 else -v
        vals.append(acc)
    return PhaseCochain(G, k + 1, tuple(vals))


def is_cocycle(f: PhaseCochain, max_degree: int = DEFAULT_MAX_DEGREE) -> bool:
    return coboundary(f, max_degree).is_zero()


def snap_fraction(turns: float, den_cap: int, tol: float = 1e-6) -> tuple[Fraction, float]:
    """Snap a phase given in turns (angle / 2 pi) to an exact rational with
    denominator at most den_cap. Returns (fraction in [0,1), snap error)."""
    x = float(turns) % 1.0
    q = Fraction(x).limit_denominator(den_cap)
    qn = _frac_mod1(q)
    err = min(abs(x - float(qn)), abs(x - float(qn) - 1.0), abs(x - float(qn) + 1.0))
    if err > tol:
        raise SnapFailure(
            f"no rational with denominator <= {den_cap} within {tol} of {x}"
        )
    return qn, err


# -- exact integer linear algebra --------------------------------------------

def _nearest_quotient(b: int, a: int) -> int:
    """Integer q minimizing |b - q*a| (a != 0)."""
    q, r = divmod(b, a)
    if 2 * abs(r) > abs(a):
        q += 1 if a > 0 else -1
    return q


def _column_echelon_sparse(cols: list[dict[int, int]]):
    """Column-reduce an integer matrix given as sparse columns.

    Returns (pivots, V, Vinv, kernel) where the original matrix A satisfies
    A @ V = reduced columns, V is unimodular (stored as list of columns) and
    Vinv is its inverse (stored as list of rows). Columns that end up empty
    span the kernel of A. Elimination uses nearest-quotient Euclidean steps
    only, which keeps the integers small on bar-resolution matrices.
    """
    nc = len(cols)
    V = [[1 if i == j else 0 for i in range(nc)] for j in range(nc)]
    Vinv = [[1 if i == j else 0 for i in range(nc)] for j in range(nc)]

    def axpy(src: int, dst: int, q: int):
        # col_dst += q * col_src; Vinv row_src -= q * row_dst
        if q == 0:
            return
        cd = cols[dst]
        for r, v in cols[src].items():
            w = cd.get(r, 0) + q * v
            if w:
                cd[r] = w
            else:
                cd.pop(r, None)
        vs, vd = V[src], V[dst]
        V[dst] = [b_ + q * a_ for a_, b_ in zip(vs, vd)]
        rs, rd = Vinv[src], Vinv[dst]
        Vinv[src] = [a_ - q * b_ for a_, b_ in zip(rs, rd)]

    active = [j for j in range(nc)]
    pivots = []
    while True:
        best = None
        for j in active:
            c = cols[j]
            if c:
                mr = min(c)
                if best is None or mr < best[0]:
                    best = (mr, j)
        if best is None:
            break
        row = best[0]
        js = [j for j in active if row in cols[j]]
        while len(js) > 1:
            js.sort(key=lambda j: abs(cols[j][row]))
            lead = js[0]
            a = cols[lead][row]
            nxt = [lead]
            for j in js[1:]:
                axpy(lead, j, -_nearest_quotient(cols[j].get(row, 0), a))
                if cols[j].get(row, 0):
                    nxt.append(j)
            js = nxt
        lead = js[0]
        if cols[lead][row] < 0:
            cols[lead] = {r: -v for r, v in cols[lead].items()}
            V[lead] = [-v for v in V[lead]]
            Vinv[lead] = [-v for v in Vinv[lead]]
        pivots.append((row, lead))
        active.remove(lead)
    kernel = [j for j in range(nc) if not cols[j]]
    return pivots, V, Vinv, kernel


def _smith_normal_form(mat: list[list[int]]):
    """Dense Smith normal form with transforms: P @ mat @ Q = diag(d),
    divisibility d[0] | d[1] | ... enforced, entries nonnegative. Elimination
    uses nearest-quotient reduction to keep coefficients small."""
    A = [row[:] for row in mat]
    m = len(A)
    n = len(A[0]) if m else 0
    P = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    Q = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_axpy(src, dst, q):
        if q:
            A[dst] = [a + q * b for a, b in zip(A[dst], A[src])]
            P[dst] = [a + q * b for a, b in zip(P[dst], P[src])]

    def col_axpy(src, dst, q):
        if q:
            for r in range(m):
                A[r][dst] += q * A[r][src]
            for r in range(n):
                Q[r][dst] += q * Q[r][src]

    def swap_rows(i, j):
        if i != j:
            A[i], A[j] = A[j], A[i]
            P[i], P[j] = P[j], P[i]

    def swap_cols(i, j):
        if i != j:
            for r in range(m):
                A[r][i], A[r][j] = A[r][j], A[r][i]
            for r in range(n):
                Q[r][i], Q[r][j] = Q[r][j], Q[r][i]

    def clear_below(k) -> bool:
        # returns True once A[i][k] = 0 for all i > k, pivoting at (k, k)
        while True:
            imin = None
            for i in range(k, m):
                if A[i][k] != 0 and (imin is None or abs(A[i][k]) < abs(A[imin][k])):
                    imin = i
            if imin is None:
                return True
            swap_rows(k, imin)
            a = A[k][k]
            done = True
            for i in range(k + 1, m):
                if A[i][k]:
                    row_axpy(k, i, -_nearest_quotient(A[i][k], a))
                    if A[i][k]:
                        done = False
            if done:
                return True

    def clear_right(k) -> bool:
        while True:
            jmin = None
            for j in range(k, n):
                if A[k][j] != 0 and (jmin is None or abs(A[k][j]) < abs(A[k][jmin])):
                    jmin = j
            if jmin is None:
                return True
            swap_cols(k, jmin)
            a = A[k][k]
            done = True
            for j in range(k + 1, n):
                if A[k][j]:
                    col_axpy(k, j, -_nearest_quotient(A[k][j], a))
                    if A[k][j]:
                        done = False
            if done:
                return True

    t = min(m, n)
    for k in range(t):
        if all(A[i][j] == 0 for i in range(k, m) for j in range(k, n)):
            break
        while True:
            clear_below(k)
            if all(A[k][j] == 0 for j in range(k + 1, n)):
                break
            clear_right(k)
            if all(A[i][k] == 0 for i in range(k + 1, m)):
                break
        if A[k][k] < 0:
            A[k] = [-v for v in A[k]]
            P[k] = [-v for v in P[k]]

    # enforce successive divisibility
    changed = True
    while changed:
        changed = False
        for i in range(t - 1):
            a = A[i][i]
            for j in range(i + 1, t):
                b = A[j][j]
                if b == 0 or a == 0:
                    continue
                if b % a != 0:
                    changed = True
                    col_axpy(j, i, 1)  # col i gets b at row j
                    while True:
                        clear_below(i)
                        if all(A[i][jj] == 0 for jj in range(i + 1, n)):
                            break
                        clear_right(i)
                        if all(A[ii][i] == 0 for ii in range(i + 1, m)):
                            break
                    if A[i][i] < 0:
                        A[i] = [-v for v in A[i]]
                        P[i] = [-v for v in P[i]]
                    if A[j][j] < 0:
                        A[j] = [-v for v in A[j]]
                        P[j] = [-v for v in P[j]]
    diag = [A[k][k] for k in range(t)]
    return diag, P, Q


def _coboundary_columns(group: FiniteGroup, k: int) -> list[dict[int, int]]:
    """Integer matrix of d: C^k(Z) -> C^(k+1)(Z), as sparse columns."""
    n = group.order
    cols: list[dict[int, int]] = [dict() for _ in range(n ** k)]
    for t in _all_tuples(n, k + 1):
        row = _tuple_index(t, n)
        for i, face in enumerate(_faces(group, t)):
            col = _tuple_index(face, n)
            sign = 1 if i % 2 == 0 else -1
            c = cols[col]
            w = c.get(row, 0) + sign
            if w:
                c[row] = w
            else:
                c.pop(row, None)
    return cols


@dataclass(frozen=True, eq=False)
class CohomologyGroup:
    """Invariant-factor presentation of H^degree(G, U(1)) with the exact
    transforms needed to project a cocycle onto class coordinates."""

    group: FiniteGroup
    degree: int
    invariant_factors: tuple[int, ...]
    generators: tuple[PhaseCochain, ...]
    _vinv_kernel: tuple[tuple[int, ...], ...] = field(repr=False)
    _proj_rows: tuple[tuple[int, ...], ...] = field(repr=False)
    _factor_positions: tuple[int, ...] = field(repr=False)

    @property
    def is_trivial(self) -> bool:
        return not self.invariant_factors

    def pretty(self) -> str:
        if self.is_trivial:
            return "trivial"
        return " ⊕ ".join(f"ℤ/{f}" for f in self.invariant_factors)


@dataclass(frozen=True)
class ClassCoords:
    """Residues modulo the invariant factors of a CohomologyGroup."""

    residues: tuple[int, ...]
    factors: tuple[int, ...]

    def __post_init__(self):
        if len(self.residues) != len(self.factors):
            raise ValidationError("coordinate length mismatch")
        object.__setattr__(
            self,
            "residues",
            tuple(r % f for r, f in zip(self.residues, self.factors)),
        )

    @property
    def is_trivial(self) -> bool:
        return all(r == 0 for r in self.residues)

    def __add__(self, other: "ClassCoords") -> "ClassCoords":
        if self.factors != other.factors:
            raise ValidationError("coordinates of different groups")
        return ClassCoords(
            tuple(a + b for a, b in zip(self.residues, other.residues)), self.factors
        )

    def __neg__(self) -> "ClassCoords":
        return ClassCoords(tuple(-r for r in self.residues), self.factors)


@lru_cache(maxsize=64)
def _cohomology_cached(group: FiniteGroup, degree: int) -> CohomologyGroup:
    n = group.order
    k = degree
    # kernel of the integer coboundary one level up (Bockstein target)
    a_cols = _coboundary_columns(group, k + 1)
    _, V, Vinv, kernel = _column_echelon_sparse(a_cols)
    r = len(kernel)
    vinv_k = [Vinv[j] for j in kernel]
    # image of the previous integer coboundary, in kernel coordinates
    b_cols = _coboundary_columns(group, k)
    M = []
    for i in range(r):
        row_i = vinv_k[i]
        M.append([sum(row_i[rr] * vv for rr, vv in col.items()) for col in b_cols])
    diag, P, Q = _smith_normal_form(M)
    if len([d for d in diag if d != 0]) != r:
        raise InvariantViolation("cohomology quotient is not finite")
    positions = [i for i, d in enumerate(diag) if d > 1]
    factors = tuple(diag[i] for i in positions)
    gens = []
    for i in positions:
        s = diag[i]
        vals = tuple(Fraction(Q[row][i], s) for row in range(n ** k))
        gens.append(PhaseCochain(group, k, vals))
    return CohomologyGroup(
        group=group,
        degree=degree,
        invariant_factors=factors,
        generators=tuple(gens),
        _vinv_kernel=tuple(tuple(row) for row in vinv_k),
        _proj_rows=tuple(tuple(P[i]) for i in range(r)),
        _factor_positions=tuple(positions),
    )


def cohomology(
    group: FiniteGroup,
    degree: int,
    matrix_cap: int = DEFAULT_MATRIX_CAP,
    warn_order: int = 8,
) -> CohomologyGroup:
    """H^degree(G, U(1)) as invariant factors plus classification data."""
    if degree < 1:
        raise ValidationError("degree must be >= 1")
    if group.order ** (degree + 2) > matrix_cap:
        raise MatrixCap(
            f"|G|^(degree+2) = {group.order ** (degree + 2)} exceeds cap {matrix_cap}"
        )
    if group.order > warn_order:
        warnings.warn(
            f"cohomology of a group of order {group.order} at degree {degree} "
            "may be slow",
            RuntimeWarning,
            stacklevel=2,
        )
    return _cohomology_cached(group, degree)


def class_of(f: PhaseCochain, H: CohomologyGroup) -> ClassCoords:
    """Exact class coordinates of a phase cocycle."""
    if f.group != H.group or f.degree != H.degree:
        raise ValidationError("cochain does not match the cohomology group")
    if not is_cocycle(f, max_degree=max(DEFAULT_MAX_DEGREE, f.degree)):
        raise NotACocycle("input is not a cocycle")
    G = f.group
    n = G.order
    k = f.degree
    # integer Bockstein: coboundary of the rational lift
    c = []
    for t in _all_tuples(n, k + 1):
        acc = Fraction(0)
        for i, face in enumerate(_faces(G, t)):
            v = f.values[_tuple_index(face, n)]
            acc += v if i % 2 == 0 else -v
        if acc.denominator != 1:
            raise InvariantViolation("Bockstein lift is not integral")
        c.append(acc.numerator)
    y = [sum(row[j] * c[j] for j in range(len(c)) if c[j]) for row in H._vinv_kernel]
    w = [sum(p * yy for p, yy in zip(prow, y)) for prow in H._proj_rows]
    residues = tuple(w[pos] for pos in H._factor_positions)
    return ClassCoords(residues, H.invariant_factors)


def slant_z(omega_eval, group0: FiniteGroup) -> PhaseCochain:
    """Contract a 3-cochain on G0 x Z against the generator of the Z factor.

    `omega_eval` takes three (g, n) pairs with n in {0, 1} and returns an
    exact Fraction phase. In additive notation the result is
    w(e,1; g,0; g',0) + w(g,0; g',0; e,1) - w(g,0; e,1; g',0).
    """
    e = 0

    def ev(*args):
        try:
            return Fraction(omega_eval(*args))
        except EvaluatorDomain:
            raise
        except KeyError as exc:
            raise EvaluatorDomain(f"evaluator undefined at {args}") from exc

    def fn(g, gp):
        return (
            ev((e, 1), (g, 0), (gp, 0))
            + ev((g, 0), (gp, 0), (e, 1))
            - ev((g, 0), (e, 1), (gp, 0))
        )

    return PhaseCochain.from_function(group0, 2, fn)
