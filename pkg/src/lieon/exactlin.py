"""Exact rational linear algebra: matrices, kernels, canonical subspaces.

Everything is computed over Fraction, so equality tests are exact.  Subspaces
are stored through their unique reduced row echelon basis, which makes
subspace equality a plain tuple comparison and keeps every downstream
construction reproducible byte for byte.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatchError, InputError

Scalar = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(value) -> Fraction:
    """Coerce ints, Fractions and strings like '-3/7' to an exact rational."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational literal {value!r}") from exc
    raise InputError(f"cannot interpret {value!r} as a rational")


def rat_str(value: Fraction) -> str:
    """Canonical text form: 'p' for integers, 'p/q' otherwise, q > 0."""
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def vec(values) -> tuple:
    return tuple(rat(v) for v in values)


def vec_add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def vec_sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def vec_scale(c, u):
    return tuple(c * a for a in u)


def vec_is_zero(u) -> bool:
    return all(a == 0 for a in u)


def unit_vector(n: int, i: int) -> tuple:
    return tuple(ONE if j == i else ZERO for j in range(n))


def _rref(rows):
    """Reduced row echelon form of a list of tuples; returns (rows, pivots)."""
    rows = [list(r) for r in rows]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][c] != 0:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = ONE / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    nonzero = [tuple(row) for row in rows[:r]]
    return nonzero, pivots


class Matrix:
    """Immutable dense matrix over exact rationals."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        entries = tuple(tuple(rat(x) for x in row) for row in entries)
        self.entries = entries
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        if any(len(row) != self.cols for row in entries):
            raise DimensionMismatchError("ragged matrix rows")

    @classmethod
    def zero(cls, rows: int, cols: int) -> "Matrix":
        return cls([[ZERO] * cols for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def from_columns(cls, columns) -> "Matrix":
        return cls(list(zip(*columns))) if columns else cls([])

    def __eq__(self, other):
        return isinstance(other, Matrix) and self.entries == other.entries

    def __hash__(self):
        return hash(self.entries)

    def __repr__(self):
        body = "; ".join(" ".join(rat_str(x) for x in row) for row in self.entries)
        return f"Matrix[{body}]"

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i):
        return self.entries[i]

    def column(self, j):
        return tuple(row[j] for row in self.entries)

    def __add__(self, other):
        self._check_shape(other)
        return Matrix([vec_add(a, b) for a, b in zip(self.entries, other.entries)])

    def __sub__(self, other):
        self._check_shape(other)
        return Matrix([vec_sub(a, b) for a, b in zip(self.entries, other.entries)])

    def __neg__(self):
        return Matrix([vec_scale(-ONE, r) for r in self.entries])

    def scale(self, c) -> "Matrix":
        c = rat(c)
        return Matrix([vec_scale(c, r) for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, Matrix):
            if self.cols != other.rows:
                raise DimensionMismatchError(
                    f"cannot multiply {self.rows}x{self.cols} by {other.rows}x{other.cols}"
                )
            cols = list(zip(*other.entries))
            return Matrix(
                [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in self.entries]
            )
        return self.scale(other)

    def _check_shape(self, other):
        if self.rows != other.rows or self.cols != other.cols:
            raise DimensionMismatchError("matrix shape mismatch")

    def transpose(self) -> "Matrix":
        return Matrix(list(zip(*self.entries))) if self.rows else Matrix([])

    def trace(self) -> Fraction:
        if self.rows != self.cols:
            raise DimensionMismatchError("trace of a non-square matrix")
        return sum((self.entries[i][i] for i in range(self.rows)), ZERO)

    def apply(self, v):
        """Matrix-vector product, v given as a coordinate tuple."""
        if len(v) != self.cols:
            raise DimensionMismatchError("vector length does not match matrix columns")
        return tuple(sum(a * b for a, b in zip(row, v)) for row in self.entries)

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.entries for x in row)

    def rref(self):
        rows, pivots = _rref(self.entries)
        return rows, pivots

    def rank(self) -> int:
        return len(self.rref()[1])

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise DimensionMismatchError("inverse of a non-square matrix")
        n = self.rows
        aug = [list(self.entries[i]) + list(unit_vector(n, i)) for i in range(n)]
        rows, pivots = _rref(aug)
        if pivots[:n] != list(range(n)):
            raise DimensionMismatchError("matrix is singular")
        return Matrix([row[n:] for row in rows])

    def commutator(self, other: "Matrix") -> "Matrix":
        return self * other - other * self


def matrix_power_poly(m: Matrix, coeffs) -> Matrix:
    """p(M) for p(t) = coeffs[0] + coeffs[1] t + ... (ascending order)."""
    if m.rows != m.cols:
        raise DimensionMismatchError("polynomial of a non-square matrix")
    result = Matrix.zero(m.rows, m.cols)
    power = Matrix.identity(m.rows)
    for c in coeffs:
        c = rat(c)
        if c != 0:
            result = result + power.scale(c)
        power = power * m
    return result


@dataclass(frozen=True)
class Subspace:
    """A subspace of k^ambient_dim stored via its unique RREF basis.

    Equality of Subspace values is equality of subspaces, because the RREF
    representative of a row space is unique.
    """

    ambient_dim: int
    basis: Matrix  # rows = basis vectors, in reduced row echelon form

    @classmethod
    def from_spanning(cls, vectors, ambient_dim: int) -> "Subspace":
        vectors = [vec(v) for v in vectors]
        for v in vectors:
            if len(v) != ambient_dim:
                raise DimensionMismatchError("spanning vector of wrong length")
        rows, _ = _rref(vectors)
        return cls(ambient_dim, Matrix(rows) if rows else Matrix.zero(0, ambient_dim))

    @classmethod
    def zero(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, Matrix.zero(0, ambient_dim))

    @classmethod
    def full(cls, ambient_dim: int) -> "Subspace":
        return cls(ambient_dim, Matrix.identity(ambient_dim))

    @property
    def dim(self) -> int:
        return self.basis.rows

    def vectors(self):
        return list(self.basis.entries)

    def pivots(self):
        return self.basis.rref()[1]

    def contains_vector(self, v) -> bool:
        return express_in_rows(self.basis, vec(v)) is not None

    def contains(self, other: "Subspace") -> bool:
        return all(self.contains_vector(v) for v in other.vectors())

    def __le__(self, other):
        return other.contains(self)


def express_in_rows(basis: Matrix, v):
    """Coefficients c with c . basis = v, or None if v is outside the row space."""
    if basis.rows == 0:
        return () if vec_is_zero(v) else None
    aug = [list(basis.column(j)) + [v[j]] for j in range(basis.cols)]
    rows, pivots = _rref(aug)
    k = basis.rows
    if k in pivots:
        return None
    coeffs = [ZERO] * k
    for r, c in enumerate(pivots):
        coeffs[c] = rows[r][k]
    return tuple(coeffs)


def kernel(m: Matrix) -> Subspace:
    """{v : Mv = 0} as a canonical subspace of the column domain."""
    rows, pivots = m.rref()
    n = m.cols
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * n
        v[f] = ONE
        for r, p in enumerate(pivots):
            v[p] = -rows[r][f]
        basis.append(tuple(v))
    return Subspace.from_spanning(basis, n)


def poly_kernel(m: Matrix, coeffs) -> Subspace:
    """kernel(p(M)); p is never factored, so no field extensions are needed."""
    return kernel(matrix_power_poly(m, coeffs))


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    _check_ambient(u, v)
    return Subspace.from_spanning(u.vectors() + v.vectors(), u.ambient_dim)


def subspace_intersect(u: Subspace, v: Subspace) -> Subspace:
    """U cap V via the kernel of the stacked coefficient map."""
    _check_ambient(u, v)
    du, dv = u.dim, v.dim
    if du == 0 or dv == 0:
        return Subspace.zero(u.ambient_dim)
    # columns: coefficients (a, b); rows: ambient coordinates of a.U - b.V
    m = Matrix(
        [
            [u.basis[(i, j)] for i in range(du)] + [-v.basis[(i, j)] for i in range(dv)]
            for j in range(u.ambient_dim)
        ]
    )
    sols = kernel(m)
    vectors = []
    for s in sols.vectors():
        a = s[:du]
        combo = [ZERO] * u.ambient_dim
        for c, row in zip(a, u.basis.entries):
            combo = [x + c * y for x, y in zip(combo, row)]
        vectors.append(tuple(combo))
    return Subspace.from_spanning(vectors, u.ambient_dim)


def subspace_complement(u: Subspace) -> Subspace:
    """Deterministic coordinate complement: standard vectors off the pivot set."""
    pivots = set(u.pivots())
    n = u.ambient_dim
    return Subspace.from_spanning(
        [unit_vector(n, i) for i in range(n) if i not in pivots], n
    )


def _check_ambient(u: Subspace, v: Subspace):
    if u.ambient_dim != v.ambient_dim:
        raise DimensionMismatchError(
            f"ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}"
        )
