"""Structure-constant Lie algebra kernel.

A bracket table is stored sparsely, keyed by ordered index pairs i < j
(0-based internally, 1-based in JSON).  Antisymmetry is therefore structural
and never checked at runtime.  Validation against the Jacobi identity is an
explicit step: sums of Lie structures may fail it, and deciding when they do
is the whole point of the package.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    ClosureError,
    DimensionMismatchError,
    InputError,
    JacobiError,
)
from .exactlin import (
    Matrix,
    Subspace,
    ZERO,
    express_in_rows,
    kernel,
    rat,
    rat_str,
    subspace_complement,
    subspace_sum,
    unit_vector,
    vec,
    vec_is_zero,
)


def _clean(vector_map):
    return {k: c for k, c in vector_map.items() if c != 0}


class StructureConstants:
    """Sparse antisymmetric bracket tensor c_ij^k on a fixed basis."""

    __slots__ = ("dim", "entries", "labels")

    def __init__(self, dim, entries=None, labels=None):
        self.dim = dim
        table = {}
        if entries:
            for (i, j), out in entries.items():
                if not (0 <= i < dim and 0 <= j < dim):
                    raise DimensionMismatchError(f"bracket index ({i},{j}) out of range")
                if i == j:
                    continue
                sign = 1
                if i > j:
                    i, j, sign = j, i, -1
                acc = table.setdefault((i, j), {})
                for k, c in out.items():
                    if not 0 <= k < dim:
                        raise DimensionMismatchError(f"output index {k} out of range")
                    acc[k] = acc.get(k, ZERO) + sign * rat(c)
        self.entries = {key: _clean(out) for key, out in table.items()}
        self.entries = {key: out for key, out in self.entries.items() if out}
        self.labels = tuple(labels) if labels else None

    @classmethod
    def zero(cls, dim, labels=None):
        return cls(dim, {}, labels)

    @classmethod
    def from_brackets(cls, dim, brackets, labels=None):
        """brackets: iterable of (i, j, {k: coeff}) with arbitrary index order."""
        entries = {}
        for i, j, out in brackets:
            acc = entries.setdefault((i, j), {})
            for k, c in out.items():
                acc[k] = acc.get(k, ZERO) + rat(c)
        return cls(dim, entries, labels)

    def bracket(self, i, j):
        """[e_i, e_j] as a sparse {k: coeff} map."""
        if i == j:
            return {}
        if i < j:
            return dict(self.entries.get((i, j), {}))
        return {k: -c for k, c in self.entries.get((j, i), {}).items()}

    def bracket_vectors(self, u, v):
        """Bilinear extension of the bracket to coordinate tuples."""
        out = {}
        for i, a in enumerate(u):
            if a == 0:
                continue
            for j, b in enumerate(v):
                if b == 0 or i == j:
                    continue
                for k, c in self.bracket(i, j).items():
                    out[k] = out.get(k, ZERO) + a * b * c
        return _clean(out)

    def bracket_vector_tuple(self, u, v):
        out = self.bracket_vectors(u, v)
        return tuple(out.get(k, ZERO) for k in range(self.dim))

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, StructureConstants)
            and self.dim == other.dim
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash(
            (self.dim, tuple(sorted((k, tuple(sorted(v.items()))) for k, v in self.entries.items())))
        )

    def __repr__(self):
        parts = []
        for (i, j), out in sorted(self.entries.items()):
            terms = " + ".join(f"{rat_str(c)}*e{k + 1}" for k, c in sorted(out.items()))
            parts.append(f"[e{i + 1},e{j + 1}]={terms}")
        return f"SC(dim={self.dim}, {'; '.join(parts) or 'abelian'})"

    def scale(self, c):
        c = rat(c)
        if c == 0:
            return StructureConstants.zero(self.dim, self.labels)
        return StructureConstants(
            self.dim,
            {key: {k: c * x for k, x in out.items()} for key, out in self.entries.items()},
            self.labels,
        )

    def __add__(self, other):
        return add(self, other)


def add(a: StructureConstants, b: StructureConstants) -> StructureConstants:
    """Entrywise sum of bracket tables.  The result is not auto-validated."""
    if a.dim != b.dim:
        raise DimensionMismatchError("cannot add brackets on different dimensions")
    entries = {k: dict(v) for k, v in a.entries.items()}
    for key, out in b.entries.items():
        acc = entries.setdefault(key, {})
        for k, c in out.items():
            acc[k] = acc.get(k, ZERO) + c
    return StructureConstants(a.dim, entries, a.labels)


class Jacobiator:
    """Rank-3 antisymmetric tensor J(e_i,e_j,e_k), stored on triples i<j<k."""

    __slots__ = ("dim", "entries")

    def __init__(self, dim, entries):
        self.dim = dim
        self.entries = {t: out for t, out in entries.items() if out}

    def is_zero(self):
        return not self.entries

    def __getitem__(self, triple):
        out = self.entries.get(tuple(triple), {})
        return tuple(out.get(k, ZERO) for k in range(self.dim))

    def nonzero_triples(self):
        return sorted(self.entries)


def jacobiator(sc: StructureConstants) -> Jacobiator:
    """J(x,y,z) = [[x,y],z] + [[z,x],y] + [[y,z],x] on all basis triples i<j<k."""
    entries = {}
    n = sc.dim
    pair_keys = sorted(sc.entries)
    touched = sorted({i for key in pair_keys for i in key})
    for a in range(len(touched)):
        for b in range(a + 1, len(touched)):
            for c in range(b + 1, len(touched)):
                i, j, k = touched[a], touched[b], touched[c]
                acc = {}
                for (u, v), w in (((i, j), k), ((k, i), j), ((j, k), i)):
                    inner = sc.bracket(u, v)
                    for m, cm in inner.items():
                        for p, cp in sc.bracket(m, w).items():
                            acc[p] = acc.get(p, ZERO) + cm * cp
                acc = _clean(acc)
                if acc:
                    entries[(i, j, k)] = acc
    return Jacobiator(n, entries)


@dataclass(frozen=True)
class LieAlgebra:
    """A Jacobi-validated bracket table."""

    sc: StructureConstants

    @classmethod
    def validate(cls, sc: StructureConstants) -> "LieAlgebra":
        jac = jacobiator(sc)
        if not jac.is_zero():
            triple = jac.nonzero_triples()[0]
            raise JacobiError(
                f"Jacobi identity fails on basis triple {tuple(t + 1 for t in triple)}"
            )
        return cls(sc)

    @property
    def dim(self):
        return self.sc.dim

    def __eq__(self, other):
        return isinstance(other, LieAlgebra) and self.sc == other.sc

    def __hash__(self):
        return hash(self.sc)


def is_lie(sc: StructureConstants) -> bool:
    return jacobiator(sc).is_zero()


def compatible(a: LieAlgebra, b: LieAlgebra) -> bool:
    """True iff the sum of the two brackets is again a Lie bracket."""
    if a.dim != b.dim:
        raise DimensionMismatchError("compatibility needs equal dimensions")
    return jacobiator(add(a.sc, b.sc)).is_zero()


def mutually_compatible(algebras) -> bool:
    algebras = list(algebras)
    for i in range(len(algebras)):
        for j in range(i + 1, len(algebras)):
            if not compatible(algebras[i], algebras[j]):
                return False
    return True


# ---------------------------------------------------------------------------
# classical invariants
# ---------------------------------------------------------------------------

def ad(g: LieAlgebra, v) -> Matrix:
    """Matrix of x -> [v, x]."""
    v = vec(v)
    n = g.dim
    cols = []
    for j in range(n):
        img = g.sc.bracket_vectors(v, unit_vector(n, j))
        cols.append(tuple(img.get(k, ZERO) for k in range(n)))
    return Matrix.from_columns(cols) if cols else Matrix([])


def center(g: LieAlgebra) -> Subspace:
    n = g.dim
    rows = []
    for j in range(n):
        for k in range(n):
            rows.append(tuple(g.sc.bracket(i, j).get(k, ZERO) for i in range(n)))
    return kernel(Matrix(rows)) if rows else Subspace.full(n)


def bracket_subspaces(g: LieAlgebra, u: Subspace, v: Subspace) -> Subspace:
    vectors = []
    for a in u.vectors():
        for b in v.vectors():
            vectors.append(g.sc.bracket_vector_tuple(a, b))
    return Subspace.from_spanning(vectors, g.dim)


def derived(g: LieAlgebra) -> Subspace:
    full = Subspace.full(g.dim)
    return bracket_subspaces(g, full, full)


def derived_series(g: LieAlgebra):
    series = [Subspace.full(g.dim)]
    while True:
        nxt = bracket_subspaces(g, series[-1], series[-1])
        if nxt == series[-1]:
            break
        series.append(nxt)
        if nxt.dim == 0:
            break
    return series


def lower_central_series(g: LieAlgebra):
    series = [Subspace.full(g.dim)]
    while True:
        nxt = bracket_subspaces(g, Subspace.full(g.dim), series[-1])
        if nxt == series[-1]:
            break
        series.append(nxt)
        if nxt.dim == 0:
            break
    return series


def is_solvable(g: LieAlgebra) -> bool:
    return derived_series(g)[-1].dim == 0


def is_nilpotent(g: LieAlgebra) -> bool:
    return lower_central_series(g)[-1].dim == 0


def killing_form(g: LieAlgebra) -> Matrix:
    """K(x,y) = tr(ad x . ad y) on the basis."""
    n = g.dim
    ads = [ad(g, unit_vector(n, i)) for i in range(n)]
    return Matrix([[(ads[i] * ads[j]).trace() for j in range(n)] for i in range(n)])


def radical(g: LieAlgebra) -> Subspace:
    """Cartan criterion: {x : K(x, d) = 0 for all d in the derived algebra}."""
    k = killing_form(g)
    d = derived(g)
    if d.dim == 0:
        return Subspace.full(g.dim)
    rows = [k.apply(v) for v in d.vectors()]
    return kernel(Matrix(rows))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def direct_sum(a: LieAlgebra, b: LieAlgebra) -> LieAlgebra:
    n, m = a.dim, b.dim
    entries = {k: dict(v) for k, v in a.sc.entries.items()}
    for (i, j), out in b.sc.entries.items():
        entries[(i + n, j + n)] = {k + n: c for k, c in out.items()}
    return LieAlgebra(StructureConstants(n + m, entries))


def abelian(n: int) -> LieAlgebra:
    return LieAlgebra(StructureConstants.zero(n))


def dyon2() -> LieAlgebra:
    """The non-abelian 2-dimensional algebra: [e1, e2] = e2."""
    return LieAlgebra(StructureConstants(2, {(0, 1): {1: 1}}))


def heisenberg3() -> LieAlgebra:
    """The 3-dimensional Heisenberg algebra: [e1, e2] = e3."""
    return LieAlgebra(StructureConstants(3, {(0, 1): {2: 1}}))


def dyon_n(n: int) -> LieAlgebra:
    return direct_sum(dyon2(), abelian(n - 2)) if n > 2 else dyon2()


def triadon_n(n: int) -> LieAlgebra:
    return direct_sum(heisenberg3(), abelian(n - 3)) if n > 3 else heisenberg3()


@dataclass(frozen=True)
class Representation:
    """Matrices rho(e_i) of a representation of `algebra` on k^space_dim."""

    algebra: LieAlgebra
    space_dim: int
    matrices: tuple

    @classmethod
    def validate(cls, algebra: LieAlgebra, matrices) -> "Representation":
        matrices = tuple(matrices)
        if len(matrices) != algebra.dim:
            raise DimensionMismatchError("need one matrix per basis vector")
        m = matrices[0].rows if matrices else 0
        for mat in matrices:
            if mat.rows != m or mat.cols != m:
                raise DimensionMismatchError("representation matrices must be square and equal-sized")
        for i in range(algebra.dim):
            for j in range(i + 1, algebra.dim):
                lhs = Matrix.zero(m, m)
                for k, c in algebra.sc.bracket(i, j).items():
                    lhs = lhs + matrices[k].scale(c)
                if lhs != matrices[i].commutator(matrices[j]):
                    raise ClosureError(f"rho is not a representation on pair ({i + 1},{j + 1})")
        return cls(algebra, m, matrices)

    def of_vector(self, v) -> Matrix:
        out = Matrix.zero(self.space_dim, self.space_dim)
        for c, mat in zip(v, self.matrices):
            if c != 0:
                out = out + mat.scale(c)
        return out


def semidirect(g0: LieAlgebra, rho: Representation) -> LieAlgebra:
    """g0 acting on an abelian space: basis = g0 basis then module basis."""
    n, m = g0.dim, rho.space_dim
    entries = {k: dict(v) for k, v in g0.sc.entries.items()}
    for i in range(n):
        mat = rho.matrices[i]
        for j in range(m):
            col = mat.column(j)
            out = {n + k: c for k, c in enumerate(col) if c != 0}
            if out:
                entries[(i, n + j)] = out
    return LieAlgebra(StructureConstants(n + m, entries))


def gamma_A(a: Matrix) -> LieAlgebra:
    """Gamma_A: one generator acting on an abelian space by [e_1, v] = Av."""
    if a.rows != a.cols:
        raise DimensionMismatchError("Gamma_A needs a square matrix")
    m = a.cols
    entries = {}
    for j in range(m):
        col = a.column(j)
        out = {1 + k: c for k, c in enumerate(col) if c != 0}
        if out:
            entries[(0, 1 + j)] = out
    return LieAlgebra(StructureConstants(1 + m, entries))


def quotient(g: LieAlgebra, ideal: Subspace) -> LieAlgebra:
    """Quotient algebra on the deterministic coordinate transversal of `ideal`."""
    if ideal.ambient_dim != g.dim:
        raise DimensionMismatchError("ideal lives on a different space")
    full = Subspace.full(g.dim)
    if not ideal.contains(bracket_subspaces(g, full, ideal)):
        raise ClosureError("subspace is not an ideal")
    transversal = subspace_complement(ideal)
    basis = ideal.vectors() + transversal.vectors()
    basis_m = Matrix(basis) if basis else Matrix.zero(0, g.dim)
    d = ideal.dim
    q = transversal.dim
    entries = {}
    for a in range(q):
        for b in range(a + 1, q):
            w = g.sc.bracket_vector_tuple(transversal.vectors()[a], transversal.vectors()[b])
            coeffs = express_in_rows(basis_m, w)
            if coeffs is None:
                raise ClosureError("bracket escapes span; inconsistent input")
            out = {k: coeffs[d + k] for k in range(q) if coeffs[d + k] != 0}
            if out:
                entries[(a, b)] = out
    return LieAlgebra.validate(StructureConstants(q, entries))


def restrict(g: LieAlgebra, subalg: Subspace) -> LieAlgebra:
    """The bracket table of a subalgebra on its RREF basis."""
    if subalg.ambient_dim != g.dim:
        raise DimensionMismatchError("subspace lives on a different space")
    vectors = subalg.vectors()
    entries = {}
    for a in range(len(vectors)):
        for b in range(a + 1, len(vectors)):
            w = g.sc.bracket_vector_tuple(vectors[a], vectors[b])
            coeffs = express_in_rows(subalg.basis, w)
            if coeffs is None:
                raise ClosureError("subspace is not closed under the bracket")
            out = {k: c for k, c in enumerate(coeffs) if c != 0}
            if out:
                entries[(a, b)] = out
    return LieAlgebra.validate(StructureConstants(len(vectors), entries))


def change_of_basis(g: LieAlgebra, t: Matrix) -> LieAlgebra:
    """Structure constants in the new basis b_i = sum_j t[i][j] e_j."""
    if t.rows != g.dim or t.cols != g.dim:
        raise DimensionMismatchError("basis matrix must be square of the algebra dimension")
    entries = {}
    for i in range(g.dim):
        for j in range(i + 1, g.dim):
            w = g.sc.bracket_vector_tuple(t.row(i), t.row(j))
            coeffs = express_in_rows(t, w)
            if coeffs is None:
                raise ClosureError("basis matrix is singular")
            out = {k: c for k, c in enumerate(coeffs) if c != 0}
            if out:
                entries[(i, j)] = out
    return LieAlgebra(StructureConstants(g.dim, entries))


# ---------------------------------------------------------------------------
# lieon classification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LieonSpec:
    """A dyon or triadon given by its center, its derived line and a scale.

    The scale is reported relative to the canonical coordinate transversal
    and is therefore basis-dependent; the pair (center, line) alone fixes the
    structure up to that factor.
    """

    kind: str  # "dyon" | "triadon"
    ambient_dim: int
    center: Subspace
    line: Subspace
    scale: Fraction

    def __post_init__(self):
        if self.kind not in ("dyon", "triadon"):
            raise InputError(f"unknown lieon kind {self.kind!r}")
        if self.center.dim != self.ambient_dim - 2 or self.line.dim != 1:
            raise DimensionMismatchError("lieon spec has wrong center/line dimensions")
        inside = self.center.contains(self.line)
        if self.kind == "triadon" and not inside:
            raise InputError("triadon line must lie inside the center")
        if self.kind == "dyon" and inside:
            raise InputError("dyon line must be transversal to the center")
        if self.scale == 0:
            raise InputError("lieon scale must be nonzero")


def lieon_structure(spec: LieonSpec) -> LieAlgebra:
    """Structure constants of the lieon determined by (center, line, scale)."""
    n = spec.ambient_dim
    if spec.kind == "triadon":
        frame = spec.center
        gens = subspace_complement(frame).vectors()
        if len(gens) != 2:
            raise DimensionMismatchError("triadon center has wrong codimension")
        x, y = gens
        target = spec.line.vectors()[0]
    else:
        frame = subspace_sum(spec.center, spec.line)
        gens = subspace_complement(frame).vectors()
        if len(gens) != 1:
            raise DimensionMismatchError("dyon frame has wrong codimension")
        x = gens[0]
        y = spec.line.vectors()[0]
        target = y
    basis = Matrix([x, y] + spec.center.vectors())
    coords = [express_in_rows(basis, unit_vector(n, i)) for i in range(n)]
    value = tuple(spec.scale * c for c in target)
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            coeff = coords[i][0] * coords[j][1] - coords[j][0] * coords[i][1]
            if coeff != 0:
                out = {k: coeff * c for k, c in enumerate(value) if c != 0}
                if out:
                    entries[(i, j)] = out
    return LieAlgebra(StructureConstants(n, entries))


def classify_lieon(g: LieAlgebra):
    """'abelian' | LieonSpec | 'other', decided purely by invariants."""
    if g.sc.is_zero():
        return "abelian"
    n = g.dim
    c = center(g)
    d = derived(g)
    if c.dim != n - 2 or d.dim != 1:
        return "other"
    if c.contains(d):
        kind = "triadon"
        frame = c
    else:
        kind = "dyon"
        frame = subspace_sum(c, d)
    gens = subspace_complement(frame).vectors()
    line_gen = d.vectors()[0]
    if kind == "triadon":
        x, y = gens
        w = g.sc.bracket_vector_tuple(x, y)
    else:
        w = g.sc.bracket_vector_tuple(gens[0], line_gen)
    coeffs = express_in_rows(Matrix([line_gen]), w)
    if coeffs is None or coeffs[0] == 0:
        return "other"
    spec = LieonSpec(kind, n, c, d, coeffs[0])
    # the invariants above are necessary; exactness of the match is sufficient
    if lieon_structure(spec).sc != g.sc:
        return "other"
    return spec


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def sc_to_obj(sc: StructureConstants) -> dict:
    labels = list(sc.labels) if sc.labels else [f"e{i + 1}" for i in range(sc.dim)]
    brackets = []
    for (i, j) in sorted(sc.entries):
        out = [[str(k + 1), rat_str(c)] for k, c in sorted(sc.entries[(i, j)].items())]
        brackets.append({"i": i + 1, "j": j + 1, "out": out})
    return {"dim": sc.dim, "labels": labels, "brackets": brackets}


def sc_from_obj(obj) -> StructureConstants:
    try:
        dim = obj["dim"]
        if not isinstance(dim, int) or dim < 0:
            raise InputError("dim must be a non-negative integer")
        labels = obj.get("labels")
        entries = {}
        for rec in obj.get("brackets", []):
            i, j = rec["i"] - 1, rec["j"] - 1
            out = {}
            for k_str, c_str in rec["out"]:
                out[int(k_str) - 1] = rat(c_str)
            entries[(i, j)] = out
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"malformed structure-constant object: {exc}") from exc
    return StructureConstants(dim, entries, labels)


def dumps_canonical(obj) -> str:
    """Deterministic JSON rendering: sorted keys, no float, minimal spaces."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def sc_to_json(sc: StructureConstants) -> str:
    return dumps_canonical(sc_to_obj(sc))


def sc_from_json(text: str) -> StructureConstants:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return sc_from_obj(obj)
