"""Modular vector, modular disassembling and matchings of modular algebras.

The modular covector of a structure g is theta(u) = -tr(ad u).  Splitting g
into a unimodular part and the rank-2 non-unimodular remainder

    [u, v]_non = theta(u) A(v) - theta(v) A(u),     A = ad nu,

is canonical up to the gauge choice of nu with theta(nu) = 1; the default nu
is the smallest-index basis vector with theta(e_i) != 0, rescaled.  The
invariant part of the unimodular bracket (its restriction to divergenceless
directions) does not depend on that gauge; we do not machine-check that
statement because it quantifies over all gauges.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    AlreadyUnimodularError,
    DimensionMismatchError,
    InvalidMatchingError,
    NotModularError,
)
from .exactlin import Matrix, ZERO, ONE, rat, unit_vector, vec, vec_is_zero
from .liecore import (
    LieAlgebra,
    StructureConstants,
    ad,
    add,
    is_lie,
)
from .multivec import MultiVector, bivector_to_lie, wedge


def modular_vector(g: LieAlgebra):
    """theta(e_i) = -tr(ad e_i), returned as a coordinate tuple."""
    n = g.dim
    return tuple(-ad(g, unit_vector(n, i)).trace() for i in range(n))


def is_unimodular(g: LieAlgebra) -> bool:
    return vec_is_zero(modular_vector(g))


@dataclass(frozen=True)
class ModularTriple:
    """The datum (A, theta, nu) of a non-unimodular part; see relations below."""

    a: Matrix
    theta: tuple
    nu: tuple

    def check(self):
        """A^T theta = 0, tr A = -1, A nu = 0, theta(nu) = 1."""
        n = len(self.theta)
        if not vec_is_zero(self.a.transpose().apply(self.theta)):
            return False
        if self.a.trace() != -1:
            return False
        if not vec_is_zero(self.a.apply(self.nu)):
            return False
        return sum(t * v for t, v in zip(self.theta, self.nu)) == ONE and self.a.rows == n


def _non_part(theta, a: Matrix, n: int) -> StructureConstants:
    """[u,v]_non = theta(u) A(v) - theta(v) A(u) as structure constants."""
    entries = {}
    cols = [a.column(j) for j in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out = {}
            for k in range(n):
                c = theta[i] * cols[j][k] - theta[j] * cols[i][k]
                if c != 0:
                    out[k] = c
            if out:
                entries[(i, j)] = out
    return StructureConstants(n, entries)


def modular_disassemble(g: LieAlgebra, nu=None):
    """Split g into (g_uni, g_non, ModularTriple) with g = g_uni + g_non.

    Both parts are validated; g_uni is unimodular, g_non carries the whole
    modular vector, the two are compatible, and nu is a Casimir of g_uni.
    """
    theta = modular_vector(g)
    if vec_is_zero(theta):
        raise AlreadyUnimodularError("modular vector is zero; nothing to disassemble")
    n = g.dim
    if nu is None:
        i = next(i for i, t in enumerate(theta) if t != 0)
        nu = tuple(
            (ONE / theta[i]) if j == i else ZERO for j in range(n)
        )
    else:
        nu = vec(nu)
        pairing = sum(t * v for t, v in zip(theta, nu))
        if pairing != 1:
            raise InvalidMatchingError("gauge vector must satisfy theta(nu) = 1")
    a = ad(g, nu)
    non_sc = _non_part(theta, a, n)
    uni_sc = add(g.sc, non_sc.scale(-1))
    g_non = LieAlgebra.validate(non_sc)
    g_uni = LieAlgebra.validate(uni_sc)
    triple = ModularTriple(a, theta, nu)
    return g_uni, g_non, triple


def modular_algebra(a0: Matrix) -> LieAlgebra:
    """[u, e] = A0(u) on W0, [W0, W0] = 0, where e is the last basis vector."""
    if a0.rows != a0.cols:
        raise DimensionMismatchError("modular_algebra needs a square matrix")
    if a0.trace() == 0:
        raise NotModularError("tr A0 = 0 defines a unimodular structure, not a modular one")
    m = a0.rows
    entries = {}
    for i in range(m):
        col = a0.column(i)
        out = {k: c for k, c in enumerate(col) if c != 0}
        if out:
            entries[(i, m)] = out
    return LieAlgebra(StructureConstants(m + 1, entries))


def nu_is_casimir(g: LieAlgebra, nu) -> bool:
    """True iff [nu, .] vanishes identically in g."""
    return ad(g, nu).is_zero()


# ---------------------------------------------------------------------------
# matchings of modular Lie algebras
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MatchingQuadruple:
    """(V, A, B, lambda) with [A, B] = 2 lambda A and tr B = 2(1 - lambda)."""

    v_dim: int
    a: Matrix
    b: Matrix
    lam: Fraction

    def check(self):
        lam = rat(self.lam)
        if lam == 0:
            return False
        if self.a.rows != self.v_dim or self.b.rows != self.v_dim:
            return False
        if self.a.commutator(self.b) != self.a.scale(2 * lam):
            return False
        return self.b.trace() == 2 * (1 - lam)


@dataclass(frozen=True)
class MatchingQuintuple:
    """(V, A, B, nu1, nu2): [A,B] = 0, tr A = 0, tr B = 2, nu_i in ker A."""

    v_dim: int
    a: Matrix
    b: Matrix
    nu1: tuple
    nu2: tuple

    def check(self):
        if self.a.rows != self.v_dim or self.b.rows != self.v_dim:
            return False
        if not self.a.commutator(self.b).is_zero():
            return False
        if self.a.trace() != 0 or self.b.trace() != 2:
            return False
        return vec_is_zero(self.a.apply(self.nu1)) and vec_is_zero(self.a.apply(self.nu2))


def _operator_field(n: int, block: Matrix) -> MultiVector:
    """Linear vector field of the operator block+0 acting on the first block.rows coords."""
    terms = {}
    m = block.rows
    for j in range(m):
        for i in range(m):
            c = block[(i, j)]
            if c != 0:
                mono = [0] * n
                mono[i] = 1
                terms[((j,), tuple(mono))] = c
    return MultiVector(n, terms)


def _coord_times_xi(n: int, coord: int, xi: int, coeff) -> MultiVector:
    mono = [0] * n
    mono[coord] = 1
    return MultiVector.term(n, coeff, (xi,), mono)


def _linear_times_xi(n: int, vector, xi: int, coeff) -> MultiVector:
    out = MultiVector.zero(n)
    for k, c in enumerate(vector):
        if c != 0:
            out = out + _coord_times_xi(n, k, xi, rat(coeff) * c)
    return out


def _matching_pair(v_dim, a, b, lam, nu1, nu2):
    """Common core: build X1 ^ Xi1 and X2 ^ Xi2, return the two algebras.

    With Z = X1 - X2 and W = X1 + X2 restricting to A and B, the raw
    construction carries modular vectors (1 - 2 lambda) times the coordinate
    covectors dual to e_{m+1}, e_{m+2}; rescaling both bivectors by
    1/(1 - 2 lambda) pins the modular vectors to exactly those covectors.
    At lambda = 1/2 the construction degenerates to a unimodular pair and no
    rescaling can fix that, so such quadruples are rejected.
    """
    m = v_dim
    n = m + 2
    lam = rat(lam)
    if 1 - 2 * lam == 0:
        raise InvalidMatchingError(
            "lambda = 1/2 yields a unimodular pair; no modular matching corresponds to it"
        )
    half = Fraction(1, 2)
    m1 = (a + b).scale(half)
    m2 = (b - a).scale(half)
    xi1 = MultiVector.xi(n, m)
    xi2 = MultiVector.xi(n, m + 1)
    x1 = _operator_field(n, m1)
    x2 = _operator_field(n, m2)
    if lam != 0:
        x1 = x1 + _coord_times_xi(n, m + 1, m + 1, -lam)  # -lambda u2 Xi2
        x2 = x2 + _coord_times_xi(n, m, m, -lam)          # -lambda u1 Xi1
    if nu1 is not None:
        x1 = x1 + _linear_times_xi(n, nu1, m, half) + _linear_times_xi(n, nu2, m + 1, half)
        x2 = x2 + _linear_times_xi(n, nu1, m, half) + _linear_times_xi(n, nu2, m + 1, half)
    norm = ONE / (1 - 2 * lam)
    p1 = wedge(x1, xi1).scale(norm)
    p2 = wedge(x2, xi2).scale(norm)
    g1 = bivector_to_lie(p1)
    g2 = bivector_to_lie(p2)
    return g1, g2


def matching_from_quadruple(q: MatchingQuadruple):
    """The compatible modular pair classified by a lambda != 0 quadruple."""
    if not q.check():
        raise InvalidMatchingError("quadruple violates [A,B] = 2*lambda*A or tr B = 2(1-lambda)")
    return _matching_pair(q.v_dim, q.a, q.b, q.lam, None, None)


def matching_from_quintuple(q: MatchingQuintuple):
    """The compatible modular pair classified by a lambda = 0 quintuple."""
    if not q.check():
        raise InvalidMatchingError("quintuple violates its commutation/trace/kernel conditions")
    return _matching_pair(q.v_dim, q.a, q.b, 0, vec(q.nu1), vec(q.nu2))


def is_modular_structure(g: LieAlgebra) -> bool:
    """True iff g is non-unimodular and equals its own non-unimodular part."""
    if is_unimodular(g):
        return False
    g_uni, _, _ = modular_disassemble(g)
    return g_uni.sc.is_zero()
