"""Skew multivectors with polynomial coefficients and the Schouten bracket.

A multivector on the dual of an n-dimensional space is a polynomial in
commuting coordinates x_1..x_n and anticommuting generators xi_1..xi_n.
Terms are stored sparsely as (strictly increasing xi-index tuple,
x-exponent tuple) -> coefficient.

Two implementations of the Schouten bracket are provided on purpose: the
coordinate formula

    [[P, Q]] = - sum_i ( dP/dx_i dQ/dxi_i + (-1)^deg(P) dP/dxi_i dQ/dx_i )

and an oracle that expands bilinearly over single terms and recurses through
the graded derivation rules down to vector-field commutators.  They must
agree exactly; the test suite leans on that.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import ConversionError, DegreeError, DimensionMismatchError
from .exactlin import ZERO, ONE, rat, rat_str
from .liecore import LieAlgebra, StructureConstants


def _merge_indices(a, b):
    """Concatenate two increasing xi-tuples; return (sign, merged) or (0, None)."""
    merged = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        if a[i] == b[j]:
            return 0, None
        if a[i] < b[j]:
            merged.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining entries of a
            if (len(a) - i) % 2 == 1:
                sign = -sign
            merged.append(b[j])
            j += 1
    merged.extend(a[i:])
    merged.extend(b[j:])
    return sign, tuple(merged)


class MultiVector:
    """Sparse skew multivector; immutable in spirit, please do not mutate."""

    __slots__ = ("n", "terms")

    def __init__(self, n, terms=None):
        self.n = n
        clean = {}
        if terms:
            for (xi, mono), c in terms.items():
                c = rat(c)
                if c == 0:
                    continue
                xi = tuple(xi)
                mono = tuple(mono)
                if len(mono) != n:
                    raise DimensionMismatchError("x-monomial exponent tuple of wrong length")
                if any(not 0 <= i < n for i in xi) or list(xi) != sorted(set(xi)):
                    raise DimensionMismatchError("xi-index tuple must be strictly increasing and in range")
                clean[(xi, mono)] = clean.get((xi, mono), ZERO) + c
        self.terms = {k: v for k, v in clean.items() if v != 0}

    # -- constructors -------------------------------------------------------

    @classmethod
    def zero(cls, n):
        return cls(n, {})

    @classmethod
    def unit(cls, n):
        return cls(n, {((), (0,) * n): ONE})

    @classmethod
    def term(cls, n, coeff, xi_indices=(), x_exponents=None):
        mono = tuple(x_exponents) if x_exponents is not None else (0,) * n
        return cls(n, {(tuple(xi_indices), mono): rat(coeff)})

    @classmethod
    def coordinate(cls, n, i):
        """The linear function x_{i+1}."""
        mono = [0] * n
        mono[i] = 1
        return cls.term(n, 1, (), mono)

    @classmethod
    def xi(cls, n, i):
        return cls.term(n, 1, (i,))

    # -- structure ----------------------------------------------------------

    def is_zero(self):
        return not self.terms

    def xi_degrees(self):
        return sorted({len(xi) for (xi, _) in self.terms})

    def xi_degree(self):
        """Degree of a xi-homogeneous multivector (0 for the zero one)."""
        degs = self.xi_degrees()
        if not degs:
            return 0
        if len(degs) > 1:
            raise DegreeError(f"multivector is not xi-homogeneous: degrees {degs}")
        return degs[0]

    def is_homogeneous(self):
        return len(self.xi_degrees()) <= 1

    def __eq__(self, other):
        return isinstance(other, MultiVector) and self.n == other.n and self.terms == other.terms

    def __hash__(self):
        return hash((self.n, tuple(sorted(self.terms.items()))))

    # -- linear operations --------------------------------------------------

    def __add__(self, other):
        self._check(other)
        terms = dict(self.terms)
        for key, c in other.terms.items():
            terms[key] = terms.get(key, ZERO) + c
        return MultiVector(self.n, terms)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        c = rat(c)
        return MultiVector(self.n, {k: c * v for k, v in self.terms.items()})

    def _check(self, other):
        if self.n != other.n:
            raise DimensionMismatchError("multivectors on different spaces")

    # -- derivatives --------------------------------------------------------

    def d_x(self, i):
        terms = {}
        for (xi, mono), c in self.terms.items():
            e = mono[i]
            if e == 0:
                continue
            new = list(mono)
            new[i] = e - 1
            key = (xi, tuple(new))
            terms[key] = terms.get(key, ZERO) + c * e
        return MultiVector(self.n, terms)

    def d_xi(self, i):
        """Signed graded derivative: remove xi_i with (-1)^(position of i in the tuple)."""
        terms = {}
        for (xi, mono), c in self.terms.items():
            if i not in xi:
                continue
            pos = xi.index(i)
            new = xi[:pos] + xi[pos + 1:]
            key = (new, mono)
            sign = -ONE if pos % 2 else ONE
            terms[key] = terms.get(key, ZERO) + sign * c
        return MultiVector(self.n, terms)

    def __repr__(self):
        return f"MultiVector({render(self)})"


def wedge(p: MultiVector, q: MultiVector) -> MultiVector:
    """Graded-commutative product; x-parts multiply, xi-parts merge with sign."""
    p._check(q)
    terms = {}
    for (xi1, m1), c1 in p.terms.items():
        for (xi2, m2), c2 in q.terms.items():
            sign, xi = _merge_indices(xi1, xi2)
            if sign == 0:
                continue
            mono = tuple(a + b for a, b in zip(m1, m2))
            key = (xi, mono)
            terms[key] = terms.get(key, ZERO) + sign * c1 * c2
    return MultiVector(p.n, terms)


def schouten(p: MultiVector, q: MultiVector) -> MultiVector:
    """Coordinate formula for the Schouten bracket (requires homogeneous inputs)."""
    p._check(q)
    dp = p.xi_degree()
    if not p.is_homogeneous() or not q.is_homogeneous():
        raise DegreeError("schouten requires xi-homogeneous arguments")
    sign_p = -ONE if dp % 2 else ONE
    total = MultiVector.zero(p.n)
    for i in range(p.n):
        term1 = wedge(p.d_x(i), q.d_xi(i))
        term2 = wedge(p.d_xi(i), q.d_x(i)).scale(sign_p)
        total = total - term1 - term2
    return total


# ---------------------------------------------------------------------------
# independent oracle
# ---------------------------------------------------------------------------

def _single_terms(p: MultiVector):
    return [MultiVector(p.n, {key: c}) for key, c in sorted(p.terms.items())]


def _vf_commutator(x: MultiVector, y: MultiVector) -> MultiVector:
    """[X, Y](x_j) = X(Y(x_j)) - Y(X(x_j)) for single-term vector fields."""
    n = x.n
    terms = {}
    for (xi1, m1), c1 in x.terms.items():
        for (xi2, m2), c2 in y.terms.items():
            k1, k2 = xi1[0], xi2[0]
            # X = f xi_{k1}, Y = g xi_{k2}: [X,Y] = f (dg/dx_{k1}) xi_{k2} - g (df/dx_{k2}) xi_{k1}
            if m2[k1] > 0:
                new = list(m2)
                new[k1] -= 1
                mono = tuple(a + b for a, b in zip(m1, new))
                key = ((k2,), mono)
                terms[key] = terms.get(key, ZERO) + c1 * c2 * m2[k1]
            if m1[k2] > 0:
                new = list(m1)
                new[k2] -= 1
                mono = tuple(a + b for a, b in zip(new, m2))
                key = ((k1,), mono)
                terms[key] = terms.get(key, ZERO) - c1 * c2 * m1[k2]
    return MultiVector(n, terms)


def _vf_apply(x: MultiVector, f: MultiVector) -> MultiVector:
    """X(f) for a single-term vector field and a function."""
    total = MultiVector.zero(x.n)
    for (xi1, m1), c1 in x.terms.items():
        k = xi1[0]
        df = f.d_x(k)
        total = total + wedge(MultiVector(x.n, {((), m1): c1}), df)
    return total


def _oracle_terms(a: MultiVector, b: MultiVector) -> MultiVector:
    """[[a, b]] for single terms via derivation rules and base cases."""
    p = a.xi_degree()
    q = b.xi_degree()
    n = a.n
    if p == 0 and q == 0:
        return MultiVector.zero(n)
    if p == 1 and q == 0:
        return _vf_apply(a, b)
    if p == 0 and q == 1:
        return _vf_apply(b, a).scale(-1)
    if p == 1 and q == 1:
        return _vf_commutator(a, b)
    if q >= 2:
        # b = u ^ v with u of degree 1:
        # [[a, u ^ v]] = [[a, u]] ^ v + (-1)^(p-1) u ^ [[a, v]]
        (xi, mono), c = next(iter(b.terms.items()))
        u = MultiVector(n, {((xi[0],), mono): c})
        v = MultiVector(n, {(xi[1:], (0,) * n): ONE})
        left = wedge(_oracle_terms(a, u), v)
        sign = -ONE if (p - 1) % 2 else ONE
        right = wedge(u, _oracle_terms(a, v)).scale(sign)
        return left + right
    # q <= 1 < p: flip with graded antisymmetry
    # [[a, b]] = -(-1)^((p-1)(q-1)) [[b, a]]
    sign = -ONE if ((p - 1) * (q - 1)) % 2 == 0 else ONE
    return _oracle_terms(b, a).scale(sign)


def schouten_oracle(p: MultiVector, q: MultiVector) -> MultiVector:
    """Bilinear expansion over single terms; must agree exactly with schouten()."""
    p._check(q)
    if not p.is_homogeneous() or not q.is_homogeneous():
        raise DegreeError("schouten_oracle requires xi-homogeneous arguments")
    total = MultiVector.zero(p.n)
    for a in _single_terms(p):
        for b in _single_terms(q):
            total = total + _oracle_terms(a, b)
    return total


# ---------------------------------------------------------------------------
# Poisson structures and duality
# ---------------------------------------------------------------------------

def is_poisson(p: MultiVector) -> bool:
    if not p.is_zero() and p.xi_degree() != 2:
        raise DegreeError("is_poisson expects a bivector")
    return schouten(p, p).is_zero()


def lie_to_bivector(g: LieAlgebra) -> MultiVector:
    """P_g = sum_{i<j} c_ij^k x_k xi_i xi_j."""
    n = g.dim
    terms = {}
    for (i, j), out in g.sc.entries.items():
        for k, c in out.items():
            mono = [0] * n
            mono[k] = 1
            key = ((i, j), tuple(mono))
            terms[key] = terms.get(key, ZERO) + c
    return MultiVector(n, terms)


def bivector_to_lie(p: MultiVector) -> LieAlgebra:
    """Inverse of lie_to_bivector; requires a linear Poisson bivector."""
    n = p.n
    entries = {}
    for (xi, mono), c in p.terms.items():
        if len(xi) != 2:
            raise ConversionError("bivector_to_lie expects xi-degree 2")
        if sum(mono) != 1:
            raise ConversionError("bivector_to_lie expects coefficients linear in x")
        k = mono.index(1)
        i, j = xi
        entries.setdefault((i, j), {})[k] = c
    sc = StructureConstants(n, entries)
    from .liecore import is_lie

    if not is_lie(sc):
        raise ConversionError("bivector is not Poisson; no Lie algebra corresponds to it")
    return LieAlgebra(sc)


def bivector_rank(p: MultiVector) -> int:
    """2k where k is the largest wedge power of p that is nonzero."""
    if not p.is_zero() and p.xi_degree() != 2:
        raise DegreeError("rank is defined for bivectors")
    k = 0
    power = MultiVector.unit(p.n)
    while True:
        power = wedge(power, p)
        if power.is_zero():
            return 2 * k
        k += 1


def lie_rank(g: LieAlgebra) -> int:
    return bivector_rank(lie_to_bivector(g))


# ---------------------------------------------------------------------------
# rendering
# ---------------------------------------------------------------------------

def _render_term(xi, mono, c):
    pieces = []
    for i, e in enumerate(mono):
        if e == 1:
            pieces.append(f"x{i + 1}")
        elif e > 1:
            pieces.append(f"x{i + 1}^{e}")
    xi_part = "^".join(f"xi{i + 1}" for i in xi)
    if xi_part:
        pieces.append(xi_part)
    body = "*".join(pieces) or "1"
    if c == 1:
        return body if pieces else "1"
    if c == -1:
        return f"-{body}" if pieces else "-1"
    return f"{rat_str(c)}*{body}" if pieces else rat_str(c)


def render(p: MultiVector) -> str:
    """Plain-text rendering with terms sorted lexicographically."""
    if p.is_zero():
        return "0"
    rendered = sorted(
        _render_term(xi, mono, c) for (xi, mono), c in p.terms.items()
    )
    return " + ".join(rendered)
