"""Assemblage schemes and the disassembling toolkit.

An a-scheme is a leveled tree with a structure attached to every node: one
root, edges between consecutive levels only, no internal node with exactly
one child, and at every internal node the children are mutually compatible
and sum to the parent.  All disassemblers here emit verified schemes and are
deterministic: ideal/transversal choices always extend by smallest-index
coordinate vectors, so re-running a disassembly reproduces it byte for byte.
Different gauge choices can give non-equivalent complete disassemblies; that
freedom is real and not an artifact defect.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    ClosureError,
    DegeneratePairError,
    DimensionMismatchError,
    IncompatibleLieonsError,
    InputError,
)
from .exactlin import (
    Matrix,
    Subspace,
    ZERO,
    ONE,
    express_in_rows,
    kernel,
    poly_kernel,
    rat,
    subspace_complement,
    subspace_intersect,
    subspace_sum,
    unit_vector,
    vec,
)
from .liecore import (
    LieAlgebra,
    LieonSpec,
    Representation,
    StructureConstants,
    add,
    classify_lieon,
    derived,
    is_lie,
    is_solvable,
    jacobiator,
    lieon_structure,
    restrict,
    sc_from_obj,
    sc_to_obj,
    dumps_canonical,
)


# ---------------------------------------------------------------------------
# a-schemes
# ---------------------------------------------------------------------------

class AScheme:
    """Leveled disassembling tree; node ids are dot-paths from the root "0"."""

    def __init__(self, root_sc: StructureConstants):
        self.nodes = {"0": root_sc}
        self.children = {"0": []}

    @property
    def root(self) -> StructureConstants:
        return self.nodes["0"]

    def level(self, node_id: str) -> int:
        return node_id.count(".")

    def add_children(self, parent_id: str, structures) -> list:
        if parent_id not in self.nodes:
            raise InputError(f"unknown scheme node {parent_id}")
        ids = []
        for sc in structures:
            idx = len(self.children[parent_id])
            cid = f"{parent_id}.{idx}"
            self.nodes[cid] = sc
            self.children[cid] = []
            self.children[parent_id].append(cid)
            ids.append(cid)
        return ids

    def graft(self, node_id: str, sub: "AScheme", transform=None):
        """Attach a sub-scheme below node_id; sub's root must transform to its structure."""
        f = transform or (lambda sc: sc)
        if f(sub.root) != self.nodes[node_id]:
            raise InputError("graft root does not match the target node")
        mapping = {"0": node_id}
        for cid in sorted(sub.nodes, key=_path_key):
            if cid == "0":
                continue
            parent = cid.rsplit(".", 1)[0]
            new_ids = self.add_children(mapping[parent], [f(sub.nodes[cid])])
            mapping[cid] = new_ids[0]

    def end_ids(self):
        return sorted((i for i in self.nodes if not self.children[i]), key=_path_key)

    def depth(self) -> int:
        return max(self.level(i) for i in self.nodes)

    def parent_of(self, node_id):
        return node_id.rsplit(".", 1)[0] if "." in node_id else None


def _path_key(node_id: str):
    return tuple(int(p) for p in node_id.split("."))


@dataclass
class SchemeReport:
    valid: bool
    complete: bool          # lenient: abelian "vacuum" end terms are allowed
    complete_strict: bool   # every end term is a dyon or a triadon
    end_terms: list         # (node_id, "dyon"|"triadon"|"abelian"|"other")
    violations: list
    dyons: int
    triadons: int
    steps: int


def _check_node(scheme: AScheme, node_id: str):
    violations = []
    sc = scheme.nodes[node_id]
    if not is_lie(sc):
        violations.append(f"node {node_id}: structure fails the Jacobi identity")
    kids = scheme.children[node_id]
    if kids:
        if len(kids) == 1:
            violations.append(f"node {node_id}: internal node with exactly one child")
        total = StructureConstants.zero(sc.dim)
        for cid in kids:
            child = scheme.nodes[cid]
            if child.dim != sc.dim:
                violations.append(f"node {cid}: dimension differs from parent")
                continue
            total = add(total, child)
        if total != sc:
            violations.append(f"node {node_id}: children do not sum to the parent")
        for a in range(len(kids)):
            for b in range(a + 1, len(kids)):
                pair = add(scheme.nodes[kids[a]], scheme.nodes[kids[b]])
                if not jacobiator(pair).is_zero():
                    violations.append(
                        f"node {node_id}: children {kids[a]} and {kids[b]} are not compatible"
                    )
    return violations


def verify_scheme(scheme: AScheme) -> SchemeReport:
    """Check all a-scheme invariants node by node and classify the end terms."""
    violations = []
    ids = sorted(scheme.nodes, key=_path_key)
    for node_id in ids:
        if node_id != "0":
            parent = scheme.parent_of(node_id)
            if parent not in scheme.nodes:
                violations.append(f"node {node_id}: dangling parent path")
            if scheme.level(node_id) != scheme.level(parent) + 1:
                violations.append(f"node {node_id}: edge skips levels")

    workers = _thread_budget()
    if workers > 1 and len(ids) > 8:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            for part in pool.map(lambda i: _check_node(scheme, i), ids):
                violations.extend(part)
    else:
        for node_id in ids:
            violations.extend(_check_node(scheme, node_id))

    end_terms = []
    dyons = triadons = abelian_ends = others = 0
    for node_id in scheme.end_ids():
        cls = classify_lieon(LieAlgebra(scheme.nodes[node_id]))
        if cls == "abelian":
            abelian_ends += 1
            end_terms.append((node_id, "abelian"))
        elif cls == "other":
            others += 1
            end_terms.append((node_id, "other"))
        elif cls.kind == "dyon":
            dyons += 1
            end_terms.append((node_id, "dyon"))
        else:
            triadons += 1
            end_terms.append((node_id, "triadon"))
    valid = not violations
    return SchemeReport(
        valid=valid,
        complete=valid and others == 0,
        complete_strict=valid and others == 0 and abelian_ends == 0,
        end_terms=end_terms,
        violations=violations,
        dyons=dyons,
        triadons=triadons,
        steps=scheme.depth(),
    )


def _thread_budget() -> int:
    try:
        return max(1, int(os.environ.get("LIEON_THREADS", "1")))
    except ValueError:
        return 1


def scheme_to_obj(scheme: AScheme) -> dict:
    ids = sorted(scheme.nodes, key=_path_key)
    nodes = [
        {"id": i, "level": scheme.level(i), "algebra": sc_to_obj(scheme.nodes[i])}
        for i in ids
    ]
    edges = [[i, c] for i in ids for c in scheme.children[i]]
    return {"nodes": nodes, "edges": edges}


def scheme_from_obj(obj) -> AScheme:
    try:
        nodes = {rec["id"]: sc_from_obj(rec["algebra"]) for rec in obj["nodes"]}
        edges = [tuple(e) for e in obj["edges"]]
    except (KeyError, TypeError) as exc:
        raise InputError(f"malformed scheme object: {exc}") from exc
    if "0" not in nodes:
        raise InputError("scheme has no root node '0'")
    scheme = AScheme(nodes["0"])
    scheme.nodes = dict(nodes)
    scheme.children = {i: [] for i in nodes}
    for parent, child in edges:
        if parent not in nodes or child not in nodes:
            raise InputError(f"edge ({parent},{child}) references unknown nodes")
        scheme.children[parent].append(child)
    for i in nodes:
        scheme.children[i].sort(key=_path_key)
    return scheme


def scheme_to_json(scheme: AScheme) -> str:
    return dumps_canonical(scheme_to_obj(scheme))


def scheme_from_json(text: str) -> AScheme:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return scheme_from_obj(obj)


# ---------------------------------------------------------------------------
# bracket filtering helpers
# ---------------------------------------------------------------------------

def _projection_onto(space: Subspace, along: Subspace) -> Matrix:
    """Projection matrix onto `space` along `along` (the two must be complementary)."""
    n = space.ambient_dim
    if space.dim + along.dim != n:
        raise DimensionMismatchError("projection needs complementary subspaces")
    frame = Matrix(space.vectors() + along.vectors())
    cols = []
    for k in range(n):
        coeffs = express_in_rows(frame, unit_vector(n, k))
        if coeffs is None:
            raise DimensionMismatchError("subspaces do not span the ambient space")
        img = [ZERO] * n
        for c, v in zip(coeffs[: space.dim], space.vectors()):
            img = [x + c * y for x, y in zip(img, v)]
        cols.append(tuple(img))
    return Matrix.from_columns(cols)


def _filtered_bracket(g: LieAlgebra, proj: Matrix) -> StructureConstants:
    """Structure constants of (u, v) -> [proj u, proj v]."""
    n = g.dim
    entries = {}
    pu = [proj.column(k) for k in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            out = g.sc.bracket_vectors(pu[i], pu[j])
            if out:
                entries[(i, j)] = out
    return StructureConstants(n, entries)


def _pair_bracket(n: int, u, v, value, rest) -> StructureConstants:
    """The structure whose only bracket is [u, v] = value, zero on `rest`."""
    frame = Matrix([vec(u), vec(v)] + [vec(r) for r in rest])
    coords = [express_in_rows(frame, unit_vector(n, k)) for k in range(n)]
    if any(c is None for c in coords):
        raise DimensionMismatchError("frame does not span the ambient space")
    value = vec(value)
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            coeff = coords[i][0] * coords[j][1] - coords[j][0] * coords[i][1]
            if coeff != 0:
                out = {k: coeff * c for k, c in enumerate(value) if c != 0}
                if out:
                    entries[(i, j)] = out
    return StructureConstants(n, entries)


def extend_structure(sub_sc: StructureConstants, space: Subspace) -> StructureConstants:
    """Push a structure on `space` (in its RREF basis) out to the ambient space.

    The extension is zero on the deterministic coordinate complement.
    """
    n = space.ambient_dim
    if sub_sc.dim != space.dim:
        raise DimensionMismatchError("structure dimension does not match the subspace")
    comp = subspace_complement(space)
    frame = Matrix(space.vectors() + comp.vectors())
    d = space.dim
    coords = [express_in_rows(frame, unit_vector(n, k)) for k in range(n)]
    basis = space.vectors()
    entries = {}
    for i in range(n):
        for j in range(i + 1, n):
            acc = {}
            for a in range(d):
                for b in range(d):
                    coeff = coords[i][a] * coords[j][b]
                    if coeff == 0 or a == b:
                        continue
                    for k, c in sub_sc.bracket(a, b).items():
                        for m, x in enumerate(basis[k]):
                            if x != 0:
                                acc[m] = acc.get(m, ZERO) + coeff * c * x
            acc = {k: c for k, c in acc.items() if c != 0}
            if acc:
                entries[(i, j)] = acc
    return StructureConstants(n, entries)


# ---------------------------------------------------------------------------
# splittings
# ---------------------------------------------------------------------------

def split_semidirect(g: LieAlgebra, subalg: Subspace, ideal: Subspace):
    """g = (subalgebra acting on the abelianised ideal) + (ideal, subalgebra idle)."""
    full = Subspace.full(g.dim)
    from .liecore import bracket_subspaces

    if not subalg.contains(bracket_subspaces(g, subalg, subalg)):
        raise ClosureError("first subspace is not a subalgebra")
    if not ideal.contains(bracket_subspaces(g, full, ideal)):
        raise ClosureError("second subspace is not an ideal")
    if subspace_intersect(subalg, ideal).dim != 0 or subalg.dim + ideal.dim != g.dim:
        raise ClosureError("subalgebra and ideal must decompose the space")
    proj_ideal = _projection_onto(ideal, subalg)
    term2_sc = _filtered_bracket(g, proj_ideal)
    term1_sc = add(g.sc, term2_sc.scale(-1))
    return LieAlgebra.validate(term1_sc), LieAlgebra.validate(term2_sc)


@dataclass(frozen=True)
class DPair:
    """A Z/2-grading (s, W) of an algebra: [s,s] in s, [s,W] in W, [W,W] in s."""

    algebra: LieAlgebra
    s: Subspace
    w: Subspace

    @classmethod
    def validate(cls, algebra: LieAlgebra, s: Subspace, w: Subspace) -> "DPair":
        from .liecore import bracket_subspaces

        if s.dim + w.dim != algebra.dim or subspace_intersect(s, w).dim != 0:
            raise ClosureError("s and W must be complementary")
        if not s.contains(bracket_subspaces(algebra, s, s)):
            raise ClosureError("[s,s] is not contained in s")
        if not w.contains(bracket_subspaces(algebra, s, w)):
            raise ClosureError("[s,W] is not contained in W")
        if not s.contains(bracket_subspaces(algebra, w, w)):
            raise ClosureError("[W,W] is not contained in s")
        return cls(algebra, s, w)


@dataclass(frozen=True)
class Involution:
    """An involutive automorphism of a Lie algebra structure."""

    algebra: LieAlgebra
    matrix: Matrix

    @classmethod
    def validate(cls, algebra: LieAlgebra, matrix: Matrix) -> "Involution":
        n = algebra.dim
        if matrix.rows != n or matrix.cols != n:
            raise DimensionMismatchError("involution matrix has wrong size")
        if matrix * matrix != Matrix.identity(n):
            raise ClosureError("matrix is not involutive")
        if not _is_automorphism(algebra, matrix):
            raise ClosureError("matrix is not an automorphism of the bracket")
        return cls(algebra, matrix)


def _is_automorphism(g: LieAlgebra, m: Matrix) -> bool:
    n = g.dim
    cols = [m.column(j) for j in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            lhs = g.sc.bracket_vectors(cols[i], cols[j])
            rhs = {}
            for k, c in g.sc.bracket(i, j).items():
                for p, x in enumerate(cols[k]):
                    if x != 0:
                        rhs[p] = rhs.get(p, ZERO) + c * x
            rhs = {k: c for k, c in rhs.items() if c != 0}
            if lhs != rhs:
                return False
    return True


def dpair_from_involution(inv: Involution) -> DPair:
    n = inv.algebra.dim
    plus = kernel(inv.matrix - Matrix.identity(n))
    minus = kernel(inv.matrix + Matrix.identity(n))
    if minus.dim == 0:
        raise DegeneratePairError("involution is the identity; the d-pair has W = 0")
    return DPair.validate(inv.algebra, plus, minus)


def involution_from_dpair(dp: DPair) -> Involution:
    n = dp.algebra.dim
    proj_s = _projection_onto(dp.s, dp.w)
    i_matrix = proj_s.scale(2) - Matrix.identity(n)
    return Involution.validate(dp.algebra, i_matrix)


def strip(g: LieAlgebra, dp: DPair):
    """Stripping Lemma: g = (s acting on abelianised W) + dressing algebra."""
    if dp.algebra.sc != g.sc:
        raise ClosureError("d-pair was validated against a different structure")
    proj_w = _projection_onto(dp.w, dp.s)
    dressing_sc = _filtered_bracket(g, proj_w)
    semi_sc = add(g.sc, dressing_sc.scale(-1))
    return LieAlgebra.validate(semi_sc), LieAlgebra.validate(dressing_sc)


# ---------------------------------------------------------------------------
# dressing algebras
# ---------------------------------------------------------------------------

def dressing_algebra(w0: Subspace, w: Subspace, beta) -> LieAlgebra:
    """a_beta on the ambient space: [w_i, w_j] = sum_k beta[k][i][j] (w0 basis k)."""
    pieces = dressing_decompose(w0, w, beta)
    total = StructureConstants.zero(w0.ambient_dim)
    for p in pieces:
        total = add(total, p.sc)
    return LieAlgebra.validate(total)


def dressing_decompose(w0: Subspace, w: Subspace, beta) -> list:
    """Split a dressing algebra into one triadon per nonzero beta component.

    beta is given as one skew matrix per w0 basis vector, written in the RREF
    basis of w.  Every piece keeps a single bracket [w_i, w_j] = c * (w0)_k.
    """
    if w0.ambient_dim != w.ambient_dim:
        raise DimensionMismatchError("W0 and W must share the ambient space")
    if subspace_intersect(w0, w).dim != 0:
        raise ClosureError("W0 and W must be independent")
    beta = list(beta)
    if len(beta) != w0.dim:
        raise DimensionMismatchError("need one component matrix per W0 basis vector")
    m = w.dim
    for mat in beta:
        if mat.rows != m or mat.cols != m:
            raise DimensionMismatchError("beta components must be square of dim W")
        if mat.transpose() != -mat:
            raise ClosureError("beta components must be skew-symmetric")
    n = w0.ambient_dim
    rest_space = subspace_complement(subspace_sum(w0, w))
    w_vecs = w.vectors()
    w0_vecs = w0.vectors()
    pieces = []
    for i in range(m):
        for j in range(i + 1, m):
            for k in range(w0.dim):
                c = beta[k][(i, j)]
                if c == 0:
                    continue
                rest = (
                    [w_vecs[p] for p in range(m) if p not in (i, j)]
                    + w0_vecs
                    + rest_space.vectors()
                )
                value = tuple(c * x for x in w0_vecs[k])
                sc = _pair_bracket(n, w_vecs[i], w_vecs[j], value, rest)
                pieces.append(LieAlgebra(sc))
    return pieces


def _dressing_pieces_of(g: LieAlgebra, w0: Subspace, w: Subspace) -> list:
    """Decompose an already-built dressing structure along the (w0, w) frame."""
    m = w.dim
    w_vecs = w.vectors()
    beta = []
    images = {}
    for i in range(m):
        for j in range(i + 1, m):
            images[(i, j)] = g.sc.bracket_vector_tuple(w_vecs[i], w_vecs[j])
    for k in range(w0.dim):
        rows = [[ZERO] * m for _ in range(m)]
        for (i, j), img in images.items():
            coeffs = express_in_rows(w0.basis, img)
            if coeffs is None:
                raise ClosureError("dressing bracket escapes W0")
            rows[i][j] = coeffs[k]
            rows[j][i] = -coeffs[k]
        beta.append(Matrix(rows))
    return dressing_decompose(w0, w, beta)


# ---------------------------------------------------------------------------
# Gamma_A decomposition and the solvable disassembler
# ---------------------------------------------------------------------------

def gamma_decompose(a: Matrix, basis: Matrix = None) -> list:
    """Gamma_A = sum of Gamma_{a_ij E_ij} in the given basis of the acted space.

    Pieces live on dim 1 + cols(A) with the generator at index 0; each is a
    dyon (diagonal entry) or a triadon (off-diagonal entry).
    """
    m = a.cols
    if a.rows != m:
        raise DimensionMismatchError("Gamma_A needs a square matrix")
    if basis is None:
        basis = Matrix.identity(m)
    if basis.rows != m or basis.cols != m:
        raise DimensionMismatchError("basis must be square of the module dimension")
    n = 1 + m
    pad = lambda v: (ZERO,) + tuple(v)
    b_vecs = [pad(basis.row(i)) for i in range(m)]
    nu = unit_vector(n, 0)
    pieces = []
    for j in range(m):
        img = a.apply(basis.row(j))
        coeffs = express_in_rows(basis, img)
        if coeffs is None:
            raise DimensionMismatchError("basis matrix is singular")
        for i in range(m):
            if coeffs[i] == 0:
                continue
            rest = [b_vecs[p] for p in range(m) if p != j]
            value = tuple(coeffs[i] * x for x in b_vecs[i])
            sc = _pair_bracket(n, nu, b_vecs[j], value, rest)
            pieces.append(LieAlgebra(sc))
    return pieces


def _gamma_pieces_ambient(g: LieAlgebra, t_index: int, space: Subspace) -> list:
    """Pieces of a Gamma-shaped structure: e_t acting on `space`, in its RREF basis."""
    n = g.dim
    b = space.vectors()
    m = len(b)
    nu = unit_vector(n, t_index)
    pieces = []
    for j in range(m):
        img = g.sc.bracket_vector_tuple(nu, b[j])
        coeffs = express_in_rows(space.basis, img)
        if coeffs is None:
            raise ClosureError("action does not preserve the subspace")
        for i in range(m):
            if coeffs[i] == 0:
                continue
            rest = [b[p] for p in range(m) if p != j]
            value = tuple(coeffs[i] * x for x in b[i])
            sc = _pair_bracket(n, nu, b[j], value, rest)
            pieces.append(LieAlgebra(sc))
    return pieces


class NotSolvableError(ClosureError):
    pass


def _codim1_ideal(g: LieAlgebra):
    """Deterministic codimension-1 ideal containing [g,g], plus the transversal index."""
    d = derived(g)
    n = g.dim
    pivots = set(d.pivots())
    free = [i for i in range(n) if i not in pivots]
    take = (n - 1) - d.dim
    s_space = Subspace.from_spanning(
        d.vectors() + [unit_vector(n, i) for i in free[:take]], n
    )
    return s_space, free[take]


def disassemble_solvable(g: LieAlgebra) -> AScheme:
    """Complete disassembling of a solvable structure into lieons.

    Recursion: split off the action of a transversal line on a deterministic
    codimension-1 ideal above [g,g] (a Gamma_A piece, decomposed entrywise),
    then recurse into the ideal.  Abelian and lieon nodes terminate.
    """
    if not is_solvable(g):
        raise NotSolvableError("input structure is not solvable")
    scheme = AScheme(g.sc)
    _solvable_rec(scheme, "0", g)
    return scheme


def _solvable_rec(scheme: AScheme, node_id: str, g: LieAlgebra):
    cls = classify_lieon(g)
    if cls == "abelian" or isinstance(cls, LieonSpec):
        return
    s_space, t_index = _codim1_ideal(g)
    proj_s = _projection_onto(s_space, Subspace.from_spanning([unit_vector(g.dim, t_index)], g.dim))
    rest_sc = _filtered_bracket(g, proj_s)
    gamma_sc = add(g.sc, rest_sc.scale(-1))
    if rest_sc.is_zero():
        pieces = _gamma_pieces_ambient(g, t_index, s_space)
        scheme.add_children(node_id, [p.sc for p in pieces])
        return
    if gamma_sc.is_zero():
        sub_alg = restrict(g, s_space)
        sub = disassemble_solvable(sub_alg)
        scheme.graft(node_id, sub, transform=lambda sc: extend_structure(sc, s_space))
        return
    gamma_alg = LieAlgebra.validate(gamma_sc)
    rest_alg = LieAlgebra.validate(rest_sc)
    gamma_id, rest_id = scheme.add_children(node_id, [gamma_sc, rest_sc])
    if not isinstance(classify_lieon(gamma_alg), LieonSpec):
        pieces = _gamma_pieces_ambient(gamma_alg, t_index, s_space)
        scheme.add_children(gamma_id, [p.sc for p in pieces])
    cls_rest = classify_lieon(rest_alg)
    if cls_rest != "abelian" and not isinstance(cls_rest, LieonSpec):
        sub = disassemble_solvable(restrict(rest_alg, s_space))
        scheme.graft(rest_id, sub, transform=lambda sc: extend_structure(sc, s_space))


# ---------------------------------------------------------------------------
# multi-involution stripping
# ---------------------------------------------------------------------------

def graded_component_structure(g: LieAlgebra, invs, sigma) -> LieAlgebra:
    """Keep [u,v] on homogeneous u, v exactly when their grades add to sigma."""
    invs = list(invs)
    _check_commuting(invs)
    sigma = tuple(int(s) % 2 for s in sigma)
    if len(sigma) != len(invs):
        raise DimensionMismatchError("grade vector length must match the involution count")
    pieces = _graded_pieces(g, invs)
    n = g.dim
    frame = Matrix([v for _, space in pieces for v in space.vectors()])
    if frame.rows != n:
        raise ClosureError("graded pieces do not span")
    # projections of the standard basis onto each graded piece
    offsets = []
    start = 0
    for grade, space in pieces:
        offsets.append((grade, start, space))
        start += space.dim
    coords = [express_in_rows(frame, unit_vector(n, k)) for k in range(n)]
    proj = {}
    for grade, start, space in offsets:
        cols = []
        for k in range(n):
            img = [ZERO] * n
            for a in range(space.dim):
                c = coords[k][start + a]
                if c != 0:
                    img = [x + c * y for x, y in zip(img, space.vectors()[a])]
            cols.append(tuple(img))
        proj[grade] = Matrix.from_columns(cols)
    entries = {}
    grades = [grade for grade, _, _ in offsets]
    for i in range(n):
        for j in range(i + 1, n):
            acc = {}
            for gz in grades:
                for gt in grades:
                    if tuple((a + b) % 2 for a, b in zip(gz, gt)) != sigma:
                        continue
                    out = g.sc.bracket_vectors(proj[gz].column(i), proj[gt].column(j))
                    for k, c in out.items():
                        acc[k] = acc.get(k, ZERO) + c
            acc = {k: c for k, c in acc.items() if c != 0}
            if acc:
                entries[(i, j)] = acc
    return LieAlgebra.validate(StructureConstants(n, entries))


def _graded_pieces(g: LieAlgebra, invs):
    """Common eigenspace decomposition for commuting involutions, lex-ordered."""
    n = g.dim
    spaces = [((), Subspace.full(n))]
    for inv in invs:
        m = inv.matrix
        nxt = []
        for grade, space in spaces:
            plus = subspace_intersect(space, kernel(m - Matrix.identity(n)))
            minus = subspace_intersect(space, kernel(m + Matrix.identity(n)))
            if plus.dim:
                nxt.append((grade + (0,), plus))
            if minus.dim:
                nxt.append((grade + (1,), minus))
        spaces = nxt
    if sum(s.dim for _, s in spaces) != n:
        raise ClosureError("involutions are not simultaneously diagonalisable over the rationals")
    return spaces


def _check_commuting(invs):
    for a in range(len(invs)):
        for b in range(a + 1, len(invs)):
            if invs[a].matrix * invs[b].matrix != invs[b].matrix * invs[a].matrix:
                raise ClosureError("involutions do not commute")


def multi_involution_strip(g: LieAlgebra, invs):
    """Iterated stripping by commuting involutions.

    Emits the dressing and nilpotent-ideal terms into a scheme (decomposed
    into triadons / routed through the solvable disassembler) and returns the
    residual semidirect term g_(0,...,0) acting on the odd part, which stays
    in the scheme as a leaf.
    """
    invs = list(invs)
    _check_commuting(invs)
    for inv in invs:
        if inv.algebra.sc != g.sc:
            raise ClosureError("involutions must be validated against the input structure")
    n = g.dim
    scheme = AScheme(g.sc)
    node_id = "0"
    residual = g
    h_space = Subspace.full(n)
    u_space = Subspace.zero(n)
    for inv in invs:
        m = inv.matrix
        if not _is_automorphism(residual, m):
            raise ClosureError("involution fails to act on the current residual")
        plus = kernel(m - Matrix.identity(n))
        minus = kernel(m + Matrix.identity(n))
        h0 = subspace_intersect(h_space, plus)
        h1 = subspace_intersect(h_space, minus)
        v0 = subspace_intersect(u_space, plus)
        v1 = subspace_intersect(u_space, minus)
        if h0.dim + h1.dim != h_space.dim or v0.dim + v1.dim != u_space.dim:
            raise ClosureError("involution does not preserve the semidirect splitting")
        s_space = subspace_sum(h0, v0)
        w_space = subspace_sum(h1, v1)
        # stripping lemma step
        proj_w = _projection_onto(w_space, s_space)
        dress_sc = _filtered_bracket(residual, proj_w)
        semi_sc = add(residual.sc, dress_sc.scale(-1))
        # s-tr step inside the semidirect term
        ideal_space = subspace_sum(v0, subspace_sum(h1, v1))
        proj_ideal = _projection_onto(ideal_space, h0)
        semi_alg = LieAlgebra.validate(semi_sc)
        nil_sc = _filtered_bracket(semi_alg, proj_ideal)
        res_sc = add(semi_sc, nil_sc.scale(-1))

        if not dress_sc.is_zero() and not nil_sc.is_zero():
            semi_id, dress_id = scheme.add_children(node_id, [semi_sc, dress_sc])
            _emit_dressing(scheme, dress_id, LieAlgebra.validate(dress_sc), s_space, w_space)
            res_id, nil_id = scheme.add_children(semi_id, [res_sc, nil_sc])
            _emit_solvable(scheme, nil_id, LieAlgebra.validate(nil_sc))
            node_id = res_id
        elif not dress_sc.is_zero():
            res_id, dress_id = scheme.add_children(node_id, [res_sc, dress_sc])
            _emit_dressing(scheme, dress_id, LieAlgebra.validate(dress_sc), s_space, w_space)
            node_id = res_id
        elif not nil_sc.is_zero():
            res_id, nil_id = scheme.add_children(node_id, [res_sc, nil_sc])
            _emit_solvable(scheme, nil_id, LieAlgebra.validate(nil_sc))
            node_id = res_id
        residual = LieAlgebra.validate(res_sc)
        h_space = h0
        u_space = ideal_space
    return scheme, residual


def _emit_dressing(scheme, node_id, dress_alg, w0_space, w_space):
    cls = classify_lieon(dress_alg)
    if cls == "abelian" or isinstance(cls, LieonSpec):
        return
    pieces = _dressing_pieces_of(dress_alg, w0_space, w_space)
    if len(pieces) > 1:
        scheme.add_children(node_id, [p.sc for p in pieces])


def _emit_solvable(scheme, node_id, alg):
    cls = classify_lieon(alg)
    if cls == "abelian" or isinstance(cls, LieonSpec):
        return
    sub = disassemble_solvable(alg)
    scheme.graft(node_id, sub)


# ---------------------------------------------------------------------------
# splitting operators
# ---------------------------------------------------------------------------

def splitting_space(dp: DPair, rho: Representation, with_endomorphisms=False):
    """Basis of S1: operators commuting with rho(s) and anticommuting with rho(W).

    Optionally also returns S0, the endomorphisms of the whole module.
    """
    m = rho.space_dim
    rows = []

    def commute_rows(mat, sign):
        out = []
        for i in range(m):
            for j in range(m):
                row = [ZERO] * (m * m)
                for k in range(m):
                    row[k * m + j] += mat[(i, k)]
                    row[i * m + k] += sign * mat[(k, j)]
                out.append(tuple(row))
        return out

    for v in dp.s.vectors():
        rows.extend(commute_rows(rho.of_vector(v), -1))
    for v in dp.w.vectors():
        rows.extend(commute_rows(rho.of_vector(v), 1))
    sols = kernel(Matrix(rows)) if rows else Subspace.full(m * m)
    s1 = [Matrix([row[i * m:(i + 1) * m] for i in range(m)]) for row in sols.vectors()]
    if not with_endomorphisms:
        return s1
    rows0 = []
    for mat in rho.matrices:
        rows0.extend(commute_rows(mat, -1))
    sols0 = kernel(Matrix(rows0)) if rows0 else Subspace.full(m * m)
    s0 = [Matrix([row[i * m:(i + 1) * m] for i in range(m)]) for row in sols0.vectors()]
    return s1, s0


def dpair_from_h(g: LieAlgebra, h, kappa) -> DPair:
    """First/second d-pair from a regular element of a 3-dim simple subalgebra.

    With A = ad h, the eigenplane decomposition g_0 = ker A,
    g_m = ker(A^2 - (m^2/4) kappa) gives s = even part, W = odd part (first
    d-pair), or the 4m / 4m+2 split when the odd part is empty.
    """
    kappa = rat(kappa)
    from .liecore import ad as ad_matrix

    a = ad_matrix(g, vec(h))
    n = g.dim
    spaces = [kernel(a)]
    covered = spaces[0].dim
    m = 1
    while covered < n and m <= 2 * n:
        coeff0 = -(Fraction(m * m, 4) * kappa)
        spaces.append(poly_kernel(a, [coeff0, 0, 1]))
        covered += spaces[-1].dim
        m += 1
    if covered != n or _union(spaces, n).dim != n:
        raise ClosureError("ad h does not split into eigenlines and eigenplanes over Q")
    evens = [spaces[i] for i in range(0, len(spaces), 2)]
    odds = [spaces[i] for i in range(1, len(spaces), 2)]
    s_space = _union(evens, n)
    w_space = _union(odds, n)
    if w_space.dim > 0:
        return DPair.validate(g, s_space, w_space)
    quads = [spaces[i] for i in range(0, len(spaces), 4)]
    rem = [spaces[i] for i in range(2, len(spaces), 4)]
    s_space = _union(quads, n)
    w_space = _union(rem, n)
    if w_space.dim == 0:
        raise DegeneratePairError("both associated d-pairs are degenerate")
    return DPair.validate(g, s_space, w_space)


def _union(spaces, n):
    total = Subspace.zero(n)
    for s in spaces:
        total = subspace_sum(total, s)
    return total


# ---------------------------------------------------------------------------
# geometric lieon compatibility (the section-6 lemmas)
# ---------------------------------------------------------------------------

def triadon_compatible(a: LieonSpec, b: LieonSpec) -> bool:
    """Centers meeting in >= n-3 dims, or n-4 with both lines inside the meet."""
    _check_kinds(a, b, "triadon", "triadon")
    n = a.ambient_dim
    c12 = subspace_intersect(a.center, b.center)
    if c12.dim >= n - 3:
        return True
    return c12.contains(a.line) and c12.contains(b.line)


def dyon_triadon_compatible(d: LieonSpec, t: LieonSpec) -> bool:
    """Non-generic center intersection, refined at n-3 by Delta in C_d + C_t."""
    _check_kinds(d, t, "dyon", "triadon")
    n = d.ambient_dim
    c12 = subspace_intersect(d.center, t.center)
    if c12.dim == n - 2:
        return True
    if c12.dim == n - 3:
        return subspace_sum(d.center, t.center).contains(d.line)
    return False


def dyon_dyon_compatible(a: LieonSpec, b: LieonSpec) -> bool:
    """Shared center; or lines swapped into the centers; or the n-3 conditions."""
    _check_kinds(a, b, "dyon", "dyon")
    n = a.ambient_dim
    c12 = subspace_intersect(a.center, b.center)
    if c12.dim == n - 2:
        return True
    if c12.dim == n - 3:
        if subspace_sum(a.line, c12) == subspace_sum(b.line, c12):
            return True
        c = subspace_sum(a.center, b.center)
        return c.contains(a.line) and c.contains(b.line)
    return b.center.contains(a.line) and a.center.contains(b.line)


def lieons_compatible(a: LieonSpec, b: LieonSpec) -> bool:
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError("lieons on different spaces")
    if a.kind == "triadon" and b.kind == "triadon":
        return triadon_compatible(a, b)
    if a.kind == "dyon" and b.kind == "dyon":
        return dyon_dyon_compatible(a, b)
    if a.kind == "dyon":
        return dyon_triadon_compatible(a, b)
    return dyon_triadon_compatible(b, a)


def _check_kinds(a, b, ka, kb):
    if a.kind != ka or b.kind != kb:
        raise InputError(f"expected kinds ({ka},{kb}), got ({a.kind},{b.kind})")
    if a.ambient_dim != b.ambient_dim:
        raise DimensionMismatchError("lieons on different spaces")


def assemble_first_level(specs, coeffs) -> LieAlgebra:
    """Sum of scaled lieons, admitted only when all pairs pass the predicates."""
    specs = list(specs)
    coeffs = [rat(c) for c in coeffs]
    if len(specs) != len(coeffs):
        raise DimensionMismatchError("one coefficient per lieon, please")
    for i in range(len(specs)):
        for j in range(i + 1, len(specs)):
            if not lieons_compatible(specs[i], specs[j]):
                raise IncompatibleLieonsError((i, j))
    if not specs:
        raise InputError("nothing to assemble")
    total = StructureConstants.zero(specs[0].ambient_dim)
    for spec, c in zip(specs, coeffs):
        total = add(total, lieon_structure(spec).sc.scale(c))
    return LieAlgebra.validate(total)
