"""Canonical complete disassemblies of the classical Lie algebras.

Each family is built on an explicit basis (orthogonal generators, quadratic
Hamiltonians, matrix units or their symmetric/antisymmetric combinations) and
disassembled along the canonical route:

  so(g): split off the contribution of each diagonal coefficient, then each
         summand into its single-bracket triadons (two steps);
  sp(2n): split the Poisson bi-vector by canonical planes, then strip each
         summand along its Levi part and the long d-pair;
  gl(n): split by the contracted index, then each summand into the diagonal
         action (a Gamma piece) and a dressing part;
  sl(n), u(n), su(n): split off the dressing of the transposition d-pair, then
         grade the semidirect remainder by the basis rescaling weights.

Every scheme is verified (validity and completeness) before it is returned.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import IncompleteSchemeError, InputError
from .exactlin import Matrix, ZERO, ONE, express_in_rows, rat, unit_vector
from .liecore import (
    LieAlgebra,
    LieonSpec,
    StructureConstants,
    add,
    classify_lieon,
)
from .disasm import AScheme, SchemeReport, _pair_bracket, verify_scheme

FAMILIES = ("so", "sp", "gl", "sl", "u", "su")


@dataclass(frozen=True)
class ClassicalPreset:
    """family, size parameter and the diagonal/scaling coefficients."""

    family: str
    n: int
    params: tuple = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise InputError(f"unknown family {self.family!r}")
        if self.n < 1:
            raise InputError("size parameter must be positive")
        if self.family == "so" and self.n < 2:
            raise InputError("so(g) needs n >= 2")
        params = tuple(rat(p) for p in self.params)
        if self.family == "sp":
            if params:
                raise InputError("sp takes no parameters")
        else:
            if not params:
                params = (ONE,) * self.n
            if len(params) != self.n:
                raise InputError(f"need {self.n} coefficients")
            if any(p == 0 for p in params):
                raise InputError("coefficients must be nonzero")
        object.__setattr__(self, "params", params)


# ---------------------------------------------------------------------------
# bases
# ---------------------------------------------------------------------------

def _matrix_unit(n, i, j):
    rows = [[ZERO] * n for _ in range(n)]
    rows[i][j] = ONE
    return Matrix(rows)


def _algebra_from_matrices(mats) -> StructureConstants:
    """Structure constants of a matrix Lie algebra on the given basis."""
    dim = len(mats)
    size = mats[0].rows
    flat = Matrix([tuple(x for row in m.entries for x in row) for m in mats])
    entries = {}
    for a in range(dim):
        for b in range(a + 1, dim):
            c = mats[a].commutator(mats[b])
            coords = express_in_rows(flat, tuple(x for row in c.entries for x in row))
            if coords is None:
                raise InputError("commutator escapes the span of the basis")
            out = {k: x for k, x in enumerate(coords) if x != 0}
            if out:
                entries[(a, b)] = out
    return StructureConstants(dim, entries)


def _so_basis(n, a):
    """Vector fields a_i x_i d_j - a_j x_j d_i as matrices, pairs i<j."""
    labels = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mats = [
        _matrix_unit(n, i, j).scale(a[i]) - _matrix_unit(n, j, i).scale(a[j])
        for (i, j) in labels
    ]
    return labels, mats


def _gl_basis(n, t):
    labels = [(i, j) for i in range(n) for j in range(n)]
    mats = [_matrix_unit(n, i, j).scale(t[i] * t[j]) for (i, j) in labels]
    return labels, mats


def _epsilon_basis(n, t, traceless):
    """The transposition-adapted basis: antisymmetric, symmetric, diagonal parts.

    Labels: ("s", i, j) for E_ij - E_ji (i < j); ("w", i, j) for E_ij + E_ji
    (i < j); diagonals ("d", i) meaning E_ii (full case) or E_ii - E_00
    rescaled (traceless case, i >= 1).
    """
    labels = []
    mats = []
    for i in range(n):
        for j in range(i + 1, n):
            labels.append(("s", i, j))
            mats.append((_matrix_unit(n, i, j) - _matrix_unit(n, j, i)).scale(t[i] * t[j]))
    for i in range(n):
        for j in range(i + 1, n):
            labels.append(("w", i, j))
            mats.append((_matrix_unit(n, i, j) + _matrix_unit(n, j, i)).scale(t[i] * t[j]))
    if traceless:
        for i in range(1, n):
            labels.append(("d", i))
            mats.append(
                (_matrix_unit(n, i, i) - _matrix_unit(n, 0, 0)).scale(t[i] * t[i] * Fraction(1, 2))
            )
    else:
        for i in range(n):
            labels.append(("d", i))
            mats.append(_matrix_unit(n, i, i).scale(t[i] * t[i]))
    return labels, mats


def _label_weight(label, n):
    w = [0] * n
    if isinstance(label[0], str):
        if label[0] == "d":
            w[label[1]] += 2
        else:
            w[label[1]] += 1
            w[label[2]] += 1
    else:
        w[label[0]] += 1
        w[label[1]] += 1
    return tuple(w)


# symplectic: quadratic monomials in p_1..p_n, q_1..q_n
# generator: (kind, index) with kind 0 = p, 1 = q; monomial: sorted generator pair

def _sp_monomials(n):
    gens = [(0, i) for i in range(n)] + [(1, i) for i in range(n)]
    monos = []
    for a in range(len(gens)):
        for b in range(a, len(gens)):
            monos.append((gens[a], gens[b]))
    return monos


def _poisson_bracket_quadratics(m1, m2, i):
    """{m1, m2} through the i-th plane: df/dp_i dg/dq_i - df/dq_i dg/dp_i."""
    out = {}

    def deriv(mono, gen):
        d = {}
        u, v = mono
        if u == gen:
            d[v] = d.get(v, 0) + 1
        if v == gen:
            d[u] = d.get(u, 0) + 1
        return d

    p_i, q_i = (0, i), (1, i)
    for sign, g1, g2 in ((1, p_i, q_i), (-1, q_i, p_i)):
        d1 = deriv(m1, g1)
        d2 = deriv(m2, g2)
        for u, cu in d1.items():
            for v, cv in d2.items():
                key = tuple(sorted((u, v)))
                out[key] = out.get(key, 0) + sign * cu * cv
    return {k: c for k, c in out.items() if c != 0}


def _sp_structure(n):
    monos = _sp_monomials(n)
    index = {m: k for k, m in enumerate(monos)}
    dim = len(monos)
    entries = {}
    per_plane = {}
    for a in range(dim):
        for b in range(a + 1, dim):
            for i in range(n):
                br = _poisson_bracket_quadratics(monos[a], monos[b], i)
                if not br:
                    continue
                out = {index[m]: rat(c) for m, c in br.items()}
                per_plane.setdefault(i, {}).setdefault((a, b), {}).update(
                    {k: per_plane.get(i, {}).get((a, b), {}).get(k, ZERO) + c for k, c in out.items()}
                )
                acc = entries.setdefault((a, b), {})
                for k, c in out.items():
                    acc[k] = acc.get(k, ZERO) + c
    sc = StructureConstants(n * (2 * n + 1), entries)
    planes = {
        i: StructureConstants(dim, tab) for i, tab in per_plane.items()
    }
    return monos, index, sc, planes


# ---------------------------------------------------------------------------
# build
# ---------------------------------------------------------------------------

def build_algebra(preset: ClassicalPreset) -> LieAlgebra:
    family, n = preset.family, preset.n
    if family == "so":
        _, mats = _so_basis(n, preset.params)
        return LieAlgebra.validate(_algebra_from_matrices(mats))
    if family == "gl":
        _, mats = _gl_basis(n, preset.params)
        return LieAlgebra.validate(_algebra_from_matrices(mats))
    if family == "sp":
        _, _, sc, _ = _sp_structure(n)
        return LieAlgebra.validate(sc)
    if family in ("sl", "su"):
        labels, mats = _epsilon_basis(n, preset.params, traceless=True)
    else:  # "u"
        labels, mats = _epsilon_basis(n, preset.params, traceless=False)
    sc = _algebra_from_matrices(mats)
    if family in ("su", "u"):
        sc = _flip_w_part(sc, labels)
        return LieAlgebra.validate(sc)
    return LieAlgebra.validate(sc)


def _flip_w_part(sc: StructureConstants, labels) -> StructureConstants:
    """Negate the brackets of two W-part generators (the a_{-beta} variant)."""
    is_w = [lab[0] in ("w", "d") for lab in labels]
    entries = {}
    for (i, j), out in sc.entries.items():
        if is_w[i] and is_w[j]:
            entries[(i, j)] = {k: -c for k, c in out.items()}
        else:
            entries[(i, j)] = dict(out)
    return StructureConstants(sc.dim, entries)


# ---------------------------------------------------------------------------
# scheme construction helpers
# ---------------------------------------------------------------------------

def _term_pieces(sc: StructureConstants):
    """One structure per (bracket pair, output component), sorted."""
    pieces = []
    for (i, j) in sorted(sc.entries):
        for k in sorted(sc.entries[(i, j)]):
            pieces.append(
                StructureConstants(sc.dim, {(i, j): {k: sc.entries[(i, j)][k]}})
            )
    return pieces


def _weight_split(sc: StructureConstants, weights):
    """Split bracket components by their weight defect 2 * e_alpha."""
    children = {}
    for (i, j), out in sc.entries.items():
        for k, c in out.items():
            delta = tuple(
                wi + wj - wk for wi, wj, wk in zip(weights[i], weights[j], weights[k])
            )
            total = sum(delta)
            if total != 2 or any(d not in (0, 2) for d in delta) or delta.count(2) != 1:
                raise InputError(f"bracket component ({i},{j})->{k} has no pure weight")
            alpha = delta.index(2)
            acc = children.setdefault(alpha, {})
            acc.setdefault((i, j), {})[k] = c
    return {
        alpha: StructureConstants(sc.dim, tab) for alpha, tab in sorted(children.items())
    }


def _filter_entries(sc: StructureConstants, keep):
    """Sub-table of the entries whose (i, j) pair satisfies `keep`."""
    entries = {key: dict(out) for key, out in sc.entries.items() if keep(*key)}
    return StructureConstants(sc.dim, entries)


def _subtract(a: StructureConstants, b: StructureConstants) -> StructureConstants:
    return add(a, b.scale(-1))


def _add_leafy(scheme: AScheme, node_id: str, sc: StructureConstants):
    """Attach term pieces below a node unless it is already a lieon."""
    if isinstance(classify_lieon(LieAlgebra(sc)), LieonSpec):
        return
    pieces = _term_pieces(sc)
    if len(pieces) > 1:
        scheme.add_children(node_id, pieces)


def _rotated_gamma_pieces(sc: StructureConstants, nu_index: int, planes):
    """Two triadons per invariant plane of a diagonalised one-generator action.

    For each plane (a, b) the action is [nu, a] = mu a, [nu, b] = -mu b; in the
    rotated basis (a + b, a - b) it splits into two single-bracket triadons.
    """
    n = sc.dim
    nu = unit_vector(n, nu_index)
    units = [unit_vector(n, k) for k in range(n)]
    pieces = []
    for (a, b) in planes:
        u = tuple(x + y for x, y in zip(units[a], units[b]))
        v = tuple(x - y for x, y in zip(units[a], units[b]))
        rest_units = [units[k] for k in range(n) if k not in (nu_index, a, b)]
        for first, second in ((u, v), (v, u)):
            value = sc.bracket_vectors(nu, first)
            value_t = tuple(value.get(k, ZERO) for k in range(n))
            piece = _pair_bracket(n, nu, first, value_t, [second] + rest_units)
            pieces.append(piece)
    return pieces


# ---------------------------------------------------------------------------
# disassemblers per family
# ---------------------------------------------------------------------------

def disassemble(preset: ClassicalPreset) -> AScheme:
    root = build_algebra(preset)
    if preset.family == "so":
        scheme = _disassemble_so(preset, root)
    elif preset.family == "sp":
        scheme = _disassemble_sp(preset, root)
    elif preset.family in ("gl",):
        scheme = _disassemble_gl(preset, root)
    else:
        scheme = _disassemble_sl_like(preset, root)
    report = verify_scheme(scheme)
    if not report.valid or not report.complete_strict:
        raise InputError(
            f"internal error: canonical {preset.family} scheme failed verification: "
            + "; ".join(report.violations or ["incomplete"])
        )
    return scheme


def _disassemble_so(preset, root: LieAlgebra) -> AScheme:
    n = preset.n
    labels, _ = _so_basis(n, preset.params)
    weights = [_label_weight(lab, n) for lab in labels]
    parts = _weight_split(root.sc, weights)
    scheme = AScheme(root.sc)
    parts_list = [parts[a] for a in sorted(parts)]
    if len(parts_list) < 2:
        _add_leafy(scheme, "0", root.sc)
        return scheme
    if all(len(_term_pieces(p)) == 1 for p in parts_list):
        # n = 3: group the last two summands to keep a two-step scheme
        head, tail = parts_list[0], parts_list[1:]
        grouped = tail[0]
        for p in tail[1:]:
            grouped = add(grouped, p)
        ids = scheme.add_children("0", [head, grouped])
        scheme.add_children(ids[1], tail)
        return scheme
    ids = scheme.add_children("0", parts_list)
    for node_id, part in zip(ids, parts_list):
        _add_leafy(scheme, node_id, part)
    return scheme


def _disassemble_gl(preset, root: LieAlgebra) -> AScheme:
    n = preset.n
    labels, _ = _gl_basis(n, preset.params)
    index = {lab: k for k, lab in enumerate(labels)}
    weights = [_label_weight(lab, n) for lab in labels]
    parts = _weight_split(root.sc, weights)
    scheme = AScheme(root.sc)
    ids = scheme.add_children("0", [parts[a] for a in sorted(parts)])
    for alpha, node_id in zip(sorted(parts), ids):
        part = parts[alpha]
        diag = index[(alpha, alpha)]
        gamma_sc = _filter_entries(part, lambda i, j: diag in (i, j))
        dress_sc = _subtract(part, gamma_sc)
        gamma_id, dress_id = scheme.add_children(node_id, [gamma_sc, dress_sc])
        planes = [
            (index[(i, alpha)], index[(alpha, i)]) for i in range(n) if i != alpha
        ]
        pieces = _rotated_gamma_pieces(gamma_sc, diag, planes)
        if len(pieces) > 1:
            scheme.add_children(gamma_id, pieces)
        _add_leafy(scheme, dress_id, dress_sc)
    return scheme


def _disassemble_sl_like(preset, root: LieAlgebra) -> AScheme:
    """Common route for sl, u and su: dressing split, then the weight grading."""
    n = preset.n
    traceless = preset.family in ("sl", "su")
    labels, _ = _epsilon_basis(n, preset.params, traceless=traceless)
    index = {lab: k for k, lab in enumerate(labels)}
    weights = [_label_weight(lab, n) for lab in labels]
    is_w = [lab[0] in ("w", "d") for lab in labels]
    scheme = AScheme(root.sc)
    ab_sc = _filter_entries(root.sc, lambda i, j: is_w[i] and is_w[j])
    sw_sc = _subtract(root.sc, ab_sc)
    sw_id, ab_id = scheme.add_children("0", [sw_sc, ab_sc])
    _add_leafy(scheme, ab_id, ab_sc)
    parts = _weight_split(sw_sc, weights)
    part_ids = scheme.add_children(sw_id, [parts[a] for a in sorted(parts)])
    for alpha, node_id in zip(sorted(parts), part_ids):
        part = parts[alpha]
        if traceless:
            _split_sl_summand(scheme, node_id, part, index, n, alpha)
        else:
            _split_u_summand(scheme, node_id, part, index, labels, n, alpha)
    return scheme


def _split_u_summand(scheme, node_id, part, index, labels, n, alpha):
    """Q_alpha = (so x so part) + (terms through the diagonal) + (the rest)."""
    is_s = [lab[0] == "s" for lab in labels]
    diag = index[("d", alpha)]
    q1 = _filter_entries(part, lambda i, j: is_s[i] and is_s[j])
    q3 = _filter_entries(part, lambda i, j: diag in (i, j))
    q2 = _subtract(part, add(q1, q3))
    groups = [g for g in (q1, q2, q3) if not g.is_zero()]
    if len(groups) < 2:
        _add_leafy(scheme, node_id, part)
        return
    ids = scheme.add_children(node_id, groups)
    for gid, g in zip(ids, groups):
        _add_leafy(scheme, gid, g)


def _split_sl_summand(scheme, node_id, part, index, n, alpha):
    """Q_j resolves into Q_j', Q_j'' and individually compatible triadons.

    Q_j'' collects the terms through the diagonal element and through the
    (1, j) symmetric generator; Q_j' collects the terms through the (1, j)
    antisymmetric generator together with every remaining term that clashes
    with Q_j'' (for n >= 4 the generic terms consuming a w_{jk} coordinate do;
    their brackets against Q_j'' cancel only in the grouped sums).
    """
    if alpha == 0:
        _add_leafy(scheme, node_id, part)
        return
    from .liecore import jacobiator

    s_1a = index[("s", 0, alpha)]
    w_1a = index[("w", 0, alpha)]
    d_a = index[("d", alpha)]
    terms = _term_pieces(part)
    prime, second, rest = [], [], []
    for piece in terms:
        (i, j), = piece.entries.keys()
        if s_1a in (i, j):
            prime.append(piece)
        elif d_a in (i, j) or w_1a in (i, j):
            second.append(piece)
        else:
            rest.append(piece)
    singles = []
    for piece in rest:
        if any(not jacobiator(add(piece, s)).is_zero() for s in second):
            prime.append(piece)
        else:
            singles.append(piece)

    def total(pieces):
        acc = StructureConstants.zero(part.dim)
        for p in pieces:
            acc = add(acc, p)
        return acc

    children = []
    grouped = []
    for bunch in (prime, second):
        if len(bunch) == 1:
            singles.extend(bunch)
        elif bunch:
            children.append(total(bunch))
            grouped.append(bunch)
    children.extend(singles)
    if len(children) < 2:
        _add_leafy(scheme, node_id, part)
        return
    ids = scheme.add_children(node_id, children)
    for gid, bunch in zip(ids[: len(grouped)], grouped):
        scheme.add_children(gid, bunch)


# -- symplectic -------------------------------------------------------------

def _disassemble_sp(preset, root: LieAlgebra) -> AScheme:
    n = preset.n
    monos, index, sc, planes = _sp_structure(n)
    scheme = AScheme(root.sc)
    if n == 1:
        _sp_summand(scheme, "0", planes[0], index, monos, 0, n)
        return scheme
    ids = scheme.add_children("0", [planes[i] for i in range(n)])
    for i, node_id in enumerate(ids):
        _sp_summand(scheme, node_id, planes[i], index, monos, i, n)
    return scheme


def _sp_summand(scheme, node_id, part, index, monos, i, n):
    p_i, q_i = (0, i), (1, i)
    s_mono = {index[(p_i, p_i)], index[tuple(sorted((p_i, q_i)))], index[(q_i, q_i)]}
    pp, pq, qq = index[(p_i, p_i)], index[tuple(sorted((p_i, q_i)))], index[(q_i, q_i)]

    def touches(m_idx):
        u, v = monos[m_idx]
        return u in (p_i, q_i) or v in (p_i, q_i)

    # Levi strip: the radical bracket (both sources outside the s-triple)
    b_sc = _filter_entries(part, lambda a, b: a not in s_mono and b not in s_mono)
    a_sc = _subtract(part, b_sc)
    cur = node_id
    if not b_sc.is_zero():
        a_id, b_id = scheme.add_children(cur, [a_sc, b_sc])
        _add_leafy(scheme, b_id, b_sc)
        cur = a_id

    # long d-pair dressing: both sources in {p^2, q^2, V_q, c}
    def in_w(m_idx):
        if m_idx in (pp, qq):
            return True
        if m_idx == pq:
            return False
        u, v = monos[m_idx]
        if p_i in (u, v):
            return False
        return True  # q_i r, or no i at all

    d_sc = _filter_entries(a_sc, lambda a, b: in_w(a) and in_w(b))
    a2_sc = _subtract(a_sc, d_sc)
    if not d_sc.is_zero():
        a2_id, d_id = scheme.add_children(cur, [a2_sc, d_sc])
        _add_leafy(scheme, d_id, d_sc)
        cur = a2_id

    # final semidirect piece: the p_i q_i action vs the nilpotent ideal
    f_sc = _filter_entries(a2_sc, lambda a, b: a != pq and b != pq)
    e_sc = _subtract(a2_sc, f_sc)
    if not f_sc.is_zero():
        e_id, f_id = scheme.add_children(cur, [e_sc, f_sc])
        f1_sc = _filter_entries(f_sc, lambda a, b: qq in (a, b))
        f2_sc = _subtract(f_sc, f1_sc)
        if f1_sc.is_zero() or f2_sc.is_zero():
            _add_leafy(scheme, f_id, f_sc)
        else:
            f1_id, f2_id = scheme.add_children(f_id, [f1_sc, f2_sc])
            _add_leafy(scheme, f1_id, f1_sc)
            _add_leafy(scheme, f2_id, f2_sc)
        cur = e_id

    # E: p_i q_i acting diagonally on (p^2, q^2) and the (p_i r, q_i r) planes
    planes = [(pp, qq)]
    for kind in (0, 1):
        for j in range(n):
            if j == i:
                continue
            r = (kind, j)
            a_idx = index[tuple(sorted((p_i, r)))]
            b_idx = index[tuple(sorted((q_i, r)))]
            planes.append((a_idx, b_idx))
    pieces = _rotated_gamma_pieces(e_sc, pq, planes)
    pieces = [p for p in pieces if not p.is_zero()]
    if len(pieces) > 1:
        scheme.add_children(cur, pieces)


# ---------------------------------------------------------------------------
# census
# ---------------------------------------------------------------------------

def lieon_census(scheme: AScheme) -> dict:
    """Tally the end terms of a complete scheme."""
    report = verify_scheme(scheme)
    if not report.valid or not report.complete:
        raise IncompleteSchemeError(
            "census requires a valid scheme whose end terms are all lieons"
        )
    return {"dyons": report.dyons, "triadons": report.triadons, "steps": report.steps}
