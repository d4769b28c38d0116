"""Generator catalogs for classical groups and the orbit machinery.

Elements are triples (mat, frob, flip): an invertible matrix, a field
automorphism exponent, and a graph-flip bit.  The normative definition of
composition is the action on subspaces: the Frobenius twist is applied
first, then the flip (dot-product annihilator), then the matrix.

Catalogued generating sets exist for SL/GL, Sp, SU/GU, GO and Omega;
every generator's form preservation is checked at construction, and the
test suite certifies generation itself against the brute-force oracle and
counting predictions (the catalogs are validated, never assumed).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Optional, Sequence

import numpy as np

from . import orders
from .forms import ClassicalSpace
from .gf import Field
from .linalg import (
    BudgetExceeded,
    Subspace,
    annihilator_batch,
    apply_element,
    decode,
    decode_batch,
    encode_batch,
    frob_mat,
    mat_inv,
    mat_mul,
    rref_batch,
)

FAMILIES = ("SL", "GL", "Sp", "SU", "GU", "GO", "Omega")


class GroupElement:
    """(mat, frob, flip); equality and hashing are projective (the key is
    the matrix scaled so its first nonzero entry is 1), but the exact
    matrix is kept, so actions that are not scale-invariant (quadratic
    forms) stay correct."""

    __slots__ = ("field", "mat", "frob", "flip", "_key")

    def __init__(self, field: Field, mat, frob: int = 0, flip: bool = False):
        mat = np.array(mat, dtype=np.int64, copy=True)
        n = mat.shape[0]
        if mat.shape != (n, n):
            raise ValueError("square matrix required")
        flat = mat.reshape(-1)
        nz = np.nonzero(flat)[0]
        if nz.size == 0:
            raise ValueError("zero matrix is not a group element")
        lead = int(flat[nz[0]])
        norm = mat if lead == 1 else field.tables[1][field.inv(lead), mat]
        mat.setflags(write=False)
        self.field = field
        self.mat = mat
        self.frob = frob % field.e
        self.flip = bool(flip)
        self._key = (norm.tobytes(), self.frob, self.flip)

    @property
    def key(self):
        return self._key

    def is_identity(self) -> bool:
        n = self.mat.shape[0]
        return (
            self.frob == 0
            and not self.flip
            and np.array_equal(self.mat, np.eye(n, dtype=np.int64))
        )

    def __eq__(self, other):
        return isinstance(other, GroupElement) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        extra = (f", frob={self.frob}" if self.frob else "") + (
            ", flip" if self.flip else ""
        )
        return f"GroupElement({self.mat.tolist()}{extra})"


def identity_element(F: Field, n: int) -> GroupElement:
    return GroupElement(F, np.eye(n, dtype=np.int64))


def _inv_transpose(F: Field, M: np.ndarray) -> np.ndarray:
    return mat_inv(F, M).T.copy()


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """The element acting as g1 followed by g2."""
    F = g1.field
    m1 = frob_mat(F, g1.mat, g2.frob)
    if g2.flip:
        m1 = _inv_transpose(F, m1)
    mat = mat_mul(F, m1, g2.mat)
    return GroupElement(F, mat, g1.frob + g2.frob, g1.flip ^ g2.flip)


def inverse(g: GroupElement) -> GroupElement:
    F = g.field
    f_inv = (-g.frob) % F.e
    m = frob_mat(F, g.mat, f_inv)
    if g.flip:
        m = _inv_transpose(F, m)
    return GroupElement(F, mat_inv(F, m), f_inv, g.flip)


def word_to_element(gens: Sequence[GroupElement], word: Iterable[int]) -> GroupElement:
    out = None
    for gi in word:
        out = gens[gi] if out is None else compose(out, gens[gi])
    if out is None:
        g0 = gens[0]
        return identity_element(g0.field, g0.mat.shape[0])
    return out


def det(F: Field, M: np.ndarray) -> int:
    A = np.array(M, dtype=np.int64, copy=True)
    n = A.shape[0]
    ADD, MUL, NEG, INV = F.tables
    d = 1
    r = 0
    for col in range(n):
        nz = np.nonzero(A[r:, col])[0]
        if nz.size == 0:
            return 0
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
            d = F.neg(d)
        d = F.mul(d, int(A[r, col]))
        below = np.nonzero(A[r + 1 :, col])[0] + r + 1
        if below.size:
            factors = NEG[MUL[A[below, col], INV[A[r, col]]]]
            A[below] = ADD[A[below], MUL[factors[:, None], A[r][None, :]]]
        r += 1
    return d


# -- generator catalogs --


@dataclass
class GeneratorSet:
    family: str
    space: ClassicalSpace
    extensions: tuple
    gens: list
    names: list

    def __len__(self):
        return len(self.gens)

    def gens_hash(self) -> str:
        h = hashlib.sha256()
        for g in self.gens:
            h.update(g.mat.tobytes())
            h.update(bytes([g.frob, g.flip]))
        return h.hexdigest()[:16]

    def key(self) -> str:
        return json.dumps(
            {
                "space": json.loads(self.space.key()),
                "family": self.family,
                "extensions": list(self.extensions),
                "gens": self.gens_hash(),
            },
            sort_keys=True,
        )


def _verify_isometry(S: ClassicalSpace, mat: np.ndarray, name: str):
    F = S.field
    n = S.n
    if S.kind == "linear":
        return
    got = S.form_matrix(mat, mat)
    if not np.array_equal(got, S.gram):
        raise AssertionError(f"generator {name} does not preserve the form")
    if S.kind == "quadratic":
        if not np.array_equal(S.q_values(mat), S.qdiag):
            raise AssertionError(f"generator {name} does not preserve Q")


def _monomials(F: Field) -> list[int]:
    """An F_p-basis of F: the monomial encodings p^t."""
    return [F.p**t for t in range(F.e)]


def _trace_zero_basis(F: Field) -> list[int]:
    """F_p-basis of {a : a + conj(a) = 0} in a quadratic-extension field."""
    zero_tr = [a for a in range(F.q) if F.add(a, F.conj(a)) == 0]
    basis: list[int] = []
    chosen = {0}
    for a in zero_tr:
        if a == 0 or a in chosen:
            continue
        basis.append(a)
        # close chosen under F_p-span of basis
        new = set()
        for c in range(1, F.p):
            scaled = F.mul(c % F.q, a)
            for b in chosen:
                new.add(F.add(b, scaled))
        chosen |= new
    return basis


def _transvection(S: ClassicalSpace, u: np.ndarray, lam: int) -> np.ndarray:
    """v -> v + lam * f(v, u) * u (symplectic or unitary)."""
    F = S.field
    ADD, MUL, _, _ = F.tables
    fv = S.form_matrix(np.eye(S.n, dtype=np.int64), u[None, :])[:, 0]
    return ADD[np.eye(S.n, dtype=np.int64), MUL[MUL[lam, fv][:, None], u[None, :]]]


def _reflection(S: ClassicalSpace, v: np.ndarray) -> np.ndarray:
    """x -> x - (f(x, v)/Q(v)) v; a reflection for q odd, an orthogonal
    transvection for q even (where - is +)."""
    F = S.field
    ADD, MUL, NEG, _ = F.tables
    c = F.inv(S.eval_Q(v))
    fv = S.form_matrix(np.eye(S.n, dtype=np.int64), v[None, :])[:, 0]
    coeff = NEG[MUL[fv, c]]
    return ADD[np.eye(S.n, dtype=np.int64), MUL[coeff[:, None], v[None, :]]]


def _siegel(S: ClassicalSpace, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """x -> x + f(x,v)u - f(x,u)v - Q(v)f(x,u)u, u singular, v in u-perp."""
    F = S.field
    ADD, MUL, NEG, _ = F.tables
    I = np.eye(S.n, dtype=np.int64)
    fu = S.form_matrix(I, u[None, :])[:, 0]
    fv = S.form_matrix(I, v[None, :])[:, 0]
    Qv = S.eval_Q(v)
    out = ADD[I, MUL[fv[:, None], u[None, :]]]
    out = ADD[out, MUL[NEG[fu][:, None], v[None, :]]]
    out = ADD[out, MUL[MUL[NEG[Qv], fu][:, None], u[None, :]]]
    return out


def _orthonormal_unitary_frame(S: ClassicalSpace) -> np.ndarray:
    """Rows: an orthonormal basis of a unitary space (f(o_i, o_j) = delta)."""
    F = S.field
    chi = next(c for c in range(F.q) if F.add(c, F.conj(c)) == 1)
    a = next(
        (t for t in range(1, F.q) if F.mul(t, F.conj(t)) == F.neg(1)), None
    )
    rows = []
    for i in range(1, S.m + 1):
        rows.append(S.vec(S.e(i), (chi, S.f(i))))
        if F.p == 2:
            # e - conj(chi) f has norm -1 = 1 already
            rows.append(S.vec(S.e(i), (F.conj(chi), S.f(i))))
        else:
            w = S.vec(S.e(i), (F.neg(F.conj(chi)), S.f(i)))
            rows.append(F.tables[1][a, w])
    if S.n % 2:
        rows.append(S.x())
    O = np.array(rows, dtype=np.int64)
    assert np.array_equal(
        S.form_matrix(O, O), np.eye(S.n, dtype=np.int64)
    ), "orthonormal frame construction failed"
    return O


def _u32_supplement(
    S: ClassicalSpace, det_one: bool, current: list[np.ndarray]
) -> list[np.ndarray]:
    """Minimal extra generators for U_3(2), found by exhausting the group.

    Enumerates every isometry of the 3-dimensional hermitian space over
    GF(4) (648 matrices) and greedily adds elements until the projective
    closure of the catalog equals the full (special) unitary group.
    """
    F = S.field
    MUL = F.tables[1]

    def pkey(M: np.ndarray) -> bytes:
        flat = M.reshape(-1)
        lead = int(flat[np.nonzero(flat)[0][0]])
        norm = M if lead == 1 else MUL[F.inv(lead), M]
        return norm.tobytes()

    def closure(mats: list[np.ndarray]) -> dict:
        seen = {pkey(np.eye(3, dtype=np.int64)): np.eye(3, dtype=np.int64)}
        frontier = list(seen.values())
        while frontier:
            nxt = []
            for A in frontier:
                for B in mats:
                    C = mat_mul(F, A, B)
                    k = pkey(C)
                    if k not in seen:
                        seen[k] = C
                        nxt.append(C)
            frontier = nxt
        return seen

    vecs = S.space.all_vectors()[1:]
    gram = S.form_matrix(vecs, vecs)
    norms = gram.diagonal()
    pe, pf, px = S._labels["e1"], S._labels["f1"], S._labels["x"]
    iso = np.nonzero(norms == 0)[0]
    group = []
    for i in iso:
        for j in iso[gram[iso, i] == S.gram[pf, pe]]:
            ok = (
                (norms == S.gram[px, px])
                & (gram[:, i] == S.gram[px, pe])
                & (gram[:, j] == S.gram[px, pf])
            )
            for k in np.nonzero(ok)[0]:
                M = np.zeros((3, 3), dtype=np.int64)
                M[pe], M[pf], M[px] = vecs[i], vecs[j], vecs[k]
                if not np.array_equal(S.form_matrix(M, M), S.gram):
                    continue
                if not det_one or det(F, M) == 1:
                    group.append(M)
    target = len({pkey(M) for M in group})
    gens = list(current)
    have = closure(gens)
    out = []
    for M in group:
        if len(have) == target:
            break
        if pkey(M) not in have:
            gens.append(M)
            out.append(M)
            have = closure(gens)
    assert len(have) == target, "U_3(2) supplement failed to generate"
    return out


def _frame_conjugates(F: Field, O: np.ndarray, locals_: list) -> list[np.ndarray]:
    """Pull elements given in frame coordinates back to standard coordinates."""
    Oinv = mat_inv(F, O)
    return [mat_mul(F, mat_mul(F, Oinv, D), O) for D in locals_]


def _nonsingular_candidates(S: ClassicalSpace) -> list[np.ndarray]:
    """Deterministic vector pool for reflection/transvection catalogs."""
    F = S.field
    n = S.n
    I = np.eye(n, dtype=np.int64)
    cands = [I[i] for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            for c in range(1, F.q):
                # scaled sums cover every scalar, hence both square classes
                cands.append(S.vec(I[i], (c, I[j])))
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                cands.append(S.vec(I[i], I[j], I[k]))
    out = []
    seen = set()
    for v in cands:
        if S.eval_Q(v) == 0:
            continue
        key = v.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _plane_permutation_isometries(S: ClassicalSpace) -> list[np.ndarray]:
    """Permutation matrices swapping e_i <-> f_i and hyperbolic planes."""
    out = []
    n = S.n
    if not S.has_label("e1"):
        return out
    m = S.m
    idx = {f"e{i}": S._labels[f"e{i}"] for i in range(1, m + 1)}
    idx.update({f"f{i}": S._labels[f"f{i}"] for i in range(1, m + 1)})
    P = np.eye(n, dtype=np.int64)
    P[[idx["e1"], idx["f1"]]] = P[[idx["f1"], idx["e1"]]]
    out.append(P)
    for i in range(1, m):
        P = np.eye(n, dtype=np.int64)
        a, b = idx[f"e{i}"], idx[f"e{i+1}"]
        c, d = idx[f"f{i}"], idx[f"f{i+1}"]
        P[[a, b]] = P[[b, a]]
        P[[c, d]] = P[[d, c]]
        out.append(P)
    return out


def generator_catalog(
    S: ClassicalSpace, family: str, extensions: tuple = ()
) -> GeneratorSet:
    """Catalogued generating set; every matrix is verified to preserve the
    declared form at construction."""
    if family not in FAMILIES:
        raise ValueError(f"unsupported family {family!r}")
    F = S.field
    n = S.n
    I = np.eye(n, dtype=np.int64)
    mats: list[tuple[str, np.ndarray]] = []

    if family in ("SL", "GL"):
        if S.kind != "linear":
            raise ValueError(f"{family} acts on a linear space")
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                for c in _monomials(F):
                    M = I.copy()
                    M[i, j] = c
                    mats.append((f"t[{i},{j};{c}]", M))
        if family == "GL" and F.q > 2:
            D = I.copy()
            D[0, 0] = F.generator
            mats.append(("torus", D))
    elif family == "Sp":
        if S.kind != "symplectic":
            raise ValueError("Sp acts on a symplectic space")
        pool = [I[i] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                pool.append(S.vec(I[i], I[j]))
        for u in pool:
            for lam in _monomials(F):
                M = _transvection(S, u, lam)
                mats.append((f"T[{u.tolist()};{lam}]", M))
    elif family in ("SU", "GU"):
        if S.kind != "unitary":
            raise ValueError(f"{family} acts on a unitary space")
        cands = [I[i] for i in range(n)]
        for i in range(n):
            for j in range(i + 1, n):
                for c in range(1, F.q):
                    cands.append(S.vec(I[i], (c, I[j])))
        if n % 2:
            # isotropic vectors meeting the anisotropic coordinate x
            chi = next(c for c in range(F.q) if F.add(c, F.conj(c)) == 1)
            gamma = F.neg(chi)  # trace(gamma) = -1 = -N(1)
            for i in range(1, S.m + 1):
                cands.append(S.vec(S.e(i), S.x(), (gamma, S.f(i))))
        pool = [v for v in cands if S.eval_form(v, v) == 0 and v.any()]
        tz = _trace_zero_basis(F)
        for u in pool:
            for lam in tz:
                M = _transvection(S, u, lam)
                mats.append((f"T[{u.tolist()};{lam}]", M))
        O = _orthonormal_unitary_frame(S)
        q0 = S.subfield.q
        alpha = F.pow(F.generator, q0 - 1)  # generates the norm-1 group
        locals_ = []
        D = I.copy()
        D[0, 0] = alpha
        D[1, 1] = F.inv(alpha)
        locals_.append(D)
        for i in range(n - 1):  # signed adjacent swaps, det 1
            P = I.copy()
            P[i, i] = P[i + 1, i + 1] = 0
            P[i, i + 1] = 1
            P[i + 1, i] = F.neg(1)
            locals_.append(P)
        if family == "GU" and q0 + 1 > 1:
            D = I.copy()
            D[0, 0] = alpha
            locals_.append(D)
        for li, M in enumerate(_frame_conjugates(F, O, locals_)):
            mats.append((f"frame[{li}]", M))
        if q0 == 2 and n == 3:
            # U_3(2) is not generated by its isotropic transvections (the
            # classical exception); the group is tiny, so enumerate all
            # isometries and adjoin a minimal supplement
            for pi, M in enumerate(
                _u32_supplement(S, family == "SU", [m for _, m in mats])
            ):
                mats.append((f"extra[{pi}]", M))
    elif family == "GO":
        if S.kind != "quadratic":
            raise ValueError("GO acts on a quadratic space")
        for v in _nonsingular_candidates(S):
            mats.append((f"r[{v.tolist()}]", _reflection(S, v)))
        for pi, P in enumerate(_plane_permutation_isometries(S)):
            mats.append((f"perm[{pi}]", P))
    elif family == "Omega":
        if S.kind != "quadratic":
            raise ValueError("Omega acts on a quadratic space")
        if S.witt_index() < 1:
            raise ValueError("Omega catalog needs Witt index >= 1")
        sing = [
            I[i]
            for i in range(n)
            if S.eval_Q(I[i]) == 0
        ]
        for u in sing:
            perp = S.perp(Subspace(S.space, u[None, :]))
            for row in perp.basis:
                for lam in _monomials(F):
                    v = F.tables[1][lam, row]
                    M = _siegel(S, u, v)
                    if np.array_equal(M, I):
                        continue
                    mats.append((f"E[{u.tolist()};{v.tolist()}]", M))

    gens: list[GroupElement] = []
    names: list[str] = []
    seen = set()
    for name, M in mats:
        _verify_isometry(S, M, name)
        if family == "SL" and det(F, M) != 1:
            raise AssertionError(f"generator {name} has determinant != 1")
        g = GroupElement(F, M)
        if g.is_identity() or g.key in seen:
            continue
        seen.add(g.key)
        gens.append(g)
        names.append(name)

    extensions = tuple(extensions)
    for ext in extensions:
        if ext == "field_auto":
            if F.e > 1:
                if S.kind != "linear":
                    if not np.array_equal(frob_mat(F, S.gram, 1), S.gram) or (
                        S.qdiag is not None
                        and not np.array_equal(frob_mat(F, S.qdiag, 1), S.qdiag)
                    ):
                        raise ValueError(
                            "Frobenius does not preserve this form literally"
                        )
                gens.append(GroupElement(F, I, frob=1))
                names.append("frobenius")
        elif ext == "graph_auto":
            if S.kind != "linear":
                raise ValueError("the graph flip is a linear-case extension")
            gens.append(GroupElement(F, I, flip=True))
            names.append("flip")
        else:
            raise ValueError(f"unknown extension {ext!r}")
    return GeneratorSet(family, S, extensions, gens, names)


def expected_order(family: str, n: int, q: int, eps: str = "") -> int:
    """Classical order formula for the catalogued matrix group."""
    if family == "SL":
        return orders.order_sl(n, q)
    if family == "GL":
        return orders.order_gl(n, q)
    if family == "Sp":
        return orders.order_sp(n, q)
    if family in ("SU", "GU"):
        q0 = int(round(q**0.5))
        if q0 * q0 != q:
            raise ValueError("unitary ambient field must be a square")
        return orders.order_su(n, q0) if family == "SU" else orders.order_gu(n, q0)
    if family == "GO":
        return orders.order_go(n, q, eps)
    if family == "Omega":
        return orders.order_omega(n, q, eps)
    raise ValueError(f"unsupported family {family!r}")


# -- vectorized application of elements to code arrays --

MAT_CACHE_LIMIT = 64


def apply_codes(
    S: ClassicalSpace, codes: np.ndarray, g: GroupElement
) -> np.ndarray:
    """Images of an array of subspace codes under g, as codes."""
    F = S.field
    space = S.space
    n = space.n
    codes = np.asarray(codes, dtype=np.int64)
    out = np.empty(len(codes), dtype=np.int64)
    ks = codes % (n + 1)
    for k in np.unique(ks):
        sel = np.nonzero(ks == k)[0]
        mats = decode_batch(space, codes[sel], int(k))
        if g.frob % F.e:
            mats = frob_mat(F, mats, g.frob)
        kk = int(k)
        if g.flip:
            mats = annihilator_batch(F, rref_batch(F, mats), )
            kk = n - kk
        if kk == 0:
            out[sel] = encode_batch(space, mats)
            continue
        imgs = mat_mul(F, mats.reshape(-1, n), g.mat).reshape(-1, kk, n)
        imgs = rref_batch(F, imgs)
        out[sel] = encode_batch(space, imgs)
    return out


def permutation_of(
    S: ClassicalSpace, sorted_codes: np.ndarray, g: GroupElement
) -> np.ndarray:
    """Index permutation induced by g on a closed, sorted code array."""
    imgs = apply_codes(S, sorted_codes, g)
    pos = np.searchsorted(sorted_codes, imgs)
    if (pos >= len(sorted_codes)).any() or (sorted_codes[pos] != imgs).any():
        raise ValueError("code set is not closed under the element")
    return pos


# -- orbit machinery --


class OrbitTable:
    """Complete orbit of a base subspace with BFS transversal words.

    Points are listed layer by layer, each layer in code order; the code
    array plus a parallel (parent, generator) array reconstructs words.
    """

    def __init__(self, gens: GeneratorSet, base_code: int, points, parents, via):
        self.gens = gens
        self.base_code = base_code
        self.points = np.asarray(points, dtype=np.int64)
        self.parents = np.asarray(parents, dtype=np.int64)
        self.via = np.asarray(via, dtype=np.int64)
        order = np.argsort(self.points, kind="stable")
        self.sorted_codes = self.points[order]
        self._sorted_to_bfs = order

    @property
    def size(self) -> int:
        return len(self.points)

    def bfs_index_of_sorted(self, si: int) -> int:
        return int(self._sorted_to_bfs[si])

    def index_of(self, code: int) -> int:
        """BFS-order index of a code; raises if absent."""
        si = int(np.searchsorted(self.sorted_codes, code))
        if si >= len(self.sorted_codes) or self.sorted_codes[si] != code:
            raise KeyError(f"code {code} not in orbit")
        return int(self._sorted_to_bfs[si])

    def __contains__(self, code: int) -> bool:
        si = np.searchsorted(self.sorted_codes, code)
        return si < len(self.sorted_codes) and self.sorted_codes[si] == code

    def word(self, i: int) -> list[int]:
        out = []
        while self.parents[i] >= 0:
            out.append(int(self.via[i]))
            i = int(self.parents[i])
        out.reverse()
        return out

    def element(self, i: int) -> GroupElement:
        return word_to_element(self.gens.gens, self.word(i))


def orbit_bfs(
    gens: GeneratorSet, base: Subspace, budget: int = 10_000_000
) -> OrbitTable:
    """Complete orbit with transversal words; deterministic point order
    (BFS layer, then code order within the layer)."""
    S = gens.space
    points = [base.code]
    parents = [-1]
    via = [-1]
    seen_sorted = np.array([base.code], dtype=np.int64)
    frontier_idx = np.array([0], dtype=np.int64)
    while frontier_idx.size:
        frontier_codes = np.array([points[i] for i in frontier_idx], dtype=np.int64)
        layer: dict[int, tuple[int, int]] = {}
        for gi, g in enumerate(gens.gens):
            imgs = apply_codes(S, frontier_codes, g)
            pos = np.searchsorted(seen_sorted, imgs)
            pos = np.clip(pos, 0, len(seen_sorted) - 1)
            fresh = seen_sorted[pos] != imgs
            for local_i in np.nonzero(fresh)[0]:
                code = int(imgs[local_i])
                if code not in layer:
                    layer[code] = (int(frontier_idx[local_i]), gi)
        if not layer:
            break
        new_codes = sorted(layer)
        start = len(points)
        if start + len(new_codes) > budget:
            raise BudgetExceeded(
                f"orbit exceeded the budget of {budget} points"
            )
        for code in new_codes:
            par, gi = layer[code]
            points.append(code)
            parents.append(par)
            via.append(gi)
        frontier_idx = np.arange(start, len(points), dtype=np.int64)
        seen_sorted = np.sort(
            np.concatenate([seen_sorted, np.array(new_codes, dtype=np.int64)])
        )
    return OrbitTable(gens, base.code, points, parents, via)


def schreier_sample_stabilizer(
    tab: OrbitTable, sample_size: int, seed: int
) -> list[GroupElement]:
    """Distinct Schreier elements u_x g u_{xg}^{-1} fixing the base point,
    drawn with a seeded RNG; deterministic for a fixed seed."""
    import random

    S = tab.gens.space
    gens = tab.gens.gens
    rng = random.Random(seed)
    out: list[GroupElement] = []
    seen = set()
    # precompute inverse transversal elements lazily
    elem_cache: dict[int, GroupElement] = {}

    def u(i: int) -> GroupElement:
        if i not in elem_cache:
            elem_cache[i] = tab.element(i)
        return elem_cache[i]

    for _ in range(sample_size):
        xi = rng.randrange(tab.size)
        gi = rng.randrange(len(gens))
        g = gens[gi]
        x_code = int(tab.points[xi])
        img_code = int(apply_codes(S, np.array([x_code]), g)[0])
        yi = tab.index_of(img_code)
        h = compose(compose(u(xi), g), inverse(u(yi)))
        # sanity: h must fix the base point
        base = decode(S.space, tab.base_code)
        if apply_element(base, h).code != tab.base_code:
            raise AssertionError("Schreier element does not fix the base")
        if h.is_identity() or h.key in seen:
            continue
        seen.add(h.key)
        out.append(h)
    return out


def suborbits(
    S: ClassicalSpace, stab_elems: Sequence[GroupElement], sorted_codes: np.ndarray,
    base_code: int,
) -> np.ndarray:
    """Cell labels (per sorted index) of the partition of the point set
    into orbits of the given stabilizer elements."""
    N = len(sorted_codes)
    perms = [permutation_of(S, sorted_codes, h) for h in stab_elems]
    label = np.arange(N, dtype=np.int64)

    # union-find over indices
    def find(a):
        while label[a] != a:
            label[a] = label[label[a]]
            a = label[a]
        return a

    for perm in perms:
        for i in range(N):
            ra, rb = find(i), find(int(perm[i]))
            if ra != rb:
                label[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(N)], dtype=np.int64)
    return roots


def pair_orbit_bfs(
    perms: Sequence[np.ndarray], pair: tuple[int, int], N: int,
    budget: int = 50_000_000,
) -> np.ndarray:
    """Orbit of an unordered index pair under componentwise permutations.

    Returns the sorted int64 array of encoded pairs i*N + j with i < j.
    This is the gold-standard orbital edge set.
    """
    i, j = pair
    if i == j:
        raise ValueError("pair must have distinct points")
    start = np.int64(min(i, j) * N + max(i, j))
    seen = np.array([start], dtype=np.int64)
    frontier = seen
    while frontier.size:
        lo = frontier // N
        hi = frontier % N
        new = []
        for perm in perms:
            a = perm[lo]
            b = perm[hi]
            enc = np.minimum(a, b) * N + np.maximum(a, b)
            new.append(enc)
        cand = np.unique(np.concatenate(new))
        pos = np.searchsorted(seen, cand)
        pos = np.clip(pos, 0, len(seen) - 1)
        fresh = cand[seen[pos] != cand]
        if len(seen) + len(fresh) > budget:
            raise BudgetExceeded(f"pair orbit exceeded the budget of {budget}")
        if fresh.size == 0:
            break
        seen = np.sort(np.concatenate([seen, fresh]))
        frontier = fresh
    return seen


# -- orbit caching --


def _varint_encode(values: Iterable[int]) -> bytes:
    out = bytearray()
    for v in values:
        v = int(v)
        while True:
            b = v & 0x7F
            v >>= 7
            if v:
                out.append(b | 0x80)
            else:
                out.append(b)
                break
    return bytes(out)


def _varint_decode(data: bytes) -> list[int]:
    out = []
    cur = 0
    shift = 0
    for b in data:
        cur |= (b & 0x7F) << shift
        if b & 0x80:
            shift += 7
        else:
            out.append(cur)
            cur = 0
            shift = 0
    return out


def cache_dir() -> Optional[str]:
    return os.environ.get("ORBDIAM_CACHE")


def _cache_paths(base_dir: str, gens: GeneratorSet, base_code: int):
    tag = hashlib.sha256(
        (gens.key() + f"|{base_code}").encode()
    ).hexdigest()[:24]
    d = os.path.join(base_dir, tag)
    return (
        d,
        os.path.join(d, "points.bin"),
        os.path.join(d, "words.bin"),
        os.path.join(d, "meta.json"),
    )


def save_orbit(tab: OrbitTable, base_dir: str):
    d, pts, words, meta = _cache_paths(base_dir, tab.gens, tab.base_code)
    os.makedirs(d, exist_ok=True)
    tab.points.astype("<i8").tofile(pts)
    stream = bytearray()
    for i in range(tab.size):
        w = tab.word(i)
        stream += _varint_encode([len(w)] + w)
    with open(words, "wb") as fh:
        fh.write(bytes(stream))
    with open(meta, "w") as fh:
        json.dump(
            {
                "space": json.loads(tab.gens.space.key()),
                "family": tab.gens.family,
                "gens_hash": tab.gens.gens_hash(),
                "base_code": int(tab.base_code),
                "size": int(tab.size),
            },
            fh,
            sort_keys=True,
        )


def load_orbit(gens: GeneratorSet, base_code: int, base_dir: str) -> Optional[OrbitTable]:
    d, pts, words, meta = _cache_paths(base_dir, gens, base_code)
    if not os.path.exists(meta):
        return None
    with open(meta) as fh:
        info = json.load(fh)
    if (
        info["gens_hash"] != gens.gens_hash()
        or info["base_code"] != base_code
        or info["family"] != gens.family
    ):
        return None
    points = np.fromfile(pts, dtype="<i8").astype(np.int64)
    if len(points) != info["size"]:
        return None
    flat = _varint_decode(open(words, "rb").read())
    # rebuild parent/via arrays by replaying words
    S = gens.space
    parents = np.full(len(points), -1, dtype=np.int64)
    via = np.full(len(points), -1, dtype=np.int64)
    idx_of = {int(c): i for i, c in enumerate(points)}
    pos = 0
    for i in range(len(points)):
        length = flat[pos]
        word = flat[pos + 1 : pos + 1 + length]
        pos += 1 + length
        if length:
            prefix_code = base_code
            cur = Subspace(S.space, decode(S.space, base_code).basis, _canonical=True)
            for gi in word[:-1]:
                cur = apply_element(cur, gens.gens[gi])
            parents[i] = idx_of[cur.code]
            via[i] = word[-1]
    return OrbitTable(gens, base_code, points, parents, via)


def orbit_with_cache(gens: GeneratorSet, base: Subspace, budget: int = 10_000_000) -> OrbitTable:
    d = cache_dir()
    if d:
        tab = load_orbit(gens, base.code, d)
        if tab is not None:
            return tab
    tab = orbit_bfs(gens, base, budget)
    if d:
        save_orbit(tab, d)
    return tab
