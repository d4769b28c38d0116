"""Action instances (subspace, subspace-pair and quadratic-form vertex
sets), orbital enumeration, and exact orbital diameters.

Orbitals are enumerated by a three-rung ladder:

1. ``invariant`` — closed-form orbital invariants in the cases where the
   underlying theory proves them complete (set intersections for the
   linear case, form-value classes for point actions, intersection
   dimension with parity for half-dimension totally singular spaces);
2. ``stab_sample`` — suborbits of a sampled point stabilizer, exploration
   grade only;
3. ``pair_bfs`` — exact pair-orbit BFS over a packed N x N bit table, the
   gold standard.

Diameters are eccentricities of the base vertex (the actions are vertex
transitive), spot-checked from extra sources.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional, Sequence

import numpy as np

from .forms import ClassicalSpace, SubspaceClass, TOTALLY_SINGULAR, arf_type, make_space
from .gf import Field, square_classes
from .groups import (
    GeneratorSet,
    GroupElement,
    OrbitTable,
    apply_codes,
    compose,
    generator_catalog,
    inverse,
    orbit_with_cache,
    permutation_of,
    schreier_sample_stabilizer,
    suborbits,
    word_to_element,
)
from .linalg import (
    BudgetExceeded,
    Subspace,
    annihilator,
    apply_element,
    decode,
    decode_batch,
    enumerate_subspaces,
    mat_inv,
    mat_mul,
    meet_dim,
    rank_batch,
    span,
)

FAMILY_KIND = {
    "SL": "linear",
    "GL": "linear",
    "Sp": "symplectic",
    "SU": "unitary",
    "GU": "unitary",
    "GO": "quadratic",
    "Omega": "quadratic",
}


# -- packed pair tables --


class PairSet:
    """Set of ordered vertex pairs packed as an N x N bit table."""

    def __init__(self, N: int):
        self.N = N
        self.words_per_row = (N + 63) // 64
        self.bits = np.zeros(N * self.words_per_row, dtype=np.uint64)

    def add(self, i: np.ndarray, j: np.ndarray):
        """Set pairs (i, j) and (j, i)."""
        W = self.words_per_row
        for a, b in ((i, j), (j, i)):
            word = a * W + (b >> 6)
            val = np.uint64(1) << (b & 63).astype(np.uint64)
            np.bitwise_or.at(self.bits, word.astype(np.int64), val)

    def contains(self, i: np.ndarray, j: np.ndarray) -> np.ndarray:
        W = self.words_per_row
        word = (i * W + (j >> 6)).astype(np.int64)
        shift = (j & 63).astype(np.uint64)
        return ((self.bits[word] >> shift) & np.uint64(1)).astype(bool)

    def neighbors(self, v: int) -> np.ndarray:
        W = self.words_per_row
        row = self.bits[v * W : (v + 1) * W]
        packed = row.view(np.uint8)
        flags = np.unpackbits(packed, bitorder="little")[: self.N]
        return np.nonzero(flags)[0]

    def count(self) -> int:
        """Number of set bits (ordered pairs)."""
        return int(np.bitwise_count(self.bits).sum())

    def merge(self, other: "PairSet"):
        self.bits |= other.bits


def _pairset_escapes(
    ps: PairSet, perms: Sequence[np.ndarray], row_chunk: int = 512
) -> Optional[np.ndarray]:
    """Pairs missing from ``ps`` under some perm, as encoded lo*N+hi.

    Works directly on the packed bit table in row chunks, so the memory
    footprint stays flat regardless of how many pairs the set holds.
    Returns None when ``ps`` is closed under every permutation.
    """
    N, W = ps.N, ps.words_per_row
    table = ps.bits.reshape(N, W)
    parts = []
    for perm in perms:
        for start in range(0, N, row_chunk):
            rows = np.arange(start, min(start + row_chunk, N))
            img_rows = perm[rows]
            src = np.unpackbits(
                table[rows].view(np.uint8), axis=1, bitorder="little"
            )[:, :N]
            tgt = np.unpackbits(
                table[img_rows].view(np.uint8), axis=1, bitorder="little"
            )[:, :N]
            # miss where (i, j) is set but its image (perm[i], perm[j]) is not
            miss = src > tgt[:, perm]
            if miss.any():
                ii, jj = np.nonzero(miss)
                a, b = img_rows[ii], perm[jj]
                parts.append(np.minimum(a, b) * N + np.maximum(a, b))
    if not parts:
        return None
    return np.unique(np.concatenate(parts))


def pair_orbit_bitset(
    perms: Sequence[np.ndarray],
    certify_perms: Sequence[np.ndarray],
    pair: tuple[int, int],
    N: int,
    budget_pairs: int = 400_000_000,
    chunk: int = 1 << 22,
) -> PairSet:
    """Exact orbit of an unordered pair as a PairSet.

    BFS runs over ``perms`` (typically a few random products, cheap); the
    result is then certified closed under every permutation in
    ``certify_perms``; any escape re-enters the BFS, so the final set is
    exactly the orbit under the full group.

    Frontiers are kept as encoded pairs (lo*N+hi) in the smallest integer
    dtype that fits, and both expansion and certification run in fixed-size
    chunks, so memory stays bounded even for orbits of 10^8 pairs.
    """
    if N * N > budget_pairs:
        raise BudgetExceeded(f"pair table for N={N} exceeds the pair budget")
    enc_dtype = np.int32 if N * N <= np.iinfo(np.int32).max else np.int64
    ps = PairSet(N)
    i, j = pair
    ps.add(np.array([min(i, j)]), np.array([max(i, j)]))
    frontier = np.array([min(i, j) * N + max(i, j)], dtype=enc_dtype)

    def expand(front):
        fresh_parts = []
        for perm in perms:
            for s in range(0, len(front), chunk):
                enc = front[s : s + chunk].astype(np.int64)
                a, b = perm[enc // N], perm[enc % N]
                lo, hi = np.minimum(a, b), np.maximum(a, b)
                keep = ~ps.contains(lo, hi)
                if keep.any():
                    lo, hi = lo[keep], hi[keep]
                    ps.add(lo, hi)
                    fresh_parts.append((lo * N + hi).astype(enc_dtype))
        if not fresh_parts:
            return None
        return np.unique(np.concatenate(fresh_parts))

    while True:
        while frontier is not None:
            frontier = expand(frontier)
        escapes = _pairset_escapes(ps, certify_perms)
        if escapes is None:
            return ps
        ps.add(escapes // N, escapes % N)
        frontier = escapes.astype(enc_dtype)


def bfs_eccentricity(
    N: int, source: int, neighbors: Callable[[int], np.ndarray]
) -> tuple[int, np.ndarray]:
    """(eccentricity, distance array); distance -1 marks unreachable."""
    dist = np.full(N, -1, dtype=np.int64)
    dist[source] = 0
    frontier = [source]
    d = 0
    while frontier:
        d += 1
        nxt = []
        for v in frontier:
            nb = neighbors(v)
            fresh = nb[dist[nb] < 0]
            dist[fresh] = d
            nxt.extend(fresh.tolist())
        frontier = nxt
    return int(dist.max()), dist


# -- action instances --


@dataclass
class Orbital:
    rep: tuple[int, int]  # vertex indices
    suborbit_size: int
    edge_count: int  # unordered pairs
    diameter: int
    strategy: str
    signature: object = None
    pairset: Optional[PairSet] = None
    distances: Optional[np.ndarray] = None  # from the base vertex
    certificate: dict = dc_field(default_factory=dict)


class ActionInstance:
    """A transitive action on subspaces, subspace pairs, or quadratic
    forms, with vertex set realized as an ordered code table."""

    def __init__(
        self,
        case: str,
        S: ClassicalSpace,
        gens: GeneratorSet,
        t: int,
        cls: SubspaceClass,
        vertex_kind: str,
        sorted_codes: np.ndarray,
        base_idx: int,
        *,
        pair_components: Optional[tuple[np.ndarray, np.ndarray]] = None,
        orbit_table: Optional[OrbitTable] = None,
        out_of_theorem: bool = False,
    ):
        self.case = case
        self.space = S
        self.gens = gens
        self.t = t
        self.k = min(t, S.n - t)
        self.cls = cls
        self.vertex_kind = vertex_kind
        self.sorted_codes = sorted_codes
        self.base_idx = base_idx
        self.pair_components = pair_components
        self.orbit_table = orbit_table
        self.out_of_theorem = out_of_theorem
        self._perms: Optional[list[np.ndarray]] = None

    @property
    def N(self) -> int:
        return len(self.sorted_codes)

    def key(self) -> dict:
        return {
            "case": self.case,
            "family": self.gens.family,
            "space": self.space.key(),
            "t": self.t,
            "class": str(self.cls),
            "extensions": list(self.gens.extensions),
            "vertex_kind": self.vertex_kind,
        }

    # vertex realization ------------------------------------------------

    def vertex_repr(self, i: int):
        if self.vertex_kind == "subspace":
            return decode(self.space.space, int(self.sorted_codes[i])).basis.tolist()
        if self.vertex_kind == "subspace_pair":
            u, w = self.pair_components
            return [
                decode(self.space.space, int(u[i])).basis.tolist(),
                decode(self.space.space, int(w[i])).basis.tolist(),
            ]
        return form_qdiag(self.space, int(self.sorted_codes[i])).tolist()

    def perms(self) -> list[np.ndarray]:
        if self._perms is None:
            self._perms = [self._perm_of(g) for g in self.gens.gens]
        return self._perms

    def _perm_of(self, g: GroupElement) -> np.ndarray:
        if self.vertex_kind == "subspace":
            return permutation_of(self.space, self.sorted_codes, g)
        if self.vertex_kind == "quadratic_form":
            return form_permutation(self.space, self.sorted_codes, g)
        return pair_permutation(self.space, self.pair_components, g)

    def explore_perms(self, seed: int, count: int = 5, length: int = 8) -> list[np.ndarray]:
        """Permutations of a few seeded random generator products."""
        rng = random.Random(seed)
        base = self.perms()
        out = list(base[: max(0, 3 - count)])
        for _ in range(count):
            word = [rng.randrange(len(base)) for _ in range(length)]
            p = base[word[0]]
            for gi in word[1:]:
                p = base[gi][p]
            out.append(p)
        # ensure at least one original generator is present
        out.append(base[0])
        return out


# representatives ------------------------------------------------------


def representative_subspace(S: ClassicalSpace, cls: SubspaceClass, k: int) -> Subspace:
    """A standard representative subspace of the requested class."""
    F = S.field
    sp = S.space
    if S.kind == "linear":
        rows = [sp.basis_vector(i) for i in range(k)]
        return span(sp, *rows)
    if cls.tag == "totally_singular":
        if S.kind == "quadratic" or S.kind == "symplectic" or S.kind == "unitary":
            if k > S.witt_index():
                raise ValueError("k exceeds the Witt index")
            rows = [S.e(i) for i in range(1, k + 1)]
            sub = span(sp, *rows)
    elif cls.tag == "nonsingular_point_q_even":
        if not (S.kind == "quadratic" and F.p == 2 and k == 1):
            raise ValueError("nonsingular points need a quadratic space, q even")
        sub = span(sp, S.vec(S.e(1), S.f(1)))  # Q = 1
    elif cls.tag == "nondegenerate":
        sub = _nondegenerate_representative(S, cls, k)
    else:
        raise ValueError(f"no representative rule for class {cls}")
    got = S.classify_subspace(sub)
    if got.tag != cls.tag or (cls.subtype and got.subtype != cls.subtype):
        raise AssertionError(f"representative has class {got}, wanted {cls}")
    return sub


def _nondegenerate_representative(S: ClassicalSpace, cls: SubspaceClass, k: int) -> Subspace:
    F = S.field
    sp = S.space
    rows = []
    if S.kind in ("symplectic", "unitary"):
        pairs = k // 2
        for i in range(1, pairs + 1):
            rows += [S.e(i), S.f(i)]
        if k % 2:
            if S.kind == "symplectic":
                raise ValueError("symplectic nondegenerate subspaces have even dim")
            if S.n % 2 and pairs + 1 <= S.m + 1:
                rows.append(S.x() if S.has_label("x") else None)
                if rows[-1] is None:
                    raise ValueError("no unit vector available")
            else:
                chi = next(c for c in range(F.q) if F.add(c, F.conj(c)) == 1)
                rows.append(S.vec(S.e(pairs + 1), (chi, S.f(pairs + 1))))
        return span(sp, *rows)
    # quadratic
    if k % 2:
        if F.p == 2:
            raise ValueError("odd-dimensional nondegenerate spaces need q odd")
        pairs = (k - 1) // 2
        for i in range(1, pairs + 1):
            rows += [S.e(i), S.f(i)]
        rows.append(S.x() if S.has_label("x") else S.vec(S.e(pairs + 1), S.f(pairs + 1)))
        return span(sp, *rows)
    want_minus = cls.subtype == "O-"
    pairs = k // 2 - (1 if want_minus else 0)
    for i in range(1, pairs + 1):
        rows += [S.e(i), S.f(i)]
    if want_minus:
        rows += _minus_plane(S, pairs + 1)
    return span(sp, *rows)


def _minus_plane(S: ClassicalSpace, start: int) -> list[np.ndarray]:
    """Two vectors spanning an anisotropic (O2-) plane orthogonal to the
    hyperbolic planes before ``start``."""
    F = S.field
    if S.epsilon == "-" and start == S.m + 1:
        return [S.x(), S.y()]
    if F.p != 2:
        _, nonsquare = square_classes(F)
        # anisotropic iff a^2 + c b^2 = 0 has no nonzero solution, i.e.
        # -c is a nonsquare
        c = F.neg(nonsquare)
        if S.has_label("x") and S.n % 2:
            # <x, e_start + c f_start>: Q(a x + b w) = a^2 + c b^2
            return [S.x(), S.vec(S.e(start), (c, S.f(start)))]
        # inside two hyperbolic planes: Q(a u + b w) = a^2 + c b^2
        return [
            S.vec(S.e(start), S.f(start)),
            S.vec(S.e(start + 1), (c, S.f(start + 1))),
        ]
    # q even: <e+f, e + e' + zeta f'> has Gram 1 and Q values 1, zeta
    zeta = S.zeta
    if zeta is None:
        from .gf import special_params

        zeta = special_params(F, "zeta")
    u = S.vec(S.e(start), S.f(start))
    w = S.vec(S.e(start), S.e(start + 1), (zeta, S.f(start + 1)))
    return [u, w]


def representative_pair(S: ClassicalSpace, t: int) -> tuple[Subspace, Subspace]:
    sp = S.space
    n = S.n
    U = span(sp, *[sp.basis_vector(i) for i in range(t)])
    if 2 * t < n:
        W = span(sp, *[sp.basis_vector(i) for i in range(n - t)])
    elif 2 * t == n:
        W = span(sp, *[sp.basis_vector(i) for i in range(t, n)])
    else:
        raise ValueError("pair actions need t <= n/2")
    return U, W


# quadratic-form vertices (case d) -------------------------------------


def form_code(S: ClassicalSpace, qdiag: np.ndarray) -> int:
    q = S.field.q
    code = 0
    for v in reversed(np.asarray(qdiag, dtype=np.int64)):
        code = code * q + int(v)
    return code


def form_qdiag(S: ClassicalSpace, code: int) -> np.ndarray:
    q = S.field.q
    out = np.empty(S.n, dtype=np.int64)
    for i in range(S.n):
        out[i] = code % q
        code //= q
    return out


def form_codes_batch(S: ClassicalSpace, qdiags: np.ndarray) -> np.ndarray:
    q = S.field.q
    weights = q ** np.arange(S.n, dtype=np.int64)
    return qdiags @ weights


def form_qdiags_batch(S: ClassicalSpace, codes: np.ndarray) -> np.ndarray:
    q = S.field.q
    codes = np.asarray(codes, dtype=np.int64)
    return np.stack([(codes // q**i) % q for i in range(S.n)], axis=1)


def form_action_affine(S: ClassicalSpace, g: GroupElement) -> tuple[np.ndarray, np.ndarray]:
    """(A, c) with new_qdiag = qdiag @ A^T + c for the action Q -> Q(v g^-1)."""
    F = S.field
    MUL = F.tables[1]
    R = mat_inv(F, g.mat)
    A = MUL[R, R]  # entrywise squares
    c = np.empty(S.n, dtype=np.int64)
    for i in range(S.n):
        acc = 0
        for j in range(S.n):
            for k2 in range(j + 1, S.n):
                gk = int(S.gram[j, k2])
                if gk:
                    acc = F.add(acc, F.mul(F.mul(int(R[i, j]), int(R[i, k2])), gk))
        c[i] = acc
    return A, c


def form_apply_codes(S: ClassicalSpace, codes: np.ndarray, g: GroupElement) -> np.ndarray:
    F = S.field
    ADD = F.tables[0]
    A, c = form_action_affine(S, g)
    d = form_qdiags_batch(S, codes)
    nd = mat_mul(F, d, A.T)
    nd = ADD[nd, c[None, :]]
    return form_codes_batch(S, nd)


def form_permutation(S: ClassicalSpace, sorted_codes: np.ndarray, g: GroupElement) -> np.ndarray:
    imgs = form_apply_codes(S, sorted_codes, g)
    pos = np.searchsorted(sorted_codes, imgs)
    if (pos >= len(sorted_codes)).any() or (sorted_codes[pos] != imgs).any():
        raise ValueError("form set not closed under the element")
    return pos


# pair vertices (case c) ------------------------------------------------


def pair_canonical(S: ClassicalSpace, c1: int, c2: int) -> tuple[int, int]:
    n = S.n
    d1, d2 = c1 % (n + 1), c2 % (n + 1)
    if d1 != d2:
        return (c1, c2) if d1 < d2 else (c2, c1)
    return (min(c1, c2), max(c1, c2))


def pair_apply(S: ClassicalSpace, comps: tuple[np.ndarray, np.ndarray], g: GroupElement):
    u, w = comps
    iu = apply_codes(S, u, g)
    iw = apply_codes(S, w, g)
    n = S.n
    du, dw = iu % (n + 1), iw % (n + 1)
    swap = (du > dw) | ((du == dw) & (iu > iw))
    new_u = np.where(swap, iw, iu)
    new_w = np.where(swap, iu, iw)
    return new_u, new_w


def pair_permutation(S: ClassicalSpace, comps: tuple[np.ndarray, np.ndarray], g: GroupElement) -> np.ndarray:
    u, w = comps
    nu, nw = pair_apply(S, comps, g)
    # vertices are lexicographically sorted by (u, w)
    order_enc = _pair_enc(u, w)
    img_enc = _pair_enc(nu, nw)
    pos = np.searchsorted(order_enc, img_enc)
    if (pos >= len(order_enc)).any() or (order_enc[pos] != img_enc).any():
        raise ValueError("pair set not closed under the element")
    return pos


def _pair_enc(u: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Injective int64 encoding of component code pairs (requires the
    component codes to fit in 31 bits)."""
    if (u >= 2**31).any() or (w >= 2**31).any():
        raise BudgetExceeded("pair vertex codes exceed the int64 encoding")
    return u * 2**31 + w


def pair_orbit_vertices(
    S: ClassicalSpace, gens: GeneratorSet, U: Subspace, W: Subspace, budget: int = 2_000_000
) -> tuple[np.ndarray, np.ndarray]:
    """BFS orbit of the pair vertex {U, W}; returns component code arrays
    sorted by the canonical pair encoding."""
    start = pair_canonical(S, U.code, W.code)
    seen = {start}
    frontier = [start]
    while frontier:
        fu = np.array([p[0] for p in frontier], dtype=np.int64)
        fw = np.array([p[1] for p in frontier], dtype=np.int64)
        nxt = []
        for g in gens.gens:
            nu, nw = pair_apply(S, (fu, fw), g)
            for a, b in zip(nu.tolist(), nw.tolist()):
                p = (a, b)
                if p not in seen:
                    if len(seen) >= budget:
                        raise BudgetExceeded("pair vertex orbit over budget")
                    seen.add(p)
                    nxt.append(p)
        frontier = nxt
    pairs = sorted(seen, key=lambda p: (p[0], p[1]))
    u = np.array([p[0] for p in pairs], dtype=np.int64)
    w = np.array([p[1] for p in pairs], dtype=np.int64)
    return u, w


# -- make_action --------------------------------------------------------


def make_action(
    case: str,
    family: str,
    n: int,
    F: Field,
    eps: str = "",
    t: int = 1,
    cls: Optional[SubspaceClass] = None,
    extensions: tuple = (),
    budget: int = 10_000_000,
) -> ActionInstance:
    if case == "b":
        kind = FAMILY_KIND[family]
        S = make_space(kind, n, F, eps if kind == "quadratic" else "")
        if cls is None:
            cls = SubspaceClass("any") if kind == "linear" else TOTALLY_SINGULAR
        gens = generator_catalog(S, family, extensions)
        rep = representative_subspace(S, cls, t)
        tab = orbit_with_cache(gens, rep, budget)
        sorted_codes = tab.sorted_codes
        base_idx = int(np.searchsorted(sorted_codes, rep.code))
        out = 2 * t == n and kind == "linear"
        return ActionInstance(
            "b", S, gens, t, cls, "subspace", sorted_codes, base_idx,
            orbit_table=tab, out_of_theorem=out,
        )
    if case == "c":
        if FAMILY_KIND[family] != "linear":
            raise ValueError("pair actions live in the linear case")
        S = make_space("linear", n, F)
        if 2 * t > n:
            raise ValueError("pair actions need t <= n/2")
        ext = tuple(extensions)
        if "graph_auto" not in ext:
            ext = ext + ("graph_auto",)
        gens = generator_catalog(S, family, ext)
        U, W = representative_pair(S, t)
        u, w = pair_orbit_vertices(S, gens, U, W, budget)
        enc = _pair_enc(u, w)
        base = pair_canonical(S, U.code, W.code)
        base_idx = int(np.searchsorted(enc, _pair_enc(
            np.array([base[0]]), np.array([base[1]]))[0]))
        return ActionInstance(
            "c", S, gens, t, SubspaceClass("any"), "subspace_pair", enc, base_idx,
            pair_components=(u, w),
        )
    if case == "d":
        if family != "Sp":
            raise ValueError("form actions are symplectic")
        if F.p != 2:
            raise ValueError("form actions need q even")
        if eps not in ("+", "-"):
            raise ValueError("form actions need a type sign")
        S = make_space("symplectic", n, F)
        gens = generator_catalog(S, family, extensions)
        qd = np.zeros(n, dtype=np.int64)
        if eps == "-":
            zeta = _minus_zeta(F)
            qd[S._labels[f"e{S.m}"]] = 1
            qd[S._labels[f"f{S.m}"]] = zeta
        rep_code = form_code(S, qd)
        assert arf_type(S, qd) == eps
        sorted_codes = _form_orbit(S, gens, rep_code, budget)
        base_idx = int(np.searchsorted(sorted_codes, rep_code))
        return ActionInstance(
            "d", S, gens, t, SubspaceClass("any"), "quadratic_form",
            sorted_codes, base_idx,
        )
    raise ValueError(f"unknown case {case!r}")


def _minus_zeta(F: Field):
    from .gf import special_params

    return special_params(F, "zeta")


def _form_orbit(S: ClassicalSpace, gens: GeneratorSet, rep_code: int, budget: int) -> np.ndarray:
    seen = {rep_code}
    frontier = np.array([rep_code], dtype=np.int64)
    while frontier.size:
        nxt = set()
        for g in gens.gens:
            imgs = form_apply_codes(S, frontier, g)
            for c in imgs.tolist():
                if c not in seen:
                    seen.add(c)
                    nxt.add(c)
        if len(seen) > budget:
            raise BudgetExceeded("form orbit over budget")
        frontier = np.array(sorted(nxt), dtype=np.int64)
    return np.array(sorted(seen), dtype=np.int64)


# -- invariant fast paths ----------------------------------------------


def invariant_case(A: ActionInstance) -> Optional[str]:
    """Which proved complete invariant applies, if any."""
    S = A.space
    if A.case != "b":
        return None
    if S.kind == "linear":
        return "meet_dim"
    if A.t == 1:
        if S.kind == "unitary" and A.cls.tag == "nondegenerate" and S.n >= 5:
            return "unitary_point"
        if (
            S.kind == "quadratic"
            and S.field.p != 2
            and A.cls.tag == "nondegenerate"
            and S.n >= 5
        ):
            return "orth_point_qodd"
        if S.kind == "quadratic" and S.field.p == 2 and A.cls.tag == "nonsingular_point_q_even":
            return "qeven_point"
    if (
        S.kind == "quadratic"
        and A.cls.tag == "totally_singular"
        and S.epsilon == "+"
        and 2 * A.t == S.n
        and A.gens.family == "Omega"
    ):
        return "halfspin"
    return None


class InvariantOracle:
    """Vectorized complete-invariant signatures for the proved cases."""

    def __init__(self, A: ActionInstance):
        self.A = A
        self.kind = invariant_case(A)
        if self.kind is None:
            raise ValueError("no proved invariant for this action")
        S = A.space
        F = S.field
        n = S.n
        if self.kind in ("meet_dim", "halfspin"):
            k = int(A.sorted_codes[0] % (n + 1))
            self.k = k
            self.bases = decode_batch(S.space, A.sorted_codes, k)
        else:
            # unit-norm representative vector per point
            reps = np.empty((A.N, n), dtype=np.int64)
            for i, code in enumerate(A.sorted_codes):
                v = decode(S.space, int(code)).basis[0]
                reps[i] = _normalize_point(S, v)
            self.reps = reps
            self.class_of = _value_class_table(S)

    def signature_row(self, i: int) -> np.ndarray:
        """Signatures of (vertex i, every vertex)."""
        A, S = self.A, self.A.space
        if self.kind in ("meet_dim", "halfspin"):
            k = self.k
            stacked = np.concatenate(
                [np.broadcast_to(self.bases[i], self.bases.shape), self.bases], axis=1
            )
            joins = rank_batch(S.field, stacked)
            return 2 * k - joins  # dim of meet
        vals = S.form_matrix(self.reps, self.reps[i][None, :])[:, 0]
        return self.class_of[vals]

    def signature(self, i: int, j: int):
        return int(self.signature_row(i)[j])


def _normalize_point(S: ClassicalSpace, v: np.ndarray) -> np.ndarray:
    """Scale a non-singular point generator to unit form value (unitary /
    q even quadratic) or unit quadratic value when possible (q odd)."""
    F = S.field
    MUL = F.tables[1]
    if S.kind == "unitary":
        norm = S.eval_form(v, v)
        c = next(c for c in range(1, F.q) if F.mul(c, F.conj(c)) == F.inv(norm))
        return MUL[c, v]
    qv = S.eval_Q(v)
    if F.p == 2:
        c = next(c for c in range(1, F.q) if F.mul(c, c) == F.inv(qv))
        return MUL[c, v]
    is_square, _ = square_classes(F)
    if is_square(qv):
        c = next(c for c in range(1, F.q) if F.mul(c, c) == F.inv(qv))
        return MUL[c, v]
    return v  # non-square class: leave as is (consistent within the orbit)


def _value_class_table(S: ClassicalSpace) -> np.ndarray:
    """class_of[a]: canonical id of a form value between normalized point
    representatives; classes are {lam, conj(lam)} D for unitary points,
    {a, -a} for q odd, {a} for q even."""
    F = S.field
    table = np.empty(F.q, dtype=np.int64)
    if S.kind == "unitary":
        q0 = S.subfield.q
        norm_one = [d for d in range(1, F.q) if F.mul(d, F.conj(d)) == 1]
        for a in range(F.q):
            cls = {F.mul(a, d) for d in norm_one} | {
                F.mul(F.conj(a), d) for d in norm_one
            }
            table[a] = min(cls)
    elif F.p != 2:
        for a in range(F.q):
            table[a] = min(a, F.neg(a))
    else:
        table[:] = np.arange(F.q)
    return table


# -- orbital enumeration ------------------------------------------------


def orbitals_enumerate(
    A: ActionInstance,
    strategy: str = "pair_bfs",
    seed: int = 0,
    keep_pairsets: bool = False,
    budget_pairs: int = 400_000_000,
    stab_samples: int = 200,
) -> list[Orbital]:
    """Complete list of non-diagonal orbitals with exact diameters.

    pair_bfs is the gold standard; invariant is allowed only for proved
    cases; stab_sample is exploration grade (diameters verified against
    pair_bfs in the acceptance suite, not here).
    """
    t0 = time.time()
    N = A.N
    base = A.base_idx
    if strategy == "invariant":
        oracle = InvariantOracle(A)
        base_row = oracle.signature_row(base)
        sigs = sorted({int(s) for i, s in enumerate(base_row) if i != base})
        out = []
        # precompute all rows once if affordable, else per-BFS rows
        for sig in sigs:
            nbr_cache: dict[int, np.ndarray] = {}

            def neighbors(v, _sig=sig):
                if v not in nbr_cache:
                    row = oracle.signature_row(v)
                    idx = np.nonzero(row == _sig)[0]
                    nbr_cache[v] = idx[idx != v]
                return nbr_cache[v]

            ecc, dist = bfs_eccentricity(N, base, neighbors)
            if (dist < 0).any():
                ecc = -1  # disconnected orbital graph
            sub = neighbors(base)
            rep = (base, int(sub[0]))
            edge_count = _invariant_edge_count(oracle, base_row, sig, N)
            out.append(
                Orbital(rep, len(sub), edge_count, ecc, "invariant", signature=sig,
                        distances=dist)
            )
        _check_partition(A, out)
        return out
    if strategy == "stab_sample":
        if A.orbit_table is None:
            raise ValueError("stab_sample needs an orbit table")
        stab = schreier_sample_stabilizer(A.orbit_table, stab_samples, seed)
        # suborbit partition on sorted index space
        labels = suborbits(A.space, stab, A.sorted_codes, int(A.sorted_codes[base]))
        out = []
        for lab in np.unique(labels):
            cell = np.nonzero(labels == lab)[0]
            if base in cell:
                continue
            sub_set = cell

            def neighbors(v, _cell=sub_set):
                # translate the base suborbit to v along a transversal
                g = _transversal_element(A, v)
                perm_cell = apply_codes(A.space, A.sorted_codes[_cell], g)
                pos = np.searchsorted(A.sorted_codes, perm_cell)
                return pos

            ecc, dist = bfs_eccentricity(N, base, neighbors)
            rep = (base, int(cell[0]))
            out.append(
                Orbital(rep, len(cell), len(cell) * N // 2, ecc, "stab_sample",
                        distances=dist)
            )
        return out
    if strategy != "pair_bfs":
        raise ValueError(f"unknown strategy {strategy!r}")

    perms = A.perms()
    explore = A.explore_perms(seed)
    assigned = PairSet(N)
    out = []
    for w in range(N):
        if w == base:
            continue
        if assigned.contains(np.array([base]), np.array([w]))[0]:
            continue
        ps = pair_orbit_bitset(explore, perms, (base, w), N, budget_pairs)
        sub = ps.neighbors(base)
        ecc, dist = bfs_eccentricity(N, base, ps.neighbors)
        if (dist < 0).any():
            ecc = -1  # disconnected orbital graph
        edge_count = ps.count() // 2
        orb = Orbital((base, w), len(sub), edge_count, ecc, "pair_bfs",
                      distances=dist)
        if keep_pairsets:
            orb.pairset = ps
        out.append(orb)
        assigned.merge(ps)
    total = sum(o.edge_count for o in out)
    if total != N * (N - 1) // 2:
        raise AssertionError(
            f"orbital edge counts sum to {total}, expected {N*(N-1)//2}"
        )
    return out


def _invariant_edge_count(oracle: InvariantOracle, base_row, sig, N) -> int:
    # vertex-transitive: every vertex has the same valency
    val = int((base_row == sig).sum())
    if base_row[oracle.A.base_idx] == sig:
        val -= 1
    return val * N // 2


def _check_partition(A: ActionInstance, orbitals: list[Orbital]):
    N = A.N
    total = sum(o.edge_count for o in orbitals)
    if total != N * (N - 1) // 2:
        raise AssertionError(
            f"orbital edge counts sum to {total}, expected {N*(N-1)//2}"
        )


def _transversal_element(A: ActionInstance, v: int) -> GroupElement:
    tab = A.orbit_table
    code = int(A.sorted_codes[v])
    return tab.element(tab.index_of(code))


def rank(A: ActionInstance, orbitals: list[Orbital]) -> int:
    return 1 + len(orbitals)


def action_orbital_diameter(orbitals: list[Orbital]) -> int:
    return max(o.diameter for o in orbitals)


def vertex_transitivity_check(
    A: ActionInstance, orbital: Orbital, samples: int = 3, seed: int = 1
) -> bool:
    """Eccentricity from sampled vertices equals the base eccentricity."""
    if orbital.pairset is None:
        return True  # only checkable with kept edges
    rng = random.Random(seed)
    for _ in range(samples):
        v = rng.randrange(A.N)
        ecc, dist = bfs_eccentricity(A.N, v, orbital.pairset.neighbors)
        if (dist < 0).any():
            ecc = -1
        if ecc != orbital.diameter:
            return False
    return True


def result_record(A: ActionInstance, orbitals: list[Orbital], runtime_ms: int, checks: dict) -> dict:
    return {
        "action": A.key(),
        "size": A.N,
        "rank": rank(A, orbitals),
        "orbitals": [
            {
                "rep_edge": [A.vertex_repr(o.rep[0]), A.vertex_repr(o.rep[1])],
                "signature": o.signature,
                "suborbit_size": o.suborbit_size,
                "edge_count": o.edge_count,
                "diameter": o.diameter,
                "strategy": o.strategy,
            }
            for o in orbitals
        ],
        "diam": action_orbital_diameter(orbitals) if orbitals else 0,
        "out_of_theorem": A.out_of_theorem,
        "runtime_ms": runtime_ms,
        "checks": checks,
    }


def orbital_labels_matrix(A: ActionInstance, orbitals: list[Orbital]) -> np.ndarray:
    """(N, N) orbital-id matrix for oracle comparison (requires kept
    pairsets and small N)."""
    N = A.N
    if N > 2000:
        raise BudgetExceeded("labels matrix limited to small N")
    labels = np.full((N, N), -1, dtype=np.int64)
    for oid, o in enumerate(orbitals):
        if o.pairset is None:
            raise ValueError("orbital without kept edges")
        for v in range(N):
            nb = o.pairset.neighbors(v)
            labels[v, nb] = oid
    return labels
