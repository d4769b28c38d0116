"""Vectors, matrices and canonically represented subspaces of V_n(q).

Subspaces are identified by the reduced row echelon form (RREF) of any
basis; two Subspace values are equal iff they are the same set of vectors.
Every subspace also has an integer code (dimension digit plus row-major
base-q entry digits) giving a total order; the code is the bit-exact
on-disk and in-memory orbit element format.

All matrix kernels run on numpy int64 arrays through the field's lookup
tables, so they stay exact for any supported q.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field as dc_field
from typing import Iterable, Iterator, Optional

import numpy as np

from .gf import Field

N_LIMIT = 16


class BudgetExceeded(RuntimeError):
    """An enumeration or search exceeded its configured budget."""


@dataclass(frozen=True)
class VectorSpace:
    """V_n(q)."""

    field: Field
    n: int

    def __post_init__(self):
        if not 2 <= self.n <= N_LIMIT:
            raise ValueError(f"dimension {self.n} outside [2, {N_LIMIT}]")
        self.field.tables  # fail early if q has no vectorized tables

    @property
    def q(self) -> int:
        return self.field.q

    def zeros(self, m: int) -> np.ndarray:
        return np.zeros((m, self.n), dtype=np.int64)

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.n, dtype=np.int64)
        v[i] = 1
        return v

    def vector(self, coords) -> np.ndarray:
        v = np.asarray(list(coords), dtype=np.int64)
        if v.shape != (self.n,):
            raise ValueError("wrong vector length")
        if (v < 0).any() or (v >= self.q).any():
            raise ValueError("coordinates outside [0, q)")
        return v

    def all_vectors(self) -> np.ndarray:
        """(q^n, n) array of every coordinate vector, in code order."""
        q, n = self.q, self.n
        idx = np.arange(q**n, dtype=np.int64)
        return np.stack([(idx // q**j) % q for j in range(n)], axis=1)

    def __repr__(self):
        return f"V_{self.n}({self.q})"


# -- exact matrix kernels --


def rref(F: Field, rows: np.ndarray) -> np.ndarray:
    """Reduced row echelon form over GF(q); zero rows dropped."""
    ADD, MUL, NEG, INV = F.tables
    A = np.array(rows, dtype=np.int64, copy=True)
    if A.ndim != 2:
        raise ValueError("expected a 2-d array")
    m, n = A.shape
    r = 0
    for col in range(n):
        if r == m:
            break
        nz = np.nonzero(A[r:, col])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            A[[r, piv]] = A[[piv, r]]
        A[r] = MUL[INV[A[r, col]], A[r]]
        others = np.nonzero(A[:, col])[0]
        others = others[others != r]
        if others.size:
            factors = NEG[A[others, col]]
            A[others] = ADD[A[others], MUL[factors[:, None], A[r][None, :]]]
        r += 1
    return A[:r]


def rank_batch(F: Field, mats: np.ndarray) -> np.ndarray:
    """Ranks of a (B, m, n) stack of matrices, one vectorized elimination."""
    ADD, MUL, NEG, INV = F.tables
    A = np.array(mats, dtype=np.int64, copy=True)
    B, m, n = A.shape
    r = np.zeros(B, dtype=np.int64)  # current pivot row per matrix
    rows = np.arange(m)
    bidx = np.arange(B)
    for col in range(n):
        active = r < m
        if not active.any():
            break
        colv = A[:, :, col]
        candidate = (rows[None, :] >= r[:, None]) & (colv != 0) & active[:, None]
        has = candidate.any(axis=1)
        piv = np.where(has, candidate.argmax(axis=1), 0)
        sel = np.nonzero(has)[0]
        if sel.size == 0:
            continue
        # swap pivot row into position r
        pr = piv[sel]
        rr = r[sel]
        tmp = A[sel, pr].copy()
        A[sel, pr] = A[sel, rr]
        A[sel, rr] = tmp
        A[sel, rr] = MUL[INV[A[sel, rr, col]][:, None], A[sel, rr]]
        # eliminate below (rank only needs forward elimination)
        below = rows[None, :] > rr[:, None]
        factors = NEG[A[sel][:, :, col]]
        upd = ADD[A[sel], MUL[factors[:, :, None], A[sel, rr][:, None, :]]]
        A[sel] = np.where(below[:, :, None], upd, A[sel])
        r[sel] += 1
    return r


def rref_batch(F: Field, mats: np.ndarray) -> np.ndarray:
    """Full RREF of a (B, m, n) stack of matrices, one vectorized elimination.

    Zero rows are left in place at the bottom (rows keep shape), so this is
    intended for stacks of equal known rank (e.g. images of a subspace basis
    under invertible maps).
    """
    ADD, MUL, NEG, INV = F.tables
    A = np.array(mats, dtype=np.int64, copy=True)
    B, m, n = A.shape
    r = np.zeros(B, dtype=np.int64)
    rows = np.arange(m)
    for col in range(n):
        active = r < m
        if not active.any():
            break
        colv = A[:, :, col]
        candidate = (rows[None, :] >= r[:, None]) & (colv != 0) & active[:, None]
        has = candidate.any(axis=1)
        sel = np.nonzero(has)[0]
        if sel.size == 0:
            continue
        piv = candidate.argmax(axis=1)[sel]
        rr = r[sel]
        tmp = A[sel, piv].copy()
        A[sel, piv] = A[sel, rr]
        A[sel, rr] = tmp
        A[sel, rr] = MUL[INV[A[sel, rr, col]][:, None], A[sel, rr]]
        mask = rows[None, :] != rr[:, None]
        factors = NEG[A[sel][:, :, col]]
        upd = ADD[A[sel], MUL[factors[:, :, None], A[sel, rr][:, None, :]]]
        A[sel] = np.where(mask[:, :, None], upd, A[sel])
        r[sel] += 1
    return A


def mat_mul(F: Field, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    ADD, MUL, _, _ = F.tables
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    for k in range(A.shape[1]):
        out = ADD[out, MUL[A[:, k][:, None], B[k, :][None, :]]]
    return out


def vec_mat(F: Field, v: np.ndarray, A: np.ndarray) -> np.ndarray:
    """Row vector times matrix."""
    return mat_mul(F, np.asarray(v, dtype=np.int64)[None, :], A)[0]


def mat_inv(F: Field, A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("square matrix required")
    aug = np.concatenate([A, np.eye(n, dtype=np.int64)], axis=1)
    R = rref(F, aug)
    if R.shape[0] < n or not np.array_equal(R[:, :n], np.eye(n, dtype=np.int64)):
        raise ValueError("matrix is singular")
    return R[:, n:]


def frob_mat(F: Field, A: np.ndarray, m: int) -> np.ndarray:
    """Entrywise Frobenius x -> x^(p^m)."""
    if m % F.e == 0:
        return np.asarray(A, dtype=np.int64)
    table = np.array([F.frobenius(a, m) for a in range(F.q)], dtype=np.int64)
    return table[np.asarray(A, dtype=np.int64)]


def nullspace(F: Field, A: np.ndarray, n: Optional[int] = None) -> np.ndarray:
    """RREF basis of {v : A v^T = 0} for an (m, n) matrix A."""
    if n is None:
        n = A.shape[1]
    R = rref(F, A) if A.shape[0] else A.reshape(0, n)
    pivots = []
    for row in R:
        pivots.append(int(np.nonzero(row)[0][0]))
    free = [j for j in range(n) if j not in pivots]
    NEG = F.tables[2]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for bi, j in enumerate(free):
        basis[bi, j] = 1
        for ri, pc in enumerate(pivots):
            basis[bi, pc] = NEG[R[ri, j]]
    return rref(F, basis) if len(free) else basis


# -- subspaces --


class Subspace:
    """A subspace of V_n(q) held as its canonical RREF basis.

    Hashable; equality is set equality of subspaces.
    """

    __slots__ = ("space", "basis", "_code")

    def __init__(self, space: VectorSpace, rows, *, _canonical: bool = False):
        rows = np.asarray(rows, dtype=np.int64).reshape(-1, space.n)
        self.space = space
        self.basis = rows if _canonical else rref(space.field, rows)
        self.basis.setflags(write=False)
        self._code = None

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    @property
    def code(self) -> int:
        if self._code is None:
            self._code = encode(self)
        return self._code

    def contains(self, v: np.ndarray) -> bool:
        if not np.any(v):
            return True
        stacked = np.concatenate([self.basis, np.asarray(v, dtype=np.int64)[None, :]])
        return rref(self.space.field, stacked).shape[0] == self.dim

    def vectors(self) -> np.ndarray:
        """(q^k, n) array of all vectors of the subspace."""
        q, k = self.space.q, self.dim
        if k == 0:
            return np.zeros((1, self.space.n), dtype=np.int64)
        idx = np.arange(q**k, dtype=np.int64)
        coeffs = np.stack([(idx // q**j) % q for j in range(k)], axis=1)
        ADD, MUL, _, _ = self.space.field.tables
        out = np.zeros((q**k, self.space.n), dtype=np.int64)
        for j in range(k):
            out = ADD[out, MUL[coeffs[:, j][:, None], self.basis[j][None, :]]]
        return out

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.space == other.space
            and self.code == other.code
        )

    def __hash__(self):
        return hash((self.space.n, self.space.q, self.code))

    def __repr__(self):
        rows = ",".join("(" + " ".join(map(str, r)) + ")" for r in self.basis)
        return f"<{rows}> in {self.space}"


def echelon_canonical(space: VectorSpace, rows: Iterable) -> Subspace:
    """Canonical subspace spanned by the given vectors (empty -> zero space)."""
    rows = list(rows)
    if not rows:
        return Subspace(space, space.zeros(0), _canonical=True)
    return Subspace(space, np.asarray(rows, dtype=np.int64))


def span(space: VectorSpace, *rows) -> Subspace:
    return echelon_canonical(space, rows)


def subspace_meet(A: Subspace, B: Subspace) -> Subspace:
    """A intersect B, via the kernel of the stacked basis."""
    if A.space != B.space:
        raise ValueError("subspaces in different ambient spaces")
    F = A.space.field
    if A.dim == 0 or B.dim == 0:
        return echelon_canonical(A.space, [])
    stacked = np.concatenate([A.basis, B.basis])  # (a+b, n)
    ker = nullspace(F, stacked.T, n=stacked.shape[0])  # rows: coeffs with sum = 0
    if ker.shape[0] == 0:
        return echelon_canonical(A.space, [])
    vecs = mat_mul(F, ker[:, : A.dim], A.basis)
    return Subspace(A.space, vecs)


def subspace_join(A: Subspace, B: Subspace) -> Subspace:
    if A.space != B.space:
        raise ValueError("subspaces in different ambient spaces")
    return Subspace(A.space, np.concatenate([A.basis, B.basis]))


def meet_dim(A: Subspace, B: Subspace) -> int:
    """dim(A ∩ B) via the modular law, cheaper than building the meet."""
    F = A.space.field
    join_rank = int(rank_batch(F, np.concatenate([A.basis, B.basis])[None, :, :])[0])
    return A.dim + B.dim - join_rank


def annihilator(A: Subspace) -> Subspace:
    """{v : v . u = 0 for all u in A} under the standard dot product."""
    F = A.space.field
    return Subspace(A.space, nullspace(F, A.basis, n=A.space.n), _canonical=True)


# -- integer codes --


def encode(A: Subspace) -> int:
    n, q = A.space.n, A.space.q
    code = 0
    for entry in A.basis.reshape(-1)[::-1]:
        code = code * q + int(entry)
    return code * (n + 1) + A.dim


def decode(space: VectorSpace, code: int) -> Subspace:
    n, q = space.n, space.q
    if code < 0:
        raise ValueError("malformed code")
    k = code % (n + 1)
    rest = code // (n + 1)
    entries = []
    for _ in range(k * n):
        entries.append(rest % q)
        rest //= q
    if rest:
        raise ValueError("malformed code: trailing digits")
    basis = np.array(entries, dtype=np.int64).reshape(k, n) if k else space.zeros(0)
    sub = Subspace(space, basis)
    if not np.array_equal(sub.basis, basis):
        raise ValueError("malformed code: matrix not in RREF")
    return sub


def encode_batch(space: VectorSpace, mats: np.ndarray) -> np.ndarray:
    """Codes of a (B, k, n) stack of canonical RREF bases, as int64."""
    B, k, n = mats.shape
    q = space.q
    if k and (n + 1) * q ** (k * n) >= 2**62:
        raise BudgetExceeded(
            f"subspace codes for k={k}, n={n}, q={q} overflow the int64 engine"
        )
    flat = mats.reshape(B, k * n)
    weights = q ** np.arange(k * n, dtype=np.int64)
    return flat @ weights * (n + 1) + k


def decode_batch(space: VectorSpace, codes: np.ndarray, k: int) -> np.ndarray:
    """(B, k, n) stack of basis matrices from codes, all of dimension k."""
    n, q = space.n, space.q
    codes = np.asarray(codes, dtype=np.int64)
    if ((codes % (n + 1)) != k).any():
        raise ValueError("codes of mixed dimension passed to decode_batch")
    rest = codes // (n + 1)
    digits = np.stack(
        [(rest // q**i) % q for i in range(k * n)], axis=1
    )
    return digits.reshape(len(codes), k, n)


def annihilator_batch(F: Field, mats: np.ndarray) -> np.ndarray:
    """Dot-product annihilators of a (B, k, n) stack of RREF bases.

    Returns a (B, n-k, n) stack of (not necessarily canonical) bases of
    {v : v . u = 0 for all rows u}, built from the closed-form nullspace of
    an RREF matrix, grouped by pivot pattern.
    """
    NEG = F.tables[2]
    B, k, n = mats.shape
    out = np.zeros((B, n - k, n), dtype=np.int64)
    if k == 0:
        out[:] = np.eye(n, dtype=np.int64)[None, :, :]
        return out
    pivots = np.argmax(mats != 0, axis=2)  # (B, k); rows are nonzero in RREF
    pattern = (1 << pivots.astype(np.int64)).sum(axis=1)
    for pat in np.unique(pattern):
        sel = np.nonzero(pattern == pat)[0]
        piv = [j for j in range(n) if (int(pat) >> j) & 1]
        free = [j for j in range(n) if not ((int(pat) >> j) & 1)]
        sub = mats[sel]
        blk = np.zeros((len(sel), n - k, n), dtype=np.int64)
        blk[:, np.arange(n - k), free] = 1
        # RREF row order matches pivot order, so row r has pivot piv[r]
        for r in range(k):
            blk[:, :, piv[r]] = NEG[sub[:, r, free]]
        out[sel] = blk
    return out


def apply_element(A: Subspace, g) -> Subspace:
    """Image of A under a group element (mat, frob, flip).

    The Frobenius twist is applied to coordinates first, then the graph
    flip (annihilator under the dot product), then the linear part.
    """
    F = A.space.field
    rows = A.basis
    if g.frob % F.e:
        rows = frob_mat(F, rows, g.frob)
    cur = Subspace(A.space, rows)
    if getattr(g, "flip", False):
        cur = annihilator(cur)
    if cur.dim == 0:
        return cur
    return Subspace(A.space, mat_mul(F, cur.basis, np.asarray(g.mat, dtype=np.int64)))


# -- enumeration --


def gaussian_binomial(n: int, k: int, q: int) -> int:
    if not 0 <= k <= n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den


def enumerate_subspaces(
    space: VectorSpace,
    k: int,
    predicate=None,
    budget: int = 5_000_000,
) -> Iterator[Subspace]:
    """All k-subspaces of the space, each exactly once, in code order."""
    n, q = space.n, space.q
    if not 0 <= k <= n:
        raise ValueError(f"k = {k} outside [0, {n}]")
    total = gaussian_binomial(n, k, q)
    if total > budget:
        raise BudgetExceeded(
            f"{total} k-subspaces exceed the budget of {budget}"
        )
    if k == 0:
        zero = echelon_canonical(space, [])
        if predicate is None or predicate(zero):
            yield zero
        return
    subs = []
    for pivots in itertools.combinations(range(n), k):
        free_pos = [
            (i, j)
            for i in range(k)
            for j in range(pivots[i] + 1, n)
            if j not in pivots
        ]
        template = np.zeros((k, n), dtype=np.int64)
        for i, p in enumerate(pivots):
            template[i, p] = 1
        for values in itertools.product(range(q), repeat=len(free_pos)):
            mat = template.copy()
            for (i, j), v in zip(free_pos, values):
                mat[i, j] = v
            subs.append(Subspace(space, mat, _canonical=True))
    assert len(subs) == total
    subs.sort(key=lambda s: s.code)
    for s in subs:
        if predicate is None or predicate(s):
            yield s
