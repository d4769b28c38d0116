"""Symplectic, unitary and quadratic geometries on V_n(q).

A :class:`ClassicalSpace` carries the Gram matrix of the (sesqui)bilinear
form in the standard coordinate basis, plus the quadratic values on basis
vectors when a quadratic form is present.  The coordinate basis layout is
fixed: hyperbolic e-block, then f-block, then x, then y, so explicit
vector constructions can be written down literally.

Subspace classification (totally singular / non-degenerate with O+/O-
subtype / non-singular point for even q) and the exact Witt index via
hyperbolic-plane splitting live here, together with closed-form counting
oracles for generator validation.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import orders
from .gf import Field, make_field, special_params
from .linalg import (
    Subspace,
    VectorSpace,
    echelon_canonical,
    gaussian_binomial,
    mat_mul,
    nullspace,
    rref,
    subspace_meet,
)

KINDS = ("linear", "symplectic", "unitary", "quadratic")


@dataclass(frozen=True)
class SubspaceClass:
    tag: str  # totally_singular | nondegenerate | nonsingular_point_q_even | degenerate_other | any
    subtype: str = ""  # "O+", "O-", "odd" for non-degenerate quadratic even/odd dim

    def __str__(self):
        return self.tag + (f"[{self.subtype}]" if self.subtype else "")


TOTALLY_SINGULAR = SubspaceClass("totally_singular")
NONDEGENERATE = SubspaceClass("nondegenerate")


class ClassicalSpace:
    """V_n(q) with a classical form in standard coordinates."""

    def __init__(self, kind: str, n: int, F: Field, epsilon: str = ""):
        if kind not in KINDS:
            raise ValueError(f"unknown form kind {kind!r}")
        self.kind = kind
        self.epsilon = epsilon
        self.field = F
        self.space = VectorSpace(F, n)
        self.n = n
        self.zeta: Optional[int] = None
        self.subfield: Optional[Field] = None
        self.gram: Optional[np.ndarray] = None
        self.qdiag: Optional[np.ndarray] = None
        self._labels: dict[str, int] = {}

        if kind == "linear":
            if epsilon:
                raise ValueError("linear spaces carry no sign")
            return

        gram = np.zeros((n, n), dtype=np.int64)
        if kind == "symplectic":
            if n % 2 or epsilon:
                raise ValueError("symplectic space needs even n and no sign")
            m = n // 2
            for i in range(m):
                gram[i, m + i] = 1
                gram[m + i, i] = F.neg(1)
            self._set_ef_labels(m)
        elif kind == "unitary":
            if F.e % 2:
                raise ValueError("unitary space needs a quadratic-extension field")
            if epsilon:
                raise ValueError("unitary spaces carry no sign")
            self.subfield = make_field(F.p, F.e // 2)
            m = n // 2
            for i in range(m):
                gram[i, m + i] = 1
                gram[m + i, i] = 1
            if n % 2:
                gram[n - 1, n - 1] = 1
                self._labels["x"] = n - 1
            self._set_ef_labels(m)
        else:  # quadratic
            qdiag = np.zeros(n, dtype=np.int64)
            if n % 2:
                if F.p == 2:
                    raise ValueError(
                        "odd-dimensional quadratic space over even q is rejected: "
                        "its polar form is always degenerate"
                    )
                if epsilon not in ("", "o"):
                    raise ValueError("odd-dimensional quadratic space has no +/- sign")
                self.epsilon = "o"
                m = (n - 1) // 2
                for i in range(m):
                    gram[i, m + i] = gram[m + i, i] = 1
                qdiag[n - 1] = 1
                self._labels["x"] = n - 1
                self._set_ef_labels(m)
            else:
                if epsilon not in ("+", "-"):
                    raise ValueError("even-dimensional quadratic space needs a sign")
                m = n // 2
                if epsilon == "+":
                    for i in range(m):
                        gram[i, m + i] = gram[m + i, i] = 1
                    self._set_ef_labels(m)
                else:
                    for i in range(m - 1):
                        gram[i, m - 1 + i] = gram[m - 1 + i, i] = 1
                    gram[n - 2, n - 1] = gram[n - 1, n - 2] = 1
                    self.zeta = special_params(F, "zeta")
                    qdiag[n - 2] = 1
                    qdiag[n - 1] = self.zeta
                    self._labels["x"] = n - 2
                    self._labels["y"] = n - 1
                    self._set_ef_labels(m - 1)
            if F.p != 2:
                # polar form diagonal f(v, v) = 2 Q(v)
                two = F.add(1, 1)
                for i in range(n):
                    gram[i, i] = F.mul(two, int(qdiag[i]))
            self.qdiag = qdiag
        self.gram = gram

    def _set_ef_labels(self, m: int):
        for i in range(1, m + 1):
            self._labels[f"e{i}"] = i - 1
            self._labels[f"f{i}"] = m + i - 1
        self.m = m

    # -- standard basis access --

    def e(self, i: int) -> np.ndarray:
        return self.space.basis_vector(self._labels[f"e{i}"])

    def f(self, i: int) -> np.ndarray:
        return self.space.basis_vector(self._labels[f"f{i}"])

    def x(self) -> np.ndarray:
        return self.space.basis_vector(self._labels["x"])

    def y(self) -> np.ndarray:
        return self.space.basis_vector(self._labels["y"])

    def has_label(self, name: str) -> bool:
        return name in self._labels

    def vec(self, *terms) -> np.ndarray:
        """Sum of (coefficient, vector) terms or bare vectors."""
        F = self.field
        out = np.zeros(self.n, dtype=np.int64)
        ADD, MUL, _, _ = F.tables
        for t in terms:
            if isinstance(t, tuple):
                c, v = t
                out = ADD[out, MUL[c % F.q if c >= 0 else F.neg(-c), np.asarray(v)]]
            else:
                out = ADD[out, np.asarray(t)]
        return out

    # -- form evaluation --

    def _conj_rows(self, rows: np.ndarray) -> np.ndarray:
        if self.kind != "unitary":
            return rows
        table = np.array([self.field.conj(a) for a in range(self.field.q)], dtype=np.int64)
        return table[rows]

    def form_matrix(self, U: np.ndarray, V: np.ndarray) -> np.ndarray:
        """(len(U), len(V)) matrix of f(u, v) values."""
        if self.gram is None:
            raise ValueError("linear space has no form")
        F = self.field
        U = np.atleast_2d(np.asarray(U, dtype=np.int64))
        V = np.atleast_2d(np.asarray(V, dtype=np.int64))
        return mat_mul(F, mat_mul(F, U, self.gram), self._conj_rows(V).T)

    def eval_form(self, u, v) -> int:
        return int(self.form_matrix(np.asarray(u), np.asarray(v))[0, 0])

    def q_values(self, V: np.ndarray) -> np.ndarray:
        """Q(v) for each row of V."""
        if self.kind != "quadratic":
            raise ValueError(f"no quadratic form on a {self.kind} space")
        F = self.field
        ADD, MUL, _, _ = F.tables
        V = np.atleast_2d(np.asarray(V, dtype=np.int64))
        out = np.zeros(V.shape[0], dtype=np.int64)
        for i in range(self.n):
            out = ADD[out, MUL[MUL[V[:, i], V[:, i]], int(self.qdiag[i])]]
            for j in range(i + 1, self.n):
                g = int(self.gram[i, j])
                if g:
                    out = ADD[out, MUL[MUL[V[:, i], V[:, j]], g]]
        return out

    def eval_Q(self, v) -> int:
        return int(self.q_values(np.asarray(v))[0])

    def is_singular_vector(self, v) -> bool:
        """Q(v) = 0 for quadratic spaces, f(v, v) = 0 otherwise."""
        if self.kind == "quadratic":
            return self.eval_Q(v) == 0
        return self.eval_form(v, v) == 0

    # -- perp, radical, classification --

    def perp(self, A: Subspace) -> Subspace:
        F = self.field
        if A.dim == 0:
            return echelon_canonical(self.space, np.eye(self.n, dtype=np.int64))
        M = mat_mul(F, A.basis, self.gram)
        M = self._conj_rows(M)
        return Subspace(self.space, nullspace(F, M, n=self.n), _canonical=True)

    def perp_radical(self, A: Subspace) -> tuple[Subspace, Subspace]:
        p = self.perp(A)
        return p, subspace_meet(A, p)

    def restricted(self, A: Subspace) -> tuple[np.ndarray, Optional[np.ndarray]]:
        """(gram, qdiag) of the form restricted to A, in A-basis coordinates."""
        gram_r = self.form_matrix(A.basis, A.basis)
        qdiag_r = self.q_values(A.basis) if self.kind == "quadratic" else None
        return gram_r, qdiag_r

    def is_totally_singular(self, A: Subspace) -> bool:
        gram_r, qdiag_r = self.restricted(A)
        if gram_r.any():
            return False
        return qdiag_r is None or not qdiag_r.any()

    def classify_subspace(self, A: Subspace) -> SubspaceClass:
        if self.kind == "linear":
            return SubspaceClass("any")
        if self.is_totally_singular(A):
            return TOTALLY_SINGULAR
        _, radical = self.perp_radical(A)
        if radical.dim == 0:
            if self.kind == "quadratic":
                if A.dim % 2:
                    return SubspaceClass("nondegenerate", "odd")
                w = self.witt_index(A)
                return SubspaceClass("nondegenerate", "O+" if w == A.dim // 2 else "O-")
            return NONDEGENERATE
        if (
            self.kind == "quadratic"
            and self.field.p == 2
            and A.dim == 1
            and self.eval_Q(A.basis[0]) != 0
        ):
            return SubspaceClass("nonsingular_point_q_even")
        return SubspaceClass("degenerate_other")

    def witt_index(self, A: Optional[Subspace] = None) -> int:
        """Dimension of a maximal totally singular subspace (of A, if given)."""
        if A is None:
            A = echelon_canonical(self.space, np.eye(self.n, dtype=np.int64))
        gram_r, qdiag_r = self.restricted(A)
        conj = None
        if self.kind == "unitary":
            conj = np.array([self.field.conj(a) for a in range(self.field.q)], dtype=np.int64)
        return _witt_split(self.field, gram_r, qdiag_r, conj)

    # -- counting oracles --

    def singular_vector_count(self, dim: Optional[int] = None, epsilon: Optional[str] = None) -> int:
        """Nonzero singular vectors of a non-degenerate space of this kind."""
        d = self.n if dim is None else dim
        eps = self.epsilon if epsilon is None else epsilon
        if self.kind == "symplectic":
            return self.field.q**d - 1
        if self.kind == "unitary":
            q0 = self.subfield.q
            return (q0**d - (-1) ** d) * (q0 ** (d - 1) - (-1) ** (d - 1))
        if self.kind == "quadratic":
            q = self.field.q
            if d % 2:
                return q ** (d - 1) - 1
            m = d // 2
            e = 1 if eps == "+" else -1
            return (q**m - e) * (q ** (m - 1) + e)
        raise ValueError("no form")

    def predict_counts(self, cls: SubspaceClass, k: int) -> int:
        q = self.field.q
        n = self.n
        if self.kind == "linear":
            return gaussian_binomial(n, k, q)
        if cls.tag == "totally_singular":
            num = den = 1
            for i in range(k):
                num *= self.singular_vector_count(dim=n - 2 * i) * q**i
                den *= q**k - q**i
            if den == 0 or num % den:
                raise ValueError("unsupported combination: enumerate instead")
            return num // den
        if cls.tag == "nonsingular_point_q_even":
            if not (self.kind == "quadratic" and self.field.p == 2 and k == 1):
                raise ValueError("unsupported combination: enumerate instead")
            e = 1 if self.epsilon == "+" else -1
            return q ** (n - 1) - e * q ** (n // 2 - 1)
        if cls.tag == "nondegenerate":
            total = self._isometry_order(n, self.epsilon)
            if self.kind == "quadratic":
                if k % 2 == 0:
                    if cls.subtype not in ("O+", "O-"):
                        raise ValueError("even-dimensional subspace needs a subtype")
                    sub_eps = "+" if cls.subtype == "O+" else "-"
                    perp_eps = self._complement_eps(sub_eps)
                    inner = orders.order_go(k, q, sub_eps)
                    outer = self._isometry_order(n - k, perp_eps)
                else:
                    raise ValueError("unsupported combination: enumerate instead")
            else:
                inner = self._isometry_order(k, "")
                outer = self._isometry_order(n - k, "")
            if total % (inner * outer):
                raise ValueError("unsupported combination: enumerate instead")
            return total // (inner * outer)
        raise ValueError("unsupported combination: enumerate instead")

    def _complement_eps(self, sub_eps: str) -> str:
        """Type of the perp of a non-degenerate sub-space of type sub_eps."""
        if self.n % 2:
            return "o"
        want = 1 if self.epsilon == "+" else -1
        got = 1 if sub_eps == "+" else -1
        return "+" if want * got == 1 else "-"

    def _isometry_order(self, d: int, eps: str) -> int:
        q = self.field.q
        if self.kind == "symplectic":
            return orders.order_sp(d, q)
        if self.kind == "unitary":
            return orders.order_gu(d, self.subfield.q)
        if self.kind == "quadratic":
            return orders.order_go(d, q, eps if d % 2 == 0 else "o")
        raise ValueError("no form")

    # -- serialization --

    def key(self) -> str:
        return json.dumps(
            {
                "kind": self.kind,
                "n": self.n,
                "p": self.field.p,
                "e": self.field.e,
                "epsilon": self.epsilon,
                "zeta": self.zeta,
            },
            sort_keys=True,
        )

    def __eq__(self, other):
        return isinstance(other, ClassicalSpace) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        sign = {"+": "^+", "-": "^-"}.get(self.epsilon, "")
        return f"{self.kind}{sign} space of dim {self.n} over {self.field}"


def make_space(kind: str, n: int, F: Field, epsilon: str = "") -> ClassicalSpace:
    return ClassicalSpace(kind, n, F, epsilon)


def arf_type(S: ClassicalSpace, qdiag: np.ndarray) -> str:
    """Type of a quadratic form given by basis values polarizing to S.gram.

    q even only; '+' iff the form has maximal Witt index n/2 (Arf invariant
    0 under the standard convention).
    """
    if S.field.p != 2 or S.n % 2:
        raise ValueError("Arf type needs even q and even dimension")
    if S.kind not in ("symplectic", "quadratic"):
        raise ValueError("needs an alternating polar form")
    qdiag = np.asarray(qdiag, dtype=np.int64)
    if qdiag.shape != (S.n,):
        raise ValueError("one quadratic value per basis vector required")
    gram = S.gram.copy()
    w = _witt_split(S.field, gram, qdiag)
    return "+" if w == S.n // 2 else "-"


# -- Witt index by hyperbolic splitting --


def _witt_split(
    F: Field,
    gram: np.ndarray,
    qdiag: Optional[np.ndarray],
    conj: Optional[np.ndarray] = None,
) -> int:
    """Maximal totally singular subspace dimension of a (possibly
    degenerate) form given by its Gram matrix and optional quadratic
    basis values, both in local coordinates.  ``conj`` is the field
    conjugation table for hermitian forms."""
    k = gram.shape[0]
    if k == 0:
        return 0
    ADD, MUL, NEG, INV = F.tables
    q = F.q
    CJ = conj if conj is not None else np.arange(q, dtype=np.int64)

    def local_q(V: np.ndarray) -> np.ndarray:
        out = np.zeros(V.shape[0], dtype=np.int64)
        for i in range(k):
            if qdiag is not None and qdiag[i]:
                out = ADD[out, MUL[MUL[V[:, i], V[:, i]], int(qdiag[i])]]
            for j in range(i + 1, k):
                g = int(gram[i, j])
                if g:
                    out = ADD[out, MUL[MUL[V[:, i], V[:, j]], g]]
        return out

    def local_f(U: np.ndarray, V: np.ndarray) -> np.ndarray:
        return mat_mul(F, mat_mul(F, U, gram), CJ[V].T)

    def singular_mask(V: np.ndarray) -> np.ndarray:
        if qdiag is not None:
            return local_q(V) == 0
        return np.array([local_f(v[None, :], v[None, :])[0, 0] == 0 for v in V])

    cur = np.eye(k, dtype=np.int64)  # rows span the current subspace
    count = 0
    while cur.shape[0] >= 2:
        d = cur.shape[0]
        idx = np.arange(1, q**d, dtype=np.int64)
        coeffs = np.stack([(idx // q**j) % q for j in range(d)], axis=1)
        vecs = np.zeros((len(idx), k), dtype=np.int64)
        for j in range(d):
            vecs = ADD[vecs, MUL[coeffs[:, j][:, None], cur[j][None, :]]]
        sing = singular_mask(vecs)
        if not sing.any():
            break
        fvals = local_f(vecs, cur)  # (N, d)
        outside_radical = (fvals != 0).any(axis=1)
        good = sing & outside_radical
        if not good.any():
            break
        u = vecs[np.nonzero(good)[0][0]]
        fu = local_f(vecs, u[None, :])[:, 0]
        v = vecs[np.nonzero(fu != 0)[0][0]]
        # pass to the perp of <u, v> inside the current subspace;
        # x -> f(x, u) has coefficient column gram @ conj(u)
        cu = mat_mul(F, gram, CJ[u][:, None])
        cv = mat_mul(F, gram, CJ[v][:, None])
        cond = np.concatenate(
            [mat_mul(F, cur, cu), mat_mul(F, cur, cv)], axis=1
        ).T  # (2, d)
        sol = nullspace(F, cond, n=d)
        cur = rref(F, mat_mul(F, sol, cur)) if sol.shape[0] else np.zeros((0, k), dtype=np.int64)
        count += 1
    # singular part of the radical of what remains
    if cur.shape[0]:
        d = cur.shape[0]
        grm = local_f(cur, cur)
        radc = nullspace(F, grm, n=d)
        rad = rref(F, mat_mul(F, radc, cur)) if radc.shape[0] else np.zeros((0, k), dtype=np.int64)
        if rad.shape[0]:
            dr = rad.shape[0]
            idx = np.arange(q**dr, dtype=np.int64)
            coeffs = np.stack([(idx // q**j) % q for j in range(dr)], axis=1)
            vecs = np.zeros((len(idx), k), dtype=np.int64)
            for j in range(dr):
                vecs = ADD[vecs, MUL[coeffs[:, j][:, None], rad[j][None, :]]]
            sing = singular_mask(vecs)
            sv = vecs[sing]
            count += rref(F, sv).shape[0] if len(sv) else 0
    return count
