"""Explicit witness constructions: subspace triples, obstruction triples,
common-neighbour vectors, chains, and pair-action elements, each verified
against the exact properties claimed for it.

Every construction is transcribed literally, indices and all.  When a
display leaves a scalar under-determined (or a literal reading fails the
claimed property), the validator reports both the literal attempt and a
repaired variant rather than silently correcting.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .forms import ClassicalSpace, SubspaceClass, TOTALLY_SINGULAR, make_space
from .gf import Field, special_params, square_classes
from .groups import GeneratorSet, GroupElement, compose, identity_element
from .linalg import Subspace, meet_dim, span, subspace_meet


@dataclass
class WitnessReport:
    case: str
    params: dict
    vectors: dict  # symbol -> coordinate list(s)
    checks: list = dc_field(default_factory=list)  # {name, passed, detail}
    certificate: dict = dc_field(default_factory=dict)

    def check(self, name: str, passed: bool, detail: str = ""):
        self.checks.append({"name": name, "passed": bool(passed), "detail": detail})
        return passed

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "case": self.case,
            "params": self.params,
            "vectors": self.vectors,
            "checks": self.checks,
            "certificate": self.certificate,
            "passed": self.passed,
        }


# -- chains in the linear case ------------------------------------------


def witness_psl_chain(S: ClassicalSpace, A: Subspace, B: Subspace) -> list[Subspace]:
    """Explicit path A = A_0, A_1, ..., A_{k-r} = B of k-spaces with
    consecutive intersections of dimension k-1, where r = dim(A meet B).

    Built from a merged basis: a basis of the meet, extended to a basis
    {e_i} of A and a basis {f_i} of B; step i swaps e_{k-i+1} for f_{k-i+1}.
    """
    F = S.field
    sp = S.space
    k = A.dim
    if B.dim != k:
        raise ValueError("chain endpoints must have equal dimension")
    M = subspace_meet(A, B)
    r = M.dim
    e_rows = _extend_rows(F, M.basis, A)
    f_rows = _extend_rows(F, M.basis, B)
    chain = [A]
    for i in range(1, k - r + 1):
        rows = list(M.basis) + e_rows[: k - r - i] + f_rows[k - r - i :]
        chain.append(span(sp, *rows))
    assert chain[-1].code == B.code
    for X, Y in zip(chain, chain[1:]):
        assert meet_dim(X, Y) == k - 1
    return chain


def _extend_rows(F: Field, base_rows: np.ndarray, target: Subspace) -> list[np.ndarray]:
    """Rows of ``target`` extending the independent ``base_rows`` to a
    basis of ``target``."""
    from .linalg import rref

    rows = list(base_rows)
    out = []
    for v in target.basis:
        cand = np.array(rows + [v], dtype=np.int64)
        if rref(F, cand).shape[0] > len(rows):
            rows.append(v)
            out.append(v)
    return out


# -- subspace triples (lower-bound witnesses) ----------------------------

TRIPLE_CASES = (
    "sp_ts",
    "sp_nd",
    "su_nd",
    "su_ts",
    "o_plus_2l_small_k",
    "o_plus_2l_half",
    "o_minus_2l_minus_ambient",
    "o_minus_2l_plus_ambient",
    "o_odd_k_minus",
    "o_odd_k_plus",
    "o_ts",
)


def witness_subspace_triple(
    case: str, n: int, F: Field, k: int, eps: str = ""
) -> tuple[ClassicalSpace, str, Subspace, Subspace, Subspace, WitnessReport]:
    """The literal triple (U, U', U'') for a lower-bound case, with the
    guaranteed intersection dimensions verified.

    Returns (space, family, U, U', U'', report); the family names the
    group whose single orbit is expected to contain all three.
    """
    rep = WitnessReport(case, {"n": n, "q": F.q, "k": k, "eps": eps}, {})
    if case == "sp_ts":
        S = make_space("symplectic", n, F)
        if k > S.m:
            raise ValueError("k exceeds the Witt index")
        U = span(S.space, *[S.e(i) for i in range(1, k + 1)])
        U1 = span(S.space, *[S.e(i) for i in range(1, k)], S.f(k))
        U2 = span(S.space, *[S.f(i) for i in range(1, k + 1)])
        fam = "Sp"
        _triple_checks(rep, S, U, U1, U2, k, want_cls=TOTALLY_SINGULAR)
    elif case == "sp_nd":
        if k % 2:
            raise ValueError("symplectic nondegenerate spaces have even dim")
        ell = k // 2
        S = make_space("symplectic", n, F)
        if 2 * ell > S.m:
            raise ValueError("n too small for the display")
        U = span(S.space, *[S.e(i) for i in range(1, ell + 1)],
                 *[S.f(i) for i in range(1, ell + 1)])
        U1 = span(S.space, *[S.e(i) for i in range(1, ell + 1)],
                  *[S.f(i) for i in range(1, ell)],
                  S.vec(S.f(ell), S.f(ell + 1)))
        U2 = span(S.space, *[S.e(i) for i in range(ell + 1, 2 * ell + 1)],
                  *[S.f(i) for i in range(ell + 1, 2 * ell + 1)])
        fam = "Sp"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate"))
    elif case == "su_nd":
        S = make_space("unitary", n, F)
        if 2 * k > n:
            raise ValueError("n too small for the display")
        from .groups import _orthonormal_unitary_frame

        O = _orthonormal_unitary_frame(S)  # rows form an orthonormal basis
        U = span(S.space, *O[:k])
        U1 = span(S.space, *O[: k - 1], O[k])
        U2 = span(S.space, *O[k : 2 * k])
        fam = "GU"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate"))
    elif case == "su_ts":
        S = make_space("unitary", n, F)
        if k > S.witt_index():
            raise ValueError("k exceeds the Witt index")
        U = span(S.space, *[S.e(i) for i in range(1, k + 1)])
        U1 = span(S.space, *[S.e(i) for i in range(1, k)], S.f(k))
        U2 = span(S.space, *[S.f(i) for i in range(1, k + 1)])
        fam = "GU"
        _triple_checks(rep, S, U, U1, U2, k, want_cls=TOTALLY_SINGULAR)
    elif case == "o_ts":
        S = make_space("quadratic", n, F, eps)
        if k > S.witt_index():
            raise ValueError("k exceeds the Witt index")
        U = span(S.space, *[S.e(i) for i in range(1, k + 1)])
        U1 = span(S.space, *[S.e(i) for i in range(1, k)], S.f(k))
        U2 = span(S.space, *[S.f(i) for i in range(1, k + 1)])
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k, want_cls=TOTALLY_SINGULAR)
    elif case in ("o_plus_2l_small_k", "o_plus_2l_half"):
        if k % 2:
            raise ValueError("this display needs k = 2l")
        ell = k // 2
        S = make_space("quadratic", n, F, eps)
        es, fs = S.e, S.f
        U = span(S.space, *[es(i) for i in range(1, ell + 1)],
                 *[fs(i) for i in range(1, ell + 1)])
        if case == "o_plus_2l_small_k":
            if 2 * ell + 1 > S.m:
                raise ValueError("n too small for the display")
            U1 = span(S.space, *[es(i) for i in range(1, ell + 1)],
                      *[fs(i) for i in range(1, ell)],
                      S.vec(fs(ell), fs(ell + 1)))
            U2 = span(S.space, *[es(i) for i in range(ell + 1, 2 * ell + 1)],
                      *[fs(i) for i in range(ell + 1, 2 * ell + 1)])
        else:
            # needs labels x (and y): odd n or minus-type ambient
            if not S.has_label("x") or not S.has_label("y"):
                raise ValueError("half-dimension display needs x and y labels")
            alpha = S.eval_Q(S.y())
            rep.params["alpha"] = alpha
            U1 = span(S.space, *[es(i) for i in range(1, ell + 1)],
                      *[fs(i) for i in range(1, ell)],
                      S.vec(es(ell), (F.neg(1), fs(ell)), S.x()))
            U2 = span(
                S.space,
                *[es(i) for i in range(ell + 1, 2 * ell)],
                *[fs(i) for i in range(ell + 1, 2 * ell)],
                S.vec(es(1), (F.neg(1), fs(1)), S.x()),
                S.vec(es(1), (F.neg(alpha), fs(1)), S.y()),
            )
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate", "O+"))
    elif case == "o_minus_2l_minus_ambient":
        if k % 2:
            raise ValueError("this display needs k = 2l")
        ell = k // 2
        S = make_space("quadratic", n, F, "-")
        alpha = S.eval_Q(S.y())
        rep.params["alpha"] = alpha
        es, fs = S.e, S.f
        common = [es(i) for i in range(1, ell)] + [fs(i) for i in range(1, ell)]
        u_last = S.vec(fs(ell), (alpha, es(ell)))
        U = span(S.space, *common, u_last, S.vec(fs(ell + 1), S.x(), es(ell)))
        U1 = span(S.space, *common, u_last,
                  S.vec(fs(ell + 1), es(ell + 1), es(ell)))
        U2 = span(S.space, *[es(i) for i in range(ell + 1, 2 * ell)],
                  *[fs(i) for i in range(ell + 1, 2 * ell)],
                  S.y(), S.vec(es(1), S.x()))
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate", "O-"))
    elif case == "o_minus_2l_plus_ambient":
        if k % 2:
            raise ValueError("this display needs k = 2l")
        ell = k // 2
        if ell < 2:
            # at l = 1 the display's f_l and f_1 coincide and the spans
            # collapse; the construction needs l >= 2
            raise ValueError("this display needs k >= 4")
        S = make_space("quadratic", n, F, "+")
        es, fs = S.e, S.f

        def build(alpha, b=1, c=1):
            common = [es(i) for i in range(1, ell)] + [fs(i) for i in range(1, ell)]
            u_last = S.vec(fs(ell), (alpha, es(ell)))
            U = span(S.space, *common, u_last,
                     S.vec(fs(ell + 1), es(ell + 1), es(ell)))
            U1 = span(S.space, *common, u_last,
                      S.vec(fs(ell + 2), es(ell + 2), es(ell)))
            U2 = span(
                S.space,
                *[es(i) for i in range(ell + 2, 2 * ell + 1)],
                *[fs(i) for i in range(ell + 2, 2 * ell + 1)],
                S.vec(es(1), (alpha, fs(1)), fs(ell)),
                S.vec(es(2), (b, fs(2)), fs(ell + 1), (c, fs(1))),
            )
            return U, U1, U2

        want = SubspaceClass("nondegenerate", "O-")

        def good(trial):
            U, U1, U2 = trial
            return (
                all(S.classify_subspace(x) == want for x in trial)
                and meet_dim(U, U1) == k - 1
                and meet_dim(U, U2) == 0
            )

        # the display's alpha is Q(y) of a minus-type basis; the plus-type
        # ambient has no y, so the module zeta is tried first; if the
        # claimed O- subtype fails, repaired scalars (alpha and the two
        # free coefficients of the last U'' vector) are searched and the
        # repair is reported
        literal = special_params(F, "zeta")
        alpha, b, c = literal, 1, 1
        U, U1, U2 = build(alpha)
        if not good((U, U1, U2)):
            found = next(
                (
                    (ca, cb, cc)
                    for ca in range(1, F.q)
                    for cb in range(1, F.q)
                    for cc in range(F.q)
                    if good(build(ca, cb, cc))
                ),
                None,
            )
            if found is not None:
                alpha, b, c = found
                U, U1, U2 = build(alpha, b, c)
        rep.params["alpha_literal"] = literal
        rep.params["alpha"] = alpha
        rep.params["u2_coeffs"] = [b, c]
        rep.params["alpha_repaired"] = (alpha, b, c) != (literal, 1, 1)
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k, want_cls=want)
    elif case == "o_odd_k_minus":
        if k % 2 == 0:
            raise ValueError("this display needs k = 2l+1")
        ell = (k - 1) // 2
        S = make_space("quadratic", n, F, "-")
        es, fs = S.e, S.f
        common = [es(i) for i in range(1, ell + 1)] + [fs(i) for i in range(1, ell + 1)]
        U = span(S.space, *common, S.x())
        U1 = span(S.space, *common, S.vec(fs(ell + 1), es(ell + 1)))
        others = [es(i) for i in range(ell + 1, 2 * ell + 1)] + \
            [fs(i) for i in range(ell + 1, 2 * ell + 1)]
        # the anisotropic vector closing U'' must put it in the same
        # isometry class as U: in odd dimension (q odd) the discriminant
        # square class decides, and y alone lands in the wrong one, so
        # search the anisotropic plane for a representative that keeps
        # dim(U meet U'') = 0 and matches the discriminant
        target = _square_class(F, _gram_det(F, S, U.basis))
        U2, coeffs = None, (0, 1)
        for a, b in [(0, 1)] + [(a, b) for a in range(F.q)
                                for b in range(1, F.q)]:
            cand = span(S.space, *others, S.vec((a, S.x()), (b, S.y())))
            if meet_dim(U, cand) != 0:
                continue
            if _square_class(F, _gram_det(F, S, cand.basis)) == target:
                U2, coeffs = cand, (a, b)
                break
        if U2 is None:  # keep the literal display; checks fail honestly
            U2 = span(S.space, *others, S.y())
        rep.params["u2_anisotropic_coeffs"] = list(coeffs)
        rep.params["u2_repaired"] = coeffs != (0, 1)
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate", "odd"),
                       meet_u1=k - 1)
        _discriminant_check(rep, F, S, U, U1, U2)
    elif case == "o_odd_k_plus":
        if k % 2 == 0:
            raise ValueError("this display needs k = 2l+1")
        ell = (k - 1) // 2
        S = make_space("quadratic", n, F, "+")
        es, fs = S.e, S.f
        if 2 * ell + 1 > S.m:
            raise ValueError("n too small for the display")
        common = [es(i) for i in range(1, ell + 1)] + [fs(i) for i in range(1, ell + 1)]
        U = span(S.space, *common,
                 S.vec(fs(2 * ell + 1), es(2 * ell + 1), es(ell + 1)))
        U1 = span(S.space, *common, S.vec(fs(ell + 2), es(ell + 2)))
        U2 = span(S.space, *[es(i) for i in range(ell + 2, 2 * ell + 2)],
                  *[fs(i) for i in range(ell + 2, 2 * ell + 2)],
                  S.vec(es(1), fs(1), fs(ell + 1)))
        fam = "GO"
        _triple_checks(rep, S, U, U1, U2, k,
                       want_cls=SubspaceClass("nondegenerate", "odd"),
                       meet_u1=k - 1)
        _discriminant_check(rep, F, S, U, U1, U2)
    else:
        raise ValueError(f"unknown triple case {case!r}")
    rep.vectors = {
        "U": U.basis.tolist(),
        "U1": U1.basis.tolist(),
        "U2": U2.basis.tolist(),
    }
    return S, fam, U, U1, U2, rep


def _gram_det(F: Field, S: ClassicalSpace, basis: np.ndarray) -> int:
    """Determinant of the restricted bilinear form's Gram matrix."""
    G = S.form_matrix(basis, basis)
    rows = [[int(x) for x in row] for row in G]

    def det(M):
        if len(M) == 1:
            return M[0][0]
        total = 0
        for j, lead in enumerate(M[0]):
            if lead == 0:
                continue
            minor = [r[:j] + r[j + 1:] for r in M[1:]]
            term = F.mul(lead, det(minor))
            if j % 2:
                term = F.neg(term)
            total = F.add(total, term)
        return total

    return det(rows)


def _square_class(F: Field, x: int) -> int:
    """0 if x is a nonzero square, 1 if a nonsquare (q odd, x != 0)."""
    is_square, _ = square_classes(F)
    return 0 if is_square(x) else 1


def _discriminant_check(rep: WitnessReport, F: Field, S: ClassicalSpace,
                        U: Subspace, U1: Subspace, U2: Subspace):
    """For odd-dimensional orthogonal subspaces over odd q the
    discriminant square class decides the isometry class, hence the
    orbit; all three members of the triple must agree."""
    if F.p == 2:
        return
    classes = [_square_class(F, _gram_det(F, S, X.basis))
               for X in (U, U1, U2)]
    rep.check("discriminants_match",
              classes[0] == classes[1] == classes[2],
              f"square classes {classes}")


def _triple_checks(
    rep: WitnessReport,
    S: ClassicalSpace,
    U: Subspace,
    U1: Subspace,
    U2: Subspace,
    k: int,
    want_cls: Optional[SubspaceClass] = None,
    meet_u1: Optional[int] = None,
):
    rep.check("dims", U.dim == k and U1.dim == k and U2.dim == k,
              f"dims {U.dim},{U1.dim},{U2.dim}")
    want = k - 1 if meet_u1 is None else meet_u1
    rep.check("meet_U_U1", meet_dim(U, U1) == want,
              f"dim(U ∩ U') = {meet_dim(U, U1)}, want {want}")
    rep.check("meet_U_U2", meet_dim(U, U2) == 0,
              f"dim(U ∩ U'') = {meet_dim(U, U2)}")
    if want_cls is not None:
        for name, sub in (("U", U), ("U1", U1), ("U2", U2)):
            got = S.classify_subspace(sub)
            ok = got.tag == want_cls.tag and (
                not want_cls.subtype or got.subtype == want_cls.subtype
            )
            rep.check(f"class_{name}", ok, f"{got} vs {want_cls}")


# -- half-spin witnesses -------------------------------------------------


def witness_halfspin(n: int, F: Field) -> tuple[ClassicalSpace, Subspace, Subspace, Subspace, WitnessReport]:
    """The three totally singular n/2-spaces W, W', W'' in one half-spin
    orbit: dim(W ∩ W') is 0 (k even) or 1 (k odd), dim(W ∩ W'') = k-2."""
    if n % 2:
        raise ValueError("half-spin witnesses need n even")
    k = n // 2
    S = make_space("quadratic", n, F, "+")
    rep = WitnessReport("halfspin_WWW", {"n": n, "q": F.q, "k": k}, {})
    W = span(S.space, *[S.e(i) for i in range(1, k + 1)])
    if k % 2 == 0:
        W1 = span(S.space, *[S.f(i) for i in range(1, k + 1)])
        want_meet = 0
    else:
        W1 = span(S.space, S.e(1), *[S.f(i) for i in range(2, k + 1)])
        want_meet = 1
    W2 = span(S.space, *[S.e(i) for i in range(1, k - 1)], S.f(k - 1), S.f(k))
    rep.vectors = {"W": W.basis.tolist(), "W1": W1.basis.tolist(),
                   "W2": W2.basis.tolist()}
    rep.check("meet_W_W1", meet_dim(W, W1) == want_meet,
              f"{meet_dim(W, W1)} vs {want_meet}")
    rep.check("meet_W_W2", meet_dim(W, W2) == k - 2,
              f"{meet_dim(W, W2)} vs {k-2}")
    for name, sub in (("W", W), ("W1", W1), ("W2", W2)):
        rep.check(f"ts_{name}", S.is_totally_singular(sub))
    # parity invariant of the half-spin orbit
    rep.check("parity_W1", (k - meet_dim(W, W1)) % 2 == 0)
    rep.check("parity_W2", (k - meet_dim(W, W2)) % 2 == 0)
    return S, W, W1, W2, rep


# -- diameter >= 3 obstructions ------------------------------------------


def witness_diam3_obstruction(
    case: str, n: int, F: Field, eps: str = "", kind: str = "symplectic"
) -> tuple[ClassicalSpace, Subspace, Subspace, Subspace, WitnessReport]:
    """Obstruction triples (U, U', U'') with d(U, U'') >= 3 in the orbital
    of {U, U'}.

    nd2_diam3: nondegenerate 2-spaces meeting in a singular 1-space; any
    common neighbour of U and U'' would be spanned by two perpendicular
    singular vectors, hence totally singular — impossible for a vertex.

    o2minus_q1mod4: O2- type 2-spaces, q = 1 mod 4; a common neighbour
    would contain the singular vector u + s w (s^2 = -1), contradicting
    the O2- type.
    """
    if case == "nd2_diam3":
        S = make_space(kind, n, F, eps if kind == "quadratic" else "")
        rep = WitnessReport(case, {"n": n, "q": F.q, "kind": kind, "eps": eps}, {})
        U = span(S.space, S.e(1), S.f(1))
        U1 = span(S.space, S.vec(S.e(1), S.e(2)), S.f(1))
        U2 = span(S.space, S.e(2), S.f(2))
        rep.vectors = {"U": U.basis.tolist(), "U1": U1.basis.tolist(),
                       "U2": U2.basis.tolist()}
        M = subspace_meet(U, U1)
        rep.check("meet_U_U1_dim", M.dim == 1)
        rep.check("meet_is_singular",
                  all(S.is_singular_vector(v) for v in M.basis if v.any()))
        rep.check("meet_U_U2", meet_dim(U, U2) == 0)
        perp = all(
            S.eval_form(u, v) == 0 for u in U.basis for v in U2.basis
        )
        rep.check("U_perp_U2", perp)
        for name, sub in (("U", U), ("U1", U1), ("U2", U2)):
            got = S.classify_subspace(sub)
            ok = got.tag == "nondegenerate" and (
                kind != "quadratic" or got.subtype == "O+"
            )
            rep.check(f"class_{name}", ok, str(got))
        rep.certificate = {
            "argument": "common neighbour would be spanned by two "
            "perpendicular singular vectors, hence totally singular",
            "U_perp_U2": perp,
        }
        return S, U, U1, U2, rep
    if case == "o2minus_q1mod4":
        if F.q % 4 != 1:
            raise ValueError("needs q = 1 mod 4")
        if n < 7:
            raise ValueError("needs n >= 7")
        S = make_space("quadratic", n, F, eps or ("" if n % 2 else "+"))
        rep = WitnessReport(case, {"n": n, "q": F.q, "eps": S.epsilon}, {})
        # the display's zeta: stated as "x^2+x+1 irreducible", which does
        # not pin a scalar; the module zeta (t^2+t+zeta irreducible) is
        # used, and validation reports whether it yields the O2- type
        zeta = special_params(F, "zeta")
        rep.params["zeta"] = zeta
        rep.params["zeta_reading"] = "t^2+t+zeta irreducible (module reading)"
        U = span(S.space, S.vec(S.e(1), S.f(1)),
                 S.vec(S.e(1), (zeta, S.e(2)), S.f(2)))
        U1 = span(S.space, S.vec(S.e(1), S.f(1)),
                  S.vec(S.e(1), (zeta, S.e(3)), S.f(3)))
        if n == 7 or (n == 8 and S.epsilon == "-"):
            v = S.x()
        else:
            v = S.vec(S.e(4), S.f(4))
        U2 = span(S.space, S.vec((zeta, S.e(3)), S.f(3)), S.vec(S.e(3), v))
        rep.vectors = {"U": U.basis.tolist(), "U1": U1.basis.tolist(),
                       "U2": U2.basis.tolist()}
        u1a, u1b = S.vec(S.e(1), S.f(1)), S.vec(S.e(1), (zeta, S.e(2)), S.f(2))
        rep.check("Q_values", S.eval_Q(u1a) == 1 and S.eval_Q(u1b) == zeta,
                  f"Q = {S.eval_Q(u1a)}, {S.eval_Q(u1b)}")
        rep.check("f_value", S.eval_form(u1a, u1b) == 1)
        got = []
        for name, sub in (("U", U), ("U1", U1), ("U2", U2)):
            c = S.classify_subspace(sub)
            got.append(str(c))
            rep.check(f"class_{name}", c == SubspaceClass("nondegenerate", "O-"),
                      str(c))
        M = subspace_meet(U, U1)
        rep.check("meet_U_U1", M.dim == 1 and S.eval_Q(M.basis[0]) in
                  {F.mul(c, c) for c in range(1, F.q)},
                  "1-space with a square Q value (contains Q = 1 vector)")
        rep.check("meet_U_U2", meet_dim(U, U2) == 0)
        perp = all(S.eval_form(u, w) == 0 for u in U.basis for w in U2.basis)
        rep.check("U_perp_U2", perp)
        sigma = special_params(F, "sqrt_minus_one")
        rep.params["sigma"] = sigma
        # the proof's computation: Q(u + s w) = 1 + s^2 = 0 for any
        # Q(u) = Q(w) = 1 with f(u, w) = 0; spot-verify numerically
        ok = True
        count = 0
        for u in _unit_Q_vectors(S, U):
            for w in _unit_Q_vectors(S, U2):
                if S.eval_form(u, w) != 0:
                    continue
                comb = S.field.tables[0][u, S.field.tables[1][sigma, w]]
                ok = ok and S.eval_Q(comb) == 0
                count += 1
        rep.check("singular_combination", ok and count > 0,
                  f"{count} pairs checked")
        rep.certificate = {
            "argument": "common neighbour W = <u, w> with Q(u) = Q(w) = 1, "
            "f(u, w) = 0 contains the singular vector u + sigma w, so W is "
            "O2+, not a vertex",
            "sigma": sigma,
            "pairs_checked": count,
        }
        return S, U, U1, U2, rep
    raise ValueError(f"unknown obstruction case {case!r}")


def _unit_Q_vectors(S: ClassicalSpace, A: Subspace) -> list[np.ndarray]:
    F = S.field
    out = []
    for v in A.vectors()[1:]:
        if S.eval_Q(v) == 1:
            out.append(v)
    return out


def no_common_neighbor_certificate(
    S: ClassicalSpace,
    U: Subspace,
    U2: Subspace,
    neighbor_predicate,
    candidates,
) -> dict:
    """Verify no candidate vertex is adjacent to both U and U''."""
    found = []
    for W in candidates:
        if neighbor_predicate(U, W) and neighbor_predicate(U2, W):
            found.append(W.code)
    return {"candidates": len(list(candidates)) if not found else None,
            "common_neighbors": found, "holds": not found}


# -- common-neighbour triples (diameter = 2 proofs) ----------------------


def witness_common_neighbor(
    case: str, n: int, F: Field, lam: int, mu: Optional[int] = None, eps: str = "",
    sigma: Optional[int] = None,
) -> tuple[ClassicalSpace, tuple, WitnessReport]:
    """The literal common-neighbour vectors with their displayed form
    values verified exactly.

    unitary_point: (v, w, u) with f all 1 on the diagonal, f(v,w) = conj(mu),
    f(u,v) = f(u,w) = lam.
    orth_point_qodd: (v, w, u) with Q all 1, f(v,w) = alpha (= mu),
    f(u,v) = f(u,w) = lam.
    qeven_point: (v0, x0, w0) with Q all 1, Q(v0+x0) = sigma,
    Q(v0+w0) = Q(w0+x0) = lam.
    """
    if case == "unitary_point":
        if n < 5:
            raise ValueError("needs n >= 5")
        S = make_space("unitary", n, F)
        if mu is None:
            mu = 1
        chi = special_params(F, "chi")
        rep = WitnessReport(case, {"n": n, "q": F.q, "lam": lam, "mu": mu,
                                   "chi": chi}, {})
        v = S.vec(S.e(1), (chi, S.f(1)))
        w = S.vec((mu, S.f(1)), S.e(2), (chi, S.f(2)))
        if n == 5:
            u = S.vec(S.x(), (lam, S.f(1)), (lam, S.f(2)))
        else:
            u = S.vec(S.f(3), (chi, S.e(3)), (lam, S.f(1)), (lam, S.f(2)))
        rep.vectors = {"v": v.tolist(), "w": w.tolist(), "u": u.tolist()}
        rep.check("f_vv", S.eval_form(v, v) == 1, str(S.eval_form(v, v)))
        rep.check("f_ww", S.eval_form(w, w) == 1, str(S.eval_form(w, w)))
        rep.check("f_uu", S.eval_form(u, u) == 1, str(S.eval_form(u, u)))
        rep.check("f_vw", S.eval_form(v, w) == F.conj(mu),
                  f"{S.eval_form(v, w)} vs conj(mu) = {F.conj(mu)}")
        rep.check("f_uv", S.eval_form(u, v) == lam, str(S.eval_form(u, v)))
        rep.check("f_uw", S.eval_form(u, w) == lam, str(S.eval_form(u, w)))
        return S, (v, w, u), rep
    if case == "orth_point_qodd":
        if F.p == 2:
            raise ValueError("needs q odd")
        if n < 5:
            raise ValueError("needs n >= 5")
        S = make_space("quadratic", n, F, eps)
        alpha = 1 if mu is None else mu
        rep = WitnessReport(case, {"n": n, "q": F.q, "lam": lam,
                                   "alpha": alpha, "eps": S.epsilon}, {})
        v = S.vec(S.e(1), S.f(1))
        w = S.vec((alpha, S.f(1)), S.e(2), S.f(2))
        if n == 5 or (n == 6 and S.epsilon == "-"):
            u = S.vec((lam, S.f(1)), (lam, S.f(2)), S.x())
        else:
            u = S.vec((lam, S.f(1)), (lam, S.f(2)), S.e(3), S.f(3))
        rep.vectors = {"v": v.tolist(), "w": w.tolist(), "u": u.tolist()}
        rep.check("Q_v", S.eval_Q(v) == 1, str(S.eval_Q(v)))
        rep.check("Q_w", S.eval_Q(w) == 1, str(S.eval_Q(w)))
        rep.check("Q_u", S.eval_Q(u) == 1, str(S.eval_Q(u)))
        rep.check("f_vw", S.eval_form(v, w) == alpha, str(S.eval_form(v, w)))
        rep.check("f_uv", S.eval_form(u, v) == lam, str(S.eval_form(u, v)))
        rep.check("f_uw", S.eval_form(u, w) == lam, str(S.eval_form(u, w)))
        return S, (v, w, u), rep
    if case == "qeven_point":
        if F.p != 2:
            raise ValueError("needs q even")
        if n < 8 or n % 2:
            raise ValueError("needs n >= 8 even")
        S = make_space("quadratic", n, F, eps or "+")
        if sigma is None:
            sigma = 1
        rep = WitnessReport(case, {"n": n, "q": F.q, "lam": lam,
                                   "sigma": sigma, "eps": S.epsilon}, {})
        if lam == 0:
            v0 = S.vec(S.f(2), S.e(2), S.e(1))
            x0 = S.vec(S.f(2), S.e(2), (sigma, S.f(1)))
            w0 = S.vec(S.e(2), S.f(2))
        else:
            v0 = S.vec(S.e(1), S.e(2), S.e(3), S.f(3))
            x0 = S.vec((F.sub(sigma, lam), S.f(1)), S.e(3), S.f(3),
                       (lam, S.f(2)))
            w0 = S.vec(S.e(2), S.e(3), S.f(3), (lam, S.f(1)))
        rep.vectors = {"v0": v0.tolist(), "x0": x0.tolist(), "w0": w0.tolist()}
        ADD = F.tables[0]
        rep.check("Q_v0", S.eval_Q(v0) == 1, str(S.eval_Q(v0)))
        rep.check("Q_x0", S.eval_Q(x0) == 1, str(S.eval_Q(x0)))
        rep.check("Q_w0", S.eval_Q(w0) == 1, str(S.eval_Q(w0)))
        rep.check("Q_v0_x0", S.eval_Q(ADD[v0, x0]) == sigma,
                  str(S.eval_Q(ADD[v0, x0])))
        rep.check("Q_v0_w0", S.eval_Q(ADD[v0, w0]) == lam,
                  str(S.eval_Q(ADD[v0, w0])))
        rep.check("Q_w0_x0", S.eval_Q(ADD[w0, x0]) == lam,
                  str(S.eval_Q(ADD[w0, x0])))
        return S, (v0, x0, w0), rep
    raise ValueError(f"unknown common-neighbour case {case!r}")


# -- subspace-pair action elements (case c) -------------------------------


def witness_case_c(n: int, F: Field, t: int) -> dict:
    """The explicit pair-action elements and fixed edges.

    Returns a dict with U, W1 (complementary), W2 (nested), the swaps p1,
    p2, h, the flip sigma, edges E1, E2, and a report verifying: sigma
    centralizes p1 and p2 on pair vertices, sigma fixes E1 as a set, and
    sigma*h fixes E2 as a set.
    """
    if 2 * t > n:
        raise ValueError("needs t <= n/2")
    S = make_space("linear", n, F)
    sp = S.space
    rep = WitnessReport("case_c_elements", {"n": n, "q": F.q, "t": t}, {})
    U = span(sp, *[sp.basis_vector(i) for i in range(t)])
    W1 = span(sp, *[sp.basis_vector(i) for i in range(t, n)])
    W2 = span(sp, *[sp.basis_vector(i) for i in range(n - t)])

    def swap_mat(i, j):
        M = np.eye(n, dtype=np.int64)
        M[[i, j]] = M[[j, i]]
        return M

    p1 = GroupElement(F, swap_mat(t - 1, t))
    p2 = GroupElement(F, swap_mat(t - 1, n - t))
    hM = np.eye(n, dtype=np.int64)
    for j in range(t):
        hM[[j, n - 1 - j]] = hM[[n - 1 - j, j]]
    h = GroupElement(F, hM)
    sigma = GroupElement(F, np.eye(n, dtype=np.int64), flip=True)

    from .actions import pair_apply, pair_canonical

    def act(pair, g):
        u = np.array([pair[0]], dtype=np.int64)
        w = np.array([pair[1]], dtype=np.int64)
        nu, nw = pair_apply(S, (u, w), g)
        return (int(nu[0]), int(nw[0]))

    A1 = pair_canonical(S, U.code, W1.code)
    A2 = pair_canonical(S, U.code, W2.code)
    E1 = frozenset({A1, act(A1, p1)})
    E2 = frozenset({A2, act(A2, p2)})

    # sigma centralizes p_i as pair actions: compare on several pairs
    probes = [A1, A2, act(A1, h), act(A2, h)]
    for name, p in (("p1", p1), ("p2", p2)):
        ok = all(
            act(act(pr, sigma), p) == act(act(pr, p), sigma) for pr in probes
        )
        rep.check(f"sigma_centralizes_{name}", ok)
    rep.check("sigma_fixes_E1",
              frozenset({act(e, sigma) for e in E1}) == E1)
    sh = compose(sigma, h)
    rep.check("sigma_h_fixes_E2",
              frozenset({act(e, sh) for e in E2}) == E2)
    rep.vectors = {
        "U": U.basis.tolist(), "W1": W1.basis.tolist(), "W2": W2.basis.tolist(),
        "p1": p1.mat.tolist(), "p2": p2.mat.tolist(), "h": hM.tolist(),
    }
    return {
        "space": S, "U": U, "W1": W1, "W2": W2,
        "p1": p1, "p2": p2, "h": h, "sigma": sigma,
        "E1": E1, "E2": E2, "report": rep,
    }


def witness_case_c_zero_pair(
    S: ClassicalSpace, U1: Subspace, W1: Subspace
) -> tuple[Subspace, Subspace, WitnessReport]:
    """Given V = U1 (+) W1 with dim t each, build the pair {U2, W2} with
    all four cross intersections zero: U2 = {u + u a}, W2 = {u + u a b}
    for an isomorphism a: U1 -> W1 and a fixed-point-free automorphism b
    of W1 (companion matrix of a monic degree-t polynomial with g(1) != 0
    and g(0) != 0)."""
    F = S.field
    sp = S.space
    t = U1.dim
    if W1.dim != t or meet_dim(U1, W1) != 0 or 2 * t != S.n:
        raise ValueError("needs V = U1 (+) W1 with equal dims")
    rep = WitnessReport("case_c_zero_pair", {"n": S.n, "q": F.q, "t": t}, {})
    from .linalg import mat_mul

    beta_small = _fixed_point_free_matrix(F, t)
    rep.check("beta_not_identity", not np.array_equal(beta_small, np.eye(t, dtype=np.int64)))
    # fixed-point-free: no nonzero fixed vector, i.e. rank(beta - I) = t
    diff = F.tables[0][beta_small, F.tables[2][np.eye(t, dtype=np.int64)]]
    rep.check("beta_fixed_point_free",
              int(rank_of(F, diff)) == t)
    ADD = F.tables[0]
    # alpha maps the i-th basis row of U1 to the i-th basis row of W1
    img = W1.basis  # u alpha
    img_beta = mat_mul(F, beta_small, W1.basis)  # rows of W1 under beta
    U2 = span(sp, *[ADD[U1.basis[i], img[i]] for i in range(t)])
    W2 = span(sp, *[ADD[U1.basis[i], img_beta[i]] for i in range(t)])
    rep.vectors = {"U2": U2.basis.tolist(), "W2": W2.basis.tolist(),
                   "beta": beta_small.tolist()}
    rep.check("dims", U2.dim == t and W2.dim == t)
    dims = [meet_dim(a, b) for a in (U1, W1) for b in (U2, W2)]
    rep.check("dim_A_B_zero", max(dims) == 0, f"cross meets {dims}")
    rep.certificate = {"cross_meets": dims}
    return U2, W2, rep


def rank_of(F: Field, M: np.ndarray) -> int:
    from .linalg import rref

    return rref(F, np.asarray(M, dtype=np.int64)).shape[0]


def _fixed_point_free_matrix(F: Field, t: int) -> np.ndarray:
    """Companion matrix of the first monic degree-t polynomial with
    g(0) != 0 (invertible) and g(1) != 0 (fixed-point-free)."""
    if t == 1:
        c = next(c for c in range(2, F.q) if c != 1) if F.q > 2 else None
        if c is None:
            raise ValueError("no fixed-point-free map on a line over GF(2)")
        return np.array([[c]], dtype=np.int64)
    for coeffs in _coeff_tuples(F.q, t):
        g0 = coeffs[0]
        if g0 == 0:
            continue
        # g(1) = 1 + sum coeffs
        acc = 1
        for c in coeffs:
            acc = F.add(acc, c)
        if acc == 0:
            continue
        C = np.zeros((t, t), dtype=np.int64)
        for i in range(t - 1):
            C[i + 1, i] = 1
        for i in range(t):
            C[i, t - 1] = F.neg(coeffs[i])
        return C
    raise ValueError("no suitable polynomial found")


def _coeff_tuples(q: int, t: int):
    total = q**t
    for code in range(total):
        out = []
        c = code
        for _ in range(t):
            out.append(c % q)
            c //= q
        yield tuple(out)
