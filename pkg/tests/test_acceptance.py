"""End-to-end acceptance suite with pinned desk-scale values.

Every number asserted here was either computed by the independent
brute-force oracle (group orders, orbital partitions, diameters on tiny
cases) or frozen from a certified pair-BFS run; nothing is compared
against the engine's own live output alone.

Wall-clock budgets are enforced per criterion: each test charges its
elapsed time to a named account and the account must stay under budget.

Structural invariants run inside the criteria rather than as a separate
pass: the enumerator asserts orbital-partition completeness internally,
connectivity is asserted for every primitive action, vertex-transitive
eccentricity agreement is sampled on kept edge sets, and the invariant
fast path is compared with pair BFS on every proved invariant case.
"""

import collections
import math
import time
from contextlib import contextmanager

import numpy as np
import pytest

from orbdiam.actions import (
    bfs_eccentricity,
    invariant_case,
    make_action,
    orbital_labels_matrix,
    orbitals_enumerate,
    pair_orbit_bitset,
    rank,
    vertex_transitivity_check,
)
from orbdiam.cli import run_probe, verify_pairofspaces, verify_thm2_converse
from orbdiam.forms import SubspaceClass, make_space
from orbdiam.gf import make_field
from orbdiam.groups import (
    expected_order,
    generator_catalog,
    orbit_bfs,
    permutation_of,
)
from orbdiam.linalg import decode, decode_batch, rank_batch
from orbdiam.oracle import cross_check
from orbdiam.witnesses import (
    witness_case_c,
    witness_case_c_zero_pair,
    witness_diam3_obstruction,
    witness_subspace_triple,
)

F2 = make_field(2)
F3 = make_field(3)
F4 = make_field(2, 2)
F5 = make_field(5)

# seconds per criterion account
BUDGET = {
    "oracle": 120,
    "linear": 300,
    "halfspin": 120,
    "witness_lower": 900,
    "converse_diam2": 600,
    "diam3": 1800,
    "pairs": 300,
    "forms": 60,
    "probe": 7200,
}
SPENT = collections.defaultdict(float)


@contextmanager
def clocked(account: str):
    t0 = time.monotonic()
    yield
    SPENT[account] += time.monotonic() - t0
    assert SPENT[account] < BUDGET[account], (
        f"{account!r} used {SPENT[account]:.0f}s of its {BUDGET[account]}s budget"
    )


def meet_dims_from(A, i: int) -> np.ndarray:
    """dim(V_i meet V_j) for every j, on a subspace-vertex action."""
    S = A.space
    k = A.t
    src = decode(S.space, int(A.sorted_codes[i]))
    bases = decode_batch(S.space, A.sorted_codes, k)
    joined = np.concatenate(
        [np.broadcast_to(src.basis, bases.shape), bases], axis=1
    )
    return 2 * k - rank_batch(S.field, joined)


# -- 1. oracle certification ----------------------------------------------------


ORACLE_CASES = [
    ("Sp", 4, F2, "", 1, None, "Sp", 720),
    ("SL", 4, F2, "", 2, None, "SL", 20160),
    ("GO", 3, F3, "", 1, SubspaceClass("nondegenerate"), "GO", 48),
    ("GU", 3, F4, "", 1, None, "GU", 648),
    ("SU", 3, F4, "", 1, None, "SU", 216),
]


@pytest.mark.parametrize("fam,n,F,eps,t,cls,brute,order", ORACLE_CASES)
def test_1_oracle_certification(fam, n, F, eps, t, cls, brute, order):
    """Brute-forced matrix group order equals the closed-form order, and
    engine orbital partition + diameters equal brute-force exactly."""
    with clocked("oracle"):
        A = make_action("b", fam, n, F, eps=eps, t=t, cls=cls)
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
        labels = orbital_labels_matrix(A, orbs)
        diams = {i: o.diameter for i, o in enumerate(orbs)}
        report = cross_check(A.space, A.gens, A.sorted_codes, labels, diams,
                             brute_family=brute)
        assert report["group_order"] == order
        assert expected_order(fam, n, F.q, eps) == order
        # structural: sampled vertex-transitive eccentricity; connectivity
        # itself is certified against brute force by cross_check (tiny
        # point actions can be imprimitive and carry matching orbitals)
        for o in orbs:
            assert vertex_transitivity_check(A, o, samples=4, seed=1)


# -- 2. linear subspace actions: diameter and distance formula ------------------


LINEAR_GRID = [
    (n, q, t)
    for n in (3, 4, 5, 6)
    for q in (2, 3)
    for t in range(1, n)
    if 2 * t < n
]


@pytest.mark.parametrize("n,q,t", LINEAR_GRID)
def test_2_linear_distance_formula(n, q, t):
    """For SL_n(q) on t-spaces with t < n/2: the action's orbital diameter
    is exactly k = t, and in the max-intersection orbital graph the
    distance satisfies d(A,B) = k - dim(A meet B)."""
    with clocked("linear"):
        F = make_field(q) if q == 2 else make_field(3)
        A = make_action("b", "SL", n, F, t=t, budget=40_000_000)
        k = t
        keep = A.N <= 2000
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=keep,
                                  budget_pairs=800_000_000)
        assert max(o.diameter for o in orbs) == k
        assert all(o.diameter >= 1 for o in orbs)  # connected (primitive)
        meets0 = meet_dims_from(A, A.base_idx)
        # the max-intersection orbital: its edges have dim(A meet B) = k-1
        o1 = next(o for o in orbs if meets0[o.rep[1]] == k - 1)
        d = o1.distances
        others = np.arange(A.N) != A.base_idx
        assert np.array_equal(d[others], k - meets0[others])
        if A.N <= 200:
            # small enough to verify the formula for every vertex pair
            for i in range(A.N):
                _, di = bfs_eccentricity(A.N, i, o1.pairset.neighbors)
                mi = meet_dims_from(A, i)
                rest = np.arange(A.N) != i
                assert np.array_equal(di[rest], k - mi[rest])
        elif keep:
            assert vertex_transitivity_check(A, o1, samples=3, seed=2)


PROVED_INVARIANT_CASES = [
    ("meet_dim", "SL", 5, F2, "", 2, None),
    ("unitary_point", "GU", 5, F4, "", 1, SubspaceClass("nondegenerate")),
    ("orth_point_qodd", "GO", 5, F3, "", 1, SubspaceClass("nondegenerate")),
    ("qeven_point", "GO", 8, F2, "+", 1,
     SubspaceClass("nonsingular_point_q_even")),
    ("halfspin", "Omega", 8, F2, "+", 4, None),
]


@pytest.mark.parametrize("tag,fam,n,F,eps,t,cls", PROVED_INVARIANT_CASES)
def test_2_invariant_fast_path_matches_pair_bfs(tag, fam, n, F, eps, t, cls):
    """Each proved invariant case gives the same orbitals and diameters
    as the certified pair BFS."""
    with clocked("linear"):
        A = make_action("b", fam, n, F, eps=eps, t=t, cls=cls)
        assert invariant_case(A) == tag
        fast = orbitals_enumerate(A, "invariant")
        gold = orbitals_enumerate(A, "pair_bfs", seed=0)
        assert sorted((o.suborbit_size, o.diameter) for o in fast) == \
            sorted((o.suborbit_size, o.diameter) for o in gold)


# -- 3. half-spin action ---------------------------------------------------------


def test_3_halfspin_action():
    """Omega_8^+(2) on one class of totally singular 4-spaces: 135
    vertices, rank 3, orbital diameter 2 = floor(k/2)."""
    with clocked("halfspin"):
        A = make_action("b", "Omega", 8, F2, eps="+", t=4)
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
        assert A.N == 135
        assert rank(A, orbs) == 3
        assert max(o.diameter for o in orbs) == 2 == A.k // 2
        for o in orbs:
            assert o.diameter == 2
            assert vertex_transitivity_check(A, o, samples=4, seed=3)


# -- 4. lower-bound witnesses: measured distance in the witness orbital ----------


# (case, n, field, k, eps) for every witness case whose ambient orbit is
# desk scale at q <= 3, n <= 8; measured orbit sizes are noted inline.
WITNESS_MEASURED = [
    ("sp_ts", 6, F2, 2, ""),                      # orbit 315
    ("sp_nd", 6, F2, 2, ""),                      # orbit 336
    ("su_nd", 4, F4, 2, ""),                      # orbit 240
    ("su_ts", 6, F4, 2, ""),                      # orbit 6237
    ("o_ts", 8, F2, 2, "+"),                      # orbit 1575
    ("o_plus_2l_small_k", 8, F2, 2, "+"),         # orbit 4320
    ("o_plus_2l_half", 6, F2, 2, "-"),            # orbit 216
    ("o_minus_2l_minus_ambient", 6, F2, 2, "-"),  # orbit 120
    ("o_odd_k_minus", 6, F3, 3, "-"),             # orbit 11340
]


@pytest.mark.parametrize("case,n,F,k,eps", WITNESS_MEASURED)
def test_4_witness_distance_at_least_k(case, n, F, k, eps):
    """BFS in the orbital graph of the pair (U, U') measures
    d(U, U'') >= k, certifying the lower bound the triple was built for."""
    with clocked("witness_lower"):
        S, fam, U, U1, U2, rep = witness_subspace_triple(case, n, F, k, eps)
        assert rep.passed, [c for c in rep.checks if not c["passed"]]
        gens = generator_catalog(S, fam)
        tab = orbit_bfs(gens, U, budget=40_000_000)
        codes = np.sort(tab.points)
        idx = {}
        for sub in (U, U1, U2):
            i = int(np.searchsorted(codes, sub.code))
            assert codes[i] == sub.code  # all three lie in one orbit
            idx[sub.code] = i
        perms = [permutation_of(S, codes, g) for g in gens.gens]
        ps = pair_orbit_bitset(perms, perms, (idx[U.code], idx[U1.code]),
                               len(codes), budget_pairs=800_000_000)
        _, dist = bfs_eccentricity(len(codes), idx[U.code], ps.neighbors)
        d = int(dist[idx[U2.code]])
        measured = math.inf if d < 0 else d
        assert measured >= k


def test_4_witness_cases_beyond_desk_scale_still_construct():
    """The two remaining witness cases have no desk-scale instantiation
    at q <= 3, n <= 8; their constructions are still verified."""
    with clocked("witness_lower"):
        # needs k = 2l >= 4, hence n >= 2k + 2 = 10: nothing at n <= 8
        with pytest.raises(ValueError):
            witness_subspace_triple("o_minus_2l_plus_ambient", 8, F3, 2, "+")
        _, _, _, _, _, rep = witness_subspace_triple(
            "o_minus_2l_plus_ambient", 10, F3, 4, "+")
        assert rep.passed
        # needs q odd, so (n=8, q=3) is the only in-scope instantiation;
        # its ambient orbit of odd 3-spaces in an 8-dimensional plus-type
        # space is far beyond desk scale (orbit enumeration alone exceeds
        # the whole criterion budget), so the verified intersection
        # pattern of the construction stands in for a BFS measurement
        _, _, _, _, _, rep = witness_subspace_triple(
            "o_odd_k_plus", 8, F3, 3, "+")
        assert rep.passed


# -- 5. diameter-2 converse on point actions -------------------------------------


CONVERSE_CASES = [
    ({"family": "su", "n": 5, "q": 2}, 176),
    ({"family": "go", "n": 7, "q": 3}, None),
    ({"family": "go", "n": 6, "q": 3, "eps": "-"}, None),
    ({"family": "go", "n": 8, "q": 2, "eps": "+"}, 120),
]


@pytest.mark.parametrize("params,size", CONVERSE_CASES)
def test_5_point_actions_have_diameter_exactly_2(params, size):
    with clocked("converse_diam2"):
        out = verify_thm2_converse(params)
        assert out["pass"] is True
        assert out["measured"] and all(d == 2 for d in out["measured"])
        if size is not None:
            assert out["record"]["size"] == size


# -- 6. diameter >= 3 obstructions ------------------------------------------------


def test_6_nondegenerate_2space_diam3_measured():
    """Sp_6(2) on nondegenerate 2-spaces: the no-common-neighbor witness
    validates and the full BFS measures an orbital of diameter 3."""
    with clocked("diam3"):
        S, U, U1, U2, rep = witness_diam3_obstruction(
            "nd2_diam3", 6, F2, kind="symplectic")
        assert rep.passed, [c for c in rep.checks if not c["passed"]]
        A = make_action("b", "Sp", 6, F2, t=2,
                        cls=SubspaceClass("nondegenerate"))
        assert A.N == 336
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
        assert max(o.diameter for o in orbs) == 3
        assert sorted((o.suborbit_size, o.diameter) for o in orbs) == \
            [(20, 3), (45, 3), (90, 2), (180, 2)]


def test_6_o2minus_certificate_at_q5():
    """q = 1 mod 4 minus-type plane case at (n=7, q=5): full BFS is out
    of desk scale, so the no-common-neighbor certificate is checked."""
    with clocked("diam3"):
        S, U, U1, U2, rep = witness_diam3_obstruction(
            "o2minus_q1mod4", 7, F5)
        assert rep.passed, [c for c in rep.checks if not c["passed"]]
        assert rep.certificate["pairs_checked"] > 0
        cls = SubspaceClass("nondegenerate", "O-")
        for sub in (U, U1, U2):
            assert S.classify_subspace(sub) == cls


# -- 7. pairs-of-subspaces action -------------------------------------------------


def _pair_meet_profile(A, i: int) -> np.ndarray:
    """dim(x,y) between vertex i and every vertex of a pairs action: the
    max, over the four component pairings, of how far the intersection
    exceeds its generic dimension."""
    u, w = A.pair_components
    S = A.space
    n = S.n
    t = A.t
    comps = [(u, t), (w, n - t)]
    batches = [(decode_batch(S.space, arr, d), d) for arr, d in comps]
    srcs = [(decode(S.space, int(arr[i])).basis, d) for arr, d in comps]
    out = np.zeros(A.N, dtype=np.int64)
    for rows, a in srcs:
        for comp, b in batches:
            joined = np.concatenate(
                [np.broadcast_to(rows, (A.N, a, n)), comp], axis=1
            )
            meets = a + b - rank_batch(S.field, joined)
            out = np.maximum(out, meets - max(0, a + b - n))
    return out


@pytest.mark.parametrize("q", [2, 3])
@pytest.mark.parametrize("t", [1, 2])
def test_7_pairs_action_distance_bound(q, t):
    """For pairs of t-spaces in dimension 4: every orbital satisfies
    d(x,y) >= t - dim(x,y) from the base vertex, and the sigma/p_i/h
    element identities of the construction hold."""
    with clocked("pairs"):
        F = make_field(q)
        out = witness_case_c(4, F, t)
        assert out["report"].passed
        A = make_action("c", "SL", 4, F, t=t)
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0,
                                  budget_pairs=800_000_000)
        dimAB = _pair_meet_profile(A, A.base_idx)
        # the bound is claimed for the max-intersection orbital(s):
        # representative edges with dim(x,y) = t - 1
        checked = 0
        for o in orbs:
            if dimAB[o.rep[1]] != t - 1:
                continue
            d = o.distances
            assert (((d < 0) | (d >= t - dimAB))).all()
            checked += 1
        assert checked > 0
        if t == 2:
            # independently through the registered statement checker
            assert verify_pairofspaces({"n": 4, "q": q, "t": 2})["pass"]
            # zero-pair construction from the base vertex: meets all 0,
            # distance in the max-intersection orbital at least t
            u, w = A.pair_components
            Ub = decode(A.space.space, int(u[A.base_idx]))
            Wb = decode(A.space.space, int(w[A.base_idx]))
            U2, W2, rep = witness_case_c_zero_pair(A.space, Ub, Wb)
            assert rep.passed
            j = np.nonzero((u == min(U2.code, W2.code))
                           & (w == max(U2.code, W2.code)))[0]
            assert j.size == 1
            assert dimAB[j[0]] == 0
            o1 = next(o for o in orbs if dimAB[o.rep[1]] == t - 1)
            dj = int(o1.distances[j[0]])
            assert dj < 0 or dj >= t


# -- 8. quadratic-form action ------------------------------------------------------


@pytest.mark.parametrize("eps,count", [("+", 36), ("-", 28)])
def test_8_form_action_is_2_transitive(eps, count):
    with clocked("forms"):
        A = make_action("d", "Sp", 6, F2, eps=eps)
        orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
        assert A.N == count
        assert rank(A, orbs) == 2
        assert orbs[0].diameter == 1


# -- 10. conjecture probe ----------------------------------------------------------


# frozen from a certified pair-BFS run of this engine (49 min wall on a
# single shared core); the probe is deterministic up to orbital order
PROBE_ORBITALS = sorted([
    (72, 4), (90, 4), (160, 4), (160, 4), (270, 3),
    (1440, 2), (1920, 2), (2160, 2), (2880, 2), (4320, 2), (8640, 2),
])


def test_10_probe_completes_with_definite_report():
    """The 22113-vertex minus-type plane probe at q=3, n=7 completes
    under budget with certified per-orbital diameters; the report makes
    no truth claim about the open question."""
    with clocked("probe"):
        rep = run_probe(7, 3, seed=0, budget_pairs=800_000_000)
    assert rep["size"] == 22113
    assert rep["definite"] is True
    assert rep["rank"] == 12
    got = sorted((o["suborbit_size"], o["diameter"]) for o in rep["orbitals"])
    assert got == PROBE_ORBITALS
    assert rep["diam_sup"] == 4
    assert "no truth claim" in rep["note"]
