"""Orbital engine: pair bitsets, strategies, representatives, cases c/d."""

import numpy as np
import pytest

from orbdiam.actions import (
    ActionInstance,
    PairSet,
    bfs_eccentricity,
    form_action_affine,
    form_apply_codes,
    form_code,
    form_qdiag,
    invariant_case,
    make_action,
    orbital_labels_matrix,
    orbitals_enumerate,
    pair_apply,
    pair_canonical,
    pair_orbit_bitset,
    rank,
    representative_pair,
    representative_subspace,
    result_record,
    vertex_transitivity_check,
)
from orbdiam.forms import SubspaceClass, TOTALLY_SINGULAR, arf_type, make_space
from orbdiam.gf import make_field
from orbdiam.groups import permutation_of
from orbdiam.linalg import BudgetExceeded, decode, meet_dim

F2 = make_field(2)
F3 = make_field(3)
F4 = make_field(2, 2)


# -- pair bitset machinery ---------------------------------------------------


def test_pairset_add_contains_neighbors():
    ps = PairSet(100)
    i = np.array([3, 70, 3])
    j = np.array([64, 99, 5])
    ps.add(i, j)
    assert ps.contains(np.array([64]), np.array([3]))[0]
    assert not ps.contains(np.array([3]), np.array([4]))[0]
    assert ps.neighbors(3).tolist() == [5, 64]
    assert ps.count() == 6  # both orders


def test_pair_orbit_bitset_matches_naive():
    rng = np.random.default_rng(0)
    N = 30
    perms = [rng.permutation(N) for _ in range(3)]
    pair = (0, 1)
    ps = pair_orbit_bitset(perms, perms, pair, N)
    # naive BFS over frozensets
    seen = {frozenset(pair)}
    frontier = [pair]
    while frontier:
        nxt = []
        for (a, b) in frontier:
            for p in perms:
                img = frozenset((int(p[a]), int(p[b])))
                if img not in seen:
                    seen.add(img)
                    nxt.append(tuple(img))
        frontier = nxt
    assert ps.count() == 2 * len(seen)
    for fs in seen:
        a, b = sorted(fs)
        assert ps.contains(np.array([a]), np.array([b]))[0]


def test_pair_orbit_bitset_certifies_under_all_perms():
    # explore under a single weak perm; certification must still complete
    # the orbit under the full list
    rng = np.random.default_rng(1)
    N = 40
    strong = [rng.permutation(N) for _ in range(3)]
    weak = [np.arange(N)]
    ps_weak = pair_orbit_bitset(weak, strong, (0, 1), N)
    ps_full = pair_orbit_bitset(strong, strong, (0, 1), N)
    assert np.array_equal(ps_weak.bits, ps_full.bits)


def test_pair_orbit_budget():
    with pytest.raises(BudgetExceeded):
        pair_orbit_bitset([np.arange(10)], [np.arange(10)], (0, 1), 10,
                          budget_pairs=50)


def test_bfs_eccentricity_path_graph():
    adj = {0: [1], 1: [0, 2], 2: [1, 3], 3: [2]}

    def nbr(v):
        return np.array(adj[v])

    ecc, dist = bfs_eccentricity(4, 0, nbr)
    assert ecc == 3
    assert dist.tolist() == [0, 1, 2, 3]


# -- representatives ----------------------------------------------------------


def test_representative_subspace_classes():
    S = make_space("quadratic", 6, F3, "-")
    ts = representative_subspace(S, TOTALLY_SINGULAR, 2)
    assert S.classify_subspace(ts).tag == "totally_singular"
    for sub_eps in ("O+", "O-"):
        nd = representative_subspace(S, SubspaceClass("nondegenerate", sub_eps), 2)
        assert S.classify_subspace(nd) == SubspaceClass("nondegenerate", sub_eps)


def test_representative_pair_zero_meet():
    S = make_space("linear", 4, F2)
    U, W = representative_pair(S, 2)
    assert U.dim == W.dim == 2
    assert meet_dim(U, W) == 0


# -- strategy agreement --------------------------------------------------------


CASES_B = [
    ("SL", 4, F2, "", 2, None),
    ("SL", 4, F3, "", 1, None),
    ("Sp", 4, F2, "", 1, None),
    ("Sp", 6, F2, "", 2, "nd"),
    ("GU", 4, F4, "", 1, None),
    ("GO", 5, F3, "", 1, "nd-odd"),
    ("Omega", 6, F2, "+", 3, None),
]


@pytest.mark.parametrize("fam,n,F,eps,t,cls", CASES_B)
def test_pair_bfs_is_a_partition(fam, n, F, eps, t, cls):
    cls_obj = {None: None,
               "nd": SubspaceClass("nondegenerate"),
               "nd-odd": SubspaceClass("nondegenerate", "odd")}[cls]
    A = make_action("b", fam, n, F, eps=eps, t=t, cls=cls_obj)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert sum(o.edge_count for o in orbs) == A.N * (A.N - 1) // 2
    assert sum(o.suborbit_size for o in orbs) == A.N - 1


def test_invariant_matches_pair_bfs_linear():
    A = make_action("b", "SL", 5, F2, t=2)
    assert invariant_case(A) == "meet_dim"
    fast = orbitals_enumerate(A, "invariant")
    slow = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert sorted((o.suborbit_size, o.diameter) for o in fast) == \
        sorted((o.suborbit_size, o.diameter) for o in slow)


def test_invariant_matches_pair_bfs_unitary_points():
    A = make_action("b", "GU", 5, F4, t=1, cls=SubspaceClass("nondegenerate"))
    assert invariant_case(A) == "unitary_point"
    fast = orbitals_enumerate(A, "invariant")
    slow = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert sorted((o.suborbit_size, o.diameter) for o in fast) == \
        sorted((o.suborbit_size, o.diameter) for o in slow)


def test_invariant_matches_pair_bfs_halfspin():
    A = make_action("b", "Omega", 8, F2, eps="+", t=4)
    assert invariant_case(A) == "halfspin"
    fast = orbitals_enumerate(A, "invariant")
    slow = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert A.N == 135
    assert sorted((o.suborbit_size, o.diameter) for o in fast) == \
        sorted((o.suborbit_size, o.diameter) for o in slow) == \
        [(64, 2), (70, 2)]


def test_stab_sample_agrees_on_small_case():
    A = make_action("b", "Sp", 4, F3, t=1)
    explore = orbitals_enumerate(A, "stab_sample", seed=0)
    gold = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert sorted((o.suborbit_size, o.diameter) for o in explore) == \
        sorted((o.suborbit_size, o.diameter) for o in gold)


def test_unknown_strategy_rejected():
    A = make_action("b", "Sp", 4, F2, t=1)
    with pytest.raises(ValueError):
        orbitals_enumerate(A, "guesswork")


# -- pairs of subspaces (imprimitive vertex set) -------------------------------


def test_case_c_vertices_and_disconnection():
    A = make_action("c", "SL", 4, F2, t=2)
    # unordered pairs of complementary 2-spaces in GF(2)^4
    assert A.N == 280
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert rank(A, orbs) == 10  # including the diagonal orbital
    # the complement-swap block system forces one disconnected orbital
    assert sorted(o.diameter for o in orbs)[0] == -1
    assert sum(o.edge_count for o in orbs) == A.N * (A.N - 1) // 2


def test_case_c_t1():
    A = make_action("c", "SL", 4, F2, t=1)
    assert A.N == 105
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert max(o.diameter for o in orbs) == 3


def test_pair_apply_respects_canonical_order():
    S = make_space("linear", 4, F2)
    U, W = representative_pair(S, 2)
    a, b = pair_canonical(S, U.code, W.code)
    assert a <= b or decode(S.space, a).dim != decode(S.space, b).dim
    from orbdiam.groups import generator_catalog

    gens = generator_catalog(S, "SL", extensions=("graph_auto",))
    comps = (np.array([a]), np.array([b]))
    for g in gens.gens:
        u2, w2 = pair_apply(S, comps, g)
        # images stay canonically ordered pairs of valid codes
        c = pair_canonical(S, int(u2[0]), int(w2[0]))
        assert c == (int(u2[0]), int(w2[0]))


# -- quadratic form vertex set (symplectic, q even) -----------------------------


def test_form_code_roundtrip():
    S = make_space("symplectic", 6, F2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        qd = rng.integers(0, 2, size=6).astype(np.int64)
        assert np.array_equal(form_qdiag(S, form_code(S, qd)), qd)


def test_form_action_is_affine_and_correct():
    S = make_space("symplectic", 4, F2)
    from orbdiam.groups import generator_catalog

    gens = generator_catalog(S, "Sp")
    rng = np.random.default_rng(3)
    vecs = S.space.all_vectors()
    for g in gens.gens:
        Amat, c = form_action_affine(S, g)
        for _ in range(5):
            qd = rng.integers(0, 2, size=4).astype(np.int64)
            new = form_apply_codes(S, np.array([form_code(S, qd)]), g)
            new_qd = form_qdiag(S, int(new[0]))
            # the transported form evaluates like the original at preimages
            from orbdiam.linalg import mat_inv, mat_mul

            gi = mat_inv(F2, g.mat)
            for v in vecs[rng.integers(0, len(vecs), size=8)]:
                pre = mat_mul(F2, v[None, :], gi)[0]
                S2 = S
                q_orig = _eval_alt_quadratic(S2, qd, pre)
                q_new = _eval_alt_quadratic(S2, new_qd, v)
                assert q_orig == q_new


def _eval_alt_quadratic(S, qdiag, v):
    """Q(sum v_i b_i) from diagonal values + the symplectic gram."""
    F = S.field
    total = 0
    n = S.n
    for i in range(n):
        total = F.add(total, F.mul(F.mul(v[i], v[i]), qdiag[i]))
        for j in range(i + 1, n):
            total = F.add(total, F.mul(F.mul(v[i], v[j]), S.gram[i, j]))
    return total


@pytest.mark.parametrize("eps,count", [("+", 36), ("-", 28)])
def test_case_d_orbit_sizes(eps, count):
    A = make_action("d", "Sp", 6, F2, eps=eps)
    assert A.N == count
    for code in A.sorted_codes.tolist():
        assert arf_type(A.space, form_qdiag(A.space, code)) == eps
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
    assert rank(A, orbs) == 2
    assert max(o.diameter for o in orbs) == 1


def test_case_d_rejects_odd_q():
    with pytest.raises(ValueError):
        make_action("d", "Sp", 4, F3, eps="+")


# -- records and checks ---------------------------------------------------------


def test_vertex_transitivity_check():
    A = make_action("b", "Sp", 4, F2, t=1)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
    for o in orbs:
        assert vertex_transitivity_check(A, o, samples=4, seed=0)


def test_result_record_shape():
    A = make_action("b", "SL", 4, F2, t=2)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0)
    rec = result_record(A, orbs, runtime_ms=5, checks={"partition": True})
    assert rec["size"] == 35
    assert rec["rank"] == 3
    assert rec["diam"] == 2
    assert len(rec["orbitals"]) == 2
    assert rec["checks"]["partition"] is True


def test_orbital_labels_matrix_partition():
    A = make_action("b", "SL", 4, F2, t=2)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
    labels = orbital_labels_matrix(A, orbs)
    assert (labels.diagonal() == -1).all()
    off = labels[~np.eye(A.N, dtype=bool)]
    assert (off >= 0).all()
    assert np.array_equal(labels, labels.T)
