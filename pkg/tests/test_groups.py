"""Group elements, generator catalogs, orbit machinery, caching."""

import os
import random

import numpy as np
import pytest

from orbdiam.forms import SubspaceClass, TOTALLY_SINGULAR, make_space
from orbdiam.gf import make_field
from orbdiam.groups import (
    GeneratorSet,
    GroupElement,
    apply_codes,
    compose,
    det,
    expected_order,
    generator_catalog,
    identity_element,
    inverse,
    load_orbit,
    orbit_bfs,
    pair_orbit_bfs,
    permutation_of,
    save_orbit,
    schreier_sample_stabilizer,
    suborbits,
    word_to_element,
)
from orbdiam.linalg import apply_element, decode, span

F2 = make_field(2)
F3 = make_field(3)
F4 = make_field(2, 2)
F9 = make_field(3, 2)


def random_element(rng, F, n):
    from orbdiam.linalg import rref

    while True:
        M = np.array([[rng.randrange(F.q) for _ in range(n)]
                      for _ in range(n)], dtype=np.int64)
        if rref(F, M).shape[0] == n:
            break
    return GroupElement(F, M, frob=rng.randrange(F.e),
                        flip=bool(rng.randrange(2)))


def test_composition_matches_action():
    """The normative property: acting by compose(g, h) equals acting by g
    then h, across Frobenius and flip components."""
    rng = random.Random(7)
    S = make_space("linear", 3, F9)
    subs = [decode(S.space, c) for c in
            apply_codes(S, np.arange(0, 1, dtype=np.int64) + 13,
                        identity_element(F9, 3)).tolist()]
    A = span(S.space, S.space.basis_vector(0),
             np.array([1, 2, 5], dtype=np.int64))
    for _ in range(40):
        g = random_element(rng, F9, 3)
        h = random_element(rng, F9, 3)
        direct = apply_element(apply_element(A, g), h)
        composed = apply_element(A, compose(g, h))
        assert direct.code == composed.code


def test_inverse():
    rng = random.Random(8)
    A = span(make_space("linear", 3, F9).space,
             np.array([1, 0, 2], dtype=np.int64))
    for _ in range(20):
        g = random_element(rng, F9, 3)
        gi = inverse(g)
        assert compose(g, gi).is_identity()
        assert apply_element(apply_element(A, g), gi).code == A.code


def test_word_to_element():
    S = make_space("linear", 3, F2)
    gens = generator_catalog(S, "SL")
    g = word_to_element(gens.gens, [0, 1, 0])
    direct = compose(compose(gens.gens[0], gens.gens[1]), gens.gens[0])
    assert g == direct


def test_projective_equality_ignores_scalars():
    M = np.eye(3, dtype=np.int64)
    a = GroupElement(F3, M)
    b = GroupElement(F3, 2 * M % 3)
    assert a == b and hash(a) == hash(b)
    # but the stored matrix stays raw (needed for form actions)
    assert b.mat[0, 0] == 2


@pytest.mark.parametrize("family,n,F,eps,expect", [
    ("SL", 3, F2, "", 168),
    ("SL", 4, F2, "", 20160),
    ("Sp", 4, F2, "", 720),
    ("Sp", 4, F3, "", 51840),
    ("GO", 3, F3, "", 48),
    ("GU", 3, F4, "", 648),
    ("SU", 3, F4, "", 216),
    ("Omega", 6, F2, "+", 20160),
])
def test_expected_order(family, n, F, eps, expect):
    assert expected_order(family, n, F.q, eps) == expect


def test_generators_are_isometries():
    for kind, n, F, eps, fam in [
        ("symplectic", 4, F3, "", "Sp"),
        ("unitary", 4, F4, "", "GU"),
        ("quadratic", 6, F2, "+", "GO"),
        ("quadratic", 6, F3, "-", "Omega"),
        ("quadratic", 5, F3, "", "GO"),
    ]:
        S = make_space(kind, n, F, eps)
        gens = generator_catalog(S, fam)
        for g in gens.gens:
            got = S.form_matrix(g.mat, g.mat)
            assert np.array_equal(got, S.gram), fam
            if kind == "quadratic":
                assert np.array_equal(S.q_values(g.mat), S.qdiag), fam


@pytest.mark.parametrize("desc,expect", [
    (("linear", 4, F2, "", "SL", 2, None), 35),
    (("linear", 4, F2, "", "SL", 1, None), 15),
    (("symplectic", 4, F2, "", "Sp", 1, None), 15),
    (("unitary", 5, F4, "", "GU", 1, "nd"), 176),
    (("unitary", 5, F4, "", "SU", 1, "nd"), 176),
    (("quadratic", 8, F2, "+", "Omega", 4, "ts"), 135),
    (("quadratic", 8, F2, "+", "GO", 4, "ts"), 270),
    (("quadratic", 8, F2, "+", "GO", 1, "nsp"), 120),
])
def test_catalog_orbit_sizes(desc, expect):
    kind, n, F, eps, fam, k, cls = desc
    S = make_space(kind, n, F, eps)
    gens = generator_catalog(S, fam)
    from orbdiam.actions import representative_subspace
    from orbdiam.forms import NONDEGENERATE

    cls_obj = {None: TOTALLY_SINGULAR if kind != "linear" else SubspaceClass("any"),
               "nd": SubspaceClass("nondegenerate"),
               "ts": TOTALLY_SINGULAR,
               "nsp": SubspaceClass("nonsingular_point_q_even")}[cls]
    rep = representative_subspace(S, cls_obj, k)
    tab = orbit_bfs(gens, rep)
    assert tab.size == expect


def test_orbit_words_recreate_points():
    S = make_space("linear", 4, F2)
    gens = generator_catalog(S, "SL")
    rep = span(S.space, S.space.basis_vector(0), S.space.basis_vector(1))
    tab = orbit_bfs(gens, rep)
    base = decode(S.space, tab.base_code)
    for i in range(0, tab.size, 7):
        g = tab.element(i)
        assert apply_element(base, g).code == int(tab.points[i])


def test_apply_codes_matches_scalar():
    S = make_space("linear", 4, F4)
    gens = generator_catalog(S, "SL", extensions=("field_auto", "graph_auto"))
    rep = span(S.space, S.space.basis_vector(0))
    tab = orbit_bfs(gens, rep)
    codes = tab.points
    for g in gens.gens:
        batch = apply_codes(S, codes, g)
        for c, img in zip(codes.tolist(), batch.tolist()):
            assert apply_element(decode(S.space, c), g).code == img


def test_permutation_of_is_permutation():
    S = make_space("symplectic", 4, F2)
    gens = generator_catalog(S, "Sp")
    rep = span(S.space, S.e(1))
    tab = orbit_bfs(gens, rep)
    for g in gens.gens:
        perm = permutation_of(S, tab.sorted_codes, g)
        assert sorted(perm.tolist()) == list(range(tab.size))


def test_schreier_elements_fix_base():
    S = make_space("linear", 4, F2)
    gens = generator_catalog(S, "SL")
    rep = span(S.space, S.space.basis_vector(0), S.space.basis_vector(1))
    tab = orbit_bfs(gens, rep)
    stab = schreier_sample_stabilizer(tab, 50, seed=5)
    base = decode(S.space, tab.base_code)
    assert stab
    for h in stab:
        assert apply_element(base, h).code == tab.base_code


def test_suborbits_match_known_rank():
    S = make_space("linear", 4, F2)
    gens = generator_catalog(S, "SL")
    rep = span(S.space, S.space.basis_vector(0), S.space.basis_vector(1))
    tab = orbit_bfs(gens, rep)
    stab = schreier_sample_stabilizer(tab, 200, seed=3)
    labels = suborbits(S, stab, tab.sorted_codes, tab.base_code)
    # rank of SL_4(2) on 2-spaces is 3 (cells: base, meet dim 1, meet dim 0)
    assert len(np.unique(labels)) == 3


def test_pair_orbit_bfs_partition():
    S = make_space("linear", 3, F2)
    gens = generator_catalog(S, "SL")
    rep = span(S.space, S.space.basis_vector(0))
    tab = orbit_bfs(gens, rep)
    N = tab.size
    perms = [permutation_of(S, tab.sorted_codes, g) for g in gens.gens]
    seen = set()
    total = 0
    for j in range(1, N):
        if (0, j) in seen:
            continue
        enc = pair_orbit_bfs(perms, (0, j), N)
        total += len(enc)
        for e in enc.tolist():
            seen.add((e // N, e % N))
    assert total == N * (N - 1) // 2


def test_orbit_cache_roundtrip(tmp_path):
    S = make_space("linear", 4, F2)
    gens = generator_catalog(S, "SL")
    rep = span(S.space, S.space.basis_vector(0), S.space.basis_vector(1))
    tab = orbit_bfs(gens, rep)
    save_orbit(tab, str(tmp_path))
    back = load_orbit(gens, rep.code, str(tmp_path))
    assert back is not None
    assert np.array_equal(back.points, tab.points)
    assert np.array_equal(back.parents, tab.parents)
    assert np.array_equal(back.via, tab.via)
    # wrong generator set misses
    other = generator_catalog(S, "SL", extensions=("graph_auto",))
    assert load_orbit(other, rep.code, str(tmp_path)) is None


def test_gens_hash_distinguishes_sets():
    S = make_space("linear", 4, F2)
    a = generator_catalog(S, "SL")
    b = generator_catalog(S, "SL", extensions=("graph_auto",))
    assert a.gens_hash() != b.gens_hash()
