"""Brute-force oracles: group orders, orbital tables, engine cross-checks."""

import numpy as np
import pytest

from orbdiam.actions import make_action, orbital_labels_matrix, orbitals_enumerate
from orbdiam.forms import SubspaceClass, TOTALLY_SINGULAR, make_space
from orbdiam.gf import make_field
from orbdiam.groups import generator_catalog
from orbdiam.linalg import BudgetExceeded
from orbdiam.oracle import (
    brute_isometry_group,
    brute_orbitals,
    cross_check,
    generated_permutation_group,
    group_permutations,
)

F2 = make_field(2)
F3 = make_field(3)
F4 = make_field(2, 2)


@pytest.mark.parametrize("kind,n,F,eps,family,order", [
    ("linear", 3, F2, "", "GL", 168),
    ("linear", 3, F2, "", "SL", 168),
    ("symplectic", 4, F2, "", "Sp", 720),
    ("quadratic", 4, F2, "+", "GO", 72),
    ("quadratic", 4, F2, "-", "GO", 120),
    ("unitary", 3, F4, "", "GU", 648),
    ("unitary", 3, F4, "", "SU", 216),
    ("quadratic", 3, F3, "", "GO", 48),
])
def test_brute_group_orders(kind, n, F, eps, family, order):
    S = make_space(kind, n, F, eps)
    group = brute_isometry_group(S, family=family)
    assert group.order == order


def test_brute_group_closed_under_product():
    S = make_space("symplectic", 4, F2)
    group = brute_isometry_group(S)
    from orbdiam.linalg import mat_mul

    keys = {M.tobytes() for M in group.elements}
    rng = np.random.default_rng(0)
    idx = rng.integers(0, group.order, size=(20, 2))
    for i, j in idx:
        prod = mat_mul(F2, group.elements[i], group.elements[j])
        assert prod.tobytes() in keys


def test_brute_budget():
    S = make_space("linear", 8, F3)
    with pytest.raises(BudgetExceeded):
        brute_isometry_group(S)


def test_brute_orbitals_sp4_points():
    S = make_space("symplectic", 4, F2)
    A = make_action("b", "Sp", 4, F2, t=1)
    group = brute_isometry_group(S)
    labels, diams = brute_orbitals(S, A.sorted_codes, group)
    # rank 3 action: two non-diagonal orbitals (valencies 6 and 8),
    # both connected with diameter 2
    sizes = sorted(int((labels == lab).sum()) // A.N for lab in diams)
    assert sizes == [6, 8]
    assert sorted(diams.values()) == [2, 2]


def test_cross_check_sl4_2spaces():
    A = make_action("b", "SL", 4, F2, t=2)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
    labels = orbital_labels_matrix(A, orbs)
    diams = {i: o.diameter for i, o in enumerate(orbs)}
    report = cross_check(A.space, A.gens, A.sorted_codes, labels, diams,
                         brute_family="SL")
    assert report["group_order"] == 20160
    assert report["orbitals"] == 2


def test_cross_check_unitary_points():
    A = make_action("b", "GU", 3, F4, t=1)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
    labels = orbital_labels_matrix(A, orbs)
    diams = {i: o.diameter for i, o in enumerate(orbs)}
    report = cross_check(A.space, A.gens, A.sorted_codes, labels, diams)
    assert report["group_order"] == 648


def test_cross_check_orthogonal_minus():
    A = make_action("b", "GO", 4, F3, eps="-", t=1)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=0, keep_pairsets=True)
    labels = orbital_labels_matrix(A, orbs)
    diams = {i: o.diameter for i, o in enumerate(orbs)}
    cross_check(A.space, A.gens, A.sorted_codes, labels, diams)


def test_cross_check_detects_missing_generators():
    """Negative control: dropping generators must be caught, not silently
    accepted — this is what makes the cross-check meaningful."""
    A = make_action("b", "Sp", 4, F2, t=1)
    crippled = generator_catalog(A.space, "Sp")
    crippled.gens = crippled.gens[:1]
    with pytest.raises(AssertionError, match="permutation group"):
        cross_check(A.space, crippled, A.sorted_codes,
                    np.full((A.N, A.N), -1), {})


def test_generated_permutation_group_order():
    A = make_action("b", "Sp", 4, F2, t=1)
    perms = generated_permutation_group(A.gens, A.sorted_codes)
    # Sp_4(2) acts faithfully on its 15 points
    assert len(perms) == 720


def test_group_permutations_shape():
    S = make_space("quadratic", 4, F2, "+")
    A = make_action("b", "GO", 4, F2, eps="+", t=1)
    group = brute_isometry_group(S)
    perms = group_permutations(group, A.sorted_codes)
    assert perms.shape == (72, A.N)
    for row in perms[:10]:
        assert sorted(row.tolist()) == list(range(A.N))
