"""Brute-force ground truth for tiny parameters.

Enumerates full isometry groups by a pruned row-by-row search, computes
orbital partitions and diameters with no vertex-transitivity shortcuts,
and cross-checks the fast engines against them.  This module exists only
to certify the generator catalogs and the orbital engine; it does not
scale and is not meant to.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .forms import ClassicalSpace
from .groups import GeneratorSet, GroupElement, apply_codes, det, permutation_of
from .linalg import BudgetExceeded, Subspace, mat_mul, rank_batch


@dataclass
class TinyGroup:
    """A complete list of isometry matrices (raw, not projectivized)."""

    space: ClassicalSpace
    elements: list  # of np.ndarray matrices
    order: int

    def projective_keys(self) -> set:
        F = self.space.field
        MUL = F.tables[1]
        keys = set()
        for M in self.elements:
            flat = M.reshape(-1)
            lead = int(flat[np.nonzero(flat)[0][0]])
            norm = M if lead == 1 else MUL[F.inv(lead), M]
            keys.add(norm.tobytes())
        return keys


def brute_isometry_group(
    S: ClassicalSpace, family: str | None = None, budget: int = 10**9
) -> TinyGroup:
    """All invertible matrices preserving the form, by pruned row DFS.

    For a linear space this enumerates GL (or SL with family='SL').
    For unitary spaces with family='SU', filters GU by det = 1.
    """
    F = S.field
    n = S.n
    q = F.q
    if q**n > 10**6 or q ** (n * n) > budget * 10**6:
        raise BudgetExceeded("brute isometry search space too large")
    space = S.space
    all_vecs = space.all_vectors()[1:]  # nonzero
    weights = q ** np.arange(n, dtype=np.int64)
    ADD, MUL, _, _ = F.tables

    if S.kind == "quadratic":
        qv = S.q_values(all_vecs)
    gram = S.gram

    out: list[np.ndarray] = []

    def span_codes(rows: list[np.ndarray]) -> set:
        codes = {0}
        vecs = np.zeros((1, n), dtype=np.int64)
        for r in rows:
            block = [vecs]
            for c in range(1, q):
                block.append(ADD[vecs, MUL[c, r][None, :]])
            vecs = np.concatenate(block)
        return set((vecs @ weights).tolist())

    def rec(rows: list[np.ndarray], span: set):
        i = len(rows)
        if i == n:
            out.append(np.array(rows, dtype=np.int64))
            return
        mask = np.ones(len(all_vecs), dtype=bool)
        if S.kind != "linear":
            for j, r in enumerate(rows):
                vals = S.form_matrix(all_vecs, r[None, :])[:, 0]
                mask &= vals == gram[i, j]
                vals_t = S.form_matrix(r[None, :], all_vecs)[0, :]
                mask &= vals_t == gram[j, i]
            if S.kind == "quadratic":
                mask &= qv == S.qdiag[i]
            else:
                diag = np.array(
                    [S.eval_form(v, v) for v in all_vecs[mask]], dtype=np.int64
                )
                idx = np.nonzero(mask)[0]
                mask[idx[diag != gram[i, i]]] = False
        codes = all_vecs @ weights
        for vi in np.nonzero(mask)[0]:
            if int(codes[vi]) in span:
                continue
            v = all_vecs[vi]
            rec(rows + [v], span if i == n - 1 else span_codes(rows + [v]))

    rec([], {0})

    if family == "SL" or (family == "SU" and S.kind == "unitary"):
        out = [M for M in out if det(F, M) == 1]
    elif family not in (None, "GL", "GU", "GO", "Sp"):
        raise ValueError(f"unsupported brute family filter {family!r}")
    return TinyGroup(S, out, len(out))


def group_permutations(
    group: TinyGroup, sorted_codes: np.ndarray
) -> np.ndarray:
    """(|G|, N) array of index permutations of the vertex code set."""
    S = group.space
    F = S.field
    perms = np.empty((group.order, len(sorted_codes)), dtype=np.int64)
    for gi, M in enumerate(group.elements):
        g = GroupElement(F, M)
        perms[gi] = permutation_of(S, sorted_codes, g)
    return perms


def brute_orbitals(
    S: ClassicalSpace, sorted_codes: np.ndarray, group: TinyGroup
) -> tuple[np.ndarray, dict]:
    """Exact orbital partition and exact diameters by all-pairs BFS.

    Returns (labels, diameters): labels is an (N, N) int array giving each
    ordered pair's orbital id (0 on the diagonal cells of the identity
    orbital... the diagonal itself is labeled -1), and diameters maps
    orbital id -> exact diameter over all sources.
    """
    N = len(sorted_codes)
    if N > 500:
        raise BudgetExceeded("brute orbital table limited to 500 points")
    perms = group_permutations(group, sorted_codes)
    labels = np.full((N, N), -1, dtype=np.int64)
    next_label = 0
    for i in range(N):
        for j in range(N):
            if i == j or labels[i, j] >= 0:
                continue
            a = perms[:, i]
            b = perms[:, j]
            labels[a, b] = next_label
            labels[b, a] = next_label  # unordered orbitals
            next_label += 1
    diameters = {}
    for lab in range(next_label):
        adj = labels == lab
        diameters[lab] = _all_pairs_diameter(adj)
    return labels, diameters


def _all_pairs_diameter(adj: np.ndarray) -> int:
    """Exact diameter of an undirected graph given a boolean adjacency
    matrix; -1 if disconnected."""
    N = adj.shape[0]
    diam = 0
    for s in range(N):
        dist = np.full(N, -1, dtype=np.int64)
        dist[s] = 0
        frontier = np.array([s])
        d = 0
        while frontier.size:
            nxt = adj[frontier].any(axis=0) & (dist < 0)
            d += 1
            idx = np.nonzero(nxt)[0]
            dist[idx] = d
            frontier = idx
        if (dist < 0).any():
            return -1
        diam = max(diam, int(dist.max()))
    return diam


def generated_permutation_group(
    gens: GeneratorSet, sorted_codes: np.ndarray, limit: int = 10**6
) -> set:
    """Closure of the generator permutations, as a set of perm bytes."""
    S = gens.space
    perms = [permutation_of(S, sorted_codes, g) for g in gens.gens]
    N = len(sorted_codes)
    ident = np.arange(N, dtype=np.int64)
    seen = {ident.tobytes(): ident}
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for g in perms:
                comp = g[p]
                key = comp.tobytes()
                if key not in seen:
                    if len(seen) >= limit:
                        raise BudgetExceeded("permutation closure too large")
                    seen[key] = comp
                    nxt.append(comp)
        frontier = nxt
    return set(seen)


def cross_check(
    S: ClassicalSpace,
    gens: GeneratorSet,
    sorted_codes: np.ndarray,
    engine_labels: np.ndarray,
    engine_diameters: dict,
    brute_family: str | None = None,
) -> dict:
    """Assert equality of brute-force and engine results on a tiny case.

    engine_labels: (N, N) orbital ids from the engine (diagonal -1).
    Returns a report dict; raises AssertionError on any mismatch.
    """
    group = brute_isometry_group(S, family=brute_family)
    # permutation-group equality
    brute_perm_keys = set()
    for M in group.elements:
        g = GroupElement(S.field, M)
        brute_perm_keys.add(permutation_of(S, sorted_codes, g).tobytes())
    engine_perm_keys = generated_permutation_group(gens, sorted_codes)
    if brute_perm_keys != engine_perm_keys:
        raise AssertionError(
            f"generated permutation group (order {len(engine_perm_keys)}) "
            f"!= brute permutation group (order {len(brute_perm_keys)})"
        )
    labels, diameters = brute_orbitals(S, sorted_codes, group)
    # orbital partitions must agree as partitions (label names may differ)
    if not _same_partition(labels, engine_labels):
        raise AssertionError("brute and engine orbital partitions differ")
    # diameters per matched orbital
    brute_diams = _diams_by_rep(labels, diameters)
    engine_diams = _diams_by_rep(engine_labels, engine_diameters)
    if brute_diams != engine_diams:
        raise AssertionError(
            f"diameters differ: brute {brute_diams} vs engine {engine_diams}"
        )
    return {
        "group_order": group.order,
        "perm_group_order": len(brute_perm_keys),
        "orbitals": len(diameters),
        "diameters": brute_diams,
    }


def _same_partition(a: np.ndarray, b: np.ndarray) -> bool:
    N = a.shape[0]
    mapping = {}
    rev = {}
    for i in range(N):
        for j in range(N):
            if i == j:
                continue
            la, lb = int(a[i, j]), int(b[i, j])
            if mapping.setdefault(la, lb) != lb:
                return False
            if rev.setdefault(lb, la) != la:
                return False
    return True


def _diams_by_rep(labels: np.ndarray, diameters: dict) -> dict:
    """Map each orbital's lexicographically least pair to its diameter."""
    out = {}
    N = labels.shape[0]
    for lab, d in diameters.items():
        idx = np.argwhere(labels == lab)
        rep = tuple(idx[0])
        out[rep] = d
    return out
