"""Command-line surface: compute orbital diameters, verify statements from
the verification registry, probe the open conjecture, and sweep grids.

Exit codes: 0 success, 2 hypothesis/parameter violation, 3 budget
exceeded, 4 internal-check failure.
"""

from __future__ import annotations

import csv
import io
import json
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import click
import numpy as np

from .actions import (
    ActionInstance,
    Orbital,
    action_orbital_diameter,
    invariant_case,
    make_action,
    orbitals_enumerate,
    rank as action_rank,
    result_record,
    vertex_transitivity_check,
)
from .forms import SubspaceClass, TOTALLY_SINGULAR, make_space
from .gf import Field, make_field
from .linalg import BudgetExceeded, decode, meet_dim, rank_batch, decode_batch
from . import witnesses as wit

EXIT_OK = 0
EXIT_HYPOTHESIS = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4


class HypothesisViolation(Exception):
    pass


def field_from_q(q: int) -> Field:
    p = 2
    while p * p <= q:
        if q % p == 0:
            break
        p += 1
    if q % p:
        p = q
    e = 0
    m = q
    while m > 1:
        if m % p:
            raise HypothesisViolation(f"q = {q} is not a prime power")
        m //= p
        e += 1
    return make_field(p, e)


CLASS_NAMES = {
    "any": SubspaceClass("any"),
    "ts": TOTALLY_SINGULAR,
    "nd": SubspaceClass("nondegenerate"),
    "nd+": SubspaceClass("nondegenerate", "O+"),
    "nd-": SubspaceClass("nondegenerate", "O-"),
    "nd-odd": SubspaceClass("nondegenerate", "odd"),
    "nsp": SubspaceClass("nonsingular_point_q_even"),
}

FAMILY_NAMES = {
    "sl": "SL", "gl": "GL", "sp": "Sp", "su": "SU", "gu": "GU",
    "go": "GO", "omega": "Omega",
}


def build_action(case, family, n, q, eps, t, cls_name, extensions, strategy_budget):
    fam = FAMILY_NAMES[family.lower()]
    # U_n(q) naming: matrices live over GF(q^2)
    F = field_from_q(q * q if fam in ("SU", "GU") else q)
    cls = CLASS_NAMES[cls_name] if cls_name else None
    return make_action(case, fam, n, F, eps=eps or "", t=t, cls=cls,
                       extensions=tuple(extensions), budget=strategy_budget)


def run_compute(cfg: dict) -> dict:
    t0 = time.time()
    A = build_action(
        cfg["case"], cfg["family"], cfg["n"], cfg["q"], cfg.get("eps", ""),
        cfg.get("t", 1), cfg.get("class", ""), cfg.get("extensions", ()),
        cfg.get("budget_orbit", 10_000_000),
    )
    keep = A.N <= cfg.get("keep_edges_max", 2000)
    orbs = orbitals_enumerate(
        A,
        strategy=cfg.get("strategy", "pair_bfs"),
        seed=cfg.get("seed", 0),
        keep_pairsets=keep,
        budget_pairs=cfg.get("budget_pairs", 400_000_000),
    )
    checks = {
        "partition": True,  # enforced inside enumeration
        "connectivity": all(o.diameter >= 0 for o in orbs),
        "vertex_transitivity": all(
            vertex_transitivity_check(A, o, seed=cfg.get("seed", 0) + 1)
            for o in orbs
        ),
    }
    rec = result_record(A, orbs, int((time.time() - t0) * 1000), checks)
    rec["config"] = {k: v for k, v in cfg.items() if k != "out"}
    return rec


def record_to_csv_rows(rec: dict) -> list[dict]:
    base = {
        "case": rec["action"]["case"],
        "family": rec["action"]["family"],
        "space": rec["action"]["space"],
        "t": rec["action"]["t"],
        "class": rec["action"]["class"],
        "size": rec["size"],
        "rank": rec["rank"],
        "diam": rec["diam"],
    }
    rows = []
    for i, o in enumerate(rec["orbitals"]):
        row = dict(base)
        row.update(
            orbital=i,
            suborbit_size=o["suborbit_size"],
            diameter=o["diameter"],
            strategy=o["strategy"],
        )
        rows.append(row)
    return rows


def emit(data, out: str, fmt: str):
    if fmt == "json":
        text = json.dumps(data, indent=2, sort_keys=True, default=str)
    else:
        rows = data if isinstance(data, list) else record_to_csv_rows(data)
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
            w.writeheader()
            w.writerows(rows)
        text = buf.getvalue()
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        click.echo(text)


# -- verification registry -----------------------------------------------


def _hyp(cond: bool, msg: str):
    if not cond:
        raise HypothesisViolation(msg)


def verify_pslb(params) -> dict:
    n, q, t = params["n"], params["q"], params["t"]
    _hyp(2 * t < n, f"needs k = t < n/2, got t={t}, n={n}")
    rec = run_compute({"case": "b", "family": "sl", "n": n, "q": q, "t": t,
                       "class": "any", "seed": params.get("seed", 0)})
    k = t
    ok = rec["diam"] == k
    return {"claim": f"diam(X,G) = k = {k}", "measured": rec["diam"],
            "pass": ok, "record": rec}


def verify_thm1_lower(params) -> dict:
    """diam(X,G) >= k for a case (b) action."""
    n, t = params["n"], params["t"]
    k = min(t, n - t)
    _hyp(k >= 1, "needs k >= 1")
    rec = run_compute({
        "case": "b", "family": params["family"], "n": n, "q": params["q"],
        "eps": params.get("eps", ""), "t": t,
        "class": params.get("class", "any"), "seed": params.get("seed", 0),
    })
    out_of_theorem = rec.get("out_of_theorem", False)
    ok = rec["diam"] >= k or out_of_theorem
    return {"claim": f"diam(X,G) >= k = {k}", "measured": rec["diam"],
            "out_of_theorem": out_of_theorem, "pass": ok, "record": rec}


def verify_halfspin(params) -> dict:
    n, q = params["n"], params["q"]
    _hyp(n % 2 == 0, "needs n even")
    k = n // 2
    rec = run_compute({"case": "b", "family": "omega", "n": n, "q": q,
                       "eps": "+", "t": k, "class": "ts",
                       "seed": params.get("seed", 0)})
    ok = rec["diam"] == k // 2 and rec["rank"] == k // 2 + 1
    return {"claim": f"diam = [k/2] = {k // 2}, rank = {k // 2 + 1}",
            "measured": {"diam": rec["diam"], "rank": rec["rank"]},
            "pass": ok, "record": rec}


def verify_thm2_converse(params) -> dict:
    """Every non-diagonal orbital of the k = 1 point action has diameter
    exactly 2."""
    fam = FAMILY_NAMES[params["family"].lower()]
    n, q = params["n"], params["q"]
    if fam in ("SU", "GU"):
        _hyp(n >= 5, "unitary points need n >= 5")
        cls = "nd"
    elif fam in ("GO", "Omega"):
        F = field_from_q(q)
        if F.p == 2:
            _hyp(n >= 8 and n % 2 == 0, "q even needs n >= 8 even")
            cls = "nsp"
        else:
            _hyp(n >= 5, "orthogonal points need n >= 5")
            cls = "nd"
    else:
        raise HypothesisViolation("point converse needs a unitary or "
                                  "orthogonal family")
    rec = run_compute({"case": "b", "family": params["family"], "n": n,
                       "q": q, "eps": params.get("eps", ""), "t": 1,
                       "class": cls, "seed": params.get("seed", 0)})
    diams = [o["diameter"] for o in rec["orbitals"]]
    ok = all(d == 2 for d in diams)
    return {"claim": "every non-diagonal orbital has diameter 2",
            "measured": diams, "pass": ok, "record": rec}


def verify_lemma_seged(params) -> dict:
    """d(A,B) >= r whenever dim(U meet B) <= k - r*l, checked vertex by
    vertex from the base of the witness orbital."""
    A = build_action("b", params["family"], params["n"], params["q"],
                     params.get("eps", ""), params["t"],
                     params.get("class", "any"), (), 10_000_000)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=params.get("seed", 0))
    S = A.space
    k = int(A.sorted_codes[0] % (S.n + 1))
    base_sub = decode(S.space, int(A.sorted_codes[A.base_idx]))
    bases = decode_batch(S.space, A.sorted_codes, k)
    joined = np.concatenate(
        [np.broadcast_to(base_sub.basis, bases.shape), bases], axis=1
    )
    meets = 2 * k - rank_batch(S.field, joined)
    violations = []
    for o in orbs:
        if o.distances is None or o.diameter < 0:
            continue
        w = o.rep[1]
        l = k - int(meets[w])
        if l <= 0:
            continue
        d = o.distances
        for r in range(1, k // l + 1):
            bad = np.nonzero((meets <= k - r * l) & (d >= 0) & (d < r))[0]
            if bad.size:
                violations.append({"orbital_rep": o.rep, "r": r,
                                   "count": int(bad.size)})
    return {"claim": "dim(U meet B) <= k - r*l implies d >= r",
            "violations": violations, "pass": not violations}


def verify_pairofspaces(params) -> dict:
    n, q, t = params["n"], params["q"], params["t"]
    _hyp(2 * t == n, "needs t = n/2 complementary pairs")
    F = field_from_q(q)
    A = make_action("c", "SL", n, F, t=t)
    orbs = orbitals_enumerate(A, "pair_bfs", seed=params.get("seed", 0))
    u, w = A.pair_components
    S = A.space
    bu = decode_batch(S.space, u, t)
    bw = decode_batch(S.space, w, t)
    b0u = decode(S.space, int(u[A.base_idx])).basis
    b0w = decode(S.space, int(w[A.base_idx])).basis

    def meets_with(rows):
        out = np.zeros(A.N, dtype=np.int64)
        for comp in (bu, bw):
            joined = np.concatenate(
                [np.broadcast_to(rows, comp.shape), comp], axis=1
            )
            out = np.maximum(out, 2 * t - rank_batch(S.field, joined))
        return out

    dimAB = np.maximum(meets_with(b0u), meets_with(b0w))
    # O1: the orbital whose representative edge has dim(A,B) = t-1
    violations = []
    checked = 0
    for o in orbs:
        if o.distances is None:
            continue
        if int(dimAB[o.rep[1]]) != t - 1:
            continue
        checked += 1
        d = o.distances
        ok_mask = (d < 0) | (d >= t - dimAB)
        bad = np.nonzero(~ok_mask)[0]
        if bad.size:
            violations.append({"orbital_rep": o.rep, "count": int(bad.size)})
    return {"claim": "d(A,B) >= t - dim(A,B) in O1",
            "orbitals_checked": checked,
            "violations": violations, "pass": not violations and checked > 0}


def verify_witness(params) -> dict:
    case = params["case_id"]
    q = params["q"]
    F = field_from_q(q)
    n = params["n"]
    if case in wit.TRIPLE_CASES:
        _, _, _, _, _, rep = wit.witness_subspace_triple(
            case, n, F, params["k"], params.get("eps", ""))
    elif case == "halfspin_WWW":
        _, _, _, _, rep = wit.witness_halfspin(n, F)
    elif case in ("nd2_diam3", "o2minus_q1mod4"):
        _, _, _, _, rep = wit.witness_diam3_obstruction(
            case, n, F, params.get("eps", ""), params.get("kind", "symplectic"))
    elif case in ("unitary_point", "orth_point_qodd", "qeven_point"):
        _, _, rep = wit.witness_common_neighbor(
            case, n, F, params.get("lam", 1), params.get("mu"),
            params.get("eps", ""), params.get("sigma"))
    elif case == "case_c_elements":
        rep = wit.witness_case_c(n, F, params["t"])["report"]
    elif case == "case_c_zero_pair":
        d = wit.witness_case_c(n, F, params["t"])
        _, _, rep = wit.witness_case_c_zero_pair(d["space"], d["U"], d["W1"])
    else:
        raise HypothesisViolation(f"unknown witness case {case!r}")
    out = rep.to_json()
    out["pass"] = rep.passed
    return out


STATEMENTS = {
    "pslb": verify_pslb,
    "thm1-lower": verify_thm1_lower,
    "halfspin": verify_halfspin,
    "thm2-converse": verify_thm2_converse,
    "lemma-seged": verify_lemma_seged,
    "pairofspaces": verify_pairofspaces,
    "witness": verify_witness,
}


# -- conjecture probe ------------------------------------------------------


def run_probe(n: int, q: int, seed: int, budget_pairs: int,
              strategy: str = "pair_bfs") -> dict:
    F = field_from_q(q)
    if q % 4 != 3:
        raise HypothesisViolation(f"conjecture concerns q = 3 mod 4, got {q}")
    if n < 7:
        raise HypothesisViolation("n >= 7 recommended; smaller n rejected")
    t0 = time.time()
    eps = "" if n % 2 else "+"
    A = make_action("b", "GO", n, F, eps=eps, t=2,
                    cls=SubspaceClass("nondegenerate", "O-"),
                    budget=40_000_000)
    orbs = orbitals_enumerate(A, strategy, seed=seed,
                              budget_pairs=budget_pairs)
    diams = [o.diameter for o in orbs]
    definite = strategy == "pair_bfs"
    # the conjecture concerns diam(X,G) = sup of orbital diameters;
    # a disconnected orbital makes the supremum infinite
    if any(d < 0 for d in diams):
        sup, consistent = "infinite", True
    else:
        sup = max(diams)
        consistent = sup >= 3
    evidence = (
        f"supremum of orbital diameters = {sup}; "
        + ("consistent with >= 3" if consistent else "below 3 at this size")
    )
    return {
        "diam_sup": sup,
        "conjecture": "o2minus_q3mod4",
        "params": {"n": n, "q": q, "eps": eps},
        "size": A.N,
        "rank": action_rank(A, orbs),
        "orbitals": [
            {"suborbit_size": o.suborbit_size, "edge_count": o.edge_count,
             "diameter": o.diameter, "strategy": o.strategy}
            for o in orbs
        ],
        "definite": definite,
        "evidence": evidence,
        "note": "evidence only; the artifact makes no truth claim",
        "runtime_ms": int((time.time() - t0) * 1000),
    }


# -- click wiring ----------------------------------------------------------


@click.group()
def main():
    """Orbital diameters of standard subspace actions of finite classical
    groups."""


def _run(fn, *args, **kw):
    try:
        return fn(*args, **kw), EXIT_OK
    except HypothesisViolation as exc:
        return {"error": "hypothesis_violation", "detail": str(exc)}, EXIT_HYPOTHESIS
    except (ValueError, KeyError, IndexError) as exc:
        return {"error": "invalid_parameters", "detail": str(exc)}, EXIT_HYPOTHESIS
    except BudgetExceeded as exc:
        return {"error": "budget_exceeded", "detail": str(exc)}, EXIT_BUDGET
    except AssertionError as exc:
        return {"error": "internal_check_failed", "detail": str(exc)}, EXIT_INTERNAL


common_opts = [
    click.option("--out", default="", help="Output path (default stdout)."),
    click.option("--format", "fmt", type=click.Choice(["json", "csv"]),
                 default="json"),
    click.option("--seed", default=0, type=int),
    click.option("--threads", default=1, type=int,
                 help="Worker threads for sweeps."),
]


def add_opts(opts):
    def deco(f):
        for opt in reversed(opts):
            f = opt(f)
        return f
    return deco


@main.command()
@click.option("--case", type=click.Choice(["b", "c", "d"]), required=True)
@click.option("--family", type=click.Choice(list(FAMILY_NAMES)), required=True)
@click.option("--n", type=int, required=True)
@click.option("--q", type=int, required=True)
@click.option("--eps", type=click.Choice(["", "+", "-"]), default="")
@click.option("--t", type=int, default=1)
@click.option("--class", "cls_name", type=click.Choice(list(CLASS_NAMES)),
              default="any")
@click.option("--strategy",
              type=click.Choice(["pair_bfs", "invariant", "stab_sample"]),
              default="pair_bfs")
@click.option("--extensions", default="",
              help="Comma-separated: field_auto,graph_auto.")
@click.option("--budget-pairs", default=400_000_000, type=int)
@click.option("--budget-orbit", default=10_000_000, type=int)
@add_opts(common_opts)
def compute(case, family, n, q, eps, t, cls_name, strategy, extensions,
            budget_pairs, budget_orbit, out, fmt, seed, threads):
    """Compute orbitals and exact diameters for one action."""
    cfg = {
        "case": case, "family": family, "n": n, "q": q, "eps": eps, "t": t,
        "class": cls_name, "strategy": strategy,
        "extensions": tuple(x for x in extensions.split(",") if x),
        "budget_pairs": budget_pairs, "budget_orbit": budget_orbit,
        "seed": seed,
    }
    data, code = _run(run_compute, cfg)
    emit(data, out, fmt)
    sys.exit(code)


@main.command()
@click.argument("statement", type=click.Choice(list(STATEMENTS)))
@click.option("--params", default="{}",
              help="Statement parameters as a JSON object.")
@add_opts(common_opts)
def verify(statement, params, out, fmt, seed, threads):
    """Verify a registered statement; PASS iff every claim instance holds."""
    p = json.loads(params)
    p.setdefault("seed", seed)
    data, code = _run(STATEMENTS[statement], p)
    data = {"statement": statement, "params": p, **data}
    emit(data, out, "json")
    if code == EXIT_OK and not data.get("pass", False):
        code = EXIT_INTERNAL
    sys.exit(code)


@main.command()
@click.option("--n", type=int, default=7)
@click.option("--q", type=int, default=3)
@click.option("--strategy",
              type=click.Choice(["pair_bfs", "stab_sample"]),
              default="pair_bfs")
@click.option("--budget-pairs", default=800_000_000, type=int)
@add_opts(common_opts)
def probe(n, q, strategy, budget_pairs, out, fmt, seed, threads):
    """Probe the open conjecture (O2- subspaces, q = 3 mod 4); reports
    evidence, never a truth claim."""
    data, code = _run(run_probe, n, q, seed, budget_pairs, strategy)
    emit(data, out, "json")
    sys.exit(code)


@main.command()
@click.argument("gridfile", type=click.Path(exists=True))
@add_opts(common_opts)
def sweep(gridfile, out, fmt, seed, threads):
    """Run every config row in a JSON grid file; errors are recorded per
    row and the sweep continues."""
    with open(gridfile) as fh:
        grid = json.load(fh)
    results = [None] * len(grid)

    def work(i_cfg):
        i, cfg = i_cfg
        cfg = dict(cfg)
        cfg.setdefault("seed", seed)
        data, code = _run(run_compute, cfg)
        return i, {"config": cfg, "result": data, "exit_code": code}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for i, row in pool.map(work, enumerate(grid)):
                results[i] = row
    else:
        for i, row in map(work, enumerate(grid)):
            results[i] = row
    worst = max((r["exit_code"] for r in results), default=EXIT_OK)
    if fmt == "csv":
        rows = []
        for r in results:
            if r["exit_code"] == EXIT_OK:
                rows.extend(record_to_csv_rows(r["result"]))
            else:
                rows.append({"error": json.dumps(r["result"]),
                             "config": json.dumps(r["config"])})
        emit(rows, out, "csv")
    else:
        emit(results, out, "json")
    sys.exit(worst)


if __name__ == "__main__":
    main()
