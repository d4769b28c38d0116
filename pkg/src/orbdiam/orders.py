"""Classical group order formulas, used as validation oracles."""

from __future__ import annotations


def order_gl(n: int, q: int) -> int:
    out = 1
    for i in range(n):
        out *= q**n - q**i
    return out


def order_sl(n: int, q: int) -> int:
    return order_gl(n, q) // (q - 1)


def order_sp(n: int, q: int) -> int:
    if n % 2:
        raise ValueError("Sp needs even dimension")
    m = n // 2
    out = q ** (m * m)
    for i in range(1, m + 1):
        out *= q ** (2 * i) - 1
    return out


def order_gu(n: int, q0: int) -> int:
    """GU_n(q0), matrices over GF(q0^2)."""
    out = q0 ** (n * (n - 1) // 2)
    for i in range(1, n + 1):
        out *= q0**i - (-1) ** i
    return out


def order_su(n: int, q0: int) -> int:
    return order_gu(n, q0) // (q0 + 1)


def order_go(n: int, q: int, eps: str) -> int:
    """Full isometry group O_n^eps(q) of a non-degenerate quadratic form."""
    if n % 2 == 0:
        if eps not in ("+", "-"):
            raise ValueError("even-dimensional orthogonal group needs a sign")
        m = n // 2
        e = 1 if eps == "+" else -1
        out = 2 * q ** (m * (m - 1)) * (q**m - e)
        for i in range(1, m):
            out *= q ** (2 * i) - 1
        return out
    if q % 2 == 0:
        raise ValueError("odd dimension with even q is out of scope")
    m = (n - 1) // 2
    out = 2 * q ** (m * m)
    for i in range(1, m + 1):
        out *= q ** (2 * i) - 1
    return out


def order_omega(n: int, q: int, eps: str) -> int:
    full = order_go(n, q, eps)
    if q % 2 == 0:
        return full // 2
    if n % 2:
        return full // 4 if n > 1 else full
    return full // 4
