"""Exact arithmetic in GF(p^e).

Elements are plain integers in [0, q) encoding polynomial coordinates
little-endian: the element with coefficients (c_0, ..., c_{e-1}) in the
modulus basis is the integer sum(c_i * p**i).  This integer encoding is
also the serialization format used everywhere else (subspace codes,
orbit caches, JSON reports).

A :class:`Field` owns all arithmetic.  Construction picks the lexicographically
least monic irreducible modulus for (p, e), so equal parameters always give
the identical field model.  Fields with q <= TABLE_CAP additionally carry
numpy add/mul/neg/inv lookup tables used by the vectorized linear algebra.
"""

from __future__ import annotations

import functools
from typing import Optional

import numpy as np

Q_LIMIT = 2**20
E_LIMIT = 16
TABLE_CAP = 512


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


# -- polynomial helpers over GF(p), coefficients little-endian tuples --


def _poly_trim(a):
    i = len(a)
    while i > 0 and a[i - 1] == 0:
        i -= 1
    return a[:i]


def _poly_mulmod(a, b, mod, p):
    res = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                res[i + j] = (res[i + j] + ai * bj) % p
    return _poly_rem(res, mod, p)


def _poly_rem(a, mod, p):
    a = list(a)
    dm = len(mod) - 1
    inv_lead = pow(mod[-1], p - 2, p)
    while len(a) > dm:
        c = a[-1] % p
        if c:
            f = (c * inv_lead) % p
            for i in range(dm + 1):
                a[len(a) - 1 - dm + i] = (a[len(a) - 1 - dm + i] - f * mod[i]) % p
        a.pop()
    return tuple(_poly_trim(a))


def _poly_powmod(a, k, mod, p):
    result = (1,)
    base = _poly_rem(a, mod, p)
    while k:
        if k & 1:
            result = _poly_mulmod(result, base, mod, p)
        base = _poly_mulmod(base, base, mod, p)
        k >>= 1
    return result


def _poly_gcd(a, b, p):
    a, b = tuple(_poly_trim(a)), tuple(_poly_trim(b))
    while b:
        a, b = b, _poly_rem(a, b, p)
    return a


def _is_irreducible(mod, p) -> bool:
    """Monic polynomial of degree e >= 1 over GF(p)."""
    e = len(mod) - 1
    if e == 1:
        return True
    x = (0, 1)
    # x^(p^e) == x mod f
    xq = _poly_powmod(x, p**e, mod, p)
    if xq != _poly_rem(x, mod, p):
        return False
    for r in _prime_factors(e):
        xr = _poly_powmod(x, p ** (e // r), mod, p)
        diff = list(xr) + [0] * (max(len(xr), 2) - len(xr))
        diff[1] = (diff[1] - 1) % p
        g = _poly_gcd(tuple(diff), mod, p)
        if len(g) > 1:
            return False
    return True


class Field:
    """GF(p^e) with the deterministic lex-least irreducible modulus.

    Use :func:`make_field` (cached) rather than calling this directly.
    """

    def __init__(self, p: int, e: int):
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        if not 1 <= e <= E_LIMIT:
            raise ValueError(f"extension degree {e} outside [1, {E_LIMIT}]")
        q = p**e
        if q > Q_LIMIT:
            raise ValueError(f"q = {q} exceeds the cap {Q_LIMIT}")
        self.p = p
        self.e = e
        self.q = q
        self.modulus = self._find_modulus(p, e)
        self._build_scalar_tables()
        self._tables = None
        self._embeddings: dict = {}

    @staticmethod
    def _find_modulus(p, e):
        if e == 1:
            return (0, 1)  # t, conventionally; arithmetic is just mod p
        # lex-least = smallest integer encoding of the non-leading coefficients
        for code in range(p**e):
            lower = [(code // p**i) % p for i in range(e)]
            mod = tuple(lower) + (1,)
            if _is_irreducible(mod, p):
                return mod
        raise AssertionError("no irreducible polynomial found")

    # -- scalar arithmetic on integer encodings --

    def coeffs(self, a: int) -> tuple:
        return tuple((a // self.p**i) % self.p for i in range(self.e))

    def element(self, coeffs) -> int:
        return sum((c % self.p) * self.p**i for i, c in enumerate(coeffs))

    def check(self, a: int) -> int:
        if not 0 <= a < self.q:
            raise ValueError(f"{a} is not an element of GF({self.q})")
        return a

    def add(self, a: int, b: int) -> int:
        if self.e == 1:
            return (a + b) % self.p
        p = self.p
        out = 0
        mult = 1
        while a or b:
            out += ((a + b) % p) * mult
            a //= p
            b //= p
            mult *= p
        return out

    def neg(self, a: int) -> int:
        if self.e == 1:
            return (-a) % self.p
        p = self.p
        out = 0
        mult = 1
        while a:
            out += (-a % p) * mult
            a //= p
            mult *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inversion of 0 in GF(q)")
        return self._exp[(-self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        if b == 0:
            raise ZeroDivisionError("division by 0 in GF(q)")
        return self.mul(a, self.inv(b))

    def pow(self, a: int, k: int) -> int:
        if a == 0:
            if k < 0:
                raise ZeroDivisionError("0 to a negative power")
            return 0 if k else 1
        return self._exp[(self._log[a] * k) % (self.q - 1)]

    def frobenius(self, a: int, m: int = 1) -> int:
        """a ** (p**m)."""
        return self.pow(a, self.p ** (m % self.e))

    def _build_scalar_tables(self):
        p, e, q = self.p, self.e, self.q
        # multiplication by polynomial representative, used to bootstrap exp/log
        def raw_mul(a, b):
            if e == 1:
                return (a * b) % p
            pa = self.coeffs(a)
            pb = self.coeffs(b)
            res = _poly_mulmod(pa, pb, self.modulus, p)
            return self.element(res + (0,) * (e - len(res)))

        # find a multiplicative generator
        factors = _prime_factors(q - 1)

        def order_ok(g):
            for r in factors:
                x = 1
                for _ in range((q - 1) // r):
                    x = raw_mul(x, g)
                if x == 1:
                    return False
            return True

        gen = None
        for g in range(2, q) if q > 2 else [1]:
            if q == 2:
                gen = 1
                break
            if order_ok(g):
                gen = g
                break
        assert gen is not None
        exp = [0] * (q - 1)
        log = [0] * q
        x = 1
        for i in range(q - 1):
            exp[i] = x
            log[x] = i
            x = raw_mul(x, gen)
        assert x == 1
        self.generator = gen
        self._exp = exp
        self._log = log

    # -- numpy lookup tables for vectorized kernels --

    @property
    def tables(self):
        """(ADD, MUL, NEG, INV) numpy int64 tables; INV[0] = 0 sentinel."""
        if self._tables is None:
            if self.q > TABLE_CAP:
                raise ValueError(
                    f"vectorized tables unavailable for q = {self.q} > {TABLE_CAP}"
                )
            q, p, e = self.q, self.p, self.e
            idx = np.arange(q, dtype=np.int64)
            digits = np.stack(
                [(idx // p**i) % p for i in range(e)], axis=0
            )  # (e, q)
            s = (digits[:, :, None] + digits[:, None, :]) % p
            ADD = sum(s[i] * p**i for i in range(e)).astype(np.int64)
            nd = (-digits) % p
            NEG = sum(nd[i] * p**i for i in range(e)).astype(np.int64)
            logv = np.array(self._log, dtype=np.int64)
            expv = np.array(self._exp, dtype=np.int64)
            MUL = np.zeros((q, q), dtype=np.int64)
            nz = idx[1:]
            MUL[1:, 1:] = expv[(logv[nz][:, None] + logv[nz][None, :]) % (q - 1)]
            INV = np.zeros(q, dtype=np.int64)
            INV[1:] = expv[(-logv[nz]) % (q - 1)]
            self._tables = (ADD, MUL, NEG, INV)
        return self._tables

    # -- quadratic extension structure --

    def is_quadratic_extension_of(self, sub: "Field") -> bool:
        return self.p == sub.p and self.e == 2 * sub.e

    def embed_from(self, sub: "Field"):
        """Embedding map sub -> self (self a quadratic extension of sub).

        Returns (embed, project): integer maps in both directions; project
        raises on elements outside the image subfield.
        """
        if not self.is_quadratic_extension_of(sub):
            raise ValueError("not a quadratic extension of the given field")
        key = (sub.p, sub.e)
        if key not in self._embeddings:
            if sub.e == 1:
                embed = {c: (c % self.p) for c in range(sub.q)}
            else:
                # lex-least root of sub's modulus inside self
                root = None
                for cand in range(self.q):
                    acc = 0
                    for c in reversed(sub.modulus):
                        acc = self.add(self.mul(acc, cand), c % self.p)
                    if acc == 0:
                        root = cand
                        break
                assert root is not None
                embed = {}
                for a in range(sub.q):
                    acc = 0
                    for c in reversed(sub.coeffs(a)):
                        acc = self.add(self.mul(acc, root), c)
                    embed[a] = acc
            project = {v: k for k, v in embed.items()}
            self._embeddings[key] = (embed, project)
        return self._embeddings[key]

    def conj(self, a: int) -> int:
        """The involutory automorphism x -> x**sqrt(q); requires e even."""
        if self.e % 2:
            raise ValueError("field has no involutory automorphism")
        return self.pow(a, self.p ** (self.e // 2))

    def __eq__(self, other):
        return (
            isinstance(other, Field)
            and (self.p, self.e, self.modulus) == (other.p, other.e, other.modulus)
        )

    def __hash__(self):
        return hash((self.p, self.e, self.modulus))

    def __repr__(self):
        return f"GF({self.q})" if self.e == 1 else f"GF({self.p}^{self.e})"


@functools.lru_cache(maxsize=None)
def make_field(p: int, e: int = 1) -> Field:
    """Deterministically constructed GF(p^e); cached per (p, e)."""
    return Field(p, e)


def conjugate_trace_norm(F: Field, a: int, sub: Field) -> tuple[int, int, int]:
    """(conj, trace, norm) of a for the quadratic extension F / sub.

    conj is an element of F; trace and norm are returned as elements of sub.
    """
    if not F.is_quadratic_extension_of(sub):
        raise ValueError(f"{F} is not a quadratic extension of {sub}")
    c = F.conj(a)
    tr = F.add(a, c)
    nm = F.mul(a, c)
    _, project = F.embed_from(sub)
    return c, project[tr], project[nm]


def square_classes(F: Field):
    """(is_square predicate, fixed nonsquare representative or None)."""
    if F.p == 2:
        return (lambda a: True), None
    log = F._log

    def is_square(a: int) -> bool:
        return a == 0 or log[a] % 2 == 0

    nonsquare = next(a for a in range(1, F.q) if not is_square(a))
    return is_square, nonsquare


def special_params(F: Field, kind: str, sub: Optional[Field] = None) -> int:
    """Distinguished field constants.

    zeta: least z with t^2 + t + z irreducible over F.
    chi: least c with c + conj(c) = 1 (F a quadratic extension).
    sqrt_minus_one: least s with s^2 = -1 (requires q = 1 mod 4).
    """
    if kind == "zeta":
        # t^2+t+z has a root iff t^2+t = -z is solvable, i.e. -z is in
        # the image of x -> x^2 + x
        image = {F.add(F.mul(x, x), x) for x in range(F.q)}
        return next(z for z in range(F.q) if F.neg(z) not in image)
    if kind == "chi":
        if F.e % 2:
            raise ValueError("chi requires a quadratic extension field")
        one = 1
        return next(c for c in range(F.q) if F.add(c, F.conj(c)) == one)
    if kind == "sqrt_minus_one":
        if F.q % 4 != 1:
            raise ValueError(f"q = {F.q} is not 1 mod 4; no square root of -1")
        minus_one = F.neg(1)
        return next(s for s in range(F.q) if F.mul(s, s) == minus_one)
    raise ValueError(f"unknown special parameter {kind!r}")
