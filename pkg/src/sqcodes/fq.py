"""Finite fields F_q for q = p^e <= 2^16.

Elements are plain ints in [0, q): the base-p digits of the value
(little-endian) are the coefficients of a polynomial over F_p, reduced
modulo a fixed monic irreducible.  For e > 1 the modulus is the
lexicographically smallest monic irreducible of degree e, comparing
coefficient lists from the constant term up.

Multiplication goes through exp/log tables of a primitive element.
Addition is ``(a + b) % p`` for prime fields, XOR in characteristic 2 and
Zech logarithms for odd-characteristic extension fields.
"""

from __future__ import annotations

import functools
import itertools
from functools import cached_property

import numpy as np

from .errors import DivisionByZero, NotPrimePower, OutOfRange

MAX_Q = 1 << 16


def factorize(n: int) -> dict[int, int]:
    """Prime factorisation by trial division."""
    out: dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


# --- polynomials over F_p as coefficient lists, constant term first ---------

def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], m: list[int], p: int) -> list[int]:
    a = _poly_trim(list(a))
    dm = len(m) - 1
    inv_lead = pow(m[-1], p - 2, p)
    while len(a) - 1 >= dm:
        c = a[-1] * inv_lead % p
        shift = len(a) - 1 - dm
        for i, mi in enumerate(m):
            a[shift + i] = (a[shift + i] - c * mi) % p
        _poly_trim(a)
    return a


def _is_irreducible(m: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg(m)//2."""
    e = len(m) - 1
    for d in range(1, e // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            if not _poly_mod(m, list(low) + [1], p):
                return False
    return True


def smallest_irreducible(p: int, e: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree e over F_p."""
    if e == 1:
        return (0, 1)
    for low in itertools.product(range(p), repeat=e):
        m = list(low) + [1]
        if m[0] == 0:
            continue
        if _is_irreducible(m, p):
            return tuple(m)
    raise AssertionError("no irreducible polynomial found")  # pragma: no cover


class FieldCtx:
    """Arithmetic context for F_q.

    Immutable after construction; the lazily built tables are pure functions
    of (p, e), so sharing a context between threads is safe.
    """

    def __init__(self, p: int, e: int, modulus: tuple[int, ...]):
        self.p = p
        self.e = e
        self.q = p**e
        self.modulus = modulus
        self.char2 = p == 2
        self.prime = e == 1
        self._build_tables()

    def __repr__(self) -> str:
        return f"FieldCtx(q={self.q})"

    def __reduce__(self):
        return (field_new, (self.q,))

    # --- construction -------------------------------------------------------

    def _digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.e):
            a, r = divmod(a, p)
            out.append(r)
        return out

    def _from_digits(self, d: list[int]) -> int:
        v = 0
        for c in reversed(d):
            v = v * self.p + c
        return v

    def _slow_add(self, a: int, b: int) -> int:
        if self.prime:
            return (a + b) % self.p
        if self.char2:
            return a ^ b
        p = self.p
        return self._from_digits([(x + y) % p for x, y in zip(self._digits(a), self._digits(b))])

    def _slow_mul(self, a: int, b: int) -> int:
        if self.prime:
            return a * b % self.p
        if self.char2:
            # carry-less product, reduced by the modulus bit pattern
            mod_bits = self._from_digits(list(self.modulus))
            r = 0
            while b:
                if b & 1:
                    r ^= a
                b >>= 1
                a <<= 1
                if a >> self.e:
                    a ^= mod_bits
            return r
        p = self.p
        da, db = self._digits(a), self._digits(b)
        prod = [0] * (2 * self.e - 1)
        for i, x in enumerate(da):
            if x:
                for j, y in enumerate(db):
                    prod[i + j] = (prod[i + j] + x * y) % p
        red = _poly_mod(prod, list(self.modulus), p)
        return self._from_digits(red + [0] * (self.e - len(red)))

    def _slow_pow(self, a: int, n: int) -> int:
        r = 1
        while n:
            if n & 1:
                r = self._slow_mul(r, a)
            a = self._slow_mul(a, a)
            n >>= 1
        return r

    def _build_tables(self) -> None:
        q = self.q
        order = q - 1
        if q == 2:
            self.generator = 1
            self._exp = [1, 1]
            self._log = [0, 0]
        else:
            primes = list(factorize(order))
            self.generator = next(
                g for g in range(2, q)
                if all(self._slow_pow(g, order // ell) != 1 for ell in primes)
            )
            g = self.generator
            exp = [0] * (2 * order)
            x = 1
            for i in range(order):
                exp[i] = x
                x = self._slow_mul(x, g)
            exp[order:] = exp[:order]
            log = [0] * q
            for i in range(order):
                log[exp[i]] = i
            self._exp = exp
            self._log = log
        self._inv = [0] + [self._exp[(order - self._log[a]) % order] for a in range(1, q)]
        if self.prime:
            self._neg = [(-a) % self.p for a in range(q)]
        elif self.char2:
            self._neg = list(range(q))
        else:
            half = order // 2
            self._neg = [0] + [self._exp[self._log[a] + half] for a in range(1, q)]
            # Zech logarithms: zech[n] = log(1 + g^n), or -1 when 1 + g^n = 0
            zech = [0] * order
            for n in range(order):
                s = self._slow_add(1, self._exp[n])
                zech[n] = self._log[s] if s else -1
            self._zech = zech

    # --- scalar arithmetic --------------------------------------------------

    def add(self, a: int, b: int) -> int:
        if self.prime:
            return (a + b) % self.p
        if self.char2:
            return a ^ b
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log[a]
        z = self._zech[(self._log[b] - la) % (self.q - 1)]
        return 0 if z < 0 else self._exp[la + z]

    def neg(self, a: int) -> int:
        return self._neg[a]

    def sub(self, a: int, b: int) -> int:
        if self.prime:
            return (a - b) % self.p
        if self.char2:
            return a ^ b
        return self.add(a, self._neg[b])

    def mul(self, a: int, b: int) -> int:
        if self.prime:
            return a * b % self.p
        if a == 0 or b == 0:
            return 0
        return self._exp[self._log[a] + self._log[b]]

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of 0")
        return self._inv[a]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, n: int) -> int:
        if n == 0:
            return 1
        if a == 0:
            if n < 0:
                raise DivisionByZero("0 to a negative power")
            return 0
        return self._exp[(self._log[a] * n) % (self.q - 1)]

    def frobenius(self, a: int) -> int:
        return self.pow(a, self.p)

    def sqrt(self, a: int) -> int | None:
        """A square root of a, or None if a is a non-square."""
        if self.char2:
            # squaring is an automorphism; its inverse is x -> x^(q/2)
            return self.pow(a, self.q // 2)
        r = self._sqrt_table[a]
        return None if r < 0 else r

    @cached_property
    def _sqrt_table(self) -> list[int]:
        t = [-1] * self.q
        for x in range(self.q):
            s = self.mul(x, x)
            if t[s] < 0:
                t[s] = x
        return t

    @cached_property
    def _artin_schreier(self) -> list[int]:
        # t[v] = some z with z^2 + z = v, or -1
        t = [-1] * self.q
        for z in range(self.q):
            v = self.add(self.mul(z, z), z)
            if t[v] < 0:
                t[v] = z
        return t

    def solve_quadratic(self, a: int, b: int, c: int) -> int | None:
        """One root of a t^2 + b t + c, or None if there is none."""
        if a == 0:
            if b == 0:
                return 0 if c == 0 else None
            return self.neg(self.div(c, b))
        if self.char2:
            if b == 0:
                return self.sqrt(self.div(c, a))
            # t = (b/a) z turns the equation into z^2 + z = ac/b^2
            z = self._artin_schreier[self.div(self.mul(a, c), self.mul(b, b))]
            if z < 0:
                return None
            return self.mul(self.div(b, a), z)
        disc = self.sub(self.mul(b, b), self.mul(4 % self.p, self.mul(a, c)))
        s = self.sqrt(disc)
        if s is None:
            return None
        return self.div(self.sub(s, b), self.mul(2, a))

    # --- row (list) operations ----------------------------------------------

    def axpy(self, x: list[int], f: int, y: list[int]) -> list[int]:
        """x - f*y entrywise."""
        if f == 0:
            return list(x)
        if self.prime:
            p = self.p
            return [(a - f * b) % p for a, b in zip(x, y)]
        mul, sub = self.mul, self.sub
        return [sub(a, mul(f, b)) for a, b in zip(x, y)]

    def scale(self, f: int, x: list[int]) -> list[int]:
        if self.prime:
            p = self.p
            return [f * a % p for a in x]
        mul = self.mul
        return [mul(f, a) for a in x]

    def vec_add(self, x, y) -> list[int]:
        if self.prime:
            p = self.p
            return [(a + b) % p for a, b in zip(x, y)]
        if self.char2:
            return [a ^ b for a, b in zip(x, y)]
        add = self.add
        return [add(a, b) for a, b in zip(x, y)]

    def hadamard(self, x, y) -> list[int]:
        if self.prime:
            p = self.p
            return [a * b % p for a, b in zip(x, y)]
        mul = self.mul
        return [mul(a, b) for a, b in zip(x, y)]

    def dot(self, x, y) -> int:
        if self.prime:
            return sum(a * b for a, b in zip(x, y)) % self.p
        mul, add = self.mul, self.add
        s = 0
        for a, b in zip(x, y):
            if a and b:
                s = add(s, mul(a, b))
        return s

    # --- numpy-vectorised arithmetic (arrays of element values) -------------

    @cached_property
    def _np_exp(self) -> np.ndarray:
        return np.asarray(self._exp, dtype=np.int64)

    @cached_property
    def _np_log(self) -> np.ndarray:
        return np.asarray(self._log, dtype=np.int64)

    @cached_property
    def _np_zech(self) -> np.ndarray:
        return np.asarray(self._zech, dtype=np.int64)

    def vadd(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.prime:
            return (a + b) % self.p
        if self.char2:
            return a ^ b
        a, b = np.broadcast_arrays(a, b)
        la = self._np_log[a]
        z = self._np_zech[(self._np_log[b] - la) % (self.q - 1)]
        out = np.where(z < 0, 0, self._np_exp[la + np.maximum(z, 0)])
        out = np.where(a == 0, b, out)
        return np.where(b == 0, a, out)

    def vmul(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.prime:
            return (a * b) % self.p
        out = self._np_exp[self._np_log[a] + self._np_log[b]]
        return np.where((a == 0) | (b == 0), 0, out)


@functools.lru_cache(maxsize=None)
def field_new(q: int) -> FieldCtx:
    """The (cached) context for F_q."""
    if not isinstance(q, int) or q < 2:
        raise OutOfRange(f"field size must be an integer >= 2, got {q!r}")
    if q > MAX_Q:
        raise OutOfRange(f"field size {q} exceeds 2^16")
    fac = factorize(q)
    if len(fac) != 1:
        raise NotPrimePower(f"{q} is not a prime power")
    ((p, e),) = fac.items()
    return FieldCtx(p, e, smallest_irreducible(p, e))


def f_add(ctx: FieldCtx, a: int, b: int) -> int:
    return ctx.add(a, b)


def f_mul(ctx: FieldCtx, a: int, b: int) -> int:
    return ctx.mul(a, b)


def f_inv(ctx: FieldCtx, a: int) -> int:
    return ctx.inv(a)
