"""Integer arithmetic used by every other module.

Python ints are already arbitrary precision, so "NaturalNumber" is just int
and fractions use :class:`fractions.Fraction`.
"""
from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Optional

from .errors import DomainError, NotInSubgroup, NotInvertible

__all__ = [
    "Fraction", "egcd", "mod_inverse", "mod_pow", "crt", "convergents",
    "continued_fraction", "recover_fraction", "dlog_bsgs", "trial_division_factor",
    "is_prime", "next_prime", "primes_upto", "lcm", "multiplicative_order",
    "random_prime", "prime_factors",
]


def egcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with a*x + b*y = g = gcd(a, b) >= 0."""
    if a == 0 and b == 0:
        raise DomainError("egcd(0, 0) is undefined")
    x0, y0, x1, y1 = 1, 0, 0, 1
    r0, r1 = a, b
    while r1 != 0:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if r0 < 0:
        r0, x0, y0 = -r0, -x0, -y0
    return r0, x0, y0


def mod_inverse(a: int, n: int) -> int:
    if n < 1:
        raise DomainError("modulus must be positive")
    g, x, _ = egcd(a % n, n)
    if g != 1:
        raise NotInvertible(f"{a} has no inverse modulo {n}")
    return x % n


def mod_pow(base: int, exp: int, modulus: int) -> int:
    if modulus < 2:
        raise DomainError("modulus must be at least 2")
    if exp < 0:
        return pow(mod_inverse(base, modulus), -exp, modulus)
    return pow(base, exp, modulus)


def lcm(a: int, b: int) -> int:
    return abs(a * b) // math.gcd(a, b) if a and b else 0


def crt(residues: list[int], moduli: list[int]) -> int:
    if len(residues) != len(moduli) or not moduli:
        raise DomainError("need equal-length, non-empty residue and modulus lists")
    x, n = 0, 1
    for r, m in zip(residues, moduli):
        if m < 1:
            raise DomainError("moduli must be positive")
        g, u, _ = egcd(n, m)
        if g != 1:
            raise DomainError(f"moduli {n} and {m} are not coprime")
        # x + n*t = r (mod m)  =>  t = (r - x) * n^-1 (mod m)
        t = ((r - x) * u) % m
        x += n * t
        n *= m
    return x % n


def continued_fraction(x: Fraction) -> list[int]:
    num, den = x.numerator, x.denominator
    terms = []
    while den:
        q = num // den
        terms.append(q)
        num, den = den, num - q * den
    return terms


def convergents(x: Fraction | int) -> list[Fraction]:
    """All convergents of x, ending with x itself in lowest terms."""
    x = Fraction(x)
    if x < 0:
        raise DomainError("convergents expects a non-negative value")
    h0, h1 = 0, 1  # h_{-2}, h_{-1}
    k0, k1 = 1, 0
    out = []
    for a in continued_fraction(x):
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        out.append(Fraction(h1, k1))
    return out


def recover_fraction(y: int, m: int, denom_bound: int) -> Optional[Fraction]:
    """First convergent a/b of y/m with b <= denom_bound and |y/m - a/b| <= 1/m."""
    if not 0 <= y < m or denom_bound < 1:
        raise DomainError("need 0 <= y < m and denom_bound >= 1")
    target = Fraction(y, m)
    for c in convergents(target):
        if c.denominator > denom_bound:
            break
        if abs(target - c) * m <= 1:
            return c
    return None


def dlog_bsgs(g: int, h: int, modulus: int, order: int) -> int:
    """Smallest k >= 0 with g^k = h (mod modulus), by baby-step giant-step."""
    g %= modulus
    h %= modulus
    step = math.isqrt(order) + 1
    table: dict[int, int] = {}
    cur = 1
    for j in range(step):
        table.setdefault(cur, j)
        cur = cur * g % modulus
    giant = mod_inverse(pow(g, step, modulus), modulus)
    cur = h
    for i in range(step + 1):
        if cur in table:
            # smallest i first, smallest j kept by setdefault
            return i * step + table[cur]
        cur = cur * giant % modulus
    raise NotInSubgroup(f"{h} is not a power of {g} modulo {modulus}")


def trial_division_factor(n: int) -> list[tuple[int, int]]:
    if n < 2:
        raise DomainError("need n >= 2")
    out = []
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if n > 1:
        out.append((n, 1))
    return out


def prime_factors(n: int) -> list[int]:
    return [p for p, _ in trial_division_factor(n)]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    c = max(n + 1, 2)
    while not is_prime(c):
        c += 1
    return c


def primes_upto(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = bytearray(len(range(p * p, n + 1, p)))
    return [i for i, v in enumerate(sieve) if v]


def random_prime(bits: int, rng, condition=None) -> int:
    """Uniform-ish prime with exactly `bits` bits, optionally filtered."""
    if bits < 2:
        raise DomainError("need at least 2 bits")
    lo, hi = 1 << (bits - 1), (1 << bits) - 1
    while True:
        c = rng.randint(lo, hi)
        if is_prime(c) and (condition is None or condition(c)):
            return c


def multiplicative_order(a: int, n: int) -> int:
    """Classical order of a modulo n (test oracle; factors phi by trial division)."""
    if math.gcd(a, n) != 1:
        raise DomainError(f"{a} is not a unit modulo {n}")
    if n == 1:
        return 1
    phi = 1
    for p, e in trial_division_factor(n):
        phi *= (p - 1) * p ** (e - 1)
    r = phi
    for p, _ in trial_division_factor(phi) if phi > 1 else []:
        while r % p == 0 and pow(a, r // p, n) == 1:
            r //= p
    return r


def product(values: Iterable[int]) -> int:
    out = 1
    for v in values:
        out *= v
    return out
