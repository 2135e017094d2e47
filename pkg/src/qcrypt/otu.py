"""Knapsack public-key scheme whose key generation needs discrete logarithms.

Degree-one realization: the residue ring is F_q with representatives 0..q-1,
and the small elements p_i are pairwise-coprime integers whose k-fold products
stay below q, so a product is recovered from its residue by trial division.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Optional, Sequence

from . import hsp, numt
from .errors import DomainError, IntegrityError
from .pkc import find_generator

LOW_DENSITY_THRESHOLD = 0.9408
MAX_FIELD = 1 << 20


@dataclass(frozen=True)
class QpkcKeyPair:
    n: int
    k: int
    b: tuple[int, ...]
    q: Optional[int] = None
    g: Optional[int] = None
    d: Optional[int] = None
    p: Optional[tuple[int, ...]] = None
    logs: Optional[tuple[int, ...]] = None

    @property
    def public(self) -> "QpkcKeyPair":
        return QpkcKeyPair(self.n, self.k, self.b)

    @property
    def has_private(self) -> bool:
        return self.q is not None

    def to_json(self) -> dict:
        out = {"n": self.n, "k": self.k, "b": [str(x) for x in self.b]}
        if self.has_private:
            out.update(q=str(self.q), g=str(self.g), d=str(self.d),
                       p=[str(x) for x in self.p], logs=[str(x) for x in self.logs])
        return out

    @classmethod
    def from_json(cls, data: dict) -> "QpkcKeyPair":
        ints = lambda xs: tuple(int(x) for x in xs)  # noqa: E731
        if "q" not in data:
            return cls(int(data["n"]), int(data["k"]), ints(data["b"]))
        return cls(int(data["n"]), int(data["k"]), ints(data["b"]), int(data["q"]), int(data["g"]),
                   int(data["d"]), ints(data["p"]), ints(data["logs"]))


def max_k_product(p: Sequence[int], k: int) -> int:
    return numt.product(sorted(p)[-k:])


def validate_key(key: QpkcKeyPair) -> None:
    """Raise DomainError unless every key-generation condition holds."""
    n, k, q = key.n, key.k, key.q
    if not n >= k >= 1 or len(key.b) != n:
        raise DomainError("need n >= k >= 1 and n public weights")
    if not key.has_private:
        return
    if not numt.is_prime(q):
        raise DomainError("q must be prime")
    if len(key.p) != n or any(x < 2 for x in key.p):
        raise DomainError("need n small elements >= 2")
    if any(math.gcd(x, y) != 1 for x, y in itertools.combinations(key.p, 2)):
        raise DomainError("small elements must be pairwise coprime")
    if max_k_product(key.p, k) >= q:
        raise DomainError("a product of k small elements reaches q")
    if numt.multiplicative_order(key.g, q) != q - 1:
        raise DomainError("g does not generate F_q^*")
    for pi, li, bi in zip(key.p, key.logs, key.b):
        if pow(key.g, li, q) != pi % q or bi != (li + key.d) % (q - 1):
            raise DomainError("public weight inconsistent with the private data")


def first_primes(n: int) -> list[int]:
    out, x = [], 1
    while len(out) < n:
        x = numt.next_prime(x)
        out.append(x)
    return out


def qpkc_keygen(n: int, k: int, rng, p: Optional[Sequence[int]] = None, q: Optional[int] = None,
                d: Optional[int] = None, quantum: bool = True) -> QpkcKeyPair:
    """Keys from the first n primes (or given p) and the least prime above their
    largest k-product (or a given q).

    quantum=True takes the discrete logs with the hidden-subgroup solver;
    quantum=False uses baby-step giant-step as a classical oracle.
    """
    if not n >= k >= 1:
        raise DomainError("need n >= k >= 1")
    p = tuple(first_primes(n) if p is None else p)
    if q is None:
        q = numt.next_prime(max_k_product(p, k))
    if q > MAX_FIELD:
        raise DomainError(f"field size {q} exceeds the simulation limit {MAX_FIELD}")
    g = find_generator(q)
    group = hsp.MultiplicativeGroup(q)
    logs = []
    for pi in p:
        if quantum:
            logs.append(hsp.dlog(g, pi % q, q - 1, group, rng))
        else:
            logs.append(numt.dlog_bsgs(g, pi % q, q, q - 1))
    d = rng.randrange(q - 1) if d is None else d % (q - 1)
    key = QpkcKeyPair(n, k, tuple((x + d) % (q - 1) for x in logs), q, g, d, p, tuple(logs))
    validate_key(key)
    return key


# -- messages ------------------------------------------------------------------------------------


def message_bits(n: int, k: int) -> int:
    """Bits that always fit: floor(log2 C(n, k))."""
    return math.comb(n, k).bit_length() - 1


def encode_message(m: int, n: int, k: int) -> str:
    """Weight-k string of length n with rank m among all such strings."""
    if not 0 <= m < math.comb(n, k):
        raise DomainError(f"message must lie in [0, C({n},{k}))")
    bits = []
    left = k
    for i in range(1, n + 1):
        c = math.comb(n - i, left)
        if m >= c:
            bits.append("1")
            m -= c
            left -= 1
        else:
            bits.append("0")
    return "".join(bits)


def decode_message(s: str) -> int:
    if set(s) - {"0", "1"}:
        raise DomainError("not a bit string")
    n, left, m = len(s), s.count("1"), 0
    for i, bit in enumerate(s, start=1):
        if bit == "1":
            m += math.comb(n - i, left)
            left -= 1
    return m


def qpkc_encrypt(pub: QpkcKeyPair, m: int) -> int:
    s = encode_message(m, pub.n, pub.k)
    return sum(b for b, bit in zip(pub.b, s) if bit == "1")


def qpkc_decrypt(priv: QpkcKeyPair, c: int) -> int:
    if not priv.has_private:
        raise DomainError("decryption needs the private key")
    q = priv.q
    r = (c - priv.k * priv.d) % (q - 1)
    v = pow(priv.g, r, q)
    bits = []
    for pi in priv.p:
        if v % pi == 0:
            bits.append("1")
            v //= pi
        else:
            bits.append("0")
    s = "".join(bits)
    if v != 1 or s.count("1") != priv.k:
        raise IntegrityError("residue is not a product of k distinct small elements")
    return decode_message(s)


# -- subset-sum density ------------------------------------------------------------------------


def ssp_density(b_values: Sequence[int]) -> float:
    if not b_values or any(b < 1 for b in b_values):
        raise DomainError("density needs positive weights")
    top = max(b_values)
    return math.inf if top == 1 else len(b_values) / math.log2(top)


def density_report(pub: QpkcKeyPair) -> dict:
    # a zero weight (log equal to -d) contributes nothing to the maximum
    rho = ssp_density([b for b in pub.b if b >= 1] or [1])
    return {"n": pub.n, "k": pub.k, "density": rho, "at_least_one": rho >= 1,
            "below_low_density_threshold": rho < LOW_DENSITY_THRESHOLD}
