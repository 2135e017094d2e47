"""RSA, Rabin, ElGamal and Diffie-Hellman at toy sizes, with their quantum breaks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

from . import hsp, numt
from .errors import AlgorithmFailure, AmbiguousDecryption, DomainError, NotAResidue


def _dec(d: dict) -> dict:
    """Decimal-string serialization for big integers."""
    return {k: str(v) for k, v in d.items()}


def _undec(d: dict, fields) -> dict:
    return {k: int(d[k]) for k in fields}


# -- RSA ------------------------------------------------------------------------------

@dataclass(frozen=True)
class RsaKeyPair:
    n: int
    e: int
    p: Optional[int] = None
    q: Optional[int] = None
    d: Optional[int] = None

    @property
    def public(self) -> "RsaKeyPair":
        return RsaKeyPair(self.n, self.e)

    def to_json(self) -> dict:
        return _dec({k: v for k, v in self.__dict__.items() if v is not None})

    @classmethod
    def from_json(cls, d: dict) -> "RsaKeyPair":
        return cls(**{k: int(v) for k, v in d.items()})


def rsa_key_from_primes(p: int, q: int, e: int) -> RsaKeyPair:
    if p == q or not (numt.is_prime(p) and numt.is_prime(q)):
        raise DomainError("need two distinct primes")
    phi = (p - 1) * (q - 1)
    if not 1 < e < phi or math.gcd(e, phi) != 1:
        raise DomainError("e must be a unit modulo phi(n) in (1, phi)")
    return RsaKeyPair(p * q, e, p, q, numt.mod_inverse(e, phi))


def rsa_keygen(bit_size: int, rng) -> RsaKeyPair:
    """Key with an n of roughly `bit_size` bits built from two random primes."""
    if bit_size < 6:
        raise DomainError("need at least 6 bits")
    half = bit_size // 2
    while True:
        p = numt.random_prime(half, rng)
        q = numt.random_prime(bit_size - half, rng)
        if p == q:
            continue
        phi = (p - 1) * (q - 1)
        for _ in range(100):
            e = rng.randrange(3, phi)
            if math.gcd(e, phi) == 1:
                return rsa_key_from_primes(p, q, e)


def rsa_encrypt(pub: RsaKeyPair, m: int) -> int:
    if not 0 <= m < pub.n:
        raise DomainError("message must lie in [0, n)")
    return pow(m, pub.e, pub.n)


def rsa_decrypt(priv: RsaKeyPair, c: int) -> int:
    if priv.d is None:
        raise DomainError("private exponent missing")
    if not 0 <= c < priv.n:
        raise DomainError("ciphertext must lie in [0, n)")
    return pow(c, priv.d, priv.n)


def split_with_shor(n: int, rng, max_attempts: int = 10_000) -> int:
    """A non-trivial factor of an odd non-prime-power n, retrying shor_factor."""
    pp = hsp.perfect_power(n)
    if pp is not None:
        return pp[0]
    if n % 2 == 0:
        return 2
    for _ in range(max_attempts):
        t = hsp.shor_factor(n, rng)
        if t is not hsp.FAIL:
            return t
    raise AlgorithmFailure(f"could not split {n}")


def rsa_break_factor(pub: RsaKeyPair, rng) -> RsaKeyPair:
    """Factor n on the (simulated) quantum computer and rebuild the private key."""
    p = split_with_shor(pub.n, rng)
    q = pub.n // p
    phi = (p - 1) * (q - 1)
    return RsaKeyPair(pub.n, pub.e, min(p, q), max(p, q), numt.mod_inverse(pub.e, phi))


def rsa_break_direct(pub: RsaKeyPair, c: int, rng) -> int:
    """Recover m from c = m^e via the order r of c: m = c^(e^-1 mod r)."""
    if math.gcd(c, pub.n) != 1:
        raise DomainError("direct attack needs a ciphertext coprime to n")
    while True:
        r = hsp.find_order(c, pub.n, rng)
        if math.gcd(pub.e, r) == 1:
            break
    a = numt.mod_inverse(pub.e, r) if r > 1 else 0
    return pow(c, a, pub.n)


# -- Rabin ------------------------------------------------------------------------------

@dataclass(frozen=True)
class RabinKeyPair:
    n: int
    p: Optional[int] = None
    q: Optional[int] = None

    @property
    def public(self) -> "RabinKeyPair":
        return RabinKeyPair(self.n)

    def to_json(self) -> dict:
        return _dec({k: v for k, v in self.__dict__.items() if v is not None})


def rabin_keygen(bit_size: int, rng) -> RabinKeyPair:
    half = bit_size // 2
    blum = lambda x: x % 4 == 3
    while True:
        p = numt.random_prime(half, rng, blum)
        q = numt.random_prime(bit_size - half, rng, blum)
        if p != q:
            return RabinKeyPair(p * q, p, q)


def rabin_sqrt(c: int, p: int, q: int) -> list[int]:
    """The four square roots of c modulo pq for primes p = q = 3 (mod 4)."""
    if p % 4 != 3 or q % 4 != 3:
        raise DomainError("primes must be 3 mod 4")
    n = p * q
    c %= n
    if c % p == 0 or c % q == 0:
        raise DomainError("c must be a unit modulo n")
    r = pow(c, (p + 1) // 4, p)
    s = pow(c, (q + 1) // 4, q)
    if r * r % p != c % p or s * s % q != c % q:
        raise NotAResidue(f"{c} is not a square modulo {n}")
    _, a, b = numt.egcd(p, q)  # a p + b q = 1
    x = (a * p * s + b * q * r) % n
    y = (a * p * s - b * q * r) % n
    return sorted({x, n - x, y, n - y})


def rabin_encode(payload: int, redundancy_bits: int) -> int:
    """Append the redundancy pattern (trailing zero bits)."""
    return payload << redundancy_bits


def rabin_payload(m: int, redundancy_bits: int) -> int:
    return m >> redundancy_bits


def rabin_encrypt(pub: RabinKeyPair, m: int) -> int:
    if not 0 <= m < pub.n:
        raise DomainError("message must lie in [0, n)")
    return m * m % pub.n


def rabin_decrypt(priv: RabinKeyPair, c: int, redundancy_bits: Optional[int] = 4):
    """The unique root carrying the redundancy; all four roots if redundancy is off."""
    roots = rabin_sqrt(c, priv.p, priv.q)
    if not redundancy_bits:
        return roots
    mask = (1 << redundancy_bits) - 1
    valid = [x for x in roots if x & mask == 0]
    if len(valid) != 1:
        raise AmbiguousDecryption(f"{len(valid)} roots carry the redundancy pattern")
    return valid[0]


def rabin_oracle_to_factor(n: int, decrypt_oracle: Callable[[int], int], rng,
                           stats: Optional[dict] = None, max_calls: int = 10_000) -> int:
    """Factor n with a square-root oracle: a root other than +-x exposes gcd(x - y, n)."""
    calls = 0
    try:
        while calls < max_calls:
            x = rng.randrange(1, n)
            g = math.gcd(x, n)
            if g > 1:
                return g
            y = decrypt_oracle(x * x % n)
            calls += 1
            if y % n not in (x, n - x):
                return math.gcd(x - y, n)
    finally:
        if stats is not None:
            stats["oracle_calls"] = stats.get("oracle_calls", 0) + calls
    raise AlgorithmFailure("oracle never returned a useful root")


def random_root_oracle(key: RabinKeyPair, rng) -> Callable[[int], int]:
    """Decryption oracle returning a uniformly random square root."""
    return lambda c: rng.choice(rabin_sqrt(c, key.p, key.q))


# -- ElGamal and Diffie-Hellman ------------------------------------------------------------

@dataclass(frozen=True)
class ElGamalKeyPair:
    p: int          # group modulus
    n: int          # order of alpha
    alpha: int
    alpha_a: int
    a: Optional[int] = None

    @property
    def public(self) -> "ElGamalKeyPair":
        return ElGamalKeyPair(self.p, self.n, self.alpha, self.alpha_a)

    def to_json(self) -> dict:
        d = {"p": self.p, "n": self.n, "g": self.alpha, "ga": self.alpha_a}
        if self.a is not None:
            d["a"] = self.a
        return _dec(d)


def find_generator(p: int, rng=None) -> int:
    """A generator of Z_p^* (smallest one, or random when rng is given)."""
    order = p - 1
    qs = numt.prime_factors(order)
    candidates = range(2, p) if rng is None else iter(lambda: rng.randrange(2, p), None)
    for g in candidates:
        if all(pow(g, order // q, p) != 1 for q in qs):
            return g
    raise DomainError(f"no generator modulo {p}")


def elgamal_keygen(bits: int, rng, p: Optional[int] = None) -> ElGamalKeyPair:
    if p is None:
        p = numt.random_prime(bits, rng)
    alpha = find_generator(p, rng)
    n = p - 1
    a = rng.randrange(1, n)
    return ElGamalKeyPair(p, n, alpha, pow(alpha, a, p), a)


def elgamal_encrypt(pub: ElGamalKeyPair, m: int, rng, k: Optional[int] = None) -> tuple[int, int]:
    if not 1 <= m < pub.p:
        raise DomainError("message must be a unit modulo p")
    if k is None:
        k = rng.randrange(1, pub.n)
    if not 1 <= k <= pub.n - 1:
        raise DomainError("ephemeral exponent must lie in [1, n-1]")
    return pow(pub.alpha, k, pub.p), m * pow(pub.alpha_a, k, pub.p) % pub.p


def elgamal_decrypt(priv: ElGamalKeyPair, ct: tuple[int, int]) -> int:
    gamma, delta = ct
    return pow(gamma, priv.n - priv.a, priv.p) * delta % priv.p


def elgamal_break(pub: ElGamalKeyPair, ct: tuple[int, int], rng) -> int:
    """Recover a = log_alpha(alpha^a) with the quantum DLP algorithm, then decrypt."""
    group = hsp.MultiplicativeGroup(pub.p)
    a = hsp.dlog(pub.alpha, pub.alpha_a, pub.n, group, rng)
    return elgamal_decrypt(ElGamalKeyPair(pub.p, pub.n, pub.alpha, pub.alpha_a, a), ct)


@dataclass(frozen=True)
class DhParams:
    p: int
    g: int
    order: int


@dataclass(frozen=True)
class DhTranscript:
    p: int
    g: int
    order: int
    ga: int
    gb: int

    def to_json(self) -> dict:
        return _dec(self.__dict__)


def dh_params(bits: int, rng) -> DhParams:
    p = numt.random_prime(bits, rng)
    return DhParams(p, find_generator(p, rng), p - 1)


def dh_exchange(params: DhParams, rng, a: Optional[int] = None, b: Optional[int] = None):
    """Run the protocol; returns (transcript, Alice's key, Bob's key)."""
    a = rng.randrange(1, params.order) if a is None else a
    b = rng.randrange(1, params.order) if b is None else b
    ga, gb = pow(params.g, a, params.p), pow(params.g, b, params.p)
    t = DhTranscript(params.p, params.g, params.order, ga, gb)
    return t, pow(gb, a, params.p), pow(ga, b, params.p)


def dh_break(t: DhTranscript, rng) -> int:
    a = hsp.dlog(t.g, t.ga, t.order, hsp.MultiplicativeGroup(t.p), rng)
    return pow(t.gb, a, t.p)
