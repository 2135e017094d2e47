"""NTRU over Z[x]/(x^N - 1): keys, encryption, failure analysis and the lattice attack."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from . import lattice as L
from . import numt
from .errors import AttackFailed, DomainError, NotInvertible


@dataclass(frozen=True)
class RingPoly:
    coeffs: tuple

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))
        if not self.coeffs:
            raise DomainError("ring degree must be positive")

    @classmethod
    def zero(cls, n: int) -> "RingPoly":
        return cls((0,) * n)

    @classmethod
    def one(cls, n: int) -> "RingPoly":
        return cls((1,) + (0,) * (n - 1))

    @classmethod
    def monomial(cls, n: int, i: int) -> "RingPoly":
        c = [0] * n
        c[i % n] = 1
        return cls(tuple(c))

    @property
    def N(self) -> int:
        return len(self.coeffs)

    def _check(self, other: "RingPoly"):
        if self.N != other.N:
            raise DomainError("ring degrees differ")

    def __add__(self, other: "RingPoly") -> "RingPoly":
        self._check(other)
        return RingPoly(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "RingPoly") -> "RingPoly":
        self._check(other)
        return RingPoly(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "RingPoly":
        return RingPoly(tuple(-a for a in self.coeffs))

    def __mul__(self, other) -> "RingPoly":
        if isinstance(other, int):
            return RingPoly(tuple(other * a for a in self.coeffs))
        return ring_mul(self, other)

    __rmul__ = __mul__

    def mod(self, q: int) -> "RingPoly":
        return RingPoly(tuple(a % q for a in self.coeffs))

    def rotate(self, i: int) -> "RingPoly":
        """x^i times self."""
        n = self.N
        return RingPoly(tuple(self.coeffs[(j - i) % n] for j in range(n)))

    def norm2(self) -> int:
        return sum(a * a for a in self.coeffs)

    def to_json(self) -> list:
        return list(self.coeffs)


def ring_mul(a: RingPoly, b: RingPoly) -> RingPoly:
    """Cyclic convolution."""
    a._check(b)
    n = a.N
    out = [0] * n
    for i, x in enumerate(a.coeffs):
        if x:
            for j, y in enumerate(b.coeffs):
                out[(i + j) % n] += x * y
    return RingPoly(tuple(out))


def center_mod(a, q: int):
    """Coefficients in [-q/2, q/2) (even q) or [-(q-1)/2, (q-1)/2] (odd q)."""
    if isinstance(a, int):
        r = a % q
        return r - q if r >= (q + 1) // 2 else r
    return RingPoly(tuple(center_mod(c, q) for c in a.coeffs))


def sample_L(n: int, d1: int, d2: int, rng) -> RingPoly:
    """Uniform polynomial with d1 coefficients +1 and d2 coefficients -1."""
    if d1 < 0 or d2 < 0 or d1 + d2 > n:
        raise DomainError("need d1 + d2 <= N")
    pos = rng.sample(range(n), d1 + d2)
    c = [0] * n
    for i in pos[:d1]:
        c[i] = 1
    for i in pos[d1:]:
        c[i] = -1
    return RingPoly(tuple(c))


# -- inversion -------------------------------------------------------------------


def _trim(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pdivmod(a: list, b: list, p: int) -> tuple[list, list]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    inv = pow(b[-1], -1, p)
    q = [0] * max(0, len(a) - len(b) + 1)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        f = a[-1] * inv % p
        q[shift] = f
        for i, y in enumerate(b):
            a[i + shift] = (a[i + shift] - f * y) % p
        _trim(a)
    return q, a


def _pmul(a: list, b: list, p: int) -> list:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] = (out[i + j] + x * y) % p
    return _trim(out)


def _psub(a: list, b: list, p: int) -> list:
    n = max(len(a), len(b))
    a, b = a + [0] * (n - len(a)), b + [0] * (n - len(b))
    return _trim([(x - y) % p for x, y in zip(a, b)])


def _invert_mod_prime(a: RingPoly, p: int) -> RingPoly:
    """Extended Euclid in GF(p)[x] against x^N - 1."""
    n = a.N
    modpoly = [-1 % p] + [0] * (n - 1) + [1]
    r0, r1 = modpoly, _trim([c % p for c in a.coeffs])
    s0, s1 = [], [1]  # coefficients of a
    if not r1:
        raise NotInvertible("zero is not invertible")
    while r1:
        q, r = _pdivmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, _psub(s0, _pmul(q, s1, p), p)
    if len(r0) != 1:
        raise NotInvertible(f"not invertible modulo {p}")
    inv_lead = pow(r0[0], -1, p)
    out = [0] * n
    for i, c in enumerate(s0):
        out[i % n] = (out[i % n] + c * inv_lead) % p
    return RingPoly(tuple(out))


def invert_mod(a: RingPoly, modulus: int) -> RingPoly:
    """Inverse in (Z/modulus)[x]/(x^N - 1) for a prime or prime-power modulus."""
    factors = numt.trial_division_factor(modulus)
    if len(factors) != 1:
        raise DomainError("modulus must be a prime or a prime power")
    p, e = factors[0]
    b = _invert_mod_prime(a, p)
    m = p
    while m < modulus:
        m = min(m * m, modulus)
        # Newton step b <- b (2 - a b)
        b = ring_mul(b, (RingPoly.one(a.N) * 2 - ring_mul(a, b))).mod(m)
    return b.mod(modulus)


# -- the cryptosystem ---------------------------------------------------------------------


@dataclass(frozen=True)
class NtruParams:
    N: int
    p: int
    q: int
    df: int
    dg: int
    dr: int

    def __post_init__(self):
        if math.gcd(self.p, self.q) != 1 or self.q <= self.p:
            raise DomainError("need coprime p < q")
        if max(self.df, self.dg, self.dr) > self.N // 2 or min(self.df, self.dg, self.dr) < 1:
            raise DomainError("d_f, d_g, d_r must lie in [1, N/2]")

    def to_json(self) -> dict:
        return dict(self.__dict__)


PRESETS = {
    "toy7": NtruParams(7, 3, 64, 2, 2, 2),
    "toy11": NtruParams(11, 3, 64, 3, 3, 3),
}


@dataclass(frozen=True)
class NtruKey:
    params: NtruParams
    h: RingPoly
    f: Optional[RingPoly] = None
    fp: Optional[RingPoly] = None   # F^-1 mod p
    g: Optional[RingPoly] = None

    def public(self) -> "NtruKey":
        return NtruKey(self.params, self.h)

    def to_json(self) -> dict:
        d = {"params": self.params.to_json(), "h": self.h.to_json()}
        if self.f is not None:
            d.update(f=self.f.to_json(), fp=self.fp.to_json(), g=self.g.to_json())
        return d

    @classmethod
    def from_json(cls, d: dict) -> "NtruKey":
        params = NtruParams(**{k: int(v) for k, v in d["params"].items()})
        h = RingPoly(tuple(d["h"]))
        if "f" not in d:
            return cls(params, h)
        return cls(params, h, RingPoly(tuple(d["f"])), RingPoly(tuple(d["fp"])), RingPoly(tuple(d["g"])))


def ntru_keygen(params: NtruParams, rng, max_tries: int = 1000) -> NtruKey:
    for _ in range(max_tries):
        f = sample_L(params.N, params.df, params.df - 1, rng)
        g = sample_L(params.N, params.dg, params.dg, rng)
        try:
            fp = invert_mod(f, params.p)
            fq = invert_mod(f, params.q)
        except NotInvertible:
            continue
        h = ring_mul(fq, g).mod(params.q)
        return NtruKey(params, h, f, fp, g)
    raise DomainError("no invertible F found")


def random_message(params: NtruParams, rng) -> RingPoly:
    half = (params.p - 1) // 2
    return RingPoly(tuple(rng.randint(-half, half) for _ in range(params.N)))


def ntru_encrypt(key: NtruKey, m: RingPoly, rng, r: Optional[RingPoly] = None) -> RingPoly:
    params = key.params
    half = (params.p - 1) // 2
    if m.N != params.N or any(abs(c) > half for c in m.coeffs):
        raise DomainError("message coefficients must lie in [-(p-1)/2, (p-1)/2]")
    if r is None:
        r = sample_L(params.N, params.dr, params.dr, rng)
    return (params.p * ring_mul(r, key.h) + m).mod(params.q)


def ntru_decrypt_with(f: RingPoly, fp: RingPoly, params: NtruParams, c: RingPoly) -> RingPoly:
    a = center_mod(ring_mul(f, c), params.q)
    return center_mod(ring_mul(fp, a), params.p)


def ntru_decrypt(key: NtruKey, c: RingPoly) -> RingPoly:
    if key.f is None:
        raise DomainError("private key missing")
    return ntru_decrypt_with(key.f, key.fp, key.params, c)


# -- failure analysis ------------------------------------------------------------------------


def unreduced(f: RingPoly, g: RingPoly, r: RingPoly, m: RingPoly, p: int) -> RingPoly:
    """B = p R G + F M over the integers."""
    return p * ring_mul(r, g) + ring_mul(f, m)


def classify_failure(f, g, r, m, params: NtruParams) -> str:
    """'gap' when the spread of B exceeds q, 'wrap' when B leaves the centring
    interval used by decryption, otherwise 'none'."""
    b = unreduced(f, g, r, m, params.p).coeffs
    if max(b) - min(b) > params.q:
        return "gap"
    if any(center_mod(x, params.q) != x for x in b):
        return "wrap"
    return "none"


@dataclass(frozen=True)
class FailureReport:
    trials: int
    wrap: int     # B outside the centring interval (includes every gap failure)
    gap: int      # spread of B above q

    @property
    def wrap_rate(self) -> float:
        return self.wrap / self.trials

    @property
    def gap_rate(self) -> float:
        return self.gap / self.trials

    def interval(self, count: int, z: float = 1.96) -> tuple[float, float]:
        """Wilson score interval for count / trials."""
        n, ph = self.trials, count / self.trials
        denom = 1 + z * z / n
        centre = (ph + z * z / (2 * n)) / denom
        half = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / denom
        return max(0.0, centre - half), min(1.0, centre + half)

    def to_json(self) -> dict:
        return {"trials": self.trials, "wrap_rate": self.wrap_rate, "gap_rate": self.gap_rate,
                "wrap_ci95": list(self.interval(self.wrap)), "gap_ci95": list(self.interval(self.gap))}


def failure_rates(params: NtruParams, trials: int, rng, keys_every: int = 100) -> FailureReport:
    if trials < 1:
        raise DomainError("need at least one trial")
    wrap = gap = 0
    key = None
    for i in range(trials):
        if i % keys_every == 0:
            key = ntru_keygen(params, rng)
        m = random_message(params, rng)
        r = sample_L(params.N, params.dr, params.dr, rng)
        kind = classify_failure(key.f, key.g, r, m, params)
        wrap += kind != "none"
        gap += kind == "gap"
    return FailureReport(trials, wrap, gap)


# -- lattice attack -----------------------------------------------------------------------------


def circulant(h: RingPoly) -> list[tuple]:
    """Row i holds the coefficients of x^i H."""
    return [h.rotate(i).coeffs for i in range(h.N)]


def build_attack_basis(h: RingPoly, q: int, alpha_num: int, alpha_den: int = 1) -> L.IntBasis:
    """Rows [[alpha I, circ(H)], [0, q I]] scaled by alpha_den to stay integral."""
    if alpha_num <= 0 or alpha_den <= 0:
        raise DomainError("alpha must be positive")
    n = h.N
    rows = []
    for i, hrow in enumerate(circulant(h)):
        rows.append(tuple(alpha_num * (i == j) for j in range(n)) + tuple(alpha_den * x for x in hrow))
    for i in range(n):
        rows.append((0,) * n + tuple(alpha_den * q * (i == j) for j in range(n)))
    return L.IntBasis(tuple(rows))


def optimal_alpha(norm_f2, norm_g2, max_den: int = 1000) -> Fraction:
    """|G| / |F|, exact when rational and otherwise the best approximation with
    denominator <= max_den."""
    if norm_f2 <= 0 or norm_g2 <= 0:
        raise DomainError("norms must be positive")
    ratio = Fraction(norm_g2) / Fraction(norm_f2)
    num, den = math.isqrt(ratio.numerator), math.isqrt(ratio.denominator)
    if num * num == ratio.numerator and den * den == ratio.denominator:
        return Fraction(num, den)
    return Fraction(math.sqrt(ratio)).limit_denominator(max_den)


def randomness_constant(params: NtruParams, norm_f: float, norm_g: float) -> float:
    return math.sqrt(params.N * params.q / (2 * math.pi * math.e * norm_f * norm_g))


def shortest_vector_estimate(params: NtruParams, alpha) -> float:
    """sqrt(N alpha q / (pi e)), the high end of the Gaussian heuristic for this lattice."""
    return math.sqrt(params.N * float(alpha) * params.q / (math.pi * math.e))


def _shape_ok(f: RingPoly, params: NtruParams) -> bool:
    c = f.coeffs
    if any(x not in (-1, 0, 1) for x in c):
        return False
    ones, minus = c.count(1), c.count(-1)
    return (ones, minus) in {(params.df, params.df - 1), (params.df - 1, params.df)}


@dataclass(frozen=True)
class AttackResult:
    f: RingPoly
    fp: RingPoly
    row: tuple


def ntru_lattice_attack(key: NtruKey, rng, probes: int = 50) -> AttackResult:
    """LLL on the attack lattice, then a search of the reduced rows for (alpha F' || G')."""
    params = key.params
    if params.N > 12:
        raise DomainError("lattice attack limited to N <= 12")
    alpha = optimal_alpha(2 * params.df - 1, 2 * params.dg)
    basis = build_attack_basis(key.h, params.q, alpha.numerator, alpha.denominator)
    reduced = L.lll_reduce(basis)
    n = params.N
    for row in sorted(reduced.rows, key=L.norm2):
        left = row[:n]
        if any(x % alpha.numerator for x in left):
            continue
        f = RingPoly(tuple(x // alpha.numerator for x in left))
        if not _shape_ok(f, params):
            continue
        try:
            fp = invert_mod(f, params.p)
        except NotInvertible:
            continue
        if all(ntru_decrypt_with(f, fp, params, ntru_encrypt(key, m, rng)) == m
               for m in (random_message(params, rng) for _ in range(probes))):
            return AttackResult(f, fp, tuple(row))
    raise AttackFailed("no reduced row has the shape of a private key")


def rotation_class(f: RingPoly) -> set:
    return {s * f.rotate(i) for i in range(f.N) for s in (1, -1)}
