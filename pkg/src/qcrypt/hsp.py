"""Hidden-subgroup algorithms: Deutsch, period finding, factoring and discrete logs.

The quantum parts are simulated from the post-measurement state.  After the
oracle has been applied and its output register measured, the input register
holds an equal superposition over one coset of the hidden subgroup; the
outcome distribution of the final Fourier transform is then computed exactly
(FFT for moderate registers, an exact rejection sampler for the arithmetic
progressions that arise in huge registers).  Dense statevector versions of the
same circuits are kept for cross-checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Hashable, Optional

import numpy as np

from . import numt, qsim
from .errors import AlgorithmFailure, DomainError, NotInSubgroup

FAIL = None

# registers up to this size are tabulated and transformed with an FFT
SMALL_REGISTER = 1 << 16


# -- Deutsch ---------------------------------------------------------------------

def deutsch(f: Callable[[int], int], return_calls: bool = False):
    """Decide f(0) xor f(1) with a single application of U_f."""
    table = [f(0), f(1)]  # the truth table defines the unitary U_f
    if any(v not in (0, 1) for v in table):
        raise DomainError("Deutsch oracle must be boolean")
    h = qsim.standard_gate("H")
    s = qsim.basis_state([2, 2], [0, 1])
    s = qsim.apply_single(qsim.apply_single(s, h, 0), h, 1)
    s = qsim.apply_oracle(s, table, 0, 1)
    calls = 1
    s = qsim.apply_single(s, h, 0)
    # the first qubit is now exactly |f(0) xor f(1)>
    bit = int(round(float(qsim.marginal(s, 0)[1])))
    return (bit, calls) if return_calls else bit


# -- period finding ---------------------------------------------------------------

@dataclass
class PeriodicOracle:
    """f: Z_{>=0} -> labels with f(x) = f(y) iff x = y mod r for a hidden r."""
    f: Callable[[int], Hashable]
    period_hint: Optional[int] = None
    key: Optional[Hashable] = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __call__(self, x: int):
        return self.f(x)

    def table(self, m: int) -> list:
        return [self.f(x) for x in range(m)]


def modexp_oracle(a: int, n: int) -> PeriodicOracle:
    """x -> a^x mod n, the order-finding oracle."""
    return PeriodicOracle(lambda x: pow(a, x, n), key=("modexp", a % n, n))


@lru_cache(maxsize=256)
def _modexp_table(a: int, n: int, m: int) -> np.ndarray:
    out = np.empty(m, dtype=np.int64)
    v = 1 % n
    for x in range(m):
        out[x] = v
        v = v * a % n
    return out


_SHARED_CACHE: dict = {}


def _small_register_tables(oracle: PeriodicOracle, m: int):
    """Per register size: the oracle table and, per label, a sampling CDF."""
    cache = _SHARED_CACHE if oracle.key is not None else oracle._cache
    ckey = (oracle.key, m) if oracle.key is not None else m
    hit = cache.get(ckey)
    if hit is not None:
        return hit
    if oracle.key is not None and oracle.key[0] == "modexp":
        values = _modexp_table(oracle.key[1], oracle.key[2], m)
    else:
        raw = oracle.table(m)
        ids: dict = {}
        values = np.array([ids.setdefault(v, len(ids)) for v in raw], dtype=np.int64)
    order = np.argsort(values, kind="stable")
    sorted_vals = values[order]
    cuts = np.flatnonzero(np.diff(sorted_vals)) + 1
    groups = np.split(order, cuts)
    cdfs = {}
    for idx in groups:
        p = qsim.uniform_support(idx, m)
        cdfs[int(values[idx[0]])] = np.cumsum(p)
    if len(cache) > 512:
        cache.clear()
    cache[ckey] = (values, cdfs)
    return values, cdfs


def find_period_by_scan(oracle: PeriodicOracle, limit: int = 1 << 24) -> int:
    """Simulator bookkeeping: the period, by walking f until it repeats f(0)."""
    if oracle.period_hint:
        return oracle.period_hint
    f0 = oracle(0)
    for x in range(1, limit):
        if oracle(x) == f0:
            return x
    raise DomainError("oracle period exceeds the simulator scan limit")


def _fejer(v: int, L: int, M: int) -> float:
    if v % M == 0:
        return float(L * L)
    num = math.sin(math.pi * ((L * v) % M) / M)
    den = math.sin(math.pi * v / M)
    return (num * num) / (den * den)


def _sample_fejer(L: int, M: int, rng) -> int:
    """Draw v in the centred residues mod M with weight sin^2(pi L v/M)/sin^2(pi v/M)."""
    if M == 1:
        return 0
    H = M // 2
    even = M % 2 == 0
    C = min(M // (2 * L), H)
    center = (2 * C + 1) * L * L
    tail = 0.0
    if C < H:
        a, b = C + 0.5, H + 0.5
        tail = M * M / 4 * (1 / a - 1 / b)
    while True:
        u = rng.random() * (center + 2 * tail)
        if u < center:
            v = rng.randint(-C, C)
            w = L * L
        else:
            sign = 1 if rng.random() < 0.5 else -1
            x = 1 / (1 / a - rng.random() * (1 / a - 1 / b))
            va = min(max(math.ceil(x - 0.5), C + 1), H)
            v = sign * va
            w = M * M / (4 * (va * va - 0.25))
        if even and v == -H:
            continue
        if rng.random() * w < _fejer(v, L, M):
            return v


def sample_progression(k: int, r: int, m: int, rng) -> int:
    """Measure QFT_m of the equal superposition over {k, k+r, k+2r, ...} in [0, m)."""
    L = (m - 1 - k) // r + 1
    g = math.gcd(r, m)
    M = m // g
    v = _sample_fejer(L, M, rng)
    y0 = (v % M) * numt.mod_inverse(r // g, M) % M if M > 1 else 0
    return y0 + M * rng.randrange(g)


def progression_distribution(k: int, r: int, m: int) -> np.ndarray:
    """Closed form of the distribution sampled by :func:`sample_progression`."""
    L = (m - 1 - k) // r + 1
    y = np.arange(m)
    theta = (y * r % m) / m
    with np.errstate(invalid="ignore", divide="ignore"):
        p = np.sin(np.pi * L * theta) ** 2 / np.sin(np.pi * theta) ** 2
    p[theta == 0] = L * L
    return p / (m * L)


def ihsp_sample(oracle: PeriodicOracle, m: int, rng) -> int:
    """One run of the integer-HSP core: returns the measured y in [0, m)."""
    if m < 2:
        raise DomainError("register size must be at least 2")
    if m <= SMALL_REGISTER:
        values, cdfs = _small_register_tables(oracle, m)
        x0 = rng.randrange(m)
        cdf = cdfs[int(values[x0])]
        y = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
        return min(y, m - 1)
    r = find_period_by_scan(oracle)
    x0 = rng.randrange(m)
    return sample_progression(x0 % r, r, m, rng)


def ihsp_distribution(oracle: PeriodicOracle, m: int) -> np.ndarray:
    """Exact outcome distribution of ihsp_sample (mixture over measured labels)."""
    values, cdfs = _small_register_tables(oracle, m)
    out = np.zeros(m)
    for label, cdf in cdfs.items():
        weight = np.count_nonzero(values == label) / m
        out += weight * np.diff(np.concatenate([[0.0], cdf]))
    return out


def ihsp_distribution_dense(oracle: PeriodicOracle, m: int) -> np.ndarray:
    """The same distribution from a full two-register statevector simulation."""
    raw = oracle.table(m)
    ids: dict = {}
    labels = [ids.setdefault(v, len(ids)) for v in raw]
    out_size = 1 << max(1, (len(ids) - 1).bit_length())
    s = qsim.basis_state([m, out_size], [0, 0])
    s = qsim.qft(s, 0, "forward")
    s = qsim.apply_oracle(s, labels, 0, 1)
    s = qsim.qft(s, 0, "inverse")
    return qsim.marginal(s, 0)


def register_size(r_bound: int) -> int:
    """Smallest power of two m with m > 2 r_bound^2."""
    target = 2 * r_bound * r_bound
    return 1 << (target.bit_length())


def _denominator_bound(m: int) -> int:
    # b <= sqrt(m/2)  <=>  2 b^2 <= m
    return math.isqrt(m // 2)


def find_period_bounded(oracle: PeriodicOracle, r_bound: int, rng, m: Optional[int] = None):
    """Two samples, continued fractions and an lcm; returns a multiple of r or FAIL."""
    if m is None:
        m = register_size(r_bound)
    bound = _denominator_bound(m)
    dens = []
    for _ in range(2):
        y = ihsp_sample(oracle, m, rng)
        fr = numt.recover_fraction(y, m, max(bound, 1))
        if fr is None:
            return FAIL
        # a measured 0 gives 0/1, i.e. b = 1
        dens.append(fr.denominator)
    t = numt.lcm(dens[0], dens[1])
    if 2 * t * t > m:
        return FAIL
    if oracle(0) != oracle(t):
        return FAIL
    return t


def reduce_to_period(oracle: PeriodicOracle, t: int) -> int:
    """Strip prime factors from a known multiple t of the period while f(t/q) = f(0)."""
    if t == 1:
        return 1
    f0 = oracle(0)
    for q in numt.prime_factors(t):
        while t % q == 0 and oracle(t // q) == f0:
            t //= q
    return t


def find_period(oracle: PeriodicOracle, rng, m0: int = 4, max_bits: int = 96) -> int:
    """Unbounded period finding: three tries per register size, doubling on failure."""
    m = m0
    while m.bit_length() <= max_bits:
        for _ in range(3):
            t = find_period_bounded(oracle, 0, rng, m=m)
            if t is not FAIL:
                return reduce_to_period(oracle, t)
        m *= 2
    raise AlgorithmFailure("period finding did not converge")


def find_order(a: int, n: int, rng) -> int:
    if n < 2:
        raise DomainError("need n >= 2")
    if math.gcd(a, n) != 1:
        raise DomainError(f"{a} is not a unit modulo {n}")
    if a % n == 1:
        return 1
    oracle = modexp_oracle(a, n)
    while True:
        t = find_period_bounded(oracle, n, rng)
        if t is not FAIL:
            return reduce_to_period(oracle, t)


# -- factoring ----------------------------------------------------------------------

def integer_root(n: int, k: int) -> int:
    """floor(n^(1/k))."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def perfect_power(n: int) -> Optional[tuple[int, int]]:
    """(base, exponent) with exponent >= 2 if n is a perfect power."""
    for k in range(n.bit_length(), 1, -1):
        b = integer_root(n, k)
        if b > 1 and b ** k == n:
            return b, k
    return None


def shor_factor(n: int, rng, stats: Optional[dict] = None):
    """One run of the factoring reduction; a non-trivial factor of n, or FAIL."""
    if n < 3 or n % 2 == 0:
        raise DomainError("n must be odd and at least 3")
    a = rng.randrange(n)
    s = math.gcd(a, n)
    if s > 1:
        # a = 0 gives s = n, which is not a proper factor
        return s if s < n else FAIL
    oracle = modexp_oracle(a, n)
    outs = [find_period_bounded(oracle, n, rng) for _ in range(3)]
    outs = [t for t in outs if t is not FAIL]
    if stats is not None:
        stats["order_runs"] = stats.get("order_runs", 0) + 3
    if not outs:
        return FAIL
    r = min(outs)
    if r % 2:
        return FAIL
    t = math.gcd(pow(a, r // 2, n) - 1, n)
    # t = n happens when r is a proper multiple of the order
    if t == 1 or t == n:
        return FAIL
    return t


def full_factor(n: int, rng, max_attempts: int = 10_000) -> list[tuple[int, int]]:
    """Complete factorization, splitting odd non-prime-powers with shor_factor."""
    if n < 2:
        raise DomainError("need n >= 2")
    counts: dict[int, int] = {}
    stack = [n]
    while stack:
        x = stack.pop()
        if x == 1:
            continue
        if x % 2 == 0:
            counts[2] = counts.get(2, 0) + 1
            stack.append(x // 2)
            continue
        if numt.is_prime(x):
            counts[x] = counts.get(x, 0) + 1
            continue
        pp = perfect_power(x)
        if pp is not None:
            stack.extend([pp[0]] * pp[1])
            continue
        for _ in range(max_attempts):
            d = shor_factor(x, rng)
            if d is not FAIL:
                stack.extend([d, x // d])
                break
        else:
            raise AlgorithmFailure(f"could not split {x}")
    return sorted(counts.items())


# -- groups and discrete logarithms -------------------------------------------------

class MultiplicativeGroup:
    """Z_n^* with elements as residues."""

    def __init__(self, n: int):
        if n < 2:
            raise DomainError("need n >= 2")
        self.n = n
        self.identity = 1

    def mul(self, x, y):
        return x * y % self.n

    def pow(self, x, k):
        return numt.mod_pow(x, k, self.n)

    def inv(self, x):
        return numt.mod_inverse(x, self.n)

    def key(self, x):
        return x % self.n

    def __repr__(self):
        return f"MultiplicativeGroup({self.n})"


@dataclass
class DlogOracle:
    """f(x1, x2) = a^x1 b^x2 over Z_r x Z_r, hiding K = <(-k, 1)>."""
    a: object
    b: object
    r: int
    group: object

    def __call__(self, x1: int, x2: int):
        g = self.group
        return g.mul(g.pow(self.a, x1), g.pow(self.b, x2))


def _power_table(oracle: DlogOracle) -> dict:
    g = oracle.group
    table = {}
    cur = g.identity
    for i in range(oracle.r):
        table.setdefault(g.key(cur), i)
        cur = g.mul(cur, oracle.a)
    return table


def phsp_coset(oracle: DlogOracle, rng, table: Optional[dict] = None):
    """Measure the label register: returns the coset [(y1, y2)] of the measured value."""
    g = oracle.group
    r = oracle.r
    table = table if table is not None else _power_table(oracle)
    x1, x2 = rng.randrange(r), rng.randrange(r)
    w = oracle(x1, x2)
    b_inv = g.inv(oracle.b)
    coset = []
    for y2 in range(r):
        y1 = table.get(g.key(w))
        if y1 is None:
            raise NotInSubgroup("b is not in the subgroup generated by a")
        coset.append((y1, y2))
        w = g.mul(w, b_inv)
    return coset


def phsp_sample(oracle: DlogOracle, rng, table: Optional[dict] = None) -> tuple[int, int]:
    """One run of the prime-HSP core, returning (s, t)."""
    r = oracle.r
    coset = phsp_coset(oracle, rng, table)
    # Parseval: every row s carries total mass exactly 1/r
    s = rng.randrange(r)
    y1 = np.array([c[0] for c in coset], dtype=np.int64)
    row = np.exp(-2j * np.pi * (s * y1 % r) / r)
    p = np.abs(np.fft.fft(row)) ** 2
    cdf = np.cumsum(p)
    t = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return s, min(t, r - 1)


def phsp_distribution_dense(oracle: DlogOracle) -> np.ndarray:
    """Joint (s, t) distribution from a three-register statevector simulation."""
    r = oracle.r
    table = _power_table(oracle)
    labels = [table[oracle.group.key(oracle(x1, x2))] for x1 in range(r) for x2 in range(r)]
    out_size = 1 << max(1, (r - 1).bit_length())
    s = qsim.basis_state([r * r, out_size], [0, 0])
    # QFT_r on each input register = QFT on the (r, r) split of the joint register
    st = qsim.Statevector((r, r, out_size), s.amplitudes)
    st = qsim.qft(qsim.qft(st, 0), 1)
    joint = qsim.Statevector((r * r, out_size), st.amplitudes)
    joint = qsim.apply_oracle(joint, labels, 0, 1)
    st = qsim.Statevector((r, r, out_size), joint.amplitudes)
    st = qsim.qft(qsim.qft(st, 0, "inverse"), 1, "inverse")
    p = np.abs(st.tensor) ** 2
    return p.sum(axis=2)


def dlog_prime_order(a, b, p_order: int, group, rng, max_runs: int = 1000) -> int:
    """k with a^k = b in a group of prime order, from one PHSP sample with s != 0."""
    if group.key(b) == group.key(group.identity):
        return 0
    oracle = DlogOracle(a, b, p_order, group)
    table = _power_table(oracle)
    for _ in range(max_runs):
        s, t = phsp_sample(oracle, rng, table)
        if s % p_order:
            k = t * numt.mod_inverse(s, p_order) % p_order
            if group.key(group.pow(a, k)) != group.key(b):
                raise NotInSubgroup("sample inconsistent with b in <a>")
            return k
    raise AlgorithmFailure("no usable PHSP sample")


def dlog(a, b, n_order: int, group, rng, classical_factoring: bool = False) -> int:
    """Pohlig-Hellman over the factorization of n_order, with PHSP for each digit."""
    if n_order < 1:
        raise DomainError("group order must be positive")
    if n_order == 1:
        if group.key(b) != group.key(group.identity):
            raise NotInSubgroup("b is not in <a>")
        return 0
    factors = numt.trial_division_factor(n_order) if classical_factoring else full_factor(n_order, rng)
    residues, moduli = [], []
    for p, e in factors:
        alpha = group.pow(a, n_order // p)
        gamma = group.identity
        digits = []
        for j in range(e):
            if j > 0:
                gamma = group.mul(gamma, group.pow(a, digits[-1] * p ** (j - 1)))
            beta = group.pow(group.mul(b, group.inv(gamma)), n_order // p ** (j + 1))
            digits.append(dlog_prime_order(alpha, beta, p, group, rng))
        residues.append(sum(l * p ** j for j, l in enumerate(digits)))
        moduli.append(p ** e)
    k = numt.crt(residues, moduli)
    if group.key(group.pow(a, k)) != group.key(b):
        raise NotInSubgroup("b is not in <a>")
    return k
