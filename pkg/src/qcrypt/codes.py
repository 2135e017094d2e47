"""Binary linear codes, toy Goppa codes, McEliece and information-set decoding.

Bit vectors are Python ints with component j stored in bit j.  A BitMatrix
stores one such int per row.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import grover
from .errors import AttackBudgetExceeded, BoundError, DecodeError, DomainError, NotInvertible

# -- vectors -----------------------------------------------------------------


def _as_bits(x) -> tuple[int, Optional[int]]:
    """(int, length) from an int, a '0101' string or a 0/1 sequence."""
    if isinstance(x, int):
        return x, None
    if isinstance(x, str):
        x = [int(ch) for ch in x]
    v = 0
    for j, b in enumerate(x):
        if b not in (0, 1):
            raise DomainError("components must be 0 or 1")
        v |= b << j
    return v, len(x)


def hamming_weight(v) -> int:
    return _as_bits(v)[0].bit_count()


def distance(x, y) -> int:
    a, la = _as_bits(x)
    b, lb = _as_bits(y)
    if la is not None and lb is not None and la != lb:
        raise DomainError("vectors have different lengths")
    return (a ^ b).bit_count()


def to_list(v: int, n: int) -> list[int]:
    return [(v >> j) & 1 for j in range(n)]


def from_list(bits: Sequence[int]) -> int:
    return _as_bits(list(bits))[0]


def random_weight_vector(n: int, w: int, rng) -> int:
    v = 0
    for j in rng.sample(range(n), w):
        v |= 1 << j
    return v


def _gather(v: int, positions: Sequence[int]) -> int:
    out = 0
    for i, p in enumerate(positions):
        out |= ((v >> p) & 1) << i
    return out


# -- matrices ----------------------------------------------------------------


@dataclass(frozen=True)
class BitMatrix:
    rows: int
    cols: int
    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(r) for r in self.bits))
        if len(self.bits) != self.rows:
            raise DomainError("row count does not match storage")
        if any(r < 0 or r >> self.cols for r in self.bits):
            raise DomainError("row wider than the column count")

    @classmethod
    def from_lists(cls, rows: Sequence[Sequence[int]]) -> "BitMatrix":
        cols = len(rows[0]) if rows else 0
        if any(len(r) != cols for r in rows):
            raise DomainError("ragged rows")
        return cls(len(rows), cols, tuple(from_list(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "BitMatrix":
        return cls(n, n, tuple(1 << i for i in range(n)))

    @classmethod
    def permutation(cls, perm: Sequence[int]) -> "BitMatrix":
        """Matrix P with (vP)[perm[i]] = v[i]."""
        if sorted(perm) != list(range(len(perm))):
            raise DomainError("not a permutation")
        return cls(len(perm), len(perm), tuple(1 << p for p in perm))

    def to_lists(self) -> list[list[int]]:
        return [to_list(r, self.cols) for r in self.bits]

    def entry(self, i: int, j: int) -> int:
        return (self.bits[i] >> j) & 1

    def vec_mul(self, v: int) -> int:
        """Row vector times matrix."""
        if v >> self.rows:
            raise DomainError("vector longer than the row count")
        out = 0
        i = 0
        while v:
            if v & 1:
                out ^= self.bits[i]
            v >>= 1
            i += 1
        return out

    def __matmul__(self, other: "BitMatrix") -> "BitMatrix":
        if self.cols != other.rows:
            raise DomainError("inner dimensions differ")
        return BitMatrix(self.rows, other.cols, tuple(other.vec_mul(r) for r in self.bits))

    def transpose(self) -> "BitMatrix":
        return BitMatrix(self.cols, self.rows,
                         tuple(_gather_column(self.bits, j) for j in range(self.cols)))

    def columns(self, positions: Sequence[int]) -> "BitMatrix":
        return BitMatrix(self.rows, len(positions), tuple(_gather(r, positions) for r in self.bits))

    def rank(self) -> int:
        return len(_rref(list(self.bits), self.cols)[1])

    def inverse(self) -> "BitMatrix":
        if self.rows != self.cols:
            raise NotInvertible("matrix is not square")
        n = self.rows
        aug = [r | (1 << (n + i)) for i, r in enumerate(self.bits)]
        red, pivots = _rref(aug, n)
        if len(pivots) < n:
            raise NotInvertible("matrix is singular")
        return BitMatrix(n, n, tuple(r >> n for r in red[:n]))

    def to_json(self) -> dict:
        return {"rows": self.rows, "cols": self.cols, "bits": [format(r, "x") for r in self.bits]}

    @classmethod
    def from_json(cls, d: dict) -> "BitMatrix":
        return cls(int(d["rows"]), int(d["cols"]), tuple(int(h, 16) for h in d["bits"]))


def _gather_column(rows: Sequence[int], j: int) -> int:
    out = 0
    for i, r in enumerate(rows):
        out |= ((r >> j) & 1) << i
    return out


def _rref(rows: list[int], ncols: int) -> tuple[list[int], list[int]]:
    """Reduced row echelon form over GF(2), pivoting only on the low ncols bits."""
    rows = list(rows)
    pivots = []
    r = 0
    for c in range(ncols):
        bit = 1 << c
        p = next((i for i in range(r, len(rows)) if rows[i] & bit), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i] & bit:
                rows[i] ^= rows[r]
        pivots.append(c)
        r += 1
    return rows, pivots


def kernel(m: BitMatrix) -> list[int]:
    """Basis of {v : M v^T = 0}, as n-bit ints."""
    red, pivots = _rref(list(m.bits), m.cols)
    free = [c for c in range(m.cols) if c not in pivots]
    basis = []
    for f in free:
        v = 1 << f
        for row, p in zip(red, pivots):
            if (row >> f) & 1:
                v |= 1 << p
        basis.append(v)
    return basis


def solve_left(m: BitMatrix, v: int) -> Optional[int]:
    """Some x with x M = v, or None when v is not in the row space."""
    # equations: for each column j, sum_i x_i M[i][j] = v_j
    eqs = [_gather_column(m.bits, j) | (((v >> j) & 1) << m.rows) for j in range(m.cols)]
    red, pivots = _rref(eqs, m.rows)
    for row in red[len(pivots):]:
        if row:
            return None
    x = 0
    for row, p in zip(red, pivots):
        if (row >> m.rows) & 1:
            x |= 1 << p
    return x


# -- GF(2^l) and Goppa codes --------------------------------------------------

# fixed reduction polynomials, bit i = coefficient of x^i
REDUCTION_POLYS = {
    1: 0b11, 2: 0b111, 3: 0b1011, 4: 0b10011, 5: 0b100101,
    6: 0b1000011, 7: 0b10000011, 8: 0b100011011,
}


@dataclass(frozen=True)
class GF2m:
    m: int
    poly: int = 0

    def __post_init__(self):
        if self.m not in REDUCTION_POLYS:
            raise DomainError("extension degree must lie in 1..8")
        if not self.poly:
            object.__setattr__(self, "poly", REDUCTION_POLYS[self.m])
        if self.poly.bit_length() != self.m + 1:
            raise DomainError("reduction polynomial has the wrong degree")

    @property
    def size(self) -> int:
        return 1 << self.m

    def elements(self) -> range:
        return range(self.size)

    def add(self, a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        out = 0
        while b:
            if b & 1:
                out ^= a
            b >>= 1
            a <<= 1
            if a >> self.m:
                a ^= self.poly
        return out

    def pow(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, a)
            a = self.mul(a, a)
            e >>= 1
        return out

    def inv(self, a: int) -> int:
        if a == 0:
            raise NotInvertible("zero has no inverse")
        return self.pow(a, self.size - 2)

    def poly_eval(self, coeffs: Sequence[int], x: int) -> int:
        """Horner evaluation; coeffs run from x^0 upward."""
        out = 0
        for c in reversed(coeffs):
            out = self.mul(out, x) ^ c
        return out


def inverse_linear_mod(field: GF2m, g: Sequence[int], alpha: int) -> list[int]:
    """Coefficients of (x - alpha)^-1 mod g(x).

    (g(x) - g(alpha)) / (x - alpha) times g(alpha)^-1 is the inverse, because
    the product with (x - alpha) is 1 modulo g.
    """
    s = len(g) - 1
    ga = field.poly_eval(g, alpha)
    if ga == 0:
        raise DomainError(f"g vanishes at {alpha}")
    scale = field.inv(ga)
    # synthetic division of g by (x - alpha)
    q = [0] * s
    acc = 0
    for j in range(s, 0, -1):
        acc = field.mul(acc, alpha) ^ g[j]
        q[j - 1] = acc
    return [field.mul(c, scale) for c in q]


@dataclass
class LinearCode:
    generator: BitMatrix
    t: int
    distance: Optional[int] = None
    parity: BitMatrix = field(init=False)
    table: dict = field(init=False, repr=False)

    def __post_init__(self):
        g = self.generator
        if g.rank() != g.rows:
            raise DomainError("generator must have full row rank")
        h = kernel(g)
        self.parity = BitMatrix(len(h), g.cols, tuple(h))
        if math.comb(g.cols, self.t) > 1 << 20:
            raise BoundError("syndrome table too large")
        self.table = {}
        for w in range(self.t + 1):
            for pos in itertools.combinations(range(g.cols), w):
                e = sum(1 << p for p in pos)
                s = self.syndrome(e)
                if s in self.table:
                    raise DomainError("code cannot correct t errors")
                self.table[s] = e

    @property
    def n(self) -> int:
        return self.generator.cols

    @property
    def k(self) -> int:
        return self.generator.rows

    def syndrome(self, v: int) -> int:
        return sum((((r & v).bit_count() & 1) << i) for i, r in enumerate(self.parity.bits))

    def encode(self, m: int) -> int:
        return self.generator.vec_mul(m)

    def decode_codeword(self, v: int) -> int:
        e = self.table.get(self.syndrome(v))
        if e is None:
            raise DecodeError("more errors than the code corrects")
        return v ^ e

    def decode(self, v: int) -> int:
        m = solve_left(self.generator, self.decode_codeword(v))
        assert m is not None
        return m

    def codewords(self):
        if self.k > 20:
            raise BoundError("too many codewords to enumerate")
        for m in range(1 << self.k):
            yield self.encode(m)

    def to_json(self) -> dict:
        return {"generator": self.generator.to_json(), "t": self.t}

    @classmethod
    def from_json(cls, d: dict) -> "LinearCode":
        return cls(BitMatrix.from_json(d["generator"]), int(d["t"]))


def minimum_distance(generator: BitMatrix) -> int:
    """Smallest nonzero codeword weight, by enumeration."""
    if generator.rows > 20:
        raise BoundError("too many codewords to enumerate")
    return min(generator.vec_mul(m).bit_count() for m in range(1, 1 << generator.rows))


def code_from_generator(generator: BitMatrix, t: Optional[int] = None) -> LinearCode:
    d = minimum_distance(generator) if generator.rows <= 16 else None
    if t is None:
        if d is None:
            raise DomainError("t must be given when the distance cannot be enumerated")
        t = (d - 1) // 2
    elif d is not None and d <= 2 * t:
        raise DomainError(f"distance {d} does not support t = {t}")
    return LinearCode(generator, t, d)


def hamming74() -> LinearCode:
    g = BitMatrix.from_lists([
        [1, 0, 0, 0, 1, 1, 0],
        [0, 1, 0, 0, 1, 0, 1],
        [0, 0, 1, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ])
    return code_from_generator(g)


def goppa_parity(field: GF2m, g: Sequence[int], alphas: Sequence[int]) -> BitMatrix:
    """l*s binary rows expressing sum c_i (x - alpha_i)^-1 = 0 mod g coefficientwise."""
    s = len(g) - 1
    invs = [inverse_linear_mod(field, g, a) for a in alphas]
    rows = []
    for i in range(s):
        for b in range(field.m):
            rows.append(sum((((inv[i] >> b) & 1) << j) for j, inv in enumerate(invs)))
    return BitMatrix(len(rows), len(alphas), tuple(rows))


def goppa_code(l: int, s: int, g_poly: Sequence[int], alphas: Sequence[int]) -> LinearCode:
    """Binary Goppa code for g_poly (coefficients from x^0) over GF(2^l)."""
    field = GF2m(l)
    g = list(g_poly)
    if len(g) != s + 1 or g[-1] == 0:
        raise DomainError("g must have degree s")
    if len(set(alphas)) != len(alphas) or any(not 0 <= a < field.size for a in alphas):
        raise DomainError("alphas must be distinct field elements")
    for a in alphas:
        if field.poly_eval(g, a) == 0:
            raise DomainError(f"g vanishes at {a}")
    basis = kernel(goppa_parity(field, g, alphas))
    if not basis:
        raise DomainError("code is trivial")
    gen = BitMatrix(len(basis), len(alphas), tuple(basis))
    if gen.rows <= 16:
        return code_from_generator(gen)
    return code_from_generator(gen, s // 2)


def random_goppa(l: int, s: int, seed: int) -> tuple[LinearCode, list[int], list[int]]:
    """A Goppa code for a random monic degree-s g, using every non-root as an alpha."""
    rng = random.Random(seed)
    field = GF2m(l)
    for _ in range(10_000):
        g = [rng.randrange(field.size) for _ in range(s)] + [1]
        alphas = [a for a in field.elements() if field.poly_eval(g, a) != 0]
        if len(alphas) > l * s:
            try:
                return goppa_code(l, s, g, alphas), g, alphas
            except DomainError:
                continue
    raise DomainError(f"no usable Goppa code for l={l}, s={s}")


def parse_code(spec: str) -> LinearCode:
    """'hamming74' or 'goppa:l,s,seed'."""
    if spec == "hamming74":
        return hamming74()
    if spec.startswith("goppa:"):
        l, s, seed = (int(x) for x in spec[6:].split(","))
        return random_goppa(l, s, seed)[0]
    raise DomainError(f"unknown code {spec!r}")


# -- McEliece ----------------------------------------------------------------


@dataclass(frozen=True)
class McElieceKey:
    public: BitMatrix
    t: int
    scrambler: Optional[BitMatrix] = None
    perm: Optional[BitMatrix] = None
    code: Optional[LinearCode] = None

    def public_json(self) -> dict:
        return {"G": self.public.to_json(), "t": self.t}

    def to_json(self) -> dict:
        d = self.public_json()
        if self.code is not None:
            d.update(S=self.scrambler.to_json(), P=self.perm.to_json(), code=self.code.to_json())
        return d

    @classmethod
    def from_json(cls, d: dict) -> "McElieceKey":
        pub = BitMatrix.from_json(d["G"])
        if "code" not in d:
            return cls(pub, int(d["t"]))
        return cls(pub, int(d["t"]), BitMatrix.from_json(d["S"]), BitMatrix.from_json(d["P"]),
                   LinearCode.from_json(d["code"]))


def random_invertible(k: int, rng) -> BitMatrix:
    while True:
        s = BitMatrix(k, k, tuple(rng.getrandbits(k) for _ in range(k)))
        if s.rank() == k:
            return s


def mceliece_keygen(code: LinearCode, rng, scrambler: Optional[BitMatrix] = None,
                    perm: Optional[BitMatrix] = None) -> McElieceKey:
    s = scrambler if scrambler is not None else random_invertible(code.k, rng)
    if perm is None:
        order = list(range(code.n))
        rng.shuffle(order)
        perm = BitMatrix.permutation(order)
    return McElieceKey(s @ code.generator @ perm, code.t, s, perm, code)


def mceliece_encrypt(public: BitMatrix, m: int, t: int, rng, error: Optional[int] = None) -> int:
    if m < 0 or m >> public.rows:
        raise DomainError("message must have k bits")
    e = random_weight_vector(public.cols, t, rng) if error is None else error
    return public.vec_mul(m) ^ e


def mceliece_decrypt(key: McElieceKey, c: int) -> int:
    if key.code is None:
        raise DomainError("private key missing")
    unpermuted = key.perm.transpose().vec_mul(c)  # P^-1 = P^T
    ms = key.code.decode(unpermuted)
    return key.scrambler.inverse().vec_mul(ms)


# -- information-set decoding -----------------------------------------------------


def attack_success_test(c: int, m_candidate: int, public: BitMatrix, t: int) -> bool:
    return (c ^ public.vec_mul(m_candidate)).bit_count() <= t


def _subset_message(public: BitMatrix, c: int, subset: Sequence[int]) -> Optional[int]:
    try:
        inv = public.columns(subset).inverse()
    except NotInvertible:
        return None
    return inv.vec_mul(_gather(c, subset))


def isd_attack(public: BitMatrix, c: int, t: int, rng, mode: str = "classical",
               stats: Optional[dict] = None, max_iterations: int = 100_000) -> int:
    """Recover m from c = m G + e by guessing k error-free positions.

    The search predicate f(A) is 1 when the columns A are invertible and the
    recovered candidate passes the success test, so a singular draw still costs
    one evaluation.  ``stats`` collects ``predicate_evaluations`` (oracle calls
    in grover mode), ``singular`` (subsets whose columns are not invertible,
    skipped) and ``subsets`` (subsets drawn, classical mode).
    """
    n, k = public.cols, public.rows
    stats = {} if stats is None else stats
    for key in ("predicate_evaluations", "singular", "subsets"):
        stats.setdefault(key, 0)
    if mode == "classical":
        for _ in range(max_iterations):
            subset = sorted(rng.sample(range(n), k))
            stats["subsets"] += 1
            stats["predicate_evaluations"] += 1
            m = _subset_message(public, c, subset)
            if m is None:
                stats["singular"] += 1
                continue
            if attack_success_test(c, m, public, t):
                return m
        raise AttackBudgetExceeded(f"no information set found in {max_iterations} draws")
    if mode != "grover":
        raise DomainError(f"unknown mode {mode!r}")

    subsets = list(itertools.combinations(range(n), k)) if math.comb(n, k) <= 1 << 16 else None
    if subsets is None:
        raise BoundError("subset space too large to simulate")
    messages = [_subset_message(public, c, s) for s in subsets]
    stats["singular"] += sum(m is None for m in messages)
    # the attacker can count invertible subsets from the public key alone and
    # expects a C(n-t,k)/C(n,k) share of them to avoid every error position
    invertible = len(subsets) - stats["singular"]
    hint = max(1, round(invertible * math.comb(n - t, k) / math.comb(n, k)))

    def predicate(i: int) -> bool:
        m = messages[i]
        return m is not None and attack_success_test(c, m, public, t)

    problem = grover.SearchProblem(len(subsets), predicate, hint)
    calls: dict = {}
    found = grover.grover_search(problem, rng, calls, max_attempts=max_iterations)
    stats["predicate_evaluations"] += calls.get("oracle_calls", 0)
    if found is None:
        raise AttackBudgetExceeded("Grover search exhausted its attempts")
    return messages[found]


def subset_success_probability(n: int, k: int, t: int) -> float:
    """Chance that a uniform k-subset avoids t fixed positions."""
    return math.comb(n - t, k) / math.comb(n, k)
