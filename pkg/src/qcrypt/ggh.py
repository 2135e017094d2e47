"""GGH encryption over integer lattices and four ciphertext-only attacks."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from . import lattice as L
from . import numt
from .errors import AttackFailed, DomainError


@dataclass(frozen=True)
class GghKeyPair:
    public: L.IntBasis
    sigma: int
    private: Optional[L.IntBasis] = None
    transform: Optional[tuple] = None  # U with public = U private

    @property
    def dim(self) -> int:
        return self.public.d

    def public_key(self) -> "GghKeyPair":
        return GghKeyPair(self.public, self.sigma)

    def to_json(self) -> dict:
        d = {"B": self.public.to_json(), "sigma": self.sigma}
        if self.private is not None:
            d["R"] = self.private.to_json()
            d["U"] = [[str(a) for a in r] for r in self.transform]
        return d

    @classmethod
    def from_json(cls, d: dict) -> "GghKeyPair":
        pub = L.IntBasis.from_json(d["B"])
        if "R" not in d:
            return cls(pub, int(d["sigma"]))
        return cls(pub, int(d["sigma"]), L.IntBasis.from_json(d["R"]),
                   tuple(tuple(int(a) for a in r) for r in d["U"]))


@dataclass(frozen=True)
class DecryptFailure:
    reason: str

    def __bool__(self) -> bool:
        return False


def default_diagonal(dim: int, sigma: int) -> int:
    """k in R = k I + noise; 10 at dim 4 with sigma 1."""
    return sigma * max(10, 4 * math.ceil(math.sqrt(dim)))


def rounding_radius(private) -> Fraction:
    """Largest column L1 norm of R^-1; sigma times this below 1/2 makes rounding exact."""
    rows = L._rows(private)
    d = len(rows)
    inv = [L.solve_rational(rows, [int(i == j) for j in range(d)]) for i in range(d)]
    return max(sum(abs(inv[i][j]) for i in range(d)) for j in range(d))


def random_unimodular(dim: int, rng, ops: Optional[int] = None, coeff: int = 3) -> tuple:
    """Product of random elementary row operations row_i += c row_j."""
    u = [[int(i == j) for j in range(dim)] for i in range(dim)]
    for _ in range(2 * dim * dim if ops is None else ops):
        i, j = rng.sample(range(dim), 2)
        c = rng.choice([v for v in range(-coeff, coeff + 1) if v])
        u[i] = [a + c * b for a, b in zip(u[i], u[j])]
    return tuple(tuple(r) for r in u)


def ggh_keygen(dim: int, rng, sigma: int = 1, k: Optional[int] = None,
               scramble: bool = True, max_tries: int = 1000,
               exact_decryption: bool = True) -> GghKeyPair:
    """Keys with R = k I + noise in [-4, 4] and B = U R for a random unimodular U.

    With ``exact_decryption`` the private basis is redrawn until
    sigma * rounding_radius(R) < 1/2, so every ciphertext decrypts.
    """
    if dim < 2:
        raise DomainError("dimension must be at least 2")
    if sigma < 1:
        raise DomainError("sigma must be positive")
    k = default_diagonal(dim, sigma) if k is None else k
    for _ in range(max_tries):
        r = tuple(tuple(k * (i == j) + rng.randint(-4, 4) for j in range(dim)) for i in range(dim))
        if L.determinant(r) == 0:
            continue
        if exact_decryption and sigma * rounding_radius(r) >= Fraction(1, 2):
            continue
        if not scramble:
            ident = tuple(tuple(int(i == j) for j in range(dim)) for i in range(dim))
            return GghKeyPair(L.IntBasis(r), sigma, L.IntBasis(r), ident)
        u = random_unimodular(dim, rng)
        b = tuple(L.combine(row, r) for row in u)
        if L.orthogonality_defect(r) < L.orthogonality_defect(b):
            return GghKeyPair(L.IntBasis(b), sigma, L.IntBasis(r), u)
    raise DomainError("could not draw a key with the defect ordering")


def random_error(dim: int, sigma: int, rng) -> tuple:
    return tuple(sigma if rng.random() < 0.5 else -sigma for _ in range(dim))


def ggh_encrypt(public, sigma: int, m: Sequence[int], rng, error: Optional[Sequence[int]] = None) -> tuple:
    rows = L._rows(public)
    if len(m) != len(rows):
        raise DomainError("message length must equal the dimension")
    e = random_error(len(rows[0]), sigma, rng) if error is None else tuple(error)
    return L.add(L.combine(m, rows), e)


def _check_error(public, sigma, m, c) -> bool:
    e = L.sub(c, L.combine(m, L._rows(public)))
    return all(abs(x) == sigma for x in e)


def ggh_decrypt(key: GghKeyPair, c: Sequence[int], allow_zero_error: bool = False):
    """m, or a DecryptFailure when the recovered error is not in {+-sigma}^n."""
    if key.private is None:
        raise DomainError("private basis missing")
    v = L.babai_round(key.private, c)
    m = L.solve_integer(key.public, v)
    if m is None:
        return DecryptFailure("rounded vector is not in the public lattice")
    if allow_zero_error and tuple(c) == v:
        return m
    if not _check_error(key.public, key.sigma, m, c):
        return DecryptFailure("recovered error has an entry other than +-sigma")
    return m


# -- attacks --------------------------------------------------------------------


def attack_round(public, c: Sequence[int]) -> tuple:
    reduced = L.lll_reduce(public)
    return L.solve_integer(public, L.babai_round(reduced, c))


def attack_nearest_plane(public, c: Sequence[int]) -> tuple:
    reduced = L.lll_reduce(public)
    return L.solve_integer(public, L.babai_nearest_plane(reduced, c))


def _embedding_search(public, target, accept: Callable[[tuple], bool]) -> Optional[tuple]:
    """Error vector e with target - e in the lattice, from short rows of the embedding."""
    reduced = L.lll_reduce(L.embed_cvp(public, target))
    for row in sorted(reduced.rows, key=L.norm2):
        if abs(row[-1]) != 1:
            continue
        e = tuple(row[:-1]) if row[-1] == 1 else tuple(-x for x in row[:-1])
        if accept(e):
            return e
    return None


def attack_embed(public, c: Sequence[int], sigma: Optional[int] = None) -> tuple:
    """Recover m via the short vector (e || 1) of the embedded lattice."""
    def accept(e):
        size = {abs(x) for x in e}
        return len(size) == 1 and (sigma is None or size == {sigma})

    e = _embedding_search(public, c, accept)
    if e is None:
        raise AttackFailed("no reduced row has the shape (+-sigma, ..., +-1)")
    m = L.solve_integer(public, L.sub(c, e))
    if m is None:
        raise AttackFailed("embedded error does not lead to a lattice point")
    return m


# modular linear algebra for the 2 sigma reduction

def _solve_mod_prime(rows, y, p) -> tuple[Optional[list], list[list]]:
    """Particular solution and kernel basis of x B = y over GF(p)."""
    d, n = len(rows), len(rows[0])
    eqs = [[rows[i][j] % p for i in range(d)] + [y[j] % p] for j in range(n)]
    pivots, r = [], 0
    for col in range(d):
        piv = next((i for i in range(r, n) if eqs[i][col]), None)
        if piv is None:
            continue
        eqs[r], eqs[piv] = eqs[piv], eqs[r]
        inv = pow(eqs[r][col], -1, p)
        eqs[r] = [a * inv % p for a in eqs[r]]
        for i in range(n):
            if i != r and eqs[i][col]:
                f = eqs[i][col]
                eqs[i] = [(a - f * b) % p for a, b in zip(eqs[i], eqs[r])]
        pivots.append(col)
        r += 1
    if any(eqs[i][d] for i in range(r, n)):
        return None, []
    x = [0] * d
    for i, col in enumerate(pivots):
        x[col] = eqs[i][d]
    kernel = []
    for free in (c for c in range(d) if c not in pivots):
        v = [0] * d
        v[free] = 1
        for i, col in enumerate(pivots):
            v[col] = -eqs[i][free] % p
        kernel.append(v)
    return x, kernel


def _span_mod(x, kernel, p, cap):
    if p ** len(kernel) > cap:
        raise AttackFailed(f"more than {cap} solutions modulo {p}")
    out = []
    for coeffs in itertools.product(range(p), repeat=len(kernel)):
        out.append([(a + sum(c * k[i] for c, k in zip(coeffs, kernel))) % p for i, a in enumerate(x)])
    return out


def solve_mod(public, y: Sequence[int], modulus: int, cap: int = 64) -> list[tuple]:
    """Every x in (Z/modulus)^d with x B = y (mod modulus), at most ``cap`` of them."""
    rows = L._rows(public)
    per_prime = []
    for p, e in numt.trial_division_factor(modulus):
        x0, ker = _solve_mod_prime(rows, y, p)
        if x0 is None:
            return []
        sols = _span_mod(x0, ker, p, cap)
        pk = p
        for _ in range(e - 1):
            lifted = []
            for s in sols:
                resid = L.sub(y, L.combine(s, rows))
                if any(r % pk for r in resid):
                    continue
                x1, ker1 = _solve_mod_prime(rows, [r // pk for r in resid], p)
                if x1 is None:
                    continue
                for t in _span_mod(x1, ker1, p, cap):
                    lifted.append([a + pk * b for a, b in zip(s, t)])
                if len(lifted) > cap:
                    raise AttackFailed(f"more than {cap} solutions modulo {modulus}")
            pk *= p
            sols = lifted
        per_prime.append((pk, sols))
    out = [()]
    moduli = []
    for pk, sols in per_prime:
        combined = []
        for partial in out:
            for s in sols:
                if not moduli:
                    combined.append(tuple(s))
                else:
                    mod = math.prod(moduli)
                    combined.append(tuple(numt.crt([a, b], [mod, pk]) for a, b in zip(partial, s)))
        out = combined
        moduli.append(pk)
        if len(out) > cap:
            raise AttackFailed(f"more than {cap} solutions modulo {modulus}")
    return [tuple(x % modulus for x in s) for s in out]


@dataclass(frozen=True)
class NguyenResult:
    m_mod: tuple              # m mod 2 sigma
    reduced_target: tuple     # (c + s - m_mod B) / (2 sigma) = m' B + e' with e' in {0,1}^n
    m: tuple


def attack_nguyen(public, sigma: int, c: Sequence[int]) -> NguyenResult:
    rows = L._rows(public)
    mod = 2 * sigma
    s = (sigma,) * len(c)
    target = L.add(c, s)
    candidates = solve_mod(rows, target, mod)
    if not candidates:
        raise AttackFailed(f"c + s is not a lattice point modulo {mod}")

    def binary(e):
        return all(x in (0, 1) for x in e)

    for m0 in candidates:
        diff = L.sub(target, L.combine(m0, rows))
        if any(x % mod for x in diff):
            continue
        c2 = tuple(x // mod for x in diff)
        e2 = _embedding_search(rows, c2, binary)
        if e2 is None:
            continue
        m1 = L.solve_integer(rows, L.sub(c2, e2))
        if m1 is None:
            continue
        m = L.add(m0, L.scale(mod, m1))
        if _check_error(rows, sigma, m, c):
            return NguyenResult(tuple(m0), c2, m)
    raise AttackFailed("no candidate modulo 2 sigma led to a verified message")
