"""Exact lattice algorithms on integer row bases.

A basis is a sequence of row vectors; the lattice is the set of integer
combinations x B.  Everything here is exact (ints and Fractions); floats only
appear in reported lengths such as the orthogonality defect.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import BoundError, DomainError, RankError

Vector = tuple


def dot(u: Sequence, v: Sequence):
    return sum(a * b for a, b in zip(u, v))


def norm2(v: Sequence):
    return dot(v, v)


def norm(v: Sequence) -> float:
    return math.sqrt(norm2(v))


def add(u, v):
    return tuple(a + b for a, b in zip(u, v))


def sub(u, v):
    return tuple(a - b for a, b in zip(u, v))


def scale(c, v):
    return tuple(c * a for a in v)


def combine(coeffs: Sequence, rows: Sequence[Sequence]) -> tuple:
    """x B for a coefficient vector x."""
    out = [0] * len(rows[0])
    for c, row in zip(coeffs, rows):
        if c:
            for j, a in enumerate(row):
                out[j] += c * a
    return tuple(out)


def round_half_away(x: Fraction) -> int:
    """Nearest integer, ties rounded away from zero."""
    x = Fraction(x)
    n = math.floor(abs(x) + Fraction(1, 2))
    return n if x >= 0 else -n


@dataclass(frozen=True)
class IntBasis:
    rows: tuple

    def __post_init__(self):
        rows = tuple(tuple(int(a) for a in r) for r in self.rows)
        if not rows or any(len(r) != len(rows[0]) for r in rows):
            raise DomainError("basis rows must be non-empty and of equal length")
        if len(rows) > len(rows[0]):
            raise RankError("more rows than coordinates")
        object.__setattr__(self, "rows", rows)
        _gso(rows)  # raises RankError on dependent rows

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    def __iter__(self):
        return iter(self.rows)

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, i):
        return self.rows[i]

    def to_json(self) -> list:
        return [[str(a) for a in r] for r in self.rows]

    @classmethod
    def from_json(cls, data) -> "IntBasis":
        return cls(tuple(tuple(int(a) for a in r) for r in data))


def _rows(basis) -> tuple:
    return basis.rows if isinstance(basis, IntBasis) else tuple(tuple(r) for r in basis)


def _gso(rows) -> tuple[list, list, list]:
    """(b*, mu, |b*|^2) in exact rationals."""
    bstar, mu, bn = [], [], []
    for i, b in enumerate(rows):
        v = [Fraction(a) for a in b]
        row_mu = []
        for j in range(i):
            m = Fraction(dot(b, bstar[j])) / bn[j]
            row_mu.append(m)
            v = [x - m * y for x, y in zip(v, bstar[j])]
        n2 = norm2(v)
        if n2 == 0:
            raise RankError("basis rows are linearly dependent")
        bstar.append(v)
        mu.append(row_mu)
        bn.append(n2)
    return bstar, mu, bn


def gram_schmidt(basis) -> tuple[list[tuple], list[list[Fraction]]]:
    """Orthogonal vectors b*_i and the lower-triangular mu_{ij} (j < i)."""
    bstar, mu, _ = _gso(_rows(basis))
    return [tuple(v) for v in bstar], mu


def determinant(basis) -> int:
    """Exact determinant of a square integer basis (Bareiss elimination)."""
    m = [list(r) for r in _rows(basis)]
    n = len(m)
    if any(len(r) != n for r in m):
        raise DomainError("determinant needs a square basis")
    sign, prev = 1, 1
    for k in range(n - 1):
        if m[k][k] == 0:
            p = next((i for i in range(k + 1, n) if m[i][k]), None)
            if p is None:
                return 0
            m[k], m[p] = m[p], m[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def solve_rational(basis, target: Sequence) -> list[Fraction]:
    """x with x B = target for a square non-singular B."""
    rows = _rows(basis)
    n = len(rows)
    if any(len(r) != n for r in rows) or len(target) != n:
        raise DomainError("need a square basis and matching target")
    # columns of B become equations: sum_i x_i B[i][j] = t_j
    a = [[Fraction(rows[i][j]) for i in range(n)] + [Fraction(target[j])] for j in range(n)]
    for c in range(n):
        p = next((r for r in range(c, n) if a[r][c] != 0), None)
        if p is None:
            raise RankError("basis is singular")
        a[c], a[p] = a[p], a[c]
        piv = a[c][c]
        a[c] = [x / piv for x in a[c]]
        for r in range(n):
            if r != c and a[r][c] != 0:
                f = a[r][c]
                a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return [a[i][n] for i in range(n)]


def solve_integer(basis, target: Sequence) -> Optional[tuple]:
    """Integer x with x B = target, or None when target is not in the lattice."""
    x = solve_rational(basis, target)
    if any(v.denominator != 1 for v in x):
        return None
    return tuple(int(v) for v in x)


# -- LLL ------------------------------------------------------------------------


def lll_reduce(basis, delta: Fraction = Fraction(3, 4), return_transform: bool = False):
    """Integral LLL (all quantities kept as integers, no rounding error).

    Returns the reduced IntBasis, plus the unimodular U with reduced = U B when
    ``return_transform`` is set.
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise DomainError("delta must lie in (1/4, 1)")
    b = [list(r) for r in _rows(basis)]
    n = len(b)
    h = [[int(i == j) for j in range(n)] for i in range(n)]
    # 1-based bookkeeping: d[0] = 1, d[i] = Gram determinant of the first i rows
    d = [1] + [0] * n
    lam = [[0] * (n + 1) for _ in range(n + 1)]
    dp, dq = delta.numerator, delta.denominator

    def redi(k, l):
        if 2 * abs(lam[k][l]) > d[l]:
            q = (2 * lam[k][l] + d[l]) // (2 * d[l])
            b[k - 1] = [x - q * y for x, y in zip(b[k - 1], b[l - 1])]
            h[k - 1] = [x - q * y for x, y in zip(h[k - 1], h[l - 1])]
            lam[k][l] -= q * d[l]
            for i in range(1, l):
                lam[k][i] -= q * lam[l][i]

    def swapi(k, kmax):
        b[k - 1], b[k - 2] = b[k - 2], b[k - 1]
        h[k - 1], h[k - 2] = h[k - 2], h[k - 1]
        for j in range(1, k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        l = lam[k][k - 1]
        bb = (d[k - 2] * d[k] + l * l) // d[k - 1]
        for i in range(k + 1, kmax + 1):
            t = lam[i][k]
            lam[i][k] = (d[k] * lam[i][k - 1] - l * t) // d[k - 1]
            lam[i][k - 1] = (bb * t + l * lam[i][k]) // d[k]
        d[k - 1] = bb

    d[1] = dot(b[0], b[0])
    if d[1] == 0:
        raise RankError("zero vector in basis")
    k, kmax = 2, 1
    while k <= n:
        if k > kmax:
            kmax = k
            for j in range(1, k + 1):
                u = dot(b[k - 1], b[j - 1])
                for i in range(1, j):
                    u = (d[i] * u - lam[k][i] * lam[j][i]) // d[i - 1]
                if j < k:
                    lam[k][j] = u
                else:
                    if u == 0:
                        raise RankError("basis rows are linearly dependent")
                    d[k] = u
        redi(k, k - 1)
        if dq * (d[k] * d[k - 2] + lam[k][k - 1] ** 2) < dp * d[k - 1] ** 2:
            swapi(k, kmax)
            k = max(2, k - 1)
        else:
            for l in range(k - 2, 0, -1):
                redi(k, l)
            k += 1
    out = IntBasis(tuple(tuple(r) for r in b))
    if return_transform:
        return out, tuple(tuple(r) for r in h)
    return out


def is_lll_reduced(basis, delta: Fraction = Fraction(3, 4)) -> bool:
    _, mu, bn = _gso(_rows(basis))
    for i in range(len(bn)):
        if any(abs(m) > Fraction(1, 2) for m in mu[i]):
            return False
        if i and bn[i] < (delta - mu[i][i - 1] ** 2) * bn[i - 1]:
            return False
    return True


# -- enumeration ----------------------------------------------------------------


def _enumerate(rows, target, radius2: Fraction, visit: Callable, coeff_bound: Optional[int]):
    """Call visit(x, dist2) for every x with |x B - target|^2 <= radius2.

    Depth-first Fincke-Pohst enumeration over the exact GSO.  ``visit`` may
    return a smaller radius to prune the rest of the search.
    """
    bstar, mu, bn = _gso(rows)
    d = len(rows)
    tau = [Fraction(dot(target, bs)) / n2 for bs, n2 in zip(bstar, bn)]
    proj = [Fraction(t) for t in target]
    for t, bs in zip(tau, bstar):
        proj = [p - t * y for p, y in zip(proj, bs)]
    base = norm2(proj)  # distance from the target to the span
    x = [0] * d
    state = {"r2": Fraction(radius2)}

    def level(i, partial):
        if i < 0:
            r = visit(tuple(x), partial)
            if r is not None:
                state["r2"] = min(state["r2"], r)
            return
        c = tau[i] - sum(x[j] * mu[j][i] for j in range(i + 1, d))
        rem = state["r2"] - partial
        if rem < 0:
            return
        w = math.sqrt(float(rem / bn[i])) + 1
        cand = [v for v in range(math.floor(float(c) - w), math.ceil(float(c) + w) + 1)
                if (v - c) ** 2 * bn[i] <= rem]
        if coeff_bound is not None and any(abs(v) > coeff_bound for v in cand):
            raise BoundError("coefficient bound too small for this radius")
        # nearest candidates first so the radius shrinks early
        for v in sorted(cand, key=lambda v: (abs(v - c), v)):
            contrib = (v - c) ** 2 * bn[i]
            if contrib > state["r2"] - partial:
                continue
            x[i] = v
            level(i - 1, partial + contrib)
        x[i] = 0

    level(d - 1, base)
    return state["r2"]


def svp_brute(basis, coeff_bound: Optional[int] = None) -> tuple:
    """A shortest nonzero lattice vector, by exhaustive enumeration."""
    rows = _rows(basis)
    if len(rows) > 8:
        raise BoundError("enumeration limited to d <= 8")
    best = {"v": None, "n2": min(norm2(r) for r in rows)}
    best["v"] = min(rows, key=norm2)

    def visit(x, dist2):
        if any(x) and dist2 < best["n2"]:
            best["n2"], best["v"] = dist2, combine(x, rows)
            return dist2
        return None

    _enumerate(rows, (0,) * len(rows[0]), best["n2"], visit, coeff_bound)
    return tuple(best["v"])


def cvp_brute(basis, target: Sequence, coeff_bound: Optional[int] = None) -> tuple:
    """The lattice vector closest to target, by exhaustive enumeration."""
    rows = _rows(basis)
    if len(rows) > 8:
        raise BoundError("enumeration limited to d <= 8")
    if len(target) != len(rows[0]):
        raise DomainError("target length mismatch")
    start = babai_nearest_plane(rows, target)
    best = {"v": start, "n2": norm2(sub(target, start))}

    def visit(x, dist2):
        if dist2 < best["n2"]:
            best["n2"], best["v"] = dist2, combine(x, rows)
            return dist2
        return None

    _enumerate(rows, target, best["n2"], visit, coeff_bound)
    return tuple(best["v"])


def short_vectors(basis, radius2) -> list[tuple]:
    """Every nonzero lattice vector of squared norm <= radius2."""
    rows = _rows(basis)
    found = []

    def visit(x, dist2):
        if any(x):
            found.append(combine(x, rows))

    _enumerate(rows, (0,) * len(rows[0]), Fraction(radius2), visit, None)
    return found


def successive_minima_brute(basis) -> list[float]:
    """lambda_1..lambda_d, by enumerating all vectors up to the longest reduced row."""
    rows = _rows(basis)
    if len(rows) > 6:
        raise BoundError("successive minima limited to d <= 6")
    reduced = lll_reduce(rows).rows
    radius2 = max(norm2(r) for r in reduced)
    vecs = sorted(short_vectors(reduced, radius2), key=norm2)
    chosen: list[tuple] = []
    minima: list[float] = []
    for v in vecs:
        if _independent(chosen + [v]):
            chosen.append(v)
            minima.append(math.sqrt(norm2(v)))
            if len(chosen) == len(rows):
                break
    return minima


def _independent(vs) -> bool:
    try:
        _gso(vs)
        return True
    except RankError:
        return False


def lattice_gap(basis) -> float:
    lam = successive_minima_brute(basis)
    if len(lam) < 2:
        raise DomainError("gap needs d >= 2")
    return lam[1] / lam[0]


# -- Babai ----------------------------------------------------------------------


def babai_round(basis, target: Sequence) -> tuple:
    """B round(target B^-1), ties away from zero."""
    rows = _rows(basis)
    coeffs = solve_rational(rows, target)
    return combine([round_half_away(c) for c in coeffs], rows)


def babai_nearest_plane(basis, target: Sequence) -> tuple:
    rows = _rows(basis)
    bstar, _, bn = _gso(rows)
    r = [Fraction(t) for t in target]
    coeffs = [0] * len(rows)
    for i in reversed(range(len(rows))):
        c = round_half_away(dot(r, bstar[i]) / bn[i])
        coeffs[i] = c
        if c:
            r = [a - c * b for a, b in zip(r, rows[i])]
    return combine(coeffs, rows)


# -- measures and constructions ---------------------------------------------------


def orthogonality_defect(basis) -> float:
    """prod |b_i| / |det B|, at least 1 by Hadamard's inequality."""
    rows = _rows(basis)
    if len(rows) != len(rows[0]):
        raise DomainError("defect needs a square basis")
    det = determinant(rows)
    if det == 0:
        raise RankError("basis is singular")
    sq = Fraction(math.prod(norm2(r) for r in rows), det * det)
    # exp/log keeps very large ratios finite
    return math.exp((math.log(sq.numerator) - math.log(sq.denominator)) / 2)


def gaussian_heuristic(det_magnitude, d: int) -> tuple[float, float]:
    if det_magnitude <= 0 or d < 1:
        raise DomainError("need a positive determinant and d >= 1")
    root = float(det_magnitude) ** (1 / d)
    return root * math.sqrt(d / (2 * math.pi * math.e)), root * math.sqrt(d / (math.pi * math.e))


def embed_cvp(basis, c: Sequence) -> IntBasis:
    rows = _rows(basis)
    if len(c) != len(rows[0]):
        raise DomainError("target length mismatch")
    return IntBasis(tuple(tuple(r) + (0,) for r in rows) + (tuple(c) + (1,),))
