"""Quadratic orders: imaginary class groups and the real infrastructure.

Ideals are stored as primitive pairs (a, b) meaning aZ + (b + sqrt(D))/2 Z with
b^2 = D (mod 4a).  In the real case a reduced principal ideal carries a distance
delta with ideal = gamma O and delta = -log|gamma|; distances live in Decimal
at 50 significant digits.
"""
from __future__ import annotations

import bisect
import functools
import math
from dataclasses import dataclass, field
from decimal import Context, Decimal, localcontext
from fractions import Fraction
from typing import Optional

from . import numt
from .errors import AlgorithmFailure, DomainError

PRECISION = Context(prec=50)


def _precise(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with localcontext(PRECISION):
            return fn(*args, **kwargs)
    return wrapper


def to_decimal(x) -> Decimal:
    """Exact conversion of ints and Fractions into the working precision."""
    with localcontext(PRECISION):
        if isinstance(x, Fraction):
            return Decimal(x.numerator) / Decimal(x.denominator)
        return Decimal(x)


@dataclass(frozen=True)
class QuadIdeal:
    a: int
    b: int

    def to_json(self) -> dict:
        return {"a": str(self.a), "b": str(self.b)}

    @classmethod
    def from_json(cls, d: dict) -> "QuadIdeal":
        return cls(int(d["a"]), int(d["b"]))


class QuadOrder:
    def __init__(self, delta: int):
        if delta % 4 not in (0, 1):
            raise DomainError("discriminant must be 0 or 1 mod 4")
        if delta >= 0 and math.isqrt(delta) ** 2 == delta:
            raise DomainError("discriminant must not be a square")
        self.delta = delta
        self.real = delta > 0
        self._cycle = None
        if self.real:
            self.s = math.isqrt(delta)       # floor(sqrt(D)); sqrt(D) is irrational
            with localcontext(PRECISION):
                self.sqrt = Decimal(delta).sqrt()

    def __repr__(self):
        return f"QuadOrder({self.delta})"

    def __eq__(self, other):
        return isinstance(other, QuadOrder) and other.delta == self.delta

    def __hash__(self):
        return hash(self.delta)

    def ideal(self, a: int, b: int) -> QuadIdeal:
        if a <= 0 or (b * b - self.delta) % (4 * a):
            raise DomainError(f"({a}, {b}) is not an ideal of discriminant {self.delta}")
        return QuadIdeal(a, b)

    def c(self, ideal: QuadIdeal) -> int:
        return (ideal.b * ideal.b - self.delta) // (4 * ideal.a)

    def unit(self) -> QuadIdeal:
        if not self.real:
            return QuadIdeal(1, self.delta % 2)
        b0 = self.s if (self.s - self.delta) % 2 == 0 else self.s - 1
        return QuadIdeal(1, b0)

    # real-case helpers

    def normalize(self, a: int, b: int) -> int:
        """Representative of b mod 2a: in (sqrt(D) - 2a, sqrt(D)) when a < sqrt(D),
        otherwise in (-a, a]."""
        if not self.real or a > self.s:
            b = b % (2 * a)
            return b - 2 * a if b > a else b
        return self.s - (self.s - b) % (2 * a)

    def is_reduced(self, ideal: QuadIdeal) -> bool:
        a, b = ideal.a, ideal.b
        if not self.real:
            c = self.c(ideal)
            if not (-a < b <= a <= c):
                return False
            return b >= 0 or a != c
        if not 0 < b <= self.s:
            return False
        if 2 * a <= self.s:
            return b >= self.s - 2 * a + 1
        return self.s >= 2 * a - b


# -- imaginary forms --------------------------------------------------------------------


def _reduce_imaginary(order: QuadOrder, a: int, b: int) -> QuadIdeal:
    while True:
        b = order.normalize(a, b)
        c = (b * b - order.delta) // (4 * a)
        if a > c:
            a, b = c, -b
            continue
        if a == c and b < 0:
            b = -b
        return QuadIdeal(a, b)


def _compose_raw(order: QuadOrder, i1: QuadIdeal, i2: QuadIdeal) -> tuple[int, int, int]:
    """Primitive part (a3, b3) of the product and its content d with i1 i2 = d (a3, b3)."""
    a1, b1, a2, b2 = i1.a, i1.b, i2.a, i2.b
    if a1 > a2:
        a1, b1, a2, b2 = a2, b2, a1, b1
    c2 = (b2 * b2 - order.delta) // (4 * a2)
    s = (b1 + b2) // 2
    n = b2 - s
    if a2 % a1 == 0:
        y1, d = 0, a1
    else:
        d, y1, _ = numt.egcd(a2, a1)
    if s % d == 0:
        y2, x2, d1 = -1, 0, d
    else:
        d1, x2, v = numt.egcd(s, d)
        y2 = -v
    v1, v2 = a1 // d1, a2 // d1
    r = (y1 * y2 * n - x2 * c2) % v1
    return v1 * v2, b2 + 2 * v2 * r, d1


# -- real infrastructure ----------------------------------------------------------------------


@dataclass(frozen=True)
class InfraPoint:
    """A reduced principal ideal with its distance (relative to whatever base the
    computation started from)."""
    ideal: QuadIdeal
    dist: Decimal = field(default_factory=Decimal)

    def to_json(self) -> dict:
        return {"ideal": self.ideal.to_json(), "dist": str(self.dist)}


@_precise
def _abs_sqrt_minus(order: QuadOrder, b: int) -> Decimal:
    """|sqrt(D) - b| without cancellation."""
    if b <= 0:
        return order.sqrt - b
    return abs(Decimal(order.delta - b * b)) / (order.sqrt + b)


@_precise
def _rho_step(order: QuadOrder, a: int, b: int) -> tuple[int, int, Decimal]:
    """rho(a) = gamma a with gamma = (b - sqrt(D)) / 2a; returns the new ideal and -log|gamma|."""
    c = (b * b - order.delta) // (4 * a)
    a2 = abs(c)
    b2 = order.normalize(a2, -b)
    inc = (Decimal(2 * a) / _abs_sqrt_minus(order, b)).ln()
    return a2, b2, inc


def _conjugate(order: QuadOrder, ideal: QuadIdeal) -> QuadIdeal:
    return QuadIdeal(ideal.a, order.normalize(ideal.a, -ideal.b))


@_precise
def _reduce_real(order: QuadOrder, a: int, b: int) -> tuple[QuadIdeal, Decimal]:
    b = order.normalize(a, b)
    total = Decimal(0)
    for _ in range(10_000):
        ideal = QuadIdeal(a, b)
        if order.is_reduced(ideal):
            return ideal, total
        a, b, inc = _rho_step(order, a, b)
        total += inc
    raise AlgorithmFailure("reduction did not terminate")


def reduce(ideal: QuadIdeal, order: QuadOrder) -> tuple[QuadIdeal, Decimal]:
    """Reduced ideal in the class, with the distance increment (zero for imaginary orders)."""
    order.ideal(ideal.a, ideal.b)
    if not order.real:
        return _reduce_imaginary(order, ideal.a, ideal.b), Decimal(0)
    return _reduce_real(order, ideal.a, ideal.b)


@_precise
def _compose_with_distance(order: QuadOrder, i1: QuadIdeal, i2: QuadIdeal) -> tuple[QuadIdeal, Decimal]:
    a3, b3, d = _compose_raw(order, i1, i2)
    if not order.real:
        return _reduce_imaginary(order, a3, b3), Decimal(0)
    reduced, inc = _reduce_real(order, a3, b3)
    # i1 i2 = d (a3, b3), so dividing by d adds log d to the distance
    return reduced, inc + Decimal(d).ln()


def compose(i1: QuadIdeal, i2: QuadIdeal, order: QuadOrder) -> QuadIdeal:
    return _compose_with_distance(order, i1, i2)[0]


def inverse(ideal: QuadIdeal, order: QuadOrder) -> QuadIdeal:
    return reduce(QuadIdeal(ideal.a, -ideal.b), order)[0]


def pow_reduced(g: QuadIdeal, e: int, order: QuadOrder) -> QuadIdeal:
    if e < 0:
        raise DomainError("exponent must be non-negative")
    result, base = order.unit(), g
    while e:
        if e & 1:
            result = compose(result, base, order)
        base = compose(base, base, order)
        e >>= 1
    return result


# imaginary class group


@dataclass(frozen=True)
class ClassGroupTable:
    order: QuadOrder
    forms: tuple          # reduced ideals, unit first
    table: tuple          # table[i][j] = index of forms[i] * forms[j]

    @property
    def h(self) -> int:
        return len(self.forms)

    def index(self, ideal: QuadIdeal) -> int:
        return self.forms.index(ideal)


def reduced_forms(delta: int) -> list[QuadIdeal]:
    """All primitive reduced forms of a negative discriminant, by direct enumeration."""
    order = QuadOrder(delta)
    out = []
    a = 1
    while 3 * a * a <= -delta:
        for b in range(-a + 1, a + 1):
            if (b * b - delta) % (4 * a):
                continue
            c = (b * b - delta) // (4 * a)
            ideal = QuadIdeal(a, b)
            if math.gcd(a, b, c) == 1 and order.is_reduced(ideal):
                out.append(ideal)
        a += 1
    return out


def class_group_brute(delta: int) -> ClassGroupTable:
    if delta >= 0 or -delta > 10**6:
        raise DomainError("need -10^6 <= discriminant < 0")
    order = QuadOrder(delta)
    forms = reduced_forms(delta)
    forms.sort(key=lambda f: (f != order.unit(), f.a, abs(f.b), -f.b))
    pos = {f: i for i, f in enumerate(forms)}
    table = tuple(tuple(pos[compose(f, g, order)] for g in forms) for f in forms)
    return ClassGroupTable(order, tuple(forms), table)


class ClassGroup:
    """Group interface over reduced ideals, usable by the hidden-subgroup solvers."""

    def __init__(self, order: QuadOrder):
        if order.real:
            raise DomainError("class-group interface is for imaginary orders")
        self.order = order
        self.identity = order.unit()

    def mul(self, x, y):
        return compose(x, y, self.order)

    def pow(self, x, k):
        if k < 0:
            return pow_reduced(inverse(x, self.order), -k, self.order)
        return pow_reduced(x, k, self.order)

    def inv(self, x):
        return inverse(x, self.order)

    def key(self, x):
        return (x.a, x.b)


def element_order(g: QuadIdeal, order: QuadOrder, bound: int = 10**6) -> int:
    unit, x = order.unit(), g
    for k in range(1, bound + 1):
        if x == unit:
            return k
        x = compose(x, g, order)
    raise AlgorithmFailure("order exceeds the search bound")


# -- the principal cycle ---------------------------------------------------------------------------


def rho(point: InfraPoint, order: QuadOrder, direction: str = "forward") -> InfraPoint:
    """Next (or previous) reduced ideal in the principal cycle, distance updated."""
    if not order.real:
        raise DomainError("rho is defined for real orders")
    with localcontext(PRECISION):
        if direction == "forward":
            a, b, inc = _rho_step(order, point.ideal.a, point.ideal.b)
            return InfraPoint(QuadIdeal(a, b), point.dist + inc)
        if direction != "backward":
            raise DomainError("direction must be 'forward' or 'backward'")
        # the cycle of conjugates runs in reverse
        conj = _conjugate(order, point.ideal)
        a, b, _ = _rho_step(order, conj.a, conj.b)
        prev = _conjugate(order, QuadIdeal(a, b))
        _, _, inc = _rho_step(order, prev.a, prev.b)
        return InfraPoint(prev, point.dist - inc)


def principal_cycle(order: QuadOrder) -> list[InfraPoint]:
    """Reduced principal ideals in rho order with distances from O; cached on the order."""
    if not order.real:
        raise DomainError("need a real order")
    if order.delta > 10**6:
        raise DomainError("cycle walks limited to discriminants up to 10^6")
    if order._cycle is None:
        start = InfraPoint(order.unit(), Decimal(0))
        pts = [start]
        nxt = rho(start, order)
        while nxt.ideal != start.ideal:
            pts.append(nxt)
            nxt = rho(nxt, order)
        order._cycle = (pts, nxt.dist)
    return order._cycle[0]


def regulator_brute(delta: int) -> Decimal:
    """Sum of rho distance increments around the principal cycle."""
    order = delta if isinstance(delta, QuadOrder) else QuadOrder(delta)
    if not order.real:
        raise DomainError("regulator is defined for real orders")
    principal_cycle(order)
    return order._cycle[1]


@_precise
def ideal_left(x, order: QuadOrder, base: Optional[InfraPoint] = None) -> InfraPoint:
    """Last reduced ideal at distance <= x from base, walking the cycle (the oracle
    the giant-step algorithm is checked against).  The returned distance is absolute,
    in [0, R)."""
    pts = principal_cycle(order)
    reg = order._cycle[1]
    start = Decimal(0) if base is None else base.dist
    t = (start + to_decimal(x)) % reg
    if t < 0:
        t += reg
    dists = [p.dist for p in pts]
    return pts[bisect.bisect_right(dists, t) - 1]


@_precise
def ideal_error(x, order: QuadOrder, base: Optional[InfraPoint] = None) -> Decimal:
    reg = regulator_brute(order)
    start = Decimal(0) if base is None else base.dist
    err = (start + to_decimal(x) - ideal_left(x, order, base).dist) % reg
    return err + reg if err < 0 else err


@_precise
def multiply_points(p: InfraPoint, q: InfraPoint, order: QuadOrder) -> InfraPoint:
    ideal, inc = _compose_with_distance(order, p.ideal, q.ideal)
    return InfraPoint(ideal, p.dist + q.dist + inc)


@_precise
def infra_advance(point: InfraPoint, x, order: QuadOrder) -> InfraPoint:
    """Ideal to the left of dist(point) + x by giant steps.

    Doubling from rho(O) gives points at known distances; a greedy binary sum
    of those lands within a few rho steps of the target, which a final walk
    corrects.  The regulator is never used.
    """
    target = point.dist + to_decimal(x)
    steps = [rho(InfraPoint(order.unit(), Decimal(0)), order)]
    while steps[-1].dist <= target - point.dist:
        steps.append(multiply_points(steps[-1], steps[-1], order))
    result = point
    for q in reversed(steps):
        if result.dist + q.dist <= target:
            result = multiply_points(result, q, order)
    while result.dist > target:
        result = rho(result, order, "backward")
    while True:
        nxt = rho(result, order)
        if nxt.dist > target:
            return result
        result = nxt


@_precise
def normalize_point(point: InfraPoint, order: QuadOrder) -> InfraPoint:
    reg = regulator_brute(order)
    d = point.dist % reg
    if d < 0:
        d += reg
    # k R reached through compositions can land a hair below a multiple of R
    if reg - d < Decimal(10) ** -40:
        d = Decimal(0)
    return InfraPoint(point.ideal, d)


# -- Buchmann-Williams exchanges ----------------------------------------------------------------------


@dataclass
class BwRun:
    transcript: dict
    shared_a: QuadIdeal
    shared_b: QuadIdeal
    secrets: dict
    agreed_before_cleanup: bool = True


def _secret(delta: int, rng, given: Optional[int]) -> int:
    return rng.randint(1, max(1, math.isqrt(abs(delta)))) if given is None else given


def bw_imaginary_exchange(delta: int, g: QuadIdeal, rng, a: Optional[int] = None,
                          b: Optional[int] = None) -> BwRun:
    order = QuadOrder(delta)
    if order.real or not order.is_reduced(order.ideal(g.a, g.b)):
        raise DomainError("need a reduced ideal of an imaginary order")
    a, b = _secret(delta, rng, a), _secret(delta, rng, b)
    ga, gb = pow_reduced(g, a, order), pow_reduced(g, b, order)
    transcript = {"delta": delta, "g": g.to_json(),
                  "messages": [{"from": "A", "ideal": ga.to_json()}, {"from": "B", "ideal": gb.to_json()}]}
    return BwRun(transcript, pow_reduced(gb, a, order), pow_reduced(ga, b, order), {"a": a, "b": b})


def attack_bw_imaginary(transcript: dict, rng) -> QuadIdeal:
    """Discrete log of Alice's message in <g> by the hidden-subgroup solver, then g^(ab)."""
    from . import hsp

    order = QuadOrder(int(transcript["delta"]))
    g = QuadIdeal.from_json(transcript["g"])
    ga = QuadIdeal.from_json(transcript["messages"][0]["ideal"])
    gb = QuadIdeal.from_json(transcript["messages"][1]["ideal"])
    r = element_order(g, order)
    a = hsp.dlog(g, ga, r, ClassGroup(order), rng, classical_factoring=True)
    return pow_reduced(gb, a, order)


def _round_bits(x: Decimal, bits: int) -> Fraction:
    """x rounded down to a multiple of 2^-bits, as sent over the wire."""
    with localcontext(PRECISION):
        return Fraction(int((x * (1 << bits)).to_integral_value(rounding="ROUND_FLOOR")), 1 << bits)


def _steps_between(order: QuadOrder, start: QuadIdeal, end: QuadIdeal, limit: int) -> Optional[int]:
    p = InfraPoint(start)
    for k in range(1, limit + 1):
        p = rho(p, order)
        if p.ideal == end:
            return k
    return None


def cleanup(order: QuadOrder, c_a: QuadIdeal, c_b: QuadIdeal, radius: int = 3) -> QuadIdeal:
    """Deterministic reconciliation both parties run on the exchanged candidates.

    Errors are sent rounded down, so a party can only fall short of the true
    ideal; keep the candidate that comes later along rho, ties by the shorter
    hop and then lexicographically."""
    if c_a == c_b:
        return c_a
    ab = _steps_between(order, c_a, c_b, radius)
    ba = _steps_between(order, c_b, c_a, radius)
    if ab is None and ba is None:
        raise AlgorithmFailure("candidates are more than the cleanup radius apart")
    if ba is None or (ab is not None and ab < ba):
        return c_b
    if ab is None or ba < ab:
        return c_a
    return min(c_a, c_b, key=lambda i: (i.a, i.b))


@_precise
def bw_real_exchange(delta: int, rng, a: Optional[int] = None, b: Optional[int] = None,
                     precision_bits: int = 80) -> BwRun:
    """Errors travel as multiples of 2^-precision_bits; each party works relative to
    the other's ideal with giant steps, then both run the cleanup rule."""
    order = QuadOrder(delta)
    if not order.real:
        raise DomainError("need a positive discriminant")
    a = _secret(delta, rng, a)
    b = _secret(delta, rng, b)
    origin = InfraPoint(order.unit(), Decimal(0))

    def publish(secret):
        p = infra_advance(origin, secret, order)
        return p.ideal, _round_bits(to_decimal(secret) - p.dist, precision_bits)

    ideal_a, err_a = publish(a)
    ideal_b, err_b = publish(b)
    c_a = infra_advance(InfraPoint(ideal_b), to_decimal(a) + to_decimal(err_b), order).ideal
    c_b = infra_advance(InfraPoint(ideal_a), to_decimal(b) + to_decimal(err_a), order).ideal
    transcript = {"delta": delta, "precision_bits": precision_bits, "messages": [
        {"from": "A", "ideal": ideal_a.to_json(), "error": str(err_a)},
        {"from": "B", "ideal": ideal_b.to_json(), "error": str(err_b)},
        {"from": "A", "check": c_a.to_json()},
        {"from": "B", "check": c_b.to_json()},
    ]}
    # each party runs the rule with its own candidate first
    return BwRun(transcript, cleanup(order, c_a, c_b), cleanup(order, c_b, c_a),
                 {"a": a, "b": b}, agreed_before_cleanup=c_a == c_b)
