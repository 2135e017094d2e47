"""Quantum regulator and principal-ideal distance algorithms for real quadratic orders.

The quantum parts are simulated exactly.  Measuring the function register of
sum_x |x>|g(x)> leaves a uniform superposition over one level set of g, so a
run draws x0 uniformly, enumerates the level set of g(x0) from the cycle
structure, and Fourier-samples it.  Level sets are found through a
`CycleOracle`: the reduced principal ideals with their distances, i.e. the
physics of the oracle.  The classical post-processing only uses
`quad.infra_advance` compositions and never reads the regulator or the
target distance.
"""
from __future__ import annotations

import bisect
import cmath
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import numt, qsim
from . import quad as Q
from .errors import AlgorithmFailure, DomainError

RESAMPLE = "RESAMPLE"
MAX_SUPPORT = 10**6
MAX_SAMPLES = 64
MAX_REGISTER = 1 << 22

# Smallest ratio |sum|^2 / q^2 seen by `calibrate_claim32(random.Random(20240601))`
# (10^4 draws over q in {64, 256, 1024}) was 0.00496, rounded down here.
CLAIM32_C = 0.0049
TIE = Decimal(10) ** -30


def theorem_bound(delta: int) -> Fraction:
    """n * 32 * delta / 3 with n the bit length of delta."""
    return Fraction(delta.bit_length() * 32 * delta, 3)


def _to_dec(x) -> Decimal:
    return x if isinstance(x, Decimal) else Q.to_decimal(x)


def _dec_fraction(x: Decimal) -> Fraction:
    return Fraction(x)


# -- level sets of g ---------------------------------------------------------------------


class CycleOracle:
    """Real-argument version of g: v -> (W(v), floor(N e(v))) for a cycle of ideals
    with distances `dists` (starting at 0) and period `reg`."""

    def __init__(self, labels: Sequence, dists: Sequence, reg, N: int):
        if N < 1:
            raise DomainError("N must be positive")
        if not dists or _to_dec(dists[0]) != 0:
            raise DomainError("cycle distances must start at 0")
        self.labels = list(labels)
        self.dists = [_to_dec(d) for d in dists]
        self.reg = _to_dec(reg)
        if any(b <= a for a, b in zip(self.dists, self.dists[1:])) or self.dists[-1] >= self.reg:
            raise DomainError("cycle distances must increase within [0, R)")
        self.N = N

    @classmethod
    def from_order(cls, order: Q.QuadOrder, N: int) -> "CycleOracle":
        pts = Q.principal_cycle(order)
        return cls([p.ideal for p in pts], [p.dist for p in pts], Q.regulator_brute(order), N)

    def _locate(self, v: Decimal) -> tuple[int, int]:
        with localcontext(Q.PRECISION):
            t = v % self.reg
            if t < 0:
                t += self.reg
            i = bisect.bisect_right(self.dists, t) - 1
            # exact grid points such as 327/224 arrive a hair low after division
            return i, int(((t - self.dists[i]) * self.N + TIE).to_integral_value(rounding="ROUND_FLOOR"))

    def value(self, v) -> tuple:
        i, f = self._locate(_to_dec(v))
        return self.labels[i], f

    def interval(self, v) -> tuple[Decimal, Decimal]:
        """[lo, hi) within [0, R) on which the value equals value(v)."""
        i, f = self._locate(_to_dec(v))
        with localcontext(Q.PRECISION):
            end = self.dists[i + 1] if i + 1 < len(self.dists) else self.reg
            lo = self.dists[i] + Decimal(f) / self.N
            return lo, min(lo + Decimal(1) / self.N, end)


def _lattice_hits(oracle: CycleOracle, v0: Decimal, offset: Decimal, limit: int) -> list[int]:
    """Integers y in [0, limit) with value(offset + y/N) = value(v0).

    The value is constant on one interval of length <= 1/N per period, so each
    period holds at most one hit.  Candidates are rounded with a little slack and
    confirmed by the oracle itself, which keeps exact grid ties consistent.
    """
    key = oracle.value(v0)
    lo, _ = oracle.interval(v0)
    N, reg = oracle.N, oracle.reg
    with localcontext(Q.PRECISION):
        w = (lo - offset) % reg
        if w < 0:
            w += reg
        out = []
        k = -1
        while True:
            y = int(((w + k * reg) * N - TIE).to_integral_value(rounding="ROUND_CEILING"))
            if y >= limit:
                return out
            if y >= 0 and oracle.value(offset + Decimal(y) / N) == key:
                out.append(y)
            k += 1


def regulator_level_set(oracle: CycleOracle, x0: int, m: int) -> list[int]:
    """All x in [0, m) with g(x) = g(x0), one floor-or-ceiling hit per period."""
    with localcontext(Q.PRECISION):
        return _lattice_hits(oracle, Decimal(x0) / oracle.N, Decimal(0), m)


def pidp_level_set(oracle: CycleOracle, a: Decimal, x0: int, y0: int, rows: int,
                   cols: int) -> list[tuple[int, int]]:
    """All (x, y) in [0, rows) x [0, cols) with g(a x + y/N) = g(a x0 + y0/N)."""
    with localcontext(Q.PRECISION):
        v0 = a * x0 + Decimal(y0) / oracle.N
        return [(x, y) for x in range(rows) for y in _lattice_hits(oracle, v0, a * x, cols)]


# -- g-hat and the regulator ---------------------------------------------------------------


@dataclass
class GHatSpec:
    delta: int
    N: int
    strict: bool = False
    order: Q.QuadOrder = field(init=False, repr=False)

    def __post_init__(self):
        if self.delta <= 0:
            raise DomainError("g-hat needs a positive discriminant")
        if self.N < 1:
            raise DomainError("N must be positive")
        if self.strict and self.N < theorem_bound(self.delta):
            raise DomainError(f"strict mode needs N >= {float(theorem_bound(self.delta)):.1f}")
        self.order = Q.QuadOrder(self.delta)

    @property
    def n(self) -> int:
        return self.delta.bit_length()

    @classmethod
    def at_bound(cls, delta: int) -> "GHatSpec":
        return cls(delta, math.ceil(theorem_bound(delta)), strict=True)

    def oracle(self) -> CycleOracle:
        return CycleOracle.from_order(self.order, self.N)


def g_hat(j: int, spec: GHatSpec) -> tuple[Q.QuadIdeal, int]:
    if j < 0:
        raise DomainError("g-hat is defined for j >= 0")
    x = Fraction(j, spec.N)
    err = Q.ideal_error(x, spec.order)
    with localcontext(Q.PRECISION):
        scaled = (err * spec.N + TIE).to_integral_value(rounding="ROUND_FLOOR")
    return Q.ideal_left(x, spec.order).ideal, int(scaled)


def fourier_sample_set(indices: Sequence[int], m: int, rng) -> int:
    """Measure QFT_m of the uniform superposition over `indices`."""
    if len(indices) > MAX_SUPPORT:
        raise AlgorithmFailure("support exceeds the simulation budget")
    amp = 1 / math.sqrt(len(indices))
    return qsim.sample_index(qsim.fourier_sample({x: amp for x in indices}, m), rng)


def regulator_core_sample(spec: GHatSpec, m: int, rng, oracle: Optional[CycleOracle] = None):
    """One run of the regulator circuit: an integer y, or RESAMPLE when y > m/n."""
    if m < 2:
        raise DomainError("register size must be at least 2")
    if m > MAX_REGISTER:
        raise AlgorithmFailure("register exceeds the simulation budget")
    oracle = oracle or spec.oracle()
    y = fourier_sample_set(regulator_level_set(oracle, rng.randrange(m), m), m, rng)
    return RESAMPLE if y * spec.n > m else y


def regulator_upper_bound(delta: int) -> float:
    """R < sqrt(D) (log(D)/2 + 1), valid for every real quadratic order."""
    return math.sqrt(delta) * (math.log(delta) / 2 + 1)


def default_register(delta: int, N: int) -> int:
    s = N * regulator_upper_bound(delta)
    return 1 << math.ceil(math.log2(2 * s * s))


def close_to_multiple(order: Q.QuadOrder, a: int, N: int, threshold: int = 2) -> bool:
    """W(a/N) is O and N e(a/N) < threshold, by giant steps only."""
    x = Fraction(a, N)
    p = Q.infra_advance(Q.InfraPoint(order.unit(), Decimal(0)), x, order)
    if p.ideal != order.unit():
        return False
    with localcontext(Q.PRECISION):
        return (Q.to_decimal(x) - p.dist) * N < threshold


@dataclass
class RegulatorRun:
    delta: int
    N: int
    m: int
    a: int
    samples: list
    strict: bool

    @property
    def estimate(self) -> Fraction:
        return Fraction(self.a, self.N)

    def to_json(self) -> dict:
        return {"delta": self.delta, "N": self.N, "m": self.m, "a": self.a, "strict": self.strict,
                "estimate": str(float(self.estimate)), "samples": list(self.samples)}


# log of the golden ratio: no real quadratic order has a smaller regulator
MIN_REGULATOR = 0.4812


def smallest_multiple(order: Q.QuadOrder, a: int, N: int) -> Optional[int]:
    """ceil(N R) from any a that passes the close-to-multiple test.

    a may sit near j s for some j >= 1.  Trying a // j for the largest j first and
    keeping the smallest passing neighbour lands on ceil(s), the least integer
    whose W is O with error under 2/N.
    """
    top = max(1, math.floor(a / (MIN_REGULATOR * N)))
    for j in range(top, 0, -1):
        t = a // j
        for u in (t - 1, t, t + 1):
            # u < 2 would only be near the trivial multiple 0
            if u >= 2 and close_to_multiple(order, u, N):
                return u
    return None


def _candidate_period(order: Q.QuadOrder, y1: int, y2: int, m: int, N: int) -> Optional[int]:
    for c in numt.convergents(Fraction(y1, y2)):
        k1 = c.numerator
        if k1 == 0:
            continue
        a = round(Fraction(k1 * m, y1))
        # a = floor(s) fails the test at a but passes at a + 1
        if a > 0 and any(close_to_multiple(order, t, N) for t in (a, a + 1)):
            return smallest_multiple(order, a + 1, N)
    return None


def regulator_quantum(delta: int, rng, N: Optional[int] = None, m: Optional[int] = None,
                      strict: bool = False, max_samples: int = MAX_SAMPLES) -> RegulatorRun:
    """R to within 1/N from two accepted samples and a continued fraction."""
    if N is None:
        N = math.ceil(theorem_bound(delta)) if strict else 64
    spec = GHatSpec(delta, N, strict)
    oracle = spec.oracle()
    m = m or default_register(delta, N)
    accepted: list[int] = []
    transcript = []
    failures = 0
    for _ in range(max_samples):
        y = regulator_core_sample(spec, m, rng, oracle)
        transcript.append({"m": m, "y": y})
        if y == RESAMPLE or y == 0:
            continue
        accepted.append(y)
        if len(accepted) < 2:
            continue
        a = _candidate_period(spec.order, accepted[-2], accepted[-1], m, N)
        if a is not None:
            return RegulatorRun(delta, N, m, a, transcript, strict)
        failures += 1
        if failures % 4 == 0:
            m *= 2
            accepted.clear()
    raise AlgorithmFailure(f"no regulator estimate within {max_samples} samples")


def refine_regulator(delta: int, estimate: Fraction, N: int) -> Decimal:
    """Full-precision R from a 1/N estimate: the unit ideal just past a/N + 1/N sits
    at distance exactly R."""
    order = Q.QuadOrder(delta)
    p = Q.infra_advance(Q.InfraPoint(order.unit(), Decimal(0)), estimate + Fraction(1, N), order)
    if p.ideal != order.unit() or p.dist <= 0:
        raise AlgorithmFailure("estimate is not within 1/N of a multiple of the regulator")
    return p.dist


# -- the interference bound --------------------------------------------------------------------


def claim32_ratio(q: int, alpha, beta_values: Sequence[float]) -> float:
    if len(beta_values) != q:
        raise DomainError("need one beta per term")
    j = np.arange(q)
    total = np.exp(2j * np.pi * (j * float(alpha) / q + np.asarray(beta_values, dtype=float))).sum()
    return float(abs(total) ** 2) / q**2


def claim32_check(q: int, alpha, beta_values: Sequence[float], n: Optional[int] = None,
                  c: float = CLAIM32_C) -> bool:
    n = n or math.ceil(math.log2(q))
    if abs(alpha) > Fraction(3, 4):
        raise DomainError("|alpha| must be at most 3/4")
    if any(abs(b) > 1 / n + 1e-12 for b in beta_values):
        raise DomainError("|beta(j)| must be at most 1/n")
    return claim32_ratio(q, alpha, beta_values) >= c


def adversarial_betas(q: int, alpha: float, n: int) -> list[float]:
    """Rotate each term by 1/n away from the unperturbed resultant."""
    phases = [2 * math.pi * j * alpha / q for j in range(q)]
    centre = cmath.phase(sum(cmath.exp(1j * t) for t in phases))
    out = []
    for t in phases:
        diff = (t - centre + math.pi) % (2 * math.pi) - math.pi
        out.append((1 if diff >= 0 else -1) / n)
    return out


def calibrate_claim32(rng, draws: int = 10_000, qs: Sequence[int] = (64, 256, 1024)) -> float:
    """Minimum ratio over random admissible (alpha, beta): beta is drawn either
    independently per term or as one constant, uniform in [-1/n, 1/n]."""
    lowest = 1.0
    for i in range(draws):
        q = qs[i % len(qs)]
        n = math.ceil(math.log2(q))
        alpha = rng.uniform(-0.75, 0.75)
        if i % 2 == 0:
            betas = [rng.uniform(-1, 1) / n for _ in range(q)]
        else:
            betas = [rng.uniform(-1, 1) / n] * q
        lowest = min(lowest, claim32_ratio(q, alpha, betas))
    return lowest


# -- principal ideal distances ----------------------------------------------------------------


@dataclass
class PidpParams:
    delta: int
    reg: Decimal
    m: int
    b: int
    q: int
    N: int
    p: int
    desk: bool

    @property
    def invariant_gap(self) -> Fraction:
        return abs(self.N * _dec_fraction(self.reg) - self.p)

    def invariant_holds(self, reg=None) -> bool:
        r = _dec_fraction(_to_dec(reg)) if reg is not None else _dec_fraction(self.reg)
        return abs(self.N * r - round(self.N * r)) <= Fraction(1, 4 * self.m)

    def to_json(self) -> dict:
        return {"delta": self.delta, "reg": str(self.reg), "m": self.m, "b": self.b, "q": self.q,
                "N": self.N, "p": self.p, "desk": self.desk,
                "invariant_gap": str(float(self.invariant_gap))}


DESK_B = 16


def pidp_params(delta: int, reg, rng=None, b: Optional[int] = None, strict: bool = False) -> PidpParams:
    """Register sizes for the distance algorithm from a regulator value `reg`.

    b is the first integer above n 32 D / 3 in strict mode; otherwise it defaults to
    DESK_B and the result is flagged as desk mode.  p/q is the first convergent of
    b reg with |b reg - p/q| <= 1/(4 q m).  `rng` is accepted for interface symmetry;
    the selection is deterministic.
    """
    r = _dec_fraction(_to_dec(reg))
    if r <= 0:
        raise DomainError("regulator estimate must be positive")
    bound = theorem_bound(delta)
    m = math.floor(2 * r) + 1
    if strict:
        b = math.floor(bound) + 1
    elif b is None:
        b = DESK_B
    if b < 1:
        raise DomainError("b must be positive")
    while True:
        x = b * r
        for c in numt.convergents(x):
            if abs(x - c) <= Fraction(1, 4 * c.denominator * m):
                N = c.denominator * b
                return PidpParams(delta, _to_dec(reg), m, b, c.denominator, N, round(N * r),
                                  desk=b <= bound)
        b *= 2  # unreachable for rational reg; kept as the documented fallback


def _power_point(target: Q.QuadIdeal, j: int, order: Q.QuadOrder) -> Q.InfraPoint:
    """target^j reduced, with distance relative to j * delta(target)."""
    result = Q.InfraPoint(order.unit(), Decimal(0))
    base = Q.InfraPoint(target, Decimal(0))
    while j:
        if j & 1:
            result = Q.multiply_points(result, base, order)
        j >>= 1
        if j:
            base = Q.multiply_points(base, base, order)
    return result


def h_hat(j1: int, j2: int, target: Q.QuadIdeal, params: PidpParams) -> tuple[Q.QuadIdeal, int]:
    """g(a j1 + j2/N) with a the distance of `target`, from compositions only."""
    if j1 < 0 or j2 < 0:
        raise DomainError("h-hat is defined for j1, j2 >= 0")
    order = Q.QuadOrder(params.delta)
    base = _power_point(target, j1, order)
    with localcontext(Q.PRECISION):
        x = Q.to_decimal(Fraction(j2, params.N))
        w = Q.infra_advance(base, x - base.dist, order)
        scaled = ((x - w.dist) * params.N + TIE).to_integral_value(rounding="ROUND_FLOOR")
    return w.ideal, int(scaled)


def _sorted_pairs(pairs):
    xs = np.array([x for x, _ in pairs], dtype=np.int64)
    ys = np.array([y for _, y in pairs], dtype=np.int64)
    order = np.argsort(xs, kind="stable")
    return xs[order], ys[order]


def t_marginal(pairs: list[tuple[int, int]], cols: int) -> np.ndarray:
    """P(t) after QFT on both registers of the uniform superposition over `pairs`.

    Summing |amplitude|^2 over s leaves sum_x |sum_{y in S_x} e(y t / cols)|^2.
    """
    xs, ys = _sorted_pairs(pairs)
    ts = np.arange(cols)
    marg = np.zeros(cols)
    starts = np.flatnonzero(np.r_[True, xs[1:] != xs[:-1]])
    bounds = np.r_[starts, len(xs)]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi - lo == 1:
            marg += 1
        else:
            amp = np.exp(2j * np.pi * np.outer(ts, ys[lo:hi]) / cols).sum(axis=1)
            marg += np.abs(amp) ** 2
    return marg / marg.sum()


def s_given_t(pairs: list[tuple[int, int]], rows: int, cols: int, t: int) -> np.ndarray:
    xs, ys = _sorted_pairs(pairs)
    vec = np.zeros(rows, dtype=complex)
    np.add.at(vec, xs, np.exp(2j * np.pi * ys * t / cols))
    probs = np.abs(np.fft.ifft(vec)) ** 2
    return probs / probs.sum()


def two_register_sample(pairs: list[tuple[int, int]], rows: int, cols: int, rng) -> tuple[int, int]:
    """Measure QFT_rows (x) QFT_cols of the uniform superposition over `pairs`:
    t from its exact marginal, then s from the conditional, one transform of
    length `rows`."""
    if len(pairs) > MAX_SUPPORT or rows > MAX_SUPPORT:
        raise AlgorithmFailure("support exceeds the simulation budget")
    t = qsim.sample_index(t_marginal(pairs, cols), rng)
    return qsim.sample_index(s_given_t(pairs, rows, cols, t), rng), t


def _target_distance(target: Q.QuadIdeal, order: Q.QuadOrder) -> Decimal:
    for p in Q.principal_cycle(order):
        if p.ideal == target:
            return p.dist
    raise DomainError("target is not a reduced principal ideal")


def pidp_core_sample(target: Q.QuadIdeal, params: PidpParams, rng,
                     oracle: Optional[CycleOracle] = None):
    """One run of the distance circuit: (s, t), or RESAMPLE when t > p/n.

    The simulator reads the target's distance to lay out the level set; the
    measured values are all the post-processing sees.
    """
    order = Q.QuadOrder(params.delta)
    oracle = oracle or CycleOracle.from_order(order, params.N)
    a = _target_distance(target, order)
    rows, cols = params.m * params.p, params.p
    if rows > MAX_SUPPORT:
        raise AlgorithmFailure("support exceeds the simulation budget")
    x0, y0 = rng.randrange(rows), rng.randrange(cols)
    s, t = two_register_sample(pidp_level_set(oracle, a, x0, y0, rows, cols), rows, cols, rng)
    return RESAMPLE if t * params.delta.bit_length() > cols else (s, t)


def _window_search(order: Q.QuadOrder, target: Q.QuadIdeal, centre: Fraction, N: int) -> Optional[Fraction]:
    """Smallest grid point j/N in [centre - 1, centre + 1] with W(j/N) = target.

    The ideals met in the window are listed once by a rho walk; the predicate
    "W(x) is the target or comes after it" is monotone in x, so a binary search
    over the grid finds the first hit.
    """
    origin = Q.InfraPoint(order.unit(), Decimal(0))
    with localcontext(Q.PRECISION):
        lo_x, hi_x = centre - 1, centre + 1
        walk = [Q.infra_advance(origin, lo_x, order)]
        end = Q.to_decimal(hi_x)
        while True:
            nxt = Q.rho(walk[-1], order)
            if nxt.dist > end:
                break
            walk.append(nxt)
        # walk[0] sits at or before the window start, so it is not reached inside it
        hits = [p for p in walk[1:] if p.ideal == target]
        if not hits:
            return None
        first = hits[0].dist

        def at_or_after(j: int) -> bool:
            # both distances come from exact bookkeeping; allow rounding noise only
            return Q.infra_advance(origin, Fraction(j, N), order).dist >= first - TIE

        lo, hi = math.floor(lo_x * N), math.ceil(hi_x * N)
        if not at_or_after(hi):
            return None
        while lo < hi:
            mid = (lo + hi) // 2
            if at_or_after(mid):
                hi = mid
            else:
                lo = mid + 1
        return Fraction(lo, N)


@dataclass
class PidpRun:
    params: PidpParams
    result: Fraction
    rough: Fraction
    samples: list

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "result": str(float(self.result)),
                "rough": str(float(self.rough)), "samples": self.samples}


def pidp_solve(target: Q.QuadIdeal, delta: int, rng, params: Optional[PidpParams] = None,
               max_samples: int = MAX_SAMPLES) -> PidpRun:
    """Distance of a reduced principal ideal, modulo R, to within 1/N."""
    order = Q.QuadOrder(delta)
    if not order.real or not order.is_reduced(order.ideal(target.a, target.b)):
        raise DomainError("target must be a reduced ideal of a real order")
    if params is None:
        reg_run = regulator_quantum(delta, rng)
        params = pidp_params(delta, refine_regulator(delta, reg_run.estimate, reg_run.N))
    oracle = CycleOracle.from_order(order, params.N)
    reg = _dec_fraction(params.reg)
    mn = params.m * params.N
    accepted: list[tuple[int, int]] = []
    transcript = []
    for _ in range(max_samples):
        sample = pidp_core_sample(target, params, rng, oracle)
        transcript.append(sample if sample == RESAMPLE else list(sample))
        if sample == RESAMPLE:
            continue
        s2, t2 = sample
        for s1, t1 in accepted:
            if t1 == t2 == 0:
                continue
            g, x, y = numt.egcd(t1, t2)
            if g != 1:
                continue
            rough = Fraction(x * s1 + y * s2, mn) % reg
            found = _window_search(order, target, rough, params.N)
            if found is None:
                continue
            got = Q.infra_advance(Q.InfraPoint(order.unit(), Decimal(0)), found, order)
            if got.ideal != target:
                continue
            return PidpRun(params, found % reg, rough, transcript)
        accepted.append(sample)
    raise AlgorithmFailure(f"no distance within {max_samples} samples")


def break_bw_real(transcript: dict, rng, params: Optional[PidpParams] = None) -> Q.QuadIdeal:
    """Shared ideal of a real exchange from Alice's (ideal, error) and Bob's ideal."""
    delta = int(transcript["delta"])
    order = Q.QuadOrder(delta)
    alice, bob = transcript["messages"][0], transcript["messages"][1]
    run = pidp_solve(Q.QuadIdeal.from_json(alice["ideal"]), delta, rng, params)
    # W(result) is Alice's ideal, so the giant-step point there carries its exact distance
    exact = Q.infra_advance(Q.InfraPoint(order.unit(), Decimal(0)), run.result, order).dist
    secret = Fraction(exact) + Fraction(alice["error"])
    start = Q.InfraPoint(Q.QuadIdeal.from_json(bob["ideal"]), Decimal(0))
    c = Q.infra_advance(start, secret + Fraction(bob["error"]), order).ideal
    return c
