"""Seeded batch experiments: each one wires a cryptosystem to its attack.

A trial function takes (params, rng) and returns (success, record).  `run`
derives one RNG per trial from the root seed, runs the trials (optionally on a
thread pool) and assembles the report in trial order.
"""
from __future__ import annotations

import hashlib
import json
import math
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Callable, Optional

from . import codes, ggh, grover, hsp, numt, otu, pkc
from . import hallgren as H
from . import ntru as NT
from . import quad as Q
from .errors import AlgorithmFailure, AmbiguousDecryption, DomainError
from .models import ExperimentReport


def trial_seed(root: int, i: int) -> int:
    """Counter-based per-trial seed, independent of scheduling order."""
    return int.from_bytes(hashlib.sha256(f"{root}:{i}".encode()).digest()[:8], "big")


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    ph = successes / trials
    denom = 1 + z * z / trials
    centre = (ph + z * z / (2 * trials)) / denom
    half = z * math.sqrt(ph * (1 - ph) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass(frozen=True)
class Experiment:
    name: str
    trial: Callable[[dict, random.Random], tuple[bool, dict]]
    defaults: dict
    threshold: Callable[[dict], Optional[float]]
    note: str
    help: str = ""
    choices: dict = field(default_factory=dict)


EXPERIMENTS: dict[str, Experiment] = {}


def experiment(name, defaults, threshold, note, help="", choices=None):
    thr = threshold if callable(threshold) else (lambda _p, t=threshold: t)

    def wrap(fn):
        EXPERIMENTS[name] = Experiment(name, fn, dict(defaults), thr, note, help, choices or {})
        return fn
    return wrap


def _ints(xs) -> list[str]:
    return [str(x) for x in xs]


# -- number theory and Shor ---------------------------------------------------------


@experiment("factor", {"n": 15}, 1.0, "complete factorization under retries",
            help="factor n with the period-finding reduction")
def _factor(p, rng):
    factors = hsp.full_factor(p["n"], rng)
    ok = numt.product(q ** e for q, e in factors) == p["n"] and all(numt.is_prime(q) for q, _ in factors)
    return ok, {"factors": [[str(q), e] for q, e in factors]}


@experiment("order", {"a": 2, "n": 15}, 1.0, "exact multiplicative order",
            help="order of a modulo n by period finding")
def _order(p, rng):
    r = hsp.find_order(p["a"], p["n"], rng)
    return r == numt.multiplicative_order(p["a"], p["n"]), {"order": str(r)}


@experiment("dlog", {"p": 101}, 1.0, "exact discrete logarithm",
            help="discrete log of a random power of a generator modulo a prime p")
def _dlog(p, rng):
    q = p["p"]
    if not numt.is_prime(q):
        raise DomainError("p must be prime")
    g = pkc.find_generator(q)
    x = rng.randrange(q - 1)
    got = hsp.dlog(g, pow(g, x, q), q - 1, hsp.MultiplicativeGroup(q), rng)
    return got == x, {"g": str(g), "x": str(x), "recovered": str(got)}


# -- RSA, Rabin, ElGamal, Diffie-Hellman ------------------------------------------------


@experiment("rsa-demo", {"bits": 16}, 1.0, "roundtrip identity", help="RSA encrypt/decrypt")
def _rsa_demo(p, rng):
    key = pkc.rsa_keygen(p["bits"], rng)
    m = rng.randrange(key.n)
    back = pkc.rsa_decrypt(key, pkc.rsa_encrypt(key.public, m))
    return back == m, {"key": key.public.to_json(), "m": str(m)}


@experiment("rsa-attack", {"bits": 12, "mode": "factor"}, 1.0, "key or plaintext recovered on every instance",
            help="break RSA by factoring n or by the order of the ciphertext",
            choices={"mode": ["factor", "direct"]})
def _rsa_attack(p, rng):
    key = pkc.rsa_keygen(p["bits"], rng)
    m = rng.randrange(2, key.n)
    while math.gcd(m, key.n) != 1:
        m = rng.randrange(2, key.n)
    c = pkc.rsa_encrypt(key.public, m)
    if p["mode"] == "factor":
        broken = pkc.rsa_break_factor(key.public, rng)
        ok = {broken.p, broken.q} == {key.p, key.q} and pkc.rsa_decrypt(broken, c) == m
        return ok, {"key": key.public.to_json(), "factors": _ints([broken.p, broken.q])}
    got = pkc.rsa_break_direct(key.public, c, rng)
    return got == m, {"key": key.public.to_json(), "m": str(m), "recovered": str(got)}


@experiment("rabin-demo", {"bits": 24, "redundancy": 16}, 0.99, "unique decryption rate",
            help="Rabin roundtrip with trailing-zero redundancy")
def _rabin_demo(p, rng):
    key = pkc.rabin_keygen(p["bits"], rng)
    r = p["redundancy"]
    while True:
        m = pkc.rabin_encode(rng.randrange(1, max(2, key.n >> r)), r)
        if m < key.n and math.gcd(m, key.n) == 1:
            break
    try:
        back = pkc.rabin_decrypt(key, pkc.rabin_encrypt(key.public, m), r)
    except AmbiguousDecryption as exc:
        return False, {"n": str(key.n), "m": str(m), "error": str(exc)}
    return back == m, {"n": str(key.n), "m": str(m)}


@experiment("rabin-factor", {"bits": 16}, 1.0, "true factor from the square-root oracle (mean calls below 6)",
            help="factor a Rabin modulus with a decryption oracle")
def _rabin_factor(p, rng):
    key = pkc.rabin_keygen(p["bits"], rng)
    stats = {}
    d = pkc.rabin_oracle_to_factor(key.n, pkc.random_root_oracle(key, rng), rng, stats)
    return d in (key.p, key.q), {"n": str(key.n), "factor": str(d), "oracle_calls": stats["oracle_calls"]}


@experiment("elgamal-attack", {"bits": 12}, 1.0, "plaintext recovered on every instance",
            help="break ElGamal with the quantum discrete log")
def _elgamal(p, rng):
    key = pkc.elgamal_keygen(p["bits"], rng)
    m = rng.randrange(1, key.p)
    got = pkc.elgamal_break(key.public, pkc.elgamal_encrypt(key.public, m, rng), rng)
    return got == m, {"key": key.public.to_json(), "m": str(m), "recovered": str(got)}


@experiment("dh-attack", {"bits": 12}, 1.0, "shared key recovered on every instance",
            help="recover a Diffie-Hellman shared key from the transcript")
def _dh(p, rng):
    t, k_a, _ = pkc.dh_exchange(pkc.dh_params(p["bits"], rng), rng)
    got = pkc.dh_break(t, rng)
    return got == k_a, {"transcript": t.to_json(), "recovered": str(got)}


# -- codes and lattices --------------------------------------------------------------------


@experiment("mceliece-attack", {"code": "hamming74", "mode": "classical"}, 1.0,
            "plaintext recovered on every instance", help="information-set decoding against McEliece",
            choices={"mode": ["classical", "grover"]})
def _mceliece(p, rng):
    key = codes.mceliece_keygen(codes.parse_code(p["code"]), rng)
    m = rng.randrange(1 << key.public.rows)
    c = codes.mceliece_encrypt(key.public, m, key.t, rng)
    stats = {}
    got = codes.isd_attack(key.public, c, key.t, rng, p["mode"], stats)
    return got == m, {"m": str(m), "recovered": str(got), "stats": stats}


def _ggh_threshold(p):
    return {"embed": 0.8, "nguyen": 1.0}.get(p["method"])


@experiment("ggh-attack", {"dim": 4, "sigma": 1, "method": "embed"}, _ggh_threshold,
            "embedding at least 0.8; Nguyen residue exact; rounding and nearest plane are informational",
            help="attack GGH ciphertexts", choices={"method": ["embed", "round", "nearest-plane", "nguyen"]})
def _ggh(p, rng):
    key = ggh.ggh_keygen(p["dim"], rng, p["sigma"])
    m = tuple(rng.randint(-50, 50) for _ in range(p["dim"]))
    c = ggh.ggh_encrypt(key.public, p["sigma"], m, rng)
    method = p["method"]
    if method == "nguyen":
        res = ggh.attack_nguyen(key.public, p["sigma"], c)
        mod = 2 * p["sigma"]
        ok = tuple(x % mod for x in res.m_mod) == tuple(x % mod for x in m)
        return ok, {"m": list(m), "m_mod": list(res.m_mod)}
    attack = {"embed": lambda: ggh.attack_embed(key.public, c, p["sigma"]),
              "round": lambda: ggh.attack_round(key.public, c),
              "nearest-plane": lambda: ggh.attack_nearest_plane(key.public, c)}[method]
    got = attack()
    return got is not None and tuple(got) == m, {"m": list(m), "recovered": None if got is None else list(got)}


def _ntru_params(p) -> NT.NtruParams:
    if p["preset"] not in NT.PRESETS:
        raise DomainError(f"unknown preset {p['preset']!r}")
    return NT.PRESETS[p["preset"]]


@experiment("ntru-attack", {"preset": "toy7"}, 0.6, "rotation-equivalent key on at least 60% of keys",
            help="LLL key recovery against NTRU")
def _ntru_attack(p, rng):
    key = NT.ntru_keygen(_ntru_params(p), rng)
    res = NT.ntru_lattice_attack(key.public(), rng)
    return res.f in NT.rotation_class(key.f), {"h": list(key.h.coeffs), "f": list(res.f.coeffs)}


@experiment("ntru-failures", {"preset": "toy7"}, 0.98, "roundtrip rate at least 0.98",
            help="NTRU decryption failures classified against the roundtrip")
def _ntru_failures(p, rng):
    params = _ntru_params(p)
    key = NT.ntru_keygen(params, rng)
    m = NT.random_message(params, rng)
    r = NT.sample_L(params.N, params.dr, params.dr, rng)
    ok = NT.ntru_decrypt(key, NT.ntru_encrypt(key, m, rng, r)) == m
    return ok, {"class": NT.classify_failure(key.f, key.g, r, m, params)}


# -- quadratic orders -----------------------------------------------------------------------


@experiment("bw-imag", {"delta": -47, "a": 2, "b": 1}, 1.0, "shared ideal recovered on every run",
            help="break the imaginary-order exchange with the quantum discrete log (generator (a, b))")
def _bw_imag(p, rng):
    run = Q.bw_imaginary_exchange(p["delta"], Q.QuadIdeal(p["a"], p["b"]), rng)
    got = Q.attack_bw_imaginary(run.transcript, rng)
    return got == run.shared_a, {"transcript": run.transcript, "recovered": got.to_json()}


@experiment("bw-real", {"delta": 29}, 0.9, "shared ideal recovered on at least 90% of runs",
            help="break the real-order exchange with the distance algorithm")
def _bw_real(p, rng):
    run = Q.bw_real_exchange(p["delta"], rng)
    got = H.break_bw_real(run.transcript, rng)
    return got == run.shared_a, {"transcript": run.transcript, "recovered": got.to_json()}


def _circular_gap(x: Fraction, y: Fraction, reg: Fraction) -> Fraction:
    d = (x - y) % reg
    return min(d, reg - d)


@experiment("regulator", {"delta": 5, "strict": False}, 0.5, "within 1/N of R on at least half the runs",
            help="quantum regulator estimate")
def _regulator(p, rng):
    run = H.regulator_quantum(p["delta"], rng, strict=p["strict"])
    reg = Q.regulator_brute(p["delta"])
    gap = abs(run.estimate - Fraction(reg))
    return gap < Fraction(1, run.N), {"run": run.to_json(), "regulator": str(reg), "error": str(float(gap))}


@experiment("pidp", {"delta": 13, "ideal": ""}, 1.0, "distance within 1/N modulo R for every target",
            help="distance of a reduced principal ideal 'a,b' (default: a random cycle ideal)")
def _pidp(p, rng):
    order = Q.QuadOrder(p["delta"])
    cycle = Q.principal_cycle(order)
    if p["ideal"]:
        try:
            a, b = (int(x) for x in str(p["ideal"]).split(","))
        except ValueError:
            raise DomainError("ideal must be given as a,b") from None
        hits = [pt for pt in cycle if pt.ideal == Q.QuadIdeal(a, b)]
        if not hits:
            raise DomainError(f"({a}, {b}) is not a reduced principal ideal of discriminant {p['delta']}")
        target = hits[0]
    else:
        target = rng.choice(cycle)
    run = H.pidp_solve(target.ideal, p["delta"], rng)
    reg = Fraction(run.params.reg)
    gap = _circular_gap(run.result, Fraction(target.dist), reg)
    return gap < Fraction(1, run.params.N), {"target": target.to_json(), "run": run.to_json(),
                                            "error": str(float(gap))}


# -- knapsack and search ----------------------------------------------------------------------


@experiment("otu-demo", {"n": 5, "k": 2}, 1.0, "every message roundtrips; density reported against 1 and 0.9408",
            help="knapsack scheme with quantum discrete-log key generation")
def _otu(p, rng):
    key = otu.qpkc_keygen(p["n"], p["k"], rng)
    ok = all(otu.qpkc_decrypt(key, otu.qpkc_encrypt(key.public, m)) == m
             for m in range(math.comb(p["n"], p["k"])))
    return ok, {"key": key.public.to_json(), "density": otu.density_report(key.public)}


@experiment("grover-bench", {"n": 256}, 1.0, "marked item found; oracle calls against a classical scan",
            help="Grover search for one random marked index")
def _grover(p, rng):
    target = rng.randrange(p["n"])
    stats = {}
    found = grover.grover_search(grover.SearchProblem(p["n"], lambda i: i == target, 1), rng, stats)
    return found == target, {"target": target, "oracle_calls": stats.get("oracle_calls", 0),
                             "classical_scan_calls": target + 1}


# -- runner ------------------------------------------------------------------------------------


def _coerce(name: str, value, default):
    if isinstance(default, bool):
        if isinstance(value, str):
            if value.lower() not in ("true", "false", "1", "0"):
                raise DomainError(f"{name} must be a boolean")
            return value.lower() in ("true", "1")
        return bool(value)
    if isinstance(default, int):
        try:
            return int(value)
        except (TypeError, ValueError):
            raise DomainError(f"{name} must be an integer") from None
    return str(value)


def resolve_params(exp: Experiment, params: dict) -> dict:
    unknown = set(params) - set(exp.defaults)
    if unknown:
        raise DomainError(f"unknown parameters for {exp.name}: {', '.join(sorted(unknown))}")
    out = {k: _coerce(k, params.get(k, v), v) for k, v in exp.defaults.items()}
    for k, allowed in exp.choices.items():
        if out[k] not in allowed:
            raise DomainError(f"{k} must be one of {', '.join(allowed)}")
    return out


def _one_trial(exp: Experiment, params: dict, seed: int, i: int) -> tuple[bool, bool, dict]:
    s = trial_seed(seed, i)
    try:
        ok, record = exp.trial(params, random.Random(s))
        failed = False
    except AlgorithmFailure as exc:
        ok, record, failed = False, {"error": f"{type(exc).__name__}: {exc}"}, True
    return ok, failed, {"trial": i, "seed": str(s), "success": bool(ok), **record}


def _plain(x):
    """JSON-safe copy: Decimal and Fraction become decimal strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (Decimal, Fraction)):
        return str(x)
    return x


def run(name: str, params: Optional[dict] = None, seed: int = 0, trials: int = 1,
        jobs: int = 1) -> ExperimentReport:
    if name not in EXPERIMENTS:
        raise DomainError(f"unknown experiment {name!r}")
    if trials < 1 or jobs < 1:
        raise DomainError("trials and jobs must be positive")
    exp = EXPERIMENTS[name]
    params = resolve_params(exp, params or {})
    start = time.perf_counter()
    if jobs == 1:
        results = [_one_trial(exp, params, seed, i) for i in range(trials)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda i: _one_trial(exp, params, seed, i), range(trials)))
    wall = time.perf_counter() - start
    successes = sum(ok for ok, _, _ in results)
    threshold = exp.threshold(params)
    rate = successes / trials
    return ExperimentReport(
        name=name, parameters=params, seed=str(seed), trials=trials, successes=successes,
        success_rate=rate, confidence_interval=wilson_interval(successes, trials),
        threshold=threshold, threshold_note=exp.note,
        meets_threshold=threshold is None or rate >= threshold,
        algorithm_failures=sum(f for _, f, _ in results), wall_time=wall,
        records=[_plain(r) for _, _, r in results])


def report_json(report: ExperimentReport, timing: bool = False) -> str:
    return json.dumps(report.to_dict(timing), sort_keys=True, indent=2, ensure_ascii=False) + "\n"
