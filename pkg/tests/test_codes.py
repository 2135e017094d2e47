import itertools
import math
import random
import statistics

import pytest
from hypothesis import given, settings, strategies as st

from qcrypt import codes
from qcrypt.codes import BitMatrix
from qcrypt.errors import AttackBudgetExceeded, DecodeError, DomainError, NotInvertible


# -- independent reference arithmetic -------------------------------------------------

def clmul(a, b):
    out = 0
    for i in range(b.bit_length()):
        if (b >> i) & 1:
            out ^= a << i
    return out


def gf2_polymod(a, m):
    while a.bit_length() >= m.bit_length():
        a ^= m << (a.bit_length() - m.bit_length())
    return a


def is_irreducible_bruteforce(poly):
    d = poly.bit_length() - 1
    return all(gf2_polymod(poly, f) for f in range(2, 1 << (d // 2 + 1)) if f.bit_length() - 1 >= 1)


def ref_mul(field, a, b):
    return gf2_polymod(clmul(a, b), field.poly)


def poly_mulmod(field, a, b, g):
    """Product of coefficient lists a, b over GF(2^l), reduced modulo monic-or-not g."""
    prod = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            prod[i + j] ^= ref_mul(field, x, y)
    lead_inv = next(c for c in range(1, field.size) if ref_mul(field, c, g[-1]) == 1)
    s = len(g) - 1
    for top in range(len(prod) - 1, s - 1, -1):
        c = ref_mul(field, prod[top], lead_inv)
        if c:
            for j in range(s + 1):
                prod[top - s + j] ^= ref_mul(field, c, g[j])
    return (prod + [0] * s)[:s]


def brute_inverse_linear(field, g, alpha):
    s = len(g) - 1
    one = [1] + [0] * (s - 1)
    for coeffs in itertools.product(range(field.size), repeat=s):
        if poly_mulmod(field, [alpha, 1], list(coeffs), g) == one:
            return list(coeffs)
    return None


def span(rows):
    out = {0}
    for r in rows:
        out |= {v ^ r for v in out}
    return out


def goppa_15():
    field = codes.GF2m(4)
    g = next([c0, c1, 1] for c0 in range(1, 16) for c1 in range(16)
             if all(field.poly_eval([c0, c1, 1], a) for a in range(16)))
    alphas = list(range(1, 16))
    return codes.goppa_code(4, 2, g, alphas), g, alphas


# -- vectors and matrices --------------------------------------------------------------

def test_weight_and_distance_examples():
    assert codes.hamming_weight("1011") == 3
    assert codes.distance("1011", "1011") == 0
    assert codes.distance("101", "010") == 3 == codes.hamming_weight("111")
    with pytest.raises(DomainError):
        codes.distance("10", "101")


@given(st.integers(0, 2**20), st.integers(0, 2**20))
def test_distance_is_weight_of_xor(x, y):
    assert codes.distance(x, y) == codes.hamming_weight(x ^ y)
    assert codes.hamming_weight(x) == sum(codes.to_list(x, 21))


def random_matrix(rng, r, c):
    return BitMatrix(r, c, tuple(rng.getrandbits(c) for _ in range(r)))


def test_rank_inverse_solve_against_enumeration(rng):
    for _ in range(60):
        r, c = rng.randint(1, 6), rng.randint(1, 7)
        m = random_matrix(rng, r, c)
        sp = span(m.bits)
        assert len(sp) == 2 ** m.rank()
        for v in rng.sample(range(1 << c), min(8, 1 << c)):
            x = codes.solve_left(m, v)
            assert (x is not None) == (v in sp)
            if x is not None:
                assert m.vec_mul(x) == v
        ker = codes.kernel(m)
        assert len(ker) == c - m.rank()
        for v in ker:
            assert all((row & v).bit_count() % 2 == 0 for row in m.bits)
        if r == c:
            if m.rank() == r:
                assert m @ m.inverse() == BitMatrix.identity(r)
            else:
                with pytest.raises(NotInvertible):
                    m.inverse()


def test_bitmatrix_validation_and_json():
    with pytest.raises(DomainError):
        BitMatrix(2, 3, (1,))
    with pytest.raises(DomainError):
        BitMatrix(1, 2, (4,))
    m = BitMatrix.from_lists([[1, 0, 1], [0, 1, 1]])
    assert m.to_lists() == [[1, 0, 1], [0, 1, 1]]
    assert BitMatrix.from_json(m.to_json()) == m
    assert m.transpose().transpose() == m
    assert m.entry(0, 2) == 1 and m.entry(1, 0) == 0


def test_permutation_matrix():
    p = BitMatrix.permutation([2, 0, 1])
    v = codes.from_list([1, 1, 0])
    assert codes.to_list(p.vec_mul(v), 3) == [1, 0, 1]
    assert p @ p.transpose() == BitMatrix.identity(3)


# -- fields and Goppa codes -----------------------------------------------------------

@pytest.mark.parametrize("l", range(1, 9))
def test_reduction_polys_irreducible(l):
    assert is_irreducible_bruteforce(codes.REDUCTION_POLYS[l])


@pytest.mark.parametrize("l", [2, 3, 4, 5])
def test_field_arithmetic_matches_reference(l):
    f = codes.GF2m(l)
    for a in f.elements():
        for b in f.elements():
            assert f.mul(a, b) == ref_mul(f, a, b)
        if a:
            assert f.mul(a, f.inv(a)) == 1
    with pytest.raises(NotInvertible):
        f.inv(0)


def test_inverse_linear_mod_matches_bruteforce(rng):
    for l, s in [(3, 1), (3, 2), (4, 2), (2, 3)]:
        f = codes.GF2m(l)
        for _ in range(5):
            g = [rng.randrange(f.size) for _ in range(s)] + [rng.randrange(1, f.size)]
            for a in f.elements():
                if f.poly_eval(g, a):
                    assert codes.inverse_linear_mod(f, g, a) == brute_inverse_linear(f, g, a)
                else:
                    with pytest.raises(DomainError):
                        codes.inverse_linear_mod(f, g, a)


def test_goppa_15_examples():
    code, g, alphas = goppa_15()
    assert code.n == 15 and code.k >= 15 - 4 * 2
    assert code.distance >= 3 and code.distance > 2 * code.t


def test_goppa_codewords_satisfy_congruence():
    code, g, alphas = goppa_15()
    f = codes.GF2m(4)
    invs = [brute_inverse_linear(f, g, a) for a in alphas]
    for word in code.codewords():
        total = [0, 0]
        for j, inv in enumerate(invs):
            if (word >> j) & 1:
                total = [x ^ y for x, y in zip(total, inv)]
        assert total == [0, 0]
    # and the code is the whole solution space: count solutions by brute force
    solutions = sum(
        1 for v in range(1 << 15)
        if all(c == 0 for c in _sum_invs(invs, v))
    )
    assert solutions == 2 ** code.k


def _sum_invs(invs, v):
    total = [0] * len(invs[0])
    for j, inv in enumerate(invs):
        if (v >> j) & 1:
            total = [x ^ y for x, y in zip(total, inv)]
    return total


def test_goppa_small_distance():
    f = codes.GF2m(3)
    g = [1, 1]  # x + 1, root at 1
    alphas = [a for a in f.elements() if f.poly_eval(g, a)]
    code = codes.goppa_code(3, 1, g, alphas)
    assert len(alphas) == 7 and code.distance >= 2
    with pytest.raises(DomainError):
        codes.goppa_code(3, 1, g, list(range(7)))


def test_goppa_dimension_bound_random_draws():
    rng = random.Random(7)
    draws = 0
    while draws < 50:
        l, s = rng.choice([(3, 1), (3, 2), (4, 1), (4, 2), (4, 3), (5, 2)])
        f = codes.GF2m(l)
        g = [rng.randrange(f.size) for _ in range(s)] + [1]
        roots_free = [a for a in f.elements() if f.poly_eval(g, a)]
        if len(roots_free) <= l * s + 1:
            continue
        n = rng.randint(l * s + 1, len(roots_free))
        alphas = rng.sample(roots_free, n)
        try:
            code = codes.goppa_code(l, s, g, alphas)
        except DomainError:
            continue
        assert code.k >= n - l * s
        if code.distance is not None:
            assert code.distance >= s + 1
        draws += 1


def test_hamming_distance_by_enumeration():
    h = codes.hamming74()
    words = list(h.codewords())
    assert len(set(words)) == 16
    assert min(codes.distance(a, b) for a in words for b in words if a != b) == 3
    assert h.t == 1


def test_code_json_roundtrip():
    code, _, _ = goppa_15()
    back = codes.LinearCode.from_json(code.to_json())
    assert back.generator == code.generator and back.t == code.t


def test_parse_code():
    assert codes.parse_code("hamming74").n == 7
    c = codes.parse_code("goppa:4,2,3")
    assert c.t >= 1 and c.k >= c.n - 8
    with pytest.raises(DomainError):
        codes.parse_code("reed-muller")


# -- McEliece --------------------------------------------------------------------

def test_keygen_identity_gives_generator(rng):
    h = codes.hamming74()
    key = codes.mceliece_keygen(h, rng, BitMatrix.identity(4), BitMatrix.identity(7))
    assert key.public == h.generator


def test_keygen_random_properties(rng):
    code, _, _ = goppa_15()
    for _ in range(10):
        key = codes.mceliece_keygen(code, rng)
        assert key.public.rank() == code.k
        assert key.scrambler.rank() == code.k
        unpermuted = key.public @ key.perm.transpose()
        assert span(unpermuted.bits) == span(code.generator.bits)


def test_hamming_roundtrip_example(rng):
    h = codes.hamming74()
    key = codes.mceliece_keygen(h, rng)
    m = codes.from_list([1, 0, 1, 1])
    for _ in range(20):
        c = codes.mceliece_encrypt(key.public, m, 1, rng)
        assert codes.mceliece_decrypt(key, c) == m
    c0 = codes.mceliece_encrypt(key.public, m, 1, rng, error=0)
    assert c0 == key.public.vec_mul(m)
    assert codes.mceliece_decrypt(key, c0) == m


def test_goppa_roundtrips(rng):
    code, _, _ = goppa_15()
    key = codes.mceliece_keygen(code, rng)
    ok = 0
    for _ in range(500):
        m = rng.getrandbits(code.k)
        c = codes.mceliece_encrypt(key.public, m, key.t, rng)
        ok += codes.mceliece_decrypt(key, c) == m
    assert ok == 500


def test_decrypt_rejects_too_many_errors(rng):
    code, _, _ = goppa_15()
    key = codes.mceliece_keygen(code, rng)
    bad = next(e for e in (codes.random_weight_vector(15, 3, rng) for _ in range(1000))
               if code.syndrome(key.perm.transpose().vec_mul(e)) not in code.table)
    with pytest.raises(DecodeError):
        codes.mceliece_decrypt(key, codes.mceliece_encrypt(key.public, 5, 0, rng, error=bad))


def test_key_json_roundtrip(rng):
    key = codes.mceliece_keygen(codes.hamming74(), rng)
    back = codes.McElieceKey.from_json(key.to_json())
    c = codes.mceliece_encrypt(back.public, 9, 1, rng)
    assert codes.mceliece_decrypt(back, c) == 9
    pub = codes.McElieceKey.from_json(key.public_json())
    assert pub.code is None and pub.public == key.public


# -- attack -----------------------------------------------------------------------

def test_success_test_examples(rng):
    h = codes.hamming74()
    key = codes.mceliece_keygen(h, rng)
    m = 0b1101
    c = codes.mceliece_encrypt(key.public, m, 1, rng)
    assert codes.attack_success_test(c, m, key.public, 1)
    assert not any(codes.attack_success_test(c, w, key.public, 1) for w in range(16) if w != m)
    assert codes.attack_success_test(key.public.vec_mul(m), m, key.public, 1)


@pytest.mark.parametrize("which", ["hamming", "goppa"])
def test_success_test_unique_candidate(which, rng):
    code = codes.hamming74() if which == "hamming" else goppa_15()[0]
    assert code.distance > 2 * code.t
    for _ in range(100):
        key = codes.mceliece_keygen(code, rng)
        m = rng.getrandbits(code.k)
        c = codes.mceliece_encrypt(key.public, m, code.t, rng)
        passing = [w for w in range(1 << code.k) if codes.attack_success_test(c, w, key.public, code.t)]
        assert passing == [m]


@pytest.mark.parametrize("mode", ["classical", "grover"])
def test_isd_recovers_message(mode, rng):
    for code in [codes.hamming74(), goppa_15()[0]]:
        for _ in range(10):
            key = codes.mceliece_keygen(code, rng)
            m = rng.getrandbits(code.k)
            c = codes.mceliece_encrypt(key.public, m, code.t, rng)
            got = codes.isd_attack(key.public, c, code.t, rng, mode)
            assert got == m and codes.attack_success_test(c, got, key.public, code.t)


def test_isd_zero_error_first_invertible_subset(rng):
    key = codes.mceliece_keygen(codes.hamming74(), rng)
    for _ in range(30):
        stats = {}
        c = key.public.vec_mul(0b0110)
        assert codes.isd_attack(key.public, c, 1, rng, stats=stats) == 0b0110
        assert stats["subsets"] - stats["singular"] == 1


def test_isd_budget(rng):
    key = codes.mceliece_keygen(codes.hamming74(), rng)
    c = codes.mceliece_encrypt(key.public, 3, 1, rng)
    with pytest.raises(AttackBudgetExceeded):
        codes.isd_attack(key.public, c, 1, rng, max_iterations=0)
    with pytest.raises(DomainError):
        codes.isd_attack(key.public, c, 1, rng, mode="quantum-annealing")


def test_grover_mode_uses_fewer_evaluations(rng):
    h = codes.hamming74()
    means = {}
    for mode in ["classical", "grover"]:
        evals = []
        for _ in range(200):
            key = codes.mceliece_keygen(h, rng)
            m = rng.getrandbits(4)
            c = codes.mceliece_encrypt(key.public, m, 1, rng)
            stats = {}
            codes.isd_attack(key.public, c, 1, rng, mode, stats)
            evals.append(stats["predicate_evaluations"])
        means[mode] = statistics.mean(evals)
    assert means["grover"] < means["classical"]


@pytest.mark.parametrize("n,k,t", [(7, 4, 1), (15, 7, 2), (24, 12, 3)])
def test_subset_success_probability(n, k, t):
    rng = random.Random(n * 100 + k)
    errors = set(rng.sample(range(n), t))
    hits = sum(not errors & set(rng.sample(range(n), k)) for _ in range(10_000))
    assert abs(hits / 10_000 - codes.subset_success_probability(n, k, t)) < 0.03
    assert codes.subset_success_probability(n, k, t) == math.comb(n - t, k) / math.comb(n, k)
