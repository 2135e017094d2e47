import itertools
import random

import pytest

from qcrypt import ggh
from qcrypt import lattice as L
from qcrypt.errors import AttackFailed, DomainError


def message(rng, dim):
    return tuple(rng.randint(-50, 50) for _ in range(dim))


def test_keygen_unscrambled_is_private(rng):
    key = ggh.ggh_keygen(2, rng, scramble=False)
    assert key.public == key.private


def test_keygen_invariants(rng):
    for _ in range(30):
        key = ggh.ggh_keygen(4, rng)
        u = key.transform
        assert abs(L.determinant(u)) == 1
        assert tuple(L.combine(row, key.private.rows) for row in u) == key.public.rows
        assert abs(L.determinant(key.public.rows)) == abs(L.determinant(key.private.rows))
        assert L.orthogonality_defect(key.private) < L.orthogonality_defect(key.public)
        assert ggh.rounding_radius(key.private) * key.sigma < 0.5
    with pytest.raises(DomainError):
        ggh.ggh_keygen(1, rng)


def test_defect_ordering_before_resampling():
    rng = random.Random(11)
    good = 0
    for _ in range(100):
        r = [[10 * (i == j) + rng.randint(-4, 4) for j in range(4)] for i in range(4)]
        if L.determinant(r) == 0:
            continue
        b = [L.combine(row, r) for row in ggh.random_unimodular(4, rng)]
        good += L.orthogonality_defect(r) < L.orthogonality_defect(b)
    assert good >= 95


def test_zero_error_roundtrip(rng):
    key = ggh.ggh_keygen(4, rng)
    for _ in range(20):
        m = message(rng, 4)
        c = ggh.ggh_encrypt(key.public, 1, m, rng, error=(0, 0, 0, 0))
        assert ggh.ggh_decrypt(key, c, allow_zero_error=True) == m


def test_roundtrip_rate(rng):
    key = ggh.ggh_keygen(4, rng, k=10)
    ok = 0
    for _ in range(500):
        m = message(rng, 4)
        ok += ggh.ggh_decrypt(key, ggh.ggh_encrypt(key.public, 1, m, rng)) == m
    assert ok / 500 >= 0.99


def test_failure_detection_never_silent():
    rng = random.Random(99)
    keys = [ggh.ggh_keygen(4, rng, exact_decryption=False) for _ in range(20)]
    flagged = honest = wrong_honest = 0
    for i in range(10_000):
        key = keys[i % len(keys)]
        m = message(rng, 4)
        e = tuple(rng.choice([-7, -3, -2, -1, 1, 2, 3, 7]) for _ in range(4))
        c = ggh.ggh_encrypt(key.public, 1, m, rng, error=e)
        out = ggh.ggh_decrypt(key, c)
        if isinstance(out, ggh.DecryptFailure):
            flagged += 1
            assert not out
            continue
        # whatever is returned, c must be a valid encryption of it
        assert all(abs(x) == 1 for x in L.sub(c, L.combine(out, key.public.rows)))
        if all(abs(x) == 1 for x in e):
            honest += 1
            wrong_honest += out != m
    assert flagged > 0 and honest > 0
    # without the exact-decryption check on R, honest ciphertexts can still
    # round to a neighbouring valid encryption; that stays rare
    assert wrong_honest / honest < 0.01


def test_json_roundtrip(rng):
    key = ggh.ggh_keygen(3, rng)
    back = ggh.GghKeyPair.from_json(key.to_json())
    assert back == key
    pub = ggh.GghKeyPair.from_json(key.public_key().to_json())
    assert pub.private is None and pub.public == key.public


# -- attacks ---------------------------------------------------------------------

def test_attacks_without_error(rng):
    key = ggh.ggh_keygen(4, rng)
    m = message(rng, 4)
    c = L.combine(m, key.public.rows)
    assert ggh.attack_round(key.public, c) == m
    assert ggh.attack_nearest_plane(key.public, c) == m


def test_orthogonalizable_dim2_always_broken(rng):
    for _ in range(30):
        key = ggh.ggh_keygen(2, rng, k=20)
        # LLL recovers a nearly orthogonal basis; rounding then agrees with exact CVP
        m = message(rng, 2)
        c = ggh.ggh_encrypt(key.public, 1, m, rng)
        assert L.cvp_brute(key.public, c) == L.combine(m, key.public.rows)
        assert ggh.attack_round(key.public, c) == m
        assert ggh.attack_nearest_plane(key.public, c) == m


def test_nearest_plane_at_least_rounding():
    rng = random.Random(5)
    wins = {"round": 0, "plane": 0}
    for _ in range(300):
        key = ggh.ggh_keygen(4, rng, exact_decryption=False)
        m = message(rng, 4)
        c = ggh.ggh_encrypt(key.public, 1, m, rng)
        wins["round"] += ggh.attack_round(key.public, c) == m
        wins["plane"] += ggh.attack_nearest_plane(key.public, c) == m
    assert wins["plane"] >= wins["round"]


def test_embedding_attack():
    rng = random.Random(6)
    ok = 0
    for _ in range(200):
        key = ggh.ggh_keygen(4, rng)
        m = message(rng, 4)
        c = ggh.ggh_encrypt(key.public, 1, m, rng)
        try:
            got = ggh.attack_embed(key.public, c, 1)
        except AttackFailed:
            continue
        err = L.sub(c, L.combine(got, key.public.rows))
        assert all(abs(x) == 1 for x in err)
        ok += got == m
    assert ok / 200 >= 0.8


def test_embedding_zero_error(rng):
    key = ggh.ggh_keygen(3, rng)
    m = message(rng, 3)
    c = L.combine(m, key.public.rows)
    assert ggh.attack_embed(key.public, c) == m


def brute_solve_mod(rows, y, mod):
    d = len(rows)
    return sorted(x for x in itertools.product(range(mod), repeat=d)
                  if all(v % mod == 0 for v in L.sub(y, L.combine(x, rows))))


@pytest.mark.parametrize("mod", [2, 3, 4, 6, 8, 9, 12])
def test_solve_mod_matches_bruteforce(mod):
    rng = random.Random(mod)
    for _ in range(25):
        d = rng.randint(1, 3)
        rows = [[rng.randint(-6, 6) for _ in range(d)] for _ in range(d)]
        y = [rng.randint(-20, 20) for _ in range(d)]
        if rng.random() < 0.5:
            y = L.combine([rng.randint(0, mod) for _ in range(d)], rows)
        expected = brute_solve_mod(rows, y, mod)
        if len(expected) > 64:
            with pytest.raises(AttackFailed):
                ggh.solve_mod(rows, y, mod)
        else:
            assert sorted(ggh.solve_mod(rows, y, mod)) == expected


def test_nguyen_identity_and_mod_recovery():
    rng = random.Random(8)
    returned = 0
    for _ in range(100):
        key = ggh.ggh_keygen(3, rng)
        m = message(rng, 3)
        e = ggh.random_error(3, 1, rng)
        c = ggh.ggh_encrypt(key.public, 1, m, rng, error=e)
        s = (1,) * 3
        assert all(v % 2 == 0 for v in L.sub(L.add(c, s), L.combine(m, key.public.rows)))
        res = ggh.attack_nguyen(key.public, 1, c)
        returned += 1
        assert res.m_mod == tuple(x % 2 for x in m)
        assert res.m == m
    assert returned == 100


@pytest.mark.parametrize("sigma", [2, 3])
def test_nguyen_larger_sigma(sigma):
    rng = random.Random(sigma)
    for _ in range(20):
        key = ggh.ggh_keygen(3, rng, sigma=sigma)
        m = message(rng, 3)
        c = ggh.ggh_encrypt(key.public, sigma, m, rng)
        try:
            res = ggh.attack_nguyen(key.public, sigma, c)
        except AttackFailed:
            continue
        assert res.m_mod == tuple(x % (2 * sigma) for x in m)


def test_nguyen_at_least_embedding():
    rng = random.Random(12)
    wins = {"embed": 0, "nguyen": 0}
    for _ in range(100):
        key = ggh.ggh_keygen(5, rng)
        m = message(rng, 5)
        c = ggh.ggh_encrypt(key.public, 1, m, rng)
        for name, fn in [("embed", lambda: ggh.attack_embed(key.public, c, 1)),
                         ("nguyen", lambda: ggh.attack_nguyen(key.public, 1, c).m)]:
            try:
                wins[name] += fn() == m
            except AttackFailed:
                pass
    assert wins["nguyen"] >= wins["embed"]
