import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qcrypt import lattice as L
from qcrypt.errors import BoundError, DomainError, RankError


def random_basis(rng, d, bound=100):
    while True:
        rows = [tuple(rng.randint(-bound, bound) for _ in range(d)) for _ in range(d)]
        if L.determinant(rows) != 0:
            return rows


def box_bound(rows, radius):
    """Certified |x_i| bound for |x B| <= radius from the columns of B^-1."""
    d = len(rows)
    cols = [L.solve_rational(rows, tuple(int(i == j) for j in range(d))) for i in range(d)]
    # cols[i] = e_i B^-1, so x_j = <v, column j of B^-1> = sum_i v_i cols[i][j]
    worst = max(math.sqrt(sum(float(cols[i][j]) ** 2 for i in range(d))) for j in range(d))
    return math.ceil(radius * worst) + 1


def box_svp_norm2(rows):
    k = box_bound(rows, math.sqrt(min(L.norm2(r) for r in rows)))
    return min(L.norm2(L.combine(x, rows))
               for x in itertools.product(range(-k, k + 1), repeat=len(rows)) if any(x))


def box_cvp_dist2(rows, target):
    start = L.babai_round(rows, target)
    r = math.sqrt(L.norm2(L.sub(target, start))) + math.sqrt(L.norm2(target))
    k = box_bound(rows, r)
    return min(L.norm2(L.sub(target, L.combine(x, rows)))
               for x in itertools.product(range(-k, k + 1), repeat=len(rows)))


# -- Gram-Schmidt and linear algebra ---------------------------------------------------

def test_gram_schmidt_examples():
    bstar, mu = L.gram_schmidt([[1, 0], [0, 1]])
    assert bstar == [(1, 0), (0, 1)] and mu == [[], [0]]
    bstar, mu = L.gram_schmidt([[1, 1], [0, 2]])
    assert bstar[1] == (-1, 1)
    assert mu[1][0] == 1  # <(0,2),(1,1)> / <(1,1),(1,1)>


def test_gram_schmidt_orthogonal_and_reconstructs(rng):
    for _ in range(30):
        d = rng.randint(1, 5)
        rows = random_basis(rng, d, 20)
        bstar, mu = L.gram_schmidt(rows)
        for i, j in itertools.combinations(range(d), 2):
            assert L.dot(bstar[i], bstar[j]) == 0
        for i in range(d):
            rebuilt = list(bstar[i])
            for j in range(i):
                rebuilt = [a + mu[i][j] * b for a, b in zip(rebuilt, bstar[j])]
            assert tuple(rebuilt) == rows[i]


def test_dependent_rows_rejected():
    with pytest.raises(RankError):
        L.gram_schmidt([[1, 2], [2, 4]])
    with pytest.raises(RankError):
        L.IntBasis(((1, 2, 3), (2, 4, 6)))
    with pytest.raises(RankError):
        L.babai_round([[1, 2], [2, 4]], (1, 1))
    with pytest.raises(RankError):
        L.orthogonality_defect([[1, 2], [2, 4]])


def test_determinant_against_permutation_expansion(rng):
    for _ in range(30):
        d = rng.randint(1, 4)
        rows = [[rng.randint(-9, 9) for _ in range(d)] for _ in range(d)]
        ref = 0
        for perm in itertools.permutations(range(d)):
            inv = sum(perm[i] > perm[j] for i, j in itertools.combinations(range(d), 2))
            ref += (-1) ** inv * math.prod(rows[i][perm[i]] for i in range(d))
        assert L.determinant(rows) == ref


def test_solve_integer(rng):
    rows = random_basis(rng, 3, 10)
    x = (2, -1, 5)
    assert L.solve_integer(rows, L.combine(x, rows)) == x
    assert L.solve_integer([[2, 0], [0, 2]], (1, 0)) is None


def test_json_roundtrip():
    b = L.IntBasis(((1, 2), (3, 10**30)))
    assert L.IntBasis.from_json(b.to_json()) == b
    assert b.to_json()[1][1] == str(10**30)


# -- LLL ------------------------------------------------------------------------------

def test_lll_examples():
    assert L.lll_reduce([[1, 0], [0, 1]]).rows == ((1, 0), (0, 1))
    red = L.lll_reduce([[12, 2], [13, 4]])
    lam1 = math.sqrt(box_svp_norm2([(12, 2), (13, 4)]))
    assert L.norm(red[0]) <= math.sqrt(2) * lam1 + 1e-12
    assert abs(L.determinant(red.rows)) == abs(L.determinant([[12, 2], [13, 4]]))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 5), st.integers(0, 10**6))
def test_lll_properties(d, seed):
    rng = random.Random(seed)
    rows = random_basis(rng, d)
    red, u = L.lll_reduce(rows, return_transform=True)
    assert L.is_lll_reduced(red)
    assert abs(L.determinant(u)) == 1
    assert tuple(L.combine(ui, rows) for ui in u) == red.rows
    lam1 = math.sqrt(L.norm2(L.svp_brute(rows)))
    assert L.norm(red[0]) <= 2 ** ((d - 1) / 2) * lam1 + 1e-9


def test_lll_non_square_and_delta():
    rows = [[1, 2, 3, 4], [5, 6, 7, 9], [1, 0, 1, 0]]
    red = L.lll_reduce(rows, Fraction(99, 100))
    assert L.is_lll_reduced(red, Fraction(99, 100))
    with pytest.raises(DomainError):
        L.lll_reduce(rows, Fraction(1, 4))


def test_lll_usually_lowers_defect():
    rng = random.Random(3)
    better = 0
    for _ in range(100):
        rows = random_basis(rng, 4)
        better += L.orthogonality_defect(L.lll_reduce(rows)) <= L.orthogonality_defect(rows) + 1e-9
    assert better >= 95


# -- enumeration -----------------------------------------------------------------------

def test_svp_identity():
    v = L.svp_brute([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert L.norm2(v) == 1


def test_svp_matches_box_enumeration(rng):
    for _ in range(25):
        d = rng.randint(2, 3)
        rows = random_basis(rng, d, 12)
        v = L.svp_brute(rows)
        assert L.solve_integer(rows, v) is not None
        assert L.norm2(v) == box_svp_norm2(rows)


def test_cvp_examples():
    v = L.cvp_brute([[2, 0], [0, 2]], (1, 1))
    assert L.norm2(L.sub((1, 1), v)) == 2


def test_cvp_matches_box_enumeration(rng):
    for _ in range(20):
        d = rng.randint(2, 3)
        rows = random_basis(rng, d, 8)
        target = tuple(rng.randint(-30, 30) for _ in range(d))
        v = L.cvp_brute(rows, target)
        assert L.solve_integer(rows, v) is not None
        assert L.norm2(L.sub(target, v)) == box_cvp_dist2(rows, target)


def test_coeff_bound_checked():
    rows = [[1, 0], [1000, 1]]
    with pytest.raises(BoundError):
        L.svp_brute(rows, coeff_bound=3)
    assert L.norm2(L.svp_brute(rows, coeff_bound=5000)) == 1


def test_successive_minima():
    assert L.successive_minima_brute([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == [1, 1, 1]
    assert L.lattice_gap([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == 1
    assert L.successive_minima_brute([[1, 0], [0, 10]]) == [1, 10]
    assert L.lattice_gap([[1, 0], [0, 10]]) == 10


def test_successive_minima_definition(rng):
    for _ in range(15):
        rows = random_basis(rng, 3, 15)
        lam = L.successive_minima_brute(rows)
        assert lam == sorted(lam)
        assert lam[0] ** 2 == pytest.approx(box_svp_norm2(rows))
        # every vector shorter than lambda_2 is a multiple of one line
        short = L.short_vectors(rows, Fraction(lam[1] ** 2) - Fraction(1, 10**6))
        for a, b in itertools.combinations(short, 2):
            assert L.dot(a, b) ** 2 == L.norm2(a) * L.norm2(b)


# -- Babai ------------------------------------------------------------------------------

def test_babai_round_orthogonal_is_exact(rng):
    for _ in range(30):
        d = rng.randint(1, 4)
        rows = [tuple(rng.randint(1, 9) * (i == j) for j in range(d)) for i in range(d)]
        target = tuple(rng.randint(-50, 50) for _ in range(d))
        best = L.norm2(L.sub(target, L.cvp_brute(rows, target)))
        assert L.norm2(L.sub(target, L.babai_round(rows, target))) == best
        assert L.norm2(L.sub(target, L.babai_nearest_plane(rows, target))) == best


def test_babai_lattice_point_fixed(rng):
    rows = random_basis(rng, 4, 20)
    v = L.combine((3, -1, 0, 7), rows)
    assert L.babai_round(rows, v) == v
    assert L.babai_nearest_plane(rows, v) == v


def test_round_half_away():
    assert L.round_half_away(Fraction(1, 2)) == 1
    assert L.round_half_away(Fraction(-1, 2)) == -1
    assert L.round_half_away(Fraction(3, 2)) == 2
    assert L.round_half_away(Fraction(-7, 3)) == -2
    assert L.babai_round([[2, 0], [0, 2]], (1, -1)) == (2, -2)


def test_nearest_plane_never_beats_exact(rng):
    for _ in range(30):
        rows = random_basis(rng, 4, 10)
        target = tuple(rng.randint(-40, 40) for _ in range(4))
        exact = L.norm2(L.sub(target, L.cvp_brute(rows, target)))
        assert L.norm2(L.sub(target, L.babai_nearest_plane(rows, target))) >= exact


# -- measures and embedding ------------------------------------------------------------------

def test_orthogonality_defect():
    assert L.orthogonality_defect([[1, 0], [0, 1]]) == pytest.approx(1)
    assert L.orthogonality_defect([[1, 0], [1, 1]]) == pytest.approx(math.sqrt(2), rel=1e-12)


@given(st.integers(0, 10**6))
def test_defect_at_least_one(seed):
    rows = random_basis(random.Random(seed), 3, 50)
    assert L.orthogonality_defect(rows) >= 1 - 1e-12


def test_gaussian_heuristic():
    d = 2 * math.pi * math.e
    low, high = L.gaussian_heuristic(1, d)
    assert low == pytest.approx(1)
    for det, dim in [(1, 2), (10**6, 5), (7, 13)]:
        low, high = L.gaussian_heuristic(det, dim)
        assert high / low == pytest.approx(math.sqrt(2))
    # with alpha = q = 1, N = 1 the NTRU radius sqrt(N alpha q / (pi e)) is the high end for d = 2N
    n_, alpha, q = 1, 1, 1
    assert L.gaussian_heuristic(alpha**n_ * q**n_, 2 * n_)[1] == pytest.approx(
        math.sqrt(n_ * alpha * q / (math.pi * math.e)) * math.sqrt(2))
    with pytest.raises(DomainError):
        L.gaussian_heuristic(0, 3)


def test_embed_cvp(rng):
    rows = random_basis(rng, 3, 10)
    e0 = L.embed_cvp(rows, L.combine((1, 2, 3), rows))
    assert e0.d == 4 and e0.n == 4
    assert L.determinant(e0.rows) == L.determinant(rows)
    assert L.solve_integer(e0.rows, (0, 0, 0, 1)) is not None
    assert L.norm2(L.svp_brute(e0)) <= 1
