import random
from itertools import product

import numpy as np
import pytest

from rlcc.gf import Field, find_irreducible, is_irreducible, matrix_rep, parse_descriptor, point_from_matrix


def test_smallest_irreducibles():
    assert find_irreducible(2, 2) == (1, 1, 1)
    assert find_irreducible(2, 3) == (1, 1, 0, 1)
    assert find_irreducible(3, 3) == (1, 2, 0, 1)
    assert find_irreducible(2, 4) == (1, 1, 0, 0, 1)


def test_reducible_rejected():
    # X^2 + 1 = (X + 1)^2 over GF(2)
    with pytest.raises(ValueError):
        Field(2, 2, (1, 0, 1))
    with pytest.raises(ValueError):
        Field(4, 2)  # not prime
    with pytest.raises(ValueError):
        Field(2, 2, (1, 1, 1, 1))  # wrong degree


def test_gf4_multiplication_table():
    f = Field(2, 2)
    # codes 0,1,2,3 stand for 0, 1, w, w+1
    assert f.mul(2, 2) == 3
    assert f.mul(2, 3) == 1
    for a in range(4):
        assert f.add(a, 0) == a
        assert f.mul(a, 1) == a


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (3, 3)])
def test_field_axioms_exhaustive(p, m):
    f = Field(p, m)
    n = f.n
    for a, b in product(range(n), repeat=2):
        assert f.add(a, b) == f.add(b, a)
        assert f.mul(a, b) == f.mul(b, a)
    for a, b, c in product(range(n), repeat=3):
        assert f.add(f.add(a, b), c) == f.add(a, f.add(b, c))
        assert f.mul(f.mul(a, b), c) == f.mul(a, f.mul(b, c))
        assert f.mul(a, f.add(b, c)) == f.add(f.mul(a, b), f.mul(a, c))
    for a in range(1, n):
        assert f.mul(a, f.inv(a)) == 1
    with pytest.raises(ZeroDivisionError):
        f.inv(0)


@pytest.mark.parametrize("p,m", [(2, 2), (2, 3), (3, 3)])
def test_frobenius_additive(p, m):
    f = Field(p, m)
    for a, b in product(range(f.n), repeat=2):
        lhs = f.pow(f.add(a, b), p)
        rhs = f.add(f.pow(a, p), f.pow(b, p))
        assert lhs == rhs


def test_codec_roundtrip_all_elements(gf27):
    for a in range(gf27.n):
        assert gf27.code_of(gf27.coeffs_of(a)) == a
        assert all(0 <= c < gf27.p for c in gf27.coeffs_of(a))


def test_embedding_is_subring(gf8):
    # closed under + and *, exactly p elements, ring homomorphism
    h = [gf8.embed(a) for a in range(gf8.p)]
    assert len(set(h)) == gf8.p
    for a in range(gf8.p):
        for b in range(gf8.p):
            assert gf8.add(h[a], h[b]) in h
            assert gf8.mul(h[a], h[b]) in h
            assert gf8.mul(h[a], h[b]) == gf8.embed((a * b) % gf8.p)
    assert gf8.embed(0) == 0
    for x in range(gf8.n):
        assert gf8.mul(gf8.embed(1), x) == x


def test_embed_characteristic_two(gf4):
    assert gf4.add(gf4.embed(1), gf4.embed(1)) == 0


def test_lift_h_vector(gf27):
    assert gf27.lift_h_vector((0, 1, 2)) == (0, 1, 2)
    with pytest.raises(ValueError):
        gf27.lift_h_vector((0, 3, 0))  # 3 is not a GF(3) scalar
    with pytest.raises(ValueError):
        gf27.embed(gf27.p)


def test_schoolbook_matches_tables():
    f = Field(3, 3)
    rng = random.Random(7)
    for _ in range(500):
        a, b = rng.randrange(f.n), rng.randrange(f.n)
        assert f.mul(a, b) == f._mul_schoolbook(a, b)


def test_matrix_rep_roundtrip(gf4):
    rng = random.Random(1)
    assert matrix_rep(gf4, (0, 0)) == ((0, 0), (0, 0))
    # x = (w, 1): rows are the coefficient vectors (0,1) and (1,0)
    assert matrix_rep(gf4, (2, 1)) == ((0, 1), (1, 0))
    for _ in range(1000):
        pt = tuple(rng.randrange(gf4.n) for _ in range(gf4.m))
        assert point_from_matrix(gf4, matrix_rep(gf4, pt)) == pt


def test_descriptor_roundtrip(gf8):
    assert parse_descriptor(gf8.descriptor) == gf8
    assert parse_descriptor("2^3/1,1,0,1").irreducible == (1, 1, 0, 1)


def test_vector_ops_match_scalar():
    f = Field(17, 3)
    rng = random.Random(3)
    a = np.array([rng.randrange(f.n) for _ in range(400)], dtype=np.int64)
    b = np.array([rng.randrange(f.n) for _ in range(400)], dtype=np.int64)
    va, vs, vm = f.vec_add(a, b), f.vec_sub(a, b), f.vec_mul(a, b)
    for i in range(400):
        assert va[i] == f.add(int(a[i]), int(b[i]))
        assert vs[i] == f.sub(int(a[i]), int(b[i]))
        assert vm[i] == f.mul(int(a[i]), int(b[i]))
    t = rng.randrange(1, f.n)
    vsc = f.vec_scale(t, a)
    for i in range(400):
        assert vsc[i] == f.mul(t, int(a[i]))


def test_sum_elements_matches_scalar():
    f = Field(17, 3)
    rng = random.Random(4)
    arr = np.array(
        [[rng.randrange(f.n) for _ in range(50)] for _ in range(30)], dtype=np.int64
    )
    out = f.sum_elements(arr, axis=0)
    for j in range(50):
        acc = 0
        for i in range(30):
            acc = f.add(acc, int(arr[i, j]))
        assert out[j] == acc


def test_irreducibility_checker_agrees_with_known_counts():
    # 30 monic irreducible cubics over GF(5): (5^3 - 5) / 3
    count = sum(
        1
        for c0 in range(5)
        for c1 in range(5)
        for c2 in range(5)
        if is_irreducible((c0, c1, c2, 1), 5)
    )
    assert count == (5**3 - 5) // 3
