import itertools
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import Arith, has_root_free_factorization, poly_add, poly_mulmod
from sqcodes.errors import DivisionByZero, NotPrimePower, OutOfRange
from sqcodes.fq import f_add, f_inv, f_mul, field_new, smallest_irreducible

SMALL_Q = [2, 3, 4, 5, 7, 8, 9, 11, 16, 25, 27, 32, 49, 64, 81, 128, 243, 256]


def test_prime_field_basics():
    F = field_new(2)
    assert (F.p, F.e, F.q) == (2, 1, 2)
    assert f_mul(field_new(3), 2, 2) == 1
    assert f_inv(field_new(5), 3) == 2
    assert f_inv(F, 1) == 1


def test_f4_modulus_and_products():
    F = field_new(4)
    assert F.modulus == (1, 1, 1)  # X^2 + X + 1
    assert f_mul(F, 2, 2) == 3
    assert f_inv(F, 2) == 3


def test_bad_sizes():
    with pytest.raises(NotPrimePower):
        field_new(6)
    with pytest.raises(NotPrimePower):
        field_new(12)
    with pytest.raises(OutOfRange):
        field_new(2**16 + 1)
    with pytest.raises(OutOfRange):
        field_new(1)
    with pytest.raises(DivisionByZero):
        f_inv(field_new(7), 0)
    with pytest.raises(ZeroDivisionError):
        field_new(9).div(1, 0)


def test_field_bound_is_inclusive():
    F = field_new(2**16)
    assert F.q == 65536
    a = 12345
    assert F.mul(a, F.inv(a)) == 1


@pytest.mark.parametrize("p,e", [(2, 2), (2, 3), (2, 4), (2, 5), (3, 2), (3, 3), (5, 2), (7, 2)])
def test_modulus_is_lexicographically_smallest_irreducible(p, e):
    m = smallest_irreducible(p, e)
    assert has_root_free_factorization(m, p)
    # nothing earlier in (constant term first) lexicographic order is irreducible
    for low in itertools.product(range(p), repeat=e):
        cand = tuple(low) + (1,)
        if cand == m:
            break
        assert not has_root_free_factorization(cand, p)


def test_known_moduli():
    assert field_new(8).modulus == (1, 0, 1, 1)  # X^3 + X^2 + 1
    assert field_new(9).modulus == (1, 0, 1)
    assert field_new(16).modulus == (1, 0, 0, 1, 1)


@pytest.mark.parametrize("q", [4, 8, 9, 16, 25, 27])
def test_tables_match_polynomial_oracle(q):
    F = field_new(q)
    for a in range(q):
        for b in range(q):
            assert F.mul(a, b) == poly_mulmod(a, b, F.p, F.modulus)
            assert F.add(a, b) == poly_add(a, b, F.p, F.e)


@pytest.mark.parametrize("q", SMALL_Q)
def test_exp_log_round_trip(q):
    F = field_new(q)
    for x in range(1, q):
        assert F._exp[F._log[x]] == x
    g = F.generator
    seen = {F.pow(g, i) for i in range(q - 1)}
    assert len(seen) == q - 1
    assert F.pow(g, q - 1) == 1


@pytest.mark.parametrize("q", [2, 3, 4, 7, 8, 9, 16, 27, 31, 64, 125, 256, 65536, 65521])
def test_field_axioms_random(q):
    F = field_new(q)
    rng = random.Random(q)
    for _ in range(10_000):
        a, b, c = rng.randrange(q), rng.randrange(q), rng.randrange(q)
        assert F.add(a, b) == F.add(b, a)
        assert F.mul(a, b) == F.mul(b, a)
        assert F.add(F.add(a, b), c) == F.add(a, F.add(b, c))
        assert F.mul(F.mul(a, b), c) == F.mul(a, F.mul(b, c))
        assert F.mul(a, F.add(b, c)) == F.add(F.mul(a, b), F.mul(a, c))
        assert f_add(F, a, 0) == a
        assert F.add(a, F.neg(a)) == 0
        if a:
            assert F.mul(a, F.inv(a)) == 1
        p = F.p
        assert F.frobenius(F.add(a, b)) == F.add(F.frobenius(a), F.frobenius(b))
        assert F.pow(a, p) == F.frobenius(a)


@pytest.mark.parametrize("q", [2, 3, 4, 5, 8, 9, 16, 25, 27])
def test_sqrt_and_quadratics_exhaustive(q):
    F = field_new(q)
    squares = {F.mul(x, x) for x in range(q)}
    for a in range(q):
        r = F.sqrt(a)
        if a in squares:
            assert F.mul(r, r) == a
        else:
            assert r is None
    for a, b, c in itertools.product(range(q), repeat=3):
        t = F.solve_quadratic(a, b, c)
        has_root = any(F.add(F.add(F.mul(a, F.mul(x, x)), F.mul(b, x)), c) == 0 for x in range(q))
        if t is None:
            assert not has_root
        else:
            assert F.add(F.add(F.mul(a, F.mul(t, t)), F.mul(b, t)), c) == 0


@pytest.mark.parametrize("q", [2, 3, 4, 8, 9, 16, 27, 257])
def test_vectorised_ops_agree_with_scalar(q):
    F = field_new(q)
    rng = np.random.default_rng(q)
    a = rng.integers(0, q, 2000)
    b = rng.integers(0, q, 2000)
    a[:5] = 0
    b[3:8] = 0
    va, vm = F.vadd(a, b), F.vmul(a, b)
    for x, y, s, m in zip(a.tolist(), b.tolist(), va.tolist(), vm.tolist()):
        assert s == F.add(x, y)
        assert m == F.mul(x, y)


def test_list_helpers():
    F = field_new(9)
    x, y = [1, 2, 3, 4], [5, 6, 7, 8]
    assert F.axpy(x, 2, y) == [F.sub(a, F.mul(2, b)) for a, b in zip(x, y)]
    assert F.dot(x, y) == F.add(F.add(F.mul(1, 5), F.mul(2, 6)), F.add(F.mul(3, 7), F.mul(4, 8)))
    assert F.hadamard(x, y) == [F.mul(a, b) for a, b in zip(x, y)]


def test_contexts_are_cached_and_picklable():
    import pickle

    F = field_new(27)
    assert field_new(27) is F
    assert pickle.loads(pickle.dumps(F)) is F


@given(st.sampled_from([4, 8, 9, 25]), st.data())
def test_arith_against_oracle_class(q, data):
    F = field_new(q)
    ar = Arith(F.p, F.e, F.modulus)
    a = data.draw(st.integers(0, q - 1))
    b = data.draw(st.integers(0, q - 1))
    assert F.mul(a, b) == ar.mul_t[a][b]
    assert F.add(a, b) == ar.add_t[a][b]
