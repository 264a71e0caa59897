import numpy as np
import pytest
from hypothesis import given, strategies as st

from oneshot_pir.errors import ParameterError
from oneshot_pir.field import (FieldElement, FieldVector, check_modulus, field_arithmetic, field_inverse,
                               inner_product, is_prime, next_prime)
from oneshot_pir.linalg import (batch_rank_mod, inv_mod, rank_mod, rank_rational, rref_mod, solve_mod,
                                solve_rational)

primes = st.sampled_from([2, 3, 5, 7, 13, 257, 65521])


def test_primality_small():
    assert [n for n in range(30) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29]
    assert next_prime(14) == 17 and next_prime(2) == 2


@pytest.mark.parametrize("q", [0, 1, 4, 9, 65536, 65537])
def test_bad_modulus(q):
    with pytest.raises(ParameterError):
        check_modulus(q)


def test_element_reduces_and_operates():
    a, b = FieldElement(7, 5), FieldElement(4, 5)
    assert a.value == 2
    assert int(a + b) == 1 and int(a - b) == 3 and int(a * b) == 3 and int(-a) == 3
    assert int(a / b) == int(a * field_inverse(b))
    assert field_arithmetic("mul", a, b) == a * b


def test_errors():
    with pytest.raises(ZeroDivisionError):
        field_inverse(FieldElement(0, 7))
    with pytest.raises(ParameterError):
        FieldElement(1, 5) + FieldElement(1, 7)
    with pytest.raises(ParameterError):
        field_arithmetic("pow", FieldElement(1, 5), FieldElement(1, 5))
    with pytest.raises(ParameterError):
        FieldVector([1, 2], 5) + FieldVector([1, 2, 3], 5)


@given(primes, st.integers(), st.integers(), st.integers())
def test_field_axioms(q, x, y, z):
    a, b, c = FieldElement(x, q), FieldElement(y, q), FieldElement(z, q)
    assert (a + b) * c == a * c + b * c
    assert a + (-a) == FieldElement(0, q)
    if a.value:
        assert a * field_inverse(a) == FieldElement(1, q)


@given(primes, st.lists(st.integers(0, 10 ** 6), min_size=1, max_size=8), st.integers())
def test_vector_inner_product_linear(q, xs, k):
    d = FieldVector(xs, q)
    v = FieldVector(list(reversed(xs)), q)
    assert int(inner_product(d, v * k)) == int(inner_product(d, v)) * k % q
    assert (d + v - v) == d
    assert FieldVector.zeros(len(xs), q).tolist() == [0] * len(xs)


def test_vector_is_read_only():
    v = FieldVector([1, 2, 3], 5)
    with pytest.raises(ValueError):
        v.values[0] = 4


def test_rref_and_solve():
    a = np.array([[1, 2, 0], [2, 4, 1]])
    r, piv = rref_mod(a, 5)
    assert piv == [0, 2]
    assert rank_mod(a, 5) == 2
    x = solve_mod(a, [3, 1], 5)
    assert ((a @ x - [3, 1]) % 5 == 0).all()
    assert solve_mod(np.array([[1, 1], [1, 1]]), [0, 1], 3) is None
    with pytest.raises(ZeroDivisionError):
        inv_mod(np.array([[1, 1], [2, 2]]), 3)


@given(primes, st.integers(0, 2 ** 32 - 1))
def test_inverse_roundtrip(q, seed):
    g = np.random.default_rng(seed)
    a = g.integers(0, q, size=(3, 3))
    if rank_mod(a, q) == 3:
        assert (a @ inv_mod(a, q) % q == np.eye(3, dtype=np.int64)).all()


@pytest.mark.parametrize("q", [2, 3, 5, 65521])
def test_batch_rank_matches_scalar(q):
    g = np.random.default_rng(q)
    a = g.integers(0, q, size=(300, 4, 5))
    a[::3, 2] = a[::3, 0] * 2 + a[::3, 1]
    a[::7] = 0
    assert batch_rank_mod(a, q).tolist() == [rank_mod(x, q) for x in a]


def test_rational_linear_algebra():
    assert rank_rational([[1, 2], [2, 4]]) == 1
    x = solve_rational([[2, 0], [0, 3]], [1, 1])
    assert [str(v) for v in x] == ["1/2", "1/3"]
