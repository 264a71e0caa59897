from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from oneshot_pir.errors import ParameterError
from oneshot_pir.rates import (capacity, decimal6, evaluate, exact, freij_rate, lifted_rate, oneshot_rate_closed,
                               rate_formulas, rate_rows, refined_rate, taje18_rate)


def test_small_values():
    assert capacity(2, 1, 2) == Fraction(2, 3)
    assert oneshot_rate_closed(4, 3) == Fraction(1, 4)
    assert refined_rate(4, 3) == Fraction(4, 7)
    assert lifted_rate(4, 3, 3) == Fraction(16, 37)
    assert lifted_rate(10, 7, 2) == Fraction(10, 17)
    assert lifted_rate(10, 7, 9) == Fraction(3 * 10 ** 8, 10 ** 9 - 7 ** 9)


@given(st.integers(2, 9).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N - 1))), st.integers(1, 7))
def test_lifted_equals_capacity_at_r_equal_t(nt, M):
    N, T = nt
    assert lifted_rate(N, T, M) == capacity(N, T, M)


@given(st.integers(2, 8).flatmap(lambda N: st.tuples(st.just(N), st.integers(1, N - 1))), st.integers(2, 6))
def test_lifted_between_oneshot_and_refined(nr, M):
    N, r = nr
    assert oneshot_rate_closed(N, r) < lifted_rate(N, r, M) <= refined_rate(N, r)
    assert lifted_rate(N, r, M + 1) < lifted_rate(N, r, M)


def test_ordering_report():
    rep = rate_formulas(6, 2, 2, 3)
    assert rep.ok and rep.formulas["taje18"] < rep.formulas["freij"]
    assert rate_formulas(4, 2, 2, 3).formulas["taje18"] == freij_rate(4, 2, 2, 3)
    assert taje18_rate(5, 1, 2, 3) == freij_rate(5, 1, 2, 3)


def test_decimal_rendering():
    assert decimal6(Fraction(10, 17)) == "0.588235"
    assert decimal6(Fraction(1, 8000000)) == "0.000000"     # exact half rounds to even
    assert decimal6(Fraction(3, 2000000)) == "0.000002"
    assert decimal6(Fraction(-1, 3)) == "-0.333333"
    assert exact(Fraction(6, 4)) == "3/2"


def test_errors_and_rows():
    with pytest.raises(ParameterError):
        lifted_rate(4, 4, 2)
    with pytest.raises(ParameterError):
        evaluate("bogus", 4, 1, 1, 2)
    rows = rate_rows(["lifted", "capacity"], [4], [1, 2], [1, 2, 3], [2])
    assert all(r[1] + r[2] <= 4 for r in rows)
    assert rows[0] == (4, 1, 1, 2, "1", "lifted", "4/5", "0.800000")
    assert rows[1] == (4, 1, 1, 2, "", "capacity", "4/5", "0.800000")
