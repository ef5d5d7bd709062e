from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from treeshift.surd import Surd, rational_sqrt

pos = st.fractions(min_value=F(1, 30), max_value=50, max_denominator=30)


def test_rational_sqrt():
    assert rational_sqrt(F(9, 4)) == F(3, 2)
    assert rational_sqrt(F(2)) is None
    assert rational_sqrt(F(-1)) is None


def test_normalisation_and_equality():
    assert Surd.sqrt(F(9, 4)) == F(3, 2)
    assert Surd.sqrt(8) == 2 * Surd.sqrt(2)
    assert Surd.sqrt(2) != Surd.sqrt(3)
    assert Surd(0, 7) == 0 and not Surd(0, 7)
    with pytest.raises(ValueError):
        Surd(1, -2)


def test_incommensurable_sum_raises():
    with pytest.raises(ArithmeticError):
        Surd.sqrt(2) + Surd.sqrt(3)


def test_irrational_to_fraction_raises():
    with pytest.raises(ValueError):
        Surd.sqrt(2).to_fraction()
    assert (Surd.sqrt(2) * Surd.sqrt(8)).to_fraction() == 4


@given(pos, pos)
def test_product_of_roots(a, b):
    p = Surd.sqrt(a) * Surd.sqrt(b)
    assert p.square() == a * b
    assert (p / Surd.sqrt(b)) == Surd.sqrt(a)


@given(pos, st.fractions(min_value=-5, max_value=5, max_denominator=9), st.fractions(min_value=-5, max_value=5, max_denominator=9))
def test_commensurable_sums(q, x, y):
    s = x * Surd.sqrt(q) + y * Surd.sqrt(q)
    assert s == (x + y) * Surd.sqrt(q)
    assert float(s) == pytest.approx(float(x + y) * float(q) ** 0.5)
    assert (s - s) == 0
