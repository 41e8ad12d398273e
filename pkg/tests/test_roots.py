import math
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from stablekm.roots import RootSum, split_square


def test_split_square():
    assert split_square(72) == (6, 2)
    assert split_square(49) == (7, 1)
    assert split_square(0) == (0, 1) or split_square(0)[0] == 0


def test_sqrt_collapse():
    assert RootSum.sqrt(8) == RootSum.sqrt(2, 2)
    assert RootSum.sqrt(9) == 3


def test_cancellation_is_exact():
    x = RootSum.sqrt(2) + RootSum.sqrt(3) - RootSum.sqrt(12) * Fraction(1, 2)
    assert x == RootSum.sqrt(2)
    assert (RootSum.sqrt(2) - RootSum.sqrt(2)).sign() == 0


def test_near_tie_sign():
    # sqrt(10001) - 100 is tiny but positive
    assert (RootSum.sqrt(10001) - 100).sign() == 1
    # 3.1462... versus 3.1623...
    assert (RootSum.sqrt(2) + RootSum.sqrt(3) - RootSum.sqrt(10)).sign() == -1


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(1, 400), st.integers(-5, 5)), min_size=1, max_size=5),
       st.integers(-30, 30))
def test_sign_matches_float_when_separated(terms, r):
    x = RootSum.rational(r)
    for q, c in terms:
        x = x + RootSum.sqrt(q, c)
    f = r + sum(c * math.sqrt(q) for q, c in terms)
    if abs(f) > 1e-6:
        assert x.sign() == (1 if f > 0 else -1)
    assert abs(float(x) - f) < 1e-6
