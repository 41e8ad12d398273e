"""Exact arithmetic on finite sums ``sum_r c_r * sqrt(r)``.

Every radicand is reduced to its squarefree part, so two sums are equal
exactly when their coefficient maps are equal (square roots of distinct
squarefree integers are linearly independent over the rationals).  Signs of
nonzero sums are decided by integer interval arithmetic whose precision is
doubled until the interval excludes zero.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from math import isqrt
from numbers import Rational


@lru_cache(maxsize=1 << 16)
def split_square(q: int) -> tuple[int, int]:
    """Return ``(s, r)`` with ``q == s*s*r`` and ``r`` squarefree."""
    if q < 0:
        raise ValueError("radicand must be nonnegative")
    if q == 0:
        return 0, 1
    s, r = 1, 1
    p = 2
    # After removing every prime <= cbrt(q) the cofactor has at most two
    # prime factors, so it is a square exactly when it is p*p.
    while p * p * p <= q:
        e = 0
        while q % p == 0:
            q //= p
            e += 1
        if e:
            s *= p ** (e // 2)
            if e % 2:
                r *= p
        p += 1 if p == 2 else 2
    t = isqrt(q)
    if t * t == q:
        s *= t
    else:
        r *= q
    return s, r


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    raise TypeError(f"cannot use {type(x).__name__} as an exact coefficient")


class RootSum:
    """An exact value ``sum c_r sqrt(r)`` with rational ``c_r``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        if terms:
            for r, c in terms.items():
                c = _as_fraction(c)
                if c:
                    clean[r] = clean.get(r, 0) + c
        self.terms = {r: c for r, c in clean.items() if c}

    @classmethod
    def sqrt(cls, q: int, coef=1) -> "RootSum":
        s, r = split_square(int(q))
        return cls({r: _as_fraction(coef) * s})

    @classmethod
    def rational(cls, x) -> "RootSum":
        return cls({1: _as_fraction(x)})

    @staticmethod
    def coerce(x) -> "RootSum":
        return x if isinstance(x, RootSum) else RootSum.rational(x)

    def __add__(self, other):
        other = RootSum.coerce(other)
        out = dict(self.terms)
        for r, c in other.terms.items():
            out[r] = out.get(r, 0) + c
        return RootSum(out)

    __radd__ = __add__

    def __neg__(self):
        return RootSum({r: -c for r, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-RootSum.coerce(other))

    def __rsub__(self, other):
        return RootSum.coerce(other) - self

    def __mul__(self, k):
        if isinstance(k, RootSum):
            return NotImplemented
        k = _as_fraction(k)
        return RootSum({r: c * k for r, c in self.terms.items()})

    __rmul__ = __mul__

    def sign(self) -> int:
        terms = self.terms
        if not terms:
            return 0
        signs = {c > 0 for c in terms.values()}
        if len(signs) == 1:
            return 1 if True in signs else -1
        if len(terms) == 2:
            # a*sqrt(r1) + b*sqrt(r2) with opposite signs: compare squares.
            (r1, a), (r2, b) = terms.items()
            lhs, rhs = a * a * r1, b * b * r2
            if lhs == rhs:  # unreachable for reduced distinct radicands
                return 0
            big = a if lhs > rhs else b
            return 1 if big > 0 else -1
        bits = 32
        while True:
            # lo, hi bound the value scaled by 2**bits
            lo = Fraction(0)
            hi = Fraction(0)
            for r, c in terms.items():
                if r == 1:
                    lo += c * (1 << bits)
                    hi += c * (1 << bits)
                    continue
                root_lo = isqrt(r << (2 * bits))
                a = c * root_lo
                b = c * (root_lo + 1)
                if c > 0:
                    lo += a
                    hi += b
                else:
                    lo += b
                    hi += a
            if lo > 0:
                return 1
            if hi < 0:
                return -1
            bits *= 2

    def __float__(self):
        return float(sum(float(c) * (r ** 0.5) for r, c in self.terms.items()))

    def __bool__(self):
        return bool(self.terms)

    def _cmp(self, other) -> int:
        return (self - RootSum.coerce(other)).sign()

    def __eq__(self, other):
        if not isinstance(other, (RootSum, int, Fraction)):
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __hash__(self):
        if set(self.terms) <= {1}:
            return hash(self.terms.get(1, Fraction(0)))
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "RootSum(0)"
        parts = []
        for r in sorted(self.terms):
            c = self.terms[r]
            parts.append(f"{c}" if r == 1 else f"{c}*sqrt({r})")
        return "RootSum(" + " + ".join(parts) + ")"

    def to_json(self):
        return {
            "terms": [[r, str(self.terms[r])] for r in sorted(self.terms)],
            "approx": float(self),
        }
