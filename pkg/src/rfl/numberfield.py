"""Exact arithmetic in the totally real field Q(2cos(pi/m)).

Elements are rational coordinate vectors in the power basis
``1, lam, ..., lam^(d-1)``.  Products are reduced modulo the minimal
polynomial, inverses come from the extended Euclidean algorithm over Q[x],
and signs are decided with a dyadic isolating interval for ``lam`` that is
refined on demand and shared by every element of the field.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, PrecisionError

MAX_K = 50
_MAX_BITS = 1 << 20

Poly = tuple  # coefficients, lowest degree first


def minimal_polynomial(k: int) -> tuple[int, ...]:
    """Integer coefficients of the minimal polynomial of ``2cos(pi/k)``, lowest degree first.

    >>> minimal_polynomial(5)
    (-1, -1, 1)
    """
    if int(k) != k or k < 3:
        raise DomainError(f"k must be an integer >= 3, got {k!r}")
    if k > MAX_K:
        raise DomainError(f"exact arithmetic is capped at k <= {MAX_K}, got {k}")
    roots = [2.0 * math.cos(j * math.pi / k) for j in range(1, k) if math.gcd(j, 2 * k) == 1]
    approx = np.poly(roots)[::-1]
    coeffs = np.rint(approx)
    if np.max(np.abs(coeffs - approx)) >= 1e-6:
        raise PrecisionError(f"minimal polynomial of 2cos(pi/{k}) not recovered in binary64")
    return tuple(int(c) for c in coeffs)


def _trim(p: list) -> list:
    while p and p[-1] == 0:
        p.pop()
    return p


def _polymul(a: Sequence, b: Sequence) -> list:
    if not a or not b:
        return []
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _polydivmod(a: Sequence, b: Sequence) -> tuple[list, list]:
    a = _trim([Fraction(x) for x in a])
    b = _trim([Fraction(x) for x in b])
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [Fraction(0)] * max(len(a) - len(b) + 1, 0)
    lead = b[-1]
    while len(a) >= len(b):
        shift = len(a) - len(b)
        c = a[-1] / lead
        q[shift] = c
        for i, y in enumerate(b):
            a[i + shift] -= c * y
        a.pop()
        _trim(a)
    return q, a


def _polysub(a: Sequence, b: Sequence) -> list:
    n = max(len(a), len(b))
    out = [(a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0) for i in range(n)]
    return _trim(out)


def _horner_interval(coeffs: Sequence[Fraction], lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Enclosure of a polynomial over ``[lo, hi]`` with ``0 < lo``."""
    a = b = Fraction(0)
    for c in reversed(coeffs):
        # [a, b] * [lo, hi] with lo > 0
        a, b = (a * lo if a >= 0 else a * hi), (b * hi if b >= 0 else b * lo)
        a += c
        b += c
    return a, b


class NumberField:
    """``Q(lam)`` with ``lam = 2cos(pi/m)``; use :func:`field` for a cached instance."""

    def __init__(self, m: int):
        self.m = int(m)
        self.psi = minimal_polynomial(m)
        self.degree = len(self.psi) - 1
        self.lam_float = 2.0 * math.cos(math.pi / m)
        self._psi_frac = [Fraction(c) for c in self.psi]
        # dyadic isolating interval: lam in [lo, hi] = [a, b] / 2**bits
        self._bits = 40
        scale = 1 << self._bits
        a = math.floor(self.lam_float * scale) - 4
        self._num = (a, a + 9)
        if not self._psi_sign_change(*self._num, self._bits):
            raise PrecisionError(f"could not isolate 2cos(pi/{m})")

    def __repr__(self) -> str:
        return f"NumberField(m={self.m})"

    def _psi_at(self, x: Fraction) -> Fraction:
        v = Fraction(0)
        for c in reversed(self._psi_frac):
            v = v * x + c
        return v

    def _psi_sign_change(self, a: int, b: int, bits: int) -> bool:
        s = Fraction(1, 1 << bits)
        return self._psi_at(a * s) * self._psi_at(b * s) < 0

    def _refine(self, bits: int) -> None:
        """Bisect the isolating interval until its width is ``2**-bits`` or less."""
        a, b = self._num
        cur = self._bits
        scale = Fraction(1, 1 << cur)
        s_lo = self._psi_at(a * scale) > 0
        if bits > _MAX_BITS:
            raise PrecisionError("refinement budget exhausted")
        while cur < bits:
            a, b, cur = 2 * a, 2 * b, cur + 1
            if b == a:
                continue
            mid = (a + b) // 2
            v = self._psi_at(Fraction(mid, 1 << cur))
            if v == 0:
                a = b = mid
            elif (v > 0) == s_lo:
                a = mid
            else:
                b = mid
        self._num, self._bits = (a, b), cur

    def lam_interval(self) -> tuple[Fraction, Fraction]:
        s = Fraction(1, 1 << self._bits)
        return self._num[0] * s, self._num[1] * s

    def enclose(self, coords: Sequence[Fraction], rel: float | None = None) -> tuple[Fraction, Fraction]:
        """Enclosure of ``sum coords[i] lam^i`` that excludes 0 (or meets ``rel`` width)."""
        if not any(coords):
            return Fraction(0), Fraction(0)
        while True:
            lo, hi = self._horner(coords)
            excludes = lo > 0 or hi < 0
            if excludes and (rel is None or hi - lo <= abs(lo) * Fraction(rel)):
                return lo, hi
            self._refine(self._bits + 32)

    def _horner(self, coords):
        lo, hi = self.lam_interval()
        return _horner_interval(coords, lo, hi)

    # constructors
    def element(self, coords) -> "FieldElem":
        coords = [Fraction(c) for c in coords]
        if len(coords) > self.degree:
            _, coords = _polydivmod(coords, self._psi_frac)
        coords = coords + [Fraction(0)] * (self.degree - len(coords))
        return FieldElem(self, tuple(coords))

    def zero(self) -> "FieldElem":
        return self.element([0])

    def one(self) -> "FieldElem":
        return self.element([1])

    def gen(self) -> "FieldElem":
        return self.element([0, 1])

    def lambda_k(self, k: int) -> "FieldElem":
        """``2cos(pi/k)`` as an element of this field.

        Available when ``k = 3`` (the value 1) or ``k`` divides ``m``, via the
        Chebyshev-Dickson identity ``C_t(2cos x) = 2cos(t x)``.
        """
        if k == 3:
            return self.one()
        if self.m % k:
            raise DomainError(f"2cos(pi/{k}) is not available in Q(2cos(pi/{self.m}))")
        t = self.m // k
        c0, c1 = self.element([2]), self.gen()
        if t == 0:
            return c0
        for _ in range(t - 1):
            c0, c1 = c1, self.gen() * c1 - c0
        return c1


@lru_cache(maxsize=None)
def field(m: int) -> NumberField:
    return NumberField(m)


class FieldElem:
    """Exact element of ``Q(2cos(pi/m))``; immutable, hashable."""

    __slots__ = ("field", "coords")

    def __init__(self, fld: NumberField, coords: tuple):
        self.field = fld
        self.coords = coords

    def _coerce(self, other) -> "FieldElem":
        if isinstance(other, FieldElem):
            if other.field is not self.field:
                raise DomainError("elements belong to different fields")
            return other
        if isinstance(other, (int, Fraction)):
            return self.field.element([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return FieldElem(self.field, tuple(a + b for a, b in zip(self.coords, other.coords)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElem(self.field, tuple(-a for a in self.coords))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.field.element(_polymul(self.coords, other.coords))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElem":
        if self.is_zero():
            raise ZeroDivisionError("inverse of zero in a number field")
        # extended Euclid: s*a + t*psi = g, g a nonzero constant
        r0, r1 = list(self.field._psi_frac), _trim(list(self.coords))
        s0, s1 = [], [Fraction(1)]
        while len(r1) > 1:
            q, r = _polydivmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, _polysub(s0, _polymul(q, s1))
        c = r1[0]
        return self.field.element([x / c for x in s1])

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self.coords == other.coords

    def __hash__(self):
        return hash((self.field.m, self.coords))

    def sign(self) -> int:
        """Exact sign of the real embedding."""
        if self.is_zero():
            return 0
        lo, _ = self.field.enclose(self.coords)
        return 1 if lo > 0 else -1

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __lt__(self, other):
        return (self - other).sign() < 0

    def __le__(self, other):
        return (self - other).sign() <= 0

    def __gt__(self, other):
        return (self - other).sign() > 0

    def __ge__(self, other):
        return (self - other).sign() >= 0

    def embed(self) -> float:
        """Value at ``lam`` rounded to binary64, correct to about one ulp."""
        if self.is_zero():
            return 0.0
        lo, hi = self.field.enclose(self.coords, rel=1e-17)
        return float((lo + hi) / 2)

    __float__ = embed

    def __repr__(self) -> str:
        return f"FieldElem(m={self.field.m}, {format_field_elem(self)!r})"


_TERM = re.compile(r"^(?P<coef>[0-9./]*)?\*?(?P<var>l(?:\^(?P<pow>\d+))?)?$")


def parse_field_elem(text: str, fld: NumberField) -> FieldElem:
    """Parse a rational polynomial in ``l`` such as ``"1+2*l-3/2*l^2"``."""
    s = text.replace(" ", "")
    if not s:
        raise DomainError("empty field element")
    terms = re.findall(r"[+-]?[^+-]+", s)
    if "".join(terms) != s:
        raise DomainError(f"cannot parse field element {text!r}")
    coords: dict[int, Fraction] = {}
    for term in terms:
        sign = -1 if term.startswith("-") else 1
        body = term.lstrip("+-")
        m = _TERM.match(body)
        if not m or (not m.group("coef") and not m.group("var")):
            raise DomainError(f"cannot parse term {term!r} in {text!r}")
        if m.group("var") is None and body.endswith("*"):
            raise DomainError(f"cannot parse term {term!r} in {text!r}")
        try:
            coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"bad coefficient in {term!r}") from exc
        power = 0
        if m.group("var"):
            power = int(m.group("pow")) if m.group("pow") else 1
        coords[power] = coords.get(power, Fraction(0)) + sign * coef
    top = max(coords)
    return fld.element([coords.get(i, Fraction(0)) for i in range(top + 1)])


def format_field_elem(x: FieldElem) -> str:
    parts = []
    for i, c in enumerate(x.coords):
        if c == 0:
            continue
        mono = "" if i == 0 else ("l" if i == 1 else f"l^{i}")
        if mono and abs(c) == 1:
            body = mono
        else:
            body = f"{abs(c)}" + (f"*{mono}" if mono else "")
        parts.append(("-" if c < 0 else "+") + body)
    if not parts:
        return "0"
    out = "".join(parts)
    return out[1:] if out.startswith("+") else out
