"""Exact rational polynomial arithmetic.

Univariate polynomials over the rationals (``RationalPoly``), sparse
polynomials in ``z`` and ``zbar`` (``BiIndexedPoly``), Laguerre and complex
Hermite polynomials, and closed-form exponential moments.  Rationals are
:class:`fractions.Fraction`, so every operation is exact.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb, factorial
from numbers import Rational as _RationalABC
from typing import Iterable, Mapping

import numpy as np

Rational = Fraction

__all__ = [
    "Rational",
    "RationalPoly",
    "BiIndexedPoly",
    "laguerre",
    "complex_hermite",
    "exp_moment",
    "rational_to_str",
    "rational_from_str",
]


def _as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, _RationalABC)):
        return Fraction(value)
    if isinstance(value, str):
        return rational_from_str(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


def rational_to_str(q: Fraction) -> str:
    """Serialize as ``"p/q"`` (denominator always written)."""
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def rational_from_str(text: str) -> Fraction:
    return Fraction(text.strip())


class RationalPoly:
    """Univariate polynomial with exact rational coefficients, degree ascending."""

    __slots__ = ("_c",)

    def __init__(self, coefficients: Iterable = ()):
        c = [_as_fraction(x) for x in coefficients]
        while c and c[-1] == 0:
            c.pop()
        self._c = tuple(c)

    @classmethod
    def constant(cls, value) -> "RationalPoly":
        return cls([value])

    @classmethod
    def monomial(cls, degree: int, coefficient=1) -> "RationalPoly":
        return cls([0] * degree + [coefficient])

    @property
    def coefficients(self) -> tuple[Fraction, ...]:
        return self._c

    @property
    def degree(self) -> float | int:
        """Index of the last nonzero coefficient; ``-inf`` for the zero polynomial."""
        return len(self._c) - 1 if self._c else float("-inf")

    def is_zero(self) -> bool:
        return not self._c

    def coefficient(self, j: int) -> Fraction:
        return self._c[j] if 0 <= j < len(self._c) else Fraction(0)

    def __repr__(self) -> str:
        return f"RationalPoly([{', '.join(rational_to_str(c) for c in self._c)}])"

    def __str__(self) -> str:
        if not self._c:
            return "0"
        terms = []
        for j, c in enumerate(self._c):
            if c == 0:
                continue
            if j == 0:
                terms.append(str(c))
            elif j == 1:
                terms.append(f"{c}*t")
            else:
                terms.append(f"{c}*t^{j}")
        return " + ".join(terms).replace("+ -", "- ")

    def __eq__(self, other) -> bool:
        if isinstance(other, RationalPoly):
            return self._c == other._c
        try:
            return self._c == RationalPoly.constant(other)._c
        except TypeError:
            return NotImplemented

    def __hash__(self) -> int:
        return hash(self._c)

    def _coerce(self, other) -> "RationalPoly":
        if isinstance(other, RationalPoly):
            return other
        return RationalPoly.constant(other)

    def __add__(self, other) -> "RationalPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        n = max(len(self._c), len(other._c))
        return RationalPoly(self.coefficient(j) + other.coefficient(j) for j in range(n))

    __radd__ = __add__

    def __neg__(self) -> "RationalPoly":
        return RationalPoly(-c for c in self._c)

    def __sub__(self, other) -> "RationalPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "RationalPoly":
        return (-self) + other

    def __mul__(self, other) -> "RationalPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        if not self._c or not other._c:
            return RationalPoly()
        out = [Fraction(0)] * (len(self._c) + len(other._c) - 1)
        for i, a in enumerate(self._c):
            if a == 0:
                continue
            for j, b in enumerate(other._c):
                out[i + j] += a * b
        return RationalPoly(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "RationalPoly":
        if exponent < 0:
            raise ValueError("negative powers are not polynomials")
        result = RationalPoly.constant(1)
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def scale(self, factor) -> "RationalPoly":
        f = _as_fraction(factor)
        return RationalPoly(f * c for c in self._c)

    def __truediv__(self, other) -> "RationalPoly":
        """Division by a nonzero rational scalar."""
        f = _as_fraction(other)
        if f == 0:
            raise ZeroDivisionError("polynomial division by zero")
        return self.scale(1 / f)

    def divmod(self, divisor: "RationalPoly") -> tuple["RationalPoly", "RationalPoly"]:
        """Euclidean division, exact over the rationals."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self._c)
        d = len(divisor._c) - 1
        lead = divisor._c[-1]
        quot = [Fraction(0)] * max(len(rem) - d, 1)
        for i in range(len(rem) - 1, d - 1, -1):
            q = rem[i] / lead
            quot[i - d] = q
            if q:
                for j, b in enumerate(divisor._c):
                    rem[i - d + j] -= q * b
        return RationalPoly(quot), RationalPoly(rem[:d] if d else [])

    def compose_scaled(self, factor) -> "RationalPoly":
        """Return ``t -> p(factor * t)``."""
        f = _as_fraction(factor)
        return RationalPoly(c * f**j for j, c in enumerate(self._c))

    def compose(self, inner: "RationalPoly") -> "RationalPoly":
        result = RationalPoly()
        for c in reversed(self._c):
            result = result * inner + c
        return result

    def derivative(self) -> "RationalPoly":
        return RationalPoly(j * c for j, c in enumerate(self._c) if j > 0)

    def __call__(self, t):
        """Evaluate by Horner's scheme.

        Exact for int/Fraction arguments; float or complex (including numpy
        arrays) otherwise.
        """
        if isinstance(t, (int, Fraction)):
            acc = Fraction(0)
            for c in reversed(self._c):
                acc = acc * t + c
            return acc
        return self.evaluate_float(t)

    def evaluate_float(self, t):
        t = np.asarray(t)
        acc = np.zeros_like(t, dtype=np.result_type(t.dtype, np.float64))
        for c in reversed(self._c):
            acc = acc * t + float(c)
        return acc if acc.ndim else acc[()]

    def to_json(self) -> list[str]:
        return [rational_to_str(c) for c in self._c]

    @classmethod
    def from_json(cls, data: Iterable[str]) -> "RationalPoly":
        return cls(rational_from_str(x) if isinstance(x, str) else x for x in data)


class BiIndexedPoly:
    """Polynomial in ``z`` and ``zbar`` with rational coefficients.

    Stored sparsely as ``{(p, q): coeff}`` for the monomial ``z**p * zbar**q``.
    Conjugation swaps the two exponents, since the coefficients are real.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[tuple[int, int], object] | None = None):
        clean = {}
        for (p, q), c in (terms or {}).items():
            c = _as_fraction(c)
            if c != 0:
                if p < 0 or q < 0:
                    raise ValueError("negative exponent")
                clean[(int(p), int(q))] = c
        self._terms = clean

    @classmethod
    def z(cls) -> "BiIndexedPoly":
        return cls({(1, 0): 1})

    @classmethod
    def zbar(cls) -> "BiIndexedPoly":
        return cls({(0, 1): 1})

    @classmethod
    def constant(cls, value) -> "BiIndexedPoly":
        return cls({(0, 0): value})

    @classmethod
    def from_radial(cls, p: RationalPoly) -> "BiIndexedPoly":
        """Embed ``p(|z|^2)``."""
        return cls({(j, j): c for j, c in enumerate(p.coefficients)})

    @property
    def terms(self) -> dict[tuple[int, int], Fraction]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {rational_to_str(v)}" for k, v in sorted(self._terms.items()))
        return f"BiIndexedPoly({{{inner}}})"

    def __eq__(self, other) -> bool:
        if isinstance(other, BiIndexedPoly):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self._terms == BiIndexedPoly.constant(other)._terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def _coerce(self, other) -> "BiIndexedPoly":
        if isinstance(other, BiIndexedPoly):
            return other
        return BiIndexedPoly.constant(other)

    def __add__(self, other) -> "BiIndexedPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0) + v
        return BiIndexedPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "BiIndexedPoly":
        return BiIndexedPoly({k: -v for k, v in self._terms.items()})

    def __sub__(self, other) -> "BiIndexedPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "BiIndexedPoly":
        return (-self) + other

    def __mul__(self, other) -> "BiIndexedPoly":
        try:
            other = self._coerce(other)
        except TypeError:
            return NotImplemented
        out: dict[tuple[int, int], Fraction] = {}
        for (p1, q1), a in self._terms.items():
            for (p2, q2), b in other._terms.items():
                key = (p1 + p2, q1 + q2)
                out[key] = out.get(key, 0) + a * b
        return BiIndexedPoly(out)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "BiIndexedPoly":
        result = BiIndexedPoly.constant(1)
        for _ in range(exponent):
            result = result * self
        return result

    def scale(self, factor) -> "BiIndexedPoly":
        f = _as_fraction(factor)
        return BiIndexedPoly({k: f * v for k, v in self._terms.items()})

    def conjugate(self) -> "BiIndexedPoly":
        return BiIndexedPoly({(q, p): v for (p, q), v in self._terms.items()})

    def d_z(self) -> "BiIndexedPoly":
        """Wirtinger derivative in ``z`` (``zbar`` held fixed)."""
        return BiIndexedPoly({(p - 1, q): p * v for (p, q), v in self._terms.items() if p})

    def d_zbar(self) -> "BiIndexedPoly":
        return BiIndexedPoly({(p, q - 1): q * v for (p, q), v in self._terms.items() if q})

    def radial_part(self) -> RationalPoly:
        """Collapse to a polynomial in ``t = |z|^2``.

        Raises ``ValueError`` if some monomial is not of the form
        ``(z zbar)**j``.
        """
        off = [k for k in self._terms if k[0] != k[1]]
        if off:
            raise ValueError(f"not a function of |z|^2; off-diagonal monomials {sorted(off)}")
        if not self._terms:
            return RationalPoly()
        deg = max(p for p, _ in self._terms)
        return RationalPoly(self._terms.get((j, j), 0) for j in range(deg + 1))

    def __call__(self, z):
        """Numerical evaluation at complex ``z`` (scalar or array)."""
        z = np.asarray(z, dtype=complex)
        zb = np.conj(z)
        out = np.zeros_like(z)
        for (p, q), c in self._terms.items():
            out = out + float(c) * z**p * zb**q
        return out if out.ndim else out[()]

    def evaluate_exact(self, re, im) -> tuple[Fraction, Fraction]:
        """Exact value at ``z = re + i*im`` for rational ``re, im``.

        Returns the (real, imaginary) parts as Fractions.
        """
        re, im = _as_fraction(re), _as_fraction(im)

        def cmul(a, b):
            return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

        def cpow(base, n):
            out = (Fraction(1), Fraction(0))
            for _ in range(n):
                out = cmul(out, base)
            return out

        total = (Fraction(0), Fraction(0))
        for (p, q), c in self._terms.items():
            m = cmul(cpow((re, im), p), cpow((re, -im), q))
            total = (total[0] + c * m[0], total[1] + c * m[1])
        return total


def laguerre(k: int) -> RationalPoly:
    """Laguerre polynomial ``L_k(t) = sum_j (-1)^j C(k, j) t^j / j!``."""
    if k < 0:
        raise ValueError("Laguerre degree must be nonnegative")
    return RationalPoly(Fraction((-1) ** j * comb(k, j), factorial(j)) for j in range(k + 1))


def complex_hermite(j: int, k: int) -> BiIndexedPoly:
    """Complex Hermite polynomial ``H_{j,k}(z, zbar)``."""
    if j < 0 or k < 0:
        raise ValueError("indices must be nonnegative")
    return BiIndexedPoly({
        (j - r, k - r): (-1) ** r * factorial(r) * comb(j, r) * comb(k, r)
        for r in range(min(j, k) + 1)
    })


def exp_moment(p: RationalPoly, lam) -> Fraction:
    """Exact ``int_0^inf p(s) exp(-lam s) ds`` using ``m! / lam^(m+1)``."""
    lam = _as_fraction(lam)
    if lam <= 0:
        raise ValueError(f"rate must be positive, got {lam}")
    total = Fraction(0)
    moment = 1 / lam  # 0! / lam
    for m, c in enumerate(p.coefficients):
        if m:
            moment = moment * m / lam
        total += c * moment
    return total
