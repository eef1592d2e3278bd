"""Truncated Laurent series at infinity.

A series is stored as a leading exponent ``power`` and coefficients
``a[0], a[1], ...`` so that ``f(lam) ~ sum_k a[k] * lam**(power - k)`` for
large ``|lam|``.  Rational symbols, their products, reciprocals and square
roots all stay in this class, which is what the delta-strength limit, the
kernel tail model and the quadrature tail integrals need.
"""

from __future__ import annotations

import numpy as np

from .errors import DivergenceError, NumericalError

__all__ = ["Laurent", "DEFAULT_TERMS"]

DEFAULT_TERMS = 24


class Laurent:
    __slots__ = ("power", "coeffs")

    def __init__(self, power: int, coeffs):
        c = np.asarray(coeffs)
        c = c.astype(complex if np.iscomplexobj(c) else float)
        self.power = int(power)
        self.coeffs = c

    # construction -------------------------------------------------------
    @classmethod
    def from_poly(cls, p, terms: int = DEFAULT_TERMS) -> "Laurent":
        c = np.asarray(p.coeffs)
        out = np.zeros(terms, dtype=c.dtype if c.size else float)
        if p.degree < 0:
            return cls(0, out)
        rev = c[::-1][:terms]
        out[: rev.size] = rev
        return cls(p.degree, out)

    @classmethod
    def from_rational(cls, r, terms: int = DEFAULT_TERMS) -> "Laurent":
        num = cls.from_poly(r.num, terms)
        if r.num.is_zero:
            return num
        return num * cls.from_poly(r.den, terms).reciprocal()

    @classmethod
    def constant(cls, value, terms: int = DEFAULT_TERMS) -> "Laurent":
        c = np.zeros(terms, dtype=complex if np.iscomplexobj(value) else float)
        c[0] = value
        return cls(0, c)

    @property
    def terms(self) -> int:
        return self.coeffs.size

    @property
    def is_zero(self) -> bool:
        return not np.any(self.coeffs)

    def exponents(self) -> np.ndarray:
        return self.power - np.arange(self.terms)

    def __repr__(self):
        return f"Laurent(power={self.power}, coeffs={self.coeffs[:6].tolist()}...)"

    # algebra ------------------------------------------------------------
    def __mul__(self, other):
        if np.isscalar(other):
            return Laurent(self.power, self.coeffs * other)
        n = min(self.terms, other.terms)
        c = np.convolve(self.coeffs[:n], other.coeffs[:n])[:n]
        return Laurent(self.power + other.power, c)

    __rmul__ = __mul__

    def __neg__(self):
        return Laurent(self.power, -self.coeffs)

    def __add__(self, other):
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        n = min(self.terms, other.terms)
        p = max(self.power, other.power)
        out = np.zeros(n, dtype=np.result_type(self.coeffs, other.coeffs))
        for s in (self, other):
            shift = p - s.power
            if shift < n:
                out[shift:] += s.coeffs[: n - shift]
        return Laurent(p, out)

    def __sub__(self, other):
        return self + (-other)

    def reciprocal(self) -> "Laurent":
        a = self.coeffs
        if a[0] == 0:
            raise NumericalError("reciprocal of a series with vanishing leading coefficient")
        b = np.zeros_like(a)
        b[0] = 1.0 / a[0]
        for k in range(1, a.size):
            b[k] = -np.dot(a[1 : k + 1], b[k - 1 :: -1][:k]) / a[0]
        return Laurent(-self.power, b)

    def __truediv__(self, other):
        return self * other.reciprocal()

    def sqrt(self) -> "Laurent":
        """Principal square root; needs an even leading power and ``a[0] > 0``."""
        a = self.coeffs
        if self.power % 2:
            raise NumericalError("square root of a series with odd leading power")
        if np.iscomplexobj(a) and a[0].imag != 0 or np.real(a[0]) <= 0:
            raise NumericalError("square root needs a positive leading coefficient")
        t = np.zeros_like(a)
        t[0] = np.sqrt(a[0])
        for k in range(1, a.size):
            t[k] = (a[k] - np.dot(t[1:k], t[k - 1 : 0 : -1])) / (2.0 * t[0])
        return Laurent(self.power // 2, t)

    def term_sizes(self, radius: float) -> np.ndarray:
        """``|a_k| radius**(power - k)``: size of each term at ``|lam| = radius``."""
        return np.abs(self.coeffs) * float(radius) ** self.exponents().astype(float)

    def strip(self, rtol: float = 0.0, radius: float = 1.0) -> "Laurent":
        """Drop leading terms that are zero, or below ``rtol`` of the largest
        term when all are evaluated at ``|lam| = radius``.

        Comparing sizes at a radius (rather than raw coefficients, which grow
        geometrically with the index) keeps genuine leading terms.
        """
        a = self.coeffs
        if not np.any(a):
            return self
        size = self.term_sizes(radius)
        cut = rtol * size.max()
        k = 0
        while k < a.size - 1 and (a[k] == 0 or size[k] <= cut):
            k += 1
        return Laurent(self.power - k, a[k:])

    def real(self) -> "Laurent":
        return Laurent(self.power, np.real(self.coeffs))

    # evaluation ---------------------------------------------------------
    def coefficient(self, exponent: int):
        """Coefficient of ``lam**exponent``."""
        k = self.power - int(exponent)
        if k < 0:
            return 0.0
        if k >= self.terms:
            raise NumericalError(f"series truncated above exponent {exponent}")
        return self.coeffs[k]

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.zeros(lam.shape, dtype=self.coeffs.dtype)
        for a, e in zip(self.coeffs, self.exponents()):
            if a != 0:
                out = out + a * lam ** float(e)
        return out

    def leading_exponent(self, rtol: float = 0.0, radius: float = 1.0):
        """Exponent of the first non-negligible term (see :meth:`strip`), or None."""
        s = self.strip(rtol, radius)
        return None if s.is_zero else s.power

    def two_sided_tail(self, x0: float):
        """``int_{|lam| > x0} f`` term by term, with an error estimate.

        Odd powers integrate to zero over the symmetric tail.  The error
        estimate is the summed magnitude of the last four terms.

        Raises
        ------
        DivergenceError
            When a nonzero term has exponent ``>= -1``.
        """
        total = 0.0
        mags = []
        for a, e in zip(self.coeffs, self.exponents()):
            if a == 0:
                mags.append(0.0)
                continue
            if e >= -1:
                raise DivergenceError(f"tail term lam^{e} is not integrable")
            mags.append(abs(a) * x0 ** (e + 1) / (-e - 1))
            if e % 2 == 0:
                total = total + 2.0 * a * x0 ** (e + 1) / (-e - 1)
        err = sum(mags[-4:]) if mags else 0.0
        return total, err
