"""Fourier symbols of spatially invariant operators.

Symbols are polynomials (differential operators) or proper rational functions
(noise shaping, measurement filters) of the real spatial frequency ``lam``.
Coefficients are stored densely in ascending order.  The analytic extension
used by the locality theory substitutes ``lam -> -1j * z``, so that the real
frequency axis maps to the imaginary ``z`` axis.

All objects are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from numbers import Number

import numpy as np

from .errors import InputError, SingularityError
from .roots import is_real_root, polyroots

__all__ = [
    "Polynomial",
    "RationalSymbol",
    "PlantSpec",
    "Diagnostic",
    "HalfPlaneSup",
    "evaluate",
    "extend",
    "real_part_poly",
    "squared_magnitude",
    "half_plane_sup",
    "validate_plant",
    "all_passed",
    "MonomialForm",
    "monomial_form",
]

_npoly = np.polynomial.polynomial


def _as_coeff_array(coeffs):
    c = np.atleast_1d(np.asarray(coeffs))
    if c.ndim != 1:
        raise InputError("polynomial coefficients must be one-dimensional")
    if not np.issubdtype(c.dtype, np.number):
        raise InputError("polynomial coefficients must be numeric")
    if not np.all(np.isfinite(c)):
        raise InputError("polynomial coefficients must be finite")
    c = c.astype(complex)
    nz = np.flatnonzero(c)
    c = c[: nz[-1] + 1] if nz.size else c[:0]
    if np.all(c.imag == 0):
        c = c.real.copy()
    c.setflags(write=False)
    return c


def _check_lam(lam):
    lam = np.asarray(lam)
    if np.iscomplexobj(lam) and np.any(lam.imag != 0):
        raise InputError("real frequency expected; use extend() for complex arguments")
    lam = lam.real if np.iscomplexobj(lam) else lam
    if not np.all(np.isfinite(lam)):
        raise InputError("frequency must be finite")
    return lam.astype(float)


class Polynomial:
    """Dense polynomial ``sum_k coeffs[k] * lam**k``.

    Trailing (highest-degree) exact zeros are dropped, so the leading
    coefficient is nonzero unless the polynomial is zero.  Coefficients with
    all-zero imaginary parts are stored as real floats, which keeps evaluation
    on real grids real-valued.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=()):
        object.__setattr__(self, "_c", _as_coeff_array(coeffs))

    def __setattr__(self, name, value):
        raise AttributeError("Polynomial is immutable")

    @classmethod
    def constant(cls, value) -> "Polynomial":
        return cls([value])

    @property
    def coeffs(self) -> np.ndarray:
        return self._c

    @property
    def degree(self) -> int:
        """Degree; -1 for the zero polynomial."""
        return self._c.size - 1

    @property
    def is_zero(self) -> bool:
        return self._c.size == 0

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self._c)

    @property
    def leading(self):
        return self._c[-1] if self._c.size else 0.0

    def __call__(self, x):
        if self.is_zero:
            return np.zeros_like(np.asarray(x, dtype=float if np.isrealobj(x) else complex))
        return _npoly.polyval(x, self._c)

    def __repr__(self):
        return f"Polynomial({self._c.tolist()!r})"

    def __eq__(self, other):
        if isinstance(other, Number):
            other = Polynomial([other])
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self._c.shape == other._c.shape and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(tuple(complex(v) for v in self._c))

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other
        if isinstance(other, Number):
            return Polynomial([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = max(self._c.size, other._c.size)
        out = np.zeros(n, dtype=np.result_type(self._c, other._c, float))
        out[: self._c.size] += self._c
        out[: other._c.size] += other._c
        return Polynomial(out)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial(-self._c)

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
        if self.is_zero or other.is_zero:
            return Polynomial()
        return Polynomial(np.convolve(self._c, other._c))

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise InputError("only nonnegative integer powers are supported")
        out = Polynomial([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def conj(self) -> "Polynomial":
        """Conjugate the coefficients (not the variable)."""
        return Polynomial(np.conj(self._c))

    def real_part(self) -> "Polynomial":
        return Polynomial(np.real(self._c))

    def derivative(self) -> "Polynomial":
        return Polynomial(_npoly.polyder(self._c)) if self.degree > 0 else Polynomial()

    def substitute_neg_i(self) -> "Polynomial":
        """Coefficients of ``p(-1j z)`` as a polynomial in ``z``."""
        k = np.arange(self._c.size)
        return Polynomial(self._c * (-1j) ** k)

    def roots(self) -> np.ndarray:
        return polyroots(self._c)

    def reflect(self) -> "Polynomial":
        """Coefficients of ``p(-lam)``."""
        k = np.arange(self._c.size)
        return Polynomial(self._c * (-1.0) ** k)


def _as_poly(p) -> Polynomial:
    if isinstance(p, Polynomial):
        return p
    if isinstance(p, Number):
        return Polynomial([p])
    return Polynomial(p)


@dataclass(frozen=True)
class RationalSymbol:
    """Ratio ``num(lam) / den(lam)`` of two polynomials."""

    num: Polynomial
    den: Polynomial = field(default_factory=lambda: Polynomial([1.0]))

    def __post_init__(self):
        object.__setattr__(self, "num", _as_poly(self.num))
        object.__setattr__(self, "den", _as_poly(self.den))
        if self.den.is_zero:
            raise InputError("rational symbol with zero denominator")

    @classmethod
    def coerce(cls, value) -> "RationalSymbol":
        if isinstance(value, RationalSymbol):
            return value
        return cls(_as_poly(value))

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    @property
    def is_real(self) -> bool:
        return self.num.is_real and self.den.is_real

    @property
    def is_constant(self) -> bool:
        return self.num.degree <= 0 and self.den.degree == 0

    def is_identity(self, tol: float = 1e-14) -> bool:
        """True when the symbol is the constant one."""
        if not self.is_constant or self.num.is_zero:
            return False
        return bool(abs(self.num.coeffs[0] / self.den.coeffs[0] - 1.0) <= tol)

    def __call__(self, x):
        d = self.den(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.num(x) / d

    def __mul__(self, other):
        other = RationalSymbol.coerce(other)
        return RationalSymbol(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = RationalSymbol.coerce(other)
        if other.num.is_zero:
            raise SingularityError("division by the zero symbol")
        return RationalSymbol(self.num * other.den, self.den * other.num)

    def __add__(self, other):
        other = RationalSymbol.coerce(other)
        if self.den == other.den:
            return RationalSymbol(self.num + other.num, self.den)
        return RationalSymbol(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def conj(self) -> "RationalSymbol":
        return RationalSymbol(self.num.conj(), self.den.conj())

    def substitute_neg_i(self) -> "RationalSymbol":
        return RationalSymbol(self.num.substitute_neg_i(), self.den.substitute_neg_i())

    def zeros(self) -> np.ndarray:
        return self.num.roots()

    def poles(self) -> np.ndarray:
        return self.den.roots()


def evaluate(sym, lam):
    """Evaluate a symbol at real frequency (scalar or array).

    Raises
    ------
    InputError
        If ``lam`` is not finite or has a nonzero imaginary part.
    """
    lam = _check_lam(lam)
    if isinstance(sym, RationalSymbol):
        d = sym.den(lam)
        if np.any(d == 0):
            bad = np.atleast_1d(lam)[np.atleast_1d(d) == 0][0]
            raise SingularityError(f"real pole at lam={bad!r}", pole=complex(bad))
        return sym.num(lam) / d
    return _as_poly(sym)(lam)


def extend(sym, z):
    """Evaluate the analytic extension ``sym(-1j z)`` at complex ``z``.

    On the imaginary axis ``z = 1j lam`` this agrees with ``evaluate(sym, lam)``.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise InputError("complex frequency must be finite")
    lam = -1j * z
    if isinstance(sym, RationalSymbol):
        d = sym.den(lam)
        scale = np.abs(sym.den.coeffs).sum() * np.maximum(1.0, np.abs(lam)) ** max(sym.den.degree, 0)
        hit = np.abs(d) <= 1e-14 * scale
        if np.any(hit):
            bad = np.atleast_1d(z)[np.atleast_1d(hit)][0]
            raise SingularityError(f"pole of the extension at z={complex(bad)!r}", pole=complex(bad))
        return sym.num(lam) / d
    return _as_poly(sym)(lam)


def real_part_poly(p: Polynomial) -> Polynomial:
    """Polynomial whose values on the real axis are ``Re p(lam)``."""
    return _as_poly(p).real_part()


def squared_magnitude(r) -> RationalSymbol:
    """``|r(lam)|**2`` as a rational function with real coefficients."""
    r = RationalSymbol.coerce(r)
    # for real lam, conj(p(lam)) = pbar(lam), and p * pbar has real coefficients
    num = r.num * r.num.conj()
    den = r.den * r.den.conj()
    return RationalSymbol(Polynomial(np.real(num.coeffs)), Polynomial(np.real(den.coeffs)))


@dataclass(frozen=True)
class HalfPlaneSup:
    value: float
    unbounded: bool
    argmax: float | None = None

    def __bool__(self):
        return not self.unbounded


def half_plane_sup(a_hat: Polynomial) -> HalfPlaneSup:
    """Supremum of ``Re a_hat(lam)`` over real ``lam``.

    The real-part polynomial is bounded above iff it is constant or has even
    degree with negative leading coefficient; the maximum is then attained at
    a real critical point.
    """
    q = real_part_poly(_as_poly(a_hat))
    if q.degree <= 0:
        return HalfPlaneSup(float(q(0.0)) if not q.is_zero else 0.0, False, 0.0)
    if q.degree % 2 == 1 or q.leading > 0:
        return HalfPlaneSup(np.inf, True, None)
    crit = q.derivative().roots()
    crit = np.real(crit[is_real_root(crit)])
    vals = q(crit)
    i = int(np.argmax(vals))
    return HalfPlaneSup(float(vals[i]), False, float(crit[i]))


@dataclass(frozen=True)
class PlantSpec:
    """Symbols of the plant ``d psi/dt = A psi + B w``, ``y = C psi + G v``.

    ``labels`` and ``units`` are metadata only and take no part in equality or
    hashing.
    """

    a_hat: Polynomial
    b_hat: RationalSymbol
    c_hat: RationalSymbol = field(default_factory=lambda: RationalSymbol(Polynomial([1.0])))
    g_hat: RationalSymbol = field(default_factory=lambda: RationalSymbol(Polynomial([1.0])))
    labels: dict = field(default_factory=dict, compare=False, hash=False, repr=False)
    units: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "a_hat", _as_poly(self.a_hat))
        for name in ("b_hat", "c_hat", "g_hat"):
            object.__setattr__(self, name, RationalSymbol.coerce(getattr(self, name)))
        object.__setattr__(self, "labels", dict(self.labels))
        object.__setattr__(self, "units", dict(self.units))

    @property
    def c_is_identity(self) -> bool:
        return self.c_hat.is_identity()

    def noise_ratio(self) -> RationalSymbol:
        """``|B|^2 / |G|^2`` as a real rational function."""
        return squared_magnitude(self.b_hat) / squared_magnitude(self.g_hat)


@dataclass(frozen=True)
class Diagnostic:
    """Outcome of one structural check."""

    check: str
    assumption: str
    passed: bool
    message: str = ""
    required: bool = True

    def __str__(self):
        flag = "ok  " if self.passed else ("FAIL" if self.required else "note")
        return f"[{flag}] {self.check} ({self.assumption}): {self.message}"


def all_passed(diags) -> bool:
    """True when every required diagnostic passed."""
    return all(d.passed for d in diags if d.required)


def _real_roots(p: Polynomial):
    if p.degree < 1:
        return np.empty(0)
    r = p.roots()
    return r[is_real_root(r)]


def _hermitian(sym, name) -> Diagnostic:
    lam = np.array([0.37, 1.3, 2.9, 7.1])
    a = sym(lam)
    b = sym(-lam)
    err = np.abs(b - np.conj(a)).max()
    scale = max(np.abs(a).max(), 1e-300)
    ok = err <= 1e-12 * scale
    return Diagnostic(f"{name} hermitian", "A1 (real fields)", bool(ok),
                      "symbol(-lam) = conj(symbol(lam))" if ok else f"asymmetry {err / scale:.3g}")


def validate_plant(p: PlantSpec) -> list[Diagnostic]:
    """Check the structural assumptions; never raises, never mutates ``p``.

    Checks: hermitian symmetry of every symbol, properness and absence of
    real poles of B, C and G, absence of real zeros of B and G, positivity of
    ``|G|^2``, the half-plane condition on ``Re A`` and (informational) C = 1.
    """
    out: list[Diagnostic] = []
    out.append(_hermitian(p.a_hat, "A"))
    for name in ("b_hat", "c_hat", "g_hat"):
        out.append(_hermitian(getattr(p, name), name[0].upper()))
    for name in ("b_hat", "c_hat", "g_hat"):
        sym = getattr(p, name)
        label = name[0].upper()
        out.append(Diagnostic(f"{label} proper", "A4.2", sym.is_proper,
                              f"deg num {sym.num.degree} <= deg den {sym.den.degree}"
                              if sym.is_proper else
                              f"deg num {sym.num.degree} > deg den {sym.den.degree}"))
        rp = _real_roots(sym.den)
        out.append(Diagnostic(f"{label} no real poles", "A4.2", rp.size == 0,
                              "none" if rp.size == 0 else f"real poles at {np.real(rp).tolist()}"))
    for name in ("b_hat", "g_hat"):
        sym = getattr(p, name)
        label = name[0].upper()
        if sym.num.is_zero:
            out.append(Diagnostic(f"{label} no real zeros", "A4.2", False, "symbol is identically zero"))
            continue
        rz = _real_roots(sym.num)
        out.append(Diagnostic(f"{label} no real zeros", "A4.2", rz.size == 0,
                              "none" if rz.size == 0 else f"real zeros at {np.real(rz).tolist()}"))
    g = p.g_hat
    g_ok = (not g.num.is_zero) and _real_roots(g.num).size == 0 and _real_roots(g.den).size == 0
    out.append(Diagnostic("|G|^2 > 0", "A4.3", bool(g_ok),
                          "positive on the real axis" if g_ok else "vanishes or is singular on the real axis"))
    hp = half_plane_sup(p.a_hat)
    out.append(Diagnostic("half-plane condition", "A3", not hp.unbounded,
                          f"sup Re A = {hp.value!r}" if not hp.unbounded else "Re A unbounded above"))
    out.append(Diagnostic("C identity", "A4 (locality theory)", p.c_is_identity,
                          "C = 1" if p.c_is_identity else "C is not 1; locus and matching unavailable",
                          required=False))
    return out


@dataclass(frozen=True)
class MonomialForm:
    n: int
    a: float
    sigma_w: float
    sigma_v: float

    @property
    def l_star(self) -> float:
        """Information lengthscale ``(2 a sigma_v / sigma_w)**(1 / 2n)``."""
        return (2.0 * self.a * self.sigma_v / self.sigma_w) ** (1.0 / (2 * self.n))


def monomial_form(p: PlantSpec) -> MonomialForm | None:
    """Recognize ``A = -a lam^(2n)``, constant ``B``, ``G`` and ``C = 1``."""
    c = p.a_hat.coeffs
    if p.a_hat.degree < 2 or p.a_hat.degree % 2 or not p.c_is_identity:
        return None
    if np.any(c[:-1] != 0) or np.real(c[-1]) >= 0 or np.imag(c[-1]) != 0:
        return None
    if not (p.b_hat.is_constant and p.g_hat.is_constant):
        return None
    sw = abs(p.b_hat.num.coeffs[0] / p.b_hat.den.coeffs[0]) if not p.b_hat.num.is_zero else 0.0
    sv = abs(p.g_hat.num.coeffs[0] / p.g_hat.den.coeffs[0]) if not p.g_hat.num.is_zero else 0.0
    if sw == 0 or sv == 0:
        return None
    return MonomialForm(p.a_hat.degree // 2, float(-np.real(c[-1])), float(sw), float(sv))
