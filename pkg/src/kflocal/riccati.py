"""Frequency-by-frequency solution of the steady-state Riccati equation.

For a spatially invariant plant the operator Riccati equation decouples into
the scalar quadratic

    2 Re(A) P + |B|^2 - |C|^2 |G|^-2 P^2 = 0

at every real frequency ``lam``.  Its positive root is the error power
spectral density ``P``; the gain symbol is ``L = P conj(C) / |G|^2``.

Both roots are evaluated in cancellation-free form: with ``u = Re A`` and
``r = sqrt(u^2 + |B|^2 |C|^2 / |G|^2)``, one uses ``|B|^2 / (r - u)`` when
``u <= 0`` and ``|G|^2 / |C|^2 (u + r)`` otherwise.  Plants of interest have
``u -> -inf``, where the textbook form ``u + r`` loses every digit.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AssumptionViolation,
    DivergenceError,
    InputError,
    NumericalError,
    PreconditionError,
    SingularityError,
)
from .laurent import DEFAULT_TERMS, Laurent
from .symbols import (
    PlantSpec,
    _check_lam,
    all_passed,
    real_part_poly,
    squared_magnitude,
    validate_plant,
)

__all__ = [
    "FrequencyGrid",
    "SpectralSolution",
    "MatchingResult",
    "psd_error",
    "gain_symbol",
    "are_residual",
    "solve_grid",
    "closed_loop_symbol",
    "matching_test",
    "psd_series",
    "gain_series",
    "gain_limit",
    "asymptotic_radius",
]


def _pieces(plant: PlantSpec, lam):
    lam = _check_lam(lam)
    u = real_part_poly(plant.a_hat)(lam)
    u = np.broadcast_to(np.asarray(u, dtype=float), lam.shape)
    b2 = np.real(squared_magnitude(plant.b_hat)(lam))
    c2 = np.real(squared_magnitude(plant.c_hat)(lam))
    g2 = np.real(squared_magnitude(plant.g_hat)(lam))
    if np.any(c2 == 0) or np.any(g2 == 0) or not np.all(np.isfinite(g2)):
        bad = np.atleast_1d(lam)[np.atleast_1d((c2 == 0) | (g2 == 0) | ~np.isfinite(g2))][0]
        raise SingularityError(f"|C|^2 or |G|^2 vanishes or is singular at lam={bad!r}", pole=complex(bad))
    return lam, u, b2, c2, g2


def _psd(u, b2, c2, g2):
    q = b2 * c2 / g2
    r = np.hypot(u, np.sqrt(q))
    with np.errstate(divide="ignore", invalid="ignore"):
        neg = np.where(r - u > 0, b2 / (r - u), 0.0)
    pos = g2 / c2 * (u + r)
    return np.where(u <= 0, neg, pos)


def psd_error(plant: PlantSpec, lam):
    """Error power spectral density ``P(lam)``, the positive Riccati root.

    Pointwise and vectorized over ``lam``; no assumption checks are run here
    (see :func:`solve_grid`).

    Raises
    ------
    SingularityError
        If ``|C|^2`` or ``|G|^2`` vanishes at a requested frequency.
    """
    _, u, b2, c2, g2 = _pieces(plant, lam)
    return _psd(u, b2, c2, g2)


def gain_symbol(plant: PlantSpec, lam):
    """Kalman gain symbol ``L(lam) = P(lam) conj(C(lam)) / |G(lam)|^2``."""
    lam, u, b2, c2, g2 = _pieces(plant, lam)
    p = _psd(u, b2, c2, g2)
    if plant.c_is_identity:
        return p / g2 + 0j
    return p * np.conj(plant.c_hat(lam)) / g2


def are_residual(plant: PlantSpec, lam, p):
    """Riccati left-hand side at ``(lam, p)`` divided by ``max(1, |B|^2)``."""
    _, u, b2, c2, g2 = _pieces(plant, lam)
    p = np.asarray(p, dtype=float)
    res = 2.0 * u * p + b2 - c2 / g2 * p * p
    return res / np.maximum(1.0, b2)


def closed_loop_symbol(plant: PlantSpec, lam):
    """Closed-loop symbol ``A - L C`` and the flag ``Re(A - L C) < 0``."""
    lam = _check_lam(lam)
    cl = plant.a_hat(lam) - gain_symbol(plant, lam) * plant.c_hat(lam)
    cl = np.asarray(cl, dtype=complex)
    return cl, np.real(cl) < 0


# ---------------------------------------------------------------------------
# asymptotics at |lam| -> infinity


def _series_parts(plant: PlantSpec, terms: int):
    u = Laurent.from_poly(real_part_poly(plant.a_hat), terms)
    b2 = Laurent.from_rational(squared_magnitude(plant.b_hat), terms)
    c2 = Laurent.from_rational(squared_magnitude(plant.c_hat), terms)
    g2 = Laurent.from_rational(squared_magnitude(plant.g_hat), terms)
    if c2.is_zero or g2.is_zero:
        raise SingularityError("|C|^2 or |G|^2 is identically zero")
    q = b2 * c2 / g2
    rad = (u * u + q).strip()
    if rad.is_zero:
        raise NumericalError("Riccati discriminant vanishes identically")
    if rad.power % 2:
        raise DivergenceError(
            f"discriminant grows like lam^{rad.power}; its square root has no Laurent expansion"
        )
    s = rad.sqrt()
    if s.power % 2 and s.power > 0:
        # Re A is even, so it cannot cancel |lam|^odd: L grows like s
        raise DivergenceError(f"gain symbol grows like |lam|^{s.power}")
    if s.power % 2:
        # sqrt(rad) ~ |lam|^odd, which is not a Laurent series in lam
        raise NumericalError(f"square root of the discriminant behaves like |lam|^{s.power}")
    return u, b2, c2, g2, s


def psd_series(plant: PlantSpec, terms: int = DEFAULT_TERMS) -> Laurent:
    """Laurent expansion of ``P(lam)`` at infinity.

    Uses the same cancellation-free branch as the pointwise evaluation, chosen
    from the sign of the leading real part of ``A``.
    """
    u, b2, c2, g2, s = _series_parts(plant, terms)
    if b2.is_zero:
        return Laurent(0, np.zeros(terms))
    up = None if u.is_zero else u.strip()
    if up is None or up.power < s.power or (up.power == s.power and up.coeffs[0] < 0):
        den = s if up is None else (s - up).strip()
        return (b2 / den).strip()
    return (g2 / c2 * (up + s)).strip()


def gain_series(plant: PlantSpec, terms: int = DEFAULT_TERMS) -> Laurent:
    """Laurent expansion of ``L(lam)`` at infinity."""
    p = psd_series(plant, terms)
    g2 = Laurent.from_rational(squared_magnitude(plant.g_hat), terms)
    out = p / g2
    if not plant.c_is_identity:
        out = out * Laurent.from_rational(plant.c_hat.conj(), terms)
    return out.strip()


def gain_limit(plant: PlantSpec, terms: int = DEFAULT_TERMS) -> float:
    """``lim_{|lam| -> inf} L(lam)``.

    Raises
    ------
    DivergenceError
        If the gain symbol grows without bound.
    """
    s = gain_series(plant, terms)
    lead = s.leading_exponent()
    if lead is None or lead < 0:
        return 0.0
    if lead > 0:
        raise DivergenceError(f"gain symbol grows like lam^{lead}")
    c = s.coefficient(0)
    if np.iscomplexobj(c) and abs(np.imag(c)) > 1e-12 * abs(c):
        raise NumericalError("complex high-frequency gain limit")
    return float(np.real(c))


def asymptotic_radius(plant: PlantSpec) -> float:
    """Largest modulus of any finite singularity or zero entering ``L``.

    The Laurent expansions converge for ``|lam|`` beyond this radius, so it
    sets the frequency scale of the symbol.
    """
    u = real_part_poly(plant.a_hat)
    b2 = squared_magnitude(plant.b_hat)
    c2 = squared_magnitude(plant.c_hat)
    g2 = squared_magnitude(plant.g_hat)
    q = b2 * c2 / g2
    rad = (u * u) * q.den + q.num
    polys = [rad, q.den, b2.num, b2.den, g2.num, g2.den, c2.num, c2.den]
    radius = 0.0
    for p in polys:
        if p.degree >= 1:
            r = p.roots()
            if r.size:
                radius = max(radius, float(np.abs(r).max()))
    return radius


# ---------------------------------------------------------------------------
# grids


@dataclass(frozen=True)
class FrequencyGrid:
    """Symmetric uniform grid of ``n`` frequencies on ``[-lam_max, lam_max]``.

    ``n`` is even, so zero is not a node; nodes sit at ``(k - (n - 1) / 2) dlam``
    with ``dlam = 2 lam_max / (n - 1)``, which makes the grid exactly
    antisymmetric in floating point.
    """

    lam_max: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.lam_max) and self.lam_max > 0):
            raise InputError("lam_max must be positive and finite")
        if int(self.n) != self.n or self.n < 2 or self.n % 2:
            raise InputError("grid size must be an even integer >= 2")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam_max", float(self.lam_max))

    @property
    def spacing(self) -> float:
        return 2.0 * self.lam_max / (self.n - 1)

    @property
    def values(self) -> np.ndarray:
        k = np.arange(self.n) - (self.n - 1) / 2.0
        return k * self.spacing

    @property
    def dual_spacing(self) -> float:
        """Spatial step ``2 pi / (n dlam)`` of the matching FFT grid."""
        return 2.0 * np.pi / (self.n * self.spacing)


@dataclass(frozen=True)
class SpectralSolution:
    plant: PlantSpec
    grid: FrequencyGrid
    p_hat: np.ndarray
    l_hat: np.ndarray
    residuals: np.ndarray
    delta_strength: float
    outside_assumptions: bool = False
    notes: tuple = field(default_factory=tuple)

    @property
    def lam(self) -> np.ndarray:
        return self.grid.values

    @property
    def max_residual(self) -> float:
        return float(np.abs(self.residuals).max())


def solve_grid(plant: PlantSpec, grid: FrequencyGrid, *, tol: float = 1e-10,
               strict: bool = True, executor=None) -> SpectralSolution:
    """Evaluate ``P``, ``L`` and the Riccati residual on every grid node.

    Parameters
    ----------
    plant : PlantSpec
    grid : FrequencyGrid
    tol : float
        Bound on the normalized residual; larger residuals raise.
    strict : bool
        If True a plant failing :func:`validate_plant` raises
        :class:`AssumptionViolation`.  If False the solution is computed and
        marked ``outside_assumptions``.
    executor : concurrent.futures.Executor, optional
        Evaluates chunks of the grid in parallel; the result does not depend
        on the evaluation order.
    """
    diags = validate_plant(plant)
    outside = not all_passed(diags)
    notes = []
    if outside:
        failed = "; ".join(str(d) for d in diags if d.required and not d.passed)
        if strict:
            raise AssumptionViolation(failed)
        warnings.warn(f"plant outside assumptions: {failed}", stacklevel=2)
        notes.append("outside assumptions")
    if not plant.c_is_identity:
        notes.append("C is not 1: gain branch unverified")

    lam = grid.values

    def work(chunk):
        l, u, b2, c2, g2 = _pieces(plant, chunk)
        p = _psd(u, b2, c2, g2)
        res = (2.0 * u * p + b2 - c2 / g2 * p * p) / np.maximum(1.0, b2)
        return p, res

    if executor is None:
        p, res = work(lam)
    else:
        parts = list(executor.map(work, np.array_split(lam, 8)))
        p = np.concatenate([a for a, _ in parts])
        res = np.concatenate([b for _, b in parts])
    if not np.all(p > 0):
        k = int(np.flatnonzero(~(p > 0))[0])
        raise NumericalError(f"nonpositive error spectrum at lam={lam[k]!r}")
    if np.abs(res).max() > tol:
        k = int(np.argmax(np.abs(res)))
        raise NumericalError(f"Riccati residual {res[k]:.3g} at lam={lam[k]!r} exceeds {tol:g}")
    l_hat = gain_symbol(plant, lam)
    try:
        c_inf = gain_limit(plant)
    except NumericalError:
        c_inf = float("nan")
        notes.append("gain symbol unbounded at high frequency")
    return SpectralSolution(plant, grid, p, np.asarray(l_hat, dtype=complex), res, c_inf,
                            outside, tuple(notes))


# ---------------------------------------------------------------------------
# matching


@dataclass(frozen=True)
class MatchingResult:
    matched: bool
    ell: float | None
    max_residual: float
    lam: np.ndarray = field(repr=False, default=None)
    residuals: np.ndarray = field(repr=False, default=None)


def matching_test(plant: PlantSpec, grid: FrequencyGrid, tol: float = 1e-9) -> MatchingResult:
    """Test ``|B|^2 = ell (ell - 2 Re A) |G|^2`` for a constant ``ell > 0``.

    ``ell`` is the positive root of the identity at ``lam = 0``; the identity
    is then checked on ``grid`` with residuals normalized by the sum of the
    magnitudes of its terms.

    Raises
    ------
    PreconditionError
        If ``C`` is not identically one.
    """
    if not plant.c_is_identity:
        raise PreconditionError("matching needs C = 1")
    _, u0, b0, _, g0 = _pieces(plant, np.array([0.0]))
    u0, q0 = float(u0[0]), float(b0[0] / g0[0])
    r0 = np.hypot(u0, np.sqrt(q0))
    ell = q0 / (r0 - u0) if u0 <= 0 and r0 - u0 > 0 else u0 + r0
    lam = grid.values
    _, u, b2, _, g2 = _pieces(plant, lam)
    lhs = b2
    rhs = ell * (ell - 2.0 * u) * g2
    scale = b2 + ell * ell * g2 + 2.0 * ell * np.abs(u) * g2
    with np.errstate(divide="ignore", invalid="ignore"):
        res = np.where(scale > 0, np.abs(lhs - rhs) / scale, 0.0)
    mres = float(res.max())
    ok = bool(ell > 0 and mres <= tol)
    return MatchingResult(ok, float(ell) if ell > 0 else None, mres, lam, res)
