"""Steady-state estimation error variance.

``var(e) = (1 / 2 pi) int P(lam) dlam``.  The integrand decays only
algebraically, so the integral is split at a cut ``lam_c``: composite
Gauss-Legendre on ``[-lam_c, lam_c]`` and the term-by-term integral of the
Laurent expansion of ``P`` beyond it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import AssumptionViolation, DivergenceError, InputError, NumericalError
from .riccati import asymptotic_radius, psd_error, psd_series
from .symbols import PlantSpec, Polynomial, all_passed, real_part_poly, squared_magnitude, validate_plant

__all__ = [
    "PerfReport",
    "MonotonicityReport",
    "error_variance",
    "closed_form_diffusion",
    "f_n",
    "fn_integral",
    "monomial_variance",
    "fit_power_law",
    "monomial_scaling_exponents",
    "classify_monotonicity",
    "monotonicity_sweep",
    "GAMMA_QUARTER",
]

GAMMA_QUARTER = math.gamma(0.25)

_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


@dataclass(frozen=True)
class PerfReport:
    var_e: float
    method: str
    abs_err: float
    lam_cut: float | None = None
    tail: float | None = None
    panels: int | None = None
    constants: dict = field(default_factory=dict)
    scaling: dict = field(default_factory=dict)
    outside_assumptions: bool = False


def _gl(f, a, b, panels):
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    nodes = mid[:, None] + half[:, None] * _GL_X[None, :]
    return float(((f(nodes) * _GL_W).sum(axis=1) * half).sum())


def _core(f, b, rtol, max_panels=2**15):
    """Doubling composite Gauss-Legendre on ``[0, b]``; two agreeing doublings."""
    panels = 16
    prev = _gl(f, 0.0, b, panels)
    agree = 0
    while panels < max_panels:
        panels *= 2
        cur = _gl(f, 0.0, b, panels)
        err = abs(cur - prev)
        agree = agree + 1 if err <= rtol * abs(cur) else 0
        if agree >= 2:
            return cur, err, panels
        prev = cur
    raise NumericalError(f"quadrature did not converge with {panels} panels")


def _degrees(plant: PlantSpec) -> str:
    u = real_part_poly(plant.a_hat)
    b2 = squared_magnitude(plant.b_hat)
    g2 = squared_magnitude(plant.g_hat)
    return (f"deg Re A = {u.degree}, deg |B|^2 = {b2.num.degree}/{b2.den.degree}, "
            f"deg |G|^2 = {g2.num.degree}/{g2.den.degree}")


def error_variance(plant: PlantSpec, rtol: float = 1e-10, *, strict: bool = True) -> PerfReport:
    """Steady-state error variance by quadrature of the error spectrum.

    Parameters
    ----------
    plant : PlantSpec
    rtol : float
        Target relative accuracy; the reported ``abs_err`` is below
        ``rtol * var_e`` or the call raises.
    strict : bool
        Refuse plants failing :func:`validate_plant`; otherwise compute and
        mark the report ``outside_assumptions``.

    Raises
    ------
    DivergenceError
        If ``P`` decays no faster than ``1 / |lam|``.
    """
    if not rtol > 0:
        raise InputError("rtol must be positive")
    diags = validate_plant(plant)
    outside = not all_passed(diags)
    if outside and strict:
        raise AssumptionViolation("; ".join(str(d) for d in diags if d.required and not d.passed))
    series = psd_series(plant)
    lead = series.leading_exponent()
    if lead is not None and lead >= -1:
        raise DivergenceError(f"error spectrum decays like lam^{lead}, not integrable ({_degrees(plant)})")

    def f(lam):
        return psd_error(plant, lam) + psd_error(plant, -lam)

    rho = asymptotic_radius(plant)
    cut = 4.0 * rho if rho > 0 else 1.0
    for _ in range(40):
        core, core_err, panels = _core(f, cut, 0.1 * rtol)
        if lead is None:
            tail, tail_err = 0.0, 0.0
        else:
            tail, tail_err = series.two_sided_tail(cut)
            tail = float(np.real(tail))
        total = core + tail
        if tail_err <= 0.1 * rtol * abs(total):
            break
        cut *= 2.0
    else:
        raise NumericalError("tail expansion did not converge")
    var = total / (2.0 * np.pi)
    err = (core_err + tail_err) / (2.0 * np.pi)
    if not var > 0:
        raise NumericalError(f"nonpositive error variance {var!r}")
    if err > rtol * var:
        raise NumericalError(f"error estimate {err:.3g} exceeds rtol")
    return PerfReport(float(var), "quadrature", float(err), float(cut), tail / (2.0 * np.pi),
                      panels, outside_assumptions=outside)


def closed_form_diffusion(kappa: float, sigma_w: float, sigma_v: float) -> float:
    """``Gamma(1/4)^2 sigma_w^(3/2) sigma_v^(1/2) kappa^(-1/2) / (6 pi^(3/2))``."""
    for name, v in (("kappa", kappa), ("sigma_w", sigma_w), ("sigma_v", sigma_v)):
        if not (np.isfinite(v) and v > 0):
            raise InputError(f"{name} must be positive, got {v!r}")
    return GAMMA_QUARTER**2 * sigma_w**1.5 * sigma_v**0.5 / (6.0 * np.pi**1.5 * np.sqrt(kappa))


def f_n(n: int, lam):
    """Dimensionless monomial error spectrum ``2 / (lam^2n + sqrt(lam^4n + 4))``."""
    if int(n) != n or n < 1:
        raise InputError("n must be a positive integer")
    t = np.asarray(lam, dtype=float) ** (2 * int(n))
    return 2.0 / (t + np.hypot(t, 2.0))


@lru_cache(maxsize=None)
def fn_integral(n: int) -> float:
    """``int_R f_n(lam) dlam``, by adaptive quadrature on the half line."""
    if int(n) != n or n < 1:
        raise InputError("n must be a positive integer")
    n = int(n)
    head, e1 = quad(lambda x: float(f_n(n, x)), 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    # lam = 1/t on [1, inf) gives a smooth integrand on (0, 1]
    body, e2 = quad(lambda t: float(f_n(n, 1.0 / t)) / (t * t) if t > 0 else (1.0 if n == 1 else 0.0),
                    0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
    return 2.0 * (head + body)


def monomial_variance(n: int, a: float, sigma_w: float, sigma_v: float) -> float:
    """Error variance of ``A = -a lam^2n`` with white noises, from the scaling law.

    ``var = sigma_w^((2n+1)/2n) sigma_v^((2n-1)/2n) a^(-1/2n) C_n``, with
    ``C_n = int_R f_n / (2 pi 2^(1/2n))`` computed once per ``n``.
    """
    for name, v in (("a", a), ("sigma_w", sigma_w), ("sigma_v", sigma_v)):
        if not (np.isfinite(v) and v > 0):
            raise InputError(f"{name} must be positive, got {v!r}")
    e = 1.0 / (2 * n)
    return (sigma_w ** (1 + e) * sigma_v ** (1 - e) * a ** (-e)
            * fn_integral(n) / (2.0 * np.pi * 2.0**e))


def fit_power_law(params, values) -> float:
    """Slope of ``log(values)`` against ``log(params)``."""
    slope, _ = np.polyfit(np.log(np.asarray(params, float)), np.log(np.asarray(values, float)), 1)
    return float(slope)


def monomial_scaling_exponents(n: int, base=(1.0, 1.0, 1.0), factors=None, rtol: float = 1e-10):
    """Exponents of ``var(e)`` in ``(a, sigma_w, sigma_v)`` from quadrature sweeps.

    Each parameter is varied over ``factors`` times its base value with the
    others fixed.  Returns ``{"a": ..., "sigma_w": ..., "sigma_v": ...}``.
    """
    factors = np.logspace(-1, 1, 7) if factors is None else np.asarray(factors, float)
    out = {}
    for i, name in enumerate(("a", "sigma_w", "sigma_v")):
        vals = []
        for f in factors:
            p = list(base)
            p[i] *= f
            a, sw, sv = p
            coeffs = np.zeros(2 * n + 1)
            coeffs[-1] = -a
            plant = PlantSpec(Polynomial(coeffs), sw, g_hat=sv)
            vals.append(error_variance(plant, rtol).var_e)
        out[name] = fit_power_law(factors * base[i], vals)
    return out


@dataclass(frozen=True)
class MonotonicityReport:
    params: np.ndarray
    values: np.ndarray
    verdict: str
    first_violation: int | None
    argmax: int
    argmin: int


def classify_monotonicity(params, values, tol: float = 1e-9) -> MonotonicityReport:
    """Classify a sampled curve.

    Verdicts: ``"strictly decreasing"``, ``"strictly increasing"``,
    ``"nonincreasing"``, ``"nondecreasing"``, ``"constant"`` or
    ``"non-monotone"``.  Steps with ``|dv| <= tol * max|v|`` count as flat.
    ``first_violation`` is the index of the first sample breaking the trend
    set by the first non-flat step.
    """
    params = np.asarray(params, float)
    v = np.asarray(values, float)
    d = np.diff(v)
    eps = tol * (np.abs(v).max() if v.size else 0.0)
    sign = np.where(d > eps, 1, np.where(d < -eps, -1, 0))
    nz = sign[sign != 0]
    first = None
    if nz.size == 0:
        verdict = "constant"
    elif np.all(nz == nz[0]):
        strict = np.all(sign != 0)
        word = "decreasing" if nz[0] < 0 else "increasing"
        verdict = ("strictly " + word) if strict else ("non" + ("increasing" if nz[0] < 0 else "decreasing"))
    else:
        verdict = "non-monotone"
        trend = nz[0]
        first = int(np.flatnonzero(sign == -trend)[0]) + 1
    return MonotonicityReport(params, v, verdict, first, int(np.argmax(v)), int(np.argmin(v)))


def monotonicity_sweep(plant_family, params, *, quantity=None, rtol: float = 1e-10,
                       tol: float = 1e-9, executor=None) -> MonotonicityReport:
    """Evaluate ``quantity(plant_family(p))`` over ``params`` and classify it.

    ``quantity`` defaults to the error variance.
    """
    params = np.asarray(params, float)
    if params.size < 3:
        raise InputError("a monotonicity sweep needs at least three values")
    if quantity is None:
        def quantity(plant):
            return error_variance(plant, rtol).var_e

    def one(p):
        return quantity(plant_family(p))

    vals = list(executor.map(one, params)) if executor is not None else [one(p) for p in params]
    return classify_monotonicity(params, vals, tol)
