"""Gain kernel in physical space.

The gain symbol splits as ``L(lam) = c_inf + F(lam)`` where ``c_inf`` is the
high-frequency limit (a Dirac component of the kernel at the origin) and
``F`` decays algebraically, ``F ~ f2 lam^-2 + f4 lam^-4 + ...``.  A plain FFT
of ``F`` would leave a slowly decaying remainder at the grid edge, so the
first few even terms of that expansion are matched by a sum of
``(lam^2 + beta^2)^-j`` terms whose inverse transforms are known in closed
form.  Only the rapidly decaying remainder goes through the FFT.

Convention: operator symbols are stored throughout, so the kernel is
``L(x) = (1 / 2 pi) int (L(lam) - c_inf) exp(i lam x) dlam``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from math import comb, factorial

import numpy as np

from .errors import DivergenceError, GridError, InputError, NumericalError, PreconditionError
from .laurent import Laurent
from .locus import branch_points, build_radicand
from .riccati import (
    FrequencyGrid,
    SpectralSolution,
    asymptotic_radius,
    gain_limit,
    gain_series,
    psd_series,
)
from .symbols import PlantSpec, monomial_form

__all__ = [
    "KernelSamples",
    "DecayFit",
    "HeisenbergReport",
    "delta_strength",
    "default_grid",
    "inverse_transform",
    "covariance_kernel",
    "evaluate_kernel",
    "truncate",
    "fit_decay_rate",
    "normalized_variance",
    "heisenberg_check",
]

TAIL_TERMS = 4
EDGE_TOL = 1e-8
SYMMETRY_TOL = 1e-10
MIN_GRID = 2**16
MAX_GRID = 2**22


def delta_strength(plant: PlantSpec) -> float:
    """Weight ``c_inf`` of the Dirac component of the gain kernel.

    Raises
    ------
    PreconditionError
        If ``C`` is not identically one.
    DivergenceError
        If the gain symbol is unbounded, so the kernel is not a measure
        plus a function.
    """
    if not plant.c_is_identity:
        raise PreconditionError("delta strength is defined here for C = 1 only")
    return gain_limit(plant)


def _scales(plant: PlantSpec):
    theta = branch_points(build_radicand(plant)).theta
    rho = asymptotic_radius(plant)
    if not np.isfinite(theta):
        theta = rho if rho > 0 else 1.0
    return theta, rho


def default_grid(plant: PlantSpec, *, lam_factor: float = 40.0, span: float = 80.0) -> FrequencyGrid:
    """Frequency grid adequate for kernel reconstruction.

    ``lam_max`` is ``lam_factor`` times the largest frequency scale of the
    symbol (decay rate or outermost singularity); ``n`` is a power of two
    large enough for the spatial period ``2 pi / dlam`` to cover ``span``
    decay lengths ``1 / theta``.
    """
    theta, rho = _scales(plant)
    scale = max(theta, rho)
    lam_max = lam_factor * scale
    need = span * lam_max / (np.pi * theta)
    n = MIN_GRID
    while n < need and n < MAX_GRID:
        n *= 2
    return FrequencyGrid(lam_max, n)


# ---------------------------------------------------------------------------
# tail model


def _lorentz_power_transform(j: int, beta: float, x):
    """``(1 / 2 pi) int exp(i lam x) (lam^2 + beta^2)^-j dlam``."""
    ax = np.abs(np.asarray(x, dtype=float))
    n = j - 1
    poly = np.zeros_like(ax)
    for k in range(n + 1):
        poly = poly + factorial(n + k) / (factorial(k) * factorial(n - k)) * ax ** (n - k) * (2 * beta) ** (-k)
    return np.exp(-beta * ax) * poly / (2.0 * factorial(n) * beta * (2.0 * beta) ** n)


def _lorentz_power_sum(coeffs, beta, lam):
    lam = np.asarray(lam, dtype=float)
    base = 1.0 / (lam * lam + beta * beta)
    out = np.zeros_like(lam)
    pw = np.ones_like(lam)
    for c in coeffs:
        pw = pw * base
        out = out + c * pw
    return out


def _tail_coefficients(series: Laurent, beta: float, terms: int):
    """Weights ``c_j`` with ``sum_j c_j (lam^2 + beta^2)^-j`` matching ``series``.

    Matching is exact through ``lam^(-2 terms)``; odd powers must vanish.
    """
    if series.is_zero or terms == 0:
        return np.zeros(0)
    if series.power >= 0:
        raise NumericalError("tail model needs a symbol that vanishes at infinity")
    # sizes of the terms at |lam| = beta, where they are all comparable
    ref = series.term_sizes(beta)[: 2 * terms + 1].max()
    f = np.zeros(terms)
    for k in range(1, 2 * terms + 1):
        ck = series.coefficient(-k)
        size = abs(ck) * beta ** (-k)
        if k % 2:
            if size > 1e-10 * ref:
                raise NumericalError("symbol is not even: odd term lam^-%d present" % k)
            continue
        if abs(np.imag(ck)) * beta ** (-k) > 1e-10 * ref:
            raise NumericalError("complex coefficient in the symbol expansion")
        f[k // 2 - 1] = float(np.real(ck))
    # f_k = sum_{j<=k} c_j (-1)^(k-j) C(k-1, k-j) beta^(2(k-j))
    c = np.zeros(terms)
    for k in range(1, terms + 1):
        acc = f[k - 1]
        for j in range(1, k):
            acc -= c[j - 1] * (-1) ** (k - j) * comb(k - 1, k - j) * beta ** (2 * (k - j))
        c[k - 1] = acc
    return c


@dataclass(frozen=True)
class _Decomposition:
    grid: FrequencyGrid
    residual: np.ndarray
    model: np.ndarray
    beta: float
    peak: float


def _decompose(grid, values, series, beta, terms, edge_tol):
    lam = grid.values
    c = _tail_coefficients(series, beta, terms)
    model_vals = _lorentz_power_sum(c, beta, lam) if c.size else np.zeros_like(lam)
    r = values - model_vals
    peak = float(np.abs(values).max())
    if peak > 0:
        edge = max(abs(r[0]), abs(r[-1]))
        if edge > edge_tol * peak:
            raise GridError(
                f"symbol remainder {edge / peak:.2g} of its peak at the grid edge; "
                "increase lam_max"
            )
    return _Decomposition(grid, r, c, beta, peak)


def _fft_sum(dec: _Decomposition):
    """``(dlam / 2 pi) sum_k r_k exp(i lam_k x_j)`` on the dual grid, all j."""
    n = dec.grid.n
    k = np.arange(n)
    y = dec.residual * np.where(k % 2 == 0, 1.0, -1.0)
    s = n * np.fft.ifft(y)
    # phase exp(i 2 pi a (b - j) / n) with a = (n-1)/2, b = n/2, reduced exactly
    m = ((n - 1) * (n - 2 * k)) % (4 * n)
    s = s * np.exp(1j * np.pi * m / (2.0 * n))
    return dec.grid.spacing / (2.0 * np.pi) * s


def _reconstruct(dec: _Decomposition, sym_tol: float):
    n = dec.grid.n
    dx = dec.grid.dual_spacing
    raw = _fft_sum(dec)
    xs_all = (np.arange(n) - n / 2) * dx
    model = np.zeros(n)
    for j, c in enumerate(dec.model, start=1):
        model = model + c * _lorentz_power_transform(j, dec.beta, xs_all)
    full = raw + model
    xs, vals = xs_all[1:], full[1:]
    peak = float(np.abs(vals.real).max())
    if peak > 0:
        imag = float(np.abs(vals.imag).max())
        if imag > sym_tol * peak:
            raise NumericalError(f"imaginary residue {imag / peak:.2g} of peak in the kernel")
        asym = float(np.abs(vals.real - vals.real[::-1]).max())
        if asym > sym_tol * peak:
            raise NumericalError(f"kernel asymmetry {asym / peak:.2g} of peak")
    return xs, vals.real.copy()


def _direct_sum(dec: _Decomposition, xs):
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    lam = dec.grid.values
    out = np.empty(xs.shape)
    for i0 in range(0, xs.size, 64):
        chunk = xs[i0 : i0 + 64]
        out[i0 : i0 + 64] = np.cos(np.outer(chunk, lam)) @ dec.residual
    out *= dec.grid.spacing / (2.0 * np.pi)
    for j, c in enumerate(dec.model, start=1):
        out = out + c * _lorentz_power_transform(j, dec.beta, xs)
    return out


# ---------------------------------------------------------------------------
# kernels


@dataclass(frozen=True)
class KernelSamples:
    """Samples of the regular part of a kernel on a symmetric spatial grid."""

    xs: np.ndarray
    values: np.ndarray
    delta_strength: float
    lam_max: float
    n: int
    truncation: float | None = None
    retained_mass: float | None = None
    null_tol: float = field(default=1e-10, repr=False)

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def peak(self) -> float:
        return float(np.abs(self.values).max())

    @property
    def is_null(self) -> bool:
        """True when the regular part vanishes (pure Dirac kernel)."""
        ref = max(abs(self.delta_strength), np.finfo(float).tiny)
        return self.peak <= self.null_tol * ref

    def at_origin(self) -> float:
        return float(self.values[np.argmin(np.abs(self.xs))])


def _regular_series(plant: PlantSpec, c_inf: float) -> Laurent:
    """Expansion of ``L - c_inf``; the constant term is removed exactly."""
    s = gain_series(plant)
    if s.power >= 0:
        c = s.coeffs.copy()
        c[: s.power + 1] = 0.0
        s = Laurent(s.power, c).strip()
    return s


def _gain_parts(solution: SpectralSolution):
    plant = solution.plant
    if not plant.c_is_identity:
        raise PreconditionError("kernel reconstruction needs C = 1")
    c_inf = solution.delta_strength
    if not np.isfinite(c_inf):
        raise DivergenceError("gain symbol unbounded; the kernel is not a measure plus a function")
    l_hat = np.asarray(solution.l_hat)
    if np.abs(l_hat.imag).max() > SYMMETRY_TOL * max(np.abs(l_hat.real).max(), 1e-300):
        raise NumericalError("gain symbol is not real under C = 1")
    values = l_hat.real - c_inf
    series = _regular_series(plant, c_inf)
    theta, rho = _scales(plant)
    beta = max(rho, theta)
    return values, series, beta, c_inf


def _decompose_gain(solution, terms, edge_tol):
    values, series, beta, c_inf = _gain_parts(solution)
    if np.abs(values).max() <= 1e-13 * max(abs(c_inf), 1e-300):
        # matched plant: nothing to model, and the edge test would compare roundoff with roundoff
        return _decompose(solution.grid, values, Laurent(0, np.zeros(1)), beta, 0, np.inf), c_inf
    return _decompose(solution.grid, values, series, beta, terms, edge_tol), c_inf


def inverse_transform(solution: SpectralSolution, *, tail_terms: int = TAIL_TERMS,
                      edge_tol: float = EDGE_TOL, sym_tol: float = SYMMETRY_TOL) -> KernelSamples:
    """Regular part of the gain kernel from a spectral solution.

    The spatial grid is the FFT dual of ``solution.grid`` with the unpaired
    sample dropped, so it is symmetric and contains ``x = 0``; its spacing is
    ``2 pi / (n dlam)``.

    Raises
    ------
    GridError
        If the un-modeled remainder has not decayed to ``edge_tol`` of the
        symbol peak at the grid edge.
    NumericalError
        If the result is not real and even to ``sym_tol``.
    """
    dec, c_inf = _decompose_gain(solution, tail_terms, edge_tol)
    xs, vals = _reconstruct(dec, sym_tol)
    return KernelSamples(xs, vals, c_inf, solution.grid.lam_max, solution.grid.n)


def evaluate_kernel(solution: SpectralSolution, xs, *, tail_terms: int = TAIL_TERMS,
                    edge_tol: float = EDGE_TOL) -> np.ndarray:
    """Regular kernel at arbitrary points by direct summation (no FFT)."""
    dec, _ = _decompose_gain(solution, tail_terms, edge_tol)
    return _direct_sum(dec, xs)


def covariance_kernel(solution: SpectralSolution, *, tail_terms: int = TAIL_TERMS,
                      edge_tol: float = EDGE_TOL, sym_tol: float = SYMMETRY_TOL) -> KernelSamples:
    """Steady-state error covariance ``p(x)``; ``p(0)`` is the error variance."""
    plant = solution.plant
    series = psd_series(plant)
    theta, rho = _scales(plant)
    dec = _decompose(solution.grid, np.asarray(solution.p_hat, dtype=float), series,
                     max(theta, rho), tail_terms, edge_tol)
    xs, vals = _reconstruct(dec, sym_tol)
    return KernelSamples(xs, vals, 0.0, solution.grid.lam_max, solution.grid.n)


def truncate(k: KernelSamples, T: float) -> KernelSamples:
    """Zero the regular part beyond ``|x| > T``; the Dirac weight is kept.

    ``T = 0`` removes the regular part entirely.  The retained fraction of
    ``int |L|`` is recorded.
    """
    if not np.isfinite(T) and T != np.inf or T < 0:
        raise InputError("truncation length must be >= 0")
    keep = np.abs(k.xs) <= T if T > 0 else np.zeros(k.xs.size, dtype=bool)
    vals = np.where(keep, k.values, 0.0)
    total = np.abs(k.values).sum()
    mass = float(np.abs(vals).sum() / total) if total > 0 else 1.0
    return replace(k, values=vals, truncation=float(T), retained_mass=mass)


# ---------------------------------------------------------------------------
# decay fit


@dataclass(frozen=True)
class DecayFit:
    theta_hat: float
    window: tuple[float, float]
    r2: float
    theta_ref: float
    n_points: int
    envelope_constant: float
    tail_bound_ok: bool


def fit_decay_rate(k: KernelSamples, theta_ref: float, *, floor: float = 1e-12,
                   start: float = 2.0, min_points: int = 20, bound_factor: float = 0.9,
                   prefactor_power: float = 0.0) -> DecayFit:
    """Least-squares fit of ``ln|L(x)|`` against ``x`` on ``[start / theta_ref, x2]``.

    ``x2`` is the largest ``x`` with ``|L| > floor * max|L|``; samples below
    the floor are excluded.  Square-root branch points give kernels of the
    form ``x^(-3/2) exp(-theta x)`` times an oscillation; passing
    ``prefactor_power=1.5`` fits ``ln(|L| x^1.5)`` instead, which removes the
    algebraic contribution to the fitted slope.  The report also checks the envelope
    ``|L(x)| <= C exp(-bound_factor * theta_ref * x)`` on the window, with
    ``C`` taken from the first quarter of the window.

    Raises
    ------
    NumericalError
        For a null regular part.
    GridError
        If fewer than ``min_points`` samples fall in the window.
    """
    if not theta_ref > 0:
        raise InputError("theta_ref must be positive")
    if k.is_null:
        raise NumericalError("regular part is null; no decay to fit")
    a = np.abs(k.values)
    m = a.max()
    above = a > floor * m
    pos = k.xs >= 0
    if not np.any(pos & above):
        raise GridError("no samples above the amplitude floor")
    x1 = start / theta_ref
    x2 = float(k.xs[pos & above].max())
    sel = pos & above & (k.xs >= x1) & (k.xs <= x2)
    npts = int(sel.sum())
    if npts < min_points:
        raise GridError(f"decay window [{x1:.3g}, {x2:.3g}] holds {npts} < {min_points} samples")
    x, y = k.xs[sel], np.log(a[sel])
    if prefactor_power:
        y = y + prefactor_power * np.log(x)
    slope, icpt = np.polyfit(x, y, 1)
    fit = slope * x + icpt
    ss = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(((y - fit) ** 2).sum()) / ss if ss > 0 else 1.0
    rate = bound_factor * theta_ref
    env = a[sel] * np.exp(rate * x)
    q = max(1, npts // 4)
    c = float(env[:q].max())
    ok = bool(np.all(env <= c * (1.0 + 1e-12)))
    return DecayFit(float(-slope), (float(x1), x2), r2, float(theta_ref), npts, c, ok)


# ---------------------------------------------------------------------------
# localization


def normalized_variance(samples, xs):
    """Center ``m`` and normalized variance ``int (x-m)^2 |f|^2 / int |f|^2``."""
    f2 = np.abs(np.asarray(samples)) ** 2
    xs = np.asarray(xs, dtype=float)
    norm = np.trapezoid(f2, xs)
    if not norm > 0:
        raise NumericalError("zero norm")
    m = np.trapezoid(xs * f2, xs) / norm
    v = np.trapezoid((xs - m) ** 2 * f2, xs) / norm
    return float(m), float(v)


@dataclass(frozen=True)
class HeisenbergReport:
    v_space: float
    v_freq: float
    product: float
    v_space_scaled: float | None = None
    l_star: float | None = None

    @property
    def satisfied(self) -> bool:
        return self.product >= 0.25 - 1e-9


def _symbol_variance(solution: SpectralSolution, c_inf: float):
    lam = solution.lam
    f = solution.l_hat.real - c_inf
    f2 = f * f
    series = _regular_series(solution.plant, c_inf)
    s2 = series * series
    lam_max = solution.grid.lam_max
    t0, _ = s2.two_sided_tail(lam_max)
    t2, _ = Laurent(s2.power + 2, s2.coeffs).two_sided_tail(lam_max)
    norm = np.trapezoid(f2, lam) + float(np.real(t0))
    mean = np.trapezoid(lam * f2, lam) / norm
    second = np.trapezoid(lam * lam * f2, lam) + float(np.real(t2))
    return float(second / norm - mean * mean)


def heisenberg_check(plant: PlantSpec, solution: SpectralSolution, kernel: KernelSamples,
                     l_star: float | None = None) -> HeisenbergReport:
    """Normalized variances of the regular kernel and of ``L - c_inf``.

    The frequency-side moments include the analytic tails beyond the grid.
    For monomial plants ``v_space / l*^2`` is reported as well.

    Raises
    ------
    NumericalError
        If the product falls below ``1/4 - 1e-9`` (a quadrature failure) or
        the regular kernel is null.
    """
    if kernel.is_null:
        raise NumericalError("regular kernel is null")
    _, vs = normalized_variance(kernel.values, kernel.xs)
    vf = _symbol_variance(solution, kernel.delta_strength)
    if l_star is None:
        mf = monomial_form(plant)
        l_star = mf.l_star if mf is not None else None
    rep = HeisenbergReport(vs, vf, vs * vf, vs / l_star**2 if l_star else None, l_star)
    if not rep.satisfied:
        raise NumericalError(f"uncertainty product {rep.product!r} below 1/4")
    return rep
