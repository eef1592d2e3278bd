import numpy as np
import pytest

from kflocal.casestudies import CASES, make_case, nondimensionalize
from kflocal.errors import DivergenceError, GridError, NumericalError
from kflocal.kernel import (covariance_kernel, default_grid, delta_strength, evaluate_kernel,
                            fit_decay_rate, heisenberg_check, inverse_transform,
                            normalized_variance, truncate)
from kflocal.locus import decay_rate
from kflocal.perf import error_variance
from kflocal.riccati import FrequencyGrid, solve_grid
from kflocal.symbols import PlantSpec, Polynomial, RationalSymbol

# mpmath quadosc, 30 digits: (1/pi) int_0^inf (L(lam) - c_inf) cos(lam x) dlam
WHITE_UNIT = {0.5: 0.28179980780682018, 2.0: 0.085310756579087219, 10.0: -9.9995093699237164e-6}
CORRELATED = {  # dimensionless, regular part
    0.5: {0.5: 0.51972779180636135, 3.0: 0.015160124229265928},
    2.0: {0.5: -1.9926009762304348, 3.0: -0.055325985266899058},
}


def monomial(n, a=1.0, sw=1.0, sv=1.0):
    c = np.zeros(2 * n + 1)
    c[-1] = -a
    return PlantSpec(Polynomial(c), sw, g_hat=sv)


def solve(plant, grid=None):
    return solve_grid(plant, grid or default_grid(plant))


def all_case_plants():
    out = []
    for l in (0.5, 1.0, 2.0):
        out.append(("white", make_case("diffusion-white", l_star=l).plant))
    for pi in (0.1, 0.5, 2.0, 10.0):
        out.append(("correlated", make_case("diffusion-correlated", pi_star=pi).plant))
    for pi in (0.3, 1.0, 3.0):
        out.append(("sh", make_case("swift-hohenberg", pi_star=pi).plant))
    return out


# --- delta strength ---------------------------------------------------------------

def test_delta_strength_examples():
    assert delta_strength(monomial(1)) == 0.0
    assert delta_strength(monomial(3, 2.0, 5.0, 0.1)) == 0.0
    assert delta_strength(nondimensionalize("diffusion-correlated", pi_star=1.5).plant) == pytest.approx(4.5)


def test_delta_strength_divergent():
    # constant A with noise ratio growing like lam^2
    p = PlantSpec(Polynomial([-1.0]), 1.0, g_hat=RationalSymbol(Polynomial([1.0]), Polynomial([1.0, 1j])))
    with pytest.raises(DivergenceError):
        delta_strength(p)
    sol = solve_grid(p, FrequencyGrid(10.0, 64))
    with pytest.raises(DivergenceError):
        inverse_transform(sol)


# --- reconstruction against mpmath ------------------------------------------

def test_white_kernel_against_mpmath():
    sol = solve(monomial(1))
    got = evaluate_kernel(sol, list(WHITE_UNIT))
    for g, (x, ref) in zip(got, WHITE_UNIT.items()):
        assert g == pytest.approx(ref, rel=1e-9, abs=1e-14)


@pytest.mark.parametrize("pi", [0.5, 2.0])
def test_correlated_kernel_against_mpmath(pi):
    sol = solve(nondimensionalize("diffusion-correlated", pi_star=pi).plant)
    xs = list(CORRELATED[pi])
    got = evaluate_kernel(sol, xs)
    for g, x in zip(got, xs):
        assert g == pytest.approx(CORRELATED[pi][x], rel=1e-9)


def test_fft_samples_agree_with_direct_sum():
    sol = solve(monomial(1))
    k = inverse_transform(sol)
    idx = np.searchsorted(k.xs, [0.0, 1.0, 4.0, 12.0])
    direct = evaluate_kernel(sol, k.xs[idx])
    assert np.allclose(k.values[idx], direct, rtol=1e-10, atol=1e-13 * k.peak)


def test_spatial_grid_spacing():
    sol = solve(monomial(1), FrequencyGrid(20.0, 2**14))
    k = inverse_transform(sol)
    assert k.dx == pytest.approx(2 * np.pi / (2**14 * sol.grid.spacing), rel=1e-12)
    assert np.any(k.xs == 0.0)
    assert np.allclose(k.xs, -k.xs[::-1], atol=1e-12)


@pytest.mark.parametrize("label,plant", all_case_plants())
def test_kernels_real_even(label, plant):
    k = inverse_transform(solve(plant))
    assert np.isrealobj(k.values)
    assert np.abs(k.values - k.values[::-1]).max() <= 1e-10 * k.peak


@pytest.mark.parametrize("label,plant", all_case_plants())
def test_parseval_route(label, plant):
    sol = solve(plant)
    p0 = covariance_kernel(sol).at_origin()
    assert p0 == pytest.approx(error_variance(plant).var_e, rel=1e-6)


@pytest.mark.parametrize("name,kw", [("diffusion-white", {}), ("diffusion-correlated", {"pi_star": 2.0}),
                                     ("swift-hohenberg", {"pi_star": 1.0})])
def test_grid_refinement(name, kw):
    plant = make_case(name, **kw).plant
    g = default_grid(plant)
    xs = np.array([0.0, 0.3, 1.0, 2.5, 6.0])
    a = evaluate_kernel(solve(plant, g), xs)
    b = evaluate_kernel(solve(plant, FrequencyGrid(2 * g.lam_max, 2 * g.n)), xs)
    assert np.abs(a - b).max() < 1e-6 * np.abs(a).max()


def test_edge_decay_enforced():
    with pytest.raises(GridError, match="lam_max"):
        inverse_transform(solve(monomial(1), FrequencyGrid(2.0, 1024)))


# --- matched plants ---------------------------------------------------------------

def test_matched_kernel_is_pure_delta():
    c = make_case("diffusion-correlated", kappa=1.0, sigma_w=2.0, sigma_v=0.5, pi_star=1.0)
    k = inverse_transform(solve(c.plant))
    ell = 4.0
    assert k.delta_strength == pytest.approx(ell, rel=1e-12)
    assert k.peak < 1e-8 * ell
    assert k.is_null
    with pytest.raises(NumericalError):
        fit_decay_rate(k, 1.0)


# --- shapes -----------------------------------------------------------------------

def test_white_kernel_shape_and_width():
    widths = []
    for l in (0.5, 1.0, 2.0):
        k = inverse_transform(solve(make_case("diffusion-white", l_star=l).plant))
        assert k.at_origin() == pytest.approx(k.peak)
        half = k.xs[(k.xs >= 0) & (k.values >= 0.5 * k.at_origin())].max()
        widths.append(half)
    assert widths[0] < widths[1] < widths[2]
    assert widths[1] / widths[0] == pytest.approx(2.0, rel=2e-2)


def test_white_kernel_has_small_negative_lobe():
    # L(10) < 0 for the unit plant: the decay is oscillatory, not monotone
    k = inverse_transform(solve(monomial(1)))
    assert k.values.min() < 0
    assert k.values.min() > -1e-3 * k.peak
    assert evaluate_kernel(solve(monomial(1)), [10.0])[0] < 0


def test_correlated_sign_flip_large_pi():
    k = inverse_transform(solve(nondimensionalize("diffusion-correlated", pi_star=2.0).plant))
    assert k.at_origin() < 0


def test_sh_kernel_oscillatory_no_delta():
    sol = solve(make_case("swift-hohenberg", pi_star=1.0).plant)
    k = inverse_transform(sol)
    assert k.delta_strength == 0.0
    pos = k.xs > 0
    sign_changes = np.count_nonzero(np.diff(np.sign(k.values[pos & (np.abs(k.values) > 1e-9 * k.peak)])))
    assert sign_changes >= 4


# --- truncation ---------------------------------------------------------------------

def test_truncate_limits():
    k = inverse_transform(solve(nondimensionalize("diffusion-correlated", pi_star=0.5).plant))
    same = truncate(k, 2 * k.xs.max())
    assert np.array_equal(same.values, k.values) and same.retained_mass == 1.0
    zero = truncate(k, 0.0)
    assert not np.any(zero.values) and zero.delta_strength == k.delta_strength


def test_truncate_retained_mass():
    plant = make_case("diffusion-white", l_star=1.0).plant
    k = inverse_transform(solve(plant))
    th = decay_rate(plant)
    assert truncate(k, 3 / th).retained_mass > 0.95
    masses = [truncate(k, t).retained_mass for t in np.linspace(0, 20, 41)]
    assert np.all(np.diff(masses) >= 0)


# --- decay fit ----------------------------------------------------------------------

@pytest.mark.parametrize("l", [0.5, 1.0, 2.0])
def test_fit_white(l):
    plant = make_case("diffusion-white", l_star=l).plant
    th = decay_rate(plant)
    k = inverse_transform(solve(plant))
    raw = fit_decay_rate(k, th)
    assert raw.theta_hat >= 0.9 * th
    assert raw.n_points >= 20 and raw.window[0] == pytest.approx(2 / th)
    assert raw.tail_bound_ok
    # with the x^(-3/2) prefactor of a square-root branch point removed
    cor = fit_decay_rate(k, th, prefactor_power=1.5)
    assert cor.theta_hat == pytest.approx(th, rel=0.05)


def test_fit_unit_diffusion_corrected_within_five_percent():
    k = inverse_transform(solve(monomial(1)))
    assert fit_decay_rate(k, 1 / np.sqrt(2), prefactor_power=1.5).theta_hat == \
        pytest.approx(1 / np.sqrt(2), rel=0.05)


def test_fit_monomial_n2():
    th = np.sin(np.pi / 8)
    k = inverse_transform(solve(monomial(2)))
    assert fit_decay_rate(k, th).theta_hat >= 0.9 * th
    assert fit_decay_rate(k, th, prefactor_power=1.5).theta_hat == pytest.approx(th, rel=0.10)


def test_fit_window_too_short():
    k = inverse_transform(solve(monomial(1)))
    with pytest.raises(GridError):
        fit_decay_rate(k, 1 / np.sqrt(2), start=60.0)


# --- normalized variance and Heisenberg ---------------------------------------------

def test_normalized_variance_references():
    x = np.linspace(-20, 20, 40001)
    m, v = normalized_variance(np.exp(-x**2 / 2), x)
    assert v == pytest.approx(0.5, abs=1e-6) and m == pytest.approx(0.0, abs=1e-10)
    y = np.linspace(-1, 1, 20001)
    assert normalized_variance(np.ones_like(y), y)[1] == pytest.approx(1 / 3, abs=1e-6)
    with pytest.raises(NumericalError):
        normalized_variance(np.zeros(5), np.arange(5.0))


def test_gaussian_equality_case():
    x = np.linspace(-20, 20, 40001)
    g = np.exp(-x**2 / 2)
    vs = normalized_variance(g, x)[1]
    vf = normalized_variance(np.sqrt(2 * np.pi) * g, x)[1]  # self-transform
    assert vs * vf == pytest.approx(0.25, abs=1e-6)


def test_heisenberg_white_collapse():
    scaled = []
    for l in (0.5, 1.0, 2.0):
        plant = make_case("diffusion-white", l_star=l).plant
        sol = solve(plant)
        rep = heisenberg_check(plant, sol, inverse_transform(sol))
        assert rep.satisfied and rep.product >= 0.25
        assert rep.l_star == pytest.approx(l)
        scaled.append(rep.v_space_scaled)
    assert max(scaled) / min(scaled) - 1 < 1e-2


@pytest.mark.parametrize("label,plant", all_case_plants())
def test_heisenberg_all_cases(label, plant):
    sol = solve(plant)
    assert heisenberg_check(plant, sol, inverse_transform(sol)).product >= 0.25 - 1e-9


def test_matched_kernel_with_roundoff_noise():
    # residual symbol is pure roundoff here; the grid-edge test must not fire on it
    plant = make_case("diffusion-correlated", kappa=0.8, sigma_w=1.7, sigma_v=0.6, pi_star=1.0).plant
    k = inverse_transform(solve(plant))
    assert k.is_null and k.delta_strength == pytest.approx(1.7 / 0.6, rel=1e-12)
