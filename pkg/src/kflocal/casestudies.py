"""Built-in plants with closed-form oracles.

Three families are provided, each with one dimensionless group ``pi_star``:

``diffusion-white``
    ``A = -kappa lam^2``, white process and measurement noise.
``diffusion-correlated``
    As above with measurement noise of correlation length ``l_v``,
    ``|G|^2 = sigma_v^2 / (1 + l_v^2 lam^2)``; ``pi_star = l_v / l_star``.
``swift-hohenberg``
    ``A = -a (lam^2 - 1/l_A^2)^2`` with ``a = 1`` (units length^4/time),
    white noises; ``pi_star = l_A / l_star``.

Lengths are scaled by the information lengthscale ``l_star`` and rates by
``sigma_w / (2 sigma_v)``.  In those units every family has ``B = 2`` and
unit diffusivity (or unit ``a``), so the dimensionless gain depends on
``pi_star`` alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .perf import closed_form_diffusion
from .symbols import PlantSpec, Polynomial, RationalSymbol

__all__ = [
    "CASES",
    "DimensionlessGroups",
    "CaseOracle",
    "CaseStudy",
    "DimensionlessCase",
    "diffusion_white",
    "diffusion_correlated",
    "swift_hohenberg",
    "make_case",
    "nondimensionalize",
    "family",
    "sweep_parameters",
    "correlated_branch_points",
    "correlated_theta",
    "sh_omega",
    "sh_theta",
    "sh_branch_points",
    "sh_radii",
    "dimensionless_gain",
]

CASES = ("diffusion-white", "diffusion-correlated", "swift-hohenberg")

_PARAMS = {
    "diffusion-white": ("kappa", "sigma_w", "sigma_v"),
    "diffusion-correlated": ("kappa", "sigma_w", "sigma_v", "l_v"),
    "swift-hohenberg": ("l_a", "sigma_w", "sigma_v"),
}
_DEFAULTS = {"kappa": 1.0, "sigma_w": 1.0, "sigma_v": 1.0, "l_v": 0.0, "l_a": 1.0}


def _positive(**kw):
    for k, v in kw.items():
        if not (np.isfinite(v) and v > 0):
            raise InputError(f"{k} must be positive, got {v!r}")


# ---------------------------------------------------------------------------
# closed forms (dimensionless)


def _check_pi(pi, lo=0.0, hi=np.inf, name="pi_star"):
    if not np.isfinite(pi) and pi != np.inf:
        raise InputError(f"{name} must be a number")
    if pi < lo or pi > hi:
        raise InputError(f"{name}={pi!r} outside the validity range [{lo}, {hi}]")


def correlated_theta(pi: float, branch: str | None = None) -> float:
    """Dimensionless decay rate of the correlated-noise diffusion gain.

    ``sqrt(1 + pi^2)`` on ``0 <= pi <= 1`` (branch ``"below"``) and
    ``sqrt(2 (pi^2 - sqrt(pi^4 - 1)))`` on ``pi >= 1`` (branch ``"above"``).
    With ``branch=None`` the branch is chosen from ``pi``; at ``pi = 1`` both
    are evaluated and must agree.
    """
    if branch == "below":
        _check_pi(pi, 0.0, 1.0)
        return float(np.sqrt(1.0 + pi * pi))
    if branch == "above":
        _check_pi(pi, 1.0)
        # pi^2 - sqrt(pi^4 - 1) = 1 / (pi^2 + sqrt(pi^4 - 1)), cancellation-free
        return float(np.sqrt(2.0 / (pi * pi + np.sqrt(pi**4 - 1.0))))
    if branch is not None:
        raise InputError("branch must be 'below', 'above' or None")
    _check_pi(pi)
    if pi == 1.0:
        lo, hi = correlated_theta(1.0, "below"), correlated_theta(1.0, "above")
        if abs(lo - hi) > 1e-14:
            raise ArithmeticError("decay-rate branches disagree at pi_star = 1")
        return lo
    return correlated_theta(pi, "below" if pi < 1 else "above")


def correlated_branch_points(pi: float) -> np.ndarray:
    """Roots of ``z^4 - 4 pi^2 z^2 + 4`` (with multiplicity), sorted by (Re, Im)."""
    _check_pi(pi)
    if pi <= 1.0:
        a, b = np.sqrt(1.0 + pi * pi), np.sqrt(max(0.0, 1.0 - pi * pi))
        z = np.array([a + 1j * b, a - 1j * b, -a + 1j * b, -a - 1j * b])
    else:
        s = np.sqrt(pi**4 - 1.0)
        inner = np.sqrt(2.0 / (pi * pi + s))
        outer = np.sqrt(2.0 * (pi * pi + s))
        z = np.array([inner, -inner, outer, -outer], dtype=complex)
    return z[np.lexsort((z.imag, z.real))]


def sh_omega(pi: float) -> float:
    """Real part of the inner Swift-Hohenberg branch points."""
    _check_pi(pi, 0.0)
    if pi == 0:
        raise InputError("pi_star must be positive")
    t = 1.0 - 1.0 / pi**2
    return float(np.sqrt(0.5 * (t + np.hypot(t, 1.0))))


def sh_theta(pi: float) -> float:
    """Real part of the outer Swift-Hohenberg branch points (the decay rate)."""
    _check_pi(pi, 0.0)
    if pi == 0:
        raise InputError("pi_star must be positive")
    t = 1.0 + 1.0 / pi**2
    # (-t + sqrt(t^2 + 1)) / 2 = 1 / (2 (t + sqrt(t^2 + 1))), cancellation-free
    return float(np.sqrt(0.5 / (t + np.hypot(t, 1.0))))


def sh_branch_points(pi: float) -> np.ndarray:
    """The eight points ``+-Omega +- i/(2 Omega)`` and ``+-Theta +- i/(2 Theta)``."""
    out = []
    for r in (sh_omega(pi), sh_theta(pi)):
        for sr in (1, -1):
            for si in (1, -1):
                out.append(sr * r + 1j * si / (2.0 * r))
    z = np.array(out)
    return z[np.lexsort((z.imag, z.real))]


def sh_radii(pi: float) -> tuple[float, float]:
    """Moduli ``(R_inner, R_outer)`` of the inner and outer branch points."""
    _check_pi(pi, 0.0)
    return (float(((1 - 1 / pi**2) ** 2 + 1) ** 0.25), float(((1 + 1 / pi**2) ** 2 + 1) ** 0.25))


def _gain(u, q):
    r = np.hypot(u, np.sqrt(q))
    return np.where(u <= 0, q / (r - u), u + r)


def dimensionless_gain(name: str, pi: float, lam):
    """Dimensionless gain symbol of a built-in family at frequency ``lam``."""
    lam = np.asarray(lam, dtype=float)
    if name == "diffusion-white":
        return _gain(-lam * lam, 4.0 + 0 * lam)
    if name == "diffusion-correlated":
        return _gain(-lam * lam, 4.0 * (1.0 + pi * pi * lam * lam))
    if name == "swift-hohenberg":
        return _gain(-((lam * lam - 1.0 / pi**2) ** 2), 4.0 + 0 * lam)
    raise InputError(f"unknown case {name!r}")


# ---------------------------------------------------------------------------
# containers


@dataclass(frozen=True)
class DimensionlessGroups:
    l_star: float
    pi_star: float
    definition: str
    rate_scale: float

    def __post_init__(self):
        if not self.l_star > 0 or not self.pi_star >= 0:
            raise InputError("l_star must be positive and pi_star nonnegative")


@dataclass(frozen=True)
class CaseOracle:
    """Closed forms for one built-in plant, in dimensional units.

    Callables raise :class:`InputError` outside their validity range.
    ``var_e`` is ``None`` when no closed form exists.
    """

    name: str
    groups: DimensionlessGroups
    branch_points_dimensionless: object
    theta_dimensionless: object
    delta_dimensionless: object
    var_e: object = None
    validity: dict = field(default_factory=dict)

    def branch_points(self) -> np.ndarray:
        return np.asarray(self.branch_points_dimensionless()) / self.groups.l_star

    def theta(self) -> float:
        return self.theta_dimensionless() / self.groups.l_star

    def delta_strength(self) -> float:
        return self.delta_dimensionless() * self.groups.rate_scale

    def gain(self, lam):
        """Dimensional gain symbol from the dimensionless closed form."""
        lam = np.asarray(lam, dtype=float)
        g = self.groups
        return g.rate_scale * dimensionless_gain(self.name, g.pi_star, lam * g.l_star)


@dataclass(frozen=True)
class CaseStudy:
    name: str
    params: dict
    plant: PlantSpec
    groups: DimensionlessGroups
    oracle: CaseOracle


@dataclass(frozen=True)
class DimensionlessCase:
    name: str
    plant: PlantSpec
    groups: DimensionlessGroups
    length_scale: float
    rate_scale: float

    def to_dimensionless_frequency(self, lam):
        return np.asarray(lam) * self.length_scale

    def to_dimensionless_rate(self, theta):
        return np.asarray(theta) * self.length_scale


# ---------------------------------------------------------------------------
# constructors


def diffusion_white(kappa: float, sigma_w: float, sigma_v: float) -> CaseStudy:
    """Heat equation with white process and measurement noise."""
    _positive(kappa=kappa, sigma_w=sigma_w, sigma_v=sigma_v)
    l_star = np.sqrt(2.0 * kappa * sigma_v / sigma_w)
    groups = DimensionlessGroups(float(l_star), 0.0, "l* = (2 kappa sigma_v / sigma_w)^(1/2)",
                                 sigma_w / (2.0 * sigma_v))
    plant = PlantSpec(Polynomial([0.0, 0.0, -kappa]), sigma_w, g_hat=sigma_v,
                      labels={"case": "diffusion-white"},
                      units={"kappa": "length^2/time"})
    oracle = CaseOracle(
        "diffusion-white", groups,
        branch_points_dimensionless=lambda: np.sort_complex(np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])),
        theta_dimensionless=lambda: 1.0,
        delta_dimensionless=lambda: 0.0,
        var_e=lambda: closed_form_diffusion(kappa, sigma_w, sigma_v),
    )
    return CaseStudy("diffusion-white", {"kappa": kappa, "sigma_w": sigma_w, "sigma_v": sigma_v},
                     plant, groups, oracle)


def diffusion_correlated(kappa: float, sigma_w: float, sigma_v: float, l_v: float) -> CaseStudy:
    """Heat equation with spatially correlated measurement noise.

    ``G = sigma_v / (1 + i l_v lam)``; only ``|G|^2`` enters the filter, so
    this minimum-phase factor is as good as any other.
    """
    _positive(kappa=kappa, sigma_w=sigma_w, sigma_v=sigma_v)
    if not (np.isfinite(l_v) and l_v >= 0):
        raise InputError(f"l_v must be >= 0, got {l_v!r}")
    l_star = np.sqrt(2.0 * kappa * sigma_v / sigma_w)
    pi = l_v / l_star
    groups = DimensionlessGroups(float(l_star), float(pi), "pi* = l_v / l*", sigma_w / (2.0 * sigma_v))
    g_hat = RationalSymbol(Polynomial([sigma_v]), Polynomial([1.0, 1j * l_v]))
    plant = PlantSpec(Polynomial([0.0, 0.0, -kappa]), sigma_w, g_hat=g_hat,
                      labels={"case": "diffusion-correlated"},
                      units={"kappa": "length^2/time", "l_v": "length"})
    oracle = CaseOracle(
        "diffusion-correlated", groups,
        branch_points_dimensionless=lambda: correlated_branch_points(pi),
        theta_dimensionless=lambda: correlated_theta(pi),
        delta_dimensionless=lambda: 2.0 * pi * pi,
        var_e=(lambda: closed_form_diffusion(kappa, sigma_w, sigma_v)) if l_v == 0 else None,
        validity={"theta below": (0.0, 1.0), "theta above": (1.0, np.inf)},
    )
    return CaseStudy("diffusion-correlated",
                     {"kappa": kappa, "sigma_w": sigma_w, "sigma_v": sigma_v, "l_v": l_v},
                     plant, groups, oracle)


def swift_hohenberg(l_a: float, sigma_w: float, sigma_v: float) -> CaseStudy:
    """Linearized Swift-Hohenberg dynamics with white noises."""
    _positive(l_a=l_a, sigma_w=sigma_w, sigma_v=sigma_v)
    a = 1.0
    l_star = (2.0 * a * sigma_v / sigma_w) ** 0.25
    pi = l_a / l_star
    groups = DimensionlessGroups(float(l_star), float(pi), "pi* = l_A / l*", sigma_w / (2.0 * sigma_v))
    k = 1.0 / l_a**2
    a_hat = Polynomial([-a * k * k, 0.0, 2.0 * a * k, 0.0, -a])
    plant = PlantSpec(a_hat, sigma_w, g_hat=sigma_v, labels={"case": "swift-hohenberg"},
                      units={"a": "length^4/time", "l_a": "length"})
    oracle = CaseOracle(
        "swift-hohenberg", groups,
        branch_points_dimensionless=lambda: sh_branch_points(pi),
        theta_dimensionless=lambda: sh_theta(pi),
        delta_dimensionless=lambda: 0.0,
        validity={"pi_star": (0.0, np.inf)},
    )
    return CaseStudy("swift-hohenberg", {"l_a": l_a, "sigma_w": sigma_w, "sigma_v": sigma_v},
                     plant, groups, oracle)


_BUILDERS = {
    "diffusion-white": diffusion_white,
    "diffusion-correlated": diffusion_correlated,
    "swift-hohenberg": swift_hohenberg,
}


def make_case(name: str, **params) -> CaseStudy:
    """Build a case study by name; missing parameters take unit defaults.

    Besides the physical parameters, ``pi_star`` may be given for
    ``diffusion-correlated`` (sets ``l_v``) and ``swift-hohenberg`` (sets
    ``l_a``), and ``l_star`` for ``diffusion-white`` (sets ``sigma_v``).
    """
    if name not in _BUILDERS:
        raise InputError(f"unknown case {name!r}; choose from {', '.join(CASES)}")
    allowed = set(_PARAMS[name]) | {"pi_star", "l_star"}
    extra = set(params) - allowed
    if extra:
        raise InputError(f"parameters {sorted(extra)} do not apply to {name}")
    p = {k: float(params.get(k, _DEFAULTS[k])) for k in _PARAMS[name]}
    if "l_star" in params:
        if name != "diffusion-white":
            raise InputError("l_star sweeps are supported for diffusion-white only")
        _positive(l_star=params["l_star"])
        p["sigma_v"] = params["l_star"] ** 2 * p["sigma_w"] / (2.0 * p["kappa"])
    if "pi_star" in params:
        pi = float(params["pi_star"])
        if name == "diffusion-white":
            raise InputError("diffusion-white has no free pi_star")
        if name == "diffusion-correlated":
            if not pi >= 0:
                raise InputError("pi_star must be >= 0")
            p["l_v"] = pi * np.sqrt(2.0 * p["kappa"] * p["sigma_v"] / p["sigma_w"])
        else:
            _positive(pi_star=pi)
            p["l_a"] = pi * (2.0 * p["sigma_v"] / p["sigma_w"]) ** 0.25
    return _BUILDERS[name](**p)


def sweep_parameters(name: str) -> tuple[str, ...]:
    """Parameter names accepted by :func:`family` for ``name``."""
    extra = {"diffusion-white": ("l_star",), "diffusion-correlated": ("pi_star",),
             "swift-hohenberg": ("pi_star",)}[name]
    return _PARAMS[name] + extra


def family(name: str, sweep_param: str, **base):
    """One-parameter family ``value -> PlantSpec`` around ``base``."""
    if name not in _BUILDERS:
        raise InputError(f"unknown case {name!r}")
    if sweep_param not in sweep_parameters(name):
        raise InputError(f"{name} cannot be swept over {sweep_param!r}; "
                         f"choose from {', '.join(sweep_parameters(name))}")

    def build(value):
        kw = dict(base)
        kw[sweep_param] = float(value)
        return make_case(name, **kw).plant

    return build


def nondimensionalize(case, **params) -> DimensionlessCase:
    """Dimensionless plant of a built-in case.

    ``case`` is a :class:`CaseStudy` or a case name (with ``params``).  The
    returned plant has frequency ``Lam = lam l*`` and rates in units of
    ``sigma_w / (2 sigma_v)``.
    """
    if isinstance(case, str):
        case = make_case(case, **params)
    if not isinstance(case, CaseStudy):
        raise InputError("nondimensionalize expects a built-in case")
    g = case.groups
    pi = g.pi_star
    if case.name == "diffusion-white":
        plant = PlantSpec(Polynomial([0.0, 0.0, -1.0]), 2.0)
    elif case.name == "diffusion-correlated":
        plant = PlantSpec(Polynomial([0.0, 0.0, -1.0]), 2.0,
                          g_hat=RationalSymbol(Polynomial([1.0]), Polynomial([1.0, 1j * pi])))
    elif case.name == "swift-hohenberg":
        k = 1.0 / pi**2
        plant = PlantSpec(Polynomial([-k * k, 0.0, 2.0 * k, 0.0, -1.0]), 2.0)
    else:
        raise InputError(f"unsupported case {case.name!r}")
    return DimensionlessCase(case.name, plant, g, g.l_star, g.rate_scale)
