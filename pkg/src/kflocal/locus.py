"""Branch points of the analytic extension of the gain symbol.

Under ``C = 1`` the gain symbol is ``u + sqrt(R)`` with ``u = Re A`` and the
radicand ``R = u^2 + |B|^2 / |G|^2``.  After ``lam -> -1j z`` the only
obstructions to analyticity are the zeros and poles of ``R``; the smallest
distance ``theta`` of those points from the imaginary axis bounds the
exponential decay rate of the gain kernel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import AssumptionViolation, InputError, PreconditionError
from .roots import COLLISION_TOL, canonical_order, cluster_roots, merge_clusters
from .symbols import PlantSpec, Polynomial, real_part_poly

__all__ = [
    "Radicand",
    "BranchPointSet",
    "LocusTrajectory",
    "build_radicand",
    "branch_points",
    "decay_rate",
    "bpl_sweep",
]

GCD_TOL = 1e-7
AXIS_TOL = 1e-9


@dataclass(frozen=True)
class Radicand:
    """``R(-1j z) = num(z) / den(z)``.

    ``num_lam`` and ``den_lam`` hold the same function in the real-frequency
    variable before substitution.  ``num_roots`` and ``den_roots`` are the
    roots left after numerical common-factor cancellation; ``cancelled`` lists
    the removed pairs.
    """

    num: Polynomial
    den: Polynomial
    num_roots: np.ndarray
    den_roots: np.ndarray
    num_lam: Polynomial = field(repr=False, default=None)
    den_lam: Polynomial = field(repr=False, default=None)
    cancelled: tuple = ()

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.num(z) / self.den(z)

    def on_axis(self, lam):
        """Values at ``z = 1j lam``, i.e. ``R`` as a function of real frequency."""
        lam = np.asarray(lam, dtype=float)
        return np.real(self.num_lam(lam) / self.den_lam(lam))


def _cancel_common(num_r, den_r, tol=GCD_TOL):
    num_r = list(num_r)
    den_r = list(den_r)
    cancelled = []
    i = 0
    while i < len(num_r):
        z = num_r[i]
        if den_r:
            d = np.abs(np.asarray(den_r) - z)
            j = int(np.argmin(d))
            if d[j] < tol * max(1.0, abs(z)):
                cancelled.append(complex(0.5 * (z + den_r[j])))
                del num_r[i]
                del den_r[j]
                continue
        i += 1
    return np.array(num_r, dtype=complex), np.array(den_r, dtype=complex), tuple(cancelled)


def _from_roots(lead, roots):
    p = Polynomial([lead])
    for r in roots:
        p = p * Polynomial([-r, 1.0])
    return p


def _polish_factored(z, u, qd, qn, steps=4):
    """Newton steps on ``u^2 qd + qn`` evaluated in factored form.

    The expanded numerator loses digits through cancellation between its
    large coefficients (e.g. ``(lam^2 - c)^4`` with big ``c``); evaluating
    ``u`` first keeps the residual at the rounding level of ``u`` itself.
    A step is kept only if it lowers the residual.  Members of root
    clusters are left alone: their centroid is already accurate, while
    Newton converges slowly and asymmetrically near a multiple root.
    """
    du, dqd, dqn = u.derivative(), qd.derivative(), qn.derivative()

    def f(z):
        lam = -1j * z
        uv = u(lam)
        return uv * uv * qd(lam) + qn(lam)

    def fp(z):
        lam = -1j * z
        uv = u(lam)
        return -1j * (2.0 * uv * du(lam) * qd(lam) + uv * uv * dqd(lam) + dqn(lam))

    z = np.asarray(z, dtype=complex).copy()
    if z.size == 0:
        return z
    lone = np.zeros(z.size, dtype=bool)
    for g in cluster_roots(z):
        lone[g] = g.size == 1
    fz = f(z)
    for _ in range(steps):
        d = fp(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            cand = z - np.where(d != 0, fz / d, 0.0)
        fc = f(cand)
        ok = lone & np.isfinite(cand) & (np.abs(fc) < np.abs(fz))
        if not np.any(ok):
            break
        z = np.where(ok, cand, z)
        fz = np.where(ok, fc, fz)
    return z


def build_radicand(plant: PlantSpec) -> Radicand:
    """Radicand ``Re(A)^2 + |B|^2 / |G|^2`` over a common denominator, in ``z``.

    Raises
    ------
    PreconditionError
        If ``C`` is not identically one.
    """
    if not plant.c_is_identity:
        raise PreconditionError("branch-point analysis needs C = 1")
    u = real_part_poly(plant.a_hat)
    q = plant.noise_ratio()
    num_lam = u * u * q.den + q.num
    den_lam = q.den
    num = num_lam.substitute_neg_i()
    den = den_lam.substitute_neg_i()
    nr = _polish_factored(num.roots(), u, q.den, q.num)
    nr, dr, cancelled = _cancel_common(nr, den.roots())
    if cancelled:
        num = _from_roots(num.leading, nr)
        den = _from_roots(den.leading, dr)
    return Radicand(num, den, nr, dr, num_lam, den_lam, cancelled)


@dataclass(frozen=True)
class BranchPointSet:
    """Finite branch points with multiplicities.

    ``theta`` is ``min |Re z|`` over all points (coincident pairs included).
    ``entire`` is set when every point belongs to a cluster of even
    multiplicity, i.e. the radicand is numerically a perfect square and the
    extension is entire; ``effective_theta`` is then infinite.
    """

    points: np.ndarray
    kinds: tuple
    multiplicity: np.ndarray
    theta: float
    entire: bool
    cancelled: tuple = ()

    @property
    def effective_theta(self) -> float:
        if self.entire:
            return float("inf")
        odd = self.multiplicity % 2 == 1
        return float(np.abs(self.points[odd].real).min())

    @property
    def strip(self) -> tuple[float, float]:
        t = self.effective_theta
        return (-t, t)

    @property
    def collisions(self) -> np.ndarray:
        """Distinct centroids of clusters with two or more members."""
        pts = self.points[self.multiplicity > 1]
        if pts.size == 0:
            return pts
        groups = cluster_roots(pts)
        return np.array([pts[g].mean() for g in groups])

    def __len__(self):
        return int(self.points.size)


def branch_points(rad: Radicand, collision_tol: float = COLLISION_TOL) -> BranchPointSet:
    """Zeros and poles of the radicand, clustered and canonically ordered.

    Raises
    ------
    AssumptionViolation
        If a point lies on the imaginary axis (``|Re z| < 1e-9 (1 + |z|)``):
        the radicand would vanish or blow up at a real frequency.
    """
    pts = np.concatenate([rad.num_roots, rad.den_roots]).astype(complex)
    kinds = np.array(["zero"] * rad.num_roots.size + ["pole"] * rad.den_roots.size, dtype=object)
    if pts.size == 0:
        return BranchPointSet(pts, (), np.zeros(0, dtype=int), float("inf"), True, rad.cancelled)
    merged = np.empty_like(pts)
    mult = np.ones(pts.size, dtype=int)
    # zeros and poles are clustered separately; a zero never merges with a pole
    for kind in ("zero", "pole"):
        sel = kinds == kind
        if np.any(sel):
            merged[sel], mult[sel] = merge_clusters(pts[sel], collision_tol)
    # checked on cluster centroids: a double zero at a real frequency splits
    # by ~sqrt(eps) under rounding and would otherwise slip off the axis
    on_axis = np.abs(merged.real) < AXIS_TOL * (1.0 + np.abs(merged))
    if np.any(on_axis):
        bad = merged[on_axis][0]
        raise AssumptionViolation(
            f"branch point {complex(bad)!r} on the imaginary axis: the radicand "
            "vanishes or is singular at a real frequency"
        )
    order = canonical_order(merged)
    merged, mult, kinds = merged[order], mult[order], kinds[order]
    theta = float(np.abs(merged.real).min())
    entire = bool(np.all(mult % 2 == 0))
    return BranchPointSet(merged, tuple(kinds), mult, theta, entire, rad.cancelled)


def decay_rate(plant: PlantSpec) -> float:
    """Decay rate ``theta = min |Re z_i|`` of the gain kernel."""
    return branch_points(build_radicand(plant)).theta


@dataclass(frozen=True)
class LocusTrajectory:
    """Branch points along a one-parameter family.

    ``paths[k, i]`` is the position of tracked point ``i`` at ``params[k]``;
    ``pairing[k][j]`` maps index ``j`` of ``sets[k]`` to its successor in
    ``sets[k + 1]`` (``None`` where the cardinality changes).
    """

    params: np.ndarray
    sets: tuple
    pairing: tuple
    paths: np.ndarray | None
    collisions: tuple
    discontinuities: tuple
    jumps: np.ndarray | None = None
    jump_flags: tuple = ()

    @property
    def thetas(self) -> np.ndarray:
        return np.array([s.theta for s in self.sets])


def _pair(a, b):
    cost = np.abs(a[:, None] - b[None, :]) ** 2
    _, col = linear_sum_assignment(cost)
    return col


def bpl_sweep(plant_family, params, *, executor=None, step_bound: float | None = None) -> LocusTrajectory:
    """Track branch points across ``plant_family(p)`` for ``p`` in ``params``.

    Consecutive sets of equal size are paired by a minimal total squared
    distance assignment.  Parameters where points collide, and steps where
    the number of points changes, are reported rather than hidden.

    Parameters
    ----------
    plant_family : callable
        Maps a parameter value to a :class:`PlantSpec`.
    params : sequence of float
        At least two values.
    executor : concurrent.futures.Executor, optional
        Parallel map for the per-parameter root computations.
    step_bound : float, optional
        Largest allowed jump of a tracked point between neighbours away from
        collisions; larger jumps are listed in ``jump_flags``.
    """
    params = np.asarray(params, dtype=float)
    if params.size < 2:
        raise InputError("a sweep needs at least two parameter values")

    def one(p):
        return branch_points(build_radicand(plant_family(p)))

    sets = tuple(executor.map(one, params) if executor is not None else map(one, params))
    collisions = tuple(k for k, s in enumerate(sets) if s.collisions.size)
    discontinuities = []
    pairing = []
    sizes = {len(s) for s in sets}
    uniform = len(sizes) == 1
    paths = np.empty((params.size, len(sets[0])), dtype=complex) if uniform else None
    perm = np.arange(len(sets[0]))
    if uniform:
        paths[0] = sets[0].points
    for k in range(params.size - 1):
        a, b = sets[k], sets[k + 1]
        if len(a) != len(b):
            discontinuities.append(k + 1)
            pairing.append(None)
            continue
        col = _pair(a.points, b.points)
        pairing.append(col)
        if uniform:
            # path i sits at set-k index perm[i]; it moves to col[perm[i]]
            perm = col[perm]
            paths[k + 1] = b.points[perm]
    jumps = None
    flags = ()
    if uniform:
        jumps = np.abs(np.diff(paths, axis=0)).max(axis=1) if params.size > 1 else np.zeros(0)
        if step_bound is not None:
            coll = set(collisions)
            flags = tuple(k for k, j in enumerate(jumps)
                          if j > step_bound and k not in coll and k + 1 not in coll)
    return LocusTrajectory(params, sets, tuple(pairing), paths, collisions,
                           tuple(discontinuities), jumps, flags)
