"""Polynomial roots via the balanced companion matrix.

The eigenvalues of the balanced companion matrix give every root at once; a
single Newton step on the original coefficients then recovers the digits lost
to balancing.  Roots that coincide numerically (double roots split by rounding
into a small cluster) can be merged with :func:`cluster_roots`.
"""

from __future__ import annotations

import warnings

import numpy as np
from scipy.linalg import matrix_balance

__all__ = ["polyroots", "cluster_roots", "merge_clusters", "canonical_order", "is_real_root"]

REAL_ROOT_TOL = 1e-9
COLLISION_TOL = 1e-6


def _trim(coeffs):
    c = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nz = np.flatnonzero(c)
    if nz.size == 0:
        return c[:0]
    return c[: nz[-1] + 1]


def canonical_order(z):
    """Indices sorting ``z`` by real part, then imaginary part."""
    z = np.asarray(z)
    return np.lexsort((z.imag, z.real))


def polyroots(coeffs, polish: bool = True) -> np.ndarray:
    """All complex roots of a polynomial given by ascending coefficients.

    Parameters
    ----------
    coeffs : array_like
        Coefficients ``c[0] + c[1] z + ... + c[d] z**d``.  Trailing zeros are
        ignored.
    polish : bool
        Apply one Newton correction per root on the unbalanced polynomial.

    Returns
    -------
    ndarray of complex, length ``d``, in canonical (Re, Im) order.
    """
    c = _trim(coeffs)
    d = c.size - 1
    if d < 1:
        return np.empty(0, dtype=complex)
    # exact zeros at the origin are split off so the companion stays nonsingular
    nz0 = int(np.flatnonzero(c)[0])
    core = c[nz0:]
    m = core.size - 1
    out = [np.zeros(nz0, dtype=complex)]
    if m >= 1:
        monic = core[:-1] / core[-1]
        comp = np.zeros((m, m), dtype=complex)
        comp[1:, :-1] = np.eye(m - 1)
        comp[:, -1] = -monic
        with warnings.catch_warnings():
            # scipy casts the (unused) permutation vector to int, which warns
            # when the scaling factors are huge
            warnings.simplefilter("ignore", RuntimeWarning)
            bal, _ = matrix_balance(comp, permute=False)
        if not np.all(np.isfinite(bal)):
            bal = comp
        z = np.linalg.eigvals(bal).astype(complex)
        if polish:
            z = _newton_once(c, z)
        out.append(z)
    r = np.concatenate(out)
    return r[canonical_order(r)]


def _newton_once(c, z):
    p = np.polynomial.polynomial
    dc = p.polyder(c)
    f = p.polyval(z, c)
    fp = p.polyval(z, dc)
    with np.errstate(divide="ignore", invalid="ignore"):
        step = np.where(fp != 0, f / fp, 0)
    cand = z - step
    ok = np.isfinite(cand) & (np.abs(p.polyval(cand, c)) <= np.abs(f))
    return np.where(ok, cand, z)


def is_real_root(z, tol: float = REAL_ROOT_TOL):
    """Whether roots count as real: ``|Im z| < tol (1 + |z|)``."""
    z = np.asarray(z)
    return np.abs(z.imag) < tol * (1.0 + np.abs(z))


def cluster_roots(z, tol: float = COLLISION_TOL) -> list[np.ndarray]:
    """Group roots closer than ``tol (1 + |z|)`` (single linkage).

    Returns a list of index arrays, one per cluster, in order of first member.
    """
    z = np.asarray(z, dtype=complex)
    n = z.size
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(z[i] - z[j]) < tol * (1.0 + max(abs(z[i]), abs(z[j]))):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return [np.array(g) for g in groups.values()]


def merge_clusters(z, tol: float = COLLISION_TOL):
    """Replace each cluster member by the cluster centroid.

    A double root perturbed by rounding splits symmetrically by about
    ``sqrt(eps)``; the centroid is accurate to ``eps``.

    Returns
    -------
    merged : ndarray
        Same length as ``z``.
    multiplicity : ndarray of int
        Cluster size for every entry.
    """
    z = np.asarray(z, dtype=complex).copy()
    mult = np.ones(z.size, dtype=int)
    for g in cluster_roots(z, tol):
        if g.size > 1:
            z[g] = z[g].mean()
            mult[g] = g.size
    return z, mult
