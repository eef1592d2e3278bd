import numpy as np
import pytest
from hypothesis import given, strategies as st

from kflocal.errors import DivergenceError, NumericalError
from kflocal.laurent import Laurent
from kflocal.roots import canonical_order, cluster_roots, is_real_root, merge_clusters, polyroots
from kflocal.symbols import Polynomial, RationalSymbol

rootval = st.builds(complex, st.floats(-4, 4), st.floats(-4, 4))


# --- roots -------------------------------------------------------------------

def test_roots_quartic():
    z = polyroots([1.0, 0, 0, 0, 1.0])
    ref = np.exp(1j * np.pi * np.array([1, 3, 5, 7]) / 4)
    assert np.abs(z[:, None] - ref[None, :]).min(axis=0).max() < 1e-15


def test_roots_zero_at_origin_exact():
    z = polyroots([0.0, 0.0, -1.0, 1.0])
    assert np.sum(z == 0) == 2
    assert np.any(np.isclose(z, 1.0, atol=1e-15))


def test_roots_degenerate_inputs():
    assert polyroots([3.0]).size == 0
    assert polyroots([0.0, 0.0]).size == 0
    assert polyroots([1.0, 2.0, 0.0]).size == 1


def test_roots_canonical_order():
    z = polyroots(np.polynomial.polynomial.polyfromroots([2.0, -1 + 1j, -1 - 1j, 0.5j]))
    assert np.array_equal(z, z[canonical_order(z)])
    assert z[0].real == pytest.approx(-1) and z[0].imag < 0


def test_roots_wide_dynamic_range():
    # sixteenth-degree monomial-type radicand z^16 + eps
    c = np.zeros(17)
    c[0], c[16] = 1e-8, 1.0
    z = polyroots(c)
    assert np.allclose(np.abs(z), 1e-8 ** (1 / 16), rtol=1e-12)


@given(st.lists(rootval, min_size=1, max_size=8, unique=True))
def test_roots_recover_separated_roots(r):
    r = np.array(r)
    sep = np.abs(r[:, None] - r[None, :]) + np.eye(r.size) * 10
    if sep.min() < 0.3:
        return
    z = polyroots(np.polynomial.polynomial.polyfromroots(r))
    d = np.abs(z[:, None] - r[None, :]).min(axis=0)
    assert d.max() < 1e-8 * (1 + np.abs(r).max())


def test_cluster_and_merge_double_root():
    c = np.polynomial.polynomial.polyfromroots([1 + 1j, 1 + 1j, -2.0])
    z = polyroots(c)
    merged, mult = merge_clusters(z)
    assert sorted(mult.tolist()) == [1, 2, 2]
    dbl = merged[mult == 2]
    assert np.allclose(dbl, 1 + 1j, atol=1e-12)
    assert len(cluster_roots(z)) == 2


def test_is_real_root():
    assert is_real_root(np.array([1.0 + 1e-12j]))[0]
    assert not is_real_root(np.array([1.0 + 1e-6j]))[0]


# --- Laurent -----------------------------------------------------------------

def test_laurent_rational_expansion():
    # 1 / (1 + lam^2) = lam^-2 - lam^-4 + lam^-6 - ...
    s = Laurent.from_rational(RationalSymbol(Polynomial([1.0]), Polynomial([1.0, 0, 1.0])), terms=8)
    assert s.power == -2
    assert [s.coefficient(-k) for k in range(2, 9)] == [1, 0, -1, 0, 1, 0, -1]


def test_laurent_sqrt():
    # sqrt(lam^4 + 4) = lam^2 + 2 lam^-2 - 2 lam^-6 + ...
    s = Laurent.from_poly(Polynomial([4.0, 0, 0, 0, 1.0]), terms=60).sqrt()
    assert s.power == 2
    assert s.coefficient(2) == 1 and s.coefficient(-2) == pytest.approx(2)
    assert s.coefficient(-6) == pytest.approx(-2)
    lam = 5.0
    assert s(lam) == pytest.approx(np.sqrt(lam**4 + 4), rel=1e-13)


def test_laurent_sqrt_rejects():
    with pytest.raises(NumericalError):
        Laurent.from_poly(Polynomial([1.0, 1.0])).sqrt()
    with pytest.raises(NumericalError):
        Laurent.from_poly(Polynomial([0, 0, -1.0])).sqrt()


def test_laurent_strip_keeps_small_genuine_leading_term():
    # a leading coefficient much smaller than later ones is still the leading term
    s = Laurent(-2, [1e-3, 0.0, 5.0, 0.0, 400.0])
    assert s.strip().power == -2
    assert Laurent(0, [0.0, 0.0, 2.0]).strip().power == -2


def test_laurent_constant_keeps_terms():
    s = Laurent.from_rational(RationalSymbol(Polynomial([1.0]), Polynomial([1.0, 0, 1.0])), terms=10)
    t = s + Laurent.constant(3.0, terms=10)
    assert t.terms == 10 and t.coefficient(0) == 3.0 and t.coefficient(-4) == -1


def test_two_sided_tail():
    s = Laurent.from_rational(RationalSymbol(Polynomial([1.0]), Polynomial([1.0, 0, 1.0])), terms=40)
    x0 = 10.0
    total, err = s.two_sided_tail(x0)
    exact = 2 * (np.pi / 2 - np.arctan(x0))
    assert total == pytest.approx(exact, rel=1e-14)
    assert err < 1e-30


def test_two_sided_tail_divergent():
    with pytest.raises(DivergenceError):
        Laurent(-1, [1.0, 0.0]).two_sided_tail(2.0)


@given(st.floats(0.1, 3), st.floats(0.1, 3), st.floats(2.0, 20))
def test_laurent_matches_function(a, b, lam):
    # (lam^2 + a) / (lam^4 + b lam^2 + 1); series evaluated beyond the outer radius
    r = RationalSymbol(Polynomial([a, 0, 1.0]), Polynomial([1.0, 0, b, 0, 1.0]))
    s = Laurent.from_rational(r, terms=40)
    radius = max(np.abs(r.den.roots()).max(), np.sqrt(a))
    if lam < 2 * radius:
        return
    assert s(lam) == pytest.approx(float(np.real(r(lam))), rel=1e-11)
