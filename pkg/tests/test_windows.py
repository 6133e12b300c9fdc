import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaborcert.errors import MisalignedShift
from gaborcert.tf_core import GridFunction, GridSpec, fourier, sample
from gaborcert.windows import PolyGauss1D, SampledWindow, gaussian, hermite, indicator


def test_gaussian_values():
    g = gaussian()
    assert g(0.0) == pytest.approx(1.0)
    assert abs(g(1.0)) == pytest.approx(np.exp(-np.pi))
    g2 = gaussian(2, a=2.0)
    assert abs(g2(np.array([1.0, 0.5]))) == pytest.approx(np.exp(-2 * np.pi * 1.25))


def test_gaussian_is_fourier_invariant():
    g = gaussian()
    t = np.linspace(-3, 3, 41)
    assert np.allclose(g.fourier()(t), g(t), atol=1e-15)


@pytest.mark.parametrize("a", [0.5, 2.0])
def test_gaussian_fourier_width(a):
    t = np.linspace(-3, 3, 41)
    ref = a**-0.5 * np.exp(-np.pi * t**2 / a)
    assert np.allclose(gaussian(a=a).fourier()(t), ref, atol=1e-14)


@pytest.mark.parametrize("n", [0, 1, 2, 3, 4])
def test_hermite_eigenfunction(n):
    h = hermite(n)
    t = np.linspace(-2.5, 2.5, 31)
    assert np.allclose(h.fourier()(t), (-1j) ** n * h(t), atol=1e-9 * max(1, np.max(np.abs(h(t)))))


@pytest.mark.parametrize("n", [1, 3])
def test_analytic_fourier_matches_grid_fourier(n):
    spec = GridSpec(1, 8.0, 512)
    h = hermite(n, a=1.5)
    U = fourier(sample(h, spec))
    assert np.max(np.abs(U.values - h.fourier()(U.spec.points()))) < 1e-10


@settings(max_examples=30, deadline=None)
@given(st.floats(-2, 2), st.integers(0, 3), st.floats(0.3, 3))
def test_derivative_matches_finite_difference(t, n, a):
    h = hermite(n, a=a)
    eps = 1e-6
    fd = (h(t + eps) - h(t - eps)) / (2 * eps)
    assert abs(h.deriv((1,))(t) - fd) < 1e-5 * max(1.0, abs(fd))


def test_polygauss_monomial_and_fourier_rule():
    # F[t exp(-pi t^2)] = -i w exp(-pi w^2)
    f = PolyGauss1D((0j, 1 + 0j), 1.0)
    w = np.linspace(-2, 2, 9)
    assert np.allclose(f.fourier()(w), -1j * w * np.exp(-np.pi * w**2))


def test_support_radius_underflow():
    g = gaussian()
    r = g.support_radius()
    assert g(r + 0.01) == 0.0
    assert g(r - 0.5) != 0.0


def test_sampled_window_lookup():
    spec = GridSpec(1, 2.0, 16)
    gf = sample(gaussian(), spec)
    w = SampledWindow(gf)
    assert not w.rigorous
    assert w(spec.axis()[3]) == pytest.approx(gf.values[3])
    assert w(10.0) == 0.0
    with pytest.raises(MisalignedShift):
        w(0.01)


def test_indicator_half_open():
    spec = GridSpec(1, 2.0, 16)
    chi = indicator(spec)
    vals = chi(spec.axis())
    assert vals.sum() == pytest.approx(1.0 / spec.h)
    assert chi(0.0) == 1 and chi(1.0) == 0
    assert GridFunction(spec, vals).norm() == pytest.approx(1.0)
