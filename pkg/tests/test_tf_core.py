import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaborcert.errors import GridMismatch, MisalignedShift, SingularMatrix
from gaborcert.tf_core import (
    GridFunction,
    GridSpec,
    PolyWeight,
    cube_maxima,
    diag_lattice,
    dual_point,
    fourier,
    inverse_fourier,
    l1_ball,
    make_lattice,
    modulate,
    parallel_map,
    sample,
    symplectic,
    tf_shift,
    translate,
    worker_count,
)

from oracles import l1_ball_size

finite = st.floats(-3, 3, allow_nan=False)


def test_make_lattice_diag():
    lat = make_lattice(np.diag([0.5, 0.5]))
    assert lat.det == pytest.approx(0.25)
    assert lat.diagonal == ((0.5,), (0.5,))
    assert np.allclose(lat.inv_transpose, np.diag([2.0, 2.0]))


def test_make_lattice_singular():
    with pytest.raises(SingularMatrix):
        make_lattice([[1, 2], [2, 4]])
    with pytest.raises(SingularMatrix):
        make_lattice(np.zeros((2, 2)))


def test_cofactor_gives_inverse():
    A = np.array([[1.0, 2.0], [0.5, 3.0]])
    lat = make_lattice(A)
    assert np.allclose(lat.cofactor.T / lat.det, np.linalg.inv(A))


def test_dual_point_unit_lattice():
    lat = diag_lattice(1.0, 1.0)
    eta, z = dual_point(lat, [1, 0])
    assert np.allclose(eta, [1, 0])
    assert np.allclose(z, [0, 1])


def test_dual_tf_points_diag():
    lat = diag_lattice(0.5, 0.25)
    z = lat.dual_tf_points(np.array([[2, 3]]))
    # J L^{-T} (h, k) = (-k/beta, h/alpha)
    assert np.allclose(z, [[-12.0, 4.0]])


def test_symplectic_is_antisymmetric():
    J = symplectic(2)
    assert np.allclose(J.T, -J)
    assert np.allclose(J @ J, -np.eye(4))


@pytest.mark.parametrize("n,K", [(1, 5), (2, 3), (2, 8), (4, 2)])
def test_l1_ball_count(n, K):
    ball = l1_ball(n, K)
    assert len(ball) == l1_ball_size(n, K)
    assert np.all(np.abs(ball).sum(axis=1) <= K)
    assert np.all(ball[0] == 0)


@given(st.lists(finite, min_size=4, max_size=4), st.lists(finite, min_size=4, max_size=4), st.floats(0, 4))
def test_weight_submultiplicative(z1, z2, s):
    w = PolyWeight(s, 4)
    z1, z2 = np.array(z1), np.array(z2)
    assert w(z1 + z2) <= w(z1) * w(z2) * (1 + 1e-12)


def test_weight_unit_cube_max():
    w = PolyWeight(2.0, 2)
    assert w.unit_cube_max() == pytest.approx((1 + np.sqrt(2)) ** 2)
    pts = np.random.default_rng(0).uniform(0, 1, size=(1000, 2))
    assert np.all(w(pts) <= w.unit_cube_max())


def test_grid_basics():
    g = GridSpec(1, 8.0, 512)
    assert g.h == pytest.approx(1 / 32)
    assert g.axis()[0] == -8.0
    assert g.dual().R == pytest.approx(16.0)
    assert np.all(g.index_of(0.5) == 16)
    with pytest.raises(MisalignedShift):
        g.index_of(0.01)
    with pytest.raises(ValueError):
        GridSpec(1, 1.0, 7)


def test_grid_function_shape_check():
    with pytest.raises(GridMismatch):
        GridFunction(GridSpec(1, 1.0, 8), np.zeros(6))


def test_fourier_of_gaussian():
    spec = GridSpec(1, 8.0, 256)
    u = sample(lambda p: np.exp(-np.pi * p[..., 0] ** 2), spec)
    U = fourier(u)
    w = U.spec.axis()
    assert np.max(np.abs(U.values - np.exp(-np.pi * w**2))) < 1e-12


def test_fourier_of_gaussian_2d():
    spec = GridSpec(2, 6.0, 96)
    u = sample(lambda p: np.exp(-np.pi * (p[..., 0] ** 2 + 2 * p[..., 1] ** 2)), spec)
    U = fourier(u)
    w = U.spec.points()
    ref = 2**-0.5 * np.exp(-np.pi * (w[..., 0] ** 2 + w[..., 1] ** 2 / 2))
    assert np.max(np.abs(U.values - ref)) < 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_plancherel_and_inverse(seed):
    rng = np.random.default_rng(seed)
    spec = GridSpec(1, 4.0, 64)
    u = GridFunction(spec, rng.standard_normal(64) + 1j * rng.standard_normal(64))
    U = fourier(u)
    assert U.norm() == pytest.approx(u.norm(), rel=1e-12)
    back = inverse_fourier(U)
    assert back.spec == spec
    assert np.allclose(back.values, u.values, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(-40, 40), st.integers(-10, 10))
def test_tf_shift_isometry_and_inverse(m, k):
    spec = GridSpec(1, 4.0, 64)
    rng = np.random.default_rng(abs(m) + 7 * abs(k))
    u = GridFunction(spec, rng.standard_normal(64) + 0j)
    z = np.array([m * spec.h, k / 8.0])
    v = tf_shift(u, z)
    assert v.norm() == pytest.approx(u.norm(), rel=1e-12)
    back = translate(modulate(v, -z[1:]), -z[:1])
    assert np.allclose(back.values, u.values, atol=1e-12)


def test_translate_zero_boundary():
    spec = GridSpec(1, 1.0, 8)
    u = GridFunction(spec, np.arange(8.0))
    v = translate(u, 2 * spec.h, boundary="zero")
    assert np.allclose(v.values, [0, 0, 0, 1, 2, 3, 4, 5])
    with pytest.raises(MisalignedShift):
        translate(u, 0.1)


def test_translate_matches_function_shift():
    spec = GridSpec(1, 8.0, 256)
    u = sample(lambda p: np.exp(-np.pi * p[..., 0] ** 2), spec)
    shift = 0.3 // spec.h * spec.h
    ref = sample(lambda p: np.exp(-np.pi * (p[..., 0] - shift) ** 2), spec)
    assert np.allclose(translate(u, shift).values, ref.values, atol=1e-14)


def test_cube_maxima_includes_boundaries():
    A = np.array([0.0, 1.0, 5.0, 2.0, 0.0])
    assert np.allclose(cube_maxima(A, 2), [5.0, 5.0])
    B = np.arange(25.0).reshape(5, 5)
    out = cube_maxima(B, 2)
    assert out.shape == (2, 2)
    assert out[0, 0] == B[2, 2]


def test_parallel_map_order(monkeypatch):
    monkeypatch.setenv("GABOR_CERT_THREADS", "3")
    assert worker_count() == 3
    assert parallel_map(lambda x: x * x, range(20)) == [x * x for x in range(20)]
    monkeypatch.setenv("GABOR_CERT_THREADS", "1")
    assert worker_count() == 1


def test_lattice_spec_examples():
    lat = make_lattice(np.eye(2))
    assert lat.det == 1 and np.allclose(lat.inv_transpose, np.eye(2))
    with pytest.raises(SingularMatrix):
        make_lattice([[1, 1], [1, 1]])
    eta, z = dual_point(lat, [0, 0])
    assert not np.any(eta) and not np.any(z)


def test_weight_values():
    assert PolyWeight(2.0, 2)(np.array([3.0, 4.0])) == pytest.approx(36.0)
    assert PolyWeight(0.0, 2).unit_cube_max() == 1.0
    assert PolyWeight(1.0, 2).unit_cube_max() == pytest.approx(2.414214, abs=1e-6)


def test_commutation_phase():
    spec = GridSpec(1, 4.0, 64)
    u = sample(lambda p: np.exp(-np.pi * p[..., 0] ** 2), spec)
    x, w = 1.0, 0.5  # x w = 1/2
    tm = translate(modulate(u, w), x)
    mt = modulate(translate(u, x), w)
    assert np.allclose(tm.values, -mt.values, atol=1e-14)


def test_fourier_intertwining():
    # F(pi_z u) = e^{2 pi i x w} pi_{J^T z} F u with J^T (x, w) = (w, -x)
    spec = GridSpec(1, 8.0, 256)
    u = sample(lambda p: np.exp(-np.pi * p[..., 0] ** 2) * (1 + p[..., 0]), spec)
    x, w = 0.5, 0.75
    lhs = fourier(tf_shift(u, [x, w]))
    rhs = tf_shift(fourier(u), [w, -x])
    assert np.max(np.abs(lhs.values - np.exp(2j * np.pi * x * w) * rhs.values)) < 1e-10


def test_fourier_translation_rule():
    spec = GridSpec(1, 8.0, 256)
    u = sample(lambda p: np.exp(-np.pi * p[..., 0] ** 2), spec)
    x = 0.75
    lhs = fourier(translate(u, x))
    rhs = modulate(fourier(u), -x)
    assert np.max(np.abs(lhs.values - rhs.values)) < 1e-10
