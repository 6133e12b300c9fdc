import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gaborcert.decay import (
    C_d,
    Envelope,
    cube_envelope_sum,
    decay_constants,
    envelope_bound,
    product_exponent,
    series_closed_bound,
    tail_diagonal_box,
    tail_l1_general,
    theta_max,
)
from gaborcert.errors import MissingDerivatives, NonPositiveInner
from gaborcert.lattice_count import C_Lv
from gaborcert.stft import stft_grid
from gaborcert.tf_core import GridFunction, GridSpec, PolyWeight, diag_lattice, l1_ball, make_lattice
from gaborcert.windows import SampledWindow, gaussian, hermite

from oracles import C_d_mp, gauss_pair_stft, weighted_sup_1d

QUAD = GridSpec(1, 8.0, 512)

# [DERIVED] mpmath evaluation of 2^(2d+1) d^d (1 + 1/pi)^(d+1)
C_1 = 13.903527648079354
# [DERIVED] sup_t (1+|t|)^2 exp(-pi t^2), scalar maximisation in oracles.weighted_sup_1d
GAUSS_SUP_EPS1 = 1.2840176655204398
# [DERIVED] max over the derivative/monomial family for the unit Gaussian, eps = 1 (sympy + scalar maximisation)
GAUSS_K_EPS1 = 8.336049881033162


def gaussian_family_oracle(eps):
    t = sp.symbols("t", real=True)
    g = sp.exp(-sp.pi * t**2)
    pairs = [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2), (2, 0), (2, 1)]
    vals = []
    for b, a in pairs:
        f = sp.lambdify(t, t**b * sp.diff(g, t, a))
        vals.append(weighted_sup_1d(lambda s: complex(f(s)), 1 + eps))
    return max(vals)


def test_C_d_values():
    assert C_d(1) == pytest.approx(C_d_mp(1), rel=1e-15)
    assert C_d(1) == pytest.approx(C_1, rel=1e-15)
    assert C_d(2) == pytest.approx(C_d_mp(2), rel=1e-15)


def test_product_exponent():
    assert product_exponent(1, 1.0) == 2.0
    assert product_exponent(2, 1.0) == 1.5


def test_gaussian_constants_eps1():
    c = decay_constants(gaussian(), 1.0, QUAD)
    assert c.rigorous
    assert c.sup_norm == pytest.approx(GAUSS_SUP_EPS1, rel=1e-8)
    assert c.K == pytest.approx(GAUSS_K_EPS1, rel=1e-8)
    assert c.K == c.K_hat
    assert gaussian_family_oracle(1.0) == pytest.approx(GAUSS_K_EPS1, rel=1e-10)


@pytest.mark.parametrize("eps", [0.5, 2.0])
def test_gaussian_constants_other_eps(eps):
    c = decay_constants(gaussian(), eps, QUAD)
    assert c.K == pytest.approx(gaussian_family_oracle(eps), rel=1e-7)


def test_zero_window_constants():
    zero = SampledWindow(GridFunction(QUAD, np.zeros(QUAD.shape)))
    c = decay_constants(zero, 1.0, QUAD)
    assert c.K == 0 and c.K_hat == 0 and c.H == 0
    assert not c.rigorous
    with pytest.raises(MissingDerivatives):
        decay_constants(zero, 1.0, QUAD, require_rigor=True)


def test_hermite_constants_converge():
    c = decay_constants(hermite(2), 1.0, QUAD)
    assert c.rigorous and c.refinement_change < 0.005
    assert c.K > decay_constants(gaussian(), 1.0, QUAD).K


def test_envelope_at_origin():
    c = decay_constants(gaussian(), 1.0, QUAD)
    env = envelope_bound(c, c, 1)
    assert env(np.zeros(1), np.zeros(1)) == pytest.approx(C_1 * c.K_sym**2)


def test_envelope_dominates_gaussian_stft():
    c = decay_constants(gaussian(), 1.0, QUAD)
    env = envelope_bound(c, c, 1)
    spec = GridSpec(2, 8.0, 256)
    p = spec.points()
    V = np.abs(gauss_pair_stft(1, 1, p[..., 0], p[..., 1]))
    assert np.all(V <= env(p[..., :1], p[..., 1:]))
    assert np.all(env(p[..., :1], p[..., 1:]) <= env.product(p[..., :1], p[..., 1:]) * (1 + 1e-12))


def test_envelope_dominates_hermite_pair():
    ch, cg = decay_constants(hermite(1), 1.0, QUAD), decay_constants(gaussian(), 1.0, QUAD)
    env = envelope_bound(ch, cg, 1)
    spec = GridSpec(2, 6.0, 96)
    V = np.abs(stft_grid(hermite(1), gaussian(), spec).values)
    p = spec.points()
    assert np.all(V <= env(p[..., :1], p[..., 1:]))


def test_series_closed_bound_arithmetic():
    assert series_closed_bound(1.0, 1.0, 1, 1.0, 0.5) == pytest.approx(3 * C_1)
    assert series_closed_bound(1.0, 1.0, 1, 1.0, 1e-12) < 1e-9


def test_theta_max_inverts_closed_bound():
    K = 8.3
    th = theta_max(0.7, K, K, 1, 1.0)
    assert series_closed_bound(K, K, 1, 1.0, th) == pytest.approx(0.7, rel=1e-10)
    assert theta_max(0.8, K, K, 1, 1.0) > th
    assert theta_max(1e-12, K, K, 1, 1.0) < 1e-12
    with pytest.raises(NonPositiveInner):
        theta_max(0.0, K, K, 1, 1.0)


def brute_diag_tail(env, alpha, beta, box, M, s=0.0):
    """Direct partial sum of the weighted product envelope over max(|h|, |k|) in (box, M]."""
    if s == 0.0:
        # the product envelope factorises, so sum 1-d profiles over |n| <= M
        n = np.arange(-M, M + 1)
        fx = (1 + np.abs(n) / beta) ** -product_exponent(env.d, env.epsilon)
        fw = (1 + np.abs(n) / alpha) ** -product_exponent(env.d, env.epsilon)
        inner = np.abs(n) <= box
        return env.constant * float(fx.sum() * fw.sum() - fx[inner].sum() * fw[inner].sum())
    h = np.arange(-M, M + 1)
    H, Kk = np.meshgrid(h, h, indexing="ij")
    outside = (np.abs(H) > box) | (np.abs(Kk) > box)
    x, w = -Kk / beta, H / alpha
    vals = env.product(x[..., None], w[..., None]) * (1 + np.hypot(x, w)) ** s
    return float(np.sum(vals[outside]))


@pytest.mark.parametrize("alpha,beta,box", [(0.5, 0.5, 4), (0.25, 1.0, 6), (1.0, 1.0, 2)])
def test_diagonal_tail_dominates_partial_sums(alpha, beta, box):
    env = Envelope(1, 1.0, 1.0)
    bound = tail_diagonal_box(env, [alpha], [beta], box)
    assert brute_diag_tail(env, alpha, beta, box, 400) <= bound
    assert bound < 1.5 * brute_diag_tail(env, alpha, beta, box, 10**6)


def test_diagonal_tail_weighted_and_divergent():
    env = Envelope(1, 1.0, 1.0)
    b = tail_diagonal_box(env, [0.5], [0.5], 4, s=0.5)
    assert brute_diag_tail(env, 0.5, 0.5, 4, 300, s=0.5) <= b
    assert tail_diagonal_box(env, [0.5], [0.5], 4, s=1.0) == math.inf


def test_cube_envelope_sum_dominates():
    env = Envelope(1, 1.0, 1.0)
    w = PolyWeight(0.5, 2)
    total = cube_envelope_sum(env, 0.5, 2, inside=[(-3, 2)] * 2)
    # brute force over a large square of cubes with sups at the nearest corner
    r = np.arange(-200, 200)
    R0, R1 = np.meshgrid(r, r, indexing="ij")
    near = lambda a: np.where(a >= 0, a, -a - 1)  # noqa: E731
    far = lambda a: np.maximum(np.abs(a), np.abs(a + 1))  # noqa: E731
    sup = (1 + near(R0)) ** -2.0 * (1 + near(R1)) ** -2.0
    wmax = (1 + np.hypot(far(R0), far(R1))) ** 0.5
    mask = ~((R0 >= -3) & (R0 <= 2) & (R1 >= -3) & (R1 <= 2))
    assert float(np.sum((sup * wmax)[mask])) <= total
    assert w.s == 0.5


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_general_tail_dominates(seed):
    rng = np.random.default_rng(seed)
    A = np.diag([0.5, 0.5]) + rng.uniform(-0.15, 0.15, size=(2, 2))
    lat = make_lattice(A)
    env = Envelope(1, 1.0, 1.0)
    K = 6
    dual = lat.dual_tf_lattice()
    bound = tail_l1_general(env, lat, K, C_Lv(dual, PolyWeight(0, 2)))
    kap = l1_ball(2, 80)
    outside = np.abs(kap).sum(axis=1) > K
    z = lat.dual_tf_points(kap[outside])
    brute = float(np.sum(env.product(z[:, :1], z[:, 1:])))
    assert brute <= bound


def test_decay_constants_validation():
    with pytest.raises(ValueError):
        decay_constants(gaussian(), 0.0, QUAD)
    assert diag_lattice(1, 1).abs_det == 1
