import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaborcert.errors import NoConvergence
from gaborcert.linalg import conjugate_gradient, power_extremal_eigs, power_iteration


def test_power_iteration_diag():
    lam, v, _ = power_iteration(np.diag([2.0, 5.0]), 2)
    assert lam == pytest.approx(5.0, rel=1e-9)
    assert abs(abs(v[1]) - 1) < 1e-4


def test_extremal_eigs_identity_and_diag():
    assert power_extremal_eigs(np.eye(4), 4) == pytest.approx((1.0, 1.0))
    lo, hi = power_extremal_eigs(np.diag([2.0, 5.0]), 2)
    assert lo == pytest.approx(2.0, rel=1e-8) and hi == pytest.approx(5.0, rel=1e-8)


def test_power_iteration_zero_operator():
    lam, _, _ = power_iteration(np.zeros((3, 3)), 3)
    assert lam == 0.0


def test_power_iteration_no_convergence():
    S = np.diag([1.0, 0.999999, 0.5])
    with pytest.raises(NoConvergence):
        power_iteration(S, 3, tol=1e-15, max_iter=5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_extremal_eigs_random_psd(seed):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((12, 12)))
    ev = np.sort(rng.uniform(0.5, 4.0, 12))
    ev[-1] = ev[-2] + 0.5
    ev[0] = ev[1] - 0.3
    S = Q @ np.diag(ev) @ Q.T
    lo, hi = power_extremal_eigs(S, 12, tol=1e-13, max_iter=100000)
    assert hi == pytest.approx(ev[-1], rel=1e-6)
    assert lo == pytest.approx(ev[0], rel=1e-5)


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_conjugate_gradient_solves(seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((20, 20)) + 1j * rng.standard_normal((20, 20))
    S = A @ A.conj().T + 20 * np.eye(20)
    b = rng.standard_normal(20) + 0j
    x, res, _ = conjugate_gradient(S, b, tol=1e-10)
    assert res < 1e-10
    assert np.linalg.norm(S @ x - b) / np.linalg.norm(b) < 1e-9


def test_conjugate_gradient_identity():
    b = np.arange(5.0) + 0j
    x, res, it = conjugate_gradient(np.eye(5), b)
    assert np.allclose(x, b) and it <= 1
