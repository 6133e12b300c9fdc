import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gaborcert.errors import EmptyInterval
from gaborcert.lattice_count import (
    C_Lv,
    count_lattice_in_cube,
    count_report,
    counting_bound,
    integers_in_interval,
    random_gl,
    sampling_sum_check,
)
from gaborcert.tf_core import PolyWeight, diag_lattice, make_lattice

from oracles import brute_cube_count


def gauss(z):
    return np.exp(-np.pi * np.sum(np.asarray(z) ** 2, axis=-1))


def test_integers_in_interval():
    assert integers_in_interval(0.3, 2.7) == (2, 3)
    assert integers_in_interval(1, 1) == (1, 1)
    assert integers_in_interval(0.2, 0.9)[0] == 0
    with pytest.raises(EmptyInterval):
        integers_in_interval(2, 1)


@settings(max_examples=200)
@given(st.floats(-50, 50), st.floats(0, 20))
def test_interval_bound_property(a, length):
    count, bound = integers_in_interval(a, a + length)
    assert count <= bound
    assert count == sum(1 for k in range(-80, 80) if a <= k <= a + length)


@pytest.mark.parametrize(
    "L,count,bound",
    [(np.eye(2), 4, 4), (2 * np.eye(2), 1, 1), (np.array([[1.0, -1.0], [1.0, 1.0]]), None, 4)],
)
def test_cube_counts(L, count, bound):
    lat = make_lattice(L)
    c = count_lattice_in_cube(lat, [0, 0])
    if count is not None:
        assert c == count
    assert c == brute_cube_count(L, [0, 0])
    assert counting_bound(lat) == bound
    assert c <= counting_bound(lat)


def test_C_Lv_values():
    assert C_Lv(make_lattice(np.eye(2)), PolyWeight(0, 2)) == 4
    assert C_Lv(make_lattice(np.eye(2)), PolyWeight(1, 2)) == pytest.approx(9.6569, abs=1e-4)


def test_C_Lv_diagonal_dual():
    # for J L^{-T} with L = diag(alpha, beta): M_v prod([alpha]+1)([beta]+1)
    w = PolyWeight(1.5, 2)
    for a, b in [(0.5, 0.5), (1.0, 0.25), (2.5, 0.3)]:
        dual = diag_lattice(a, b).dual_tf_lattice()
        assert C_Lv(dual, w) == pytest.approx(w.unit_cube_max() * (np.floor(a) + 1) * (np.floor(b) + 1))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_counting_bound_property(seed):
    rng = np.random.default_rng(seed)
    L = random_gl(rng, 2)
    r = rng.integers(-6, 7, size=2)
    lat = make_lattice(L)
    c = count_lattice_in_cube(lat, r)
    assert c == brute_cube_count(L, r)
    assert c <= counting_bound(lat)


def test_counting_bound_4d():
    rng = np.random.default_rng(5)
    for _ in range(20):
        L = random_gl(rng, 4, lo=-1.5, hi=1.5, min_det=0.5)
        lat = make_lattice(L)
        r = rng.integers(-2, 3, size=4)
        rep = count_report(lat, r)
        assert rep.ok and rep.brute_count == brute_cube_count(L, r)


def test_sampling_sum_gaussian():
    lhs, rhs = sampling_sum_check(gauss, make_lattice(np.eye(2)), PolyWeight(0, 2), 6)
    assert lhs <= rhs
    assert lhs == pytest.approx(1.086434811213308**2, rel=1e-10)


def test_sampling_sum_zero():
    assert sampling_sum_check(lambda z: np.zeros(len(z)), make_lattice(np.eye(2)), PolyWeight(0, 2), 3) == (0.0, 0.0)


def test_sampling_sum_random_lattices():
    rng = np.random.default_rng(11)
    w = PolyWeight(1.0, 2)
    for _ in range(50):
        L = random_gl(rng, 2, lo=-1.5, hi=1.5, min_det=0.3)
        lhs, rhs = sampling_sum_check(gauss, make_lattice(L), w, 8)
        assert lhs <= rhs * (1 + 1e-12)
