"""Counting lattice points in unit cubes and the sampling-sum bound for Wiener amalgam norms."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInterval
from .tf_core import Lattice, PolyWeight, cube_maxima, l1_ball

# slack used when flooring quantities that are integers in exact arithmetic
_FLOOR_SLACK = 1e-9
_MEMBER_TOL = 1e-10


def integers_in_interval(a: float, b: float) -> tuple[int, int]:
    """(number of integers in [a, b], the bound [b - a] + 1)."""
    if a > b:
        raise EmptyInterval(f"[{a}, {b}] is empty")
    count = max(0, math.floor(b) - math.ceil(a) + 1)
    return count, math.floor(b - a) + 1


def count_lattice_in_cube(lat: Lattice, r) -> int:
    """Exact number of kappa with L kappa in the closed cube r + [0, 1]^n."""
    r = np.asarray(r, dtype=float)
    n = lat.n
    corners = r + np.array(np.meshgrid(*([[0.0, 1.0]] * n), indexing="ij")).reshape(n, -1).T
    pre = corners @ lat.inverse.T
    lo = np.floor(pre.min(axis=0)) - 1
    hi = np.ceil(pre.max(axis=0)) + 1
    axes = [np.arange(int(l), int(h) + 1) for l, h in zip(lo, hi)]
    kappas = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, n)
    pts = lat.points(kappas)
    inside = np.all((pts >= r - _MEMBER_TOL) & (pts <= r + 1 + _MEMBER_TOL), axis=1)
    return int(np.count_nonzero(inside))


def counting_bound(lat: Lattice) -> int:
    """prod_j ([sum_i |a^{ij} / det L|] + 1) with (a^{ij}) the cofactor matrix."""
    col = np.sum(np.abs(lat.cofactor), axis=0) / lat.abs_det
    return int(np.prod(np.floor(col + _FLOOR_SLACK) + 1))


def C_Lv(lat: Lattice, w: PolyWeight) -> float:
    return w.unit_cube_max() * counting_bound(lat)


@dataclass(frozen=True, eq=False)
class CountReport:
    lattice: Lattice
    r: tuple
    brute_count: int
    bound: int
    C_Lv: float

    @property
    def ok(self) -> bool:
        return self.brute_count <= self.bound


def count_report(lat: Lattice, r, w: PolyWeight | None = None) -> CountReport:
    w = w or PolyWeight(0.0, lat.n)
    return CountReport(lat, tuple(int(v) for v in r), count_lattice_in_cube(lat, r), counting_bound(lat), C_Lv(lat, w))


def random_gl(rng: np.random.Generator, n: int = 2, lo: float = -3.0, hi: float = 3.0, min_det: float = 0.1) -> np.ndarray:
    while True:
        A = rng.uniform(lo, hi, size=(n, n))
        if abs(np.linalg.det(A)) > min_det:
            return A


def sampling_sum_check(f, lat: Lattice, w: PolyWeight, K: int, sub: int = 8) -> tuple[float, float]:
    """Both sides of sum v(L kappa)|f(L kappa)| <= C_{L,v} ||f||_{W(L^1_v)} truncated to |kappa|_1 <= K.

    The right side sums v(r) sup_{Q_r}|f| over the cubes that contain the sampled points;
    each cube sup is the max over a node lattice (``sub`` steps per unit) and over the
    lattice points in that cube.
    """
    n = lat.n
    pts = lat.points(l1_ball(n, K))
    vals = np.abs(f(pts))
    lhs = float(np.sum(w(pts) * vals))
    if not np.any(vals):
        return lhs, 0.0
    lo = np.floor(pts.min(axis=0)).astype(int) - 1
    hi = np.floor(pts.max(axis=0)).astype(int) + 1
    m = hi - lo
    axes = [lo[j] + np.arange(m[j] * sub + 1) / sub for j in range(n)]
    nodes = np.stack(np.meshgrid(*axes, indexing="ij"), -1)
    sups = cube_maxima(np.abs(f(nodes.reshape(-1, n))).reshape(nodes.shape[:-1]), sub)
    # lattice points belong to every closed cube containing them
    for p, v in zip(pts, vals):
        base = np.floor(p).astype(int)
        for off in np.ndindex(*(2,) * n):
            r = base - np.array(off)
            if np.all(p >= r - _MEMBER_TOL) and np.all(p <= r + 1 + _MEMBER_TOL):
                idx = tuple(r - lo)
                if all(0 <= i < mm for i, mm in zip(idx, m)):
                    sups[idx] = max(sups[idx], v)
    cube_r = np.stack(np.meshgrid(*[lo[j] + np.arange(m[j]) for j in range(n)], indexing="ij"), -1)
    rhs = C_Lv(lat, w) * float(np.sum(w(cube_r) * sups))
    return lhs, rhs
