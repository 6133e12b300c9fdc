"""Lattice periodization F_L(x) = sum_kappa f(x + L kappa) and the Poisson summation formula."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonDecaying
from .tf_core import Lattice, l1_ball


def _shell_index(kappas: np.ndarray) -> np.ndarray:
    return np.abs(kappas).sum(axis=1)


def periodized_values(q, lat: Lattice, points, h_trunc: int) -> np.ndarray:
    """Partial sums sum_{|kappa|_1 <= h_trunc} q(x + L kappa) at an (M, n) array of points."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    shifts = lat.points(l1_ball(lat.n, h_trunc))
    out = np.zeros(len(pts), dtype=complex)
    for s in shifts:
        out += q(pts + s)
    return out


@dataclass(frozen=True, eq=False)
class PeriodizedSymbol:
    """Samples of F_L(L t) for t on a uniform grid of [0, 1)^n."""

    lattice: Lattice
    h_trunc: int
    t_axis: np.ndarray
    values: np.ndarray
    tail: float  # max over the grid of the last shell's contribution

    def mass(self) -> complex:
        """Integral of F_L over one fundamental domain (periodic trapezoid rule)."""
        return complex(self.lattice.abs_det * np.mean(self.values))


def periodize(q, lat: Lattice, h_trunc: int, points_per_axis: int = 32) -> PeriodizedSymbol:
    """Periodize ``q`` over ``lat`` on a grid of the fundamental domain L[0, 1)^n.

    Raises NonDecaying when the outermost shell contributes more than the one before.
    """
    n = lat.n
    t_axis = np.arange(points_per_axis) / points_per_axis
    t = np.stack(np.meshgrid(*([t_axis] * n), indexing="ij"), -1).reshape(-1, n)
    x = t @ lat.matrix.T
    kappas = l1_ball(n, h_trunc)
    shells = _shell_index(kappas)
    shifts = lat.points(kappas)
    shell_sums = np.zeros((h_trunc + 1, len(x)), dtype=complex)
    for s, sh in zip(shifts, shells):
        shell_sums[sh] += q(x + s)
    total = shell_sums.sum(axis=0)
    last = float(np.max(np.abs(shell_sums[-1])))
    if h_trunc >= 1:
        prev = float(np.max(np.abs(shell_sums[-2])))
        if last > prev and last > 1e-14 * float(np.max(np.abs(total))):
            raise NonDecaying(f"shell {h_trunc} contributes {last:.3e} > {prev:.3e}")
    return PeriodizedSymbol(lat, h_trunc, t_axis, total.reshape((points_per_axis,) * n), last)


def fourier_coeff(q_hat, lat: Lattice, kappa) -> complex:
    """c_kappa(F_L) = q_hat(L^{-T} kappa) / |det L| for a callable q_hat on R^n."""
    eta = lat.inv_transpose @ np.asarray(kappa, dtype=float)
    return complex(np.asarray(q_hat(eta[None]))[0]) / lat.abs_det


def poisson_sides(f, f_hat, lat: Lattice, x, K: int) -> tuple[complex, complex]:
    """Both sides of sum f(x + L kappa) = |det L|^{-1} sum f_hat(L^{-T} kappa) e^{2 pi i L^{-T} kappa . x}."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    kappas = l1_ball(lat.n, K)
    lhs = np.sum(f(x[None] + lat.points(kappas)))
    eta = kappas @ lat.inv_transpose.T
    rhs = np.sum(f_hat(eta) * np.exp(2j * np.pi * eta @ x)) / lat.abs_det
    return complex(lhs), complex(rhs)


def poisson_residual(f, f_hat, lat: Lattice, x, K: int) -> float:
    lhs, rhs = poisson_sides(f, f_hat, lat, x, K)
    return abs(lhs - rhs)
