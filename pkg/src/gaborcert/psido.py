"""Kohn-Nirenberg operators with lattice-periodic symbols and their norm bounds.

For a symbol periodized over L, q_L = sum_kappa q(. + L kappa), the operator
q_L(x, D) is bounded on L^2 (and on weighted modulation spaces) by
C sigma / |det L| with sigma = sum_kappa v(J L^{-T} kappa) |q_hat(L^{-T} kappa)|,
and invertible when the kappa = 0 coefficient dominates the rest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, ZeroMean
from .periodize import PeriodizedSymbol, periodized_values
from .tf_core import ALIGN_TOL, GridFunction, Lattice, PolyWeight, fourier, l1_ball, parallel_map, symplectic


@dataclass(frozen=True, eq=False)
class SymbolSeries:
    lattice: Lattice
    weight: PolyWeight
    K: int
    kappas: np.ndarray
    magnitudes: np.ndarray  # |q_hat(L^{-T} kappa)|
    weights: np.ndarray  # v(J L^{-T} kappa)
    tail_bound: float = 0.0

    def partial_sum(self, include_zero: bool = True) -> float:
        terms = self.weights * self.magnitudes
        if not include_zero:
            terms = terms[np.any(self.kappas != 0, axis=1)]
        return float(np.sum(terms))


def symbol_series(q_hat, lat: Lattice, weight: PolyWeight, K: int, tail_bound: float = 0.0) -> SymbolSeries:
    """Tabulate |q_hat(L^{-T} kappa)| and v(J L^{-T} kappa) for |kappa|_1 <= K."""
    kappas = l1_ball(lat.n, K)
    eta = kappas @ lat.inv_transpose.T
    mags = np.abs(np.asarray(q_hat(eta)))
    z = eta @ symplectic(lat.d).T
    return SymbolSeries(lat, weight, K, kappas, mags, weight(z), float(tail_bound))


def sigma_Lv(series: SymbolSeries) -> tuple[float, float]:
    """Partial sum of v |q_hat| over |kappa| <= K plus the caller's rigorous tail."""
    return series.partial_sum() + series.tail_bound, series.tail_bound


def continuity_bound(sigma: float, lat: Lattice, C: float = 1.0) -> float:
    if C <= 0:
        raise ValueError("C must be positive")
    return C * sigma / lat.abs_det


def invertibility_margin(c0: complex, sigma_without_zero: float, C: float = 1.0, det: float = 1.0):
    """Return (margin, invertible, inverse_norm_bound, det_scale).

    c0 is the integral of q (the kappa = 0 Fourier datum before dividing by |det L|).
    The inverse bound |det L| / ((1 + C)|c0| - C sigma) uses sigma = |c0| + sigma_without_zero
    (v(0) = 1) and is None when that denominator is not positive.
    """
    s0 = abs(c0)
    if s0 == 0.0:
        raise ZeroMean("the symbol has zero mean, so the kappa = 0 coefficient vanishes")
    margin = s0 - C * sigma_without_zero
    invertible = margin > 0
    sigma = s0 + sigma_without_zero
    denom = (1.0 + C) * s0 - C * sigma
    bound = abs(det) / denom if invertible and denom > 0 else None
    return margin, bool(invertible), bound, abs(det)


# --------------------------------------------------------------------------- application


def periodic_symbol(q, lat: Lattice, K: int):
    """Callable (x, w) -> sum_{|kappa|_1 <= K} q((x, w) + L kappa) on broadcast arrays."""

    def p(x, w):
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        x, w = np.broadcast_arrays(x, w)
        pts = np.concatenate([x, w], axis=-1)
        shape = pts.shape[:-1]
        return periodized_values(q, lat, pts.reshape(-1, pts.shape[-1]), K).reshape(shape)

    return p


def _symbol_rows(p, spec, fspec, rows):
    """Symbol values p(x_i, w_k) for output rows i (flattened) and all frequencies k."""
    d = spec.n
    x_all = spec.points().reshape(-1, d)
    w_all = fspec.points().reshape(-1, d)
    x = x_all[rows]
    if isinstance(p, np.ndarray):
        if p.shape != (spec.size, fspec.size):
            raise GridMismatch(f"grid symbol of shape {p.shape}, expected {(spec.size, fspec.size)}")
        return p[rows]
    if isinstance(p, PeriodizedSymbol):
        return _lookup_periodized(p, x[:, None, :], w_all[None, :, :])
    return np.broadcast_to(p(x[:, None, :], w_all[None, :, :]), (len(rows), fspec.size))


def _lookup_periodized(p: PeriodizedSymbol, x, w):
    z = np.concatenate(np.broadcast_arrays(x, w), axis=-1)
    t = z @ p.lattice.inverse.T
    M = len(p.t_axis)
    m = t * M
    mi = np.rint(m)
    if np.any(np.abs(m - mi) > ALIGN_TOL * np.maximum(1.0, np.abs(m))):
        raise GridMismatch("symbol samples do not cover the operator grid")
    idx = np.mod(mi.astype(np.int64), M)
    return p.values[tuple(idx[..., j] for j in range(idx.shape[-1]))]


def apply_kn(p, u: GridFunction) -> GridFunction:
    """q(x, D) u (x) = int exp(2 pi i x.w) p(x, w) u_hat(w) dw by quadrature on u's frequency grid.

    ``p`` is a callable p(x, w) on broadcast point arrays, a dense array of shape
    (N^d, N^d) indexed by (time node, frequency node), or a PeriodizedSymbol whose
    sample grid contains the operator grid.
    """
    spec = u.spec
    U = fourier(u)
    fspec = U.spec
    d = spec.n
    x_all = spec.points().reshape(-1, d)
    w_all = fspec.points().reshape(-1, d)
    u_hat = U.values.reshape(-1)
    chunk = max(1, 2**20 // fspec.size)
    starts = range(0, spec.size, chunk)

    def task(s):
        rows = np.arange(s, min(s + chunk, spec.size))
        P = _symbol_rows(p, spec, fspec, rows)
        E = np.exp(2j * np.pi * x_all[rows] @ w_all.T)
        return (E * P) @ u_hat

    out = np.concatenate(parallel_map(task, starts)) * fspec.h**d
    return GridFunction(spec, out.reshape(spec.shape))


def kn_matrix(p, spec) -> np.ndarray:
    """Dense matrix of apply_kn(p, .) acting on grid samples."""
    n = spec.size
    cols = []
    eye = np.zeros(n, dtype=complex)
    for j in range(n):
        eye[:] = 0
        eye[j] = 1
        cols.append(apply_kn(p, GridFunction(spec, eye.reshape(spec.shape))).values.reshape(-1))
    return np.stack(cols, axis=1)
