"""Small Hermitian eigenvalue and linear-solve routines used by the oracles."""
from __future__ import annotations

import numpy as np

from .errors import NoConvergence


def _as_apply(S):
    if callable(S):
        return S
    S = np.asarray(S)
    return lambda v: S @ v


def power_iteration(S, n: int, tol: float = 1e-10, max_iter: int = 20000, seed: int = 0, scale: float = 0.0):
    """Largest eigenvalue of a Hermitian positive semi-definite operator.

    Returns (eigenvalue, vector, iterations). Convergence is declared when the
    Rayleigh quotient changes by less than tol * max(|eigenvalue|, scale) between
    two iterations.
    Raises NoConvergence after ``max_iter`` steps.
    """
    apply = _as_apply(S)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    lam = 0.0
    for it in range(1, max_iter + 1):
        w = apply(v)
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0, v, it
        v = w / nw
        if it > 1 and abs(lam_new - lam) <= tol * max(abs(lam_new), scale, 1e-300):
            return lam_new, v, it
        lam = lam_new
    raise NoConvergence(f"power iteration did not converge in {max_iter} steps")


def power_extremal_eigs(S, n: int, tol: float = 1e-10, max_iter: int = 20000, seed: int = 0):
    """(lambda_min, lambda_max) of a Hermitian PSD operator via power iteration and a spectral shift."""
    apply = _as_apply(S)
    lam_max, _, _ = power_iteration(apply, n, tol, max_iter, seed)
    shifted = lambda v: lam_max * v - apply(v)
    # the shifted spectrum can be nearly flat at zero; measure its error against lam_max
    mu, _, _ = power_iteration(shifted, n, tol, max_iter, seed + 1, scale=abs(lam_max))
    return lam_max - mu, lam_max


def conjugate_gradient(S, b: np.ndarray, tol: float = 1e-8, max_iter: int | None = None):
    """Solve S x = b for Hermitian positive definite S; tol is relative to |b|.

    Returns (x, relative residual, iterations).
    """
    apply = _as_apply(S)
    b = np.asarray(b, dtype=complex)
    max_iter = max_iter or 10 * b.size
    x = np.zeros_like(b)
    r = b.copy()
    p = r.copy()
    rs = np.vdot(r, r).real
    bnorm = np.linalg.norm(b)
    if bnorm == 0:
        return x, 0.0, 0
    for it in range(1, max_iter + 1):
        Sp = apply(p)
        a = rs / np.vdot(p, Sp).real
        x += a * p
        r -= a * Sp
        rs_new = np.vdot(r, r).real
        if np.sqrt(rs_new) <= tol * bnorm:
            return x, float(np.sqrt(rs_new) / bnorm), it
        p = r + (rs_new / rs) * p
        rs = rs_new
    raise NoConvergence(f"conjugate gradient stalled at residual {np.sqrt(rs) / bnorm:.2e}")
