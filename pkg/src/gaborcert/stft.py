"""Short-time Fourier transform V_g gamma(x, w) = int gamma(t) exp(-2 pi i w.t) conj(g(t - x)) dt.

Values are computed by Riemann/trapezoid quadrature on a box grid. The time-side sum
aliases once |w| approaches the grid's Nyquist frequency, so high-frequency points are
evaluated on the Fourier side through V_g gamma(x, w) = exp(-2 pi i w.x) V_ghat gammahat(w, -x).
Points whose quadrature integrand vanishes identically in float64 are exactly zero.
"""
from __future__ import annotations

import string
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateWindow, NonRigorous, SupportTruncation
from .tf_core import GridFunction, GridSpec, Lattice, PolyWeight, l1_ball, parallel_map
from .windows import Window


def _contract(p: np.ndarray, mats: list) -> np.ndarray:
    """sum_t p(t) prod_j mats[j][m, t_j] for a batch index m (one row per point)."""
    d = p.ndim
    letters = string.ascii_lowercase[:d]
    spec = ",".join(f"m{c}" for c in letters) + f",{letters}->m"
    return np.einsum(spec, *mats, p, optimize=True)


def _outer_contract(p: np.ndarray, mats: list) -> np.ndarray:
    """Separable transform: out[k_1..k_d] = sum_t p(t) prod_j mats[j][k_j, t_j]."""
    out = p
    for j, M in enumerate(mats):
        out = np.moveaxis(np.tensordot(M, out, axes=([1], [j])), 0, j)
    return out


def _boundary_max(p: np.ndarray) -> float:
    m = 0.0
    for ax in range(p.ndim):
        m = max(m, float(np.max(np.abs(np.take(p, [0, -1], axis=ax)))))
    return m


class StftEngine:
    """Evaluate V_g gamma at arbitrary points of R^{2d} for a fixed window pair."""

    def __init__(self, gamma: Window, g: Window, quad: GridSpec, fquad: GridSpec | None = None):
        if gamma.d != g.d or quad.n != gamma.d:
            raise ValueError("window and grid dimensions disagree")
        self.gamma, self.g, self.quad = gamma, g, quad
        self.d = gamma.d
        self.t_axis = quad.axis()
        self.t_pts = quad.points()
        self.gamma_t = gamma(self.t_pts)
        g_t = g(self.t_pts)
        if not np.any(self.gamma_t) or not np.any(g_t):
            raise DegenerateWindow("window vanishes on the quadrature grid")
        self.peak = float(np.max(np.abs(self.gamma_t)) * np.max(np.abs(g_t)))
        self.rigorous = bool(gamma.rigorous and g.rigorous)
        self.omega_band = 1.0 / (4.0 * quad.h)
        # rows with |x_j| beyond this have an identically zero time integrand
        self.x_reach = quad.R + g.support_radius()
        self.fourier_side = self.rigorous
        if self.fourier_side:
            self.gamma_hat, self.g_hat = gamma.fourier(), g.fourier()
            if fquad is None:
                Rf = quad.R
                Nf = quad.N
                while Nf / (8.0 * Rf) < self.x_reach:
                    Nf *= 2
                fquad = GridSpec(self.d, Rf, Nf)
            self.fquad = fquad
            self.s_pts = fquad.points()
            self.gamma_hat_s = self.gamma_hat(self.s_pts)
            self.x_band = 1.0 / (4.0 * fquad.h)
            self.w_reach = fquad.R + self.g_hat.support_radius()
        self.truncation_flagged = False
        self._phase_cache = {}

    def _phases(self, tag, freqs, axis, sign):
        # consecutive rows/columns usually share their evaluation points; reuse the matrices
        key = (tag, freqs.shape, freqs.tobytes())
        cached = self._phase_cache.get(tag)
        if cached is not None and cached[0] == key:
            return cached[1]
        mats = [np.exp(sign * 2j * np.pi * np.outer(freqs[:, j], axis)) for j in range(self.d)]
        self._phase_cache[tag] = (key, mats)
        return mats

    # -- integrands -------------------------------------------------------------
    def time_product(self, x) -> np.ndarray:
        p = self.gamma_t * np.conj(self.g(self.t_pts - np.asarray(x, dtype=float)))
        self._check_support(p)
        return p

    def freq_product(self, w) -> np.ndarray:
        q = self.gamma_hat_s * np.conj(self.g_hat(self.s_pts - np.asarray(w, dtype=float)))
        self._check_support(q)
        return q

    def _check_support(self, p):
        if not self.truncation_flagged and _boundary_max(p) > 1e-14 * self.peak:
            self.truncation_flagged = True
            warnings.warn(SupportTruncation("integrand is not negligible on the quadrature boundary"), stacklevel=3)

    def _time_row(self, x, ws: np.ndarray) -> np.ndarray:
        p = self.time_product(x)
        if not np.any(p):
            return np.zeros(len(ws), dtype=complex)
        mats = self._phases("t", ws, self.t_axis, -1)
        return self.quad.h**self.d * _contract(p, mats)

    def _freq_col(self, w, xs: np.ndarray) -> np.ndarray:
        q = self.freq_product(w)
        if not np.any(q):
            return np.zeros(len(xs), dtype=complex)
        mats = self._phases("f", xs, self.fquad.axis(), 1)
        vals = self.fquad.h**self.d * _contract(q, mats)
        return vals * np.exp(-2j * np.pi * xs @ np.asarray(w, dtype=float))

    # -- public -----------------------------------------------------------------
    def values(self, points, side: str = "auto") -> np.ndarray:
        """V_g gamma at an (M, 2d) array of points."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d = self.d
        xs, ws = pts[:, :d], pts[:, d:]
        out = np.zeros(len(pts), dtype=complex)
        live = np.all(np.abs(xs) <= self.x_reach, axis=1)
        in_band = np.all(np.abs(ws) <= self.omega_band, axis=1)
        if side == "time" or not self.fourier_side:
            t_mask = live
            if side != "time" and np.any(live & ~in_band):
                warnings.warn(NonRigorous("time-side quadrature above the alias-free band"), stacklevel=2)
        else:
            t_mask = live & in_band
        f_mask = live & ~t_mask
        if np.any(t_mask):
            idx = np.nonzero(t_mask)[0]
            ux, inv = np.unique(xs[idx], axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            for r, x in enumerate(ux):
                sel = idx[inv == r]
                out[sel] = self._time_row(x, ws[sel])
        if np.any(f_mask):
            idx = np.nonzero(f_mask)[0]
            if np.any(np.abs(xs[idx]) > self.x_band):
                warnings.warn(NonRigorous("Fourier-side quadrature above the alias-free band"), stacklevel=2)
            uw, inv = np.unique(ws[idx], axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            for c, w in enumerate(uw):
                sel = idx[inv == c]
                if np.all(np.abs(w) <= self.w_reach):
                    out[sel] = self._freq_col(w, xs[sel])
        return out

    def diagonal_box_sum(self, alpha, beta, box: int, weight: PolyWeight | None = None):
        """Sum of v|V| over the dual points (-k/beta, h/alpha), |h|_inf, |k|_inf <= box.

        Returns (value at kappa = 0, weighted sum over kappa != 0). Rows whose time
        integrand vanishes are skipped without evaluation, which keeps large boxes cheap.
        """
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        beta = np.atleast_1d(np.asarray(beta, dtype=float))
        d = self.d
        s = 0.0 if weight is None else weight.s
        rng = np.arange(-box, box + 1)
        # live rows: |k_j / beta_j| <= x_reach
        k_axes = [rng[np.abs(rng / beta[j]) <= self.x_reach] for j in range(d)]
        rows = np.stack(np.meshgrid(*k_axes, indexing="ij"), -1).reshape(-1, d)
        h_in = [rng[np.abs(rng / alpha[j]) <= self.omega_band] for j in range(d)]
        if not self.fourier_side:
            h_in = [rng] * d

        def weighted(z, V):
            if s == 0:
                return np.abs(V)
            return (1.0 + np.linalg.norm(z, axis=-1)) ** s * np.abs(V)

        def row_task(k):
            x = -k / beta
            p = self.time_product(x)
            if not np.any(p):
                return 0.0, None
            mats = [np.exp(-2j * np.pi * np.outer(h_in[j] / alpha[j], self.t_axis)) for j in range(d)]
            V = self.quad.h**d * _outer_contract(p, mats)
            grid_h = np.stack(np.meshgrid(*h_in, indexing="ij"), -1)
            w = grid_h / alpha
            z = np.concatenate([np.broadcast_to(x, w.shape), w], axis=-1)
            terms = weighted(z, V)
            v0 = None
            if not np.any(k):
                centre = tuple(int(np.nonzero(h_in[j] == 0)[0][0]) for j in range(d))
                v0 = V[centre]
                terms = terms.copy()
                terms[centre] = 0.0
            return float(np.sum(terms)), v0

        results = parallel_map(row_task, list(rows))
        total = sum(r[0] for r in results)
        v0 = next(r[1] for r in results if r[1] is not None)
        if self.fourier_side:
            total += self._high_frequency_part(alpha, beta, box, rows, h_in, weighted)
        return complex(v0), float(total)

    def _high_frequency_part(self, alpha, beta, box, rows, h_in, weighted) -> float:
        d = self.d
        rng = np.arange(-box, box + 1)
        h_live = [rng[np.abs(rng / alpha[j]) <= self.w_reach] for j in range(d)]
        cols = np.stack(np.meshgrid(*h_live, indexing="ij"), -1).reshape(-1, d)
        lo = np.array([h.min() for h in h_in])
        hi = np.array([h.max() for h in h_in])
        cols = cols[~np.all((cols >= lo) & (cols <= hi), axis=1)]
        xs = -rows / beta
        if np.any(np.abs(xs) > self.x_band):
            warnings.warn(NonRigorous("Fourier-side quadrature above the alias-free band"), stacklevel=3)

        def col_task(h):
            w = h / alpha
            V = self._freq_col(w, xs)
            z = np.concatenate([xs, np.broadcast_to(w, xs.shape)], axis=-1)
            return float(np.sum(weighted(z, V)))

        return float(sum(parallel_map(col_task, list(cols))))


# --------------------------------------------------------------------------- functions


def stft_point(gamma: Window, g: Window, z, quad: GridSpec) -> complex:
    """V_g gamma(z) by quadrature on ``quad``."""
    return complex(StftEngine(gamma, g, quad).values(np.asarray(z, dtype=float)[None])[0])


def stft_grid(gamma: Window, g: Window, spec: GridSpec) -> GridFunction:
    """V_g gamma on the grid ``spec`` of R^{2d} (same axis for x and w).

    The time quadrature uses the grid whose Fourier grid is the w-axis of ``spec``:
    spacing 2R/N in w needs a time box of half-width N/(4R) sampled with N points.
    """
    if spec.n % 2:
        raise ValueError("stft_grid needs a grid on R^{2d}")
    d = spec.n // 2
    quad = GridSpec(d, spec.N / (4.0 * spec.R), spec.N)
    eng = StftEngine(gamma, g, quad)
    xaxis = spec.axis()
    s_in = (-1.0) ** np.arange(spec.N)
    s_out = (-1.0) ** (np.arange(spec.N) - spec.N // 2)
    out = np.zeros((spec.N,) * spec.n, dtype=complex)
    x_nodes = np.stack(np.meshgrid(*([xaxis] * d), indexing="ij"), -1).reshape(-1, d)
    fft_axes = tuple(range(d))

    def task(i):
        p = eng.time_product(x_nodes[i])
        if not np.any(p):
            return np.zeros((spec.N,) * d, dtype=complex)
        F = p
        for ax in range(d):
            shape = [1] * d
            shape[ax] = -1
            F = F * s_in.reshape(shape)
        F = np.fft.fftn(F, axes=fft_axes)
        for ax in range(d):
            shape = [1] * d
            shape[ax] = -1
            F = F * s_out.reshape(shape)
        return quad.h**d * F

    rows = parallel_map(task, range(len(x_nodes)))
    for i, r in enumerate(rows):
        out[np.unravel_index(i, (spec.N,) * d)] = r
    return GridFunction(spec, out)


@dataclass(frozen=True, eq=False)
class StftSamples:
    """V_g gamma at the dual points J L^{-T} kappa for |kappa|_1 <= K."""

    lattice: Lattice
    K: int
    kappas: np.ndarray
    values: np.ndarray
    rigorous: bool = True

    @property
    def points(self) -> np.ndarray:
        return self.lattice.dual_tf_points(self.kappas)

    def as_dict(self) -> dict:
        return {tuple(int(v) for v in k): complex(val) for k, val in zip(self.kappas, self.values)}

    def zero_value(self) -> complex:
        return complex(self.values[0])


def stft_on_dual_lattice(gamma: Window, g: Window, lat: Lattice, K: int, quad: GridSpec) -> StftSamples:
    kappas = l1_ball(lat.n, K)
    eng = StftEngine(gamma, g, quad)
    pts = lat.dual_tf_points(kappas)
    vals = eng.values(pts)
    return StftSamples(lat, K, kappas, vals, rigorous=eng.rigorous)


def fourier_symmetry_check(gamma: Window, g: Window, points, quad: GridSpec) -> float:
    """max | |V_g gamma(x, w)| - |V_ghat gammahat(w, -x)| | with both sides by time quadrature."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    d = gamma.d
    lhs = StftEngine(gamma, g, quad).values(pts, side="time")
    swapped = np.concatenate([pts[:, d:], -pts[:, :d]], axis=1)
    rhs = StftEngine(gamma.fourier(), g.fourier(), quad).values(swapped, side="time")
    return float(np.max(np.abs(np.abs(lhs) - np.abs(rhs))))
