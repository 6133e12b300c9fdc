"""The Gabor operator S u = sum_kappa (u, pi(L kappa) g) pi(L kappa) gamma in direct and Janssen form.

Two index-set conventions are supported by ``gabor_apply_direct``:

``mode="l1"``
    kappa ranges over the l1 ball |kappa|_1 <= K and shifted windows are evaluated on
    the line (no wrap-around). This is the truncated series itself.
``mode="grid"``
    the torus picture: for a diagonal lattice with 2R/alpha and 1/(beta h) integers,
    one full period of translations times one full alias period of modulations.
    The resulting matrix is exactly the frame operator of the periodized system,
    which commutes with the lattice shifts on the torus.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import GridMismatch, MisalignedShift, NonRigorous, TruncationWarning
from .psido import apply_kn, periodic_symbol
from .stft import StftSamples
from .tf_core import ALIGN_TOL, GridFunction, GridSpec, Lattice, l1_ball, tf_shift
from .windows import SampledWindow, Window


@dataclass(frozen=True, eq=False)
class GaborSystem:
    g: Window
    gamma: Window
    lattice: Lattice
    K: int = 10

    def __post_init__(self):
        if self.g.d != self.gamma.d or self.lattice.n != 2 * self.g.d:
            raise ValueError("window and lattice dimensions disagree")

    @property
    def d(self) -> int:
        return self.g.d

    @property
    def tight_pair(self) -> bool:
        return self.g is self.gamma


def _shifted(win: Window, t: np.ndarray, x: np.ndarray, w: np.ndarray) -> np.ndarray:
    """M_w T_x win at grid nodes t, shape (M, ...) for M shifts."""
    vals = win(t[None] - x[:, None, :])
    return vals * np.exp(2j * np.pi * np.einsum("md,pd->mp", w, t))


# --------------------------------------------------------------------------- direct form


def gabor_apply_direct(sys: GaborSystem, u: GridFunction, mode: str = "l1") -> GridFunction:
    if mode == "grid":
        return TorusFrame(sys, u.spec).apply(u)
    if mode != "l1":
        raise ValueError(f"unknown mode {mode!r}")
    spec = u.spec
    d = spec.n
    if d != sys.d:
        raise GridMismatch("grid dimension differs from the system dimension")
    t = spec.points().reshape(-1, d)
    uv = u.values.reshape(-1)
    kappas = l1_ball(2 * d, sys.K)
    shells = np.abs(kappas).sum(axis=1)
    z = sys.lattice.points(kappas)
    if np.max(np.abs(z[:, d:]), initial=0.0) >= 1.0 / (2.0 * spec.h):
        warnings.warn(NonRigorous("modulations reach the grid Nyquist frequency and alias"), stacklevel=2)
    hd = spec.h**d
    out = np.zeros_like(uv, dtype=complex)
    last = np.zeros_like(out)
    chunk = max(1, 2**22 // max(1, t.shape[0]))
    for s in range(0, len(z), chunk):
        zz = z[s : s + chunk]
        phi = _shifted(sys.g, t, zz[:, :d], zz[:, d:])
        psi = phi if sys.tight_pair else _shifted(sys.gamma, t, zz[:, :d], zz[:, d:])
        coef = hd * (np.conj(phi) @ uv)
        contrib = coef[:, None] * psi
        out += contrib.sum(axis=0)
        on_last = shells[s : s + chunk] == sys.K
        if np.any(on_last):
            last += contrib[on_last].sum(axis=0)
    on = np.linalg.norm(out)
    if sys.K >= 1 and on > 0 and np.linalg.norm(last) > 1e-10 * on:
        warnings.warn(TruncationWarning(f"shell K={sys.K} carries {np.linalg.norm(last) / on:.1e} of the output"), stacklevel=2)
    return GridFunction(spec, out.reshape(spec.shape))


def _integer_ratio(value: float, what: str) -> int:
    r = int(np.rint(value))
    if r < 1 or abs(value - r) > ALIGN_TOL * max(1.0, value):
        raise MisalignedShift(f"{what} = {value:.6g} is not an integer")
    return r


class TorusFrame:
    """Frame operator of a separable Gabor system on the torus [-R, R)^d.

    Translations are by alpha over one period 2R, modulations by beta over one alias
    period 1/h. The kernel factorizes as
    S[i, j] = h^d (sum_x gamma_x(t_i) conj(g_x(t_j))) * (sum_k e_k(t_i) conj(e_k(t_j))).
    """

    def __init__(self, sys: GaborSystem, spec: GridSpec):
        lat = sys.lattice
        if lat.diagonal is None:
            raise MisalignedShift("torus assembly needs a diagonal lattice")
        if spec.n != sys.d:
            raise GridMismatch("grid dimension differs from the system dimension")
        alpha, beta = (np.asarray(v) for v in lat.diagonal)
        self.sys, self.spec = sys, spec
        d = spec.n
        n_shift = [_integer_ratio(2 * spec.R / a, "2R/alpha") for a in alpha]
        step = [_integer_ratio(a / spec.h, "alpha/h") for a in alpha]
        n_mod = [_integer_ratio(1.0 / (b * spec.h), "1/(beta h)") for b in beta]
        for P in n_mod:
            if spec.N % P:
                raise MisalignedShift(f"alias period {P} does not divide N = {spec.N}")
        self.alpha, self.beta = alpha, beta
        t = spec.points().reshape(-1, d)
        shifts = np.array(list(itertools.product(*[range(m) for m in n_shift])), dtype=float) * alpha
        self.G = self._translates(sys.g, shifts, step).T  # (N^d, #shifts)
        self.Gam = self.G if sys.tight_pair else self._translates(sys.gamma, shifts, step).T
        ks = np.array(list(itertools.product(*[range(P) for P in n_mod])), dtype=float) * beta
        self.E = np.exp(2j * np.pi * t @ ks.T)  # (N^d, P^d)
        self.count = (len(shifts), len(ks))

    def _translates(self, win: Window, shifts: np.ndarray, step) -> np.ndarray:
        spec = self.spec
        if isinstance(win, SampledWindow) and win.gf.spec == spec:
            out = []
            for sh in shifts:
                m = tuple(int(np.rint(s / spec.h)) for s in sh)
                out.append(np.roll(win.gf.values, m, axis=tuple(range(spec.n))).reshape(-1))
            return np.array(out)
        t = spec.points().reshape(-1, spec.n)
        L = 2 * spec.R
        out = []
        for sh in shifts:
            y = np.mod(t - sh + spec.R, L) - spec.R
            vals = np.zeros(len(t), dtype=complex)
            for images in itertools.product((-1, 0, 1), repeat=spec.n):
                vals += win(y + L * np.asarray(images))
            out.append(vals)
        return np.array(out)

    def apply(self, u: GridFunction) -> GridFunction:
        uv = u.values.reshape(-1)
        hd = self.spec.h**self.spec.n
        coef = hd * (self.E.conj().T @ (np.conj(self.G) * uv[:, None]))  # (P^d, #shifts)
        out = np.sum(self.Gam * (self.E @ coef), axis=1)
        return GridFunction(self.spec, out.reshape(self.spec.shape))

    def matrix(self) -> np.ndarray:
        hd = self.spec.h**self.spec.n
        return hd * (self.Gam @ self.G.conj().T) * (self.E @ self.E.conj().T)

    def synthesis_with(self, dual: np.ndarray):
        """Reconstruction operator f -> sum (f, pi g) pi dual for a grid window ``dual``."""
        spec = self.spec
        dual_grid = GridFunction(spec, dual.reshape(spec.shape))
        n_shift = self.G.shape[1]
        shifts = np.array(list(itertools.product(*[range(int(round(2 * spec.R / a))) for a in self.alpha])), dtype=float) * self.alpha
        D = np.array([np.roll(dual_grid.values, tuple(int(np.rint(s / spec.h)) for s in sh), axis=tuple(range(spec.n))).reshape(-1) for sh in shifts]).T
        assert D.shape[1] == n_shift
        hd = spec.h**spec.n

        def rec(f: np.ndarray) -> np.ndarray:
            coef = hd * (self.E.conj().T @ (np.conj(self.G) * f[:, None]))
            return np.sum(D * (self.E @ coef), axis=1)

        return rec


# --------------------------------------------------------------------------- Janssen form


def janssen_apply(sys: GaborSystem, u: GridFunction, samples: StftSamples, boundary: str = "zero") -> GridFunction:
    """(1/|det L|) sum_kappa V_g gamma(J L^{-T} kappa) pi(J L^{-T} kappa) u over the sampled kappas.

    Terms whose coefficient is exactly zero are skipped before any alignment check.
    """
    if samples.lattice is not sys.lattice and not np.allclose(samples.lattice.matrix, sys.lattice.matrix):
        raise ValueError("samples were computed for a different lattice")
    out = np.zeros(u.spec.shape, dtype=complex)
    for z, c in zip(samples.points, samples.values):
        if c == 0:
            continue
        out += c * tf_shift(u, z, boundary).values
    return GridFunction(u.spec, out / sys.lattice.abs_det)


# --------------------------------------------------------------------------- symbol bridge


def rank_one_symbol(sys: GaborSystem):
    """q(x, w) = exp(-2 pi i x.w) gamma(x) conj(g_hat(w)) as a callable on points of R^{2d}."""
    d = sys.d
    g_hat = sys.g.fourier()

    def q(z):
        z = np.asarray(z, dtype=float)
        x, w = z[..., :d], z[..., d:]
        return np.exp(-2j * np.pi * np.sum(x * w, axis=-1)) * sys.gamma(x) * np.conj(g_hat(w))

    return q


def symbol_fourier(q, points, spec: GridSpec) -> np.ndarray:
    """q_hat(zeta) = int q(y) exp(-2 pi i zeta.y) dy by quadrature over the grid ``spec`` of R^{2d}."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    y = spec.points().reshape(-1, spec.n)
    qy = q(y)
    out = np.empty(len(pts), dtype=complex)
    for i, zeta in enumerate(pts):
        out[i] = np.sum(qy * np.exp(-2j * np.pi * (y @ zeta)))
    return out * spec.h**spec.n


def equivalence_check(sys: GaborSystem, u: GridFunction) -> float:
    """Relative gap between the Kohn-Nirenberg form of the periodized symbol and the direct series."""
    nu = u.norm()
    if nu == 0:
        return 0.0
    p = periodic_symbol(rank_one_symbol(sys), sys.lattice, sys.K)
    a = apply_kn(p, u)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", TruncationWarning)
        b = gabor_apply_direct(sys, u, mode="l1")
    return float(np.linalg.norm(a.values - b.values) * u.spec.h ** (u.spec.n / 2) / nu)
