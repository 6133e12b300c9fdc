"""Window functions with exact derivatives and Fourier transforms.

Analytic windows are tensor products of 1-d factors ``P(t) exp(-pi a t^2)`` with a
(complex) polynomial P. That family is closed under differentiation and under the
Fourier transform, so every quantity the certificates need is exact up to rounding.
Sampled windows live on a grid; their derivatives are finite differences and are
flagged as non-rigorous.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import hermite as herm

from .errors import MisalignedShift
from .tf_core import ALIGN_TOL, GridFunction, GridSpec, fourier

# exp(-x) underflows to exactly 0.0 in float64 once x exceeds about 745.13
_UNDERFLOW = 745.2


@dataclass(frozen=True, eq=False)
class PolyGauss1D:
    """t -> P(t) exp(-pi a t^2), coefficients in increasing degree."""

    coef: tuple
    a: float

    @property
    def poly(self) -> Polynomial:
        return Polynomial(np.asarray(self.coef, dtype=complex))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.poly(t) * np.exp(-np.pi * self.a * t * t)

    def deriv(self) -> "PolyGauss1D":
        P = self.poly
        Q = P.deriv() - Polynomial([0, 2 * np.pi * self.a]) * P
        return PolyGauss1D(tuple(_trim(Q.coef)), self.a)

    def fourier(self) -> "PolyGauss1D":
        # F[t f] = (i / 2pi) d/dw F[f], starting from F[exp(-pi a t^2)] = a^(-1/2) exp(-pi w^2 / a)
        b = 1.0 / self.a
        step = Polynomial([0, 2 * np.pi * b])
        term = Polynomial([self.a**-0.5 + 0j])
        out = Polynomial([0j])
        for m, c in enumerate(np.asarray(self.coef, dtype=complex)):
            if m:
                term = (term.deriv() - step * term) * (1j / (2 * np.pi))
            out = out + c * term
        return PolyGauss1D(tuple(_trim(out.coef)), b)

    def support_radius(self) -> float:
        """Beyond this |t| the float64 value is exactly zero."""
        return float(np.sqrt(_UNDERFLOW / (np.pi * self.a)))


def _trim(c):
    c = np.asarray(c, dtype=complex)
    nz = np.nonzero(np.abs(c) > 0)[0]
    return c[: nz[-1] + 1] if nz.size else np.zeros(1, dtype=complex)


class Window:
    """Common interface: evaluation at points of shape (..., d), derivatives, FT."""

    d: int
    rigorous: bool
    name: str

    def __call__(self, t) -> np.ndarray:
        raise NotImplementedError

    def deriv(self, alpha) -> "Window":
        raise NotImplementedError

    def fourier(self) -> "Window":
        raise NotImplementedError

    def support_radius(self) -> float:
        raise NotImplementedError

    def _as_points(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.d == 1 and (t.ndim == 0 or t.shape[-1] != 1):
            t = t[..., None]
        if t.shape[-1] != self.d:
            raise ValueError(f"expected points in R^{self.d}, got shape {t.shape}")
        return t


@dataclass(frozen=True, eq=False)
class AnalyticWindow(Window):
    factors: tuple
    name: str = "analytic"
    rigorous: bool = True

    @property
    def d(self) -> int:
        return len(self.factors)

    def __call__(self, t) -> np.ndarray:
        t = self._as_points(t)
        out = np.ones(t.shape[:-1], dtype=complex)
        for j, f in enumerate(self.factors):
            out = out * f(t[..., j])
        return out

    def deriv(self, alpha) -> "AnalyticWindow":
        alpha = tuple(int(a) for a in alpha)
        facs = []
        for f, a in zip(self.factors, alpha):
            for _ in range(a):
                f = f.deriv()
            facs.append(f)
        return AnalyticWindow(tuple(facs), f"d{alpha}({self.name})")

    def times_monomial(self, beta) -> "AnalyticWindow":
        """t^beta times the window."""
        facs = []
        for f, b in zip(self.factors, beta):
            P = f.poly * Polynomial([0, 1]) ** int(b)
            facs.append(PolyGauss1D(tuple(P.coef), f.a))
        return AnalyticWindow(tuple(facs), f"x^{tuple(beta)}({self.name})")

    def fourier(self) -> "AnalyticWindow":
        return AnalyticWindow(tuple(f.fourier() for f in self.factors), f"F({self.name})")

    def support_radius(self) -> float:
        return max(f.support_radius() for f in self.factors)


def gaussian(d: int = 1, a: float = 1.0) -> AnalyticWindow:
    """exp(-pi a |t|^2) on R^d."""
    if a <= 0:
        raise ValueError("Gaussian width parameter must be positive")
    return AnalyticWindow(tuple(PolyGauss1D((1.0 + 0j,), a) for _ in range(d)), f"gaussian(a={a:g})")


def hermite(n: int, d: int = 1, a: float = 1.0) -> AnalyticWindow:
    """Tensor power of H_n(sqrt(2 pi a) t) exp(-pi a t^2), a Fourier eigenfunction for a = 1."""
    c = np.zeros(n + 1)
    c[n] = 1.0
    p = herm.herm2poly(c)
    p = p * np.sqrt(2 * np.pi * a) ** np.arange(n + 1)
    return AnalyticWindow(tuple(PolyGauss1D(tuple(p.astype(complex)), a) for _ in range(d)), f"hermite(n={n},a={a:g})")


@dataclass(frozen=True, eq=False)
class SampledWindow(Window):
    """A window given by samples; zero outside its grid.

    Evaluation is exact lookup at grid-aligned points. Derivatives use repeated
    central differences and are therefore not rigorous.
    """

    gf: GridFunction
    name: str = "sampled"
    rigorous: bool = False

    @property
    def d(self) -> int:
        return self.gf.spec.n

    def __call__(self, t) -> np.ndarray:
        t = self._as_points(t)
        spec = self.gf.spec
        m = (t + spec.R) / spec.h
        mi = np.rint(m)
        if np.any(np.abs(m - mi) > ALIGN_TOL * np.maximum(1.0, np.abs(m))):
            raise MisalignedShift("sampled windows can only be evaluated on their grid")
        mi = mi.astype(np.int64)
        inside = np.all((mi >= 0) & (mi < spec.N), axis=-1)
        out = np.zeros(t.shape[:-1], dtype=complex)
        idx = tuple(mi[inside][:, j] for j in range(spec.n))
        out[inside] = self.gf.values[idx]
        return out

    def deriv(self, alpha) -> "SampledWindow":
        vals = self.gf.values.astype(complex)
        for ax, a in enumerate(alpha):
            for _ in range(int(a)):
                vals = np.gradient(vals, self.gf.spec.h, axis=ax)
        return SampledWindow(GridFunction(self.gf.spec, vals), f"d{tuple(alpha)}({self.name})")

    def times_monomial(self, beta) -> "SampledWindow":
        pts = self.gf.spec.points()
        mono = np.prod(pts ** np.asarray(beta), axis=-1)
        return SampledWindow(GridFunction(self.gf.spec, self.gf.values * mono), f"x^{tuple(beta)}({self.name})")

    def fourier(self) -> "SampledWindow":
        return SampledWindow(fourier(self.gf), f"F({self.name})")

    def support_radius(self) -> float:
        spec = self.gf.spec
        nz = np.argwhere(np.abs(self.gf.values) > 0)
        if nz.size == 0:
            return 0.0
        coords = -spec.R + spec.h * nz
        return float(np.max(np.abs(coords)) + spec.h)


def indicator(spec: GridSpec, lo: float = 0.0, hi: float = 1.0) -> SampledWindow:
    """Sampled indicator of the half-open cube [lo, hi)^n."""
    pts = spec.points()
    tol = 1e-9 * spec.h
    inside = np.all((pts >= lo - tol) & (pts < hi - tol), axis=-1)
    return SampledWindow(GridFunction(spec, inside.astype(complex)), f"chi[{lo:g},{hi:g})")


def grid_values(win: Window, spec: GridSpec) -> np.ndarray:
    return win(spec.points())
