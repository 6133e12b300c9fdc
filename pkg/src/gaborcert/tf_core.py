"""Lattices, weights, sampling grids, time-frequency shifts and the grid Fourier transform.

Conventions used throughout the package:

* Fourier transform ``F u(w) = int u(t) exp(-2 pi i w.t) dt``.
* Translation ``T_x u(t) = u(t - x)``, modulation ``M_w u(t) = exp(2 pi i w.t) u(t)``.
* Time-frequency shift ``pi(x, w) = M_w T_x``.
* Symplectic matrix ``J = [[0, -I], [I, 0]]`` so that ``J (x, w) = (-w, x)``.
"""
from __future__ import annotations

import itertools
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GridMismatch, MisalignedShift, SingularMatrix

ALIGN_TOL = 1e-9


# --------------------------------------------------------------------------- lattices


def symplectic(d: int) -> np.ndarray:
    """The 2d x 2d matrix J = [[0, -I], [I, 0]]."""
    J = np.zeros((2 * d, 2 * d))
    J[:d, d:] = -np.eye(d)
    J[d:, :d] = np.eye(d)
    return J


def _cofactor(A: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    if n == 1:
        return np.ones((1, 1))
    C = np.empty_like(A, dtype=float)
    for i in range(n):
        for j in range(n):
            minor = np.delete(np.delete(A, i, axis=0), j, axis=1)
            C[i, j] = (-1) ** (i + j) * np.linalg.det(minor)
    return C


@dataclass(frozen=True, eq=False)
class Lattice:
    """The lattice L Z^n generated by the columns of ``matrix``.

    For time-frequency work n = 2d and the first d coordinates are time.
    ``diagonal`` holds (alpha, beta) when L = diag(alpha, beta) with positive entries.
    """

    matrix: np.ndarray
    det: float
    inv_transpose: np.ndarray
    cofactor: np.ndarray
    diagonal: tuple | None = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def d(self) -> int:
        if self.n % 2:
            raise ValueError("time-frequency lattices need an even dimension")
        return self.n // 2

    @property
    def abs_det(self) -> float:
        return abs(self.det)

    @property
    def inverse(self) -> np.ndarray:
        return self.inv_transpose.T

    def points(self, kappas) -> np.ndarray:
        """Lattice points L kappa for an (M, n) array of integer vectors."""
        return np.asarray(kappas, dtype=float) @ self.matrix.T

    def dual_tf_points(self, kappas) -> np.ndarray:
        """Points J L^{-T} kappa where the Janssen coefficients live."""
        M = symplectic(self.d) @ self.inv_transpose
        return np.asarray(kappas, dtype=float) @ M.T

    def dual_tf_lattice(self) -> "Lattice":
        """The lattice J L^{-T} Z^{2d} as a Lattice object."""
        return make_lattice(symplectic(self.d) @ self.inv_transpose)


def make_lattice(A) -> Lattice:
    """Build a Lattice from a square matrix, rejecting (numerically) singular ones.

    >>> make_lattice(np.diag([0.5, 0.5])).det
    0.25
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("lattice matrix must be square")
    n = A.shape[0]
    det = float(np.linalg.det(A))
    scale = float(np.max(np.abs(A)))
    if scale == 0.0 or abs(det) < 1e-12 * scale**n:
        raise SingularMatrix(f"|det L| = {abs(det):.3e} is below the singularity threshold")
    inv_t = np.linalg.inv(A).T
    diag = None
    if n % 2 == 0 and np.count_nonzero(A - np.diag(np.diag(A))) == 0 and np.all(np.diag(A) > 0):
        diag = (tuple(np.diag(A)[: n // 2]), tuple(np.diag(A)[n // 2 :]))
    return Lattice(matrix=A, det=det, inv_transpose=inv_t, cofactor=_cofactor(A), diagonal=diag)


def diag_lattice(alpha, beta) -> Lattice:
    """The separable lattice alpha Z^d x beta Z^d."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    if alpha.shape != beta.shape:
        raise ValueError("alpha and beta must have the same length")
    return make_lattice(np.diag(np.concatenate([alpha, beta])))


def dual_point(lat: Lattice, kappa):
    """Return (L^{-T} kappa, J L^{-T} kappa)."""
    kappa = np.asarray(kappa, dtype=float)
    eta = lat.inv_transpose @ kappa
    return eta, symplectic(lat.d) @ eta


@lru_cache(maxsize=64)
def _l1_ball_cached(n: int, K: int) -> np.ndarray:
    rows = []
    for shell in range(K + 1):
        pts = [p for p in itertools.product(range(-shell, shell + 1), repeat=n) if sum(map(abs, p)) == shell]
        rows.extend(sorted(pts))
    return np.array(rows, dtype=np.int64).reshape(-1, n)


def l1_ball(n: int, K: int) -> np.ndarray:
    """All kappa in Z^n with |kappa|_1 <= K, ordered by shell then lexicographically."""
    if K < 0:
        return np.zeros((0, n), dtype=np.int64)
    return _l1_ball_cached(int(n), int(K)).copy()


# --------------------------------------------------------------------------- weights


@dataclass(frozen=True)
class PolyWeight:
    """Polynomial weight v(z) = (1 + |z|)^s on R^dim (Euclidean norm)."""

    s: float
    dim: int

    def __post_init__(self):
        if self.s < 0:
            raise ValueError("weight exponent must be non-negative")

    def __call__(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return (1.0 + np.linalg.norm(z, axis=-1)) ** self.s

    def unit_cube_max(self) -> float:
        return (1.0 + np.sqrt(self.dim)) ** self.s


def weight_eval(w: PolyWeight, z) -> np.ndarray:
    return w(z)


def unit_cube_max(w: PolyWeight) -> float:
    """M_v, the maximum of v over [0, 1]^dim, attained at the corner (1, ..., 1)."""
    return w.unit_cube_max()


# --------------------------------------------------------------------------- grids


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-R, R)^n with N points per axis: x_i = -R + i h, h = 2R/N."""

    n: int
    R: float
    N: int

    def __post_init__(self):
        if self.N < 2 or self.N % 2:
            raise ValueError("N must be an even integer >= 2")
        if self.R <= 0:
            raise ValueError("R must be positive")

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.N

    @property
    def shape(self) -> tuple:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    def axis(self) -> np.ndarray:
        return -self.R + self.h * np.arange(self.N)

    def points(self) -> np.ndarray:
        """Grid nodes as an array of shape (N, ..., N, n)."""
        ax = self.axis()
        mesh = np.meshgrid(*([ax] * self.n), indexing="ij")
        return np.stack(mesh, axis=-1)

    def dual(self) -> "GridSpec":
        """Frequency grid reached by ``fourier``: spacing 1/(2R), same N."""
        return GridSpec(self.n, self.N / (4.0 * self.R), self.N)

    def index_of(self, x) -> np.ndarray:
        """Integer offsets m with x = m h, raising MisalignedShift otherwise."""
        m = np.asarray(x, dtype=float) / self.h
        mi = np.rint(m)
        if np.any(np.abs(m - mi) > ALIGN_TOL * np.maximum(1.0, np.abs(m))):
            raise MisalignedShift(f"shift {x} is not a multiple of the grid step {self.h}")
        return mi.astype(np.int64)


@dataclass(frozen=True, eq=False)
class GridFunction:
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.spec.shape:
            raise GridMismatch(f"values of shape {self.values.shape} do not fit grid {self.spec.shape}")

    def norm(self) -> float:
        return float(self.spec.h ** (self.spec.n / 2) * np.linalg.norm(self.values))

    def inner(self, other: "GridFunction") -> complex:
        """Quadrature of u * conj(v)."""
        check_same_grid(self, other)
        return complex(self.spec.h**self.spec.n * np.vdot(other.values, self.values))

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.spec, np.asarray(values))


def check_same_grid(u: GridFunction, v: GridFunction):
    if u.spec != v.spec:
        raise GridMismatch(f"grids differ: {u.spec} vs {v.spec}")


def sample(f, spec: GridSpec) -> GridFunction:
    """Sample a callable f(points[..., n]) on the grid."""
    return GridFunction(spec, np.asarray(f(spec.points()), dtype=complex))


def _signs(N: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(N)
    return (-1.0) ** j, (-1.0) ** (j - N // 2)


def _apply_axes(values: np.ndarray, vec: np.ndarray) -> np.ndarray:
    out = values
    for ax in range(values.ndim):
        shape = [1] * values.ndim
        shape[ax] = -1
        out = out * vec.reshape(shape)
    return out


def fourier(u: GridFunction) -> GridFunction:
    """Riemann-sum Fourier transform onto the dual grid (exactly unitary on the grid).

    With x_j = -R + j h and w_k = (k - N/2)/(2R) the phase exp(-2 pi i x_j w_k) splits
    into (-1)^j (-1)^(k - N/2) exp(-2 pi i j k / N), so one FFT per axis suffices.
    """
    spec = u.spec
    s_in, s_out = _signs(spec.N)
    F = np.fft.fftn(_apply_axes(u.values, s_in))
    return GridFunction(spec.dual(), spec.h**spec.n * _apply_axes(F, s_out))


def inverse_fourier(U: GridFunction) -> GridFunction:
    """Inverse of ``fourier``; the input lives on a frequency grid."""
    fspec = U.spec
    tspec = GridSpec(fspec.n, fspec.N / (4.0 * fspec.R), fspec.N)
    s_in, s_out = _signs(fspec.N)
    u = np.fft.ifftn(_apply_axes(U.values, s_out)) * fspec.N**fspec.n
    return GridFunction(tspec, fspec.h**fspec.n * _apply_axes(u, s_in))


def translate(u: GridFunction, x, boundary: str = "periodic") -> GridFunction:
    """T_x u on the grid; x must be a multiple of the grid step.

    ``boundary="periodic"`` shifts circularly (exact on the torus of length 2R),
    ``boundary="zero"`` fills with zeros (functions supported inside the box).
    """
    spec = u.spec
    x = np.broadcast_to(np.asarray(x, dtype=float), (spec.n,))
    m = spec.index_of(x)
    vals = u.values
    if boundary == "periodic":
        out = np.roll(vals, tuple(int(v) for v in m), axis=tuple(range(spec.n)))
    elif boundary == "zero":
        out = np.zeros_like(vals)
        src, dst = [], []
        for mj in m:
            mj = int(mj)
            if abs(mj) >= spec.N:
                return GridFunction(spec, out)
            if mj >= 0:
                src.append(slice(0, spec.N - mj))
                dst.append(slice(mj, spec.N))
            else:
                src.append(slice(-mj, spec.N))
                dst.append(slice(0, spec.N + mj))
        out[tuple(dst)] = vals[tuple(src)]
    else:
        raise ValueError(f"unknown boundary mode {boundary!r}")
    return GridFunction(spec, out)


def modulate(u: GridFunction, w) -> GridFunction:
    spec = u.spec
    w = np.broadcast_to(np.asarray(w, dtype=float), (spec.n,))
    phase = np.exp(2j * np.pi * spec.points() @ w)
    return GridFunction(spec, u.values * phase)


def tf_shift(u: GridFunction, z, boundary: str = "periodic") -> GridFunction:
    """pi(z) u = M_w T_x u for z = (x, w); x must be grid aligned."""
    z = np.asarray(z, dtype=float)
    n = u.spec.n
    if z.shape != (2 * n,):
        raise ValueError(f"expected a point of R^{2 * n}, got shape {z.shape}")
    return modulate(translate(u, z[:n], boundary), z[n:])


# --------------------------------------------------------------------------- threads


def worker_count() -> int:
    """Number of worker threads, capped by GABOR_CERT_THREADS when set."""
    env = os.environ.get("GABOR_CERT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, min(8, os.cpu_count() or 1))


def parallel_map(fn, items) -> list:
    """Order-preserving map; results are deterministic regardless of thread count."""
    items = list(items)
    nw = worker_count()
    if nw == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nw) as ex:
        return list(ex.map(fn, items))


def cube_maxima(A: np.ndarray, sub: int) -> np.ndarray:
    """Per-unit-cube maxima from samples on a node lattice with ``sub`` steps per unit.

    ``A`` has (m * sub + 1) nodes along every axis covering m closed unit cubes; the
    result has m entries per axis, each the max over its cube's nodes (boundaries included).
    """
    out = np.asarray(A)
    for ax in range(out.ndim):
        out = np.moveaxis(out, ax, -1)
        m = (out.shape[-1] - 1) // sub
        blocks = out[..., : m * sub].reshape(out.shape[:-1] + (m, sub)).max(axis=-1)
        ends = out[..., sub :: sub][..., :m]
        out = np.moveaxis(np.maximum(blocks, ends), -1, ax)
    return out
