"""Decay constants of windows, the STFT envelope they imply, and rigorous envelope tails.

For a window f on R^d and epsilon > 0 the weighted sup norm is
||f||_eps = sup_x (1 + |x|)^(d + eps) |f(x)|. The constant K(f) is the largest such
norm over the family x^b d^a f, x^b d_j d^a f and x_j x^b d^a f (a, b in {0,1}^d).
Together with the same constant for the Fourier transform it bounds the STFT by

    |V_g gamma(x, w)| <= C_d K_sym(gamma) K_sym(g) (1+|x|)^(-(d+eps)/2) (1+|w|)^(-(d+eps)/2)
                         prod_j (1+|x_j|)^(-1/2-1/(2d)) (1+|w_j|)^(-1/2-1/(2d)),

with K_sym = sqrt(K(f) K(f_hat)) and C_d = 2^(2d+1) d^d (1 + 1/pi)^(d+1).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import MissingDerivatives, NonPositiveInner
from .tf_core import GridSpec, Lattice, symplectic
from .windows import SampledWindow, Window

REFINE_TOL = 0.005


def C_d(d: int) -> float:
    return 2.0 ** (2 * d + 1) * d**d * (1.0 + 1.0 / math.pi) ** (d + 1)


def product_exponent(d: int, eps: float) -> float:
    """Per-coordinate decay exponent 1 + (1 + eps)/(2d) of the product envelope."""
    return 1.0 + (1.0 + eps) / (2.0 * d)


# --------------------------------------------------------------------------- constants


def _family(d: int):
    """(monomial, derivative) multi-index pairs entering K(f)."""
    T = list(itertools.product((0, 1), repeat=d))
    out = set()
    for a in T:
        for b in T:
            out.add((b, a))
            for j in range(d):
                e = tuple(int(i == j) for i in range(d))
                out.add((b, tuple(x + y for x, y in zip(a, e))))
                out.add((tuple(x + y for x, y in zip(b, e)), a))
    return sorted(out)


def _h_family(d: int):
    T = list(itertools.product((0, 1), repeat=d))
    out = {((0,) * d, (0,) * d)}
    for a in T:
        for k in range(d):
            e = tuple(int(i == k) for i in range(d))
            out.add((tuple(x + y for x, y in zip(a, e)), (0,) * d))
    return sorted(out)


def _weighted_sup(f: Window, eps: float, spec: GridSpec) -> float:
    """sup (1+|x|)^(d+eps)|f| over the box: grid max, then two rounds of local refinement."""
    d = f.d
    if isinstance(f, SampledWindow):
        spec = f.gf.spec  # samples (and their transforms) live on their own grid
    pts = spec.points()
    vals = (1.0 + np.linalg.norm(pts, axis=-1)) ** (d + eps) * np.abs(f(pts))
    i = np.unravel_index(int(np.argmax(vals)), vals.shape)
    best = float(vals[i])
    if isinstance(f, SampledWindow) or best == 0.0:
        return best
    centre, half = pts[i], spec.h
    m = 33 if d == 1 else 9
    for _ in range(2):
        loc = np.linspace(-half, half, m)
        fine = centre + np.stack(np.meshgrid(*([loc] * d), indexing="ij"), -1)
        fv = (1.0 + np.linalg.norm(fine, axis=-1)) ** (d + eps) * np.abs(f(fine))
        j = np.unravel_index(int(np.argmax(fv)), fv.shape)
        best = max(best, float(fv[j]))
        centre, half = fine[j], 2.0 * half / (m - 1)
    return best


def _raw_constants(win: Window, eps: float, spec: GridSpec) -> dict:
    d = win.d
    out = {}
    for label, f in (("K", win), ("K_hat", win.fourier())):
        norms = {}
        for b, a in _family(d):
            norms[(b, a)] = _weighted_sup(f.deriv(a).times_monomial(b), eps, spec)
        out[label] = max(norms.values())
        out[label + "_terms"] = norms
    out["H"] = max(_weighted_sup(win.times_monomial(b), eps, spec) for b, _ in _h_family(d))
    out["sup_norm"] = _weighted_sup(win, eps, spec)
    return out


@dataclass(frozen=True)
class DecayConstants:
    epsilon: float
    d: int
    H: float
    K: float
    K_hat: float
    R: float
    N: int
    rigorous: bool
    refinement_change: float
    sup_norm: float = 0.0
    terms: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def K_sym(self) -> float:
        return math.sqrt(self.K * self.K_hat)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "H": self.H,
            "K": self.K,
            "K_hat": self.K_hat,
            "K_sym": self.K_sym,
            "sup_norm": self.sup_norm,
            "grid_R": self.R,
            "grid_N": self.N,
            "rigorous": self.rigorous,
            "refinement_change": self.refinement_change,
        }


def decay_constants(win: Window, epsilon: float, grid: GridSpec, require_rigor: bool = False) -> DecayConstants:
    """Decay constants of ``win`` on the box of ``grid``, checked against a doubled grid.

    The reported values come from the finer grid. They are rigorous only up to grid
    resolution; ``rigorous`` is False for sampled windows or when doubling N moves any
    constant by more than 0.5%.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if not win.rigorous:
        if require_rigor:
            raise MissingDerivatives(f"{win.name} has no exact derivatives")
        raw = _raw_constants(win, epsilon, grid)
        return DecayConstants(epsilon, win.d, raw["H"], raw["K"], raw["K_hat"], grid.R, grid.N, False, float("nan"), raw["sup_norm"], raw["K_terms"])
    coarse = _raw_constants(win, epsilon, grid)
    fine_grid = GridSpec(grid.n, grid.R, 2 * grid.N)
    fine = _raw_constants(win, epsilon, fine_grid)
    change = 0.0
    for key in ("H", "K", "K_hat"):
        if fine[key] > 0:
            change = max(change, abs(fine[key] - coarse[key]) / fine[key])
    return DecayConstants(
        epsilon, win.d, fine["H"], fine["K"], fine["K_hat"], grid.R, fine_grid.N,
        bool(change < REFINE_TOL), float(change), fine["sup_norm"], fine["K_terms"],
    )


# --------------------------------------------------------------------------- envelope


@dataclass(frozen=True)
class Envelope:
    """Pointwise bound on |V_g gamma| built from two sets of decay constants."""

    d: int
    epsilon: float
    constant: float  # C_d K_sym(gamma) K_sym(g)

    def __call__(self, x, w) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        w = np.asarray(w, dtype=float)
        d, eps = self.d, self.epsilon
        a = -(d + eps) / 2.0
        b = -0.5 - 1.0 / (2 * d)
        rx = (1.0 + np.linalg.norm(x, axis=-1)) ** a * np.prod((1.0 + np.abs(x)) ** b, axis=-1)
        rw = (1.0 + np.linalg.norm(w, axis=-1)) ** a * np.prod((1.0 + np.abs(w)) ** b, axis=-1)
        return self.constant * rx * rw

    def product(self, x, w) -> np.ndarray:
        """The weaker separable form C prod_j (1+|x_j|)^(-p) (1+|w_j|)^(-p), p = 1 + (1+eps)/(2d)."""
        p = product_exponent(self.d, self.epsilon)
        z = np.concatenate([np.asarray(x, dtype=float), np.asarray(w, dtype=float)], axis=-1)
        return self.constant * np.prod((1.0 + np.abs(z)) ** (-p), axis=-1)


def envelope_bound(consts_gamma: DecayConstants, consts_g: DecayConstants, d: int) -> Envelope:
    if consts_gamma.epsilon != consts_g.epsilon:
        raise ValueError("decay constants were computed for different epsilon")
    return Envelope(d, consts_g.epsilon, C_d(d) * consts_gamma.K_sym * consts_g.K_sym)


def series_closed_bound(K_sym_gamma: float, K_sym_g: float, d: int, epsilon: float, theta: float) -> float:
    """C_d [(1 + 4 d theta/(1+eps))^(2d) - 1] K_sym(gamma) K_sym(g), a bound on the kappa != 0 series."""
    return C_d(d) * ((1.0 + 4.0 * d * theta / (1.0 + epsilon)) ** (2 * d) - 1.0) * K_sym_gamma * K_sym_g


def theta_max(c0: float, K_sym_gamma: float, K_sym_g: float, d: int, epsilon: float, C: float = 1.0) -> float:
    """Largest mesh for which the closed-form bound still certifies invertibility."""
    if c0 <= 0:
        raise NonPositiveInner("theta threshold needs |(gamma, g)| > 0")
    ratio = c0 / (C_d(d) * K_sym_gamma * K_sym_g * C)
    return (1.0 + epsilon) / (4.0 * d) * ((ratio + 1.0) ** (1.0 / (2 * d)) - 1.0)


# --------------------------------------------------------------------------- tails


def _tail_integral(scale: float, q: float, start: float) -> float:
    """int_start^inf (1 + y/scale)^(-q) dy for q > 1."""
    return scale / (q - 1.0) * (1.0 + start / scale) ** (1.0 - q)


def tail_diagonal_box(env: Envelope, alpha, beta, box: int, s: float = 0.0) -> float:
    """Rigorous bound on sum over |h|_inf or |k|_inf > box of v |V| at (-k/beta, h/alpha).

    Uses the product envelope, v(z) <= prod_c (1+|z_c|)^s, and the 1-d comparison
    integral for each coordinate. Returns inf when the weighted envelope is not summable.
    """
    q = product_exponent(env.d, env.epsilon) - s
    if q <= 1.0:
        return math.inf
    n = np.arange(-box, box + 1)
    inner, total = 1.0, 1.0
    for scale in list(beta) + list(alpha):
        B = float(np.sum((1.0 + np.abs(n) / scale) ** (-q)))
        inner *= B
        total *= B + 2.0 * _tail_integral(scale, q, box)
    return env.constant * (total - inner)


def _axis_profile(r: np.ndarray, q: float, s: float, p: float) -> np.ndarray:
    """Upper bound of (1+|z|)^s (1+|z|)^-p style factors over the unit interval [r, r+1]."""
    near = np.where(r >= 0, r, -r - 1).astype(float)
    far = np.maximum(np.abs(r), np.abs(r + 1)).astype(float)
    return (1.0 + far) ** s * (1.0 + near) ** (-p)


def _axis_total(q: float, s: float, p: float, M: int = 64) -> float:
    """Upper bound of sum over all r in Z of the axis profile."""
    r = np.arange(-M, M)
    finite = float(np.sum(_axis_profile(r, q, s, p)))
    # for near >= M: (1+far)^s (1+near)^-p <= 2^s (1+near)^(s-p), two r per near value
    return finite + 2.0 * 2.0**s * _tail_integral(1.0, q, M - 1)


def _axis_interval(lo: int, hi: int, q, s, p) -> float:
    if hi < lo:
        return 0.0
    return float(np.sum(_axis_profile(np.arange(lo, hi + 1), q, s, p)))


def cube_envelope_sum(env: Envelope, s: float, n: int, inside=None, exclude=None) -> float:
    """Bound on sum of v(r) sup_{Q_r} E over cubes not in the box ``inside`` nor in ``exclude``.

    Boxes are lists of per-axis integer intervals (lo, hi) of cube indices, or None.
    """
    p = product_exponent(env.d, env.epsilon)
    q = p - s
    if q <= 1.0:
        return math.inf
    total = _axis_total(q, s, p) ** n

    def box_sum(box):
        if box is None:
            return 0.0
        out = 1.0
        for lo, hi in box:
            out *= _axis_interval(lo, hi, q, s, p)
        return out

    both = None
    if inside is not None and exclude is not None:
        both = [(max(a[0], b[0]), min(a[1], b[1])) for a, b in zip(inside, exclude)]
    val = total - box_sum(inside) - box_sum(exclude) + box_sum(both)
    return env.constant * max(val, 0.0)


def tail_l1_general(env: Envelope, lat: Lattice, K: int, count_bound: float, s: float = 0.0) -> float:
    """Rigorous bound on sum_{|kappa|_1 > K} v|V|(J L^{-T} kappa) for a general lattice.

    Points outside the l1 ball satisfy |z|_inf >= rho = (K+1)/(n ||M^{-1}||_inf) with
    M = J L^{-T}; every such point lies in a unit cube not contained in the open box
    |z|_inf < rho, and each cube holds at most ``count_bound`` points.
    """
    n = lat.n
    M = symplectic(lat.d) @ lat.inv_transpose
    norm_inv = float(np.max(np.sum(np.abs(np.linalg.inv(M)), axis=1)))
    rho = (K + 1) / (n * norm_inv)
    lo = int(math.floor(-rho)) + 1
    hi = int(math.ceil(rho)) - 2
    inside = [(lo, hi)] * n if hi >= lo else None
    return count_bound * cube_envelope_sum(env, s, n, inside=inside)
