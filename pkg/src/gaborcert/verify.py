"""Brute-force oracle: the frame operator as a matrix on a periodic grid, its extremal
eigenvalues, a soundness verdict for certificates, and the canonical dual window.

The operator acts on the torus [-R, R)^d. Commensurate diagonal lattices are assembled
from the direct frame sum (one period of translations, one alias period of modulations),
which is exactly the frame operator of the periodized system. Otherwise the Janssen sum
is used; it needs every dual translation with a nonzero coefficient to be grid aligned.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import GridTooLarge, MisalignedShift
from .gabor_op import GaborSystem, TorusFrame
from .linalg import conjugate_gradient, power_extremal_eigs
from .stft import stft_on_dual_lattice
from .tf_core import GridFunction, GridSpec

DENSE_LIMIT = 4096


@dataclass(eq=False)
class FrameOperatorMatrix:
    spec: GridSpec
    method: str  # "direct" or "janssen"
    K: int
    apply: object  # callable on flat vectors
    dense: np.ndarray | None
    frame: TorusFrame | None = None

    @property
    def size(self) -> int:
        return self.spec.size

    def matrix(self) -> np.ndarray:
        if self.dense is None:
            raise GridTooLarge(f"N^d = {self.size} exceeds the dense limit {DENSE_LIMIT}")
        return self.dense

    def hermitian_defect(self) -> float:
        M = self.matrix()
        scale = max(np.max(np.abs(M)), 1e-300)
        return float(np.max(np.abs(M - M.conj().T)) / scale)


def _janssen_terms(sys: GaborSystem, grid: GridSpec, K: int):
    samples = stft_on_dual_lattice(sys.gamma, sys.g, sys.lattice, K, grid)
    terms = []
    d = grid.n
    for z, c in zip(samples.points, samples.values):
        if c == 0:
            continue
        m = grid.index_of(z[:d])  # raises MisalignedShift
        terms.append((c / sys.lattice.abs_det, tuple(int(v) for v in m), z[d:]))
    return terms


def _janssen_operator(terms, grid: GridSpec):
    pts = grid.points().reshape(-1, grid.n)
    phases = [np.exp(2j * np.pi * pts @ w) for _, _, w in terms]
    axes = tuple(range(grid.n))

    def apply(v):
        v = np.asarray(v)
        batch = v.shape[1:] if v.ndim > 1 else ()
        vv = v.reshape(grid.shape + batch)
        out = np.zeros(pts.shape[0:1] + batch, dtype=complex)
        for (c, m, _), ph in zip(terms, phases):
            shifted = np.roll(vv, m, axis=axes).reshape(pts.shape[0:1] + batch)
            out += c * (ph.reshape((-1,) + (1,) * len(batch)) * shifted)
        return out

    return apply


def assemble(sys: GaborSystem, grid: GridSpec, K: int | None = None, method: str = "auto") -> FrameOperatorMatrix:
    """Frame operator on the periodic grid; dense when N^d <= 4096."""
    K = sys.K if K is None else K
    dense_ok = grid.size <= DENSE_LIMIT
    if method in ("auto", "direct"):
        try:
            tf = TorusFrame(sys, grid)
            M = tf.matrix() if dense_ok else None
            apply = (lambda v: M @ v) if M is not None else (lambda v: tf.apply(GridFunction(grid, v.reshape(grid.shape))).values.reshape(-1))
            return FrameOperatorMatrix(grid, "direct", K, apply, M, tf)
        except MisalignedShift:
            if method == "direct":
                raise
    terms = _janssen_terms(sys, grid, K)
    apply = _janssen_operator(terms, grid)
    M = apply(np.eye(grid.size, dtype=complex)) if dense_ok else None
    return FrameOperatorMatrix(grid, "janssen", K, apply, M)


def extremal_eigs(S, method: str = "power", tol: float = 1e-10, max_iter: int = 200000):
    """(lambda_min, lambda_max) of a Hermitian frame operator.

    ``method="power"`` runs power iteration and a spectral shift; ``method="dense"``
    uses a full Hermitian eigendecomposition of the assembled matrix.
    """
    if isinstance(S, FrameOperatorMatrix):
        n, apply, dense = S.size, S.apply, S.dense
    else:
        dense = np.asarray(S)
        n, apply = dense.shape[0], (lambda v: dense @ v)
    if method == "dense":
        if dense is None:
            raise GridTooLarge("dense eigenvalues need an assembled matrix")
        ev = np.linalg.eigvalsh(0.5 * (dense + dense.conj().T))
        return float(ev[0]), float(ev[-1])
    return power_extremal_eigs(apply, n, tol=tol, max_iter=max_iter)


@dataclass(frozen=True)
class Verdict:
    sound: bool
    applicable: bool
    A: float | None
    B: float | None
    lam_min: float
    lam_max: float
    tol: float

    def as_dict(self) -> dict:
        return {"sound": self.sound, "applicable": self.applicable, "A": self.A, "B": self.B,
                "lambda_min": self.lam_min, "lambda_max": self.lam_max, "tol": self.tol}


def verify_certificate(cert, eigs, tol: float = 1e-3) -> Verdict:
    """Sound iff A <= lambda_min (1 + tol) and lambda_max <= B (1 + tol)."""
    lam_min, lam_max = eigs
    if not cert.frame:
        return Verdict(True, False, None, None, lam_min, lam_max, tol)
    ok = cert.A <= lam_min * (1 + tol) and lam_max <= cert.B * (1 + tol)
    return Verdict(bool(ok), True, cert.A, cert.B, lam_min, lam_max, tol)


def dual_window(S: FrameOperatorMatrix, g: GridFunction, tol: float = 1e-8):
    """Canonical dual S^{-1} g by conjugate gradient; returns (dual, residual, iterations)."""
    x, res, it = conjugate_gradient(S.apply, g.values.reshape(-1).astype(complex), tol=tol)
    return GridFunction(g.spec, x.reshape(g.spec.shape)), res, it


def reconstruction_error(S: FrameOperatorMatrix, dual: GridFunction, f: GridFunction) -> float:
    """Relative error of f -> sum (f, pi g) pi dual over the torus lattice of a direct assembly."""
    if S.frame is None:
        raise MisalignedShift("reconstruction needs a direct (commensurate) assembly")
    rec = S.frame.synthesis_with(dual.values.reshape(-1))
    fv = f.values.reshape(-1).astype(complex)
    nf = np.linalg.norm(fv)
    return float(np.linalg.norm(rec(fv) - fv) / nf) if nf > 0 else 0.0


def _is_int(val: float) -> bool:
    return round(val) >= 1 and abs(val - round(val)) <= 1e-9 * max(1.0, abs(val))


def suggest_grid(alpha, beta, R: float, N: int, max_N: int = 16384):
    """Smallest (R', N') with R' >= R and N' >= N for which the torus assembly of
    diag(alpha, beta) is exact, or None. R' is tried in steps of max(alpha)/2 up to 4R."""
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    beta = np.atleast_1d(np.asarray(beta, dtype=float))
    step = float(np.max(alpha)) / 2
    R0 = math.ceil(R / step - 1e-9) * step
    best = None
    for k in range(int(3 * R / step) + 8):
        Rc = R0 + k * step
        if not all(_is_int(2 * Rc / a) for a in alpha):
            continue
        # alpha / h integer means N is a multiple of 2R/alpha
        base = math.lcm(*(round(2 * Rc / a) for a in alpha))
        Nc = base * max(1, math.ceil(N / base))
        while Nc <= max_N:
            h = 2 * Rc / Nc
            if all(_is_int(1 / (b * h)) and Nc % round(1 / (b * h)) == 0 for b in beta):
                if best is None or Nc < best[1]:
                    best = (Rc, Nc)
                break
            Nc += base
    return best
