"""Check certificates against brute-force eigenvalues over random commensurate lattices.

    python3 scripts/oracle_soundness.py --trials 20 --seed 0
"""
import argparse
from dataclasses import dataclass

import numpy as np

from gaborcert import GaborSystem, GridSpec, assemble, certify, diag_lattice, extremal_eigs, gaussian, verify_certificate


@dataclass
class SoundnessConfig:
    trials: int = 20
    seed: int = 0
    grid_R: float = 8.0
    grid_N: int = 1024


def run(cfg: SoundnessConfig):
    rng = np.random.default_rng(cfg.seed)
    g = gaussian()
    grid = GridSpec(1, cfg.grid_R, cfg.grid_N)
    # alpha in {1/8, ..., 1}, beta in {1/8, 1/4, 1/2}: every pair is exact on this torus
    for _ in range(cfg.trials):
        alpha = rng.integers(1, 9) / 8
        beta = 1 / 2 ** rng.integers(1, 4)
        lat = diag_lattice(alpha, beta)
        cert, _ = certify(g, lat)
        eigs = extremal_eigs(assemble(GaborSystem(g, g, lat), grid), method="dense")
        yield alpha, beta, cert, verify_certificate(cert, eigs)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--trials", type=int, default=SoundnessConfig.trials)
    p.add_argument("--seed", type=int, default=SoundnessConfig.seed)
    args = p.parse_args(argv)
    unsound = 0
    for alpha, beta, cert, v in run(SoundnessConfig(args.trials, args.seed)):
        unsound += not v.sound
        bounds = f"[{cert.A:.5g}, {cert.B:.5g}]" if cert.frame else "inconclusive"
        print(f"alpha={alpha:.3f} beta={beta:.3f} cert={bounds:>24s} eigs=[{v.lam_min:.5g}, {v.lam_max:.5g}] sound={v.sound}")
    print(f"unsound certificates: {unsound}")
    return 1 if unsound else 0


if __name__ == "__main__":
    raise SystemExit(main())
