"""Truncated Poisson summation residuals for Gaussians on a few lattices.

    python3 scripts/poisson_table.py --K 10
"""
import argparse
from dataclasses import dataclass

import numpy as np

from gaborcert.periodize import poisson_sides
from gaborcert.tf_core import make_lattice


@dataclass
class PoissonConfig:
    K: int = 10
    lattices: tuple = (((1.0,),), ((2.0,),), ((0.5,),), ((1.0, 0.2), (0.1, 1.0)))


def gauss(z):
    return np.exp(-np.pi * np.sum(np.asarray(z) ** 2, axis=-1))


def run(cfg: PoissonConfig):
    for L in cfg.lattices:
        lat = make_lattice(np.array(L))
        x = np.full(lat.n, 0.3)
        for K in range(1, cfg.K + 1):
            lhs, rhs = poisson_sides(gauss, gauss, lat, x, K)
            yield L, K, lhs.real, rhs.real, abs(lhs - rhs)


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--K", type=int, default=PoissonConfig.K)
    args = p.parse_args(argv)
    for L, K, lhs, rhs, res in run(PoissonConfig(K=args.K)):
        print(f"L={L!s:28s} K={K:3d} lhs={lhs:.15f} rhs={rhs:.15f} residual={res:.2e}")


if __name__ == "__main__":
    main()
