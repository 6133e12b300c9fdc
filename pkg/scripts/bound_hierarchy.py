"""Compare the three bounds on the nonzero lattice series with the directly summed series.

    python3 scripts/bound_hierarchy.py
"""
import argparse
from dataclasses import dataclass

from gaborcert.cert import default_truncation, series_bound, sigma_gabor
from gaborcert.decay import decay_constants
from gaborcert.stft import stft_on_dual_lattice
from gaborcert.tf_core import GridSpec, PolyWeight, diag_lattice
from gaborcert.windows import gaussian, hermite

METHODS = ("closed-form-binomial", "diagonal-refined", "lattice-sum")


@dataclass
class HierarchyConfig:
    thetas: tuple = (0.125, 0.25, 0.5)
    windows: tuple = ("gaussian", "hermite1")
    direct_K: int = 40


def window(name):
    return gaussian() if name == "gaussian" else hermite(int(name[-1]))


def run(cfg: HierarchyConfig):
    quad = GridSpec(1, 8.0, 512)
    w = PolyWeight(0.0, 2)
    for name in cfg.windows:
        g = window(name)
        c = decay_constants(g, 1.0, quad)
        for th in cfg.thetas:
            lat = diag_lattice(th, th)
            vals = [series_bound(g, g, lat, w, m, default_truncation(m, lat), quad, (c, c)).nonzero for m in METHODS]
            samples = stft_on_dual_lattice(g, g, lat, cfg.direct_K, quad)
            direct = sigma_gabor(samples, w) - abs(samples.zero_value())
            yield name, th, vals, direct


def main(argv=None):
    argparse.ArgumentParser(description=__doc__.splitlines()[0]).parse_args(argv)
    print(f"{'window':10s} {'theta':>7s} " + " ".join(f"{m:>22s}" for m in METHODS) + f" {'direct':>12s}")
    for name, th, vals, direct in run(HierarchyConfig()):
        print(f"{name:10s} {th:7.4f} " + " ".join(f"{v:22.6g}" for v in vals) + f" {direct:12.4g}")


if __name__ == "__main__":
    main()
