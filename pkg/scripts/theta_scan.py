"""Scan square meshes theta and record certificate and oracle bounds for the Gaussian.

    python3 scripts/theta_scan.py --out theta_scan.csv
"""
import argparse
import csv
import sys
from dataclasses import dataclass

from gaborcert import GaborSystem, GridSpec, assemble, certify, diag_lattice, extremal_eigs, gaussian
from gaborcert.verify import DENSE_LIMIT, suggest_grid


@dataclass
class ScanConfig:
    thetas: tuple = (0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 1.0)
    method: str = "lattice-sum"
    grid_R: float = 8.0
    grid_N: int = 512
    out: str | None = None


def run(cfg: ScanConfig):
    g = gaussian()
    rows = []
    for th in cfg.thetas:
        lat = diag_lattice(th, th)
        cert, _ = certify(g, lat, method=cfg.method)
        row = {"theta": th, "status": cert.status, "nonzero_bound": cert.nonzero_bound, "A": cert.A, "B": cert.B}
        grid = suggest_grid(th, th, cfg.grid_R, cfg.grid_N, max_N=DENSE_LIMIT)
        row["grid"] = f"R={grid[0]:g} N={grid[1]}" if grid else "none"
        if grid:
            S = assemble(GaborSystem(g, g, lat), GridSpec(1, *grid))
            row["lambda_min"], row["lambda_max"] = extremal_eigs(S, method="dense")
        else:
            row["lambda_min"] = row["lambda_max"] = None
        rows.append(row)
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--method", default=ScanConfig.method)
    p.add_argument("--out")
    args = p.parse_args(argv)
    rows = run(ScanConfig(method=args.method, out=args.out))
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    w = csv.DictWriter(fh, fieldnames=list(rows[0]))
    w.writeheader()
    w.writerows(rows)
    if args.out:
        fh.close()


if __name__ == "__main__":
    main()
