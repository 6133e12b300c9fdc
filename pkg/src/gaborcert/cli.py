"""Batch front end: config parsing, the certify pipeline and the auxiliary tables.

Exit codes: 0 certified (and oracle-sound when --verify), 1 inconclusive, 2 invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import cert as cert_mod
from .decay import C_d, decay_constants, theta_max
from .errors import ConfigError, GaborCertError, GridTooLarge, MisalignedShift
from .gabor_op import GaborSystem
from .lattice_count import C_Lv, count_report, random_gl
from .periodize import poisson_sides
from .stft import StftEngine, stft_grid
from .tf_core import GridFunction, GridSpec, Lattice, PolyWeight, diag_lattice, make_lattice
from .verify import assemble, dual_window, extremal_eigs, reconstruction_error, suggest_grid, verify_certificate
from .windows import SampledWindow, Window, gaussian, hermite, indicator

EXIT_OK, EXIT_INCONCLUSIVE, EXIT_INVALID = 0, 1, 2
QUAD_R, QUAD_N = 8.0, 512


@dataclass
class RunConfig:
    command: str = "certify"
    window: str = "gaussian"
    d: int = 1
    alpha: list | None = None
    beta: list | None = None
    matrix: list | None = None
    weight_s: float = 0.0
    epsilon: float = 1.0
    C: float = 1.0
    trunc_K: int | None = None
    grid_R: float = 8.0
    grid_N: int | None = None
    method: str = "lattice-sum"
    verify: bool = False
    seed: int = 0
    trials: int = 100
    x: list | None = None
    out: str | None = None
    format: str = "json"
    timings: bool = False

    def as_dict(self) -> dict:
        return asdict(self)


# --------------------------------------------------------------------------- parsing


_EXPR = re.compile(r"^[0-9eE+\-*/(). ]*$")


def _number(text, theta0=None) -> float:
    """A float, a fraction like '1/2', or an expression in theta0 like 'theta0/2'."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip()
    if "theta0" in s:
        if theta0 is None:
            raise ConfigError(f"{s!r} needs theta0, which is undefined here")
        s = s.replace("theta0", repr(float(theta0())))
    if not s or not _EXPR.match(s):
        raise ConfigError(f"cannot parse number {text!r}")
    try:
        val = float(eval(s, {"__builtins__": {}}, {}))  # arithmetic on digits only
    except Exception as exc:
        raise ConfigError(f"cannot parse number {text!r}") from exc
    if not math.isfinite(val):
        raise ConfigError(f"non-finite number {text!r}")
    return val


def _list(value) -> list | None:
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return list(value)
    return [v for v in str(value).split(",") if v.strip()]


def _matrix(value) -> list | None:
    if value is None:
        return None
    if isinstance(value, (list, tuple)):
        return [list(r) if isinstance(r, (list, tuple)) else [r] for r in value]
    return [[v for v in row.split(",")] for row in str(value).split(";")]


def parse_window(spec_text: str, d: int, grid: GridSpec) -> Window:
    """'gaussian[:a=..]', 'hermite:n=..[,a=..]', 'chi' or 'file:path' (.npy or text samples on ``grid``)."""
    name, _, rest = spec_text.partition(":")
    name = name.strip().lower()
    if name == "file":
        path = rest
        vals = np.load(path) if path.endswith(".npy") else np.loadtxt(path, dtype=complex)
        vals = np.asarray(vals, dtype=complex).reshape(-1)
        if vals.size != grid.size:
            raise ConfigError(f"{path} holds {vals.size} samples but the grid has {grid.size}")
        return SampledWindow(GridFunction(grid, vals.reshape(grid.shape)), f"file:{path}")
    params = {}
    for item in filter(None, (p.strip() for p in rest.split(","))):
        key, eq, val = item.partition("=")
        if not eq:
            raise ConfigError(f"window parameter {item!r} is not key=value")
        params[key.strip()] = val.strip()
    try:
        if name in ("gaussian", "gauss"):
            return gaussian(d, float(params.get("a", 1.0)))
        if name == "hermite":
            return hermite(int(params.get("n", 0)), d, float(params.get("a", 1.0)))
        if name in ("chi", "indicator"):
            return indicator(grid, float(params.get("lo", 0.0)), float(params.get("hi", 1.0)))
    except ValueError as exc:
        raise ConfigError(f"bad window parameters in {spec_text!r}: {exc}") from exc
    raise ConfigError(f"unknown window family {name!r} (gaussian, hermite, chi, file)")


def load_config_file(path: str) -> dict:
    with open(path) as fh:
        text = fh.read()
    if path.endswith((".yaml", ".yml")):
        import yaml

        data = yaml.safe_load(text)
    else:
        data = json.loads(text)
    if not isinstance(data, dict):
        raise ConfigError(f"{path} does not hold a mapping")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    return data


def build_config(args: argparse.Namespace) -> RunConfig:
    data = {"command": args.command}
    if args.config:
        data.update(load_config_file(args.config))
        data["command"] = args.command
    for f in fields(RunConfig):
        val = getattr(args, f.name, None)
        if f.name != "command" and val is not None and val is not False:
            data[f.name] = val
    cfg = RunConfig(**data)
    cfg.alpha, cfg.beta, cfg.x = _list(cfg.alpha), _list(cfg.beta), _list(cfg.x)
    cfg.matrix = _matrix(cfg.matrix)
    if cfg.format not in ("json", "csv"):
        raise ConfigError("--format must be json or csv")
    if cfg.method not in cert_mod.METHODS and cfg.method not in cert_mod.METHOD_ALIASES:
        raise ConfigError(f"--method must be one of lattice-sum, binomial, diag-refined (got {cfg.method!r})")
    if cfg.d < 1:
        raise ConfigError("dimension must be positive")
    if cfg.grid_R <= 0 or (cfg.grid_N is not None and cfg.grid_N < 2):
        raise ConfigError("grid needs R > 0 and N >= 2")
    if cfg.epsilon <= 0:
        raise ConfigError("epsilon must be positive")
    return cfg


# --------------------------------------------------------------------------- pipeline pieces


@dataclass
class Context:
    cfg: RunConfig
    quad: GridSpec
    grid: GridSpec
    window: Window
    lattice: Lattice | None = None
    theta0: float | None = None
    extra: dict = field(default_factory=dict)


def _verify_grid(cfg: RunConfig) -> GridSpec:
    N = cfg.grid_N if cfg.grid_N is not None else (1024 if cfg.d == 1 else 32)
    return GridSpec(cfg.d, float(cfg.grid_R), int(N))


def _theta0(ctx: Context) -> float:
    if ctx.theta0 is None:
        win = ctx.window
        consts = decay_constants(win, ctx.cfg.epsilon, ctx.quad)
        c0 = abs(StftEngine(win, win, ctx.quad).values(np.zeros((1, 2 * win.d)))[0])
        ctx.theta0 = theta_max(c0, consts.K_sym, consts.K_sym, win.d, ctx.cfg.epsilon, ctx.cfg.C)
    return ctx.theta0


def make_context(cfg: RunConfig, need_lattice: bool = True) -> Context:
    grid = _verify_grid(cfg)
    win_grid = grid if cfg.window.startswith(("chi", "indicator", "file")) else GridSpec(cfg.d, QUAD_R, QUAD_N)
    window = parse_window(cfg.window, cfg.d, win_grid)
    quad = win_grid if isinstance(window, SampledWindow) else GridSpec(cfg.d, QUAD_R, QUAD_N)
    ctx = Context(cfg, quad, grid, window)
    if need_lattice:
        ctx.lattice = resolve_lattice(ctx)
    return ctx


def resolve_lattice(ctx: Context) -> Lattice:
    cfg, d = ctx.cfg, ctx.cfg.d
    th0 = lambda: _theta0(ctx)  # noqa: E731
    if cfg.matrix is not None:
        rows = [[_number(v, th0) for v in row] for row in cfg.matrix]
        if len({len(r) for r in rows}) != 1 or len(rows) != len(rows[0]):
            raise ConfigError("--matrix must be square, rows separated by ';'")
        return make_lattice(np.array(rows))
    if cfg.alpha is None or cfg.beta is None:
        raise ConfigError("give --alpha and --beta, or --matrix")
    alpha = [_number(v, th0) for v in cfg.alpha]
    beta = [_number(v, th0) for v in cfg.beta]
    alpha = alpha * d if len(alpha) == 1 else alpha
    beta = beta * d if len(beta) == 1 else beta
    if len(alpha) != d or len(beta) != d:
        raise ConfigError(f"--alpha/--beta need 1 or {d} entries")
    if min(alpha + beta) <= 0:
        raise ConfigError("--alpha and --beta must be positive")
    return diag_lattice(alpha, beta)


def check_alignment(ctx: Context):
    """Reject a verification grid that cannot represent the frame operator exactly."""
    lat, grid = ctx.lattice, ctx.grid
    if lat.diagonal is None:
        return
    alpha, beta = (np.asarray(v) for v in lat.diagonal)
    h = grid.h

    def is_int(v):
        return round(v) >= 1 and abs(v - round(v)) <= 1e-9 * max(1.0, v)

    torus = all(is_int(2 * grid.R / a) and is_int(a / h) and is_int(1 / (b * h)) and grid.N % round(1 / (b * h)) == 0
                for a, b in zip(alpha, beta))
    # the Janssen form only needs the dual translations k/beta inside the window overlap
    reach = 2 * ctx.window.support_radius()
    janssen = all(1 / b > reach or is_int(1 / (b * h)) for b in beta)
    if torus or janssen:
        return
    hint = suggest_grid(alpha, beta, grid.R, grid.N)
    msg = f"grid (R={grid.R:g}, N={grid.N}) is not commensurate with the lattice"
    msg += f"; try --grid-R {hint[0]:g} --grid-N {hint[1]}" if hint else "; no compatible grid found nearby"
    raise ConfigError(msg)


def run_oracle(ctx: Context, certificate=None, recon: bool = True) -> dict:
    sys_ = GaborSystem(ctx.window, ctx.window, ctx.lattice)
    K = ctx.cfg.trunc_K if ctx.cfg.trunc_K is not None else 20
    S = assemble(sys_, ctx.grid, K)
    method = "dense" if S.dense is not None else "power"
    lam_min, lam_max = extremal_eigs(S, method=method)
    out = {"assembly": S.method, "grid_R": ctx.grid.R, "grid_N": ctx.grid.N, "eig_method": method,
           "lambda_min": lam_min, "lambda_max": lam_max}
    if S.dense is not None:
        out["hermitian_defect"] = S.hermitian_defect()
    if certificate is not None:
        out["verdict"] = verify_certificate(certificate, (lam_min, lam_max)).as_dict()
    if recon and S.frame is not None and lam_min > 0:
        g = GridFunction(ctx.grid, ctx.window(ctx.grid.points()))
        dual, res, it = dual_window(S, g)
        rng = np.random.default_rng(ctx.cfg.seed)
        errs = [reconstruction_error(S, dual, GridFunction(ctx.grid, rng.standard_normal(ctx.grid.shape)))
                for _ in range(10)]
        out["dual_window"] = {"cg_residual": res, "cg_iterations": it, "max_reconstruction_error": max(errs)}
    return out


# --------------------------------------------------------------------------- commands


def cmd_certify(cfg: RunConfig):
    ctx = make_context(cfg)
    if cfg.verify:
        check_alignment(ctx)
    timings = {} if cfg.timings else None
    clock = time.perf_counter()
    certificate, pieces = cert_mod.certify(ctx.window, ctx.lattice, weight_s=cfg.weight_s, epsilon=cfg.epsilon,
                                           C=cfg.C, method=cfg.method, K=cfg.trunc_K, quad=ctx.quad, timings=timings)
    report = {"config": cfg.as_dict(), "lattice": ctx.lattice.matrix.tolist(), **pieces,
              "certificate": certificate.as_dict()}
    code = EXIT_OK if certificate.frame else EXIT_INCONCLUSIVE
    if cfg.verify:
        if certificate.frame:
            try:
                oracle = run_oracle(ctx, certificate, recon=False)
            except (MisalignedShift, GridTooLarge) as exc:
                oracle = {"skipped": str(exc)}
            if "verdict" in oracle and not oracle["verdict"]["sound"]:
                code = EXIT_INCONCLUSIVE
            report["oracle"] = oracle
        else:
            report["oracle"] = {"skipped": "no frame certificate to verify"}
    if timings is not None:
        timings["total"] = time.perf_counter() - clock
    report["timings"] = timings
    return report, code, None


def cmd_verify(cfg: RunConfig):
    ctx = make_context(cfg)
    check_alignment(ctx)
    oracle = run_oracle(ctx)
    report = {"config": cfg.as_dict(), "lattice": ctx.lattice.matrix.tolist(), "oracle": oracle}
    ok = oracle["lambda_min"] > 0
    return report, EXIT_OK if ok else EXIT_INCONCLUSIVE, None


def cmd_poisson(cfg: RunConfig):
    ctx = make_context(cfg, need_lattice=cfg.matrix is not None or cfg.alpha is not None)
    d = cfg.d
    lat = ctx.lattice or make_lattice(np.eye(d))
    f = ctx.window
    f_hat = f.fourier()
    x = [float(v) for v in cfg.x] if cfg.x else [0.0] * lat.n
    Kmax = cfg.trunc_K if cfg.trunc_K is not None else 8
    rows = []
    for K in range(1, Kmax + 1):
        lhs, rhs = poisson_sides(f, f_hat, lat, x, K)
        rows.append({"K": K, "lhs": lhs.real, "rhs": rhs.real, "residual": abs(lhs - rhs)})
    report = {"config": cfg.as_dict(), "table": rows}
    return report, EXIT_OK, rows


def cmd_count(cfg: RunConfig):
    rows = []
    for i in range(cfg.trials):
        rng = np.random.default_rng(cfg.seed + i)
        lat = make_lattice(random_gl(rng, n=2 * cfg.d))
        r = rng.integers(-5, 6, size=2 * cfg.d)
        rep = count_report(lat, r, PolyWeight(cfg.weight_s, 2 * cfg.d))
        rows.append({"seed": cfg.seed + i, "r": " ".join(map(str, rep.r)), "count": rep.brute_count,
                     "bound": rep.bound, "C_Lv": rep.C_Lv, "ok": rep.ok})
    report = {"config": cfg.as_dict(), "table": rows, "all_ok": all(r["ok"] for r in rows)}
    return report, EXIT_OK if report["all_ok"] else EXIT_INCONCLUSIVE, rows


def cmd_stft(cfg: RunConfig):
    d = cfg.d
    N = cfg.grid_N if cfg.grid_N is not None else 64
    R = cfg.grid_R if cfg.grid_R != RunConfig.grid_R else 4.0
    spec = GridSpec(2 * d, float(R), int(N))
    window = parse_window(cfg.window, d, GridSpec(d, N / (4.0 * R), N))
    V = stft_grid(window, window, spec)
    pts = spec.points().reshape(-1, 2 * d)
    mags = np.abs(V.values).reshape(-1)
    names = [f"x{j}" for j in range(d)] + [f"w{j}" for j in range(d)]
    rows = [dict(zip(names + ["abs"], [*map(float, p), float(m)])) for p, m in zip(pts, mags)]
    report = {"config": cfg.as_dict(), "peak": float(mags.max()),
              "peak_at": [float(v) for v in pts[int(np.argmax(mags))]], "table": rows}
    return report, EXIT_OK, rows


def cmd_bounds(cfg: RunConfig):
    ctx = make_context(cfg, need_lattice=False)
    th0 = _theta0(ctx)
    report = {"config": cfg.as_dict(), "C_d": C_d(cfg.d), "theta0": th0}
    if cfg.alpha is not None or cfg.matrix is not None:
        lat = resolve_lattice(ctx)
        w = PolyWeight(cfg.weight_s, 2 * cfg.d)
        certificate, pieces = cert_mod.certify(ctx.window, lat, weight_s=cfg.weight_s, epsilon=cfg.epsilon, C=cfg.C,
                                               method=cfg.method, K=cfg.trunc_K, quad=ctx.quad)
        report.update({"lattice": lat.matrix.tolist(), "sigma": certificate.sigma,
                       "C_Lv": C_Lv(lat.dual_tf_lattice(), w), "constants": pieces["constants"]})
    return report, EXIT_OK, None


COMMANDS = {"certify": cmd_certify, "verify": cmd_verify, "poisson": cmd_poisson,
            "count": cmd_count, "stft": cmd_stft, "bounds": cmd_bounds}


# --------------------------------------------------------------------------- output


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}{k}.")
    elif isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        for i, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}{i}.")
    else:
        yield prefix[:-1], obj


def render(report: dict, rows, fmt: str) -> str:
    report = _jsonable(report)
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    if rows:
        rows = _jsonable(rows)
        writer.writerow(list(rows[0]))
        for r in rows:
            writer.writerow([r[k] for k in rows[0]])
    else:
        writer.writerow(["key", "value"])
        for k, v in _flatten(report):
            writer.writerow([k, json.dumps(v) if isinstance(v, list) else v])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gabor-cert", description="Certified frame bounds for Gabor systems.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON or YAML file with RunConfig fields")
        s.add_argument("--window", help="gaussian[:a=..] | hermite:n=..[,a=..] | chi | file:path")
        s.add_argument("--d", type=int, help="dimension")
        s.add_argument("--alpha", help="comma list; accepts fractions and theta0 expressions")
        s.add_argument("--beta", help="comma list; accepts fractions and theta0 expressions")
        s.add_argument("--matrix", help="lattice matrix, rows separated by ';'")
        s.add_argument("--weight-s", dest="weight_s", type=float)
        s.add_argument("--epsilon", type=float)
        s.add_argument("--C", dest="C", type=float, help="moderateness constant of the weight")
        s.add_argument("--trunc-K", dest="trunc_K", type=int)
        s.add_argument("--grid-R", dest="grid_R", type=float)
        s.add_argument("--grid-N", dest="grid_N", type=int)
        s.add_argument("--method", help="lattice-sum | binomial | diag-refined")
        s.add_argument("--verify", action="store_true", default=None)
        s.add_argument("--seed", type=int)
        s.add_argument("--trials", type=int)
        s.add_argument("--x", help="evaluation point for poisson, comma list")
        s.add_argument("--out")
        s.add_argument("--format", choices=("json", "csv"))
        s.add_argument("--timings", action="store_true", default=None)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    try:
        cfg = build_config(args)
        report, code, rows = COMMANDS[cfg.command](cfg)
    except (ConfigError, GaborCertError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = render(report, rows, cfg.format)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
