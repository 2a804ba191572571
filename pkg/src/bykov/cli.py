"""Command-line front end.

Usage::

    bykov SUBCOMMAND [--config FILE] [--out DIR] [--force] [--key=value ...]

Configuration is a flat ``key = value`` file (``#`` starts a comment);
``--key=value`` arguments override it. Unknown keys are errors. Numeric
values may be simple expressions over ``pi``, ``e``, ``log``, ``exp`` and
``sqrt`` (for example ``K_omega = 4*pi/log(2)``).

Exit codes: 0 success, 2 configuration or validation error, 3 numerical
failure.
"""
from __future__ import annotations

import argparse
import ast
import hashlib
import json
import math
import operator
import shutil
import sys
import time
from dataclasses import dataclass
from importlib import metadata
from pathlib import Path

import numpy as np

from . import hopf as hopf_mod
from .attractors import (
    MapFamily,
    Stability,
    detect_homoclinic,
    find_periodic,
    graph_transform,
    lyapunov_spectrum,
    rotation_number,
    scan_rows,
    seed_grid,
    tongue_boundary,
)
from .attractors.circle import invariance_residual
from .attractors.scan import max_workers
from .maps import DomainEscape, ReturnMap
from .model import ModelParams, derive_constants, params_for, validate
from .regimes import annulus_band, classify, curve_f, curve_g

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3

CSV_SCHEMA = "1"


class ConfigError(ValueError):
    """Bad configuration; maps to exit code 2."""


@dataclass(frozen=True)
class Key:
    kind: type
    default: object
    help: str


_MODEL_KEYS = {
    "C1": Key(float, 1.1, "contracting rate at O1"),
    "E1": Key(float, 0.9, "expanding rate at O1"),
    "omega1": Key(float, 1.0, "spin at O1"),
    "C2": Key(float, 1.1, "contracting rate at O2"),
    "E2": Key(float, 0.9, "expanding rate at O2"),
    "omega2": Key(float, 1.0, "spin at O2"),
    "delta": Key(float, None, "with K_omega: build symmetric saddles instead of C/E/omega"),
    "K_omega": Key(float, None, "with delta: build symmetric saddles instead of C/E/omega"),
    "A": Key(float, 0.01, "offset of the one-dimensional connection"),
    "lam": Key(float, None, "splitting amplitude (default 0.002 unless a is given)"),
    "a": Key(float, None, "ratio lam/A; sets lam = a*A"),
}

KEYS: dict[str, Key] = {
    **_MODEL_KEYS,
    # sweep
    "grid_rows": Key(str, "A", "row parameter of the sweep grid: A or K_omega"),
    "row_min": Key(float, 0.005, "first row value"),
    "row_max": Key(float, 0.02, "last row value"),
    "n_rows": Key(int, 20, "number of rows"),
    "a_min": Key(float, 0.1, "first column value of a"),
    "a_max": Key(float, 0.55, "last column value of a"),
    "n_a": Key(int, 40, "number of a columns"),
    "n_orbit": Key(int, 200_000, "recorded iterates per orbit"),
    "transient": Key(int, 10_000, "discarded iterates per orbit"),
    "n_seeds": Key(int, 1, "orbits per sweep cell"),
    "seed": Key(int, 0, "PRNG seed"),
    "workers": Key(int, 0, "worker processes (0: BYKOV_THREADS or CPU count)"),
    # circle / lyapunov
    "N": Key(int, 1024, "graph-transform nodes (power of two)"),
    "tol": Key(float, 1e-12, "graph-transform tolerance"),
    "max_iter": Key(int, 500, "graph-transform iteration cap"),
    "n_rot": Key(int, 1_000_000, "iterates for the rotation number"),
    "x0": Key(float, 0.0, "initial angle for lyapunov"),
    "y0": Key(float, None, "initial height for lyapunov (default: band midline)"),
    # tongue / manifolds
    "k": Key(int, 1, "period"),
    "winding": Key(int, None, "turns per period (required by tongue and manifolds)"),
    "a_tol": Key(float, 1e-6, "bisection tolerance in a"),
    "orbit": Key(str, "saddle", "orbit type to anchor manifolds: saddle or sink"),
    "max_arclength": Key(float, 20.0, "manifold arclength budget per branch"),
    "spacing": Key(float, 0.01, "maximal manifold point spacing"),
    # hopf
    "mu1": Key(float, 0.0, "unfolding parameter mu1"),
    "mu2": Key(float, 1.0, "unfolding parameter mu2"),
    "a_h": Key(float, 1.0, "normal-form coefficient a"),
    "c": Key(float, 0.0, "cubic coefficient c"),
    "d": Key(float, 0.0, "cubic coefficient d"),
    "e": Key(float, 0.0, "cubic coefficient e"),
    "f": Key(float, 0.0, "cubic coefficient f"),
    "order": Key(int, 2, "normal-form order: 2 or 3"),
    "r0": Key(float, 0.5, "initial radius"),
    "z0": Key(float, 0.0, "initial height"),
    "t_end": Key(float, 10.0, "integration time"),
    "h": Key(float, 1e-3, "RK4 step"),
}

_FUNCS = {"log": math.log, "exp": math.exp, "sqrt": math.sqrt}
_CONSTS = {"pi": math.pi, "e": math.e}
_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul,
           ast.Div: operator.truediv, ast.Pow: operator.pow}


def _eval_number(text: str) -> float:
    """Evaluate a small arithmetic expression without ``eval``."""

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id in _CONSTS:
            return _CONSTS[node.id]
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1 and not node.keywords):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError("unsupported expression")

    return ev(ast.parse(text.strip(), mode="eval"))


def _convert(name: str, raw: str):
    kind = KEYS[name].kind
    try:
        if kind is str:
            return raw.strip()
        if kind is int:
            v = _eval_number(raw)
            if v != int(v):
                raise ValueError
            return int(v)
        return _eval_number(raw)
    except (ValueError, SyntaxError, ZeroDivisionError, OverflowError):
        raise ConfigError(f"invalid value for {name}: {raw!r}") from None


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    """Raw ``key -> value`` strings from a flat config file."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        out[key] = val
    return out


def resolve_config(raw: dict[str, str]) -> dict:
    """Typed configuration with defaults filled in."""
    for key in raw:
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}")
    cfg = {k: spec.default for k, spec in KEYS.items()}
    for k, v in raw.items():
        cfg[k] = _convert(k, v)
    cfg["_explicit"] = frozenset(raw)
    return cfg


def model_params(cfg: dict) -> ModelParams:
    explicit = cfg["_explicit"]
    A = cfg["A"]
    if cfg["a"] is not None:
        if "lam" in explicit:
            raise ConfigError("give either lam or a, not both")
        if A == 0:
            raise ConfigError("a = lam/A requested but A = 0: division by zero")
        lam = cfg["a"] * A
    else:
        lam = 0.002 if cfg["lam"] is None else cfg["lam"]
    if (cfg["delta"] is None) != (cfg["K_omega"] is None):
        raise ConfigError("delta and K_omega must be given together")
    if cfg["delta"] is not None:
        clash = explicit & {"C1", "E1", "omega1", "C2", "E2", "omega2"}
        if clash:
            raise ConfigError(f"delta/K_omega conflict with explicit {sorted(clash)}")
        try:
            return params_for(cfg["delta"], cfg["K_omega"], A, lam)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return ModelParams(cfg["C1"], cfg["E1"], cfg["omega1"], cfg["C2"], cfg["E2"],
                       cfg["omega2"], A, lam)


def checked_params(cfg: dict) -> ModelParams:
    p = model_params(cfg)
    v = validate(p)
    if not v.ok:
        raise ConfigError("parameter hypotheses violated: " + "; ".join(v.violations))
    return p


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def csv_text(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def pgm_text(pixels: np.ndarray) -> str:
    h, w = pixels.shape
    body = "\n".join(" ".join(str(int(v)) for v in row) for row in pixels)
    return f"P2\n{w} {h}\n255\n{body}\n"


class Output:
    """Collects files in memory; writes them and the manifest at the end."""

    def __init__(self, directory: str | None, force: bool):
        self.dir = Path(directory) if directory else None
        self.force = force
        self.files: dict[str, str] = {}
        if self.dir is not None and self.dir.exists() and not force:
            raise ConfigError(f"output directory {self.dir} exists (use --force)")

    def add(self, name: str, text: str):
        self.files[name] = text

    def commit(self, cfg: dict, started: float, seed: int | None = None):
        if self.dir is None:
            return
        if self.dir.exists():
            if not self.dir.is_dir():
                raise ConfigError(f"{self.dir} is not a directory")
            shutil.rmtree(self.dir)
        self.dir.mkdir(parents=True)
        sums = {}
        for name, text in self.files.items():
            data = text.encode()
            (self.dir / name).write_bytes(data)
            sums[name] = hashlib.sha256(data).hexdigest()
        manifest = {
            "tool": "bykov",
            "version": _version(),
            "csv_schema": CSV_SCHEMA,
            "config": {k: v for k, v in sorted(cfg.items()) if not k.startswith("_")},
            "seed": seed,
            "started_unix": started,
            "wall_seconds": time.time() - started,
            "files": sums,
        }
        (self.dir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def _workers(cfg) -> int:
    w = cfg["workers"]
    if w < 0:
        raise ConfigError("workers must be non-negative")
    cap = max_workers()
    return cap if w == 0 else min(w, cap)


def cmd_constants(cfg, out: Output):
    p = model_params(cfg)
    v = validate(p)
    if not v.ok:
        raise ConfigError("parameter hypotheses violated: " + "; ".join(v.violations))
    dc = derive_constants(p)
    a = dc.a if p.A > 0 else math.nan
    names = ["delta1", "delta2", "delta", "K", "K_omega", "a", "g", "f"]
    vals = [dc.delta1, dc.delta2, dc.delta, dc.K, dc.K_omega, a,
            curve_g(dc.K_omega), curve_f(dc.K_omega)]
    for n, v_ in zip(names, vals):
        print(f"{n:>8} = {fmt(v_)}")
    out.add("constants.csv", csv_text(names, [vals]))


def cmd_classify(cfg, out: Output):
    p = checked_params(cfg)
    if not p.A > 0:
        raise ConfigError("classification needs A > 0")
    rep = classify(p)
    print(f"a = {rep.a:.6g}, g(K_omega) = {rep.torus_threshold:.6g}, "
          f"f(K_omega) = {rep.chaos_threshold:.6g}: {rep.classification.value}")
    out.add("classify.csv", csv_text(
        ["K_omega", "a", "torus_threshold", "chaos_threshold", "classification"],
        [[rep.K_omega, rep.a, rep.torus_threshold, rep.chaos_threshold,
          rep.classification.value]]))


_GRAY = {("StrangeCandidate", None): 0, ("Escaped", None): 64,
         ("Regular", "Horseshoe"): 128, ("Regular", "Transition"): 192,
         ("Regular", "Torus"): 255}


def _gray(cls: str, regime: str) -> int:
    return _GRAY.get((cls, None), _GRAY.get((cls, regime), 255))


def cmd_sweep(cfg, out: Output):
    if cfg["n_rows"] < 1 or cfg["n_a"] < 1:
        raise ConfigError("sweep grid is empty (n_rows and n_a must be positive)")
    if cfg["grid_rows"] == "K_omega" and cfg["delta"] is not None and cfg["K_omega"] is None:
        # the rows supply K_omega; any placeholder passes validation
        cfg = {**cfg, "K_omega": cfg["row_min"]}
    p = checked_params(cfg)
    dc = derive_constants(p)
    rows_kind = cfg["grid_rows"]
    row_vals = np.linspace(cfg["row_min"], cfg["row_max"], cfg["n_rows"])
    a_vals = np.linspace(cfg["a_min"], cfg["a_max"], cfg["n_a"])
    if np.any(a_vals < 0) or np.any(a_vals >= 1):
        raise ConfigError("a grid must lie in [0, 1)")
    if rows_kind == "A":
        if np.any(row_vals <= 0):
            raise ConfigError("A grid must be positive")
        fam = MapFamily(dc.delta, dc.K_omega)
        rows = [(fam, float(A)) for A in row_vals]
    elif rows_kind == "K_omega":
        if np.any(row_vals <= 0) or not p.A > 0:
            raise ConfigError("K_omega grid and A must be positive")
        rows = [(MapFamily(dc.delta, float(K)), p.A) for K in row_vals]
    else:
        raise ConfigError("grid_rows must be A or K_omega")
    table = scan_rows(rows, a_vals, cfg["n_orbit"], cfg["transient"], cfg["seed"],
                      cfg["n_seeds"], _workers(cfg), row_values=row_vals, row_name=rows_kind)
    header = [rows_kind, "a", "regime", "class", "lam_max", "lam_sum", "escape_fraction"]
    recs = [(rv, a, reg, cls, l1, ls, ef) for rv, a, l1, ls, ef, cls, reg in table.rows()]
    pix = np.array([[_gray(table.cls[i][j].value, table.regime[i][j])
                     for j in range(table.shape[1])] for i in range(table.shape[0])])
    out.add("sweep.csv", csv_text(header, recs))
    out.add("sweep.pgm", pgm_text(pix))
    print(f"{table.lam_max.size} cells, strange-candidate fraction {table.strange_fraction:.4f}")
    return table.seed


def _return_map(cfg) -> ReturnMap:
    p = checked_params(cfg)
    if not p.A > 0:
        raise ConfigError("this subcommand needs A > 0")
    return ReturnMap.from_params(p)


def cmd_circle(cfg, out: Output):
    m = _return_map(cfg)
    if not m.a < 1:
        raise ConfigError("the annulus band needs a < 1")
    band = annulus_band(m.consts, m.A, m.lam)
    c = graph_transform(m, band, cfg["N"], cfg["tol"], cfg["max_iter"])
    rot = rotation_number(m, c, cfg["n_rot"])
    res = invariance_residual(m, c.heights)
    print(f"converged in {c.iterations} iterations; residual {res:.3e}; "
          f"rotation number {rot.rho:.12f} (converged: {rot.converged})")
    out.add("circle.csv", csv_text(["x", "h", "residual"],
                                   [(x, h, res) for x, h in zip(c.nodes, c.heights)]))
    out.add("rotation.csv", csv_text(["rho", "rho_mod1", "converged", "n"],
                                     [(rot.rho, rot.frac, rot.converged, rot.n)]))


def cmd_lyapunov(cfg, out: Output):
    m = _return_map(cfg)
    y0 = cfg["y0"]
    if y0 is None:
        y0 = 0.5 * ((m.A - m.lam) ** m.delta + 2.0 * (m.A + m.lam) ** m.delta)
    est = lyapunov_spectrum(m, (cfg["x0"], y0), cfg["n_orbit"], cfg["transient"])
    if est.escaped:
        print("orbit escaped", file=sys.stderr)
        raise ArithmeticError("orbit left the sheet u > 0")
    print(f"lam_max = {est.lam_max:.10g}, lam_sum = {est.lam_sum:.10g}")
    out.add("lyapunov.csv", csv_text(["lam_max", "lam_min", "lam_sum", "mean_log_det", "n"],
                                     [(est.lam_max, est.lam_min, est.lam_sum,
                                       est.mean_log_det, est.n)]))


def _need_winding(cfg) -> int:
    if cfg["winding"] is None:
        raise ConfigError("winding is required")
    return cfg["winding"]


def cmd_tongue(cfg, out: Output):
    p = model_params(cfg)
    dc = derive_constants(p)
    w = _need_winding(cfg)
    if cfg["n_rows"] < 0:
        raise ConfigError("n_rows must be non-negative")
    A_vals = np.linspace(cfg["row_min"], cfg["row_max"], cfg["n_rows"])
    try:
        tb = tongue_boundary(MapFamily(dc.delta, dc.K_omega), cfg["k"], w,
                             (cfg["a_min"], cfg["a_max"]), A_vals, a_tol=cfg["a_tol"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = [(c.A, c.status, math.nan if c.a_boundary is None else c.a_boundary)
            for c in tb.columns]
    out.add("tongue.csv", csv_text(["A", "status", "a_boundary"], rows))
    print(f"{sum(c.status == 'boundary' for c in tb.columns)} boundary points")


def cmd_manifolds(cfg, out: Output):
    m = _return_map(cfg)
    w = _need_winding(cfg)
    want = {"saddle": Stability.SADDLE, "sink": Stability.SINK}.get(cfg["orbit"])
    if want is None:
        raise ConfigError("orbit must be saddle or sink")
    orbits = [o for o in find_periodic(m, cfg["k"], seed_grid(m), winding=w)
              if o.stability is want]
    if not orbits:
        raise ConfigError(f"no {cfg['orbit']} orbit of period {cfg['k']} and winding {w}")
    orb = orbits[0]
    try:
        rep = detect_homoclinic(m, orb, cfg["max_arclength"], cfg["spacing"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    rows = []
    for curve in (rep.unstable, rep.stable):
        for bi, b in enumerate(curve.branches):
            rows.extend((curve.side.value, bi, x, y) for x, y in zip(b.xs, b.ys))
    out.add("manifolds.csv", csv_text(["side", "branch", "x", "y"], rows))
    out.add("homoclinic.csv", csv_text(["min_distance", "n_crossings", "tangency"],
                                       [(rep.min_distance, rep.n_crossings, rep.tangency_flag)]))
    print(f"{rep.n_crossings} crossings, min distance {rep.min_distance:.3e}")


def cmd_hopf(cfg, out: Output):
    try:
        hp = hopf_mod.HopfParams(cfg["mu1"], cfg["mu2"], cfg["a_h"], cfg["c"], cfg["d"],
                                 cfg["e"], cfg["f"])
        field = hopf_mod.HopfField(hp, cfg["order"])
        if cfg["r0"] < 0:
            raise ValueError("r0 must be non-negative")
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    tr = hopf_mod.integrate(field, (cfg["r0"], cfg["z0"]), (0.0, cfg["t_end"]), cfg["h"])
    G = np.array([hopf_mod.first_integral_G((r, z), hp) for r, z in zip(tr.r, tr.z)])
    drift = float(np.max(np.abs(G - G[0])))
    print(f"max |dG| = {drift:.3e}")
    out.add("hopf.csv", csv_text(["t", "r", "z", "G"], zip(tr.t, tr.r, tr.z, G)))


COMMANDS = {
    "constants": cmd_constants,
    "classify": cmd_classify,
    "sweep": cmd_sweep,
    "circle": cmd_circle,
    "lyapunov": cmd_lyapunov,
    "tongue": cmd_tongue,
    "manifolds": cmd_manifolds,
    "hopf": cmd_hopf,
}

_NEEDS_OUT = {"sweep", "circle", "lyapunov", "tongue", "manifolds", "hopf"}


def _key_help() -> str:
    lines = ["configuration keys (default):"]
    for k, spec in KEYS.items():
        lines.append(f"  {k:<14} {spec.help} ({spec.default})")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bykov", description=__doc__.split("\n\n")[0],
                                 epilog=_key_help(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", help="key=value configuration file")
    ap.add_argument("--out", help="output directory (must not exist)")
    ap.add_argument("--force", action="store_true", help="replace an existing output directory")
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    known, extra = ap.parse_known_args(argv)
    started = time.time()
    try:
        raw = {}
        if known.config:
            try:
                text = Path(known.config).read_text()
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from None
            raw.update(parse_config_text(text, known.config))
        for item in extra:
            if not item.startswith("--") or "=" not in item:
                raise ConfigError(f"override must look like --key=value, got {item!r}")
            key, val = item[2:].split("=", 1)
            if key not in KEYS:
                raise ConfigError(f"unknown key {key!r}")
            raw[key] = val
        cfg = resolve_config(raw)
        if known.command in _NEEDS_OUT and not known.out:
            raise ConfigError(f"{known.command} needs --out DIR")
        out = Output(known.out, known.force)
        seed = COMMANDS[known.command](cfg, out)
        out.commit(cfg, started, seed)
    except ValueError as exc:
        # ConfigError and precondition failures of the numerical layer
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ArithmeticError, DomainEscape, hopf_mod.OrbitLost, hopf_mod.StepFailure) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
