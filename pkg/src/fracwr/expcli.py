"""Config-driven experiments and the ``fracwr`` command line.

Config files are flat INI: a handful of sections with scalar or
comma-separated values. ``fracwr list-presets`` shows the shipped presets and
``fracwr reproduce <id>`` runs one of them.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import itertools
import json
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from . import bounds as bnd
from .dnwr import DecompositionSpec, default_guess, dnwr_iterate, monodomain_reference
from .nnwr import nnwr_iterate
from .solver1d import ProblemSpec
from .solver2d import Problem2D, Split2D, default_guess_2d, monodomain_2d, nnwr2d_iterate
from .timegrid import caputo_weights, default_grading, mesh_for_order

CSV_SCHEMA = "fracwr-history v1"
ALGORITHMS = ("dnwr", "nnwr", "nnwr2d")
THETA_POLICIES = ("optimal", "fixed", "sweep")


class ConfigError(ValueError):
    pass


# --- data catalogue -------------------------------------------------------------

def _sine(lo, hi):
    L = hi - lo
    return lambda x, t: np.sin(np.pi * (np.asarray(x) - lo) / L) + 0 * np.asarray(t)


def _parabola(lo, hi):
    L = hi - lo
    return lambda x: 4 * (np.asarray(x) - lo) * (hi - np.asarray(x)) / L**2


FORCING = {
    "zero": lambda lo, hi: (lambda x, t: 0 * np.asarray(x) * np.asarray(t)),
    "one": lambda lo, hi: (lambda x, t: 1 + 0 * np.asarray(x) * np.asarray(t)),
    "sine": _sine,
}
INITIAL = {
    "zero": lambda lo, hi: (lambda x: 0 * np.asarray(x, dtype=float)),
    "parabola": _parabola,
}
INITIAL_2D = {
    "zero": lambda L: (lambda x, y: 0 * np.asarray(x) * np.asarray(y)),
    "parabola-gauss": lambda L: (lambda x, y: 4 * x * (L - x) / L**2 * np.exp(-10 * np.asarray(y) ** 2)),
}


# --- configuration --------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    algorithm: str = "dnwr"
    two_nu: tuple = (0.5,)
    T: float = 1.0
    domain: tuple = (0.0, 2.0)
    forcing: str = "zero"
    u0: str = "zero"
    v0: str = "zero"
    y_range: tuple = (-5.0, 5.0)
    breakpoints: tuple = (0.0, 1.0, 2.0)
    kappa: tuple = (1.0, 1.0)
    dx: tuple = (0.01,)
    dy: float = 0.1
    theta_policy: str = "optimal"
    theta_values: tuple = ()
    M: int = 64
    grading: str = "default"
    k_max: int = 20
    tol: float = 1e-12
    guess: float = 1.0
    bound: bool = False
    workers: int = 1
    record_timing: bool = True
    note: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}")
        if self.theta_policy not in THETA_POLICIES:
            raise ConfigError(f"theta policy must be one of {THETA_POLICIES}")
        if self.theta_policy in ("fixed", "sweep") and not self.theta_values:
            raise ConfigError(f"theta policy {self.theta_policy!r} needs a nonempty value list")
        if self.theta_policy == "optimal" and self.algorithm == "nnwr2d":
            raise ConfigError("nnwr2d takes a fixed or swept theta")
        if not self.two_nu:
            raise ConfigError("two_nu list is empty")
        for a in self.two_nu:
            if not 0 < a < 2:
                raise ConfigError(f"2nu must lie in (0, 2), got {a}")
        table = INITIAL_2D if self.algorithm == "nnwr2d" else INITIAL
        for key, cat in (("forcing", FORCING), ("u0", table), ("v0", table)):
            if getattr(self, key) not in cat:
                raise ConfigError(f"unknown {key} {getattr(self, key)!r}; known: {sorted(cat)}")
        if self.algorithm != "nnwr2d":
            n = len(self.breakpoints) - 1
            if len(self.kappa) != n:
                raise ConfigError("need one kappa per subdomain")
            if len(self.dx) not in (1, n):
                raise ConfigError("dx must be a scalar or one value per subdomain")
            if self.breakpoints[0] != self.domain[0] or self.breakpoints[-1] != self.domain[1]:
                raise ConfigError("breakpoints must span the domain")
        elif len(self.breakpoints) != 3:
            raise ConfigError("nnwr2d uses exactly two strips")
        if self.grading != "default":
            float(self.grading)
        return self

    @property
    def cells(self) -> list:
        if self.theta_policy == "sweep":
            thetas = [(float(v),) for v in self.theta_values]
        elif self.theta_policy == "fixed":
            thetas = [tuple(float(v) for v in self.theta_values)]
        else:
            thetas = [None]
        return list(itertools.product(self.two_nu, thetas))


_SECTIONS = {
    "experiment": ("name", "algorithm", "workers", "record_timing", "note"),
    "problem": ("two_nu", "T", "domain", "forcing", "u0", "v0", "y_range"),
    "decomposition": ("breakpoints", "kappa", "dx", "dy"),
    "theta": ("theta_policy", "theta_values"),
    "mesh": ("M", "grading"),
    "run": ("k_max", "tol", "guess", "bound"),
}
_KEYS = {f.name: f for f in fields(ExperimentConfig)}


def _parse(name, raw: str):
    default = _KEYS[name].default
    raw = raw.strip()
    if isinstance(default, tuple):
        return tuple(float(v) for v in raw.split(",") if v.strip())
    if isinstance(default, bool):
        return raw.lower() in ("1", "true", "yes", "on")
    if isinstance(default, int):
        return int(raw)
    if isinstance(default, float):
        return float(raw)
    return raw


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    return str(value)


def config_from_ini(text: str, base: ExperimentConfig | None = None) -> ExperimentConfig:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    parser.read_string(text)
    updates = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown section [{section}]")
        for key, raw in parser[section].items():
            if key not in _SECTIONS[section]:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            updates[key] = _parse(key, raw)
    return replace(base or ExperimentConfig(), **updates).validate()


def config_to_ini(cfg: ExperimentConfig) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    for section, keys in _SECTIONS.items():
        parser[section] = {k: _fmt(getattr(cfg, k)) for k in keys}
    buf = io.StringIO()
    parser.write(buf)
    return buf.getvalue()


# --- presets ------------------------------------------------------------------------

THETA_GRID = tuple(round(0.1 * i, 1) for i in range(1, 10))


def theta_grid_around(center: float, step: float, n: int = 9) -> tuple:
    """``n`` points spaced by ``step`` inside (0, 1), containing ``center``."""
    lo = center - step * math.floor((center - 1e-9) / step)
    pts = [round(lo + step * j, 10) for j in range(n)]
    if pts[-1] > 1:
        raise ValueError("grid does not fit in (0, 1]")
    return tuple(pts)

_DNWR_BASE = ExperimentConfig(
    algorithm="dnwr", domain=(0.0, 2.0), forcing="sine", T=1.0, M=64, dx=(0.01,), k_max=20,
)
_NNWR_BASE = ExperimentConfig(
    algorithm="nnwr", domain=(0.0, 16.0), forcing="sine", u0="parabola", T=4.0, M=267,
    dx=(0.01,), k_max=20, breakpoints=(0.0, 3.2, 6.4, 9.6, 12.8, 16.0), kappa=(1.0,) * 5,
    note="M = 267 matches dt = 0.015 on T = 4",
)


def _table2(N: int) -> tuple:
    half = [1.0 / 4**i for i in range(N // 2)]
    return tuple(half + half[::-1])


def _presets() -> dict:
    p = {}
    p["dnwr-theta-sweep"] = replace(_DNWR_BASE, name="dnwr-theta-sweep", theta_policy="sweep", theta_values=THETA_GRID)
    p["dnwr-theta-sweep-equal"] = replace(p["dnwr-theta-sweep"], name="dnwr-theta-sweep-equal", two_nu=(0.5, 1.0, 1.5))
    for tag, bps in (("a-lt-b", (0.0, 0.5, 2.0)), ("a-gt-b", (0.0, 1.5, 2.0))):
        p[f"dnwr-theta-sweep-{tag}"] = replace(
            p["dnwr-theta-sweep"], name=f"dnwr-theta-sweep-{tag}", breakpoints=bps, two_nu=(0.5, 1.0, 1.5)
        )
    p["dnwr-theta-sweep-hetero"] = replace(
        p["dnwr-theta-sweep"], name="dnwr-theta-sweep-hetero", kappa=(1.0, 0.25), dx=(0.01, 0.005),
        two_nu=(0.5, 1.0, 1.5), theta_values=theta_grid_around(1 / 3, 0.1),
    )
    p["dnwr-nu-sweep-θ0.33"] = replace(
        _DNWR_BASE, name="dnwr-nu-sweep-θ0.33", kappa=(1.0, 0.25), dx=(0.01, 0.005),
        theta_policy="fixed", theta_values=(0.33,), two_nu=(0.5, 1.0, 1.5),
    )
    p["dnwr-three-symmetric"] = replace(
        _DNWR_BASE, name="dnwr-three-symmetric", domain=(0.0, 3.0), breakpoints=(0.0, 1.0, 2.0, 3.0),
        kappa=(1.0, 1.0, 1.0), dx=(0.005,), M=256, forcing="zero", theta_policy="fixed", theta_values=(0.5,),
        bound=True, k_max=8, note="error equation: zero data, unit-step guess",
    )
    p["dnwr-three-wave"] = replace(
        p["dnwr-three-symmetric"], name="dnwr-three-wave", two_nu=(1.5,), dx=(0.01,), M=128,
        theta_policy="optimal", theta_values=(),
    )
    p["dnwr-five"] = replace(
        _DNWR_BASE, name="dnwr-five", breakpoints=(0.0, 0.4, 0.8, 1.2, 1.6, 2.0), kappa=(1.0,) * 5,
    )
    p["nnwr-theta-sweep-equal"] = replace(
        _NNWR_BASE, name="nnwr-theta-sweep-equal", theta_policy="sweep", theta_values=theta_grid_around(0.25, 0.05),
        two_nu=(0.5, 1.5),
    )
    p["nnwr-five-subdomain"] = replace(
        p["nnwr-theta-sweep-equal"], name="nnwr-five-subdomain", breakpoints=(0.0, 3.5, 5.5, 10.0, 12.0, 16.0)
    )
    p["nnwr-kappa-hetero"] = replace(
        _NNWR_BASE, name="nnwr-kappa-hetero", breakpoints=(0.0, 3.5, 5.5, 10.0, 12.0, 16.0),
        kappa=(0.25, 1.0, 0.25, 4.0, 1.0), two_nu=(0.5, 1.5),
    )
    for N in (4, 8, 12):
        bps = tuple(16.0 * i / N for i in range(N + 1))
        p[f"nnwr-kappa-table2-N{N}"] = replace(
            _NNWR_BASE, name=f"nnwr-kappa-table2-N{N}", breakpoints=bps, kappa=_table2(N),
            two_nu=(0.5, 1.5), bound=True,
        )
    p["nnwr-two"] = replace(_NNWR_BASE, name="nnwr-two", breakpoints=(0.0, 6.0, 16.0), kappa=(1.0, 1.0))
    p["nnwr-eight"] = replace(_NNWR_BASE, name="nnwr-eight", breakpoints=tuple(2.0 * i for i in range(9)),
                              kappa=(1.0,) * 8)
    p["nnwr2d-bound-overlay"] = ExperimentConfig(
        name="nnwr2d-bound-overlay", algorithm="nnwr2d", two_nu=(0.5, 1.0, 1.5), T=1.0, domain=(0.0, 2.0),
        y_range=(-5.0, 5.0), breakpoints=(0.0, 0.5, 2.0), kappa=(1.0, 1.0), dx=(0.01,), dy=0.1,
        u0="parabola-gauss", theta_policy="fixed", theta_values=(0.25,), M=256, k_max=8, bound=True,
    )
    return p


PRESETS = _presets()
PRESET_ALIASES = {"dnwr-nu-sweep-theta0.33": "dnwr-nu-sweep-θ0.33"}


def get_preset(name: str) -> ExperimentConfig:
    key = PRESET_ALIASES.get(name, name)
    if key not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}")
    return PRESETS[key]


# --- building blocks for a cell -------------------------------------------------------------

def build_problem(cfg: ExperimentConfig, two_nu: float):
    """Problem, decomposition (or split) and mesh for one cell."""
    nu = two_nu / 2
    lo, hi = cfg.domain
    r = None if cfg.grading == "default" else float(cfg.grading)
    mesh = mesh_for_order(cfg.T, cfg.M, two_nu, r)
    if cfg.algorithm == "nnwr2d":
        L = hi - lo
        u0 = INITIAL_2D[cfg.u0](L)
        v0 = INITIAL_2D[cfg.v0](L)
        f1 = FORCING[cfg.forcing](lo, hi)
        prob = Problem2D(nu, L, cfg.y_range, cfg.kappa[0], forcing=lambda x, y, t: f1(x, t) + 0 * y,
                         u0=u0, v0=v0, T=cfg.T)
        split = Split2D(cfg.breakpoints[1] - lo, cfg.dx[0], cfg.dy)
        return prob, split, mesh
    decomp = DecompositionSpec(cfg.breakpoints, cfg.kappa, cfg.dx if len(cfg.dx) > 1 else cfg.dx[0])
    spec = ProblemSpec(
        nu, (lo, hi), kappa=decomp.kappa_function(), forcing=FORCING[cfg.forcing](lo, hi),
        u0=INITIAL[cfg.u0](lo, hi), v0=INITIAL[cfg.v0](lo, hi), T=cfg.T,
    )
    return spec, decomp, mesh


def bound_for(cfg: ExperimentConfig, two_nu: float, theta, K: int):
    """Matching theorem curve, or ``None`` when no theorem covers the setting."""
    nu = two_nu / 2
    lengths = tuple(np.diff(cfg.breakpoints))
    if cfg.algorithm == "nnwr2d":
        return bnd.nnwr_bound_2d(nu, lengths[0], lengths[1], cfg.T, cfg.kappa[0], K)
    if cfg.algorithm == "dnwr" and len(lengths) % 2 == 0:
        return None
    th = None if theta is None or len(theta) == 1 else theta
    if theta is not None and len(theta) == 1:
        th = (theta[0],) * (len(lengths) - 1)
    params = bnd.BoundParams(nu, cfg.T, lengths, cfg.kappa, th, K)
    if cfg.algorithm == "nnwr":
        return bnd.nnwr_bound_1d(params)
    if nu < 0.5:
        return bnd.dnwr_bound_subdiffusion(params)
    return bnd.dnwr_bound_wave(params)


@dataclass
class CellResult:
    two_nu: float
    theta: tuple | None
    path: str
    status: str
    iterations: int
    iterations_to_1e6: int | None
    errors: list = field(default_factory=list)
    bound: dict | None = None


def _label(theta) -> str:
    if theta is None:
        return "opt"
    return "-".join(f"{t:.4g}" for t in theta)


def _write_atomic(path: Path, text: str):
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-", suffix=path.suffix)
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def run_cell(cfg: ExperimentConfig, two_nu: float, theta, out_dir: Path, reference_cache: dict) -> CellResult:
    path = out_dir / f"{cfg.algorithm}_2nu{two_nu:g}_theta{_label(theta)}.csv"
    try:
        problem, decomp, mesh = build_problem(cfg, two_nu)
        weights = caputo_weights(mesh, two_nu)
        if cfg.algorithm == "nnwr2d":
            ref = reference_cache.get(two_nu)
            if ref is None:
                ref = reference_cache[two_nu] = monodomain_2d(problem, decomp, mesh, weights)[3]
            guess = default_guess_2d(problem, decomp, mesh, cfg.guess)
            hist = nnwr2d_iterate(problem, decomp, mesh, theta[0], guess, cfg.k_max, cfg.tol, ref, weights)
        else:
            ref = reference_cache.get(two_nu)
            if ref is None:
                ref = reference_cache[two_nu] = monodomain_reference(problem, decomp, mesh, weights)[2]
            d = decomp
            if theta is not None:
                d = decomp.with_theta(theta[0] if len(theta) == 1 else theta)
            guess = default_guess(problem, d, mesh, cfg.guess)
            run = dnwr_iterate if cfg.algorithm == "dnwr" else nnwr_iterate
            hist = run(problem, d, mesh, guess, cfg.k_max, cfg.tol, ref, weights)
    except Exception as exc:  # recorded per cell, the sweep continues
        return CellResult(two_nu, theta, str(path), f"failed: {exc}", 0, None)

    errors = [e for e in hist.errors]
    finite = [np.isfinite(e) for e in errors]
    status = "ok" if all(finite) and hist.stop_reason != "diverged" else "diverged"
    rows = [i for i, ok in enumerate(finite) if ok]
    curve = None
    bound_info = None
    if cfg.bound:
        try:
            curve = bound_for(cfg, two_nu, theta, len(errors))
        except ValueError as exc:
            bound_info = {"error": str(exc)}
        if curve is not None:
            bound_info = {"constants": _jsonable(curve.constants), "notes": curve.notes,
                          "valid_from": curve.valid_from}
    buf = io.StringIO()
    buf.write(f"# {CSV_SCHEMA}\n")
    if curve is not None:
        buf.write("# bound column = e_0 * B_k\n")
    w = csv.writer(buf, lineterminator="\n")
    header = ["k", "error", "update_norm", "wall_time"] + (["bound"] if curve is not None else [])
    w.writerow(header)
    e0 = errors[0] if errors else 0.0
    for k in rows:
        upd = repr(float(hist.update_norms[k - 1])) if k >= 1 else ""
        wt = hist.wall_times[k] if cfg.record_timing else 0.0
        row = [k, repr(float(errors[k])), upd, f"{wt:.6f}"]
        if curve is not None:
            row.append(repr(float(e0 * curve.values[k])) if k < len(curve.values) else "")
        w.writerow(row)
    _write_atomic(path, buf.getvalue())
    its = next((k for k, e in enumerate(errors) if e < 1e-6), None)
    return CellResult(two_nu, theta, str(path), status, hist.iterations, its, errors, bound_info)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    return obj


def run_experiment(cfg: ExperimentConfig, out_dir: str | Path) -> list[CellResult]:
    """Run every (2nu, theta) cell; writes CSVs, ``manifest.ini`` and ``manifest.json``."""
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    # the reference depends on 2nu only; cells sharing it are grouped per worker
    groups = {}
    for two_nu, theta in cfg.cells:
        groups.setdefault(two_nu, []).append(theta)

    def run_group(item):
        two_nu, thetas = item
        local: dict = {}
        return [run_cell(cfg, two_nu, th, out, local) for th in thetas]

    items = list(groups.items())
    if cfg.workers > 1:
        with ThreadPoolExecutor(cfg.workers) as pool:
            nested = list(pool.map(run_group, items))
    else:
        nested = [run_group(i) for i in items]
    results = [r for grp in nested for r in grp]
    _write_atomic(out / "manifest.ini", config_to_ini(cfg))
    manifest = {
        "schema": CSV_SCHEMA,
        "config": _jsonable(asdict(cfg)),
        "grading_used": {str(a): (default_grading(a) if cfg.grading == "default" else float(cfg.grading))
                         for a in cfg.two_nu},
        # file names only, so a rerun elsewhere reproduces the manifest byte for byte
        "cells": [_jsonable({k: (Path(v).name if k == "path" else v) for k, v in asdict(r).items() if k != "errors"})
                  for r in results],
    }
    _write_atomic(out / "manifest.json", json.dumps(manifest, indent=2, ensure_ascii=False) + "\n")
    return results


def reproduce(figure_id: str, out_dir: str | Path | None = None, **overrides) -> list[CellResult]:
    """Run a shipped preset. Unknown ids raise ``ConfigError`` listing the available ones."""
    cfg = replace(get_preset(figure_id), **overrides)
    return run_experiment(cfg, out_dir or Path("results") / cfg.name)


# --- kernel verification ------------------------------------------------------------------

def verify_kernels(quick: bool = False, stream=None) -> bool:
    """Compare quadrature norms with the closed-form lemma bounds; True when all hold."""
    from .laplace_lab import check_lemma, lemma_cases

    stream = stream or sys.stdout
    grid = dict(sub_alphas=(0.25, 0.5), wave_alphas=(0.75,), times=(1.0,)) if quick else {}
    ok = True
    for case in lemma_cases(**grid):
        row = check_lemma(*case)
        ok &= row.holds
        if not row.holds or not quick:
            print(f"{'ok  ' if row.holds else 'FAIL'} {row.name:7s} alpha={row.alpha:<5g} t={row.t:<4g} "
                  f"l={row.ls} norm={row.norm:.6g} bound={row.bound:.6g}", file=stream)
    return ok


# --- command line ------------------------------------------------------------------------

def _floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _add_run_flags(p: argparse.ArgumentParser):
    p.add_argument("--config", help="INI file; its values override flags")
    p.add_argument("--preset", help="start from a shipped preset")
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--two-nu", type=_floats)
    p.add_argument("--T", type=float)
    p.add_argument("--domain", type=_floats)
    p.add_argument("--breakpoints", type=_floats)
    p.add_argument("--kappa", type=_floats)
    p.add_argument("--dx", type=_floats)
    p.add_argument("--dy", type=float)
    p.add_argument("--forcing")
    p.add_argument("--u0")
    p.add_argument("--theta", type=_floats, help="fixed theta (one per interface or one for all)")
    p.add_argument("--theta-sweep", type=_floats, help="sweep grid")
    p.add_argument("--M", type=int)
    p.add_argument("--grading")
    p.add_argument("--k-max", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--guess", type=float)
    p.add_argument("--bound", action="store_true", default=None)
    p.add_argument("--workers", type=int)
    p.add_argument("--no-timing", action="store_true", help="write wall_time as 0 for byte-stable output")


def _config_from_args(args, algorithm: str | None) -> ExperimentConfig:
    cfg = get_preset(args.preset) if args.preset else ExperimentConfig()
    if algorithm:
        cfg = replace(cfg, algorithm=algorithm)
        if algorithm == "nnwr2d" and not args.preset:
            cfg = replace(PRESETS["nnwr2d-bound-overlay"], name="nnwr2d")
    upd = {}
    for key in ("T", "domain", "breakpoints", "kappa", "dx", "dy", "forcing", "u0", "M", "grading", "guess",
                "workers", "tol"):
        val = getattr(args, key, None)
        if val is not None:
            upd[key] = val
    if args.two_nu is not None:
        upd["two_nu"] = args.two_nu
    if args.k_max is not None:
        upd["k_max"] = args.k_max
    if args.bound:
        upd["bound"] = True
    if args.no_timing:
        upd["record_timing"] = False
    if args.theta_sweep:
        upd.update(theta_policy="sweep", theta_values=args.theta_sweep)
    elif args.theta:
        upd.update(theta_policy="fixed", theta_values=args.theta)
    if "domain" in upd and "breakpoints" not in upd:
        lo, hi = upd["domain"]
        upd["breakpoints"] = (lo, 0.5 * (lo + hi), hi)
        upd.setdefault("kappa", (1.0, 1.0))
    elif "breakpoints" in upd and "domain" not in upd:
        upd["domain"] = (upd["breakpoints"][0], upd["breakpoints"][-1])
    cfg = replace(cfg, **upd)
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from None
        cfg = config_from_ini(text, cfg)
    return cfg.validate()


def _report(results, stream=sys.stdout) -> int:
    failed = 0
    for r in results:
        its = "-" if r.iterations_to_1e6 is None else r.iterations_to_1e6
        print(f"2nu={r.two_nu:g} theta={_label(r.theta):>8s} status={r.status} iterations={r.iterations} "
              f"to_1e-6={its} -> {r.path}", file=stream)
        failed += r.status != "ok"
    return 0 if failed == 0 else 1


def _cmd_bounds(args) -> int:
    K = args.K
    kind = args.kind
    if kind == "nnwr-2d":
        curve = bnd.nnwr_bound_2d(args.nu, args.lengths[0], args.lengths[1], args.T, args.kappa[0], K)
    else:
        params = bnd.BoundParams(args.nu, args.T, args.lengths, args.kappa, None, K)
        fn = {
            "dnwr-sub": bnd.dnwr_bound_subdiffusion, "dnwr-wave": bnd.dnwr_bound_wave,
            "dnwr-2d": bnd.dnwr_bound_2d, "nnwr-1d": bnd.nnwr_bound_1d,
        }[kind]
        curve = fn(params)
    out = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        out.write(f"# {CSV_SCHEMA} bound\n")
        for key, val in curve.constants.items():
            if np.isscalar(val):
                out.write(f"# {key} = {val}\n")
        for note in curve.notes:
            out.write(f"# note: {note}\n")
        out.write("k,bound\n")
        for k, v in zip(curve.k, curve.values):
            out.write(f"{k},{float(v)!r}\n")
    finally:
        if out is not sys.stdout:
            out.close()
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fracwr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, hlp in (
        ("solve", "run a config (algorithm taken from the config)"),
        ("dnwr", "Dirichlet-Neumann waveform relaxation"),
        ("nnwr", "Neumann-Neumann waveform relaxation"),
        ("nnwr2d", "two-strip NNWR in 2D"),
    ):
        _add_run_flags(sub.add_parser(name, help=hlp))
    b = sub.add_parser("bounds", help="print a bound curve as CSV")
    b.add_argument("kind", choices=("dnwr-sub", "dnwr-wave", "dnwr-2d", "nnwr-1d", "nnwr-2d"))
    b.add_argument("--nu", type=float, required=True)
    b.add_argument("--T", type=float, default=1.0)
    b.add_argument("--lengths", type=_floats, required=True)
    b.add_argument("--kappa", type=_floats)
    b.add_argument("--K", type=int, default=20)
    b.add_argument("--out")
    v = sub.add_parser("verify-kernels", help="check kernel norms against the lemma bounds")
    v.add_argument("--quick", action="store_true")
    r = sub.add_parser("reproduce", help="run a shipped preset")
    r.add_argument("preset")
    r.add_argument("--out", default=None)
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--no-timing", action="store_true")
    sub.add_parser("list-presets", help="list shipped presets")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "list-presets":
            for name in sorted(PRESETS):
                cfg = PRESETS[name]
                print(f"{name:28s} {cfg.algorithm:7s} 2nu={','.join(f'{a:g}' for a in cfg.two_nu)} "
                      f"cells={len(cfg.cells)}")
            return 0
        if args.command == "reproduce":
            upd = {}
            if args.workers:
                upd["workers"] = args.workers
            if args.no_timing:
                upd["record_timing"] = False
            return _report(reproduce(args.preset, args.out, **upd))
        if args.command == "bounds":
            if args.kappa is None:
                args.kappa = (1.0,) * len(args.lengths)
            return _cmd_bounds(args)
        if args.command == "verify-kernels":
            return 0 if verify_kernels(args.quick) else 1
        algorithm = None if args.command == "solve" else args.command
        cfg = _config_from_args(args, algorithm)
        return _report(run_experiment(cfg, args.out))
    except ConfigError as exc:
        print(f"fracwr: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
