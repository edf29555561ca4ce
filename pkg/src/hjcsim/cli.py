"""Command-line driver: ``hjcsim <subcommand> --config FILE [flags]``.

Subcommands
-----------
spectrum            low-lying eigenvalues next to the analytic dressed levels
p0-sweep            P0 on a grid of N and Rabi frequencies
disorder-ensemble   P0 statistics over Gaussian disorder realizations
et-rate             cavity / free-space electron-transfer rate ratios

Each run writes one CSV and one JSON manifest into ``--out-dir``.
Exit status: 0 success, 2 configuration error, 3 solver failure (manifest
still written), 4 I/O error.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import hashlib
import json
import logging
import math
import os
import re
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .disorder import DisorderSpec, EnsembleError, ensemble_p0, solver_seed
from .etrate import CAVITY_MODEL, LINESHAPES, ETParams, sweep_ratio
from .exceptions import ConvergenceError, HJCError, ParameterError
from .model import MODEL_KEYS, ModelParams
from .polaron import compute_p0, spectrum_table

log = logging.getLogger("hjcsim")

ENV_PREFIX = "HJCSIM_"
EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4

SCHEMA = {
    "model": set(MODEL_KEYS),
    "run": {"n_values", "omega_rabi_values", "n_levels", "tol", "max_iter", "dense_threshold",
            "seed", "threads", "n_pairs"},
    "disorder": {"sigma", "n_realizations", "seed", "omega_sigma_ratios", "vary", "dump_realizations"},
    "etrate": {"lambda_d", "lambda_a", "omega_v", "gamma_v", "kbt", "v_coh", "n_molecules", "m_max",
               "include_stokes_shift", "lineshape", "mode", "n_values", "lambda_ratios", "delta_e_values"},
}


class ConfigError(HJCError):
    pass


def _number(text: str) -> float:
    text = text.strip()
    m = re.fullmatch(r"([+-]?)\s*sqrt\((.+)\)", text)
    if m:
        value = math.sqrt(_number(m.group(2)))
        return -value if m.group(1) == "-" else value
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}") from None


def parse_list(text: str) -> list:
    """Comma-separated numbers, ``a..b`` integer ranges, ``linspace(a, b, n)`` or ``logspace(a, b, n)``."""
    text = text.strip()
    m = re.fullmatch(r"(linspace|logspace)\((.+)\)", text)
    if m:
        a, b, n = (s for s in m.group(2).split(","))
        fn = np.linspace if m.group(1) == "linspace" else np.logspace
        return [float(x) for x in fn(_number(a), _number(b), int(_number(n)))]
    out = []
    for item in filter(None, (s.strip() for s in text.split(","))):
        r = re.fullmatch(r"(-?\d+)\s*\.\.\s*(-?\d+)", item)
        if r:
            out.extend(range(int(r.group(1)), int(r.group(2)) + 1))
        else:
            out.append(_number(item))
    return out


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"cannot parse boolean {text!r}")


def load_config(path) -> dict:
    """Read a sectioned key/value file; unknown sections or keys are errors."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    out = {}
    for section in parser.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        unknown = set(parser[section]) - SCHEMA[section]
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
        out[section] = dict(parser[section])
    return out


def _model_params(cfg: dict) -> ModelParams:
    section = dict(cfg.get("model", {}))
    for key in ("lambda_e", "omega_rabi", "delta_e", "omega_v", "huang_rhys", "q0"):
        if key in section and section[key].strip():
            section[key] = _number(section[key])
    return ModelParams.from_mapping(section)


def _resolve(args, name, cfg_value, cast, default):
    flag = getattr(args, name, None)
    if flag is not None:
        return cast(flag)
    env = os.environ.get(ENV_PREFIX + name.upper())
    if env is not None:
        return cast(env)
    if cfg_value is not None:
        return cast(cfg_value)
    return default


class Run:
    """Resolved settings for one invocation."""

    def __init__(self, args, cfg):
        self.args = args
        self.cfg = cfg
        run = cfg.get("run", {})
        self.threads = _resolve(args, "threads", run.get("threads"), int, os.cpu_count() or 1)
        self.seed = _resolve(args, "seed", run.get("seed"), int, 0)
        self.dense_threshold = _resolve(args, "dense_threshold", run.get("dense_threshold"), int, 2000)
        self.out_dir = Path(_resolve(args, "out_dir", None, str, "."))
        self.mode = _resolve(args, "mode", cfg.get("etrate", {}).get("mode"), str, None)
        self.tol = _number(run.get("tol", "1e-9"))
        self.max_iter = int(_number(run.get("max_iter", "500")))
        self.n_pairs = int(_number(run.get("n_pairs", "2")))
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")

    @property
    def solver_kw(self):
        return dict(tol=self.tol, max_iter=self.max_iter, dense_threshold=self.dense_threshold)


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".16e")
    return value


def write_csv(path: Path, rows: list, columns: list) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(c, "")) for c in columns])


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return None if not math.isfinite(float(obj)) else float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def _map(run: Run, fn, items):
    if run.threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(run.threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_spectrum(run: Run):
    params = _model_params(run.cfg)
    n_levels = int(_number(run.cfg.get("run", {}).get("n_levels", "12")))
    rows = spectrum_table(params, n_levels, seed=run.seed, threads=run.threads, **run.solver_kw)
    columns = ["index", "energy", "residual", "p_weight", "branch", "m_sym", "nonsym_quanta",
               "analytic_energy", "deviation", "centered_deviation"]
    meta = {"params": params.to_dict(), "kappa_approximation": "kappa(m)=m",
            "diagnostics": [{"index": r["index"], "residual": r["residual"]} for r in rows]}
    return rows, columns, meta, [], False


def cmd_p0_sweep(run: Run):
    params = _model_params(run.cfg)
    section = run.cfg.get("run", {})
    n_values = [int(v) for v in parse_list(section.get("n_values", str(params.n_molecules)))]
    om_values = parse_list(section.get("omega_rabi_values", str(params.omega_rabi)))
    grid = [(om, n) for om in om_values for n in n_values]

    def one(point):
        om, n = point
        p = params.replace(n_molecules=n, omega_rabi=om)
        try:
            r = compute_p0(p, seed=run.seed, n_pairs=run.n_pairs, **run.solver_kw)
            return {**r.row(), "degeneracy": r.degeneracy, "method": r.method, "status": "ok"}
        except HJCError as exc:
            return {"N": n, "omega_rabi": om, "p0": float("nan"), "bound": math.exp(-p.lambda_e ** 2 / (4 * n)),
                    "status": f"error: {exc}"}

    rows = _map(run, one, grid)
    failed = any(r["status"] != "ok" for r in rows)
    columns = ["N", "omega_rabi", "p0", "bound", "ground_energy", "residual", "dim", "degeneracy", "method", "status"]
    meta = {"params": params.to_dict(), "n_values": n_values, "omega_rabi_values": om_values,
            "diagnostics": [{k: r.get(k) for k in ("N", "omega_rabi", "residual", "method", "status")} for r in rows]}
    return rows, columns, meta, [], failed


def cmd_disorder(run: Run):
    params = _model_params(run.cfg)
    d = run.cfg.get("disorder", {})
    seed = run.seed if (run.args.seed is not None or ENV_PREFIX + "SEED" in os.environ) \
        else int(_number(d.get("seed", str(run.seed))))
    sigma = _number(d.get("sigma", "1.0"))
    n_real = int(_number(d.get("n_realizations", "200")))
    ratios = parse_list(d.get("omega_sigma_ratios", "1, 10"))
    vary = d.get("vary", "omega_rabi").strip()
    if vary not in ("omega_rabi", "sigma"):
        raise ConfigError("[disorder] vary must be omega_rabi or sigma")
    dump = _bool(d.get("dump_realizations", "false"))
    kw = dict(run.solver_kw, n_pairs=1)
    rows, extra, failed = [], [], False
    for ratio in ratios:
        if vary == "omega_rabi":
            om, sig = ratio * sigma, sigma
        else:
            om, sig = params.omega_rabi, params.omega_rabi / ratio
        p = params.replace(omega_rabi=om)
        spec = DisorderSpec(sig, n_real, seed)
        row = {"omega_sigma_ratio": ratio, "omega_rabi": om, "sigma": sig}
        try:
            clean = compute_p0(p, seed=run.seed, **kw)
            stats = ensemble_p0(p, spec, threads=run.threads, **kw)
            row.update(stats.row(), clean_p0=clean.p0, max_residual=float(np.max(stats.residuals)), status="ok")
            if dump:
                for i, (v, res) in enumerate(zip(stats.values, stats.residuals)):
                    extra.append({"omega_sigma_ratio": ratio, "realization": i, "p0": v, "residual": res,
                                  "solver_seed": solver_seed(spec, i)})
        except (EnsembleError, ConvergenceError) as exc:
            row["status"] = f"error: {exc}"
            failed = True
        rows.append(row)
    columns = ["omega_sigma_ratio", "omega_rabi", "sigma", "n_ok", "n_failed", "min", "max", "mean", "std",
               "p5", "p25", "p50", "p75", "p95", "bound", "clean_p0", "max_residual", "status"]
    meta = {"params": params.to_dict(), "disorder": {"sigma": sigma, "n_realizations": n_real, "seed": seed,
                                                     "vary": vary, "omega_sigma_ratios": ratios},
            "seeding": "SeedSequence(seed, spawn_key=(index,)) for detunings; (index, 1) for the solver",
            "diagnostics": [{k: r.get(k) for k in ("omega_sigma_ratio", "n_failed", "max_residual", "status")}
                            for r in rows]}
    extras = []
    if dump:
        extras.append(("realizations", extra, ["omega_sigma_ratio", "realization", "p0", "residual", "solver_seed"]))
    return rows, columns, meta, extras, failed


def _et_params(cfg: dict, mode: str) -> ETParams:
    e = cfg.get("etrate", {})
    kw = {}
    for key in ("lambda_d", "lambda_a", "omega_v", "gamma_v", "kbt", "v_coh"):
        if key in e:
            kw[key] = _number(e[key])
    for key in ("n_molecules", "m_max"):
        if key in e:
            kw[key] = int(_number(e[key]))
    if "include_stokes_shift" in e:
        kw["include_stokes_shift"] = _bool(e["include_stokes_shift"])
    if "lineshape" in e:
        kw["lineshape"] = e["lineshape"].strip()
    if mode == "fig3b":
        kw.setdefault("lambda_a", math.sqrt(2))
        kw.setdefault("n_molecules", 10_000)
    return ETParams(**kw)


def cmd_et_rate(run: Run):
    mode = run.mode or "fig3a"
    if mode not in ("fig3a", "fig3b"):
        raise ConfigError(f"unknown et-rate mode {mode!r} (fig3a or fig3b)")
    p = _et_params(run.cfg, mode)
    e = run.cfg.get("etrate", {})
    if mode == "fig3a":
        values = [int(v) for v in parse_list(e.get("n_values", "1, 2, 5, 10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000"))]
        des = parse_list(e["delta_e_values"]) if "delta_e_values" in e else [0.0, 2 * p.gamma_v, 5 * p.gamma_v]
        rows = sweep_ratio(p, "N", values, des)
    else:
        values = parse_list(e.get("lambda_ratios", "linspace(-2, 2, 21)"))
        des = parse_list(e["delta_e_values"]) if "delta_e_values" in e else [0.0]
        rows = sweep_ratio(p, "lambda_ratio", values, des)
    columns = ["axis", "axis_value", "N", "lambda_d", "lambda_a", "delta_e", "k_et", "k0", "ratio", "asymptotic_ratio",
               "ratio_stokes_on", "ratio_stokes_off", "include_stokes_shift", "lineshape"]
    meta = {"mode": mode, "params": {k: getattr(p, k) for k in p.__dataclass_fields__},
            "rate_units": "omega_v, 2*pi*V**2 prefactor included", "axis_values": values, "delta_e_values": des}
    return rows, columns, meta, [], False


COMMANDS = {
    "spectrum": cmd_spectrum,
    "p0-sweep": cmd_p0_sweep,
    "disorder-ensemble": cmd_disorder,
    "et-rate": cmd_et_rate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hjcsim", description="Holstein-Jaynes-Cummings simulator")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", default=None, help="sectioned config file")
        s.add_argument("--threads", type=int, default=None)
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--out-dir", dest="out_dir", default=None)
        s.add_argument("--mode", default=None, help="fig3a or fig3b (et-rate)")
        s.add_argument("--dense-threshold", dest="dense_threshold", type=int, default=None)
        s.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.time()
    try:
        config_path = args.config or os.environ.get(ENV_PREFIX + "CONFIG")
        cfg = load_config(config_path) if config_path else {}
        run = Run(args, cfg)
    except (ConfigError, ParameterError, ValueError) as exc:
        print(f"hjcsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows, columns, meta, extras, failed = COMMANDS[args.command](run)
    except (ConfigError, ParameterError) as exc:
        print(f"hjcsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConvergenceError as exc:
        rows, columns, meta, extras, failed = [], [], {"error": str(exc)}, [], True

    stem = args.command if args.command != "et-rate" else f"et-rate-{run.mode or 'fig3a'}"
    try:
        run.out_dir.mkdir(parents=True, exist_ok=True)
        files = {}
        if columns:
            csv_path = run.out_dir / f"{stem}.csv"
            write_csv(csv_path, rows, columns)
            files[csv_path.name] = _digest(csv_path)
        for suffix, xrows, xcols in extras:
            path = run.out_dir / f"{stem}-{suffix}.csv"
            write_csv(path, xrows, xcols)
            files[path.name] = _digest(path)
        manifest = {
            "tool": "hjcsim", "version": __version__, "command": args.command,
            "config_path": str(config_path) if config_path else None, "config": cfg,
            "resolved": {"threads": run.threads, "seed": run.seed, "dense_threshold": run.dense_threshold,
                         "tol": run.tol, "max_iter": run.max_iter, "mode": run.mode},
            "flags": {"lineshape": cfg.get("etrate", {}).get("lineshape", "lorentzian"),
                      "available_lineshapes": sorted(LINESHAPES),
                      "cavity_rate_model": CAVITY_MODEL, "gauge": "complex",
                      "include_stokes_shift": cfg.get("etrate", {}).get("include_stokes_shift", "true")},
            "status": "failed" if failed else "ok",
            "duration_s": time.time() - started,
            "files": files,
            **meta,
        }
        with open(run.out_dir / f"{stem}.json", "w") as fh:
            json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
    except OSError as exc:
        print(f"hjcsim: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    if failed:
        print("hjcsim: solver failure, see manifest", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
