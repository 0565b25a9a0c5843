"""Batch command line: ``slenderloop {spectrum, tension, evolve, verify}``.

Runs are described by a YAML file (schema version 1)::

    version: 1
    epsilon: 0.01            # tube radius, required except for verify
    n_grid: 128              # samples per curve
    n_modes: null            # tension cutoff K, default (n_grid - 2) // 4
    k_max: null              # spectrum: modes 0..k_max, default n_grid // 2
    seed: 0
    curve: perturbed-circle(3, 0.01)   # or circle, {file: path.csv},
                                       # {builtin: perturbed-circle, mode: 3, amplitude: 0.01}
    output_dir: out
    evolution: {dt: 1.0e-5, t_final: 1.0e-3, scheme: ETD2, snapshot_every: 10}
    verify: {fixture: null}

Unknown keys are rejected and all validation errors are reported together.
Every number written to CSV or JSON carries 17 significant digits, so
identical inputs give byte-identical outputs.

Exit codes: 0 success, 1 verification failure, 2 configuration error,
3 numerical failure.
"""
import argparse
import csv
import os
import re
import sys
from dataclasses import dataclass, field, fields

import numpy as np
import yaml

from .acceptance import _record, dumps_report, run_suite
from .errors import ConfigurationError, SlenderLoopError
from .evolution import EvolutionConfig, run
from .geometry import (build_frame, circle, load_curve_csv, perturbed_circle,
                       r_star_bound, star_norm, write_curve_csv)
from .ntd import multiplier_table, resolvent_tables
from .tension import tension_for_bending

__all__ = ["RunConfig", "parse_config", "load_config", "build_curve", "cmd_spectrum",
           "cmd_tension", "cmd_evolve", "cmd_verify", "main", "SCHEMA_VERSION"]

SCHEMA_VERSION = 1
SUBCOMMANDS = ("spectrum", "tension", "evolve", "verify")
_TOP_KEYS = {"version", "epsilon", "n_grid", "n_modes", "k_max", "seed", "curve",
             "output_dir", "evolution", "verify"}
_EVOLUTION_KEYS = {f.name for f in fields(EvolutionConfig)} - {"epsilon"}
_VERIFY_KEYS = {"fixture"}
_CURVE_RE = re.compile(r"^\s*perturbed[-_]circle\s*\(\s*([^,\s]+)\s*,\s*([^)\s]+)\s*\)\s*$")


@dataclass
class RunConfig:
    """Validated run description."""

    subcommand: str
    epsilon: float = None
    n_grid: int = 128
    n_modes: int = None
    k_max: int = None
    seed: int = 0
    curve: dict = field(default_factory=lambda: {"builtin": "circle"})
    output_dir: str = "out"
    evolution: EvolutionConfig = None
    fixture: str = None

    def as_dict(self):
        out = {f.name: getattr(self, f.name) for f in fields(self)}
        out["evolution"] = None if self.evolution is None else self.evolution.as_dict()
        return out


def _is_int(v):
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _as_float(v):
    # YAML 1.1 reads "1e-2" as a string; accept any numeric literal
    if isinstance(v, bool):
        raise ValueError
    return float(v)


def _parse_curve(spec, errs):
    if spec is None:
        return {"builtin": "circle"}
    if isinstance(spec, str):
        if spec.strip() == "circle":
            return {"builtin": "circle"}
        m = _CURVE_RE.match(spec)
        if m:
            spec = {"builtin": "perturbed-circle", "mode": m.group(1), "amplitude": m.group(2)}
        elif spec.startswith("file:"):
            spec = {"file": spec[5:].strip()}
        else:
            errs.append(f"curve: unrecognized source {spec!r}")
            return None
    if not isinstance(spec, dict):
        errs.append(f"curve: expected a string or mapping, got {type(spec).__name__}")
        return None
    if "file" in spec:
        extra = set(spec) - {"file"}
        if extra:
            errs.append(f"curve: unknown keys {sorted(extra)} with 'file'")
        return {"file": str(spec["file"])}
    kind = str(spec.get("builtin", "")).replace("_", "-")
    if kind == "circle":
        extra = set(spec) - {"builtin"}
        if extra:
            errs.append(f"curve: unknown keys {sorted(extra)} for circle")
        return {"builtin": "circle"}
    if kind != "perturbed-circle":
        errs.append(f"curve: builtin must be circle or perturbed-circle, got {spec.get('builtin')!r}")
        return None
    extra = set(spec) - {"builtin", "mode", "amplitude", "lift"}
    if extra:
        errs.append(f"curve: unknown keys {sorted(extra)} for perturbed-circle")
    out = {"builtin": "perturbed-circle"}
    try:
        mode = spec.get("mode", 3)
        mode = int(mode) if isinstance(mode, str) else mode
        if not _is_int(mode) or mode < 2:
            raise ValueError
        out["mode"] = int(mode)
    except ValueError:
        errs.append(f"curve.mode must be an integer >= 2, got {spec.get('mode')!r}")
    for key, default in (("amplitude", 1e-2), ("lift", 0.0)):
        try:
            val = _as_float(spec.get(key, default))
            if not np.isfinite(val) or val < 0:
                raise ValueError
            out[key] = val
        except (TypeError, ValueError):
            errs.append(f"curve.{key} must be a nonnegative number, got {spec.get(key)!r}")
    return out


def parse_config(text, subcommand):
    """Parse and validate YAML run text; raise one aggregated ConfigurationError."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigurationError(f"unknown subcommand {subcommand!r}")
    try:
        raw = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as exc:
        raise ConfigurationError(f"config is not valid YAML: {exc}") from None
    raw = {} if raw is None else raw
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a mapping of keys to values")
    errs = []
    unknown = set(raw) - _TOP_KEYS
    if unknown:
        errs.append(f"unknown keys: {sorted(map(str, unknown))}")
    version = raw.get("version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        errs.append(f"version must be {SCHEMA_VERSION}, got {version!r}")
    cfg = RunConfig(subcommand)

    eps = raw.get("epsilon")
    if eps is None:
        if subcommand != "verify":
            errs.append("missing required key: epsilon")
    else:
        try:
            eps = _as_float(eps)
            if not (np.isfinite(eps) and eps > 0):
                raise ValueError
            cfg.epsilon = eps
        except (TypeError, ValueError):
            errs.append(f"epsilon must be a positive finite number (the tube must have "
                        f"positive radius), got {raw.get('epsilon')!r}")

    for key, lo in (("n_grid", 8), ("n_modes", 1), ("k_max", 1), ("seed", 0)):
        if key not in raw or raw[key] is None:
            continue
        v = raw[key]
        if not _is_int(v) or v < lo:
            errs.append(f"{key} must be an integer >= {lo}, got {v!r}")
        else:
            setattr(cfg, key, int(v))
    if cfg.n_grid % 2:
        errs.append(f"n_grid must be even, got {cfg.n_grid}")
    if cfg.n_modes is not None and cfg.n_grid < 4 * cfg.n_modes + 2:
        errs.append(f"n_modes = {cfg.n_modes} needs n_grid >= {4 * cfg.n_modes + 2}")

    if subcommand in ("tension", "evolve") and "curve" not in raw:
        errs.append("missing required key: curve")
    curve = _parse_curve(raw.get("curve"), errs)
    if curve is not None:
        cfg.curve = curve
    if "output_dir" in raw:
        cfg.output_dir = str(raw["output_dir"])

    evo = raw.get("evolution") or {}
    if not isinstance(evo, dict):
        errs.append("evolution must be a mapping")
        evo = {}
    bad = set(evo) - _EVOLUTION_KEYS
    if bad:
        errs.append(f"unknown evolution keys: {sorted(map(str, bad))}")
    if subcommand == "evolve":
        kw = {k: v for k, v in evo.items() if k in _EVOLUTION_KEYS}
        for key in ("dt", "t_final", "arclength_tol", "energy_tol", "star_floor", "rft_constant"):
            if key in kw:
                try:
                    kw[key] = _as_float(kw[key])
                except (TypeError, ValueError):
                    errs.append(f"evolution.{key} must be a number, got {kw[key]!r}")
                    kw.pop(key)
        if cfg.n_modes is not None and "tension_modes" not in kw:
            kw["tension_modes"] = cfg.n_modes
        try:
            cfg.evolution = EvolutionConfig(epsilon=cfg.epsilon or 1.0, **kw)
            cfg.evolution.validate()
        except ConfigurationError as exc:
            errs.extend(f"evolution: {m}" for m in str(exc).split("; "))
        except TypeError as exc:
            errs.append(f"evolution: {exc}")

    ver = raw.get("verify") or {}
    if not isinstance(ver, dict):
        errs.append("verify must be a mapping")
        ver = {}
    bad = set(ver) - _VERIFY_KEYS
    if bad:
        errs.append(f"unknown verify keys: {sorted(map(str, bad))}")
    if ver.get("fixture") is not None:
        cfg.fixture = str(ver["fixture"])

    if errs:
        raise ConfigurationError("invalid configuration:\n  - " + "\n  - ".join(errs))
    return cfg


def load_config(path, subcommand):
    if path is None:
        return parse_config("", subcommand)
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, subcommand)


def build_curve(cfg):
    """Construct the configured curve and check the radius is admissible."""
    src = cfg.curve
    if "file" in src:
        if not os.path.exists(src["file"]):
            raise ConfigurationError(f"curve file not found: {src['file']}")
        X = load_curve_csv(src["file"], cfg.n_grid)
    elif src["builtin"] == "circle":
        X = circle(cfg.n_grid)
    else:
        X = perturbed_circle(cfg.n_grid, mode=src["mode"], amplitude=src["amplitude"],
                             lift=src.get("lift", 0.0))
    rs = r_star_bound(X)
    if cfg.epsilon is not None and cfg.epsilon > rs / 4:
        raise ConfigurationError(
            f"epsilon = {cfg.epsilon:.6g} is not admissible for this curve: it must not exceed "
            f"r_star/4 = {rs / 4:.6g}")
    return X


# --- output helpers -----------------------------------------------------------

def _fmt(v):
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return f"{float(v):.17g}"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path, obj):
    with open(path, "w") as fh:
        fh.write(dumps_report(obj))


def _echo(cfg, stream):
    stream.write(yaml.safe_dump({"config": cfg.as_dict()}, sort_keys=True))


def _outdir(cfg):
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg.output_dir


# --- subcommands ------------------------------------------------------------

def cmd_spectrum(cfg, stream=sys.stdout):
    """Write ``spectrum.csv`` with the multipliers, resolvents and rates."""
    k_max = cfg.k_max if cfg.k_max is not None else cfg.n_grid // 2
    t = resolvent_tables(cfg.epsilon, k_max)
    rows = zip(t.k.astype(int), t.m_t, t.m_n, t.m1.real, t.m2.imag, t.lambda_t, t.lambda_n)
    path = os.path.join(_outdir(cfg), "spectrum.csv")
    _write_csv(path, ["k", "m_t", "m_n", "m1_re", "m2_im", "lambda_t", "lambda_n"], rows)
    stream.write(f"wrote {path} ({k_max + 1} modes)\n")
    return 0


def cmd_tension(cfg, stream=sys.stdout):
    """Solve the tension problem for bending data on the configured curve."""
    X = build_curve(cfg)
    stream.write(f"curve star_norm = {star_norm(X):.17g}\n")
    system = tension_for_bending(build_frame(X), multiplier_table(cfg.epsilon, cfg.n_grid),
                                 X, n_modes=cfg.n_modes)
    out = _outdir(cfg)
    s = np.arange(X.n) / X.n
    _write_csv(os.path.join(out, "tension.csv"), ["s", "tau"], zip(s, system.tau))
    diag = system.diagnostics()
    diag.update(epsilon=cfg.epsilon, n_grid=cfg.n_grid, star_norm=star_norm(X),
                physical_tension_mean=float(-np.mean(system.tau)))
    _write_json(os.path.join(out, "tension.json"), diag)
    stream.write(f"sigma_min = {system.sigma_min:.6g}, symmetry_defect = "
                 f"{system.symmetry_defect:.3g}, constraint_residual = "
                 f"{system.constraint_residual:.3g}\n")
    return 0


def cmd_evolve(cfg, stream=sys.stdout):
    """Evolve the configured curve; snapshots, diagnostics and a summary."""
    X = build_curve(cfg)
    stream.write(f"curve star_norm = {star_norm(X):.17g}\n")
    evo = EvolutionConfig(**{**cfg.evolution.as_dict(), "epsilon": cfg.epsilon})
    result = run(X, evo)
    out = _outdir(cfg)
    for i, (t, Y) in enumerate(zip(result.times, result.snapshots)):
        write_curve_csv(os.path.join(out, f"snapshot_{i:05d}.csv"), Y)
    d = result.diagnostics
    keys = ["t", "energy", "inext_defect", "star_norm", "tau_min", "tau_max", "constraint_residual"]
    _write_csv(os.path.join(out, "diagnostics.csv"), keys, zip(*(d[k] for k in keys)))
    summary = result.summary()
    summary["snapshot_times"] = list(result.times)
    _write_json(os.path.join(out, "summary.json"), summary)
    stream.write(f"{result.status}: {summary['steps']} steps, energy "
                 f"{summary['energy_initial']:.10g} -> {summary['energy_final']:.10g}\n")
    if result.status != "completed":
        stream.write(f"run aborted: {result.message}\n")
        return 3
    return 0


def cmd_verify(cfg, stream=sys.stdout, report=None, verbose=False):
    """Run the acceptance suite and write a JSON report.

    The suite is run twice in process; the determinism criterion compares
    the serialized results (timings excluded).
    """
    settings = {"seed": cfg.seed}
    if cfg.fixture is not None:
        settings["fixture"] = cfg.fixture
    first = run_suite(settings, timing=verbose)
    second = run_suite(settings)
    strip = [{k: v for k, v in r.items() if k != "seconds"} for r in first]
    same = dumps_report(strip) == dumps_report(second)
    first.append(_record(14, "Deterministic repeat with the same seed", same, True, same,
                         seed=cfg.seed))
    passed = all(r["pass"] for r in first)
    doc = {"seed": cfg.seed, "all_pass": passed, "criteria": first}
    path = report or os.path.join(_outdir(cfg), "verify.json")
    parent = os.path.dirname(path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    _write_json(path, doc)
    for r in first:
        line = f"criterion {r['criterion']:2d} {'PASS' if r['pass'] else 'FAIL'}  {r['name']}"
        if verbose and "seconds" in r:
            line += f"  ({r['seconds']:.2f} s)"
        stream.write(line + "\n")
    stream.write(f"report: {path}\n")
    return 0 if passed else 1


def _parser():
    p = argparse.ArgumentParser(prog="slenderloop",
                                description="Spectral slender-body filament toolkit.")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("spectrum", "dump multipliers and decay rates"),
                        ("tension", "solve the tension problem on a curve"),
                        ("evolve", "evolve a filament in time")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config", help="YAML run file")
        sp.add_argument("-o", "--output-dir", help="override output_dir")
        sp.add_argument("-q", "--quiet", action="store_true", help="do not echo the config")
    sp = sub.add_parser("verify", help="run the acceptance suite")
    sp.add_argument("config", nargs="?", help="optional YAML run file")
    sp.add_argument("--seed", type=int, help="random seed (default 0)")
    sp.add_argument("--fixture", help="Bessel reference fixture to test against")
    sp.add_argument("--report", help="report path (default <output_dir>/verify.json)")
    sp.add_argument("-v", "--verbose", action="store_true", help="per-criterion timing")
    sp.add_argument("-o", "--output-dir", help="override output_dir")
    sp.add_argument("-q", "--quiet", action="store_true", help="do not echo the config")
    return p


def main(argv=None, stream=None):
    stream = sys.stdout if stream is None else stream
    args = _parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.command)
        if args.output_dir:
            cfg.output_dir = args.output_dir
        if args.command == "verify":
            if args.seed is not None:
                if args.seed < 0:
                    raise ConfigurationError(f"seed must be nonnegative, got {args.seed}")
                cfg.seed = args.seed
            if args.fixture:
                cfg.fixture = args.fixture
        if not args.quiet:
            _echo(cfg, stream)
        if args.command == "spectrum":
            return cmd_spectrum(cfg, stream)
        if args.command == "tension":
            return cmd_tension(cfg, stream)
        if args.command == "evolve":
            return cmd_evolve(cfg, stream)
        return cmd_verify(cfg, stream, report=args.report, verbose=args.verbose)
    except SlenderLoopError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return exc.exit_code
    except OSError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
