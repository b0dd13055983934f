"""Command-line front end: one JSON config per run, CSV/JSON artifacts plus a manifest.

Usage::

    fraclab --config run.json [--seed N] [--dry-run] [--threads K]

Exit codes: 0 success, 2 invalid config, 3 numerical failure (flagged
rows are written before exiting).
"""
from __future__ import annotations

import argparse
import copy
import csv
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from . import allen_cahn as ac
from . import extension as ex
from . import fractional_ops as fo
from . import kernel as kn
from . import minmax as mm
from . import perimeter as pm
from .manifold import (Ball, FlatTorus, GridField, GridSpec, SetIndicator, Stripe, coordinates, heat_smooth,
                       read_field, set_fft_workers, write_field)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    pass


class NumericalFailure(RuntimeError):
    pass


# ------------------------------------------------------------- schema

TOP_KEYS = {"command", "torus", "grid", "kernel", "ac", "experiment", "seed", "output_dir"}
TORUS_KEYS = {"dim", "side_lengths"}
GRID_KEYS = {"points_per_axis"}
KERNEL_KEYS = {"s": 0.5}
AC_KEYS = {"epsilon": 0.05, "dt": None, "tol_residual": 1e-8, "max_iters": 200000}

# command -> (experiment defaults, needs torus/grid, needs ac)
COMMANDS = {
    "kernel-check": ({"separations": [0.05, 0.1, 0.2, 0.3, 0.4, 0.5], "t_values": [1e-3, 1e-2, 1e-1, 1.0, 10.0],
                      "heat_separations": [0.0, 0.1, 0.25]}, True, False),
    "seminorm": ({"field": {"type": "mode", "k": [1]}}, True, False),
    "extension-check": ({"modes": [[1], [2]]}, True, False),
    "monotonicity": ({"stripe": {"axis": 0, "lo": 0.25, "hi": 0.75}, "center": None, "n_radii": 12,
                      "r_max": 0.249}, True, True),
    "perimeter": ({"shape": {"type": "stripe", "axis": 0, "lo": 0.25, "hi": 0.75}, "s_list": [0.5]}, True, False),
    "nmc": ({"shape": {"type": "stripe", "axis": 0, "lo": 0.25, "hi": 0.75}, "point": None, "n_radii": 6},
            True, False),
    "layer1d": ({"half_length": 20.0, "n_points": 4096, "tol": 1e-10}, False, False),
    "solve-ac": ({"initial": {"type": "random", "amplitude": 0.9}, "method": "flow"}, True, True),
    "morse-index": ({"state": {"type": "constant", "value": 0.0}, "k_max": 20}, True, True),
    "sweepout": ({"p": 1, "sphere_samples": 200}, True, False),
    "scaling": ({"p_range": [1, 2, 3, 4, 5, 6, 7, 8], "sphere_samples": 200, "epsilon": None}, True, False),
    "eps-limit": ({"p": 1, "eps_list": [0.08, 0.04, 0.02, 0.01], "sphere_samples": None}, True, False),
    "bv-density-probe": ({"initial": {"type": "stripe", "axis": 0, "lo": 0.25, "hi": 0.75}, "center": None,
                          "radii": [0.05, 0.1, 0.2]}, True, True),
}


def _reject_unknown(d: dict, allowed, where: str) -> None:
    if not isinstance(d, dict):
        raise ConfigError(f"{where} must be an object")
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ConfigError(f"unknown keys in {where}: {', '.join(extra)}")


def _merge(defaults: dict, given: dict, where: str) -> dict:
    _reject_unknown(given, defaults, where)
    out = copy.deepcopy(defaults)
    out.update(given)
    return out


def resolve_config(cfg: dict, seed_override: int | None = None) -> dict:
    """Validate a raw config and fill in defaults; raises ConfigError."""
    _reject_unknown(cfg, TOP_KEYS, "config")
    cmd = cfg.get("command")
    if cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    exp_defaults, needs_space, needs_ac = COMMANDS[cmd]
    out = {"command": cmd}
    if needs_space:
        if "torus" not in cfg or "grid" not in cfg:
            raise ConfigError(f"{cmd} needs torus and grid")
        _reject_unknown(cfg["torus"], TORUS_KEYS, "torus")
        _reject_unknown(cfg["grid"], GRID_KEYS, "grid")
        L = cfg["torus"].get("side_lengths")
        n = cfg["torus"].get("dim", len(L) if L else None)
        N = cfg["grid"].get("points_per_axis")
        if not L or not N or len(L) != n or len(N) != n:
            raise ConfigError("torus side_lengths, dim and grid points_per_axis must agree")
        if any(float(x) <= 0 for x in L) or any(int(x) < 2 or int(x) % 2 for x in N):
            raise ConfigError("side lengths must be positive and grid sizes even")
        out["torus"] = {"dim": int(n), "side_lengths": [float(x) for x in L]}
        out["grid"] = {"points_per_axis": [int(x) for x in N]}
    out["kernel"] = _merge(KERNEL_KEYS, cfg.get("kernel", {}), "kernel")
    s = out["kernel"]["s"]
    if not isinstance(s, (int, float)) or not 0 < s < 1:
        raise ConfigError("kernel.s must lie in (0, 1)")
    if needs_ac or "ac" in cfg:
        out["ac"] = _merge(AC_KEYS, cfg.get("ac", {}), "ac")
        if not out["ac"]["epsilon"] > 0:
            raise ConfigError("ac.epsilon must be positive")
    out["experiment"] = _merge(exp_defaults, cfg.get("experiment", {}), "experiment")
    seed = cfg.get("seed", 0) if seed_override is None else seed_override
    if not isinstance(seed, int) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be a 64-bit unsigned integer")
    out["seed"] = seed
    if "output_dir" not in cfg:
        raise ConfigError("output_dir is required")
    out["output_dir"] = str(cfg["output_dir"])
    _check_experiment(out)
    return out


def _check_experiment(cfg: dict) -> None:
    e = cfg["experiment"]
    cmd = cfg["command"]
    if cmd in ("sweepout", "eps-limit") and not 1 <= int(e["p"]) <= 12:
        raise ConfigError("p must lie in [1, 12]")
    if cmd == "scaling" and (len(e["p_range"]) < 4 or min(e["p_range"]) < 1 or max(e["p_range"]) > 12):
        raise ConfigError("p_range needs at least four values in [1, 12]")
    if cmd == "eps-limit":
        eps = e["eps_list"]
        if any(b >= a for a, b in zip(eps, eps[1:])):
            raise ConfigError("eps_list must be decreasing")
    if cmd == "solve-ac" and e["method"] not in ("flow", "newton"):
        raise ConfigError("method must be 'flow' or 'newton'")
    for key in ("shape", "initial", "state", "field"):
        if key in e and (not isinstance(e[key], dict) or "type" not in e[key]):
            raise ConfigError(f"experiment.{key} needs a type")


# ------------------------------------------------------------ helpers

def _space(cfg):
    return FlatTorus(cfg["torus"]["side_lengths"]), GridSpec(cfg["grid"]["points_per_axis"])


def _params(cfg):
    a = cfg["ac"]
    return ac.ACParams(cfg["kernel"]["s"], a["epsilon"], a["dt"], a["tol_residual"], a["max_iters"])


def _shape(spec: dict, dim: int):
    t = spec["type"]
    if t == "stripe":
        return Stripe(int(spec.get("axis", 0)), float(spec["lo"]), float(spec["hi"]))
    if t == "ball":
        c = spec["center"]
        if len(c) != dim:
            raise ConfigError("ball center has the wrong dimension")
        return Ball(tuple(float(x) for x in c), float(spec["radius"]))
    raise ConfigError(f"unknown shape type {t!r}")


def _initial_field(spec: dict, torus, grid, eps: float, seed: int) -> GridField:
    t = spec["type"]
    if t == "random":
        rng = np.random.default_rng(seed)
        u = heat_smooth(GridField(torus, grid, rng.standard_normal(grid.shape)), eps**2)
        return u.with_values(float(spec.get("amplitude", 0.9)) * u.values / np.max(np.abs(u.values)))
    if t == "constant":
        return GridField(torus, grid, np.full(grid.shape, float(spec["value"])))
    if t == "stripe":
        # symmetric tanh profile across both faces
        X = coordinates(torus, grid)[int(spec.get("axis", 0))]
        L = torus.L[int(spec.get("axis", 0))]
        lo, hi = float(spec["lo"]), float(spec["hi"])
        d = np.minimum(np.abs((X - lo + L / 2) % L - L / 2), np.abs((X - hi + L / 2) % L - L / 2))
        inside = Stripe(int(spec.get("axis", 0)), lo, hi).contains(torus, coordinates(torus, grid))
        return GridField(torus, grid, np.tanh(np.where(inside, d, -d) / eps))
    if t == "file":
        u, _ = read_field(spec["path"])
        if u.grid.shape != grid.shape or not np.allclose(u.torus.L, torus.L):
            raise ConfigError("field file does not match torus and grid")
        return u
    raise ConfigError(f"unknown field type {t!r}")


def _real_mode(torus, grid, k) -> np.ndarray:
    """L^2-normalized ``cos(2 pi k.x / L)``."""
    if len(k) != torus.dim:
        raise ConfigError("mode index has the wrong dimension")
    phase = sum(2 * np.pi * ki * xi / li for ki, xi, li in zip(k, coordinates(torus, grid), torus.L))
    norm = 1.0 if not any(k) else np.sqrt(2.0)
    return norm * np.cos(phase) / np.sqrt(torus.volume)


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


class Outputs:
    """Collects artifact files written under the output directory."""

    def __init__(self, root: Path):
        self.root = root
        self.files = []

    def path(self, name: str) -> Path:
        p = self.root / name
        p.parent.mkdir(parents=True, exist_ok=True)
        self.files.append(name)
        return p

    def csv(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for r in rows:
                w.writerow([_fmt(x) for x in r])

    def json(self, name: str, obj) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(_jsonable(obj), fh, indent=2, sort_keys=True)
            fh.write("\n")

    def field(self, name: str, u: GridField) -> None:
        write_field(self.path(name), u)


def _jsonable(o):
    if isinstance(o, dict):
        return {str(k): _jsonable(v) for k, v in o.items()}
    if isinstance(o, (list, tuple)):
        return [_jsonable(v) for v in o]
    if isinstance(o, np.ndarray):
        return _jsonable(o.tolist())
    if isinstance(o, (np.bool_, bool)):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, (np.floating, float)):
        x = float(o)
        return x if np.isfinite(x) else str(x)
    return o


# ----------------------------------------------------------- commands

def cmd_kernel_check(cfg, out: Outputs):
    torus, _ = _space(cfg)
    s = cfg["kernel"]["s"]
    e = cfg["experiment"]
    rows = []
    x0 = np.zeros(torus.dim)
    for d in e["heat_separations"]:
        y = x0.copy()
        y[0] = d
        for t in e["t_values"]:
            a = float(kn.heat_kernel(torus, x0, y, t, "spectral"))
            b = float(kn.heat_kernel(torus, x0, y, t, "lattice"))
            rows.append((d, t, a, b, abs(a - b) / abs(b)))
    out.csv("heat_kernel.csv", ["separation", "t", "spectral", "lattice", "rel_gap"], rows)
    rep = kn.comparability_report(torus, s, e["separations"])
    out.csv("ks_comparability.csv", ["separation", "ratio", "method_gap"],
            [(r["separation"], r["ratio"], r["method_gap"]) for r in rep])
    return {"max_heat_gap": max(r[4] for r in rows), "max_ks_gap": max(r["method_gap"] for r in rep)}


def cmd_seminorm(cfg, out: Outputs):
    torus, grid = _space(cfg)
    s = cfg["kernel"]["s"]
    spec = cfg["experiment"]["field"]
    if spec["type"] == "mode":
        u = GridField(torus, grid, _real_mode(torus, grid, spec["k"]))
    else:
        u = _initial_field(spec, torus, grid, 1.0, cfg["seed"])
    br = fo.seminorm_all(u, s)
    out.csv("seminorm.csv", ["spectral", "double_integral", "extension"],
            [(br.spectral, br.double_integral, br.extension)])
    out.json("seminorm.json", {"spectral": br.spectral, "double_integral": br.double_integral,
                               "extension": br.extension, "ratios": br.ratios})
    return {}


def cmd_extension_check(cfg, out: Outputs):
    torus, grid = _space(cfg)
    s = cfg["kernel"]["s"]
    bs = kn.beta_s(s)
    rows = []
    for k in cfg["experiment"]["modes"]:
        phi = _real_mode(torus, grid, k)
        lam = float(np.sum((2 * np.pi * np.asarray(k) / torus.L) ** 2))
        u = GridField(torus, grid, phi)
        d = ex.dtn(ex.cs_extend(u, s)).values
        c = float(np.sum(d * phi) / np.sum(phi * phi))
        rows.append((list(k), lam, c, -bs * lam ** (s / 2), c / lam ** (s / 2)))
    out.csv("dtn.csv", ["mode", "lambda", "dtn_coefficient", "minus_beta_lambda_pow", "constant"],
            [(" ".join(map(str, r[0])),) + r[1:] for r in rows])
    return {"beta_s": bs}


def _solve(u0, params, method):
    if method == "newton":
        return ac.newton_solve(u0, params)
    sol = ac.gradient_flow(u0, params)
    return sol


def cmd_monotonicity(cfg, out: Outputs):
    torus, grid = _space(cfg)
    params = _params(cfg)
    e = cfg["experiment"]
    u0 = _initial_field(dict(e["stripe"], type="stripe"), torus, grid, params.epsilon, cfg["seed"])
    sol = ac.newton_solve(u0, params)
    out.field("fields/solution.bin", sol.u)
    center = e["center"] if e["center"] is not None else [e["stripe"]["lo"]] + [L / 2 for L in torus.L[1:]]
    h = float(np.max(torus.L / np.asarray(grid.shape)))
    radii = np.geomspace(4 * h, e["r_max"], int(e["n_radii"]))
    rows = ex.phi_functional(sol.u, params.s, params.epsilon, center, radii)
    out.csv("phi.csv", ["R", "phi", "sobolev_part", "potential_part", "error"],
            [(r.R, r.phi, r.sobolev_part, r.potential_part, r.error) for r in rows])
    if not sol.converged:
        raise NumericalFailure(f"solver did not converge (residual {sol.residual_norm:.3g})")
    return {"residual": sol.residual_norm}


def cmd_perimeter(cfg, out: Outputs):
    torus, grid = _space(cfg)
    E = SetIndicator.from_shape(torus, grid, _shape(cfg["experiment"]["shape"], torus.dim))
    exact = isinstance(E.exact_shape, Stripe)
    rows = pm.s_to_1_limit_experiment(E, cfg["experiment"]["s_list"])
    table = []
    for r in rows:
        cf = pm.stripe_per_s_exact(torus, E.exact_shape, r.s) if exact else float("nan")
        table.append((r.s, r.per_s, cf, r.ratio, r.resolution_limited))
    out.csv("perimeter.csv", ["s", "per_s", "closed_form", "ratio", "resolution_limited"], table)
    return {"classical_perimeter": pm.classical_perimeter(E)}


def cmd_nmc(cfg, out: Outputs):
    torus, grid = _space(cfg)
    e = cfg["experiment"]
    shape = _shape(e["shape"], torus.dim)
    E = SetIndicator.from_shape(torus, grid, shape)
    if e["point"] is not None:
        x0 = e["point"]
    elif isinstance(shape, Stripe):
        x0 = [L / 2 for L in torus.L]
        x0[shape.axis] = shape.lo
    else:
        x0 = list(shape.center)
        x0[0] += shape.radius
    r = pm.nmc(E, x0, cfg["kernel"]["s"], int(e["n_radii"]))
    out.csv("nmc_truncated.csv", ["radius", "truncated"], list(zip(r.radii, r.truncated)))
    out.json("nmc.json", {"point": x0, "value": r.value, "error": r.error})
    return {}


def cmd_layer1d(cfg, out: Outputs):
    e = cfg["experiment"]
    prof = ac.layer_1d(cfg["kernel"]["s"], e["half_length"], int(e["n_points"]), e["tol"])
    out.csv("layer.csv", ["x", "v"], list(zip(prof.x, prof.v)))
    mono = bool(np.all(np.diff(prof.v) >= 0))
    out.json("layer.json", {"residual": prof.residual_sup, "oddness": prof.oddness, "monotone": mono})
    if prof.residual_sup > 1e-6:
        raise NumericalFailure("layer residual above 1e-6")
    return {}


def cmd_solve_ac(cfg, out: Outputs):
    torus, grid = _space(cfg)
    params = _params(cfg)
    e = cfg["experiment"]
    u0 = _initial_field(e["initial"], torus, grid, params.epsilon, cfg["seed"])
    sol = _solve(u0, params, e["method"])
    eb = ac.energy(sol.u, params)
    out.field("fields/solution.bin", sol.u)
    out.json("solution.json", {"iterations": sol.iterations, "residual": sol.residual_norm, "converged": sol.converged,
                               "sobolev": eb.sobolev, "potential": eb.potential, "total": eb.total,
                               "sup_abs": float(np.max(np.abs(sol.u.values)))})
    if sol.energy_history:
        out.csv("energy_history.csv", ["iteration", "energy"], list(enumerate(sol.energy_history)))
    if not sol.converged:
        raise NumericalFailure(f"solver did not converge (residual {sol.residual_norm:.3g})")
    return {}


def cmd_morse_index(cfg, out: Outputs):
    torus, grid = _space(cfg)
    params = _params(cfg)
    e = cfg["experiment"]
    u = _initial_field(e["state"], torus, grid, params.epsilon, cfg["seed"])
    spec = ac.morse_spectrum(u, params, k_max=int(e["k_max"]))
    res = {"index": spec.index, "lower_bound": spec.lower_bound, "eigenvalues": spec.eigenvalues}
    if e["state"]["type"] == "constant":
        res["closed_form"] = ac.constant_state_index(torus, grid, params, float(e["state"]["value"]))
    out.json("morse.json", res)
    return {}


def cmd_sweepout(cfg, out: Outputs):
    torus, grid = _space(cfg)
    e = cfg["experiment"]
    p, seed = int(e["p"]), cfg["seed"]
    cover = mm.ball_cover(torus, p, seed)
    row = mm.sweepout_max_energy(torus, grid, p, cfg["kernel"]["s"], int(e["sphere_samples"]), seed, cover=cover)
    member = mm.sweepout_member(torus, grid, cover, row.argmax)
    out.field("fields/argmax_member.bin", member.u)
    out.json("sweepout.json", {"p": p, "N": row.N, "r": row.r, "max_energy": row.max_energy, "scaled": row.scaled,
                               "argmax": row.argmax, "centers": cover.centers})
    return {}


def cmd_scaling(cfg, out: Outputs):
    torus, grid = _space(cfg)
    e = cfg["experiment"]
    rep = mm.scaling_experiment(torus, grid, e["p_range"], cfg["kernel"]["s"], int(e["sphere_samples"]), cfg["seed"],
                                e["epsilon"])
    rep.write(out.path("scaling.csv"), out.path("scaling.json"))
    return {"slope": rep.slope}


def cmd_eps_limit(cfg, out: Outputs):
    torus, grid = _space(cfg)
    e = cfg["experiment"]
    s = cfg["kernel"]["s"]
    rows = mm.epsilon_limit_experiment(torus, grid, int(e["p"]), s, e["eps_list"], cfg["seed"], e["sphere_samples"])
    out.csv("eps_limit.csv", ["epsilon", "sobolev", "potential", "per_s_threshold", "drift", "residual", "converged"],
            [(r.epsilon, r.sobolev, r.potential, r.per_s_threshold, r.drift, r.residual, r.converged) for r in rows])
    ok = [r for r in rows if r.converged and r.potential > 0]
    summary = {}
    if len(ok) >= 2:
        slope, err = ac.potential_decay_probe([r.epsilon for r in ok], [r.potential for r in ok])
        summary = {"potential_slope": slope, "potential_slope_stderr": err}
    out.json("eps_limit.json", summary)
    bad = [r.epsilon for r in rows if not r.converged]
    if bad:
        raise NumericalFailure(f"no convergence at eps = {bad}")
    return summary


def cmd_bv_density_probe(cfg, out: Outputs):
    torus, grid = _space(cfg)
    params = _params(cfg)
    e = cfg["experiment"]
    u0 = _initial_field(e["initial"], torus, grid, params.epsilon, cfg["seed"])
    sol = ac.newton_solve(u0, params)
    center = e["center"]
    if center is None:
        center = [L / 2 for L in torus.L]
        if e["initial"]["type"] == "stripe":
            center[int(e["initial"].get("axis", 0))] = e["initial"]["lo"]
    rows = [(R, ac.bv_probe(sol.u, center, R), ac.density_probe(sol.u, params, center, R)) for R in e["radii"]]
    out.csv("probe.csv", ["R", "bv", "density"], rows)
    if not sol.converged:
        raise NumericalFailure(f"solver did not converge (residual {sol.residual_norm:.3g})")
    return {}


HANDLERS = {
    "kernel-check": cmd_kernel_check,
    "seminorm": cmd_seminorm,
    "extension-check": cmd_extension_check,
    "monotonicity": cmd_monotonicity,
    "perimeter": cmd_perimeter,
    "nmc": cmd_nmc,
    "layer1d": cmd_layer1d,
    "solve-ac": cmd_solve_ac,
    "morse-index": cmd_morse_index,
    "sweepout": cmd_sweepout,
    "scaling": cmd_scaling,
    "eps-limit": cmd_eps_limit,
    "bv-density-probe": cmd_bv_density_probe,
}


# ---------------------------------------------------------------- run

def _write_manifest(out: Outputs, cfg: dict, wall: float, status: str, message: str = "") -> None:
    manifest = {
        "config": cfg,
        "seed": cfg["seed"],
        "versions": {"fraclab": __version__, "python": platform.python_version(), "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "wall_time_seconds": wall,
        "status": status,
        "message": message,
        "files": sorted(out.files),
    }
    with open(out.root / "manifest.json", "w") as fh:
        json.dump(_jsonable(manifest), fh, indent=2, sort_keys=True)
        fh.write("\n")


def run(config_path, seed: int | None = None, dry_run: bool = False, threads: int = 1, stream=None) -> int:
    """Execute one configured experiment; returns the exit code."""
    stream = sys.stdout if stream is None else stream
    try:
        with open(config_path) as fh:
            raw = json.load(fh)
        cfg = resolve_config(raw, seed)
    except (OSError, json.JSONDecodeError, ConfigError, TypeError, KeyError) as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_CONFIG
    if dry_run:
        print(json.dumps({"plan": cfg["command"], "resolved_config": cfg}, indent=2, sort_keys=True), file=stream)
        return EXIT_OK
    set_fft_workers(max(1, int(threads)))
    out = Outputs(Path(cfg["output_dir"]))
    out.root.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        summary = HANDLERS[cfg["command"]](cfg, out)
    except ConfigError as err:
        print(f"invalid config: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalFailure, np.linalg.LinAlgError, FloatingPointError, RuntimeError) as err:
        _write_manifest(out, cfg, time.perf_counter() - t0, "numerical_failure", str(err))
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    _write_manifest(out, cfg, time.perf_counter() - t0, "ok")
    if summary:
        print(json.dumps(_jsonable(summary), sort_keys=True), file=stream)
    return EXIT_OK


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="fraclab", description="Fractional Allen-Cahn and s-perimeter experiments.")
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--seed", type=int, default=None, help="override the config seed")
    ap.add_argument("--dry-run", action="store_true", help="validate and print the resolved plan")
    ap.add_argument("--threads", type=int, default=1, help="FFT worker threads (default 1)")
    args = ap.parse_args(argv)
    return run(args.config, args.seed, args.dry_run, args.threads)


if __name__ == "__main__":
    sys.exit(main())
