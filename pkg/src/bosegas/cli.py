"""Batch front end: parameter sweeps, verification, CSV/JSON emission.

Every output file starts with comment lines echoing the resolved
configuration and the package version, followed by a header row.  Numbers
are written with shortest round-trip precision, rows in input order, LF
line endings, so identical configurations produce byte-identical files.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 numerical non-convergence.
"""

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .condensate import (
    Region,
    critical_density_trap,
    trap_box_number,
    trap_number_bound,
)
from .equilibrium import (
    ThermalParams,
    Verdict,
    clustering_check,
    kms_check,
    thermodynamic_limit_scan,
)
from .fock_oracle import TruncatedFock, regularized_number_expectation
from .quadrature import QuadratureError
from .single_particle import (
    DomainStatus,
    FreeLaplacian,
    HarmonicTrap,
    LimitKind,
    basis_function,
    domain_classify,
    gaussian,
)
from .verify import run_checks

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(ValueError):
    pass


DEFAULTS = {
    "density-profile": {
        "dim": 3, "beta": 1.0, "x_max": 2.0, "x_step": 0.25, "shift_weight": 0.0,
    },
    "phase-scan": {
        "dim": 1, "beta": 1.0, "length": 1.0, "mu_values": [0.0, 0.4, 0.7, 0.9, 0.97],
        "include_boundary": True, "eps_reg": 0.1, "n_max": 400, "box_half_width": 1.0,
    },
    "limit-scan": {
        "dim": 1, "beta": 1.0, "mu": -1.0, "t": 0.0, "lengths": [2.0, 4.0, 8.0, 16.0, 32.0],
        "probe_scale": 1.0, "tol": 1e-3,
    },
    "kms-check": {
        "dim": 1, "beta": 1.0, "mu": 0.0, "model": "trap", "length": 1.0,
        "t_grid": [0.0, 0.5, 1.0], "probe": "eigen", "tol": 1e-8,
    },
    "cluster-check": {
        "dim": 3, "beta": 1.0, "mu": -0.5, "model": "free", "length": 1.0,
        "t_list": [0.0, 5.0, 20.0, 80.0], "tol": 1e-3,
    },
    "domain-classify": {
        "dim": 1, "length": 1.0, "limit": "free_zero_mode",
        "probes": ["gaussian", "first_excited"],
    },
    "verify": {"only": [], "inject_symplectic_sign_flip": False},
}


def _load_config(subcommand, args):
    config = dict(DEFAULTS[subcommand])
    if args.config:
        try:
            with open(args.config) as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as ex:
            raise ConfigError(f"cannot read config {args.config}: {ex}")
        unknown = set(loaded) - set(config)
        if unknown:
            raise ConfigError(f"unknown config keys for {subcommand}: {sorted(unknown)}")
        config.update(loaded)
    for key, value in vars(args).items():
        if key in config and value is not None:
            config[key] = value
    if args.tol is not None and "tol" in config:
        config["tol"] = args.tol
    return config


def _plain(value):
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        return complex(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def _fmt(value):
    value = _plain(value)
    if isinstance(value, (float, complex)):
        return repr(value)
    text = str(value)
    if "," in text or '"' in text or "\n" in text:
        text = '"' + text.replace('"', '""') + '"'
    return text


def _write_table(path, subcommand, config, columns, rows, fmt, extra_comments=()):
    lines = [f"# bosegas {__version__} {subcommand}"]
    for key in sorted(config):
        lines.append(f"# {key} = {json.dumps(config[key])}")
    lines.extend(f"# {c}" for c in extra_comments)
    if fmt == "csv":
        lines.append(",".join(columns))
        for row in rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    else:
        payload = {
            "tool": f"bosegas {__version__}",
            "subcommand": subcommand,
            "config": config,
            "comments": list(extra_comments),
            "columns": list(columns),
            "rows": [[_plain(v) for v in row] for row in rows],
        }
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def _pmap(fn, items, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, items))
    return [fn(item) for item in items]


# -- subcommand implementations ----------------------------------------------


def _density_point(task):
    xv, dim, beta, shift_weight = task
    x = [xv] + [0.0] * (dim - 1)
    rho = critical_density_trap(beta, dim, x)
    return tuple(x) + (rho, rho + shift_weight)


def cmd_density_profile(config, args):
    dim, beta = int(config["dim"]), float(config["beta"])
    step = float(config["x_step"])
    if step <= 0 or config["x_max"] < 0 or beta <= 0 or dim < 1:
        raise ConfigError("x_step, beta must be positive; x_max non-negative")
    w = float(config["shift_weight"])
    if w < 0:
        raise ConfigError("shift_weight must be non-negative")
    n_pts = int(np.floor(config["x_max"] / step + 1e-9)) + 1
    grid = [round(i * step, 12) for i in range(n_pts)]
    rows = _pmap(_density_point, [(xv, dim, beta, w) for xv in grid], args.jobs)
    columns = [f"x{i + 1}" for i in range(dim)] + ["density_thermal", "density_with_shift"]
    _write_table(args.out, "density-profile", config, columns, rows, args.format)
    return EXIT_OK


def cmd_phase_scan(config, args):
    dim, beta = int(config["dim"]), float(config["beta"])
    length = float(config["length"])
    trap = HarmonicTrap(length, dim)
    ground = trap.ground_energy
    mu_values = [float(m) for m in config["mu_values"]]
    if any(m >= ground for m in mu_values):
        raise ConfigError(f"interior mu values must stay below the ground energy {ground}")
    half = float(config["box_half_width"])
    region = Region((-half,) * dim, (half,) * dim)
    eps_reg = float(config["eps_reg"])
    n_max = int(config["n_max"])
    probe_excited_energy = trap.level_energy(1)

    rows = []
    for mu in sorted(mu_values):
        occupation = 1.0 / np.expm1(beta * (ground - mu))
        occupation_excited = 1.0 / np.expm1(beta * (probe_excited_energy - mu))
        space = TruncatedFock(1, n_max, (ground,))
        reg_number = regularized_number_expectation(space, beta, mu, np.array([1.0 + 0j]), eps_reg)
        box = trap_box_number(beta, mu, trap, region)
        rows.append((mu, occupation, occupation_excited, reg_number, box,
                     "regular", "regular"))
    if config["include_boundary"]:
        box = trap_box_number(beta, None, trap, region, boundary=True)
        occupation_excited = 1.0 / np.expm1(beta * (probe_excited_energy - ground))
        rows.append(("boundary", "divergent", occupation_excited, "divergent", box,
                     "divergent", "regular"))
    columns = ["mu", "occupation_lowest", "occupation_excited", "regularized_number",
               "box_number", "probe_ground", "probe_excited"]
    _write_table(args.out, "phase-scan", config, columns, rows, args.format)
    return EXIT_OK


def cmd_limit_scan(config, args):
    dim = int(config["dim"])
    probe = gaussian(dim, float(config["probe_scale"]))
    mu = float(config["mu"])
    if mu >= 0:
        raise ConfigError("limit-scan requires mu < 0")
    report = thermodynamic_limit_scan(
        float(config["beta"]), mu, probe, probe, float(config["t"]),
        [float(L) for L in config["lengths"]], tol=float(config["tol"]))
    free_value = report.extra["free_value"]
    rows = []
    for (length, dev), value in zip(report.entries, report.extra["trap_values"]):
        rows.append((length, value.real, value.imag, free_value.real, free_value.imag, dev))
    columns = ["L", "trap_re", "trap_im", "free_re", "free_im", "deviation"]
    _write_table(args.out, "limit-scan", config, columns, rows, args.format,
                 extra_comments=[f"verdict = {report.verdict.value}"])
    return EXIT_OK


def cmd_kms_check(config, args):
    dim, beta, mu = int(config["dim"]), float(config["beta"]), float(config["mu"])
    t_grid = [float(t) for t in config["t_grid"]]
    if config["model"] == "trap":
        model = HarmonicTrap(float(config["length"]), dim)
    elif config["model"] == "free":
        model = FreeLaplacian(dim)
    else:
        raise ConfigError("model must be 'trap' or 'free'")
    if config["probe"] == "eigen":
        if not isinstance(model, HarmonicTrap):
            raise ConfigError("eigen probes need the trap model")
        f = model.eigenfunction((1,) + (0,) * (dim - 1))
        g = f
    elif config["probe"] == "gaussian":
        f = gaussian(dim, 1.0)
        g = f
    else:
        raise ConfigError("probe must be 'eigen' or 'gaussian'")
    rows = []
    worst = 0.0
    for t in t_grid:
        dev = kms_check(beta, mu, model, f, g, [t])
        worst = max(worst, dev)
        rows.append((t, dev))
    verdict = "pass" if worst <= float(config["tol"]) else "fail"
    _write_table(args.out, "kms-check", config, ["t", "deviation"], rows, args.format,
                 extra_comments=[f"max_deviation = {worst!r}", f"verdict = {verdict}"])
    return EXIT_OK if verdict == "pass" else EXIT_VERIFY_FAILED


def cmd_cluster_check(config, args):
    dim, beta, mu = int(config["dim"]), float(config["beta"]), float(config["mu"])
    if config["model"] == "trap":
        model = HarmonicTrap(float(config["length"]), dim)
    else:
        model = FreeLaplacian(dim)
    probe = gaussian(dim, 1.0)
    report = clustering_check(beta, mu, model, probe, probe,
                              [float(t) for t in config["t_list"]], tol=float(config["tol"]))
    rows = []
    gaps = dict(report.extra.get("factorization_gaps", []))
    for t, modulus in report.entries:
        rows.append((t, modulus, gaps.get(t, "")))
    comments = [f"verdict = {report.verdict.value}"]
    if report.note:
        comments.append(f"note = {report.note}")
    _write_table(args.out, "cluster-check", config,
                 ["t", "two_point_modulus", "factorization_gap"], rows, args.format,
                 extra_comments=comments)
    return EXIT_OK


def cmd_domain_classify(config, args):
    dim = int(config["dim"])
    length = float(config["length"])
    kind = {"trap_ground": LimitKind.TRAP_GROUND,
            "free_zero_mode": LimitKind.FREE_ZERO_MODE}.get(config["limit"])
    if kind is None:
        raise ConfigError("limit must be trap_ground or free_zero_mode")
    model = HarmonicTrap(length, dim) if kind is LimitKind.TRAP_GROUND else FreeLaplacian(dim)
    probe_map = {
        "gaussian": gaussian(dim, length if kind is LimitKind.TRAP_GROUND else 1.0),
        "ground": gaussian(dim, length),
        "first_excited": basis_function(
            dim, length if kind is LimitKind.TRAP_GROUND else 1.0, (1,) + (0,) * (dim - 1)),
    }
    rows = []
    for name in config["probes"]:
        if name not in probe_map:
            raise ConfigError(f"unknown probe {name!r}; choose from {sorted(probe_map)}")
        verdict = domain_classify(model, kind, probe_map[name])
        rows.append((name, verdict.status.value, verdict.diagnostic))
    _write_table(args.out, "domain-classify", config,
                 ["probe", "status", "diagnostic"], rows, args.format)
    return EXIT_OK


def cmd_verify(config, args):
    only = config["only"] or None
    try:
        results = run_checks(only=only,
                             inject_symplectic_sign_flip=config["inject_symplectic_sign_flip"])
    except KeyError as ex:
        raise ConfigError(str(ex))
    rows = [(r.name, "pass" if r.passed else "fail", r.measured, r.tolerance, r.detail)
            for r in results]
    all_passed = all(r.passed for r in results)
    _write_table(args.out, "verify", config,
                 ["check", "status", "measured", "tolerance", "detail"], rows, args.format,
                 extra_comments=[f"all_passed = {str(all_passed).lower()}"])
    return EXIT_OK if all_passed else EXIT_VERIFY_FAILED


COMMANDS = {
    "density-profile": cmd_density_profile,
    "phase-scan": cmd_phase_scan,
    "limit-scan": cmd_limit_scan,
    "kms-check": cmd_kms_check,
    "cluster-check": cmd_cluster_check,
    "domain-classify": cmd_domain_classify,
    "verify": cmd_verify,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="bosegas",
        description="Thermal Bose-gas sweeps, limits and verification")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with subcommand parameters")
        p.add_argument("--out", default="-", help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--tol", type=float, default=None)
        if name == "verify":
            p.add_argument("--only", action="append", default=None,
                           help="run only the named check (repeatable)")
            p.add_argument("--inject-symplectic-sign-flip", action="store_true",
                           dest="inject_symplectic_sign_flip",
                           help="mutation-test hook: corrupt the symplectic sign")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = _load_config(args.subcommand, args)
        return COMMANDS[args.subcommand](config, args)
    except ConfigError as ex:
        print(f"config error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except QuadratureError as ex:
        print(f"numerical non-convergence: {ex}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
