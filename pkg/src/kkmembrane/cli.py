"""Command-line entry point.

Subcommands::

    run    --config PATH --out DIR
    verify --suite all|elliptic|reactions|parabolic|monitors|campaigns [--out DIR]
    sweep  --param n|h|dt|k --values V1,V2,... --config PATH --out DIR
    steady --config PATH

Exit status is 0 iff every enabled assertion passes; 2 flags a bad
configuration or usage error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .errors import ConfigError, KKMembraneError
from .experiments import (SUITES, Campaign, Check, dt_study, k_sweep, mesh_study,
                          regularization_sweep, verify_suite)
from .monitors import key_estimate_check, truncation_energy_check
from .parabolic import config_from_dict, membrane_flux_and_jump, simulate, steady_profile, steady_state

SCHEMA_VERSION = 1


class ConfigParseError(ConfigError):
    """Configuration error with the file position attached."""

    def __init__(self, message, path=(), line=None):
        super().__init__(message, path)
        self.line = line


# -- line-aware config parsing ------------------------------------------------

def _key_lines(text):
    """Map every key path in a JSON document to the line where it starts."""
    lines = {}
    pos = 0
    n = len(text)

    def line_of(p):
        return text.count("\n", 0, p) + 1

    def skip_ws(p):
        while p < n and text[p] in " \t\r\n":
            p += 1
        return p

    def string_end(p):
        p += 1
        while text[p] != '"':
            p += 2 if text[p] == "\\" else 1
        return p + 1

    def value(p, path):
        p = skip_ws(p)
        lines.setdefault(path, line_of(p))
        c = text[p]
        if c == "{":
            p = skip_ws(p + 1)
            if text[p] == "}":
                return p + 1
            while True:
                p = skip_ws(p)
                end = string_end(p)
                key = json.loads(text[p:end])
                lines[path + (key,)] = line_of(p)
                p = skip_ws(end) + 1  # colon
                p = value(p, path + (key,))
                p = skip_ws(p)
                if text[p] == ",":
                    p += 1
                    continue
                return p + 1
        if c == "[":
            p = skip_ws(p + 1)
            if text[p] == "]":
                return p + 1
            i = 0
            while True:
                p = value(p, path + (i,))
                p = skip_ws(p)
                i += 1
                if text[p] == ",":
                    p += 1
                    continue
                return p + 1
        if c == '"':
            return string_end(p)
        while p < n and text[p] not in ",]}\n\r\t ":
            p += 1
        return p

    value(pos, ())
    return lines


def _line_for(lines, path):
    path = tuple(path)
    while path and path not in lines:
        path = path[:-1]
    return lines.get(path, 1)


def parse_config_text(text, source="<config>"):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigParseError(f"{source}:{e.lineno}: invalid JSON: {e.msg}", line=e.lineno)
    try:
        return config_from_dict(data)
    except ConfigError as e:
        line = _line_for(_key_lines(text), e.path)
        raise ConfigParseError(f"{source}:{line}: {e}", e.path, line)
    except KKMembraneError as e:
        raise ConfigParseError(f"{source}:1: {e}", (), 1)


def parse_config(path):
    """Read and validate a JSON run configuration.

    Errors carry ``file:line`` of the offending key.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ConfigParseError(f"{path}: cannot read: {e.strerror}")
    return parse_config_text(text, str(path))


# -- output -------------------------------------------------------------------

def write_trace(path, records):
    with open(path, "w") as fh:
        fh.write(f"# schema={SCHEMA_VERSION}\n")
        if not records:
            return
        fh.write(",".join(records[0].columns()) + "\n")
        for r in records:
            fh.write(",".join(f"{float(v):.15e}" for v in r.values()) + "\n")


def write_echo(path, config):
    Path(path).write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def run_checks(config, result):
    """Verdicts for a finished run (positivity, flux balance and the
    monitors enabled in the configuration)."""
    checks = []
    if not result.ok:
        checks.append(Check("run completed", False, result.error))
    st = result.state
    checks.append(Check("nonnegativity", st.min_value >= -config.positivity_tol,
                        f"min u = {st.min_value:.3e}"))
    checks.append(Check("per-side mass budgets balance", st.budget_max <= 1e-12,
                        f"max residual {st.budget_max:.3e} <= 1e-12"))
    traj = result.trajectory
    if traj is None or len(traj.times) < 2:
        return checks
    if config.monitors.key_estimate:
        rep = key_estimate_check(traj)
        checks.append(Check("key estimate E(t) bound", rep.passed_energy, rep.lines()[0]))
        checks.append(Check("key estimate space-time L2 <= C3", rep.passed_l2, rep.lines()[1]))
    for b in config.monitors.truncation_levels:
        rep = truncation_energy_check(traj, b, species=config.monitors.truncation_species)
        checks.append(Check(f"truncation energy b={b:g}", rep.passed, rep.line()))
    return checks


# -- subcommands --------------------------------------------------------------

def cmd_run(args):
    config = parse_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_echo(out / "config.echo", config)
    result = simulate(config)
    write_trace(out / "trace.csv", result.records)
    camp = Campaign("run", [], run_checks(config, result))
    (out / "summary.txt").write_text(camp.summary())
    print(camp.summary(), end="")
    return 0 if camp.passed else 1


def cmd_verify(args):
    camp = verify_suite(args.suite)
    print(camp.summary(), end="")
    if args.out:
        camp.write(args.out)
    return 0 if camp.passed else 1


def _values(text, kind):
    try:
        vals = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ConfigParseError(f"--values: cannot parse {text!r}")
    if not vals:
        raise ConfigParseError("--values is empty")
    return vals


def cmd_sweep(args):
    config = parse_config(args.config)
    if args.param == "n":
        camp, _ = regularization_sweep(config, _values(args.values, int))
    elif args.param == "h":
        camp, _ = mesh_study(config, _values(args.values, int))
    elif args.param == "dt":
        camp, _ = dt_study(config, _values(args.values, float))
    else:
        camp = k_sweep(config, _values(args.values, float))
    out = Path(args.out)
    camp.write(out)
    write_echo(out / "config.echo", config)
    print(camp.summary(), end="")
    return 0 if camp.passed else 1


def cmd_steady(args):
    config = parse_config(args.config)
    if config.mesh.dim != 1:
        raise ConfigParseError(f"{args.config}: steady needs a 1D mesh", ("mesh", "dim"))
    a, c = config.boundary_values or (1.0, 0.0)
    sp = config.species[0]
    mesh = config.mesh.build()
    u, op = steady_state(mesh, sp.D, sp.k, a, c)
    exact = steady_profile(mesh, sp.D, sp.k, a, c)
    J, jump = membrane_flux_and_jump(op, u)
    err = float(np.max(np.abs(u - exact(mesh.centers[:, 0]))))
    checks = [Check("flux", abs(J - exact.flux) <= 1e-10, f"J = {J:.15e} (exact {exact.flux:.15e})"),
              Check("jump", abs(jump - exact.jump) <= 1e-10,
                    f"[u] = {jump:.15e} (exact {exact.jump:.15e})"),
              Check("profile", err <= 1e-10, f"max |u - u_exact| = {err:.3e}")]
    camp = Campaign("steady", [], checks)
    print(camp.summary(), end="")
    return 0 if camp.passed else 1


def build_parser():
    p = argparse.ArgumentParser(prog="kkmembrane",
                                description="Membrane reaction-diffusion simulator and verification harness")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one simulation")
    r.add_argument("--config", required=True)
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_run)
    v = sub.add_parser("verify", help="run a verification suite")
    v.add_argument("--suite", default="all", choices=("all",) + SUITES)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    s = sub.add_parser("sweep", help="parameter sweep")
    s.add_argument("--param", required=True, choices=("n", "h", "dt", "k"))
    s.add_argument("--values", required=True, help="comma-separated list")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)
    st = sub.add_parser("steady", help="steady membrane fixture against the closed form")
    st.add_argument("--config", required=True)
    st.set_defaults(func=cmd_steady)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except KKMembraneError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
