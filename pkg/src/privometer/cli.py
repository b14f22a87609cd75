"""
privometer command line.

Usage:
    privometer analyze --scenario consensus --N 4
    privometer analyze --scenario localization --N0 2 --D 10
    privometer simulate --N 5 --seed 7 --out transcript.json
    privometer prop-test --trials 1000
    privometer compare --reference-rho "4,0.875,2" --out grid.csv

Exit status: 0 on match/pass, 1 on usage or configuration errors,
2 when a computed result disagrees with its expectation.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

from .privacy import Ordering, PrivacyIndex, compare
from .proptest import PROPERTIES, run_property_suite
from .scenarios import (
    LOCALIZATION_MODES, SCENARIOS, ScenarioError, get_scenario,
    run_scenario,
)
from .uncertainty_sets import TAU_GEO

EXIT_OK, EXIT_CONFIG, EXIT_MISMATCH = 0, 1, 2

# name -> (parser, default); flags, config files and defaults all go through here
FIELDS = {
    "scenario": (str, "consensus"),
    "seed": (int, None),
    "trials": (int, 1000),
    "out": (str, None),
    "tol_geo": (float, TAU_GEO),
    "reference_rho": (str, None),
    "N": (int, None),
    "N0": (int, None),
    "D": (float, None),
    "mode": (str, None),
    "r": (int, None),
    "dim": (int, 7),
    "inject_bug": (str, None),
}


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def read_config(path):
    """Flat ``key=value`` lines; blank lines and ``#`` comments are skipped."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in FIELDS:
            raise ConfigError(f"{path}:{lineno}: unknown field {key!r}")
        values[key] = value
    return values


def resolve(args):
    """Merge defaults, config file, environment and flags (flags win)."""
    file_values = read_config(args.config) if args.config else {}
    cfg = {}
    for key, (conv, default) in FIELDS.items():
        raw = getattr(args, key, None)
        if raw is None and key in file_values:
            raw = file_values[key]
        if raw is None and key == "seed" and os.environ.get("PRIVOMETER_SEED"):
            raw = os.environ["PRIVOMETER_SEED"]
        if raw is None:
            cfg[key] = default
            continue
        try:
            cfg[key] = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"invalid value for {key}: {raw!r}") from exc
    if cfg["seed"] is None:
        cfg["seed"] = 0
    if not (cfg["tol_geo"] > 0 and math.isfinite(cfg["tol_geo"])):
        raise ConfigError("tolerances must be positive")
    if cfg["trials"] < 1:
        raise ConfigError("trials must be positive")
    if cfg["scenario"] not in SCENARIOS:
        raise ConfigError(f"unknown scenario {cfg['scenario']!r}")
    if cfg["mode"] is not None and cfg["mode"] not in LOCALIZATION_MODES:
        raise ConfigError(f"unknown localization mode {cfg['mode']!r}")
    return cfg


def scenario_from_config(cfg):
    name = cfg["scenario"]
    keys = {"localization": ("N0", "D", "mode"), "resource": ("N",), "consensus": ("N", "r")}[name]
    params = {k: cfg[k] for k in keys if cfg[k] is not None}
    for k in ("N", "N0", "D", "mode", "r"):
        if cfg[k] is not None and k not in keys:
            raise ConfigError(f"{k} does not apply to the {name} scenario")
    try:
        return get_scenario(name, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- commands -----------------------------------------------------------------

def cmd_analyze(cfg):
    scenario = scenario_from_config(cfg)
    try:
        report = run_scenario(scenario, cfg["seed"], tol=cfg["tol_geo"])
    except ScenarioError as exc:
        print(f"analyze failed at stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_MISMATCH
    _emit(report.to_json(indent=2) + "\n", cfg["out"])
    print(f"{report.scenario} [{report.case_label}] rho={report.rho} "
          f"expected={report.expected_rho} match={report.match}", file=sys.stderr)
    return EXIT_OK if report.match else EXIT_MISMATCH


def cmd_simulate(cfg):
    if cfg["scenario"] != "consensus":
        raise ConfigError("simulate runs the consensus protocol only")
    scenario = scenario_from_config(cfg)
    inst = scenario.generate(cfg["seed"])
    run = inst.extra["run"]
    res = run.result
    doc = {
        "N": scenario.N, "seed": cfg["seed"],
        "c": run.c.tolist(), "lambda0": run.lambda0.tolist(),
        "converged": bool(res.converged), "iterations": int(res.iterations),
        "residual": float(res.residual), "z": res.z.tolist(),
        "transcript": run.transcript.to_dict(),
    }
    _emit(json.dumps(doc, allow_nan=False, indent=2) + "\n", cfg["out"])
    print(f"consensus N={scenario.N}: {res.iterations} iterations, "
          f"converged={res.converged}", file=sys.stderr)
    return EXIT_OK if res.converged else EXIT_MISMATCH


def cmd_proptest(cfg):
    bug = cfg["inject_bug"]
    if bug not in (None, "translate-sign"):
        raise ConfigError(f"unknown bug injection {bug!r}")
    results = run_property_suite(cfg["trials"], seed=cfg["seed"], inject_bug=bug,
                                 tol=cfg["tol_geo"])
    for name in PROPERTIES:
        r = results[name]
        print(f"property {name}: {r.passed}/{r.trials} passed" +
              ("" if r.ok else f"  e.g. {r.failures[0]}"))
    if cfg["out"]:
        with open(cfg["out"], "w") as fh:
            json.dump({k: v.to_dict() for k, v in results.items()}, fh, indent=2)
    return EXIT_OK if all(r.ok for r in results.values()) else EXIT_MISMATCH


_LABELS = {Ordering.GREATER: "better", Ordering.LESS: "worse",
           Ordering.EQUAL: "equal", Ordering.INCOMPARABLE: "incomparable"}


def comparison_grid(reference, dim=7):
    """
    ``(a, nu, label)`` rows over ``a = 0..dim`` and ``nu = 1 - 1/k``
    (``k = 1..16``), ``nu = 1`` and the reference's own ``nu``, holding
    ``d`` at the reference value.  Labels say how each point ranks
    against the reference: more private is ``better``.
    """
    nus = {1.0 - 1.0 / k for k in range(1, 17)} | {1.0, reference.nu}
    rows = []
    for a in range(dim + 1):
        for nu in sorted(nus):
            point = PrivacyIndex(reference.d, nu, a)
            rows.append((a, nu, _LABELS[compare(point, reference)]))
    return rows


def cmd_compare(cfg):
    if cfg["reference_rho"] is None:
        raise ConfigError("compare needs --reference-rho d,nu,a")
    try:
        ref = PrivacyIndex.parse(cfg["reference_rho"])
    except ValueError as exc:
        raise ConfigError(f"malformed reference: {exc}") from exc
    if cfg["dim"] < 0:
        raise ConfigError("dim must be nonnegative")
    lines = ["a,nu,label"] + [f"{a},{nu:.6f},{label}"
                              for a, nu, label in comparison_grid(ref, cfg["dim"])]
    _emit("\n".join(lines) + "\n", cfg["out"])
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "simulate": cmd_simulate,
            "prop-test": cmd_proptest, "compare": cmd_compare}


def build_parser():
    parser = _Parser(prog="privometer", description="Privacy index toolkit.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key=value file; flags override it")
    common.add_argument("--seed", help="random seed (falls back to $PRIVOMETER_SEED)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--tol-geo", dest="tol_geo", help="geometric tolerance")

    scen = _Parser(add_help=False)
    scen.add_argument("--scenario", choices=sorted(SCENARIOS))
    scen.add_argument("--N", help="number of subsystems / users")
    scen.add_argument("--N0", help="number of beacons")
    scen.add_argument("--D", help="area diameter")
    scen.add_argument("--mode", help="beacon placement: " + ", ".join(LOCALIZATION_MODES))
    scen.add_argument("--r", help="number of colluders")

    sub.add_parser("analyze", parents=[common, scen],
                   help="run a scenario and compare rho with its expected value")
    sub.add_parser("simulate", parents=[common, scen],
                   help="run the consensus protocol and dump its transcript")
    p = sub.add_parser("prop-test", parents=[common], help="randomized property suites")
    p.add_argument("--trials", help="trials per property (default 1000)")
    p.add_argument("--inject-bug", dest="inject_bug", choices=["translate-sign"],
                   help="deliberately break translate to check the suites fail")
    p = sub.add_parser("compare", parents=[common],
                       help="label an (a, nu) grid against a reference index")
    p.add_argument("--reference-rho", dest="reference_rho", help='"d,nu,a"; d may be inf')
    p.add_argument("--dim", help="largest affine dimension in the grid (default 7)")
    return parser


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        # argparse exits on --help and on usage errors; report the status
        return exc.code if isinstance(exc.code, int) else EXIT_CONFIG
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"privometer: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
