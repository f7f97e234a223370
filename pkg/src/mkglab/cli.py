"""Command-line entry point: ``mkglab <verb> [options]``.

Exit codes: 0 success, 1 usage or configuration error, 2 blow-up during a
run, 3 a check failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from fractions import Fraction

from .atlas import ProductEstimate, check_atlas
from .atlas.region import region_scan
from .dynamics import BlowupDetected, ConfigError, SimConfig, convergence_study, make_initial_data, simulate, write_monitor_csv
from .identities import run_identity_suite
from .spectral import dump_field

log = logging.getLogger("mkglab")

EXIT_OK, EXIT_USAGE, EXIT_BLOWUP, EXIT_CHECK = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- config ------------------------------------------------------------------


def load_config(path: str | None, overrides: argparse.Namespace) -> SimConfig:
    """Read a JSON config and apply ``--seed``, ``--n`` and ``--formulation``."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from None
        if not isinstance(raw, dict):
            raise ConfigError(f"{path}:1:1: config must be a JSON object")
    for key in ("seed", "n", "formulation"):
        val = getattr(overrides, key, None)
        if val is not None:
            raw[key] = val
    try:
        return SimConfig.from_dict(raw)
    except ConfigError as exc:
        where = f"{path}: " if path else ""
        raise ConfigError(f"{where}{exc}") from None
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _dump_state(state, out: str, tag: str) -> None:
    for name, f in (("phi", state.phi), ("phi_t", state.phi_t), ("a1", state.a.x1),
                    ("a2", state.a.x2), ("a1_t", state.a_t.x1), ("a2_t", state.a_t.x2),
                    ("a0", state.a0)):
        dump_field(f, os.path.join(out, f"{tag}_{name}.bin"), name=name)


# -- verbs -------------------------------------------------------------------


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, args)
    os.makedirs(args.out, exist_ok=True)
    csv_path = os.path.join(args.out, "monitors.csv")
    initial = make_initial_data(cfg)
    if cfg.snapshots:
        _dump_state(initial, args.out, "initial")
    try:
        final, rows = simulate(cfg, initial)
    except BlowupDetected as exc:
        write_monitor_csv(exc.monitors, csv_path)
        print(f"blow-up: {exc}", file=sys.stderr)
        if exc.monitors:
            last = exc.monitors[-1]
            print(f"last recorded monitors at t={last.t:.6g}: energy={last.energy:.6g} "
                  f"charge={last.charge:.3e}", file=sys.stderr)
        return EXIT_BLOWUP
    write_monitor_csv(rows, csv_path)
    if cfg.snapshots:
        _dump_state(final, args.out, "final")
    last = rows[-1]
    print(f"t={last.t:.6g} steps={cfg.steps()[0]} energy={last.energy:.12g} charge={last.charge:.3e} "
          f"gauge_div={last.gauge_div:.3e} a0_residual={last.a0_residual:.3e}")
    print(f"wrote {csv_path}")
    return EXIT_OK


def cmd_check_estimate(args) -> int:
    try:
        est = ProductEstimate.parse(args.exponents, label="estimate")
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    names = ("s0", "s1", "s2", "b0", "b1", "b2")
    print(" ".join(f"{k}={v}" for k, v in zip(names, est.exponents())))
    report = check_atlas(est)
    print(report.table())
    return EXIT_OK if report.passed else EXIT_CHECK


def cmd_region(args) -> int:
    try:
        step = Fraction(args.step)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"invalid step {args.step!r}") from None
    try:
        result = region_scan(step, args.out)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(result.summary())
    print(f"wrote {os.path.join(args.out, 'region.csv')} and {os.path.join(args.out, 'region.svg')}")
    return EXIT_OK if result.ok else EXIT_CHECK


def cmd_identities(args) -> int:
    n = 64 if args.n is None else args.n
    seed = 0 if args.seed is None else args.seed
    try:
        suite = run_identity_suite(seed=seed, n=n, states=args.states,
                                   negative_control=args.negative_control)
    except (ValueError, ConfigError) as exc:
        raise UsageError(str(exc)) from None
    print(f"identity suite: n={n} seed={seed} states={args.states}")
    print(suite.report())
    return EXIT_OK if suite.passed else EXIT_CHECK


def cmd_convergence(args) -> int:
    cfg = load_config(args.config, args)
    if args.dt is not None:
        cfg = replace(cfg, dt=args.dt)
    try:
        study = convergence_study(cfg, refinements=args.refinements)
    except BlowupDetected as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print("dt            charge_drift  energy_drift  gauge_div     a0_residual")
    for i, dt in enumerate(study.dts):
        print(f"{dt:<13.6g} {study.charge_drift[i]:<13.3e} {study.energy_drift[i]:<13.3e} "
              f"{study.gauge_div[i]:<13.3e} {study.a0_residual[i]:.3e}")
    for name, vals in study.orders.items():
        print(f"observed order {name:<6} " + " ".join(f"{v:.3f}" for v in vals))
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, "convergence.csv")
        study.write_csv(path)
        print(f"wrote {path}")
    return EXIT_OK


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mkglab", description="Maxwell-Klein-Gordon (Coulomb gauge) laboratory.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def sim_overrides(sp):
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--n", type=int, help="override the grid size")
        sp.add_argument("--formulation", choices=("direct", "nullform"), help="override the formulation")

    sp = sub.add_parser("simulate", help="run one simulation and write monitors.csv")
    sp.add_argument("--config", required=True, help="JSON file with simulation settings")
    sp.add_argument("--out", default=".", help="output directory")
    sim_overrides(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check-estimate", help="check one bilinear product estimate exactly")
    sp.add_argument("exponents", nargs=6, metavar="X",
                    help="s0 s1 s2 b0 b1 b2 as p/q literals with optional +m eps tail")
    sp.set_defaults(func=cmd_check_estimate)

    sp = sub.add_parser("region", help="scan the (s, s') square and compare with the closed form")
    sp.add_argument("--step", default="1/64", help="grid step: 1/32, 1/64 or 1/128")
    sp.add_argument("--out", default=".", help="output directory for region.csv and region.svg")
    sp.set_defaults(func=cmd_region)

    sp = sub.add_parser("identities", help="run the null-form identities and operator checks")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--states", type=int, default=10, help="number of random states")
    sp.add_argument("--negative-control", action="store_true",
                    help="add a gradient to A so the transport identity must fail")
    sp.set_defaults(func=cmd_identities)

    sp = sub.add_parser("convergence", help="time-step refinement study")
    sp.add_argument("--config", help="JSON file with simulation settings")
    sp.add_argument("--out", help="directory for convergence.csv")
    sp.add_argument("--dt", type=float, help="coarsest time step")
    sp.add_argument("--refinements", type=int, default=3)
    sim_overrides(sp)
    sp.set_defaults(func=cmd_convergence)
    return p


def _protect_literals(argv: list[str]) -> list[str]:
    # "-1/2" would otherwise be read as an option.
    if "check-estimate" in argv:
        i = argv.index("check-estimate")
        if "--" not in argv[i + 1:]:
            return argv[: i + 1] + ["--"] + argv[i + 1:]
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_protect_literals(argv))
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
