"""Command line entry point.

``ncdg solve run.ini`` runs whatever scenario the file names; the scenario
subcommands start from built-in defaults.  Exit codes: 0 success, 2
configuration error, 3 numerical blow-up.
"""

import argparse
import logging
import sys

from .acoustic_dg import NonFiniteStateError
from .config import SCENARIOS, ConfigError, RunConfig
from .mesh import MeshConfigurationError
from .nci_coupling import NciError
from .scenarios import NumericalBlowUp, default_config, output_directory, run_scenario

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3


def _parser():
    ap = argparse.ArgumentParser(prog="ncdg", description="Non-conforming DG acoustics runs.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--override", "-o", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value, e.g. degree=2 or material.inner.c=3")
        p.add_argument("--output", help="output directory (else $NCDG_OUTPUT_DIR or config)")

    p = sub.add_parser("solve", help="run the scenario described by a config file")
    p.add_argument("config")
    common(p)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="start from this file instead of the defaults")
        common(p)
    p = sub.add_parser("show-config", help="print the default config of a scenario")
    p.add_argument("scenario", choices=SCENARIOS)
    return ap


def _fmt(v):
    return "-" if v is None else f"{v:.4e}" if isinstance(v, float) else str(v)


def _report(cfg, result):
    """Print a short summary; return True when some run blew up unexpectedly."""
    if cfg.scenario == "membrane-convergence":
        for (k, reg, fld), rates in result.rates.items():
            print(f"k={k} {reg:6s} eps_{fld}: rates " + " ".join(f"{r:.2f}" for r in rates))
        return bool(result.failed())
    if cfg.scenario == "instability":
        for h in result:
            status = "stable" if h.blowup_time is None else f"blow-up at t={h.blowup_time:.4g}"
            print(f"{h.coupling:6s} k={h.k}: E/E0 final {h.ratios()[-1]:.6f}, "
                  f"max {h.ratios().max():.4g}, {status}")
        return False
    if cfg.scenario == "overlap":
        for row in result:
            print(f"{row['variant']:8s} k={row['k']} dofs={row['dofs']}: eps={_fmt(row['eps'])} "
                  f"({row['status']})")
        return any(row["status"] != "ok" for row in result)
    if cfg.scenario == "heterogeneous":
        print("dofs: " + ", ".join(f"{k}={v}" for k, v in result.dofs.items()))
        print(f"dof reduction vs fine: {_fmt(result.dof_reduction)}")
        print(f"max deviation nci vs fine: {_fmt(result.max_deviation)} of peak; "
              f"coarse vs fine: {_fmt(result.coarse_deviation)}")
        if result.measured_R is not None:
            print(f"R measured {result.measured_R:.4f} expected {result.expected_R:.4f}; "
                  f"T measured {result.measured_T:.4f} expected {result.expected_T:.4f}")
        return False
    print(f"max |mortar - conforming| = {result:.3e}")
    return False


def main(argv=None):
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "show-config":
            print(default_config(args.scenario).to_string(), end="")
            return EXIT_OK
        if args.command == "solve":
            cfg = RunConfig.load(args.config)
        elif args.config:
            cfg = RunConfig.load(args.config)
            if cfg.scenario != args.command:
                raise ConfigError(f"config is for {cfg.scenario!r}, not {args.command!r}")
        else:
            cfg = default_config(args.command)
        cfg = cfg.with_overrides(args.override)
        out = output_directory(cfg, args.output)
        result = run_scenario(cfg, out)
    except (ConfigError, MeshConfigurationError, NciError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalBlowUp, NonFiniteStateError) as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    failed = _report(cfg, result)
    print(f"outputs written to {out}")
    return EXIT_BLOWUP if failed else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
