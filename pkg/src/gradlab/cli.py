"""Command-line entry point.

Exit codes: 0 all assertions passed, 1 an assertion failed, 2 usage or
config error, 3 runtime error.
"""

import argparse
import json
import logging
import sys

from .exceptions import ConfigError, GradlabError
from .experiment import apply_overrides, format_summary, load_config, run_experiment, \
    write_artifacts
from .presets import preset, preset_names

EXIT_OK, EXIT_ASSERTION, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2, 3


def _add_overrides(p):
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--dt", type=float, help="override integrator.dt")
    p.add_argument("--t-end", type=float, help="override integrator.t_end")
    p.add_argument("--n-modes", type=int, help="override n_modes")


def build_parser():
    parser = argparse.ArgumentParser(prog="gradlab", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run an experiment from a JSON config")
    p.add_argument("--config", required=True, help="path to a JSON config")
    _add_overrides(p)

    p = sub.add_parser("preset", help="run a pinned preset")
    p.add_argument("name", help="preset name (see list-presets)")
    p.add_argument("--dump", action="store_true", help="print the config as JSON and exit")
    _add_overrides(p)

    sub.add_parser("list-presets", help="list preset names")
    return parser


def _execute(cfg, args):
    cfg = apply_overrides(cfg, seed=args.seed, dt=args.dt, t_end=args.t_end,
                          n_modes=args.n_modes)
    report = run_experiment(cfg)
    paths = write_artifacts(report, args.out)
    print(format_summary(report))
    for kind, path in sorted(paths.items()):
        print(f"  wrote {kind}: {path}")
    return EXIT_OK if report.passed else EXIT_ASSERTION


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "list-presets":
        for name in preset_names():
            print(name)
        return EXIT_OK

    exp_id = getattr(args, "name", None) or getattr(args, "config", None)
    try:
        if args.command == "preset":
            cfg = preset(args.name)
            if args.dump:
                print(json.dumps(cfg, indent=2))
                return EXIT_OK
        else:
            cfg = load_config(args.config)
            exp_id = cfg.get("id", exp_id)
        return _execute(cfg, args)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"gradlab: config error ({exp_id}): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GradlabError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"gradlab: runtime error ({exp_id}): {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
