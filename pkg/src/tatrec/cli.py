"""Command-line entry point: ``tatrec run | list-experiments | verify``.

Exit codes: 0 success, 1 error, 2 a verification band failed.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import verify
from .errors import ConfigError, TatrecError
from .experiment import METHODS, load_config, run_configs, shipped_configs

EXIT_OK, EXIT_ERROR, EXIT_BAND = 0, 1, 2


def _resolve_config(name: str) -> Path:
    path = Path(name)
    if path.is_file():
        return path
    shipped = shipped_configs()
    if name in shipped:
        return shipped[name]
    raise ConfigError(f"no config file or shipped experiment named {name!r}")


def cmd_run(args) -> int:
    configs = load_config(
        _resolve_config(args.config), method=args.method, iters=args.iters, scale=args.scale, seed=args.seed
    )
    for cfg in configs:
        cfg.out = str(Path(args.out) / cfg.name)
    reports = run_configs(configs, write=True, save_data=args.save_data)
    failed = False
    for cfg, rep in zip(configs, reports):
        if rep.status != "ok":
            failed = True
            print(f"{cfg.name:32s} {cfg.method:4s} {rep.status}")
            continue
        print(
            f"{cfg.name:32s} {cfg.method:4s} best {rep.best_error:7.3f}% at iteration {rep.best_iteration:3d}"
            f"  final {rep.errors[-1]:7.3f}%  {rep.total_seconds:7.1f}s"
        )
        for flag in rep.flags:
            print(f"{'':32s} {'':4s} note: {flag}")
    return EXIT_ERROR if failed else EXIT_OK


def cmd_list(args) -> int:
    for name, path in shipped_configs().items():
        raw = json.loads(path.read_text())
        print(f"{name:24s} {raw.get('description', '')}")
    return EXIT_OK


def cmd_verify(args) -> int:
    kwargs = {}
    if args.scale is not None:
        if args.suite == "adjoint":
            kwargs["n"] = args.scale
        else:
            kwargs["scale"] = args.scale
    checks = verify.SUITES[args.suite](**kwargs)
    for c in checks:
        print(c.line())
    return EXIT_OK if verify.all_passed(checks) else EXIT_BAND


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="tatrec", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment config (file path or shipped name)")
    r.add_argument("--config", required=True)
    r.add_argument("--method", choices=METHODS)
    r.add_argument("--iters", type=int)
    r.add_argument("--scale", type=int, help="cells across the object window")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", default="runs")
    r.add_argument("--save-data", action="store_true", help="also write the simulated traces")
    r.set_defaults(func=cmd_run)

    ls = sub.add_parser("list-experiments", help="list shipped experiment configs")
    ls.set_defaults(func=cmd_list)

    v = sub.add_parser("verify", help="run a numerical check suite")
    v.add_argument("--suite", required=True, choices=sorted(verify.SUITES))
    v.add_argument("--scale", type=int, help="grid size (adjoint) or object scale (others)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except TatrecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
