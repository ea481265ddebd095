"""orbench: run benchmark grids, train the demo policy, list environments.

Reports are written as CSV or JSON; unless told otherwise the run and
train-cem commands also render a PNG figure next to the report file.
"""
from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from ..core import OrSuiteError
from ..registry import ALIASES, env_ids, make_config, resolve
from .cem import cem_train
from .figures import save_benchmark_figure, save_curve_figure
from .harness import available_methods, run_benchmark
from .report import emit_report


def _coerce(text: str, template) -> object:
    """Parse a --set value using the config field's default as the type hint."""
    if isinstance(template, bool):
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if isinstance(template, int):
        return int(text)
    if isinstance(template, float):
        return float(text)
    if isinstance(template, tuple):
        parts = [p.strip() for p in text.split(",") if p.strip()]
        inner = template[0] if template else 0.0
        if isinstance(inner, tuple):
            raise ValueError("nested tuple fields cannot be set from the command line")
        cast = int if isinstance(inner, int) and not isinstance(inner, bool) else float
        return tuple(cast(p) for p in parts)
    return text


def parse_overrides(env_id: str, pairs: list[str]) -> dict:
    """`--set key=value` pairs mapped onto the env's config fields."""
    spec = resolve(env_id)
    fields = spec.config_cls.__dataclass_fields__
    defaults = spec.config_cls()
    overrides = {}
    for pair in pairs:
        key, sep, text = pair.partition("=")
        key = key.strip()
        if not sep:
            raise OrSuiteError(f"--set expects key=value, got {pair!r}")
        if key not in fields:
            valid = ", ".join(sorted(fields))
            raise OrSuiteError(f"unknown config key {key!r}; valid keys: {valid}")
        try:
            overrides[key] = _coerce(text.strip(), getattr(defaults, key))
        except ValueError as exc:
            raise OrSuiteError(f"bad value for {key!r}: {exc}") from exc
    return overrides


def _cmd_run(args: argparse.Namespace) -> int:
    overrides = parse_overrides(args.env, args.set or [])
    methods = [m.strip() for m in args.methods.split(",") if m.strip()] if args.methods else None
    report = run_benchmark(
        args.env,
        methods=methods,
        episodes=args.episodes,
        seed=args.seed,
        overrides=overrides,
    )
    out = Path(args.out) if args.out else Path(f"{report.env_id}-report.{args.format}")
    emit_report(report, args.format, out)
    print(f"report: {out}")
    for r in report.results:
        print(
            f"  {r.method:<10} mean {r.mean:12.4f}  std {r.std:10.4f}  "
            f"ratio {r.ratio:8.4f}  ({r.seconds:.2f}s)"
        )
    if not args.no_plot:
        figure = out.with_suffix(".png")
        save_benchmark_figure(report, figure)
        print(f"figure: {figure}")
    return 0


def _cmd_train_cem(args: argparse.Namespace) -> int:
    overrides = parse_overrides(args.env, args.set or [])
    policy, curve = cem_train(
        args.env,
        iterations=args.iterations,
        population=args.population,
        elite_frac=args.elite_frac,
        seed=args.seed,
        overrides=overrides,
        eval_episodes=args.eval_episodes,
    )
    out = Path(args.out) if args.out else Path(f"{resolve(args.env).env_id}-cem.csv")
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["iteration", "mean_reward"])
        for i, value in enumerate(curve):
            writer.writerow([i, repr(float(value))])
    print(f"curve: {out}")
    first, last = curve[0], curve[-1]
    print(f"  start {first:.4f} -> final {last:.4f} over {len(curve) - 1} iterations")
    weights = out.with_suffix(".npy")
    np.save(weights, policy.weights)
    print(f"weights: {weights}")
    if not args.no_plot:
        figure = out.with_suffix(".png")
        save_curve_figure(
            curve, figure, title=f"cem on {resolve(args.env).env_id}, seed {args.seed}"
        )
        print(f"figure: {figure}")
    return 0


def _cmd_list(_args: argparse.Namespace) -> int:
    for env_id in env_ids():
        spec = resolve(env_id)
        methods = ", ".join(available_methods(env_id))
        print(f"{env_id:<22} {spec.summary}")
        print(f"{'':<22} methods: {methods}")
    for alias, target in sorted(ALIASES.items()):
        print(f"{alias:<22} alias of {target}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orbench",
        description="benchmark harness for the operations-research environment suite",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate methods on one environment")
    run.add_argument("--env", required=True, help="environment id (see: orbench list)")
    run.add_argument("--methods", help="comma-separated method names; default all")
    run.add_argument("--episodes", type=int, default=100)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--out", help="report path; default <env>-report.<format>")
    run.add_argument("--format", choices=("csv", "json"), default="csv")
    run.add_argument("--set", action="append", metavar="KEY=VALUE",
                     help="override a config field, repeatable")
    run.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    run.set_defaults(func=_cmd_run)

    train = sub.add_parser("train-cem", help="train the linear demo policy")
    train.add_argument("--env", required=True)
    train.add_argument("--iterations", type=int, default=50)
    train.add_argument("--population", type=int, default=64)
    train.add_argument("--elite-frac", type=float, default=0.2)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--eval-episodes", type=int, default=4)
    train.add_argument("--out", help="curve path; default <env>-cem.csv")
    train.add_argument("--set", action="append", metavar="KEY=VALUE")
    train.add_argument("--no-plot", action="store_true")
    train.set_defaults(func=_cmd_train_cem)

    lister = sub.add_parser("list", help="list environment ids and methods")
    lister.set_defaults(func=_cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OrSuiteError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
