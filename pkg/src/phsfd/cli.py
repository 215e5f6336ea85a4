"""Command-line entry point.

Subcommands: converge-h, converge-r, terms (sweep modes writing a CSV
report), solve (one pipeline run to CSV), nodes (one discretisation to
CSV).  Flag values override config-file values, which override the
built-in defaults.
"""

import argparse
import json
import math
import sys

from . import experiments
from .backends import active_backend
from .errors import ConfigError, PhsfdError

MODE_DEFAULTS = {
    # mode: (m_list, h_list, R_list)
    "converge-h": (experiments.DEFAULT_M, experiments.DEFAULT_H, [1.0]),
    "converge-r": (experiments.DEFAULT_M, [0.05], experiments.DEFAULT_R),
    "terms": ([2], experiments.DEFAULT_H, [1.0]),
    "solve": ([2], [0.05], [1.0]),
    "nodes": ([2], [0.05], [1.0]),
}


def _parse_list(text, cast, flag):
    try:
        values = [cast(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise ConfigError(f"{flag}: could not parse {text!r} as a comma list") from None
    if not values:
        raise ConfigError(f"{flag}: empty list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phsfd",
        description="Meshless Poisson solver on the unit disc and its convergence experiments.",
    )
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode, helptext in [
        ("converge-h", "error norms under decreasing spacing; fits per-degree slopes"),
        ("converge-r", "error norms against the dilation factor at fixed spacing"),
        ("terms", "per-degree truncation terms before/after global inversion"),
        ("solve", "one pipeline run; CSV of numerical vs exact solution"),
        ("nodes", "one discretisation; CSV of node positions and kinds"),
    ]:
        p = sub.add_parser(mode, help=helptext)
        p.add_argument("--m", help="comma list of augmentation degrees in [2, 6]")
        p.add_argument("--h", help="comma list of spacings in (0, 2)")
        p.add_argument("--r", help="comma list of positive dilation factors")
        p.add_argument("--seeds", help="number of discretisation seeds (0..seeds-1)")
        p.add_argument("--seed", help="single seed for solve/nodes (default 0)")
        p.add_argument("--tol", help="solver relative-residual tolerance")
        p.add_argument("--dmax", help="largest truncation-term degree (terms mode)")
        p.add_argument("--out", help="output CSV path (default <mode>.csv)")
        p.add_argument("--config", help="JSON file with keys m,h,r,seeds,seed,tol,dmax,out")
    return parser


def parse_config(args: argparse.Namespace) -> experiments.ExperimentConfig:
    """Merge defaults, config-file values, and flags into a validated config."""
    filevals = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                filevals = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config: {exc}") from None
        if not isinstance(filevals, dict):
            raise ConfigError("--config: file must hold a JSON object")

    m_default, h_default, r_default = MODE_DEFAULTS[args.mode]

    def pick(flag, key, filecast):
        flagval = getattr(args, key, None)
        if flagval is not None:
            return flagval, True
        if key in filevals:
            return filecast(filevals[key]), False
        return None, False

    def pick_list(key, cast, default):
        raw, from_flag = pick(f"--{key}", key, lambda v: v)
        if raw is None:
            return list(default)
        if from_flag:
            return _parse_list(raw, cast, f"--{key}")
        if not isinstance(raw, list):
            raw = [raw]
        try:
            return [cast(v) for v in raw]
        except (TypeError, ValueError):
            raise ConfigError(f"--config: key {key!r} holds non-numeric values") from None

    def pick_scalar(key, cast, default):
        raw, _ = pick(f"--{key}", key, lambda v: v)
        if raw is None:
            return default
        try:
            value = cast(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"--{key}: could not parse {raw!r}") from None
        if isinstance(value, float) and not math.isfinite(value):
            raise ConfigError(f"--{key}: value must be finite, got {raw!r}")
        return value

    config = experiments.ExperimentConfig(
        mode=args.mode,
        m_list=pick_list("m", int, m_default),
        h_list=pick_list("h", float, h_default),
        R_list=pick_list("r", float, r_default),
        seeds=pick_scalar("seeds", int, experiments.DEFAULT_SEEDS),
        tol=pick_scalar("tol", float, experiments.DEFAULT_TOL),
        d_max=pick_scalar("dmax", int, None),
        out=pick_scalar("out", str, None),
    )
    config.validate()
    return config


def _single_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        try:
            return int(args.seed)
        except ValueError:
            raise ConfigError(f"--seed: could not parse {args.seed!r}") from None
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            filevals = json.load(fh)
        if "seed" in filevals:
            return int(filevals["seed"])
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = parse_config(args)
        out = config.out or f"{config.mode}.csv"
        if config.mode == "nodes":
            text = experiments.node_table(config.h_list[0], _single_seed(args))
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            print(f"wrote {out}")
        elif config.mode == "solve":
            text = experiments.solution_table(
                config.h_list[0], config.m_list[0], _single_seed(args),
                config.R_list[0], config.tol,
            )
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            print(f"wrote {out}")
        else:
            report = experiments.run_mode(config)
            experiments.write_report(report, out)
            print(f"wrote {out} (backend: {active_backend()})")
            for s in report.slopes:
                if s.norm_kind == "mean_l1":
                    print(f"  m={s.m} {s.group}: slope {s.slope:.3f}")
            for msg in report.failures:
                print(f"  FAILED CELL: {msg}", file=sys.stderr)
    except ConfigError as exc:
        parser.error(str(exc))
    except PhsfdError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
