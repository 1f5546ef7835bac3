"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 instability
(non-finite values or clamp budget exceeded), 5 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ConfigError, KernelConfig, StabilityConfig, TimeConfig, dumps, load_config, preset
from .kernel import FAMILIES
from .operator import StepFailure
from .output import output_root, run_scenario
from .verify import verify_operator, verify_transforms

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INSTABILITY = 4
EXIT_VERIFY = 5

log = logging.getLogger("peririchards")


def _apply_overrides(cfg, args):
    if getattr(args, "kernel", None) or getattr(args, "delta", None) is not None:
        cfg = replace(
            cfg,
            kernel=KernelConfig(args.kernel or cfg.kernel.family, cfg.kernel.delta if args.delta is None else args.delta),
        )
    if getattr(args, "snapshots", None) is not None:
        cfg = replace(cfg, time=TimeConfig(cfg.time.duration, cfg.time.dt, args.snapshots))
    if getattr(args, "max_clamps", None) is not None:
        cfg = replace(cfg, stability=StabilityConfig(cfg.stability.clamp_tolerance, args.max_clamps))
    if getattr(args, "n_modes", None) is not None:
        cfg = cfg.with_n_modes(args.n_modes)
    return cfg


def _run_one(cfg, out_dir):
    """Run and report; returns an exit code."""
    try:
        record, paths = run_scenario(cfg, out_dir)
    except StepFailure as exc:
        print(f"{cfg.label}: instability: {exc}", file=sys.stderr)
        for fmt, path in getattr(exc, "paths", {}).items():
            print(f"  partial {fmt}: {path}", file=sys.stderr)
        return EXIT_INSTABILITY
    d = record.diagnostics
    print(
        f"{cfg.label}: {d['steps_taken']} steps to t = {record.times[-1]:g} s, "
        f"{len(record.times)} snapshots, theta in [{d['theta_min']:.6g}, {d['theta_max']:.6g}], "
        f"clamps {d['clamp_count']}"
    )
    for fmt, path in paths.items():
        print(f"  {fmt}: {path}")
    return EXIT_OK


def cmd_run(args):
    cfg = _apply_overrides(load_config(args.config), args)
    out = Path(args.out) if args.out else output_root() / cfg.label
    return _run_one(cfg, out)


def cmd_verify_transforms(args):
    report = verify_transforms(args.max_degree, inject_fault=args.inject_fault)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_verify_operator(args):
    cfg = _apply_overrides(load_config(args.config), args)
    report = verify_operator(cfg, args.n, oracle=not args.no_oracle)
    print(report.format())
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_sweep(args):
    base = _apply_overrides(load_config(args.config), args)
    variants = []
    for fam in args.kernels or [base.kernel.family]:
        for delta in args.deltas or [base.kernel.delta]:
            cfg = base.with_kernel(fam, delta)
            variants.append(replace(cfg, label=f"{base.label}-{fam}-d{delta:g}"))
    root = Path(args.out) if args.out else output_root() / f"{base.label}-sweep"
    codes = [_run_one(cfg, root / cfg.label) for cfg in variants]
    return EXIT_INSTABILITY if any(c == EXIT_INSTABILITY for c in codes) else EXIT_OK


def cmd_presets(args):
    if args.action == "list":
        for name in PRESETS:
            cfg = preset(name)
            print(f"{name}  N={cfg.n_modes}  T={cfg.time.duration:g}s  dt={cfg.time.dt:g}s  sha256={cfg.digest()}")
    else:
        if not args.name:
            raise ConfigError("presets show needs a preset name")
        sys.stdout.write(dumps(preset(args.name)))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="peririchards", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="verb", required=True)

    def overrides(sp, snapshots=True):
        sp.add_argument("config", help="preset name or path to a configuration file")
        sp.add_argument("--kernel", choices=FAMILIES)
        sp.add_argument("--delta", type=float)
        sp.add_argument("--n-modes", type=int)
        sp.add_argument("--max-clamps", type=int, help="stop with the instability exit code past this many clamps")
        if snapshots:
            sp.add_argument("--snapshots", type=int, help="number of snapshots including t = 0 and t = T")

    sp = sub.add_parser("run", help="run a configuration or preset")
    overrides(sp)
    sp.add_argument("--out", help="output directory (default: $PERIRICHARDS_OUTPUT/<label>)")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("verify-transforms", help="check the Chebyshev transform properties")
    sp.add_argument("--max-degree", type=int, default=256)
    sp.add_argument("--inject-fault", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify_transforms)

    sp = sub.add_parser("verify-operator", help="oracle discrepancy and self-convergence report")
    overrides(sp, snapshots=False)
    sp.add_argument("--n", type=int, nargs="+", default=[32, 64, 128])
    sp.add_argument("--no-oracle", action="store_true", help="skip the quadrature discrepancy table")
    sp.set_defaults(func=cmd_verify_operator)

    sp = sub.add_parser("sweep", help="run a configuration over kernel families and/or horizons")
    overrides(sp)
    sp.add_argument("--kernels", nargs="+", choices=FAMILIES)
    sp.add_argument("--deltas", nargs="+", type=float)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("presets", help="list or print the built-in presets")
    sp.add_argument("action", choices=("list", "show"))
    sp.add_argument("name", nargs="?")
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, ArithmeticError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
