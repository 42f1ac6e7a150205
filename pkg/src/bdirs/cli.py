"""Command-line entry point: ``bdirs {convergence,sweep-power,sweep-elements,selfcheck}``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .experiment import (DESK_SCALE, ConfigError, load_config, run_convergence, run_sweep)
from .selfcheck import format_table, run_selfcheck

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bdirs", description="BD-IRS OFDM rate experiments")
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("convergence", "AO objective trace for one realization"),
                        ("sweep-power", "mean rate versus transmit power"),
                        ("sweep-elements", "mean rate versus number of elements"),
                        ("selfcheck", "run the invariant suites and print a pass/fail table")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, help="JSON config; missing keys use the reference defaults")
        s.add_argument("--seed", type=int, help="master seed (overrides config)")
        s.add_argument("--desk", action="store_true",
                       help="desk-scale overrides: M=4, N=16, 20 realizations")
        s.add_argument("-v", "--verbose", action="store_true")
        if name == "selfcheck":
            continue
        s.add_argument("--out", type=Path, default=Path("."), help="output directory")
        s.add_argument("--emit-plots", action="store_true", help="also write an SVG line chart")
        if name == "convergence":
            s.add_argument("--index", type=int, default=0, help="realization index")
        else:
            s.add_argument("--realizations", type=int)
            s.add_argument("--schemes", help="comma-separated scheme names")
            s.add_argument("--workers", type=int, default=1, help="worker processes")
            s.add_argument("--details", action="store_true",
                           help="also write per-realization rates")
    return p


def _overrides(args) -> dict:
    ov = dict(DESK_SCALE) if args.desk else {}
    if args.seed is not None:
        ov["master_seed"] = args.seed
    if getattr(args, "realizations", None) is not None:
        ov["realizations"] = args.realizations
    if getattr(args, "schemes", None):
        ov["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    return ov


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="")
    print(f"wrote {path}")


def _plot(path: Path, series: dict, xlabel: str, ylabel: str) -> None:
    import matplotlib
    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4))
    for label, (x, y) in series.items():
        ax.plot(x, y, marker="o", label=label)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)
    if len(series) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
    print(f"wrote {path}")


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, _overrides(args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "selfcheck":
        checks = run_selfcheck(cfg)
        print(format_table(checks))
        failed = [c for c in checks if not c.passed and not c.report_only]
        return EXIT_FAIL if failed else EXIT_OK

    if args.command == "convergence":
        res = run_convergence(cfg, args.index)
        _write(args.out / "convergence.csv", res.csv())
        if args.emit_plots:
            it = list(range(1, len(res.rates) + 1))
            _plot(args.out / "convergence.svg", {"proposed": (it, res.rates)},
                  "outer iteration", "rate (bps/Hz)")
        return EXIT_OK

    axis = "power" if args.command == "sweep-power" else "elements"
    if args.workers < 1:
        print("config error: --workers must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    res = run_sweep(cfg, axis, workers=args.workers)
    stem = f"sweep_{axis}"
    _write(args.out / f"{stem}.csv", res.csv())
    if args.details:
        _write(args.out / f"{stem}_details.csv", res.details_csv())
    if args.emit_plots:
        series = {}
        for v, scheme, mean, *_ in res.rows:
            xs, ys = series.setdefault(scheme, ([], []))
            xs.append(v)
            ys.append(mean)
        _plot(args.out / f"{stem}.svg", series,
              "transmit power (dBm)" if axis == "power" else "number of elements M", "rate (bps/Hz)")
    failures = sum(r[5] for r in res.rows) // max(len(cfg.schemes), 1)
    if failures:
        print(f"{failures} realization(s) failed; see the failures column", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
