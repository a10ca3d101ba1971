"""Standalone renderer for orderlab CSV outputs."""

from __future__ import annotations

import argparse
import json
import sys

from .readers import InputError
from .render import FigureSpec, render, render_fit


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="orderlab-plots",
        description="Render deviation-width panels and max-degree scaling fits"
                    " from orderlab CSV files.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_dev = sub.add_parser("deviation", help="per-density panels, one curve per coverage")
    p_dev.add_argument("--csv", required=True, help="sweep CSV path")
    p_dev.add_argument("--metric", choices=["f", "g"], default="g")
    p_dev.add_argument("--stat", choices=["mean", "std", "iqr"], default="iqr")
    p_dev.add_argument("--linear", action="store_true", help="linear axes instead of log-log")
    p_dev.add_argument("--no-slope", action="store_true", help="drop slope annotations")
    p_dev.add_argument("--bound", action="store_true",
                       help="overlay the analytic bound (mean-FNR figure only)")
    p_dev.add_argument("--out", default="deviation.png")
    p_dev.set_defaults(kind="deviation")

    p_fit = sub.add_parser("maxdeg-fit", help="log-log max-degree scaling figure")
    p_fit.add_argument("--csv", required=True, help="max-degree CSV path")
    p_fit.add_argument("--out", default="maxdeg.png")
    p_fit.set_defaults(kind="maxdeg-fit")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.kind == "deviation":
            spec = FigureSpec(
                input_csv=args.csv, metric=args.metric, stat=args.stat,
                loglog=not args.linear, annotate_slope=not args.no_slope,
                overlay_bound=args.bound, out=args.out,
            )
            summary = render(spec)
            slopes = {f"{k[0]:g}/{k[1]:g}": v for k, v in summary.slopes.items()}
            print(json.dumps({"out": summary.out_files, "slopes": slopes}, sort_keys=True))
        else:
            spec = FigureSpec(input_csv=args.csv, out=args.out)
            summary = render_fit(spec)
            print(json.dumps({
                "out": summary.out_files,
                "gamma_hat": summary.gamma_hat,
                "r2": summary.r2,
            }, sort_keys=True))
        return 0
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
