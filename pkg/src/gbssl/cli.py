"""Command line benchmark driver.

Each subcommand runs a sweep (or the demo), writes the aggregated report
as CSV, and renders a matching figure next to it. Without --out the CSV
goes to stdout and no figure is produced.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import harness
from .errors import GbsslError

SWEEP_LABELS = {
    "sweep-imbalance": "initial var(r)",
    "sweep-k": "neighborhood size k",
    "sweep-s": "stopping threshold s",
}


def _add_common_options(parser: argparse.ArgumentParser, with_dataset: bool) -> None:
    if with_dataset:
        parser.add_argument(
            "--dataset",
            choices=harness.DATASET_NAMES,
            required=True,
            help="dataset to benchmark on",
        )
        parser.add_argument(
            "--data-path",
            help="CSV file (iris, ionosphere) or IDX directory (mnist5, mnist10)",
        )
    parser.add_argument(
        "--method",
        choices=harness.METHOD_NAMES,
        help="run a single method arm instead of the default five",
    )
    parser.add_argument(
        "--inno",
        action=argparse.BooleanOptionalAction,
        default=False,
        help="balance the labeled set before propagating (with --method)",
    )
    parser.add_argument("--k", type=int, help="neighborhood size (dataset default)")
    parser.add_argument("--sigma", type=float, help="RBF bandwidth (dataset default)")
    parser.add_argument("--alpha", type=float, default=0.99, help="LGC mixing weight")
    parser.add_argument(
        "--stop-s", type=float, default=0.0, help="balancing stop threshold"
    )
    parser.add_argument("--runs", type=int, default=50, help="paired runs per point")
    parser.add_argument("--seed", type=int, default=0, help="base random seed")
    parser.add_argument(
        "--var-divisor",
        choices=("c-1", "c"),
        default="c-1",
        help="divisor in the count-variance statistic",
    )
    parser.add_argument("--out", help="report CSV path (stdout when omitted)")
    parser.add_argument(
        "--no-plot",
        action="store_true",
        help="skip rendering the figure next to the CSV",
    )


def _add_moons_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--n-per-class", type=int, default=100, help="arc points per class"
    )
    parser.add_argument("--noise", type=float, default=0.12, help="arc jitter stddev")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gbssl",
        description=(
            "Graph-based semi-supervised learning benchmarks with "
            "labeled-set balancing"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_imb = sub.add_parser(
        "sweep-imbalance", help="vary labeled-set skew at fixed total size"
    )
    _add_common_options(p_imb, with_dataset=True)
    _add_moons_options(p_imb)

    p_k = sub.add_parser("sweep-k", help="vary the kNN neighborhood size")
    _add_common_options(p_k, with_dataset=True)
    _add_moons_options(p_k)
    p_k.add_argument(
        "--k-values",
        default="1,2,3,5,8,10,15,20,30,40",
        help="comma separated k grid",
    )

    p_s = sub.add_parser("sweep-s", help="vary the balancing stop threshold")
    _add_common_options(p_s, with_dataset=True)
    _add_moons_options(p_s)
    p_s.add_argument(
        "--s-values",
        help="comma separated s grid, swept in the given order "
        "(default: descending from the initial variance to 0)",
    )

    p_demo = sub.add_parser(
        "demo-two-moons", help="single-split demo on the synthetic arcs"
    )
    _add_common_options(p_demo, with_dataset=False)
    _add_moons_options(p_demo)

    return parser


def _config_from_args(args: argparse.Namespace) -> harness.ExperimentConfig:
    return harness.ExperimentConfig(
        dataset=getattr(args, "dataset", None) or "two-moons",
        data_path=getattr(args, "data_path", None),
        method=args.method,
        use_inno=args.inno,
        k=args.k,
        sigma=args.sigma,
        alpha=args.alpha,
        stop_s=args.stop_s,
        runs=args.runs,
        base_seed=args.seed,
        var_divisor=args.var_divisor,
        moons_n_per_class=args.n_per_class,
        moons_noise=args.noise,
    )


def _parse_grid(text: str, kind) -> list:
    try:
        return [kind(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise GbsslError(f"bad grid value in {text!r}: {exc}") from exc


def _default_s_grid(config: harness.ExperimentConfig) -> list[float]:
    dataset = harness.load_config_dataset(config)
    counts = config.labeled_counts or harness.default_counts(
        config.dataset, dataset.class_count
    )
    top = harness.imbalance_variance(counts, config.var_divisor)
    return [round(float(v), 4) for v in np.linspace(top, 0.0, 7)]


def _write_outputs(rows, demo, args, x_label: str, title: str) -> None:
    text = harness.format_csv(rows)
    if not args.out:
        sys.stdout.write(text)
        return
    out = Path(args.out)
    if out.parent and not out.parent.exists():
        out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {out}")
    if args.no_plot:
        return
    from . import plotting  # deferred: matplotlib import is slow

    figure_path = out.with_suffix(".png")
    if demo is not None:
        plotting.save_demo_figure(demo, figure_path)
    else:
        plotting.save_sweep_figure(rows, figure_path, x_label, title)
    print(f"wrote {figure_path}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
        demo = None
        if args.command == "sweep-imbalance":
            rows = harness.sweep_imbalance(config)
            title = f"{config.dataset}: labeled-set skew sweep"
        elif args.command == "sweep-k":
            rows = harness.sweep_k(config, _parse_grid(args.k_values, int))
            title = f"{config.dataset}: neighborhood size sweep"
        elif args.command == "sweep-s":
            grid = (
                _parse_grid(args.s_values, float)
                if args.s_values
                else _default_s_grid(config)
            )
            rows = harness.sweep_s(config, grid)
            title = f"{config.dataset}: stop threshold sweep"
        else:
            demo = harness.run_demo(config)
            rows = demo.rows
            title = "two-moons demo"
        _write_outputs(rows, demo, args, SWEEP_LABELS.get(args.command, ""), title)
    except GbsslError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
